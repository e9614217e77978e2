#include "entroflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "entroflow/errors.hpp"

namespace entroflow::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("not a number: '" + std::string(v) + "'");
  }
  return out;
}

long long parse_int(std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("not an integer: '" + std::string(v) + "'");
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

ProfileKind parse_profile_kind(std::string_view v) {
  if (v == "constant") return ProfileKind::Constant;
  if (v == "piecewise") return ProfileKind::Piecewise;
  if (v == "sinusoidal") return ProfileKind::Sinusoidal;
  throw ConfigError("unknown profile kind '" + std::string(v) + "'");
}

std::string profile_kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::Constant: return "constant";
    case ProfileKind::Piecewise: return "piecewise";
    case ProfileKind::Sinusoidal: return "sinusoidal";
  }
  return "constant";
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Ref>
Field real_field(std::string key, Ref ref) {
  return {std::move(key), [ref](RunConfig& c, std::string_view v) { ref(c) = parse_double(v); },
          [ref](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Field int_field(std::string key, Ref ref) {
  return {std::move(key),
          [ref](RunConfig& c, std::string_view v) {
            const long long x = parse_int(v);
            if (x < -2147483647LL || x > 2147483647LL) throw ConfigError("integer out of range");
            ref(c) = static_cast<int>(x);
          },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

void add_profile(std::vector<Field>& fields, const std::string& prefix,
                 std::function<TimeProfile&(RunConfig&)> ref) {
  fields.push_back({prefix + ".kind",
                    [ref](RunConfig& c, std::string_view v) { ref(c).kind = parse_profile_kind(v); },
                    [ref](const RunConfig& c) {
                      return profile_kind_name(ref(const_cast<RunConfig&>(c)).kind);
                    }});
  fields.push_back(real_field(prefix + ".value", [ref](RunConfig& c) -> double& { return ref(c).value; }));
  fields.push_back(real_field(prefix + ".value_after",
                              [ref](RunConfig& c) -> double& { return ref(c).value_after; }));
  fields.push_back(real_field(prefix + ".switch_time",
                              [ref](RunConfig& c) -> double& { return ref(c).switch_time; }));
  fields.push_back(real_field(prefix + ".amplitude",
                              [ref](RunConfig& c) -> double& { return ref(c).amplitude; }));
  fields.push_back(real_field(prefix + ".period", [ref](RunConfig& c) -> double& { return ref(c).period; }));
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(int_field("mesh.n_cells", [](RunConfig& c) -> int& { return c.setup.n_cells; }));
    f.push_back(real_field("mesh.length", [](RunConfig& c) -> double& { return c.setup.length; }));
    f.push_back(real_field("time.T", [](RunConfig& c) -> double& { return c.setup.T; }));
    f.push_back(int_field("time.N", [](RunConfig& c) -> int& { return c.setup.N; }));
    f.push_back(real_field("phys.c_s", [](RunConfig& c) -> double& { return c.setup.phys.c_s; }));
    f.push_back(real_field("phys.eta", [](RunConfig& c) -> double& { return c.setup.phys.eta; }));
    f.push_back(real_field("phys.gamma", [](RunConfig& c) -> double& { return c.setup.phys.gamma; }));
    f.push_back(real_field("phys.tau", [](RunConfig& c) -> double& { return c.setup.phys.tau; }));
    f.push_back(real_field("phys.eps", [](RunConfig& c) -> double& { return c.setup.phys.eps; }));
    f.push_back({"phys.graph",
                 [](RunConfig& c, std::string_view v) {
                   const auto k = graphs::parse_graph_kind(v);
                   if (!k) throw ConfigError("unknown graph '" + std::string(v) + "'");
                   c.setup.phys.graph.kind = *k;
                 },
                 [](const RunConfig& c) { return std::string(graphs::to_string(c.setup.phys.graph.kind)); }});
    f.push_back(real_field("phys.theta_a", [](RunConfig& c) -> double& { return c.setup.phys.theta_a; }));
    f.push_back(real_field("phys.theta_b", [](RunConfig& c) -> double& { return c.setup.phys.theta_b; }));
    f.push_back(real_field("phys.lambda_a1", [](RunConfig& c) -> double& { return c.setup.phys.latent.a1; }));
    f.push_back(real_field("phys.lambda_a2", [](RunConfig& c) -> double& { return c.setup.phys.latent.a2; }));
    f.push_back(real_field("bounds.theta_min", [](RunConfig& c) -> double& { return c.setup.data.theta_min; }));
    f.push_back(real_field("bounds.theta_max", [](RunConfig& c) -> double& { return c.setup.data.theta_max; }));
    f.push_back(real_field("bounds.alpha_min", [](RunConfig& c) -> double& { return c.setup.data.alpha_min; }));
    f.push_back(real_field("bounds.alpha_max", [](RunConfig& c) -> double& { return c.setup.data.alpha_max; }));
    f.push_back(real_field("boundary.alpha0", [](RunConfig& c) -> double& { return c.setup.data.alpha0; }));
    f.push_back(real_field("boundary.alpha1", [](RunConfig& c) -> double& { return c.setup.data.alpha1; }));
    add_profile(f, "boundary.theta_left", [](RunConfig& c) -> TimeProfile& { return c.setup.data.theta_left; });
    add_profile(f, "boundary.theta_right", [](RunConfig& c) -> TimeProfile& { return c.setup.data.theta_right; });
    add_profile(f, "source", [](RunConfig& c) -> TimeProfile& { return c.setup.data.source.profile; });
    f.push_back(int_field("source.mode", [](RunConfig& c) -> int& { return c.setup.data.source.mode; }));
    auto ini = [](RunConfig& c) -> InitialSpec& { return c.setup.data.initial; };
    f.push_back(real_field("initial.theta_mean", [ini](RunConfig& c) -> double& { return ini(c).theta_mean; }));
    f.push_back(real_field("initial.theta_amplitude",
                           [ini](RunConfig& c) -> double& { return ini(c).theta_amplitude; }));
    f.push_back(int_field("initial.theta_mode", [ini](RunConfig& c) -> int& { return ini(c).theta_mode; }));
    f.push_back(real_field("initial.phi_mean", [ini](RunConfig& c) -> double& { return ini(c).phi_mean; }));
    f.push_back(real_field("initial.phi_amplitude",
                           [ini](RunConfig& c) -> double& { return ini(c).phi_amplitude; }));
    f.push_back(int_field("initial.phi_mode", [ini](RunConfig& c) -> int& { return ini(c).phi_mode; }));
    f.push_back(real_field("initial.phi_noise", [ini](RunConfig& c) -> double& { return ini(c).phi_noise; }));
    f.push_back(real_field("initial.mu0", [ini](RunConfig& c) -> double& { return ini(c).mu0; }));
    f.push_back({"output.dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
                 [](const RunConfig& c) { return c.out_dir; }});
    f.push_back({"seed",
                 [](RunConfig& c, std::string_view v) {
                   std::uint64_t s = 0;
                   const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
                   if (ec != std::errc() || ptr != v.data() + v.size()) {
                     throw ConfigError("not a seed: '" + std::string(v) + "'");
                   }
                   c.setup.data.seed = s;
                 },
                 [](const RunConfig& c) { return std::to_string(c.setup.data.seed); }});
    return f;
  }();
  return table;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError(where + "missing value for '" + std::string(key) + "'");
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    }
    try {
      it->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_text(const RunConfig& cfg) {
  std::ostringstream os;
  if (!cfg.name.empty()) os << "# preset: " << cfg.name << "\n";
  for (const Field& f : fields()) os << f.key << " = " << f.get(cfg) << "\n";
  return os.str();
}

void validate(const RunConfig& cfg, const stepper::SolverOptions& opt) {
  const Setup& s = cfg.setup;
  try {
    if (s.n_cells < 1) throw ConfigError("mesh.n_cells must be at least 1");
    if (!(s.length > 0.0)) throw ConfigError("mesh.length must be positive");
    if (!(s.T > 0.0)) throw ConfigError("time.T must be positive");
    if (s.N < 1) throw ConfigError("time.N must be at least 1");
    s.phys.validate();
    if (!(s.phys.tau > 0.0)) throw ConfigError("phys.tau must be positive for the scheme");
    for (const TimeProfile* p :
         {&s.data.theta_left, &s.data.theta_right, &s.data.source.profile}) {
      if (p->kind == ProfileKind::Sinusoidal && !(p->period > 0.0)) {
        throw ConfigError("sinusoidal profiles need a positive period");
      }
    }
    const stepper::StepGuard guard = stepper::step_guard_entries(s.phys);
    const double h = s.h();
    if (h > opt.safety * guard.h0 * (1.0 + 1e-12)) {
      const auto& b = guard.binding();
      std::ostringstream os;
      os << std::setprecision(17) << "h = T/N = " << h << " exceeds " << opt.safety
         << " * h0 = " << opt.safety * guard.h0 << "; binding guard entry " << b.name << " = "
         << b.value << "; need N >= " << static_cast<long long>(std::ceil(s.T / (opt.safety * guard.h0)));
      throw ConfigError(os.str());
    }
    const Mesh mesh = s.mesh();
    const BoundaryAndData data = make_data(s.data, mesh);
    data.validate(mesh, s.phys.graph);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace entroflow::cli
