#include "entroflow/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "entroflow/errors.hpp"

namespace entroflow::graphs {

namespace {

constexpr int kMaxRootIterations = 100;
constexpr double kRootTolerance = 1e-13;

void require_positive_eps(double eps) {
  if (!(eps > 0.0)) {
    throw PreconditionError("regularization parameter must be positive, got " +
                            std::to_string(eps));
  }
}

// Root of a strictly increasing residual on [lo, hi] with residual(lo) <= 0 <=
// residual(hi). Newton steps that leave the bracket are replaced by bisection.
template <class Residual, class Slope>
double safeguarded_newton(Residual residual, Slope slope, double lo, double hi,
                          double x, double tol, const char* what) {
  for (int it = 0; it < kMaxRootIterations; ++it) {
    const double f = residual(x);
    if (std::abs(f) <= tol) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double df = slope(x);
    double next = x - f / df;
    if (!(next > lo && next < hi) || !std::isfinite(next)) {
      next = 0.5 * (lo + hi);
    }
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, std::abs(x))) {
      // Bracket collapsed to adjacent doubles: x is the best representable root.
      return std::abs(residual(next)) < std::abs(f) ? next : x;
    }
    x = next;
  }
  throw SolverFailure(std::string(what) + ": root-find exceeded " +
                      std::to_string(kMaxRootIterations) + " iterations");
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Logarithmic resolvent in the variable t = atanh(s): tanh(t) + 2 eps t = r.
double log_prox_t(double eps, double r) {
  const double lo = (r - 1.0) / (2.0 * eps);
  const double hi = (r + 1.0) / (2.0 * eps);
  const double guess = std::clamp(std::atanh(std::clamp(r, -0.5, 0.5)), lo, hi);
  const double tol = kRootTolerance * std::max(1.0, std::abs(r));
  return safeguarded_newton(
      [&](double t) { return std::tanh(t) + 2.0 * eps * t - r; },
      [&](double t) {
        const double c = 1.0 / std::cosh(t);
        return c * c + 2.0 * eps;
      },
      lo, hi, guess, tol, "logarithmic resolvent");
}

// 1 - tanh(t) and 1 + tanh(t) without cancellation.
double one_minus_tanh(double t) {
  if (t <= 0.0) return 1.0 - std::tanh(t);
  const double e = std::exp(-2.0 * t);
  return 2.0 * e / (1.0 + e);
}
double one_plus_tanh(double t) { return one_minus_tanh(-t); }

double regular_prox(double eps, double r) {
  if (r == 0.0) return 0.0;
  const double a = std::abs(r);
  const double hi = std::min(a, std::cbrt(a / eps));
  const double tol = kRootTolerance * std::max(1.0, a);
  const double s = safeguarded_newton(
      [&](double x) { return x + eps * x * x * x - a; },
      [&](double x) { return 1.0 + 3.0 * eps * x * x; }, 0.0, hi, hi, tol,
      "regular resolvent");
  return std::copysign(s, r);
}

}  // namespace

std::string_view to_string(GraphKind kind) noexcept {
  switch (kind) {
    case GraphKind::Regular: return "regular";
    case GraphKind::Logarithmic: return "logarithmic";
    case GraphKind::Indicator: return "indicator";
  }
  return "unknown";
}

std::optional<GraphKind> parse_graph_kind(std::string_view name) noexcept {
  if (name == "regular") return GraphKind::Regular;
  if (name == "logarithmic" || name == "log") return GraphKind::Logarithmic;
  if (name == "indicator" || name == "obstacle") return GraphKind::Indicator;
  return std::nullopt;
}

double ExtendedReal::value() const {
  if (infinite_) throw std::logic_error("ExtendedReal: value() of +infinity");
  return value_;
}

double prox(GraphSpec g, double eps, double r) {
  require_positive_eps(eps);
  switch (g.kind) {
    case GraphKind::Indicator: return std::clamp(r, -1.0, 1.0);
    case GraphKind::Regular: return regular_prox(eps, r);
    case GraphKind::Logarithmic:
      if (r == 0.0) return 0.0;
      return std::tanh(log_prox_t(eps, r));
  }
  return 0.0;
}

double yosida(GraphSpec g, double eps, double r) {
  return (r - prox(g, eps, r)) / eps;
}

double yosida_derivative(GraphSpec g, double eps, double r) {
  require_positive_eps(eps);
  switch (g.kind) {
    case GraphKind::Indicator: return std::abs(r) > 1.0 ? 1.0 / eps : 0.0;
    case GraphKind::Regular: {
      const double s = regular_prox(eps, r);
      return 3.0 * s * s / (1.0 + 3.0 * eps * s * s);
    }
    case GraphKind::Logarithmic: {
      // beta'(s) = 2 / (1 - s^2) and 1 - tanh(t)^2 = sech(t)^2.
      const double c = 1.0 / std::cosh(log_prox_t(eps, r));
      return 2.0 / (c * c + 2.0 * eps);
    }
  }
  return 0.0;
}

double moreau(GraphSpec g, double eps, double r) {
  require_positive_eps(eps);
  if (g.kind == GraphKind::Logarithmic) {
    if (r == 0.0) return 0.0;
    const double t = log_prox_t(eps, r);
    const double s = std::tanh(t);
    const double pot = xlogx(one_plus_tanh(t)) + xlogx(one_minus_tanh(t));
    return (r - s) * (r - s) / (2.0 * eps) + pot;
  }
  const double j = prox(g, eps, r);
  return (r - j) * (r - j) / (2.0 * eps) + betahat(g, j).value();
}

ExtendedReal betahat(GraphSpec g, double r) {
  switch (g.kind) {
    case GraphKind::Regular: return ExtendedReal::finite(0.25 * r * r * r * r);
    case GraphKind::Logarithmic:
      if (std::abs(r) > 1.0) return ExtendedReal::infinity();
      if (std::abs(r) == 1.0) return ExtendedReal::finite(2.0 * std::log(2.0));
      return ExtendedReal::finite(xlogx(1.0 + r) + xlogx(1.0 - r));
    case GraphKind::Indicator:
      return std::abs(r) <= 1.0 ? ExtendedReal::finite(0.0)
                                : ExtendedReal::infinity();
  }
  return ExtendedReal::infinity();
}

bool in_domain_interior(GraphSpec g, double r) noexcept {
  return g.kind == GraphKind::Regular ? std::isfinite(r) : std::abs(r) < 1.0;
}

double rho(double eps, double r) {
  require_positive_eps(eps);
  return std::exp(ln_eps(eps, r));
}

double ln_eps(double eps, double r) {
  require_positive_eps(eps);
  if (r == 1.0) return 0.0;
  // Newton in y = ln(rho): e^y + eps*y = r, strictly increasing in y.
  const double lo = std::min(0.0, (r - 1.0) / eps);
  const double hi = r > 1.0 ? std::log(r) : 0.0;
  const double guess = r > 1.0 ? std::log(r) : (r > 0.0 ? std::max(lo, std::log(r)) : lo);
  const double tol = kRootTolerance * std::max(1.0, std::abs(r));
  return safeguarded_newton(
      [&](double y) { return std::exp(y) + eps * y - r; },
      [&](double y) { return std::exp(y) + eps; }, lo, hi,
      std::clamp(guess, lo, hi), tol, "regularized logarithm");
}

double Ln_eps(double eps, double r) { return eps * r + ln_eps(eps, r); }

double Ln_eps_prime(double eps, double r) {
  return eps + 1.0 / (rho(eps, r) + eps);
}

RegularizedLog::RegularizedLog(double eps) : eps_(eps) {
  require_positive_eps(eps);
}

double LatentHeat::truncated(double eps, double r) const {
  require_positive_eps(eps);
  const double edge = 1.0 / eps;
  if (r > edge) return value(edge) + derivative(edge) * (r - edge);
  if (r < -edge) return value(-edge) + derivative(-edge) * (r + edge);
  return value(r);
}

double LatentHeat::truncated_prime(double eps, double r) const {
  require_positive_eps(eps);
  const double edge = 1.0 / eps;
  return derivative(std::clamp(r, -edge, edge));
}

double LatentHeat::truncated_prime_sup(double eps) const {
  require_positive_eps(eps);
  const double edge = 1.0 / eps;
  return std::max(std::abs(derivative(edge)), std::abs(derivative(-edge)));
}

double LatentHeat::bound_constant() const noexcept {
  return std::abs(value(0.0)) + std::abs(derivative(0.0)) +
         std::abs(second_derivative());
}

double lambda_trunc(const LatentHeat& lh, double eps, double r) {
  return lh.truncated(eps, r);
}

double lambda_trunc_prime(const LatentHeat& lh, double eps, double r) {
  return lh.truncated_prime(eps, r);
}

}  // namespace entroflow::graphs
