#pragma once

#include <optional>
#include <string_view>

namespace entroflow::graphs {

/// The three canonical convex potentials and their subdifferentials.
enum class GraphKind { Regular, Logarithmic, Indicator };

std::string_view to_string(GraphKind kind) noexcept;
std::optional<GraphKind> parse_graph_kind(std::string_view name) noexcept;

struct GraphSpec {
  GraphKind kind = GraphKind::Regular;
};

/// Value in [0, +inf]. Infinity is a state of its own and never enters
/// floating arithmetic; value() on an infinite instance throws.
class ExtendedReal {
public:
  static ExtendedReal finite(double v) noexcept { return ExtendedReal(v, false); }
  static ExtendedReal infinity() noexcept { return ExtendedReal(0.0, true); }

  bool is_finite() const noexcept { return !infinite_; }
  bool is_infinite() const noexcept { return infinite_; }
  double value() const;

  friend bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

private:
  ExtendedReal(double v, bool inf) noexcept : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// Resolvent J_eps(r) = (I + eps*beta)^{-1}(r).
double prox(GraphSpec g, double eps, double r);

/// Yosida approximation beta_eps(r) = (r - J_eps(r)) / eps.
double yosida(GraphSpec g, double eps, double r);

/// a.e. derivative of beta_eps; at the indicator kinks |r| = 1 the value 0
/// is used.
double yosida_derivative(GraphSpec g, double eps, double r);

/// Moreau-Yosida envelope |r - J|^2 / (2 eps) + betahat(J).
double moreau(GraphSpec g, double eps, double r);

/// The potential itself, possibly +inf outside its effective domain.
ExtendedReal betahat(GraphSpec g, double r);

/// Whether r lies in the interior of the effective domain D(beta).
bool in_domain_interior(GraphSpec g, double r) noexcept;

// Regularized logarithm family.

/// Resolvent of ln: the unique rho > 0 with rho + eps*ln(rho) = r.
double rho(double eps, double r);
/// Yosida approximation of ln, equal to ln(rho_eps(r)).
double ln_eps(double eps, double r);
/// Ln_eps(r) = eps*r + ln_eps(r).
double Ln_eps(double eps, double r);
/// Derivative eps + 1/(rho_eps(r) + eps); always >= eps.
double Ln_eps_prime(double eps, double r);

/// Convenience bundle of the regularized log for a fixed eps.
class RegularizedLog {
public:
  explicit RegularizedLog(double eps);
  double eps() const noexcept { return eps_; }
  double rho(double r) const { return graphs::rho(eps_, r); }
  double ln(double r) const { return graphs::ln_eps(eps_, r); }
  double Ln(double r) const { return graphs::Ln_eps(eps_, r); }
  double Ln_prime(double r) const { return graphs::Ln_eps_prime(eps_, r); }

private:
  double eps_;
};

/// Quadratic latent-heat function lambda(r) = a1*r + a2*r^2 and its
/// truncation lambda_eps, which is lambda on [-1/eps, 1/eps] and affine
/// (with the endpoint slope) outside.
struct LatentHeat {
  double a1 = 1.0;
  double a2 = -1.0;

  double value(double r) const noexcept { return a1 * r + a2 * r * r; }
  double derivative(double r) const noexcept { return a1 + 2.0 * a2 * r; }
  double second_derivative() const noexcept { return 2.0 * a2; }

  double truncated(double eps, double r) const;
  double truncated_prime(double eps, double r) const;
  /// sup |lambda_eps'|, attained at +-1/eps.
  double truncated_prime_sup(double eps) const;
  /// |lambda(0)| + |lambda'(0)| + sup|lambda''|, an eps-independent bound.
  double bound_constant() const noexcept;
};

double lambda_trunc(const LatentHeat& lh, double eps, double r);
double lambda_trunc_prime(const LatentHeat& lh, double eps, double r);

}  // namespace entroflow::graphs
