#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "entroflow/errors.hpp"
#include "entroflow/graphs.hpp"
#include "entroflow/oracle.hpp"

using namespace entroflow::graphs;

namespace {

const GraphSpec kRegular{GraphKind::Regular};
const GraphSpec kLog{GraphKind::Logarithmic};
const GraphSpec kIndicator{GraphKind::Indicator};
const GraphSpec kAll[] = {kRegular, kLog, kIndicator};

// Root of an increasing function on [lo, hi] by plain bisection.
template <class F>
double bisect(F f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("graphs") {
  TEST_CASE("resolvent of zero is zero") {
    for (auto g : kAll) {
      for (double eps : {1.0, 0.3, 1e-3}) {
        CHECK(prox(g, eps, 0.0) == 0.0);
        CHECK(yosida(g, eps, 0.0) == 0.0);
        CHECK(moreau(g, eps, 0.0) == 0.0);
      }
    }
  }

  TEST_CASE("prox examples") {
    CHECK(prox(kIndicator, 0.5, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    // s + s^3 = 2 by bisection on [0, 2]
    const double s = bisect([](double x) { return x + x * x * x - 2.0; }, 0.0, 2.0);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(prox(kRegular, 1.0, 2.0) == doctest::Approx(s).epsilon(1e-13));
    // log resolvent: s + eps ln((1+s)/(1-s)) = r
    const double eps = 0.2, r = 1.7;
    const double sl = bisect(
        [&](double x) { return x + eps * std::log((1 + x) / (1 - x)) - r; }, -1 + 1e-15, 1 - 1e-15);
    CHECK(prox(kLog, eps, r) == doctest::Approx(sl).epsilon(1e-12));
    // 1 - s is about 2 exp(-49000) here, so s rounds to the domain edge
    CHECK(std::abs(prox(kLog, 1e-3, 50.0)) <= 1.0);
  }

  TEST_CASE("yosida and moreau examples") {
    CHECK(yosida(kIndicator, 0.5, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(yosida(kRegular, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(moreau(kIndicator, 0.5, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    const double v = moreau(kLog, 0.1, 1.0);
    CHECK(v >= 0.0);
    CHECK(v <= 2.0 * std::log(2.0));
  }

  TEST_CASE("betahat values") {
    CHECK(betahat(kRegular, 2.0).value() == doctest::Approx(4.0));
    CHECK(betahat(kLog, 1.0).value() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(betahat(kLog, -1.0).value() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(betahat(kLog, 1.5).is_infinite());
    CHECK(betahat(kIndicator, 2.0).is_infinite());
    CHECK(betahat(kIndicator, 0.7).value() == 0.0);
    CHECK_THROWS(betahat(kIndicator, 2.0).value());
    CHECK(betahat(kIndicator, 2.0) == ExtendedReal::infinity());
  }

  TEST_CASE("prox is monotone and 1-Lipschitz, yosida is 1/eps-Lipschitz") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> r(-5.0, 5.0), e(0.01, 1.0);
    for (auto g : kAll) {
      for (int k = 0; k < 1000; ++k) {
        const double eps = e(rng), a = r(rng), b = r(rng);
        const double pa = prox(g, eps, a), pb = prox(g, eps, b);
        CHECK(std::abs(pa - pb) <= std::abs(a - b) * (1 + 1e-12) + 1e-14);
        CHECK((pa - pb) * (a - b) >= -1e-14);
        const double ya = yosida(g, eps, a), yb = yosida(g, eps, b);
        CHECK(std::abs(ya - yb) <= std::abs(a - b) / eps * (1 + 1e-9) + 1e-12);
        CHECK((ya - yb) * (a - b) >= -1e-12);
      }
    }
  }

  TEST_CASE("envelope bounds and derivative") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> r(-3.0, 3.0), e(0.05, 1.0);
    for (auto g : kAll) {
      for (int k = 0; k < 300; ++k) {
        const double eps = e(rng), x = r(rng);
        const double m = moreau(g, eps, x);
        CHECK(m >= 0.0);
        const ExtendedReal b = betahat(g, x);
        if (b.is_finite()) CHECK(m <= b.value() + 1e-14);
        if (g.kind == GraphKind::Indicator && std::abs(std::abs(x) - 1.0) < 1e-3) continue;
        const double d = 1e-4;
        const double fd = (moreau(g, eps, x + d) - moreau(g, eps, x - d)) / (2 * d);
        CHECK(std::abs(fd - yosida(g, eps, x)) <= 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }

  TEST_CASE("prox agrees with brute-force minimization") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> r(-3.0, 3.0), e(0.05, 1.0);
    for (auto g : kAll) {
      for (int k = 0; k < 40; ++k) {
        const double eps = e(rng), x = r(rng);
        CHECK(std::abs(prox(g, eps, x) - entroflow::oracle::prox_bruteforce(g, eps, x)) <= 1e-8);
      }
    }
  }

  TEST_CASE("rho examples") {
    CHECK(rho(0.4, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rho(1.0, std::exp(1.0) + 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    const double p = rho(0.3, -5.0);
    CHECK(p > 0.0);
    CHECK(rho(0.01, -5.0) > 0.0);
    CHECK(std::abs(p + 0.3 * std::log(p) + 5.0) <= 1e-12);
    CHECK(ln_eps(0.7, 1.0) == doctest::Approx(0.0));
    CHECK(Ln_eps(0.7, 1.0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS_AS(rho(0.0, 1.0), entroflow::PreconditionError);
  }

  TEST_CASE("rho residual and Ln_eps derivative") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> r(-10.0, 10.0);
    for (double eps : {1.0, 0.2, 0.01}) {
      for (int k = 0; k < 200; ++k) {
        const double x = r(rng);
        const double p = rho(eps, x);
        const double lp = ln_eps(eps, x);
        CHECK(std::isfinite(lp));
        // below exp(-708) rho is not a normal double; ln rho is still exact
        const double log_rho = p >= std::numeric_limits<double>::min() ? std::log(p) : lp;
        CHECK(std::abs(p + eps * log_rho - x) <= 1e-12 * std::max(1.0, std::abs(x)));
        CHECK(Ln_eps_prime(eps, x) >= eps);
        CHECK(entroflow::oracle::fd_check([&](double y) { return Ln_eps(eps, y); },
                                          [&](double y) { return Ln_eps_prime(eps, y); }, x) <=
              1e-6);
      }
    }
  }

  TEST_CASE("rho tends to r as eps decreases") {
    for (double x : {0.5, 2.0, 7.0}) {
      double prev = std::abs(rho(0.1, x) - x);
      for (double eps : {0.01, 0.001}) {
        const double d = std::abs(rho(eps, x) - x);
        CHECK(d < prev);
        prev = d;
      }
    }
  }

  TEST_CASE("latent heat truncation") {
    const LatentHeat lh{1.0, -1.0};
    CHECK(lambda_trunc(lh, 0.5, 1.0) == 0.0);
    // lambda(2) + lambda'(2) (4 - 2) with lambda(2) = -2, lambda'(2) = -3
    CHECK(lambda_trunc(lh, 0.5, 4.0) == doctest::Approx(-8.0).epsilon(1e-15));
    CHECK(lambda_trunc(lh, 0.5, -4.0) == doctest::Approx(-6.0 + 5.0 * -2.0).epsilon(1e-15));
    for (double eps : {1.0, 0.1, 0.01}) CHECK(lambda_trunc_prime(lh, eps, 0.0) == 1.0);
    CHECK(lh.truncated_prime_sup(0.1) == doctest::Approx(21.0));
    CHECK(lh.bound_constant() == doctest::Approx(3.0));
    // one-sided differences at the junction r = 1/eps match the formula
    const double eps = 0.5, j = 2.0, d = 1e-6;
    CHECK((lambda_trunc(lh, eps, j + d) - lambda_trunc(lh, eps, j)) / d ==
          doctest::Approx(-3.0).epsilon(1e-5));
    CHECK((lambda_trunc(lh, eps, j) - lambda_trunc(lh, eps, j - d)) / d ==
          doctest::Approx(-3.0).epsilon(1e-5));
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> r(-6.0, 6.0);
    for (int k = 0; k < 200; ++k) {
      const double x = r(rng);
      if (std::abs(std::abs(x) - j) < 1e-3) continue;
      CHECK(entroflow::oracle::fd_check([&](double y) { return lambda_trunc(lh, eps, y); },
                                        [&](double y) { return lambda_trunc_prime(lh, eps, y); },
                                        x) <= 1e-6);
    }
  }

  TEST_CASE("fd_check of a constant is zero") {
    CHECK(entroflow::oracle::fd_check([](double) { return 3.0; }, [](double) { return 0.0; },
                                      0.4) == 0.0);
  }
}
