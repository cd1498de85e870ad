#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "irmarl/mirror_descent.hpp"
#include "irmarl/rng.hpp"
#include "irmarl/verify.hpp"

using namespace irmarl;

namespace {

double objective(std::span<const double> p, std::span<const double> gains,
                 std::span<const double> pi_t, std::span<const double> nu,
                 const UpdateParams& params) {
  double v = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) v -= gains[a] * p[a];
  return v + params.lambda * chi_square(p, nu) + bregman(p, pi_t, nu) / params.eta;
}

}  // namespace

TEST_CASE("chi_square hand values") {
  std::vector<double> nu3 = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::vector<double> point = {1.0, 0.0, 0.0};
  CHECK(chi_square(nu3, nu3) == doctest::Approx(0.0));
  CHECK(chi_square(point, nu3) == doctest::Approx(2.0));  // |A| - 1

  std::vector<double> nu2 = {0.5, 0.5};
  std::vector<double> p2 = {0.75, 0.25};
  // sum_a nu_a (p_a/nu_a - 1)^2 = 0.5*(0.5)^2 + 0.5*(0.5)^2
  CHECK(chi_square(p2, nu2) == doctest::Approx(0.25));

  std::vector<double> bad_nu = {1.0, 0.0};
  CHECK_THROWS_AS(chi_square(p2, bad_nu), std::domain_error);
  std::vector<double> ok = {1.0, 0.0};
  CHECK(chi_square(ok, bad_nu) == doctest::Approx(0.0));
}

TEST_CASE("bregman identities") {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + rng.uniform_int(4);
    std::vector<double> nu(n), p(n), q(n);
    double sn = 0, sp = 0, sq = 0;
    for (int a = 0; a < n; ++a) {
      nu[a] = rng.uniform01() + 0.05;
      p[a] = rng.uniform01() + 0.01;
      q[a] = rng.uniform01() + 0.01;
      sn += nu[a];
      sp += p[a];
      sq += q[a];
    }
    for (int a = 0; a < n; ++a) {
      nu[a] /= sn;
      p[a] /= sp;
      q[a] /= sq;
    }
    CHECK(bregman(p, p, nu) == doctest::Approx(0.0));
    CHECK(bregman(p, q, nu) == doctest::Approx(bregman(q, p, nu)));
    CHECK(bregman(p, nu, nu) == doctest::Approx(chi_square(p, nu)));
  }
}

TEST_CASE("regularized_update returns nu under constant gains") {
  std::vector<double> nu = {0.2, 0.3, 0.5};
  std::vector<double> gains = {1.7, 1.7, 1.7};
  const auto p = regularized_update(gains, nu, nu, UpdateParams{1.0, 1.0, 2.0});
  for (int a = 0; a < 3; ++a) CHECK(p[a] == doctest::Approx(nu[a]).epsilon(1e-12));
}

TEST_CASE("regularized_update matches the closed-form two-action example") {
  std::vector<double> nu = {0.5, 0.5};
  std::vector<double> gains = {1.0, 0.0};
  const auto p = regularized_update(gains, nu, nu, UpdateParams{1.0, 1.0, 1.0});
  CHECK(p[0] == doctest::Approx(0.5625).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.4375).epsilon(1e-12));
}

TEST_CASE("regularized_update rejects bad parameters and zero nu") {
  std::vector<double> nu = {0.5, 0.5};
  std::vector<double> g = {0.0, 0.0};
  CHECK_THROWS_AS(regularized_update(g, nu, nu, UpdateParams{-0.1, 1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(regularized_update(g, nu, nu, UpdateParams{1.0, 0.0, 1.0}),
                  std::invalid_argument);
  std::vector<double> bad_nu = {1.0, 0.0};
  CHECK_THROWS_AS(regularized_update(g, nu, bad_nu, UpdateParams{1.0, 1.0, 1.0}),
                  std::domain_error);
}

TEST_CASE("update is certified optimal and strictly decreases the objective") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + rng.uniform_int(5);
    std::vector<double> nu(n), pi(n), gains(n);
    double sn = 0, sp = 0;
    for (int a = 0; a < n; ++a) {
      nu[a] = rng.uniform01() + 0.05;
      pi[a] = rng.uniform01() + 0.02;
      gains[a] = rng.uniform(-2.0, 2.0);
      sn += nu[a];
      sp += pi[a];
    }
    for (int a = 0; a < n; ++a) {
      nu[a] /= sn;
      pi[a] /= sp;
    }
    UpdateParams params{rng.uniform01() < 0.25 ? 0.0 : rng.uniform(0.05, 2.0),
                        rng.uniform(0.05, 2.0), 4.0};
    const auto p = regularized_update(gains, pi, nu, params);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(update_certificate_slack(p, gains, pi, nu, params) >= -1e-8);

    const double before = objective(pi, gains, pi, nu, params);
    const double after = objective(p, gains, pi, nu, params);
    CHECK(after <= before + 1e-12);
    double moved = 0.0;
    for (int a = 0; a < n; ++a) moved += std::abs(p[a] - pi[a]);
    if (moved > 1e-9) CHECK(after < before);
  }
}

TEST_CASE("chi-square drift stays under (t-1)/lambda for gains in [0,1]") {
  Rng rng(9);
  const int n = 3;
  std::vector<double> nu = {0.2, 0.5, 0.3};
  for (double lambda : {0.1, 0.5, 2.0}) {
    UpdateParams params{lambda, 0.2, 1.0};
    std::vector<double> p = nu;
    for (int t = 1; t <= 40; ++t) {
      CHECK(chi_square(p, nu) <= (t - 1) / lambda + 1e-9);
      std::vector<double> gains(n);
      for (auto& g : gains) g = rng.uniform01();
      p = regularized_update(gains, p, nu, params);
    }
  }
}

TEST_CASE("regret audit bounds hold on canonical gain sequences") {
  std::vector<double> nu = {0.5, 0.5};

  // All-zero gains with mu = nu.
  std::vector<std::vector<double>> zero(50, std::vector<double>(2, 0.0));
  const auto z = regret_audit(zero, nu, UpdateParams{0.5, 0.1, 1.0}, nu);
  CHECK(z.lhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z.holds());

  // Alternating adversarial gains over two actions, T = 100.
  std::vector<std::vector<double>> alt(100, std::vector<double>(2, 0.0));
  for (int t = 0; t < 100; ++t) alt[t][t % 2] = 1.0;
  std::vector<double> vertex = {1.0, 0.0};
  const auto a = regret_audit(alt, nu, UpdateParams{0.3, 0.08, 1.0}, vertex);
  CHECK(a.holds());

  // lambda = 0: plain mirror descent; the bound still holds.
  const auto m = regret_audit(alt, nu, UpdateParams{0.0, 0.05, 1.0}, vertex);
  CHECK(m.holds());

  std::vector<std::vector<double>> out_of_range(3, std::vector<double>(2, 2.0));
  CHECK_THROWS_AS(regret_audit(out_of_range, nu, UpdateParams{0.1, 0.1, 1.0}, nu),
                  std::invalid_argument);
}

TEST_CASE("update exactness suite agrees with the projected-gradient oracle") {
  const auto result = update_exactness_suite(1234567, 120);
  CHECK(result.passed);
}
