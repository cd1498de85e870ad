#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "irmarl/ir_function.hpp"
#include "irmarl/rng.hpp"
#include "irmarl/verify.hpp"

using namespace irmarl;

namespace {

BaseDistribution uniform_base(int x_size, const std::vector<int>& slot_sizes) {
  BaseDistribution base;
  base.x_dist.assign(x_size, 1.0 / x_size);
  for (int s : slot_sizes)
    base.y_cond.push_back(std::vector<double>(x_size * s, 1.0 / s));
  return base;
}

}  // namespace

TEST_CASE("evaluate sums the stored sub-function tables") {
  IrFunction f(1, {SlotDomain{2}, SlotDomain{2}}, 2);
  f.set_table(SubsetKey{}, {0.7});
  CHECK(f.evaluate(0, std::vector<int>{0, 1}) == doctest::Approx(0.7));

  IrFunction g(1, {SlotDomain{2}, SlotDomain{2}}, 2);
  g.set_table(SubsetKey{{0}}, {0.3, 0.3});
  g.set_table(SubsetKey{{1}}, {0.5, 0.5});
  CHECK(g.evaluate(0, std::vector<int>{1, 0}) == doctest::Approx(0.8));
}

TEST_CASE("evaluate matches the two-agent pairwise product reward") {
  // Two actions {-1, +1}; own slot carries a^2/sqrt(2), the cross table
  // carries a_i a_j / sqrt(2). At a = (1,1) the reward is sqrt(2).
  const double s = 1.0 / std::sqrt(2.0);
  auto act = [](int idx) { return idx == 0 ? -1.0 : 1.0; };
  IrFunction f(2, {SlotDomain{2}}, 2);
  f.set_table(SubsetKey{}, {act(0) * act(0) * s, act(1) * act(1) * s});
  std::vector<double> cross(4);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) cross[x * 2 + y] = act(x) * act(y) * s;
  f.set_table(SubsetKey{{0}}, cross);
  CHECK(f.evaluate(1, std::vector<int>{1}) == doctest::Approx(1.4142135623730951));
  CHECK(f.evaluate(0, std::vector<int>{1}) == doctest::Approx(0.0));
}

TEST_CASE("evaluate rejects out-of-domain indices") {
  IrFunction f(2, {SlotDomain{2}}, 1);
  f.set_table(SubsetKey{}, {0.0, 1.0});
  CHECK_THROWS_AS(f.evaluate(2, std::vector<int>{0}), std::domain_error);
  CHECK_THROWS_AS(f.evaluate(0, std::vector<int>{2}), std::domain_error);
  CHECK_THROWS_AS(f.evaluate(0, std::vector<int>{}), std::domain_error);
}

TEST_CASE("set_table validates keys against the rank bound") {
  IrFunction f(1, {SlotDomain{2}, SlotDomain{2}}, 2);
  CHECK_THROWS_AS(f.set_table(SubsetKey{{0, 1}}, std::vector<double>(4, 0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(f.set_table(SubsetKey{{1, 0}}, std::vector<double>(4, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("standardize leaves a constant-only function unchanged") {
  IrFunction f(3, {SlotDomain{2}}, 2);
  f.set_table(SubsetKey{}, {0.1, 0.2, 0.3});
  const auto base = uniform_base(3, {2});
  const auto g = standardize(f, base);
  CHECK(g.tables().at(SubsetKey{}) == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(max_abs_difference(f, g) < 1e-12);
}

TEST_CASE("standardize centers the linear single-slot example") {
  // f(y) = y over {0,1}, uniform base: mean 0.5 moves to the constant.
  IrFunction f(1, {SlotDomain{2}}, 2);
  f.set_table(SubsetKey{{0}}, {0.0, 1.0});
  const auto g = standardize(f, uniform_base(1, {2}));
  CHECK(g.tables().at(SubsetKey{}).at(0) == doctest::Approx(0.5));
  CHECK(g.tables().at(SubsetKey{{0}}).at(0) == doctest::Approx(-0.5));
  CHECK(g.tables().at(SubsetKey{{0}}).at(1) == doctest::Approx(0.5));
}

TEST_CASE("standardize is idempotent and reconstructs the input") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int x_size = 1 + rng.uniform_int(3);
    std::vector<int> sizes;
    const int w = 1 + rng.uniform_int(4);
    for (int j = 0; j < w; ++j) sizes.push_back(2 + rng.uniform_int(3));
    const int rank = 1 + rng.uniform_int(3);
    const auto f = random_ir_function(rng, x_size, sizes, rank);
    const auto base = random_base_distribution(rng, x_size, sizes);
    const auto g = standardize(f, base);
    CHECK(max_abs_difference(f, g) < 1e-10);
    CHECK(max_conditional_mean(g, base) < 1e-10);
    const auto g2 = standardize(g, base);
    for (const auto& [key, values] : g2.tables()) {
      const auto& other = g.tables().at(key);
      for (std::size_t i = 0; i < values.size(); ++i)
        CHECK(values[i] == doctest::Approx(other[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("two raw decompositions of one function standardize identically") {
  Rng rng(11);
  const std::vector<int> sizes = {3, 2};
  const auto base = random_base_distribution(rng, 2, sizes);
  auto f1 = random_ir_function(rng, 2, sizes, 2, 1.0, /*all_subsets=*/true);
  // Same function, different split: shift constants between tables.
  IrFunction f2 = f1;
  {
    auto empty = f1.tables().at(SubsetKey{});
    for (auto& v : empty) v -= 1.25;
    f2.set_table(SubsetKey{}, empty);
    auto single = f1.tables().at(SubsetKey{{0}});
    // adding a per-x constant to one table and removing it from another
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 3; ++y) single[x * 3 + y] += 1.25;
    f2.set_table(SubsetKey{{0}}, single);
  }
  CHECK(max_abs_difference(f1, f2) < 1e-12);
  const auto g1 = standardize(f1, base);
  const auto g2 = standardize(f2, base);
  for (const auto& [key, values] : g1.tables()) {
    const auto& other = g2.tables().at(key);
    for (std::size_t i = 0; i < values.size(); ++i)
      CHECK(values[i] == doctest::Approx(other[i]).epsilon(1e-9));
  }
}

TEST_CASE("standardize requires strictly positive conditionals") {
  IrFunction f(1, {SlotDomain{2}}, 2);
  f.set_table(SubsetKey{{0}}, {0.0, 1.0});
  BaseDistribution base;
  base.x_dist = {1.0};
  base.y_cond = {{1.0, 0.0}};
  CHECK_THROWS_AS(standardize(f, base), std::domain_error);
}

TEST_CASE("subfunction_errors on identical inputs is zero") {
  Rng rng(3);
  const std::vector<int> sizes = {2, 3};
  const auto f = random_ir_function(rng, 2, sizes, 2);
  const auto base = random_base_distribution(rng, 2, sizes);
  for (const auto& [key, err] : subfunction_errors(f, f, base)) CHECK(err < 1e-18);
}

TEST_CASE("subfunction_errors isolates a constant offset") {
  Rng rng(5);
  const std::vector<int> sizes = {2, 2};
  const auto base = random_base_distribution(rng, 1, sizes);
  const auto f_star = random_ir_function(rng, 1, sizes, 2, 1.0, true);
  IrFunction f_hat = f_star;
  auto empty = f_star.tables().at(SubsetKey{});
  for (auto& v : empty) v += 0.3;
  f_hat.set_table(SubsetKey{}, empty);
  const auto errors = subfunction_errors(f_star, f_hat, base);
  for (const auto& [key, err] : errors) {
    if (key.size() == 0)
      CHECK(err == doctest::Approx(0.09).epsilon(1e-9));
    else
      CHECK(err < 1e-18);
  }
}

TEST_CASE("alignment bound holds on random standardized pairs") {
  Rng rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<int> sizes;
    const int w = 1 + rng.uniform_int(4);
    for (int j = 0; j < w; ++j) sizes.push_back(2 + rng.uniform_int(3));
    const int x_size = 1 + rng.uniform_int(3);
    const int rank = 1 + rng.uniform_int(2);
    const auto base = random_base_distribution(rng, x_size, sizes);
    const auto f_star = random_ir_function(rng, x_size, sizes, rank);
    const auto f_hat = random_ir_function(rng, x_size, sizes, rank);
    const double eps = shifted_mse(f_star, f_hat, base);
    for (const auto& [key, err] : subfunction_errors(f_star, f_hat, base))
      CHECK(err <= std::pow(2.0, key.size()) * eps + 1e-9);
  }
}

TEST_CASE("shifted_mse is zero for equal functions and exact under train") {
  Rng rng(17);
  const std::vector<int> sizes = {2, 2, 3};
  const auto f_star = random_ir_function(rng, 2, sizes, 2);
  const auto f_hat = random_ir_function(rng, 2, sizes, 2);
  const auto train = random_base_distribution(rng, 2, sizes);
  CHECK(shifted_mse(f_star, f_star, train) < 1e-18);
  // Under the train distribution the bound is the error itself.
  const double eps = shifted_mse(f_star, f_hat, train);
  CHECK(eps > 0.0);
  CHECK(shifted_mse(f_star, f_hat, train) == doctest::Approx(eps));
}

TEST_CASE("density_ratio_bound matches hand values") {
  BaseDistribution train, target;
  train.x_dist = {0.5, 0.5};
  target.x_dist = {0.75, 0.25};
  CHECK(density_ratio_bound(train, train) == doctest::Approx(1.0));
  CHECK(density_ratio_bound(train, target) == doctest::Approx(1.5));

  BaseDistribution disjoint;
  disjoint.x_dist = {0.0, 1.0};
  BaseDistribution point;
  point.x_dist = {1.0, 0.0};
  CHECK_THROWS_AS(density_ratio_bound(disjoint, point), std::domain_error);
}

TEST_CASE("distribution-shift bound holds with the frozen constant") {
  const auto result = shift_bound_suite(1234567, 40);
  CHECK(result.passed);
}
