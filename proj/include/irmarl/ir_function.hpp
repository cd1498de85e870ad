#pragma once

#include <map>
#include <span>
#include <vector>

namespace irmarl {

// One input slot of a multi-slot function (an action set, a state-action
// pair, ...). Only the cardinality matters; values are dense indices.
struct SlotDomain {
  int size = 1;
};

// Strictly increasing list of slot indices (0-based), length < rank.
struct SubsetKey {
  std::vector<int> indices;

  bool operator==(const SubsetKey&) const = default;
  bool operator<(const SubsetKey& other) const { return indices < other.indices; }
  int size() const { return static_cast<int>(indices.size()); }
};

// Product distribution over the inputs of an IrFunction: a marginal over the
// x slot and, per y slot, a conditional table p_j(y | x) stored row-major
// (x rows). The same type serves as training and target distribution.
struct BaseDistribution {
  std::vector<double> x_dist;                // size X
  std::vector<std::vector<double>> y_cond;   // per slot: X * Y_j

  void validate(int x_size, std::span<const SlotDomain> y_domains) const;
  // True when every conditional entry is strictly positive (required for
  // standardization: conditional means must be defined over the whole domain).
  bool strictly_positive_conditionals() const;
};

// A function f(x, y_1, ..., y_W) stored as a sum of dense sub-function
// tables, one per slot subset of size < rank. The table for subset
// {j_1 < ... < j_k} is laid out row-major over (x, y_{j_1}, ..., y_{j_k}).
class IrFunction {
 public:
  IrFunction() = default;
  IrFunction(int x_size, std::vector<SlotDomain> y_domains, int rank);

  int x_size() const { return x_size_; }
  int num_slots() const { return static_cast<int>(y_domains_.size()); }
  const std::vector<SlotDomain>& y_domains() const { return y_domains_; }
  int rank() const { return rank_; }

  int table_size(const SubsetKey& key) const;
  // Inserts or overwrites one sub-function table; validates the key against
  // the rank bound and the value count against the slot sizes.
  void set_table(const SubsetKey& key, std::vector<double> values);
  void add_to_table(const SubsetKey& key, const std::vector<double>& values, double scale = 1.0);
  const std::map<SubsetKey, std::vector<double>>& tables() const { return tables_; }

  double evaluate(int x, std::span<const int> y) const;

 private:
  void check_point(int x, std::span<const int> y) const;

  int x_size_ = 1;
  std::vector<SlotDomain> y_domains_;
  int rank_ = 1;
  std::map<SubsetKey, std::vector<double>> tables_;
};

// Rewrites f as the equivalent decomposition whose k >= 1 sub-functions have
// zero conditional mean in every slot given x. Evaluates identically to the
// input everywhere; idempotent; unique for strictly positive conditionals.
IrFunction standardize(const IrFunction& f, const BaseDistribution& base);

// Per-subset mean squared sub-function differences E_base[(g_S - g_hat_S)^2]
// after standardizing both inputs against `base`. Exact weighted sums.
std::map<SubsetKey, double> subfunction_errors(const IrFunction& f_star,
                                               const IrFunction& f_hat,
                                               const BaseDistribution& base);

// Exact E_target[(f_star - f_hat)^2] over the product distribution.
double shifted_mse(const IrFunction& f_star, const IrFunction& f_hat,
                   const BaseDistribution& target);

// Max density ratio between target and train: the x marginal ratio and all
// per-slot conditional ratios. Throws std::domain_error when the target has
// support outside the train support.
double density_ratio_bound(const BaseDistribution& train, const BaseDistribution& target);

// Largest absolute per-slot conditional mean over all k >= 1 sub-functions,
// every other coordinate fixed; zero (within tolerance) iff f is standardized
// against `base`.
double max_conditional_mean(const IrFunction& f, const BaseDistribution& base);

// Max |a - b| over the full input product space (enumeration; desk scale).
double max_abs_difference(const IrFunction& a, const IrFunction& b);

}  // namespace irmarl
