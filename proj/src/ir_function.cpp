#include "irmarl/ir_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "irmarl/common.hpp"

namespace irmarl {

namespace {

// Decodes the flat table position into (x, coordinate per subset slot).
// Layout: x is the slowest axis, then subset slots in increasing slot order.
struct TableView {
  int x_size;
  std::vector<int> slot_sizes;  // sizes of the subset's slots, in key order

  int size() const {
    int n = x_size;
    for (int s : slot_sizes) n *= s;
    return n;
  }
  void decode(int flat, int& x, std::vector<int>& coords) const {
    coords.resize(slot_sizes.size());
    for (int i = static_cast<int>(slot_sizes.size()) - 1; i >= 0; --i) {
      coords[i] = flat % slot_sizes[i];
      flat /= slot_sizes[i];
    }
    x = flat;
  }
  int encode(int x, std::span<const int> coords) const {
    int flat = x;
    for (std::size_t i = 0; i < slot_sizes.size(); ++i) flat = flat * slot_sizes[i] + coords[i];
    return flat;
  }
};

TableView view_for(const IrFunction& f, const SubsetKey& key) {
  TableView v;
  v.x_size = f.x_size();
  for (int j : key.indices) v.slot_sizes.push_back(f.y_domains()[j].size);
  return v;
}

}  // namespace

void BaseDistribution::validate(int x_size, std::span<const SlotDomain> y_domains) const {
  require(static_cast<int>(x_dist.size()) == x_size, "BaseDistribution: x_dist size mismatch");
  require(is_probability_vector(x_dist), "BaseDistribution: x_dist is not a probability vector");
  require(y_cond.size() == y_domains.size(), "BaseDistribution: slot count mismatch");
  for (std::size_t j = 0; j < y_cond.size(); ++j) {
    const int yj = y_domains[j].size;
    require(static_cast<int>(y_cond[j].size()) == x_size * yj,
            "BaseDistribution: conditional table size mismatch");
    for (int x = 0; x < x_size; ++x) {
      std::span<const double> row(y_cond[j].data() + x * yj, yj);
      require(is_probability_vector(row), "BaseDistribution: conditional row does not sum to 1");
    }
  }
}

bool BaseDistribution::strictly_positive_conditionals() const {
  for (const auto& table : y_cond)
    for (double v : table)
      if (v <= 0.0) return false;
  return true;
}

IrFunction::IrFunction(int x_size, std::vector<SlotDomain> y_domains, int rank)
    : x_size_(x_size), y_domains_(std::move(y_domains)), rank_(rank) {
  require(x_size_ >= 1, "IrFunction: x_size must be >= 1");
  require(rank_ >= 1, "IrFunction: rank must be >= 1");
  for (const auto& d : y_domains_) require(d.size >= 1, "IrFunction: slot size must be >= 1");
}

int IrFunction::table_size(const SubsetKey& key) const {
  int n = x_size_;
  for (int j : key.indices) {
    require(j >= 0 && j < num_slots(), "IrFunction: subset slot index out of range");
    n *= y_domains_[j].size;
  }
  return n;
}

void IrFunction::set_table(const SubsetKey& key, std::vector<double> values) {
  require(std::is_sorted(key.indices.begin(), key.indices.end()) &&
              std::adjacent_find(key.indices.begin(), key.indices.end()) == key.indices.end(),
          "IrFunction: subset indices must be strictly increasing");
  require(key.size() < rank_, "IrFunction: subset size must be < rank");
  require(static_cast<int>(values.size()) == table_size(key),
          "IrFunction: table value count mismatch");
  tables_[key] = std::move(values);
}

void IrFunction::add_to_table(const SubsetKey& key, const std::vector<double>& values,
                              double scale) {
  auto it = tables_.find(key);
  if (it == tables_.end()) {
    require(key.size() < rank_, "IrFunction: subset size must be < rank");
    it = tables_.emplace(key, std::vector<double>(table_size(key), 0.0)).first;
  }
  require(values.size() == it->second.size(), "IrFunction: table value count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) it->second[i] += scale * values[i];
}

void IrFunction::check_point(int x, std::span<const int> y) const {
  if (x < 0 || x >= x_size_) throw std::domain_error("IrFunction: x index out of domain");
  if (static_cast<int>(y.size()) != num_slots())
    throw std::domain_error("IrFunction: wrong number of slot coordinates");
  for (int j = 0; j < num_slots(); ++j)
    if (y[j] < 0 || y[j] >= y_domains_[j].size)
      throw std::domain_error("IrFunction: slot coordinate out of domain");
}

double IrFunction::evaluate(int x, std::span<const int> y) const {
  check_point(x, y);
  double sum = 0.0;
  std::vector<int> coords;
  for (const auto& [key, values] : tables_) {
    coords.clear();
    for (int j : key.indices) coords.push_back(y[j]);
    TableView v = view_for(*this, key);
    sum += values[v.encode(x, coords)];
  }
  return sum;
}

namespace {

// E over the slots in `mean_positions` (positions within the subset, not slot
// ids) of a sub-function table, under the base conditionals given x. The
// result is a table over (x, remaining slots in key order).
std::vector<double> conditional_mean(const std::vector<double>& table, const TableView& v,
                                     const SubsetKey& key, std::span<const int> mean_positions,
                                     const BaseDistribution& base) {
  std::vector<bool> averaged(key.indices.size(), false);
  for (int pos : mean_positions) averaged[pos] = true;

  TableView out_view;
  out_view.x_size = v.x_size;
  for (std::size_t i = 0; i < v.slot_sizes.size(); ++i)
    if (!averaged[i]) out_view.slot_sizes.push_back(v.slot_sizes[i]);

  std::vector<double> out(out_view.size(), 0.0);
  int x;
  std::vector<int> coords, kept;
  for (int flat = 0; flat < v.size(); ++flat) {
    v.decode(flat, x, coords);
    double w = 1.0;
    kept.clear();
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (averaged[i]) {
        const int slot = key.indices[i];
        w *= base.y_cond[slot][x * v.slot_sizes[i] + coords[i]];
      } else {
        kept.push_back(coords[i]);
      }
    }
    out[out_view.encode(x, kept)] += w * table[flat];
  }
  return out;
}

}  // namespace

IrFunction standardize(const IrFunction& f, const BaseDistribution& base) {
  base.validate(f.x_size(), f.y_domains());
  if (!base.strictly_positive_conditionals())
    throw std::domain_error("standardize: base conditionals must be strictly positive");

  // Center level by level, largest subsets first. Centering subset S applies
  // prod_{l in S} (I - E_l); the removed terms (-1)^{|L|+1} E_L g live on the
  // smaller subset S \ L and are pushed down before that level is processed.
  IrFunction out(f.x_size(), f.y_domains(), f.rank());
  std::map<SubsetKey, std::vector<double>> work(f.tables().begin(), f.tables().end());

  int max_level = 0;
  for (const auto& [key, values] : work) max_level = std::max(max_level, key.size());

  for (int level = max_level; level >= 1; --level) {
    for (auto& [key, table] : work) {
      if (key.size() != level) continue;
      const TableView v = view_for(f, key);
      const int k = key.size();
      // All conditional means are taken of the level's original table;
      // centered = sum_{L subset S} (-1)^{|L|} E_L g (the L = empty term is g).
      const std::vector<double> original = table;
      std::vector<int> positions;
      for (int mask = 1; mask < (1 << k); ++mask) {
        positions.clear();
        for (int i = 0; i < k; ++i)
          if (mask & (1 << i)) positions.push_back(i);
        std::vector<double> mean = conditional_mean(original, v, key, positions, base);

        SubsetKey remaining;
        for (int i = 0; i < k; ++i)
          if (!(mask & (1 << i))) remaining.indices.push_back(key.indices[i]);

        const double sign = (positions.size() % 2 == 1) ? 1.0 : -1.0;
        auto it = work.find(remaining);
        if (it == work.end())
          it = work.emplace(remaining, std::vector<double>(f.table_size(remaining), 0.0)).first;
        for (std::size_t i = 0; i < mean.size(); ++i) it->second[i] += sign * mean[i];

        // Remove the pushed-down term from this level, broadcast back over
        // the averaged coordinates.
        int x;
        std::vector<int> coords, kept;
        std::vector<bool> averaged(k, false);
        for (int pos : positions) averaged[pos] = true;
        TableView mean_view;
        mean_view.x_size = v.x_size;
        for (int i = 0; i < k; ++i)
          if (!averaged[i]) mean_view.slot_sizes.push_back(v.slot_sizes[i]);
        for (int flat = 0; flat < v.size(); ++flat) {
          v.decode(flat, x, coords);
          kept.clear();
          for (int i = 0; i < k; ++i)
            if (!averaged[i]) kept.push_back(coords[i]);
          table[flat] -= sign * mean[mean_view.encode(x, kept)];
        }
      }
    }
  }

  for (auto& [key, table] : work) out.set_table(key, std::move(table));
  return out;
}

std::map<SubsetKey, double> subfunction_errors(const IrFunction& f_star, const IrFunction& f_hat,
                                               const BaseDistribution& base) {
  require(f_star.x_size() == f_hat.x_size() && f_star.num_slots() == f_hat.num_slots(),
          "subfunction_errors: domain mismatch");
  for (int j = 0; j < f_star.num_slots(); ++j)
    require(f_star.y_domains()[j].size == f_hat.y_domains()[j].size,
            "subfunction_errors: slot size mismatch");

  const IrFunction gs = standardize(f_star, base);
  const IrFunction gh = standardize(f_hat, base);

  std::map<SubsetKey, double> out;
  auto keys = [&] {
    std::vector<SubsetKey> all;
    for (const auto& [key, values] : gs.tables()) all.push_back(key);
    for (const auto& [key, values] : gh.tables())
      if (!gs.tables().contains(key)) all.push_back(key);
    return all;
  }();

  std::vector<int> coords;
  for (const auto& key : keys) {
    const TableView v = view_for(gs, key);
    const auto* ts = gs.tables().contains(key) ? &gs.tables().at(key) : nullptr;
    const auto* th = gh.tables().contains(key) ? &gh.tables().at(key) : nullptr;
    double err = 0.0;
    int x;
    for (int flat = 0; flat < v.size(); ++flat) {
      v.decode(flat, x, coords);
      double w = base.x_dist[x];
      for (std::size_t i = 0; i < coords.size(); ++i)
        w *= base.y_cond[key.indices[i]][x * v.slot_sizes[i] + coords[i]];
      const double d = (ts ? (*ts)[flat] : 0.0) - (th ? (*th)[flat] : 0.0);
      err += w * d * d;
    }
    out[key] = err;
  }
  return out;
}

double shifted_mse(const IrFunction& f_star, const IrFunction& f_hat,
                   const BaseDistribution& target) {
  require(f_star.x_size() == f_hat.x_size() && f_star.num_slots() == f_hat.num_slots(),
          "shifted_mse: domain mismatch");
  target.validate(f_star.x_size(), f_star.y_domains());

  const int w = f_star.num_slots();
  std::vector<int> y(w, 0);
  double total = 0.0;
  for (int x = 0; x < f_star.x_size(); ++x) {
    if (target.x_dist[x] == 0.0) continue;
    std::fill(y.begin(), y.end(), 0);
    while (true) {
      double prob = target.x_dist[x];
      for (int j = 0; j < w; ++j)
        prob *= target.y_cond[j][x * f_star.y_domains()[j].size + y[j]];
      if (prob != 0.0) {
        const double d = f_star.evaluate(x, y) - f_hat.evaluate(x, y);
        total += prob * d * d;
      }
      int j = w - 1;
      while (j >= 0 && ++y[j] == f_star.y_domains()[j].size) y[j--] = 0;
      if (j < 0) break;
    }
  }
  return total;
}

double max_conditional_mean(const IrFunction& f, const BaseDistribution& base) {
  base.validate(f.x_size(), f.y_domains());
  double worst = 0.0;
  std::vector<int> coords, kept;
  for (const auto& [key, table] : f.tables()) {
    const int k = key.size();
    if (k == 0) continue;
    const TableView v = view_for(f, key);
    for (int pos = 0; pos < k; ++pos) {
      // Sum w * value into buckets over (x, coords without pos).
      TableView reduced;
      reduced.x_size = v.x_size;
      for (int i = 0; i < k; ++i)
        if (i != pos) reduced.slot_sizes.push_back(v.slot_sizes[i]);
      std::vector<double> sums(reduced.size(), 0.0);
      int x;
      for (int flat = 0; flat < v.size(); ++flat) {
        v.decode(flat, x, coords);
        kept.clear();
        for (int i = 0; i < k; ++i)
          if (i != pos) kept.push_back(coords[i]);
        const int slot = key.indices[pos];
        sums[reduced.encode(x, kept)] +=
            base.y_cond[slot][x * v.slot_sizes[pos] + coords[pos]] * table[flat];
      }
      for (double s : sums) worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

double max_abs_difference(const IrFunction& a, const IrFunction& b) {
  require(a.x_size() == b.x_size() && a.num_slots() == b.num_slots(),
          "max_abs_difference: domain mismatch");
  long long space = a.x_size();
  for (const auto& d : a.y_domains()) space *= d.size;
  require(space <= 5'000'000, "max_abs_difference: domain too large to enumerate");
  const int w = a.num_slots();
  std::vector<int> y(w, 0);
  double worst = 0.0;
  for (int x = 0; x < a.x_size(); ++x) {
    std::fill(y.begin(), y.end(), 0);
    while (true) {
      worst = std::max(worst, std::abs(a.evaluate(x, y) - b.evaluate(x, y)));
      int j = w - 1;
      while (j >= 0 && ++y[j] == a.y_domains()[j].size) y[j--] = 0;
      if (j < 0) break;
    }
  }
  return worst;
}

double density_ratio_bound(const BaseDistribution& train, const BaseDistribution& target) {
  require(train.x_dist.size() == target.x_dist.size(), "density_ratio_bound: x size mismatch");
  require(train.y_cond.size() == target.y_cond.size(), "density_ratio_bound: slot count mismatch");
  double ratio = 0.0;
  auto update = [&ratio](double p_target, double p_train) {
    if (p_target <= 0.0) return;
    if (p_train <= 0.0)
      throw std::domain_error("density_ratio_bound: target support exceeds train support");
    ratio = std::max(ratio, p_target / p_train);
  };
  for (std::size_t x = 0; x < train.x_dist.size(); ++x) update(target.x_dist[x], train.x_dist[x]);
  for (std::size_t j = 0; j < train.y_cond.size(); ++j) {
    require(train.y_cond[j].size() == target.y_cond[j].size(),
            "density_ratio_bound: conditional size mismatch");
    for (std::size_t i = 0; i < train.y_cond[j].size(); ++i)
      update(target.y_cond[j][i], train.y_cond[j][i]);
  }
  return ratio;
}

}  // namespace irmarl
