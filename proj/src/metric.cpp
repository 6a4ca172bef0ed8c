#include "jumpcurve/metric.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace jumpcurve {

PathMetric::PathMetric(WeightForm form, std::vector<double> table, TailRule tail)
    : form_(form), table_(std::move(table)), tail_(tail) {
  for (double w : table_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("path metric weights must be positive and finite");
    }
  }
  prefix_.push_back(0.0);
}

PathMetric::PathMetric(const PathMetric& other)
    : form_(other.form_), table_(other.table_), tail_(other.tail_) {
  std::shared_lock lock(other.mutex_);
  prefix_ = other.prefix_;
}

PathMetric PathMetric::classical() { return PathMetric(WeightForm::Classical, {}, TailRule::ConstantExtension); }

PathMetric PathMetric::inverse_sqrt() { return PathMetric(WeightForm::InverseSqrt, {}, TailRule::ConstantExtension); }

PathMetric PathMetric::from_table(std::vector<double> weights, TailRule tail) {
  if (weights.empty()) throw std::invalid_argument("path metric weight table must be nonempty");
  return PathMetric(WeightForm::Table, std::move(weights), tail);
}

double PathMetric::weight(State x) const {
  if (x < 0) throw std::invalid_argument("path metric weight index must be nonnegative");
  switch (form_) {
    case WeightForm::Classical:
      return 1.0;
    case WeightForm::InverseSqrt:
      return 1.0 / std::sqrt(static_cast<double>(x + 1));
    case WeightForm::Table:
      if (x < static_cast<State>(table_.size())) return table_[static_cast<std::size_t>(x)];
      if (tail_ == TailRule::ConstantExtension) return table_.back();
      throw TableRangeError("weight table has no entry for state " + std::to_string(x) +
                            " and no tail extension was declared");
  }
  throw std::logic_error("unreachable weight form");
}

void PathMetric::ensure_prefix(State n) const {
  {
    std::shared_lock lock(mutex_);
    if (static_cast<State>(prefix_.size()) > n) return;
  }
  std::unique_lock lock(mutex_);
  while (static_cast<State>(prefix_.size()) <= n) {
    const State k = static_cast<State>(prefix_.size()) - 1;
    prefix_.push_back(prefix_.back() + weight(k));
  }
}

double PathMetric::prefix_sum(State x) const {
  if (x < 0) throw std::invalid_argument("path metric state must be nonnegative");
  ensure_prefix(x);
  std::shared_lock lock(mutex_);
  return prefix_[static_cast<std::size_t>(x)];
}

double PathMetric::distance(State x, State y) const {
  return std::abs(prefix_sum(x) - prefix_sum(y));
}

std::string PathMetric::id() const {
  switch (form_) {
    case WeightForm::Classical:
      return "classical";
    case WeightForm::InverseSqrt:
      return "inv_sqrt";
    case WeightForm::Table:
      return "table[" + std::to_string(table_.size()) +
             (tail_ == TailRule::ConstantExtension ? ",tail=const]" : ",tail=error]");
  }
  return "path";
}

double path_distance(const PathMetric& metric, State x, State y) { return metric.distance(x, y); }

ProductMetric::ProductMetric(std::shared_ptr<const Metric> base, int dimension, State radix)
    : base_(std::move(base)), dimension_(dimension), radix_(radix) {
  if (!base_) throw std::invalid_argument("product metric needs a base metric");
  if (dimension_ < 1) throw std::invalid_argument("product metric dimension must be >= 1");
  if (radix_ < 2) throw std::invalid_argument("product metric radix must be >= 2");
}

double ProductMetric::distance(State x, State y) const {
  if (x < 0 || y < 0) throw std::invalid_argument("encoded product states must be nonnegative");
  double total = 0.0;
  State rx = x, ry = y;
  for (int i = 0; i < dimension_; ++i) {
    total += base_->distance(rx % radix_, ry % radix_);
    rx /= radix_;
    ry /= radix_;
  }
  if (rx != 0 || ry != 0) throw std::invalid_argument("encoded state exceeds declared dimension");
  return total;
}

std::string ProductMetric::id() const {
  return "l1(" + base_->id() + ",n=" + std::to_string(dimension_) + ")";
}

double product_distance(const Metric& base, std::span<const State> x, std::span<const State> y) {
  if (x.size() != y.size()) throw std::invalid_argument("product points must have equal length");
  if (x.empty()) throw std::invalid_argument("product points must be nonempty");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += base.distance(x[i], y[i]);
  return total;
}

LipschitzReport lipschitz_seminorm(const Observable& f, const PathMetric& metric, State scan_limit) {
  if (scan_limit < 1) throw std::invalid_argument("lipschitz scan window must contain at least one gap");

  LipschitzReport report;
  double previous_ratio = -1.0;
  State tail_nonincreasing_from = 0;  // start of the longest nonincreasing suffix
  double prev_f = f(0);
  for (State x = 0; x < scan_limit; ++x) {
    const double next_f = f(x + 1);
    const double ratio = std::abs(next_f - prev_f) / metric.weight(x);
    prev_f = next_f;
    // Rounding of accumulated sums wobbles the ratios by a few ulp, so only
    // a material increase moves the argmax or breaks the suffix.
    if (ratio > report.value * (1.0 + 1e-9)) {
      report.value = ratio;
      report.argmax = x;
    } else if (ratio > report.value) {
      report.value = ratio;
    }
    if (x > 0 && ratio > previous_ratio * (1.0 + 1e-9)) tail_nonincreasing_from = x;
    previous_ratio = ratio;
  }

  const State slack = std::max<State>(scan_limit / 8, 4);
  report.attained = report.argmax + slack < scan_limit && tail_nonincreasing_from + slack < scan_limit;
  return report;
}

}  // namespace jumpcurve
