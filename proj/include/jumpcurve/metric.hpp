#pragma once

#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "jumpcurve/types.hpp"

namespace jumpcurve {

class Metric {
 public:
  virtual ~Metric() = default;
  virtual double distance(State x, State y) const = 0;
  virtual std::string id() const = 0;
};

enum class WeightForm { Classical, InverseSqrt, Table };
enum class TailRule { Error, ConstantExtension };

// Weighted path metric on the nonnegative integers:
//
//   d(x, y) = | sum_{k < x} u_k - sum_{k < y} u_k |,   u_k > 0.
//
// Every distance telescopes along the lattice, d(x, y) = sum_{k=x}^{y-1} u_k
// for x <= y, so adjacent gaps determine everything about the metric. That
// same telescoping makes the Lipschitz seminorm of f equal to
// sup_x |f(x+1) - f(x)| / u_x (lipschitz_seminorm below).
class PathMetric final : public Metric {
 public:
  // u == 1: the usual graph distance on the integers.
  static PathMetric classical();
  // u_x = (x+1)^{-1/2}.
  static PathMetric inverse_sqrt();
  // Explicit weights; tail says what u_x means past the end of the table.
  static PathMetric from_table(std::vector<double> weights, TailRule tail);

  double weight(State x) const;            // u_x, x >= 0
  double prefix_sum(State x) const;        // sum_{k < x} u_k
  double distance(State x, State y) const override;
  std::string id() const override;

  WeightForm form() const { return form_; }
  TailRule tail() const { return tail_; }
  State table_size() const { return static_cast<State>(table_.size()); }

  PathMetric(const PathMetric& other);
  PathMetric& operator=(const PathMetric&) = delete;

 private:
  PathMetric(WeightForm form, std::vector<double> table, TailRule tail);
  void ensure_prefix(State n) const;       // idempotent fill, safe concurrently

  WeightForm form_;
  std::vector<double> table_;
  TailRule tail_;
  mutable std::vector<double> prefix_;     // prefix_[k] = sum_{i < k} u_i
  mutable std::shared_mutex mutex_;
};

// d(x, y) = 1 when x != y.
class TrivialMetric final : public Metric {
 public:
  double distance(State x, State y) const override { return x == y ? 0.0 : 1.0; }
  std::string id() const override { return "trivial"; }
};

// l1 combination over n coordinates sharing one base metric. Encoded points
// are read as n digits in the given radix, least significant digit first.
class ProductMetric final : public Metric {
 public:
  ProductMetric(std::shared_ptr<const Metric> base, int dimension, State radix);

  double distance(State x, State y) const override;  // on encoded points
  std::string id() const override;

  int dimension() const { return dimension_; }
  State radix() const { return radix_; }
  const Metric& base() const { return *base_; }

 private:
  std::shared_ptr<const Metric> base_;
  int dimension_;
  State radix_;
};

double path_distance(const PathMetric& metric, State x, State y);

// Coordinate-wise sum of base distances; throws on length mismatch.
double product_distance(const Metric& base, std::span<const State> x, std::span<const State> y);

struct LipschitzReport {
  double value = 0.0;       // sup over the scan window
  State argmax = 0;         // first x attaining the sup
  bool attained = true;     // sup stopped growing before the window end
};

// Seminorm of f with respect to a path metric by scanning adjacent ratios
// |f(x+1) - f(x)| / u_x for x < scan_limit. The tail heuristic: the sup is
// reported attained when the argmax sits strictly inside the window and the
// ratios are nonincreasing over the final stretch.
LipschitzReport lipschitz_seminorm(const Observable& f, const PathMetric& metric, State scan_limit);

}  // namespace jumpcurve
