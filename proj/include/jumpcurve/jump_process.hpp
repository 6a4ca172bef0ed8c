#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jumpcurve/metric.hpp"
#include "jumpcurve/types.hpp"

namespace jumpcurve {

struct JumpEntry {
  State target;
  double rate;
};

// Conservative jump process given by its off-diagonal rate rows. Rows are
// produced lazily so countable state spaces work; finite chains additionally
// carry their full state list.
class Generator {
 public:
  using JumpFn = std::function<std::vector<JumpEntry>(State)>;

  explicit Generator(JumpFn jump_fn, std::optional<std::vector<State>> finite_states = std::nullopt,
                     std::string name = "chain");

  // Validated row: targets distinct from the source, rates positive.
  std::vector<JumpEntry> jumps(State x) const;
  double total_rate(State x) const;

  const std::optional<std::vector<State>>& finite_states() const { return finite_states_; }
  const std::string& name() const { return name_; }

 private:
  JumpFn jump_fn_;
  std::optional<std::vector<State>> finite_states_;
  std::string name_;
};

enum class RateForm { MMInfinity, ConstantRates, Custom };

// Birth and death rates on the nonnegative integers; optionally capped to a
// finite ladder {0..cap} by dropping the birth rate at the cap.
class BirthDeathRates {
 public:
  // lambda_x = lambda, nu_x = nu * x (infinite-server queue).
  static BirthDeathRates mm_infinity(double lambda, double nu);
  // lambda_x = lambda, nu_x = nu for x >= 1 (single-server queue).
  static BirthDeathRates constant_rates(double lambda, double nu);
  static BirthDeathRates custom(std::function<double(State)> birth, std::function<double(State)> death);

  BirthDeathRates truncated(State cap) const;

  double birth(State x) const;  // 0 at the cap
  double death(State x) const;  // 0 at x = 0

  RateForm form() const { return form_; }
  std::optional<State> cap() const { return cap_; }
  double mm_lambda() const { return lambda_; }
  double mm_nu() const { return nu_; }

  Generator to_generator() const;

 private:
  BirthDeathRates(RateForm form, double lambda, double nu, std::function<double(State)> birth,
                  std::function<double(State)> death);

  RateForm form_;
  double lambda_ = 0.0, nu_ = 0.0;
  std::function<double(State)> birth_, death_;
  std::optional<State> cap_;
};

// Stationary law of an ergodic birth-death chain, tabulated on {0..truncation}
// where the truncation is chosen so the dropped tail is below tol times the
// normalizer. Built by the detailed-balance recursion in log space.
struct StationaryMeasure {
  std::vector<double> pmf;
  double log_normalizer = 0.0;  // log sum of the unnormalized weights
  double tail_mass = 0.0;       // bound on the mass beyond the table
  State truncation() const { return static_cast<State>(pmf.size()) - 1; }
};

StationaryMeasure stationary_measure(const BirthDeathRates& rates, double tol);

// Integral of f against the stationary law, continuing the detailed-balance
// recursion past the table until increments die out; .second bounds what the
// continuation could still be missing.
std::pair<double, double> stationary_integral(const BirthDeathRates& rates,
                                              const StationaryMeasure& pi,
                                              const std::function<double(State)>& f);

enum class ErgodicityVerdict { Ergodic, TransientSuspect, ExplosiveSuspect };

struct ErgodicityReport {
  ErgodicityVerdict verdict = ErgodicityVerdict::Ergodic;
  bool normalizer_converges = false;   // partial normalizer sums stabilized
  bool recurrence_series_grows = false;  // the divergence-criterion series keeps growing
  double log_normalizer_half = 0.0;    // diagnostics: log partials at horizon/2 and horizon
  double log_normalizer_full = 0.0;
  double log_series_half = 0.0;
  double log_series_full = 0.0;
};

// Screen for positive recurrence: the normalizer sum must stabilize and the
// series sum_x mu(x) sum_{y>=x} 1/(mu(y) lambda_y) must keep growing. Both
// are judged on partial sums up to the horizon, so the verdict is a
// diagnostic, not a proof.
ErgodicityReport check_ergodicity(const BirthDeathRates& rates, State horizon, double tol);

// Transition probability of the continuous-time walk on {0,1}^n that picks a
// coordinate uniformly and flips it with rate 1/2 each way:
//   P_t(x, y) = 2^{-n} prod_i (1 + (-1)^{x_i xor y_i} e^{-t/n}).
double hypercube_kernel(int n, double t, State x, State y);

// Product of finite component chains sharing one state space {0..r-1}, one
// coordinate moving at a time, each at 1/n of its component rate. States are
// encoded in radix r, least significant digit first.
Generator build_product_chain(std::vector<Generator> components);

// The hypercube chain above as a product of 2-state flip chains.
Generator hypercube_generator(int n);

struct SemigroupRows {
  std::vector<State> truncation;            // sorted working window
  std::vector<State> starts;
  std::vector<std::vector<double>> rows;    // rows[s][k] = P_t(starts[s], truncation[k])
  std::vector<double> leaked;               // 1 - row sum: series cutoff + window escape
  std::int64_t series_terms = 0;
};

// Rows of e^{tQ} by uniformization: the chain is dominated by a Poisson clock
// at the window's top total rate, the series is cut where the Poisson tail
// drops below tol/2, and the remaining tol/2 budgets mass escaping the
// window. Throws TruncationError when a row leaks more than tol.
SemigroupRows semigroup_rows(const Generator& gen, double t, std::span<const State> starts,
                             std::span<const State> truncation, double tol);

}  // namespace jumpcurve
