#include "jumpcurve/jump_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <unordered_map>

namespace jumpcurve {

namespace {

// log(e^a + e^b) without overflow.
double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

Generator::Generator(JumpFn jump_fn, std::optional<std::vector<State>> finite_states, std::string name)
    : jump_fn_(std::move(jump_fn)), finite_states_(std::move(finite_states)), name_(std::move(name)) {
  if (!jump_fn_) throw std::invalid_argument("generator needs a jump function");
  if (finite_states_) {
    if (finite_states_->empty()) throw std::invalid_argument("finite state list must be nonempty");
    if (!std::is_sorted(finite_states_->begin(), finite_states_->end()))
      std::sort(finite_states_->begin(), finite_states_->end());
  }
}

std::vector<JumpEntry> Generator::jumps(State x) const {
  std::vector<JumpEntry> row = jump_fn_(x);
  for (const JumpEntry& e : row) {
    if (e.target == x) throw std::invalid_argument("jump rows must not contain the source state");
    if (!(e.rate > 0.0) || !std::isfinite(e.rate))
      throw std::invalid_argument("jump rates must be positive and finite");
  }
  return row;
}

double Generator::total_rate(State x) const {
  double total = 0.0;
  for (const JumpEntry& e : jumps(x)) total += e.rate;
  return total;
}

BirthDeathRates::BirthDeathRates(RateForm form, double lambda, double nu,
                                 std::function<double(State)> birth, std::function<double(State)> death)
    : form_(form), lambda_(lambda), nu_(nu), birth_(std::move(birth)), death_(std::move(death)) {}

BirthDeathRates BirthDeathRates::mm_infinity(double lambda, double nu) {
  if (!(lambda > 0.0) || !(nu > 0.0)) throw std::invalid_argument("infinite-server rates must be positive");
  return BirthDeathRates(RateForm::MMInfinity, lambda, nu,
                         [lambda](State) { return lambda; },
                         [nu](State x) { return nu * static_cast<double>(x); });
}

BirthDeathRates BirthDeathRates::constant_rates(double lambda, double nu) {
  if (!(lambda > 0.0) || !(nu > 0.0)) throw std::invalid_argument("constant rates must be positive");
  return BirthDeathRates(RateForm::ConstantRates, lambda, nu,
                         [lambda](State) { return lambda; },
                         [nu](State x) { return x >= 1 ? nu : 0.0; });
}

BirthDeathRates BirthDeathRates::custom(std::function<double(State)> birth, std::function<double(State)> death) {
  if (!birth || !death) throw std::invalid_argument("custom rates need birth and death functions");
  return BirthDeathRates(RateForm::Custom, 0.0, 0.0, std::move(birth), std::move(death));
}

BirthDeathRates BirthDeathRates::truncated(State cap) const {
  if (cap < 1) throw std::invalid_argument("rate ladder cap must be >= 1");
  BirthDeathRates out = *this;
  out.cap_ = cap;
  return out;
}

double BirthDeathRates::birth(State x) const {
  if (x < 0) throw std::invalid_argument("birth rate index must be nonnegative");
  if (cap_ && x >= *cap_) return 0.0;
  const double r = birth_(x);
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("birth rates must be positive below the cap");
  return r;
}

double BirthDeathRates::death(State x) const {
  if (x < 0) throw std::invalid_argument("death rate index must be nonnegative");
  if (cap_ && x > *cap_) throw std::invalid_argument("state beyond the rate ladder cap");
  if (x == 0) return 0.0;
  const double r = death_(x);
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("death rates must be positive for x >= 1");
  return r;
}

Generator BirthDeathRates::to_generator() const {
  BirthDeathRates rates = *this;
  std::optional<std::vector<State>> states;
  if (cap_) {
    std::vector<State> all(static_cast<std::size_t>(*cap_) + 1);
    std::iota(all.begin(), all.end(), State{0});
    states = std::move(all);
  }
  return Generator(
      [rates](State x) {
        std::vector<JumpEntry> row;
        const double up = rates.birth(x);
        if (up > 0.0) row.push_back({x + 1, up});
        const double down = rates.death(x);
        if (down > 0.0) row.push_back({x - 1, down});
        return row;
      },
      std::move(states), "birth_death");
}

StationaryMeasure stationary_measure(const BirthDeathRates& rates, double tol) {
  if (!(tol > 0.0) || tol >= 1.0) throw std::invalid_argument("stationary tail tolerance must be in (0,1)");

  // Detailed balance: w(x+1) = w(x) * birth(x) / death(x+1), carried as logs.
  std::vector<double> log_w{0.0};
  double log_total = 0.0;
  std::optional<State> stop;

  const State hard_cap = rates.cap() ? *rates.cap() : State{1} << 22;
  for (State x = 0; x < hard_cap; ++x) {
    if (rates.cap() && x >= *rates.cap()) break;
    const double lw_next = log_w.back() + std::log(rates.birth(x)) - std::log(rates.death(x + 1));
    log_w.push_back(lw_next);
    log_total = log_add(log_total, lw_next);
    if (lw_next - log_w.front() > 1400.0)
      throw NonErgodicError("stationary normalizer diverges (weights explode)");

    if (!rates.cap()) {
      // Geometric tail heuristic: once the weight ratio sits below 1, the
      // remaining mass is at most w(x+1) r / (1 - r).
      const double r = rates.birth(x + 1) / rates.death(x + 2);
      if (r < 1.0) {
        const double log_tail = lw_next + std::log(r) - std::log1p(-r);
        if (log_tail < std::log(tol) + log_total) {
          stop = x + 1;
          break;
        }
      }
    }
  }
  if (!rates.cap() && !stop)
    throw NonErgodicError("stationary measure did not concentrate within the scan cap");

  StationaryMeasure pi;
  const double log_max = *std::max_element(log_w.begin(), log_w.end());
  pi.pmf.resize(log_w.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    pi.pmf[i] = std::exp(log_w[i] - log_max);
    sum += pi.pmf[i];
  }
  for (double& p : pi.pmf) p /= sum;
  pi.log_normalizer = log_max + std::log(sum);
  if (!rates.cap()) {
    const State T = pi.truncation();
    const double r = rates.birth(T) / rates.death(T + 1);
    pi.tail_mass = r < 1.0 ? pi.pmf.back() * r / (1.0 - r) : tol;
  }
  return pi;
}

std::pair<double, double> stationary_integral(const BirthDeathRates& rates, const StationaryMeasure& pi,
                                              const std::function<double(State)>& f) {
  double acc = 0.0;
  for (std::size_t x = 0; x < pi.pmf.size(); ++x) acc += f(static_cast<State>(x)) * pi.pmf[x];
  if (rates.cap()) return {acc, 0.0};

  // Continue the recursion into the dropped tail until terms vanish.
  State x = pi.truncation();
  double w = pi.pmf.back();
  double residual = pi.tail_mass;
  for (State extra = 0; extra < 65536; ++extra) {
    const double ratio = rates.birth(x) / rates.death(x + 1);
    w *= ratio;
    ++x;
    const double term = w * f(x);
    acc += term;
    residual = ratio < 1.0 ? w * ratio / (1.0 - ratio) : residual;
    if (w < 1e-18 && std::abs(term) < 1e-18 * (std::abs(acc) + 1.0)) break;
  }
  const double tail_scale = std::abs(f(x + 1)) + 1.0;
  return {acc, residual * tail_scale};
}

namespace {

struct SeriesScan {
  double log_normalizer = kNegInf;
  double log_series = kNegInf;
};

// Partial sums up to `horizon` of the normalizer sum_x w(x) and of the
// recurrence series sum_x w(x) sum_{y>=x} 1/(w(y) birth(y)).
SeriesScan scan_series(const BirthDeathRates& rates, State horizon) {
  std::vector<double> log_w(static_cast<std::size_t>(horizon) + 1);
  log_w[0] = 0.0;
  for (State x = 0; x < horizon; ++x) {
    log_w[static_cast<std::size_t>(x + 1)] =
        log_w[static_cast<std::size_t>(x)] + std::log(rates.birth(x)) - std::log(rates.death(x + 1));
  }
  std::vector<double> log_inner(log_w.size());
  double suffix = kNegInf;
  for (State x = horizon; x >= 0; --x) {
    suffix = log_add(suffix, -log_w[static_cast<std::size_t>(x)] - std::log(rates.birth(x)));
    log_inner[static_cast<std::size_t>(x)] = suffix;
  }
  SeriesScan out;
  for (State x = 0; x <= horizon; ++x) {
    out.log_normalizer = log_add(out.log_normalizer, log_w[static_cast<std::size_t>(x)]);
    out.log_series = log_add(out.log_series, log_w[static_cast<std::size_t>(x)] + log_inner[static_cast<std::size_t>(x)]);
  }
  return out;
}

}  // namespace

ErgodicityReport check_ergodicity(const BirthDeathRates& rates, State horizon, double tol) {
  if (horizon < 8) throw std::invalid_argument("ergodicity horizon must be at least 8");
  if (!(tol > 0.0)) throw std::invalid_argument("ergodicity tolerance must be positive");
  if (rates.cap()) {
    // A finite ladder with positive rates is always ergodic.
    ErgodicityReport finite;
    finite.verdict = ErgodicityVerdict::Ergodic;
    finite.normalizer_converges = true;
    finite.recurrence_series_grows = true;
    return finite;
  }

  const SeriesScan half = scan_series(rates, horizon / 2);
  const SeriesScan full = scan_series(rates, horizon);

  ErgodicityReport report;
  report.log_normalizer_half = half.log_normalizer;
  report.log_normalizer_full = full.log_normalizer;
  report.log_series_half = half.log_series;
  report.log_series_full = full.log_series;
  // Verdicts compare growth across a doubling of the horizon, so the
  // convergence cutoff has a fixed floor; tol only ever loosens it.
  report.normalizer_converges =
      full.log_normalizer - half.log_normalizer < std::log1p(std::max(tol, 0.01));
  report.recurrence_series_grows = full.log_series - half.log_series > std::log(1.5);

  if (!report.normalizer_converges)
    report.verdict = ErgodicityVerdict::TransientSuspect;
  else if (report.recurrence_series_grows)
    report.verdict = ErgodicityVerdict::Ergodic;
  else
    report.verdict = ErgodicityVerdict::ExplosiveSuspect;
  return report;
}

double hypercube_kernel(int n, double t, State x, State y) {
  if (n < 1 || n > 62) throw std::invalid_argument("hypercube dimension must be in [1, 62]");
  if (t < 0.0) throw std::invalid_argument("hypercube kernel needs t >= 0");
  const State size = State{1} << n;
  if (x < 0 || y < 0 || x >= size || y >= size)
    throw std::invalid_argument("hypercube vertices must have n bits");
  const double decay = std::exp(-t / static_cast<double>(n));
  double p = 1.0;
  for (int i = 0; i < n; ++i) {
    const bool differ = ((x >> i) & 1) != ((y >> i) & 1);
    p *= 0.5 * (differ ? 1.0 - decay : 1.0 + decay);
  }
  return p;
}

Generator build_product_chain(std::vector<Generator> components) {
  if (components.empty()) throw std::invalid_argument("product chain needs at least one component");
  const int copies = static_cast<int>(components.size());
  State radix = 0;
  for (const Generator& component : components) {
    if (!component.finite_states())
      throw std::invalid_argument("product components must be finite chains");
    const std::vector<State>& comp_states = *component.finite_states();
    if (radix == 0) radix = static_cast<State>(comp_states.size());
    if (static_cast<State>(comp_states.size()) != radix)
      throw std::invalid_argument("product components must share one state space");
    for (State i = 0; i < radix; ++i) {
      if (comp_states[static_cast<std::size_t>(i)] != i)
        throw std::invalid_argument("product components must live on {0..r-1}");
    }
  }

  double encoded_size = 1.0;
  for (int i = 0; i < copies; ++i) encoded_size *= static_cast<double>(radix);
  if (encoded_size > static_cast<double>(State{1} << 22))
    throw std::invalid_argument("product state space too large to enumerate");

  const State total = static_cast<State>(encoded_size);
  std::vector<State> states(static_cast<std::size_t>(total));
  std::iota(states.begin(), states.end(), State{0});

  const double slowdown = 1.0 / static_cast<double>(copies);
  auto shared = std::make_shared<std::vector<Generator>>(std::move(components));
  Generator::JumpFn base_fn = [shared, copies, radix, slowdown](State x) {
    std::vector<JumpEntry> row;
    State scale = 1;
    State rest = x;
    for (int i = 0; i < copies; ++i) {
      const State digit = rest % radix;
      for (const JumpEntry& e : (*shared)[static_cast<std::size_t>(i)].jumps(digit))
        row.push_back({x + (e.target - digit) * scale, e.rate * slowdown});
      rest /= radix;
      scale *= radix;
    }
    return row;
  };
  return Generator(std::move(base_fn), std::move(states), "product");
}

Generator hypercube_generator(int n) {
  if (n < 1 || n > 22) throw std::invalid_argument("hypercube dimension must be in [1, 22]");
  Generator flip(
      [](State x) {
        return std::vector<JumpEntry>{{x == 0 ? State{1} : State{0}, 0.5}};
      },
      std::vector<State>{0, 1}, "flip");
  return build_product_chain(std::vector<Generator>(static_cast<std::size_t>(n), flip));
}

SemigroupRows semigroup_rows(const Generator& gen, double t, std::span<const State> starts,
                             std::span<const State> truncation, double tol) {
  if (t < 0.0) throw std::invalid_argument("semigroup time must be nonnegative");
  if (!(tol > 0.0) || tol >= 1.0) throw std::invalid_argument("semigroup tolerance must be in (0,1)");
  if (starts.empty() || truncation.empty())
    throw std::invalid_argument("semigroup needs start states and a truncation window");

  SemigroupRows out;
  out.truncation.assign(truncation.begin(), truncation.end());
  std::sort(out.truncation.begin(), out.truncation.end());
  out.truncation.erase(std::unique(out.truncation.begin(), out.truncation.end()), out.truncation.end());
  out.starts.assign(starts.begin(), starts.end());

  const std::size_t window = out.truncation.size();
  std::unordered_map<State, std::size_t> index;
  index.reserve(window * 2);
  for (std::size_t k = 0; k < window; ++k) index[out.truncation[k]] = k;

  for (State s : out.starts) {
    if (!index.count(s)) throw std::invalid_argument("start states must lie inside the truncation window");
  }

  // Uniformized kernel restricted to the window; escaping rate becomes leak.
  double top_rate = 0.0;
  std::vector<std::vector<std::pair<std::size_t, double>>> kernel(window);
  std::vector<double> stay(window);
  std::vector<double> row_total(window);
  for (std::size_t k = 0; k < window; ++k) {
    row_total[k] = gen.total_rate(out.truncation[k]);
    top_rate = std::max(top_rate, row_total[k]);
  }
  for (std::size_t k = 0; k < window; ++k) {
    if (top_rate > 0.0) {
      for (const JumpEntry& e : gen.jumps(out.truncation[k])) {
        const auto it = index.find(e.target);
        if (it != index.end()) kernel[k].push_back({it->second, e.rate / top_rate});
      }
    }
    stay[k] = top_rate > 0.0 ? 1.0 - row_total[k] / top_rate : 1.0;
  }

  // Poisson(top_rate * t) series cut where the accumulated mass reaches
  // 1 - tol/2. Weights are computed in log space so large products of rate
  // and time stay representable.
  const double mean = top_rate * t;
  std::vector<double> weights;
  {
    const double target = 1.0 - tol / 2.0;
    double cum = 0.0;
    double log_w = -mean;  // log pmf(0)
    const double log_mean = mean > 0.0 ? std::log(mean) : kNegInf;
    const std::int64_t cap =
        static_cast<std::int64_t>(mean + 60.0 * std::sqrt(mean + 1.0) + 200.0);
    for (std::int64_t k = 0;; ++k) {
      const double w = std::exp(log_w);
      weights.push_back(w);
      cum += w;
      if (cum >= target) break;
      if (k > cap) throw std::logic_error("uniformization series failed to accumulate");
      log_w += log_mean - std::log(static_cast<double>(k + 1));
    }
  }
  out.series_terms = static_cast<std::int64_t>(weights.size());

  std::vector<double> v(window), next(window), acc(window);
  for (State s : out.starts) {
    std::fill(v.begin(), v.end(), 0.0);
    std::fill(acc.begin(), acc.end(), 0.0);
    v[index.at(s)] = 1.0;
    for (std::size_t term = 0; term < weights.size(); ++term) {
      const double w = weights[term];
      for (std::size_t k = 0; k < window; ++k) acc[k] += w * v[k];
      if (term + 1 == weights.size()) break;
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t k = 0; k < window; ++k) {
        const double mass = v[k];
        if (mass == 0.0) continue;
        next[k] += mass * stay[k];
        for (const auto& [j, p] : kernel[k]) next[j] += mass * p;
      }
      v.swap(next);
    }
    double row_sum = 0.0;
    for (double p : acc) row_sum += p;
    const double leaked = 1.0 - row_sum;
    if (leaked > tol) {
      throw TruncationError("semigroup row from state " + std::to_string(s) + " leaked " +
                                std::to_string(leaked) + " > tol; enlarge the window",
                            static_cast<State>(window) * 2);
    }
    out.rows.push_back(acc);
    out.leaked.push_back(leaked);
  }
  return out;
}

}  // namespace jumpcurve
