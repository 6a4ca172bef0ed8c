#include "jumpcurve/bounds.hpp"

#include <cmath>

namespace jumpcurve {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

long double poisson_cramer_l(long double u) {
  if (u < 1e-4L) {
    const long double u2 = u * u;
    return u2 / 2.0L - u2 * u / 6.0L + u2 * u2 / 12.0L - u2 * u2 * u / 20.0L + u2 * u2 * u2 / 30.0L;
  }
  return (1.0L + u) * std::log1p(u) - u;
}

}  // namespace

double poisson_cramer(double u) {
  require(u >= 0.0 && std::isfinite(u), "poisson_cramer argument must be finite and >= 0");
  return static_cast<double>(poisson_cramer_l(u));
}

double log_mgf_bound(double tau, double t, double z, double sigma, double b, double V2) {
  require(sigma > 0.0, "log_mgf_bound needs sigma > 0");
  require(b > 0.0 && V2 > 0.0, "log_mgf_bound needs positive jump constants");
  require(tau >= 0.0 && t >= 0.0 && z >= 0.0, "log_mgf_bound needs nonnegative tau, t, z");
  const double coeff = V2 * (-std::expm1(-2.0 * sigma * t)) / (2.0 * b * b * sigma);
  const double tz = tau * z;
  return coeff * (std::expm1(tz) - tz);
}

ChernoffResult chernoff_exponent(double c, double z, double y) {
  require(c > 0.0 && z > 0.0, "chernoff_exponent needs c > 0 and z > 0");
  require(y >= 0.0, "chernoff_exponent needs y >= 0");
  ChernoffResult result;
  const double u = y / (c * z);
  result.tau_star = std::log1p(u) / z;
  result.value = -c * poisson_cramer(u);
  return result;
}

std::vector<double> s_weights(double sigma, std::span<const double> times) {
  require(sigma > 0.0, "s_weights needs sigma > 0");
  require(!times.empty(), "s_weights needs at least one observation time");
  double previous = 0.0;
  for (double t : times) {
    require(t > previous, "observation times must be positive and strictly increasing");
    previous = t;
  }
  const std::size_t n = times.size();
  std::vector<double> s(n);
  s[n - 1] = 1.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    // s_k = 1 + e^{-sigma (t_{k+1} - t_k)} s_{k+1}
    s[k] = 1.0 + std::exp(-sigma * (times[k + 1] - times[k])) * s[k + 1];
  }
  return s;
}

double s_weight_sup_regular(double sigma, double t, std::int64_t n) {
  require(sigma > 0.0 && t > 0.0 && n >= 1, "s_weight_sup_regular needs sigma > 0, t > 0, n >= 1");
  return std::expm1(-sigma * t) / std::expm1(-sigma * t / static_cast<double>(n));
}

double tensorized_log_mgf_bound(double tau, std::span<const double> times,
                                std::span<const double> s, double sigma, double b,
                                double V2, double lip) {
  require(times.size() == s.size(), "one tail weight per observation time");
  require(lip >= 0.0, "tensorized_log_mgf_bound needs lip >= 0");
  double total = 0.0;
  double previous = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    total += log_mgf_bound(tau, times[k] - previous, s[k] * b * lip, sigma, b, V2);
    previous = times[k];
  }
  return total;
}

double bias_term(double sigma, double t, double lip, double mean_dist) {
  require(sigma > 0.0 && t > 0.0, "bias_term needs sigma > 0 and t > 0");
  require(lip >= 0.0 && mean_dist >= 0.0, "bias_term needs nonnegative lip and mean distance");
  return (-std::expm1(-sigma * t)) / (sigma * t) * lip * mean_dist;
}

namespace {

void check_params(const BoundParams& p) {
  require(p.sigma > 0.0, "deviation bound needs positive curvature");
  require(p.b > 0.0, "deviation bound needs a finite positive jump bound");
  require(p.V2 > 0.0, "deviation bound needs a finite positive second moment");
  require(p.lip > 0.0, "deviation bound needs a nonconstant observable (lip > 0)");
  require(p.horizon > 0.0, "deviation bound needs a positive horizon");
}

}  // namespace

DeviationBound empirical_mean_bound(const BoundParams& p, double y) {
  check_params(p);
  require(y >= 0.0, "deviation level must be >= 0");
  DeviationBound out;
  const double decay = -std::expm1(-p.sigma * p.horizon);
  out.g_argument = p.b * y * p.sigma / (p.V2 * decay * p.lip);
  out.exponent = p.V2 * p.horizon / (p.b * p.b) * poisson_cramer(out.g_argument);
  out.probability = 2.0 * std::exp(-out.exponent);
  return out;
}

DeviationBound empirical_mean_bound_steps(const BoundParams& p, double y, std::int64_t n) {
  check_params(p);
  require(y >= 0.0, "deviation level must be >= 0");
  require(n >= 1, "subdivision must have at least one point");

  // For large n every factor is a difference of order 1/n; expm1 in long
  // double keeps the n -> infinity limit stable to ~1e-9 at n = 2^20.
  const long double sigma = p.sigma, b = p.b, V2 = p.V2, lip = p.lip, t = p.horizon;
  const long double nn = static_cast<long double>(n);
  const long double dec_step = -std::expm1l(-sigma * t / nn);          // 1 - e^{-sigma t/n}
  const long double dec_2step = -std::expm1l(-2.0L * sigma * t / nn);  // 1 - e^{-2 sigma t/n}
  const long double dec_full = -std::expm1l(-sigma * t);               // 1 - e^{-sigma t}

  const long double c = nn * V2 * dec_2step / (2.0L * b * b * sigma);
  const long double arg = 2.0L * b * y * sigma * dec_step / (V2 * dec_2step * dec_full * lip);

  DeviationBound out;
  out.g_argument = static_cast<double>(arg);
  out.exponent = static_cast<double>(c * poisson_cramer_l(arg));
  out.probability = 2.0 * std::exp(-out.exponent);
  return out;
}

DeviationBound empirical_mean_bound_floor(double rate_floor, double weight_rate_bound,
                                          double sigma, double lip, double t, double y) {
  require(rate_floor > 0.0 && weight_rate_bound > 0.0,
          "floor bound needs positive rate floor and weight/rate constant");
  BoundParams p;
  p.sigma = sigma;
  p.b = weight_rate_bound / std::sqrt(rate_floor);
  p.V2 = 2.0 * weight_rate_bound * weight_rate_bound;
  p.lip = lip;
  p.horizon = t;
  return empirical_mean_bound(p, y);
}

double mminf_upper_tail(State x0, double t, double lambda, double nu, double y) {
  require(x0 >= 0, "start state must be nonnegative");
  require(lambda > 0.0 && nu > 0.0, "mminf_upper_tail needs positive rates");
  require(t > 0.0 && y > 0.0, "mminf_upper_tail needs t > 0 and y > 0");
  const double xi = lambda / nu;
  const double m = static_cast<double>(x0) * std::exp(-nu * t) + xi * (-std::expm1(-nu * t));
  return std::exp(y - (m + y) * std::log1p(y / m));
}

}  // namespace jumpcurve
