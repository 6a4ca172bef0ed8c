#include "jumpcurve/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jumpcurve {

DiscreteMeasure DiscreteMeasure::point_mass(State x) {
  if (x < 0) throw std::invalid_argument("support points must be nonnegative");
  return DiscreteMeasure{{x}, {1.0}};
}

DiscreteMeasure DiscreteMeasure::make(std::vector<State> support, std::vector<double> weights) {
  if (support.empty()) throw std::invalid_argument("measure needs a nonempty support");
  if (support.size() != weights.size())
    throw std::invalid_argument("measure needs one weight per support point");

  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });

  DiscreteMeasure m;
  m.support.reserve(support.size());
  m.weights.reserve(weights.size());
  double total = 0.0;
  for (std::size_t idx : order) {
    const State x = support[idx];
    const double w = weights[idx];
    if (x < 0) throw std::invalid_argument("support points must be nonnegative");
    if (!m.support.empty() && m.support.back() == x)
      throw std::invalid_argument("support points must be distinct");
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be positive and finite");
    m.support.push_back(x);
    m.weights.push_back(w);
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("weights must sum to 1 within 1e-12");
  return m;
}

namespace {

struct Arc {
  int i, j;
  double flow;
};

// Dense transportation simplex. Supports stay small here (tens to a few
// hundred points), so O(m n) scans per pivot are cheap and the bookkeeping
// stays simple enough to audit.
class TransportationSimplex {
 public:
  TransportationSimplex(std::vector<double> supply, std::vector<double> demand,
                        std::vector<double> cost)
      : m_(static_cast<int>(supply.size())),
        n_(static_cast<int>(demand.size())),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        cost_(std::move(cost)),
        in_basis_(static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_), false) {}

  void solve() {
    northwest_corner();
    const double eps = reduced_cost_eps();
    // Most-negative-first pivots converge fast in practice; past the safety
    // threshold, first-improving (Bland) pivots guarantee termination under
    // degeneracy.
    const long bland_after = 64L * (m_ + n_);
    const long hard_cap = 4096L * (m_ + n_) + 1000000L;
    for (long iter = 0;; ++iter) {
      if (iter > hard_cap) throw std::logic_error("transportation simplex failed to terminate");
      compute_potentials();
      int ei, ej;
      if (!pick_entering(eps, iter > bland_after, ei, ej)) break;
      pivot(ei, ej);
    }
  }

  double objective() const {
    double total = 0.0;
    for (const Arc& a : basis_) total += a.flow * cost_[idx(a.i, a.j)];
    return total;
  }

  const std::vector<Arc>& basis() const { return basis_; }
  const std::vector<double>& row_potential() const { return u_; }
  const std::vector<double>& col_potential() const { return v_; }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
  }

  double reduced_cost_eps() const {
    double scale = 0.0;
    for (double c : cost_) scale = std::max(scale, std::abs(c));
    return std::max(scale, 1.0) * 1e-12;
  }

  // Initial basic feasible solution with exactly m + n - 1 arcs; ties move
  // down the row so degenerate zero arcs stay in the basis.
  void northwest_corner() {
    int i = 0, j = 0;
    double ra = supply_[0], rb = demand_[0];
    for (;;) {
      add_basic(i, j, std::min(ra, rb));
      if (i == m_ - 1 && j == n_ - 1) break;
      if ((ra <= rb && i < m_ - 1) || j == n_ - 1) {
        rb -= ra;
        ++i;
        ra = supply_[static_cast<std::size_t>(i)];
      } else {
        ra -= rb;
        ++j;
        rb = demand_[static_cast<std::size_t>(j)];
      }
    }
  }

  void add_basic(int i, int j, double flow) {
    basis_.push_back(Arc{i, j, flow});
    in_basis_[idx(i, j)] = true;
  }

  // Tree solve of u_i + v_j = c_ij over basic arcs, u_0 = 0.
  void compute_potentials() {
    const double unset = std::numeric_limits<double>::quiet_NaN();
    u_.assign(static_cast<std::size_t>(m_), unset);
    v_.assign(static_cast<std::size_t>(n_), unset);
    u_[0] = 0.0;
    bool progress = true;
    int remaining = m_ + n_ - 1;
    while (remaining > 0 && progress) {
      progress = false;
      for (const Arc& a : basis_) {
        const bool know_u = !std::isnan(u_[static_cast<std::size_t>(a.i)]);
        const bool know_v = !std::isnan(v_[static_cast<std::size_t>(a.j)]);
        if (know_u == know_v) continue;
        if (know_u)
          v_[static_cast<std::size_t>(a.j)] = cost_[idx(a.i, a.j)] - u_[static_cast<std::size_t>(a.i)];
        else
          u_[static_cast<std::size_t>(a.i)] = cost_[idx(a.i, a.j)] - v_[static_cast<std::size_t>(a.j)];
        progress = true;
        --remaining;
      }
    }
    if (remaining != 0) throw std::logic_error("transportation basis is not a spanning tree");
  }

  bool pick_entering(double eps, bool bland, int& ei, int& ej) const {
    double best = -eps;
    ei = -1;
    ej = -1;
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (in_basis_[idx(i, j)]) continue;
        const double reduced =
            cost_[idx(i, j)] - u_[static_cast<std::size_t>(i)] - v_[static_cast<std::size_t>(j)];
        if (reduced < best) {
          best = reduced;
          ei = i;
          ej = j;
          if (bland) return true;  // first improving arc in row-major order
        }
      }
    }
    return ei >= 0;
  }

  // The basis plus the entering arc contains one cycle; walk it, shift flow
  // by the bottleneck of the arcs losing flow, and swap the bottleneck arc
  // out. Lowest-index arc wins bottleneck ties so pivots are reproducible.
  void pivot(int ei, int ej) {
    // Path from row node ei to column node ej through basic arcs.
    std::vector<std::vector<int>> arcs_of_row(static_cast<std::size_t>(m_));
    std::vector<std::vector<int>> arcs_of_col(static_cast<std::size_t>(n_));
    for (std::size_t a = 0; a < basis_.size(); ++a) {
      arcs_of_row[static_cast<std::size_t>(basis_[a].i)].push_back(static_cast<int>(a));
      arcs_of_col[static_cast<std::size_t>(basis_[a].j)].push_back(static_cast<int>(a));
    }
    // Bipartite DFS over tree arcs; parent_arc[node] reconstructs the path.
    // Nodes: rows 0..m-1, cols m..m+n-1.
    const int nodes = m_ + n_;
    std::vector<int> parent_arc(static_cast<std::size_t>(nodes), -1);
    std::vector<signed char> seen(static_cast<std::size_t>(nodes), 0);
    std::vector<int> stack{ei};
    seen[static_cast<std::size_t>(ei)] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == m_ + ej) break;
      const bool is_row = node < m_;
      const auto& incident = is_row ? arcs_of_row[static_cast<std::size_t>(node)]
                                    : arcs_of_col[static_cast<std::size_t>(node - m_)];
      for (int a : incident) {
        const int other = is_row ? m_ + basis_[static_cast<std::size_t>(a)].j
                                 : basis_[static_cast<std::size_t>(a)].i;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = 1;
        parent_arc[static_cast<std::size_t>(other)] = a;
        stack.push_back(other);
      }
    }
    if (!seen[static_cast<std::size_t>(m_ + ej)])
      throw std::logic_error("transportation basis lost connectivity");

    // Arcs on the path alternate -theta, +theta starting from the column end
    // of the entering arc.
    std::vector<int> cycle;  // basis indices from ej back to ei
    for (int node = m_ + ej; node != ei;) {
      const int a = parent_arc[static_cast<std::size_t>(node)];
      cycle.push_back(a);
      const Arc& arc = basis_[static_cast<std::size_t>(a)];
      node = (node >= m_) ? arc.i : m_ + arc.j;
    }

    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < cycle.size(); p += 2)  // minus arcs
      theta = std::min(theta, basis_[static_cast<std::size_t>(cycle[p])].flow);
    int leaving = -1;
    for (std::size_t p = 0; p < cycle.size(); p += 2) {
      const int a = cycle[p];
      if (basis_[static_cast<std::size_t>(a)].flow == theta && (leaving < 0 || a < leaving)) leaving = a;
    }
    if (leaving < 0) throw std::logic_error("transportation pivot found no leaving arc");

    for (std::size_t p = 0; p < cycle.size(); ++p) {
      Arc& arc = basis_[static_cast<std::size_t>(cycle[p])];
      arc.flow += (p % 2 == 0) ? -theta : theta;
      if (arc.flow < 0.0) arc.flow = 0.0;  // clamp rounding residue
    }

    Arc& out = basis_[static_cast<std::size_t>(leaving)];
    in_basis_[idx(out.i, out.j)] = false;
    in_basis_[idx(ei, ej)] = true;
    out = Arc{ei, ej, theta};
  }

  int m_, n_;
  std::vector<double> supply_, demand_, cost_;
  std::vector<Arc> basis_;
  std::vector<char> in_basis_;
  std::vector<double> u_, v_;
};

}  // namespace

TransportResult wasserstein_primal(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const Metric& metric) {
  const std::size_t m = mu.support.size();
  const std::size_t n = nu.support.size();
  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = metric.distance(mu.support[i], nu.support[j]);

  TransportationSimplex simplex(mu.weights, nu.weights, cost);
  simplex.solve();

  TransportResult result;
  result.plan.from = mu.support;
  result.plan.to = nu.support;
  result.plan.flow.assign(m * n, 0.0);
  for (const Arc& a : simplex.basis())
    result.plan.at(static_cast<std::size_t>(a.i), static_cast<std::size_t>(a.j)) = a.flow;
  result.plan.row_potential = simplex.row_potential();
  result.plan.col_potential = simplex.col_potential();
  result.plan.cost = simplex.objective();
  result.distance = result.plan.cost;
  return result;
}

double wasserstein_path_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const PathMetric& metric) {
  const State top = std::max(mu.support.back(), nu.support.back());
  std::size_t a = 0, b = 0;
  double F_mu = 0.0, F_nu = 0.0, total = 0.0;
  for (State k = 0; k < top; ++k) {
    if (a < mu.support.size() && mu.support[a] == k) F_mu += mu.weights[a++];
    if (b < nu.support.size() && nu.support[b] == k) F_nu += nu.weights[b++];
    total += metric.weight(k) * std::abs(F_mu - F_nu);
  }
  return total;
}

namespace {

DualCertificate certificate_from_values(std::vector<State> points, std::vector<double> values,
                                        const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                        const Metric& metric, double distance, double tol) {
  DualCertificate cert;
  cert.points = std::move(points);
  cert.values = std::move(values);

  auto value_at = [&](State x) {
    const auto it = std::lower_bound(cert.points.begin(), cert.points.end(), x);
    return cert.values[static_cast<std::size_t>(it - cert.points.begin())];
  };

  double objective = 0.0;
  for (std::size_t i = 0; i < mu.support.size(); ++i) objective += mu.weights[i] * value_at(mu.support[i]);
  for (std::size_t j = 0; j < nu.support.size(); ++j) objective -= nu.weights[j] * value_at(nu.support[j]);
  cert.objective = std::abs(objective);

  for (std::size_t p = 0; p < cert.points.size(); ++p) {
    for (std::size_t q = p + 1; q < cert.points.size(); ++q) {
      const double d = metric.distance(cert.points[p], cert.points[q]);
      if (d <= 0.0) continue;
      cert.lip = std::max(cert.lip, std::abs(cert.values[p] - cert.values[q]) / d);
    }
  }

  cert.verified = cert.lip <= 1.0 + tol && cert.objective >= distance - tol;
  return cert;
}

}  // namespace

DualCertificate dual_certificate(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const Metric& metric, double distance, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("certificate tolerance must be positive");

  std::vector<State> points;
  points.reserve(mu.support.size() + nu.support.size());
  std::merge(mu.support.begin(), mu.support.end(), nu.support.begin(), nu.support.end(),
             std::back_inserter(points));
  points.erase(std::unique(points.begin(), points.end()), points.end());

  if (const auto* path = dynamic_cast<const PathMetric*>(&metric)) {
    // f(x) = sum_{k<x} u_k sign(F_mu(k) - F_nu(k)); adjacent increments have
    // modulus at most u_k, so f is 1-Lipschitz by telescoping, and summation
    // by parts makes its mu-nu gap exactly the CDF formula for the distance.
    const State top = std::max(mu.support.back(), nu.support.back());
    std::vector<double> f_on_line(static_cast<std::size_t>(top) + 1, 0.0);
    std::size_t a = 0, b = 0;
    double F_mu = 0.0, F_nu = 0.0, f = 0.0;
    for (State k = 0; k < top; ++k) {
      if (a < mu.support.size() && mu.support[a] == k) F_mu += mu.weights[a++];
      if (b < nu.support.size() && nu.support[b] == k) F_nu += nu.weights[b++];
      const double diff = F_mu - F_nu;
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      f += path->weight(k) * sign;
      f_on_line[static_cast<std::size_t>(k) + 1] = f;
    }
    std::vector<double> values;
    values.reserve(points.size());
    for (State x : points) values.push_back(f_on_line[static_cast<std::size_t>(x)]);
    return certificate_from_values(std::move(points), std::move(values), mu, nu, metric, distance, tol);
  }

  // General ground metric: c-transform of the solver's column potentials,
  // f(z) = min_j ( d(z, y_j) - v_j ), a 1-Lipschitz function whose mu-nu gap
  // dominates the dual objective.
  const TransportResult primal = wasserstein_primal(mu, nu, metric);
  std::vector<double> values;
  values.reserve(points.size());
  for (State z : points) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nu.support.size(); ++j)
      best = std::min(best, metric.distance(z, nu.support[j]) - primal.plan.col_potential[j]);
    values.push_back(best);
  }
  return certificate_from_values(std::move(points), std::move(values), mu, nu, metric, distance, tol);
}

}  // namespace jumpcurve
