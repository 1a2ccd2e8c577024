#include "degentaxis/dualnorm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "degentaxis/error.hpp"
#include "degentaxis/parallel.hpp"

namespace degentaxis {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Arcs with reduced cost at or below this are treated as tight.
constexpr double kTight = 1e-13;

struct Edge {
  int a;
  int b;
  double cost;
  double flow;  // signed, positive from a to b
};

/// Uncapacitated undirected transport network on the cells plus ground.
class TransportNetwork {
 public:
  explicit TransportNetwork(const Grid& g) : nodes_(static_cast<int>(g.size()) + 1) {
    const int ground = nodes_ - 1;
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (int a = 0; a < g.dim; ++a) {
        if (has_upper_neighbor(g, i, a)) {
          edges_.push_back({static_cast<int>(i), static_cast<int>(i + g.stride(a)), g.spacing[a], 0.0});
        }
      }
      edges_.push_back({static_cast<int>(i), ground, 1.0, 0.0});
    }
    start_.assign(nodes_ + 1, 0);
    for (const Edge& e : edges_) {
      ++start_[e.a + 1];
      ++start_[e.b + 1];
    }
    for (int v = 0; v < nodes_; ++v) start_[v + 1] += start_[v];
    incident_.resize(2 * edges_.size());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (int id = 0; id < static_cast<int>(edges_.size()); ++id) {
      incident_[fill[edges_[id].a]++] = id;
      incident_[fill[edges_[id].b]++] = id;
    }
  }

  int nodes() const { return nodes_; }
  int begin(int v) const { return start_[v]; }
  int end(int v) const { return start_[v + 1]; }
  int edge_at(int slot) const { return incident_[slot]; }

  struct Arc {
    int to;
    double cost;
    double cap;
  };

  /// Residual arc leaving `from` along edge `id`. Existing flow toward
  /// `from` can be cancelled at cost -c up to its amount; otherwise the
  /// arc is uncapacitated at cost +c.
  Arc arc(int from, int id, double cap_tol) const {
    const Edge& e = edges_[id];
    const int to = from == e.a ? e.b : e.a;
    const double along = from == e.a ? e.flow : -e.flow;
    if (along < -cap_tol) return {to, -e.cost, -along};
    return {to, e.cost, kInf};
  }

  void push(int from, int id, double amount, double cap_tol) {
    Edge& e = edges_[id];
    e.flow += from == e.a ? amount : -amount;
    if (std::abs(e.flow) <= cap_tol) e.flow = 0.0;
  }

  double cost() const {
    CompensatedSum s;
    for (const Edge& e : edges_) s.add(e.cost * std::abs(e.flow));
    return s.value();
  }

 private:
  int nodes_;
  std::vector<Edge> edges_;
  std::vector<int> start_;
  std::vector<int> incident_;
};

class PrimalDualSolver {
 public:
  PrimalDualSolver(TransportNetwork& net, std::vector<double> supply, double scale)
      : net_(net),
        excess_(std::move(supply)),
        potential_(net.nodes(), 0.0),
        thr_(1e-15 * scale),
        cap_tol_(1e-15 * scale) {}

  int solve() {
    int phases = 0;
    while (has_excess()) {
      if (!shortest_path_phase()) break;
      while (blocking_flow_round()) {
      }
      ++phases;
    }
    return phases;
  }

  const std::vector<double>& potentials() const { return potential_; }

 private:
  bool is_source(int v) const { return excess_[v] > thr_; }
  bool is_sink(int v) const { return excess_[v] < -thr_; }

  bool has_excess() const {
    for (int v = 0; v < net_.nodes(); ++v) {
      if (is_source(v)) return true;
    }
    return false;
  }

  double reduced(int from, const TransportNetwork::Arc& arc) const {
    return arc.cost + potential_[from] - potential_[arc.to];
  }

  /// Multi-source Dijkstra on reduced costs, stopped at the nearest sink;
  /// potentials are then raised so that every shortest path becomes tight.
  bool shortest_path_phase() {
    const int n = net_.nodes();
    std::vector<double> dist(n, kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (int v = 0; v < n; ++v) {
      if (is_source(v)) {
        dist[v] = 0.0;
        queue.emplace(0.0, v);
      }
    }
    double reach = kInf;
    while (!queue.empty()) {
      const auto [d, x] = queue.top();
      queue.pop();
      if (d > dist[x]) continue;
      if (is_sink(x)) {
        reach = d;
        break;
      }
      for (int slot = net_.begin(x); slot < net_.end(x); ++slot) {
        const auto arc = net_.arc(x, net_.edge_at(slot), cap_tol_);
        const double nd = d + std::max(0.0, reduced(x, arc));
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          queue.emplace(nd, arc.to);
        }
      }
    }
    if (reach == kInf) return false;
    for (int v = 0; v < n; ++v) potential_[v] += std::min(dist[v], reach);
    return true;
  }

  bool tight(int from, const TransportNetwork::Arc& arc) const {
    return reduced(from, arc) <= kTight;
  }

  /// One Dinic round on the tight residual arcs: BFS levels from all
  /// sources, then augmenting paths along increasing levels.
  bool blocking_flow_round() {
    const int n = net_.nodes();
    level_.assign(n, -1);
    std::vector<int> frontier;
    for (int v = 0; v < n; ++v) {
      if (is_source(v)) {
        level_[v] = 0;
        frontier.push_back(v);
      }
    }
    bool sink_reached = false;
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      const int x = frontier[head];
      if (is_sink(x)) {
        sink_reached = true;
        continue;
      }
      for (int slot = net_.begin(x); slot < net_.end(x); ++slot) {
        const auto arc = net_.arc(x, net_.edge_at(slot), cap_tol_);
        if (level_[arc.to] < 0 && tight(x, arc)) {
          level_[arc.to] = level_[x] + 1;
          frontier.push_back(arc.to);
        }
      }
    }
    if (!sink_reached) return false;

    cursor_.assign(n, 0);
    for (int v = 0; v < n; ++v) cursor_[v] = net_.begin(v);
    bool pushed_any = false;
    for (int s = 0; s < n; ++s) {
      while (is_source(s)) {
        const double got = augment(s, excess_[s]);
        if (got <= 0.0) break;
        excess_[s] -= got;
        pushed_any = true;
      }
    }
    return pushed_any;
  }

  double augment(int x, double amount) {
    if (level_[x] > 0 && is_sink(x)) {
      const double take = std::min(amount, -excess_[x]);
      excess_[x] += take;
      return take;
    }
    for (int& slot = cursor_[x]; slot < net_.end(x); ++slot) {
      const int id = net_.edge_at(slot);
      const auto arc = net_.arc(x, id, cap_tol_);
      if (level_[arc.to] != level_[x] + 1 || !tight(x, arc)) continue;
      const double got = augment(arc.to, std::min(amount, arc.cap));
      if (got > 0.0) {
        net_.push(x, id, got, cap_tol_);
        return got;
      }
    }
    return 0.0;
  }

  TransportNetwork& net_;
  std::vector<double> excess_;
  std::vector<double> potential_;
  std::vector<int> level_;
  std::vector<int> cursor_;
  double thr_;
  double cap_tol_;
};

}  // namespace

DualNormResult dual_norm(const Field& f) {
  require_finite(f, "dual_norm density");
  const Grid& g = f.grid;
  const double vol = g.cell_volume();
  const std::size_t n = g.size();

  std::vector<double> supply(n + 1, 0.0);
  CompensatedSum total;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    supply[i] = f[i] * vol;
    total.add(supply[i]);
    scale += std::abs(supply[i]);
  }
  supply[n] = -total.value();

  DualNormResult result;
  result.maximizer = Field(g, 0.0);
  if (scale == 0.0) return result;

  TransportNetwork net(g);
  PrimalDualSolver solver(net, supply, scale);
  result.phases = solver.solve();

  const auto& p = solver.potentials();
  CompensatedSum value;
  for (std::size_t i = 0; i < n; ++i) {
    const double psi = std::clamp(p[n] - p[i], -1.0, 1.0);
    result.maximizer[i] = psi;
    value.add(supply[i] * psi);
  }
  result.value = std::max(0.0, value.value());
  result.duality_gap = net.cost() - result.value;
  return result;
}

double lattice_oracle(const Field& f, int levels) {
  const Grid& g = f.grid;
  const std::size_t n = g.size();
  if (n > 6) throw InvalidArgument("lattice_oracle accepts at most 6 cells");
  if (levels < 2) throw InvalidArgument("lattice_oracle needs at least 2 levels");
  require_finite(f, "lattice_oracle density");

  const double vol = g.cell_volume();
  std::vector<double> lattice(levels);
  for (int k = 0; k < levels; ++k) lattice[k] = -1.0 + 2.0 * k / (levels - 1);

  // Upper bound of the objective still available from cells i..n-1.
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) tail[i] = tail[i + 1] + std::abs(f[i]) * vol;

  std::vector<double> psi(n, 0.0);
  double best = -kInf;
  std::function<void(std::size_t, double)> search = [&](std::size_t i, double partial) {
    if (i == n) {
      best = std::max(best, partial);
      return;
    }
    if (partial + tail[i] <= best) return;
    const auto c = g.coords(i);
    for (double value : lattice) {
      bool feasible = true;
      for (int a = 0; a < g.dim && feasible; ++a) {
        if (c[a] > 0 && std::abs(value - psi[i - g.stride(a)]) > g.spacing[a] + 1e-12) feasible = false;
      }
      if (!feasible) continue;
      psi[i] = value;
      search(i + 1, partial + f[i] * vol * value);
    }
  };
  search(0, 0.0);
  return best;
}

double trajectory_variation(std::span<const Field> snapshots) {
  if (snapshots.size() < 2) throw InvalidArgument("trajectory_variation needs at least 2 snapshots");
  for (const Field& s : snapshots) {
    if (!(s.grid == snapshots.front().grid)) {
      throw InvalidArgument("trajectory_variation snapshots live on different grids");
    }
  }
  CompensatedSum total;
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    total.add(dual_norm(snapshots[k + 1] - snapshots[k]).value);
  }
  return total.value();
}

}  // namespace degentaxis
