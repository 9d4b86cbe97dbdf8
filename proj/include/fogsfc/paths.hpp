#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "fogsfc/net_model.hpp"

namespace fogsfc {

// -ln(1 - p): additive node weight whose sum along a path is -ln(survival).
inline double fault_weight(double p) { return p >= 1.0 ? kInfinity : -std::log1p(-p); }

inline double path_survival(const NetworkModel& model, const std::vector<SwitchId>& nodes, std::size_t slot) {
  double s = 1.0;
  for (SwitchId v : nodes) s *= 1.0 - model.fault_prob(v, slot);
  return s;
}

inline double path_delay(const NetworkModel& model, const std::vector<SwitchId>& nodes) {
  double d = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) d += model.delay(nodes[k], nodes[k + 1]);
  return d;
}

struct PathScreen {
  double max_delay_ms = kInfinity;
  double min_survival = 0.0;       // 1 - MT
  double min_link_capacity = 0.0;  // links with mu*B below this are skipped
};

// Depth-first enumeration of loop-free paths from s to d in ascending
// neighbour order. Partial paths that already break the delay or survival
// screen are cut. `visit(path)` returns false to stop early; the function
// returns false iff it was stopped.
template <class Visit>
bool for_each_simple_path(const NetworkModel& model, SwitchId s, SwitchId d, std::size_t slot,
                          const PathScreen& screen, Visit&& visit) {
  const std::size_t n = model.switch_count();
  if (s >= n || d >= n || s == d) return true;
  std::vector<char> on_path(n, 0);
  std::vector<SwitchId> path{s};
  on_path[s] = 1;
  const double eps = 1e-9;

  std::function<bool(double, double)> dfs = [&](double delay, double survival) -> bool {
    const SwitchId u = path.back();
    for (SwitchId v = 0; v < n; ++v) {
      if (on_path[v] || !model.has_link(u, v)) continue;
      if (model.mu() * model.capacity(u, v) + eps < screen.min_link_capacity) continue;
      const double nd = delay + model.delay(u, v);
      if (nd > screen.max_delay_ms + eps) continue;
      const double ns = survival * (1.0 - model.fault_prob(v, slot));
      if (ns + 1e-12 < screen.min_survival) continue;
      path.push_back(v);
      bool keep_going = true;
      if (v == d) {
        keep_going = visit(static_cast<const std::vector<SwitchId>&>(path));
      } else {
        on_path[v] = 1;
        keep_going = dfs(nd, ns);
        on_path[v] = 0;
      }
      path.pop_back();
      if (!keep_going) return false;
    }
    return true;
  };

  const double s0 = 1.0 - model.fault_prob(s, slot);
  if (s0 + 1e-12 < screen.min_survival) return true;
  return dfs(0.0, s0);
}

struct ShortestPathTree {
  SwitchId root = 0;
  std::vector<double> weight;  // sum of fault weights of every node on the path, root included
  std::vector<std::size_t> hops;
  std::vector<std::optional<SwitchId>> pred;

  bool reachable(SwitchId v) const { return std::isfinite(weight[v]); }
  double survival(SwitchId v) const { return reachable(v) ? std::exp(-weight[v]) : 0.0; }

  std::vector<SwitchId> path_to(SwitchId v) const {
    std::vector<SwitchId> out;
    if (!reachable(v)) return out;
    for (std::optional<SwitchId> cur = v; cur; cur = pred[*cur]) out.push_back(*cur);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

// Single-source shortest paths with additive node weights -ln(1 - p_i), so
// the minimum-weight path is the maximum-survival path. Ties are broken by
// hop count, then by the smaller predecessor index. `link_ok(u, v)` and
// `node_ok(v)` restrict the usable graph; the root is always usable.
template <class LinkOk, class NodeOk>
ShortestPathTree shortest_path_fault(const NetworkModel& model, SwitchId from, std::size_t slot,
                                     LinkOk&& link_ok, NodeOk&& node_ok) {
  const std::size_t n = model.switch_count();
  ShortestPathTree t;
  t.root = from;
  t.weight.assign(n, kInfinity);
  t.hops.assign(n, 0);
  t.pred.assign(n, std::nullopt);

  using Key = std::tuple<double, std::size_t, SwitchId>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
  std::vector<char> done(n, 0);
  const double w0 = fault_weight(model.fault_prob(from, slot));
  if (!std::isfinite(w0)) return t;
  t.weight[from] = w0;
  heap.emplace(w0, 0, from);

  while (!heap.empty()) {
    auto [w, h, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (SwitchId v = 0; v < n; ++v) {
      if (done[v] || !model.has_link(u, v) || !link_ok(u, v) || !node_ok(v)) continue;
      const double wv = fault_weight(model.fault_prob(v, slot));
      if (!std::isfinite(wv)) continue;
      const double nw = w + wv;
      const std::size_t nh = h + 1;
      const bool better = nw < t.weight[v] || (nw == t.weight[v] && nh < t.hops[v]) ||
                          (nw == t.weight[v] && nh == t.hops[v] && t.pred[v] && u < *t.pred[v]);
      if (better) {
        t.weight[v] = nw;
        t.hops[v] = nh;
        t.pred[v] = u;
        heap.emplace(nw, nh, v);
      }
    }
  }
  return t;
}

inline ShortestPathTree shortest_path_fault(const NetworkModel& model, SwitchId from, std::size_t slot) {
  return shortest_path_fault(
      model, from, slot, [](SwitchId, SwitchId) { return true; }, [](SwitchId) { return true; });
}

}  // namespace fogsfc
