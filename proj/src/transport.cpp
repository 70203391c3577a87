#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lyap/error.hpp"
#include "lyap/measure.hpp"

namespace lyap {

namespace {

constexpr double kMassTol = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// Successive shortest augmenting paths with Johnson potentials on the dense
// bipartite residual network S -> sources -> sinks -> T.
TransportPlan solveTransport(const std::vector<double>& supply, const std::vector<double>& demand, const std::vector<double>& cost) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  require(m > 0 && n > 0, "transport problem needs non-empty marginals");
  require(cost.size() == m * n, "cost matrix has wrong size");
  for (double c : cost) require(std::isfinite(c) && c >= 0.0, "transport costs must be finite and non-negative");

  std::vector<double> resSupply(supply), resDemand(demand);
  std::vector<double> flow(m * n, 0.0);

  // Node layout: sources [0, m), sinks [m, m+n), S = m+n, T = m+n+1.
  const std::size_t V = m + n + 2;
  const std::size_t S = m + n, T = m + n + 1;
  std::vector<double> potential(V, 0.0), dist(V);
  std::vector<std::size_t> parent(V);
  std::vector<char> done(V);

  auto arcCost = [&](std::size_t u, std::size_t v) -> double {
    // Returns +inf when the residual arc u -> v is absent.
    if (u == S) return (v < m && resSupply[v] > kMassTol) ? 0.0 : kInf;
    if (u < m) return (v >= m && v < m + n) ? cost[u * n + (v - m)] : kInf;
    if (u >= m && u < m + n) {
      const std::size_t j = u - m;
      if (v == T) return resDemand[j] > kMassTol ? 0.0 : kInf;
      if (v < m) return flow[v * n + j] > kMassTol ? -cost[v * n + j] : kInf;
    }
    return kInf;
  };

  const std::size_t maxRounds = 16 * (m + n) * (m + n) + 64;
  for (std::size_t round = 0; round < maxRounds; ++round) {
    const double left = std::accumulate(resSupply.begin(), resSupply.end(), 0.0);
    const double need = std::accumulate(resDemand.begin(), resDemand.end(), 0.0);
    if (left <= kMassTol * static_cast<double>(m) || need <= kMassTol * static_cast<double>(n)) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    dist[S] = 0.0;
    for (;;) {
      std::size_t u = V;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist[v] < kInf && (u == V || dist[v] < dist[u])) u = v;
      if (u == V) break;
      done[u] = 1;
      if (u == T) break;
      for (std::size_t v = 0; v < V; ++v) {
        if (done[v]) continue;
        const double c = arcCost(u, v);
        if (c == kInf) continue;
        const double reduced = std::max(0.0, c + potential[u] - potential[v]);
        if (dist[u] + reduced < dist[v]) {
          dist[v] = dist[u] + reduced;
          parent[v] = u;
        }
      }
    }
    if (dist[T] == kInf) break;
    const double reach = dist[T];
    for (std::size_t v = 0; v < V; ++v) potential[v] += std::min(dist[v], reach);

    double push = kInf;
    for (std::size_t v = T; v != S; v = parent[v]) {
      const std::size_t u = parent[v];
      if (u == S) push = std::min(push, resSupply[v]);
      else if (v == T) push = std::min(push, resDemand[u - m]);
      else if (u >= m && v < m) push = std::min(push, flow[v * n + (u - m)]);
    }
    for (std::size_t v = T; v != S; v = parent[v]) {
      const std::size_t u = parent[v];
      if (u == S) resSupply[v] -= push;
      else if (v == T) resDemand[u - m] -= push;
      else if (u < m) flow[u * n + (v - m)] += push;
      else flow[v * n + (u - m)] -= push;
    }
  }

  TransportPlan plan;
  plan.rows = m;
  plan.cols = n;
  for (double& f : flow)
    if (f < kMassTol) f = 0.0;
  plan.mass = std::move(flow);
  plan.cost = 0.0;
  for (std::size_t k = 0; k < m * n; ++k) plan.cost += plan.mass[k] * cost[k];
  return plan;
}

TransportResult wasserstein1(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  require(mu.metric() == nu.metric(), "wasserstein1 needs both measures on the same ground metric");
  require(mu.dim() == nu.dim(), "wasserstein1 needs atoms of one dimension");
  const std::size_t m = mu.size(), n = nu.size();
  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = distance(mu.atom(i), nu.atom(j), mu.metric());

  TransportResult result;
  if (m == 1 || n == 1) {
    TransportPlan& plan = result.plan;
    plan.rows = m;
    plan.cols = n;
    plan.mass.resize(m * n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) plan.mass[i * n + j] = m == 1 ? nu.weight(j) : mu.weight(i);
    for (std::size_t k = 0; k < m * n; ++k) plan.cost += plan.mass[k] * cost[k];
  } else {
    result.plan = solveTransport(mu.weights(), nu.weights(), cost);
  }
  result.distance = result.plan.cost;
  return result;
}

}  // namespace lyap
