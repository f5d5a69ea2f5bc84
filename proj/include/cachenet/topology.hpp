#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stack>
#include <stdexcept>
#include <string>
#include <vector>

#include "cachenet/workload.hpp"

namespace cachenet {

struct Graph {
  int node_count{0};
  std::vector<std::vector<int>> adj;          // sorted neighbor lists
  std::vector<std::vector<double>> delay;     // delay[u][i] matches adj[u][i]

  void add_edge(int u, int v, double d) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    delay[static_cast<std::size_t>(u)].push_back(d);
    adj[static_cast<std::size_t>(v)].push_back(u);
    delay[static_cast<std::size_t>(v)].push_back(d);
  }

  std::size_t edge_count() const {
    std::size_t deg = 0;
    for (const auto& a : adj) deg += a.size();
    return deg / 2;
  }

  double edge_delay(int u, int v) const {
    const auto& a = adj[static_cast<std::size_t>(u)];
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] == v) return delay[static_cast<std::size_t>(u)][i];
    throw std::domain_error("no such edge");
  }
};

struct Publisher {
  int id;              // 1-based
  int attachment;      // cache node the publisher hangs off
  ContentId first;     // owned rank range [first, last], inclusive
  ContentId last;
};

struct Topology {
  Graph graph;
  std::vector<Publisher> publishers;
  std::vector<std::vector<int>> next_hop;  // [publisher index][node] -> next node, -1 at attachment
  std::vector<std::vector<int>> hops;      // [publisher index][node] -> hop count to attachment
  double publisher_delay{0.0};             // delay of the publisher access link
  std::vector<ContentId> rank_of_slot;     // optional random rank->publisher permutation

  std::int64_t catalog_size() const {
    std::int64_t total = 0;
    for (const auto& p : publishers) total += p.last - p.first + 1;
    return total;
  }

  // Publisher index (0-based) owning a content rank.
  int publisher_of(ContentId rank) const {
    ContentId slot = rank;
    if (!rank_of_slot.empty())
      slot = rank_of_slot[static_cast<std::size_t>(rank - 1)];
    for (std::size_t i = 0; i < publishers.size(); ++i)
      if (slot >= publishers[i].first && slot <= publishers[i].last)
        return static_cast<int>(i);
    throw std::domain_error("content rank owned by no publisher");
  }
};

// Barabasi-Albert preferential attachment over a complete seed clique of
// attach+1 nodes; each later node draws `attach` distinct targets weighted
// by degree.
inline Graph generate_ba(int m, int attach, std::uint64_t seed,
                         double hop_delay = 0.01) {
  if (attach < 1 || m <= attach)
    throw std::invalid_argument("need m > attach >= 1");
  Graph g;
  g.node_count = m;
  g.adj.resize(static_cast<std::size_t>(m));
  g.delay.resize(static_cast<std::size_t>(m));
  std::mt19937_64 gen(seed);
  int clique = attach + 1;
  std::vector<int> endpoints;  // one entry per incident edge end
  for (int u = 0; u < clique; ++u)
    for (int v = u + 1; v < clique; ++v) {
      g.add_edge(u, v, hop_delay);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  for (int u = clique; u < m; ++u) {
    std::vector<int> targets;
    while (static_cast<int>(targets.size()) < attach) {
      int t = endpoints[static_cast<std::size_t>(
          uniform01(gen) * static_cast<double>(endpoints.size()))];
      if (std::find(targets.begin(), targets.end(), t) == targets.end())
        targets.push_back(t);
    }
    for (int t : targets) {
      g.add_edge(u, t, hop_delay);
      endpoints.push_back(u);
      endpoints.push_back(t);
    }
  }
  for (auto& a : g.adj) {
    // keep neighbor lists sorted; rebuild delays to match
    std::vector<std::pair<int, double>> z;
    for (std::size_t i = 0; i < a.size(); ++i)
      z.emplace_back(a[i], hop_delay);
    std::sort(z.begin(), z.end());
    a.clear();
    for (auto& [v, d] : z) a.push_back(v);
  }
  for (std::size_t u = 0; u < g.delay.size(); ++u)
    g.delay[u].assign(g.adj[u].size(), hop_delay);
  return g;
}

inline bool is_connected(const Graph& g) {
  if (g.node_count == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(g.node_count), 0);
  std::deque<int> q{0};
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int v : g.adj[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        q.push_back(v);
      }
  }
  return count == g.node_count;
}

// Exact shortest-path betweenness (Brandes accumulation), unordered pairs.
inline std::vector<double> betweenness(const Graph& g) {
  if (!is_connected(g)) throw std::invalid_argument("graph must be connected");
  std::size_t n = static_cast<std::size_t>(g.node_count);
  std::vector<double> score(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::vector<int>> pred(n);
    std::vector<double> sigma(n, 0.0);
    std::vector<int> dist(n, -1);
    std::vector<int> order;
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<std::size_t> q{s};
    while (!q.empty()) {
      std::size_t v = q.front();
      q.pop_front();
      order.push_back(static_cast<int>(v));
      for (int wi : g.adj[v]) {
        std::size_t w = static_cast<std::size_t>(wi);
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(static_cast<int>(v));
        }
      }
    }
    std::vector<double> delta(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      std::size_t w = static_cast<std::size_t>(*it);
      for (int vi : pred[w]) {
        std::size_t v = static_cast<std::size_t>(vi);
        delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) score[w] += delta[w];
    }
  }
  for (double& x : score) x /= 2.0;  // undirected: each pair counted twice
  return score;
}

// Publishers attach to the p highest-betweenness nodes (ties by lowest id);
// ranks partition contiguously, publisher k owning {(k-1)*items+1 .. k*items}.
inline std::vector<Publisher> place_publishers(const Graph& g,
                                               const std::vector<double>& scores,
                                               int p,
                                               std::int64_t items_per_publisher) {
  if (p < 1 || p > g.node_count)
    throw std::invalid_argument("publisher count out of range");
  std::vector<int> order(static_cast<std::size_t>(g.node_count));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double sa = scores[static_cast<std::size_t>(a)];
    double sb = scores[static_cast<std::size_t>(b)];
    return sa > sb || (sa == sb && a < b);
  });
  std::vector<Publisher> pubs;
  for (int k = 0; k < p; ++k) {
    ContentId first = static_cast<ContentId>(k) * items_per_publisher + 1;
    pubs.push_back({k + 1, order[static_cast<std::size_t>(k)], first,
                    first + items_per_publisher - 1});
  }
  return pubs;
}

// BFS next-hop tables toward each publisher attachment. Parent ties resolve
// to the lowest node id.
inline void build_routing(Topology& topo) {
  const Graph& g = topo.graph;
  std::size_t n = static_cast<std::size_t>(g.node_count);
  topo.next_hop.assign(topo.publishers.size(), std::vector<int>(n, -1));
  topo.hops.assign(topo.publishers.size(), std::vector<int>(n, -1));
  for (std::size_t pi = 0; pi < topo.publishers.size(); ++pi) {
    int root = topo.publishers[pi].attachment;
    auto& dist = topo.hops[pi];
    dist[static_cast<std::size_t>(root)] = 0;
    std::deque<int> q{root};
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : g.adj[static_cast<std::size_t>(u)])
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          q.push_back(v);
        }
    }
    for (std::size_t u = 0; u < n; ++u) {
      if (static_cast<int>(u) == root) continue;
      int best = -1;
      for (int v : g.adj[u])
        if (dist[static_cast<std::size_t>(v)] == dist[u] - 1) {
          best = v;  // adjacency lists are sorted, first match = lowest id
          break;
        }
      if (best < 0) throw std::invalid_argument("graph must be connected");
      topo.next_hop[pi][u] = best;
    }
  }
}

struct TopologyParams {
  int nodes{30};
  int attach{2};
  int publishers{5};
  std::int64_t items_per_publisher{1000};
  std::uint64_t seed{1};
  double hop_delay{0.01};
  double publisher_delay{0.01};
  bool random_content_map{false};
};

inline Topology build_topology(const TopologyParams& params) {
  Topology topo;
  if (params.nodes == 1) {
    // trivial single-cache network; the publisher hangs off the only node
    topo.graph.node_count = 1;
    topo.graph.adj.resize(1);
    topo.graph.delay.resize(1);
    topo.publishers = {{1, 0, 1, params.items_per_publisher}};
    if (params.publishers != 1)
      throw std::invalid_argument("single-node topology supports one publisher");
  } else {
    topo.graph = generate_ba(params.nodes, params.attach, params.seed, params.hop_delay);
    auto scores = betweenness(topo.graph);
    topo.publishers = place_publishers(topo.graph, scores, params.publishers,
                                       params.items_per_publisher);
  }
  topo.publisher_delay = params.publisher_delay;
  build_routing(topo);
  if (params.random_content_map) {
    std::int64_t c = topo.catalog_size();
    topo.rank_of_slot.resize(static_cast<std::size_t>(c));
    std::iota(topo.rank_of_slot.begin(), topo.rank_of_slot.end(), ContentId{1});
    std::mt19937_64 gen(params.seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t i = topo.rank_of_slot.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform01(gen) * static_cast<double>(i));
      if (j >= i) j = i - 1;
      std::swap(topo.rank_of_slot[i - 1], topo.rank_of_slot[j]);
    }
  }
  return topo;
}

// One "u v delay" triple per line.
inline void save_edge_list(const Graph& g, std::ostream& out) {
  for (int u = 0; u < g.node_count; ++u) {
    const auto& a = g.adj[static_cast<std::size_t>(u)];
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > u)
        out << u << ' ' << a[i] << ' ' << g.delay[static_cast<std::size_t>(u)][i]
            << '\n';
  }
}

inline Graph load_edge_list(std::istream& in) {
  std::vector<std::tuple<int, int, double>> edges;
  int max_node = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int u, v;
    double d;
    if (!(ss >> u >> v >> d)) throw std::runtime_error("bad edge-list line: " + line);
    edges.emplace_back(u, v, d);
    max_node = std::max({max_node, u, v});
  }
  Graph g;
  g.node_count = max_node + 1;
  g.adj.resize(static_cast<std::size_t>(g.node_count));
  g.delay.resize(static_cast<std::size_t>(g.node_count));
  for (auto& [u, v, d] : edges) g.add_edge(u, v, d);
  for (std::size_t u = 0; u < g.adj.size(); ++u) {
    std::vector<std::pair<int, double>> z;
    for (std::size_t i = 0; i < g.adj[u].size(); ++i)
      z.emplace_back(g.adj[u][i], g.delay[u][i]);
    std::sort(z.begin(), z.end());
    for (std::size_t i = 0; i < z.size(); ++i) {
      g.adj[u][i] = z[i].first;
      g.delay[u][i] = z[i].second;
    }
  }
  return g;
}

}  // namespace cachenet
