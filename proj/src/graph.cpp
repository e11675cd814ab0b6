#include "erlocal/graph.hpp"

#include <numeric>

#include "erlocal/errors.hpp"

namespace erlocal {

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;  // the root stays the smallest vertex
  }
};

void check_edge(const Edge& e, int n) {
  if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n)
    throw ValidationError("edge endpoint out of range");
}

}  // namespace

std::vector<std::vector<int>> connected_components(int n, const std::vector<Edge>& edges) {
  DisjointSets sets(n);
  for (const Edge& e : edges) {
    check_edge(e, n);
    sets.unite(e.first, e.second);
  }
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> out;
  for (int v = 0; v < n; ++v) {
    const int root = sets.find(v);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[root]].push_back(v);
  }
  return out;
}

std::vector<int> vertex_degrees(int n, const std::vector<Edge>& edges) {
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (const Edge& e : edges) {
    check_edge(e, n);
    ++deg[e.first];
    if (e.first != e.second) ++deg[e.second];
  }
  return deg;
}

Eigen::MatrixXd induced_adjacency(const std::vector<int>& vertices, const std::vector<Edge>& edges,
                                  int n) {
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < vertices.size(); ++k) local[vertices[k]] = static_cast<int>(k);
  const auto m = static_cast<Eigen::Index>(vertices.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (const Edge& e : edges) {
    check_edge(e, n);
    const int i = local[e.first], j = local[e.second];
    if (i < 0 || j < 0) continue;
    a(i, j) = a(j, i) = 1.0;
  }
  return a;
}

int leaf_removal_zero_modes(int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const Edge& e : edges) {
    check_edge(e, n);
    if (e.first == e.second) throw ValidationError("leaf removal needs a simple graph");
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  std::vector<int> deg(static_cast<std::size_t>(n));
  std::vector<char> removed(static_cast<std::size_t>(n), 0);
  std::vector<int> leaves;
  int zero_modes = 0;
  for (int v = 0; v < n; ++v) {
    deg[v] = static_cast<int>(adj[v].size());
    if (deg[v] == 0) {
      removed[v] = 1;
      ++zero_modes;
    } else if (deg[v] == 1) {
      leaves.push_back(v);
    }
  }
  auto drop = [&](int v) {
    removed[v] = 1;
    for (int w : adj[v]) {
      if (removed[w]) continue;
      if (--deg[w] == 0) {
        removed[w] = 1;
        ++zero_modes;
      } else if (deg[w] == 1) {
        leaves.push_back(w);
      }
    }
  };
  while (!leaves.empty()) {
    const int v = leaves.back();
    leaves.pop_back();
    if (removed[v] || deg[v] != 1) continue;
    int u = -1;
    for (int w : adj[v])
      if (!removed[w]) u = w;
    removed[v] = 1;  // v's only live neighbour is u, which goes next
    drop(u);
  }
  return zero_modes;
}

}  // namespace erlocal
