// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_PARTITION_HPP
#define ALGDD_PARTITION_HPP

#include <algorithm>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "graph.hpp"

namespace algdd {

/// Weighting applied on the overlapping subdomains.  boolean_interior keeps a
/// vertex in exactly one subdomain (weight 1 on interior rows, 0 on the
/// overlap ring); multiplicity_scaled spreads each vertex uniformly over
/// every subdomain whose overlapping set contains it.
enum class PouMode { boolean_interior, multiplicity_scaled };

/// Index structure of an overlapping decomposition.  For each subdomain i the
/// overlapping set is stored as [interior, boundary] in that order; boundary
/// vertices are exactly those at graph distance one from the interior.
struct OverlapLayout {
  index_t n = 0;
  std::vector<std::vector<index_t>> interior;
  std::vector<std::vector<index_t>> boundary;
  std::vector<std::vector<index_t>> overlapping;
  std::vector<std::vector<double>> weights;  // partition-of-unity diagonal per subdomain
  std::vector<index_t> multiplicity;         // overlapping sets containing each vertex

  index_t parts() const { return static_cast<index_t>(interior.size()); }
  index_t size(index_t i) const { return static_cast<index_t>(overlapping[i].size()); }
  index_t interior_size(index_t i) const { return static_cast<index_t>(interior[i].size()); }
};

namespace detail {

class BfsOrderer {
 public:
  BfsOrderer(const AdjacencyGraph& g, Rng& rng)
      : g_(g), rng_(rng), in_set_(g.size(), 0), visited_(g.size(), 0) {}

  /// Concatenated breadth-first orders of all components of the induced
  /// subgraph, each started from a pseudo-peripheral vertex.
  std::vector<index_t> order(std::span<const index_t> subset) {
    for (index_t v : subset) {
      in_set_[v] = 1;
      visited_[v] = 0;
    }
    std::vector<index_t> out;
    out.reserve(subset.size());
    std::vector<index_t> pending(subset.begin(), subset.end());
    while (!pending.empty()) {
      index_t root = pending[rng_.pick(static_cast<index_t>(pending.size()))];
      root = pseudo_peripheral(root);
      bfs(root, &out);
      std::erase_if(pending, [&](index_t v) { return visited_[v] != 0; });
    }
    for (index_t v : subset) in_set_[v] = 0;
    return out;
  }

 private:
  /// One BFS sweep; appends the visit order and returns the eccentricity and
  /// the minimum-degree vertex of the last level (smallest index on ties).
  std::pair<index_t, index_t> bfs(index_t root, std::vector<index_t>* out) {
    std::vector<index_t> frontier{root};
    visited_[root] = 1;
    index_t depth = 0;
    index_t last_pick = root;
    std::vector<index_t> scratch;
    while (!frontier.empty()) {
      if (out) out->insert(out->end(), frontier.begin(), frontier.end());
      index_t best_deg = -1;
      for (index_t v : frontier)
        if (best_deg < 0 || degree_in_set(v) < best_deg) {
          best_deg = degree_in_set(v);
          last_pick = v;
        }
      scratch.clear();
      for (index_t v : frontier)
        for (index_t w : g_.neighbors(v))
          if (in_set_[w] && !visited_[w]) {
            visited_[w] = 1;
            scratch.push_back(w);
          }
      std::sort(scratch.begin(), scratch.end());
      frontier = scratch;
      if (!frontier.empty()) ++depth;
    }
    return {depth, last_pick};
  }

  /// Clears the visited marks of the component reached from root.
  void reset_component(index_t root) {
    visited_[root] = 0;
    std::vector<index_t> stack{root};
    while (!stack.empty()) {
      index_t v = stack.back();
      stack.pop_back();
      for (index_t w : g_.neighbors(v))
        if (in_set_[w] && visited_[w]) {
          visited_[w] = 0;
          stack.push_back(w);
        }
    }
  }

  index_t degree_in_set(index_t v) const {
    index_t d = 0;
    for (index_t w : g_.neighbors(v))
      if (in_set_[w]) ++d;
    return d;
  }

  index_t pseudo_peripheral(index_t root) {
    index_t ecc = -1;
    for (;;) {
      auto [depth, far] = bfs(root, nullptr);
      reset_component(root);
      if (depth <= ecc) return root;
      ecc = depth;
      root = far;
    }
  }

  const AdjacencyGraph& g_;
  Rng& rng_;
  std::vector<char> in_set_;
  std::vector<char> visited_;
};

}  // namespace detail

/// Splits the vertex set into n_parts non-empty pieces by recursive bisection
/// along breadth-first orders.  Deterministic for fixed (g, n_parts, seed);
/// disconnected graphs are handled by ordering each component separately.
inline std::vector<std::vector<index_t>> partition_graph(const AdjacencyGraph& g, index_t n_parts,
                                                         std::uint64_t seed) {
  const index_t n = g.size();
  if (n_parts < 1) throw std::invalid_argument("partition_graph: need at least one part");
  if (n_parts > n)
    throw std::invalid_argument(
        format_msg("partition_graph: ", n_parts, " parts requested for ", n, " vertices"));
  Rng rng(seed);
  detail::BfsOrderer orderer(g, rng);
  std::vector<std::vector<index_t>> parts;
  parts.reserve(n_parts);

  struct Job {
    std::vector<index_t> vertices;
    index_t k;
  };
  std::vector<Job> stack;
  {
    std::vector<index_t> all(n);
    for (index_t i = 0; i < n; ++i) all[i] = i;
    stack.push_back({std::move(all), n_parts});
  }
  while (!stack.empty()) {
    Job job = std::move(stack.back());
    stack.pop_back();
    if (job.k == 1) {
      std::sort(job.vertices.begin(), job.vertices.end());
      parts.push_back(std::move(job.vertices));
      continue;
    }
    const index_t k1 = (job.k + 1) / 2, k2 = job.k - k1;
    const auto m = static_cast<index_t>(job.vertices.size());
    auto target = static_cast<index_t>(
        (static_cast<long long>(m) * k1 + job.k / 2) / job.k);
    target = std::clamp(target, k1, static_cast<index_t>(m - k2));
    std::vector<index_t> order = orderer.order(job.vertices);
    std::vector<index_t> left(order.begin(), order.begin() + target);
    std::vector<index_t> right(order.begin() + target, order.end());
    // Depth-first with the right half on top keeps emission order stable.
    stack.push_back({std::move(right), k2});
    stack.push_back({std::move(left), k1});
  }
  // Jobs were pushed left-first, so parts come out in bisection order; sort
  // by smallest vertex for a reproducible labeling.
  std::sort(parts.begin(), parts.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return parts;
}

/// Reads an owner id per vertex (whitespace separated, 0-based).  The file
/// must list exactly n owners and every part in [0, max_owner] must be
/// non-empty.
inline std::vector<std::vector<index_t>> import_partition(const std::string& path, index_t n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open partition file '" + path + "'");
  std::vector<long long> owner;
  owner.reserve(n);
  long long v;
  while (in >> v) owner.push_back(v);
  if (!in.eof()) throw std::runtime_error(path + ": non-numeric token in partition file");
  if (static_cast<index_t>(owner.size()) != n)
    throw std::runtime_error(format_msg(path, ": expected ", n, " owner entries, found ",
                                        owner.size()));
  long long n_parts = 0;
  for (long long o : owner) {
    if (o < 0) throw std::runtime_error(path + ": negative owner id");
    n_parts = std::max(n_parts, o + 1);
  }
  std::vector<std::vector<index_t>> parts(n_parts);
  for (index_t i = 0; i < n; ++i) parts[owner[i]].push_back(i);
  for (std::size_t p = 0; p < parts.size(); ++p)
    if (parts[p].empty())
      throw std::runtime_error(format_msg(path, ": part ", p, " is empty"));
  return parts;
}

/// Extends a disjoint partition by one layer of graph neighbors and attaches
/// the partition-of-unity weights.
inline OverlapLayout extend_overlap(const AdjacencyGraph& g,
                                    std::vector<std::vector<index_t>> parts,
                                    PouMode mode = PouMode::boolean_interior) {
  const index_t n = g.size();
  const auto n_parts = static_cast<index_t>(parts.size());
  std::vector<index_t> owner(n, -1);
  for (index_t p = 0; p < n_parts; ++p) {
    if (parts[p].empty()) throw std::invalid_argument(format_msg("extend_overlap: part ", p, " is empty"));
    for (index_t v : parts[p]) {
      if (v < 0 || v >= n)
        throw std::invalid_argument("extend_overlap: vertex out of range");
      if (owner[v] != -1)
        throw std::invalid_argument(format_msg("extend_overlap: vertex ", v, " owned twice"));
      owner[v] = p;
    }
  }
  for (index_t v = 0; v < n; ++v)
    if (owner[v] == -1)
      throw std::invalid_argument(format_msg("extend_overlap: vertex ", v, " unassigned"));

  OverlapLayout layout;
  layout.n = n;
  layout.interior.resize(n_parts);
  layout.boundary.resize(n_parts);
  layout.overlapping.resize(n_parts);
  layout.weights.resize(n_parts);
  layout.multiplicity.assign(n, 0);
  std::vector<char> mark(n, 0);
  for (index_t p = 0; p < n_parts; ++p) {
    auto& interior = layout.interior[p];
    interior = std::move(parts[p]);
    std::sort(interior.begin(), interior.end());
    auto& boundary = layout.boundary[p];
    for (index_t v : interior) mark[v] = 1;
    for (index_t v : interior)
      for (index_t w : g.neighbors(v))
        if (!mark[w]) {
          mark[w] = 1;
          boundary.push_back(w);
        }
    std::sort(boundary.begin(), boundary.end());
    for (index_t v : interior) mark[v] = 0;
    for (index_t v : boundary) mark[v] = 0;
    auto& all = layout.overlapping[p];
    all.reserve(interior.size() + boundary.size());
    all.insert(all.end(), interior.begin(), interior.end());
    all.insert(all.end(), boundary.begin(), boundary.end());
    for (index_t v : all) ++layout.multiplicity[v];
  }
  for (index_t p = 0; p < n_parts; ++p) {
    auto& w = layout.weights[p];
    const auto& all = layout.overlapping[p];
    w.assign(all.size(), 0.0);
    if (mode == PouMode::boolean_interior) {
      for (std::size_t k = 0; k < layout.interior[p].size(); ++k) w[k] = 1.0;
    } else {
      for (std::size_t k = 0; k < all.size(); ++k) w[k] = 1.0 / layout.multiplicity[all[k]];
    }
  }
  return layout;
}

/// local = v restricted to subdomain i.
template <scalar K>
void restrict_vec(const OverlapLayout& layout, index_t i, std::span<const K> v,
                  std::span<K> local) {
  const auto& idx = layout.overlapping[i];
  for (std::size_t k = 0; k < idx.size(); ++k) local[k] = v[idx[k]];
}

/// out += R_i^T local.
template <scalar K>
void prolong_add(const OverlapLayout& layout, index_t i, std::span<const K> local,
                 std::span<K> out) {
  const auto& idx = layout.overlapping[i];
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] += local[k];
}

/// out += R_i^T D_i local.
template <scalar K>
void prolong_add_weighted(const OverlapLayout& layout, index_t i, std::span<const K> local,
                          std::span<K> out) {
  const auto& idx = layout.overlapping[i];
  const auto& w = layout.weights[i];
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] += w[k] * local[k];
}

/// Greedy color count of the subdomain interaction graph (k_c) and the
/// largest number of overlapping sets sharing one vertex (k_m).  Subdomains
/// interact when their overlapping sets share a vertex or are joined by an
/// edge of g.
inline std::pair<index_t, index_t> coloring_and_multiplicity(const OverlapLayout& layout,
                                                             const AdjacencyGraph& g) {
  const index_t n_parts = layout.parts();
  index_t k_m = 0;
  for (index_t v = 0; v < layout.n; ++v) k_m = std::max(k_m, layout.multiplicity[v]);

  std::vector<std::vector<index_t>> holders(layout.n);
  for (index_t p = 0; p < n_parts; ++p)
    for (index_t v : layout.overlapping[p]) holders[v].push_back(p);
  std::vector<std::vector<char>> adj(n_parts, std::vector<char>(n_parts, 0));
  auto connect = [&](const std::vector<index_t>& a, const std::vector<index_t>& b) {
    for (index_t p : a)
      for (index_t q : b)
        if (p != q) adj[p][q] = adj[q][p] = 1;
  };
  for (index_t v = 0; v < layout.n; ++v) {
    connect(holders[v], holders[v]);
    for (index_t w : g.neighbors(v))
      if (w > v) connect(holders[v], holders[w]);
  }
  std::vector<index_t> color(n_parts, -1);
  index_t k_c = 0;
  for (index_t p = 0; p < n_parts; ++p) {
    std::vector<char> used(n_parts, 0);
    for (index_t q = 0; q < n_parts; ++q)
      if (adj[p][q] && color[q] >= 0) used[color[q]] = 1;
    index_t c = 0;
    while (used[c]) ++c;
    color[p] = c;
    k_c = std::max(k_c, c + 1);
  }
  return {k_c, k_m};
}

}  // namespace algdd

#endif  // ALGDD_PARTITION_HPP
