// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_GRAPH_HPP
#define ALGDD_GRAPH_HPP

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "sparse.hpp"

namespace algdd {

/// Undirected graph in compressed adjacency form.  Neighbor lists are sorted,
/// self loops are excluded.
class AdjacencyGraph {
 public:
  AdjacencyGraph() = default;

  AdjacencyGraph(index_t n, std::vector<std::pair<index_t, index_t>> edges) : offsets_(n + 1, 0) {
    for (auto& [u, v] : edges) {
      if (u < 0 || u >= n || v < 0 || v >= n)
        throw std::invalid_argument("AdjacencyGraph: edge endpoint out of range");
      if (u > v) std::swap(u, v);
    }
    std::vector<std::pair<index_t, index_t>> dir;
    dir.reserve(2 * edges.size());
    for (auto [u, v] : edges) {
      if (u == v) continue;
      dir.emplace_back(u, v);
      dir.emplace_back(v, u);
    }
    std::sort(dir.begin(), dir.end());
    dir.erase(std::unique(dir.begin(), dir.end()), dir.end());
    adjacency_.reserve(dir.size());
    for (auto [u, v] : dir) {
      ++offsets_[u + 1];
      adjacency_.push_back(v);
    }
    for (index_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  }

  index_t size() const { return static_cast<index_t>(offsets_.size()) - 1; }

  index_t degree(index_t v) const { return offsets_[v + 1] - offsets_[v]; }

  std::span<const index_t> neighbors(index_t v) const {
    return {adjacency_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
  }

 private:
  std::vector<index_t> offsets_{0};
  std::vector<index_t> adjacency_;
};

/// Connectivity graph of a square matrix: vertices are rows, with an edge
/// wherever either a(i, j) or a(j, i) is stored.
template <scalar K>
AdjacencyGraph build_graph(const SparseMatrix<K>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("build_graph: matrix not square");
  std::vector<std::pair<index_t, index_t>> edges;
  edges.reserve(a.nnz());
  for (index_t r = 0; r < a.rows(); ++r)
    for (index_t c : a.row_cols(r))
      if (c != r) edges.emplace_back(r, c);
  return AdjacencyGraph(a.rows(), std::move(edges));
}

}  // namespace algdd

#endif  // ALGDD_GRAPH_HPP
