#pragma once

#include <vector>

#include "erlocal/ensemble.hpp"

namespace erlocal {

/// Connected components of the graph on vertices 0..n-1; each component is
/// sorted and components are ordered by their smallest vertex. Loops are
/// ignored.
std::vector<std::vector<int>> connected_components(int n, const std::vector<Edge>& edges);

/// Vertex degrees; a loop adds one to its vertex.
std::vector<int> vertex_degrees(int n, const std::vector<Edge>& edges);

/// Adjacency matrix of the subgraph induced by `vertices` (in that order).
Eigen::MatrixXd induced_adjacency(const std::vector<int>& vertices, const std::vector<Edge>& edges,
                                  int n);

/// Lower bound on the multiplicity of the eigenvalue 0 of the adjacency
/// matrix of a simple graph. Deleting a degree-one vertex together with its
/// neighbour leaves the nullity unchanged; every vertex left isolated by
/// such deletions contributes one zero mode.
int leaf_removal_zero_modes(int n, const std::vector<Edge>& edges);

}  // namespace erlocal
