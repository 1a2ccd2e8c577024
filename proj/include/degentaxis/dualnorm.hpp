#pragma once

#include <span>
#include <vector>

#include "degentaxis/grid.hpp"

namespace degentaxis {

/// Result of the discrete (W^{1,inf})* norm
///   max { sum_i f_i psi_i |cell| : |psi_i| <= 1, |psi_i - psi_j| <= h_a for
///         neighbors i, j along axis a }.
struct DualNormResult {
  double value = 0.0;
  /// An optimal test function; only `value` is unique.
  Field maximizer;
  /// Cost of the matching primal transport plan minus `value` (>= 0 up to rounding).
  double duality_gap = 0.0;
  int phases = 0;
};

/// Solves the linear program through its min-cost-flow dual: each cell is
/// a node, neighbors are joined by arcs of cost h_a and every cell is
/// joined to a ground node by an arc of cost 1 (the box constraint). Mass
/// f_i |cell| is routed by a primal-dual scheme (multi-source Dijkstra on
/// reduced costs, then blocking flow on the zero-cost arcs). The node
/// potentials give the maximizer, the flow cost certifies the gap.
/// Throws InvalidArgument for non-finite f.
DualNormResult dual_norm(const Field& f);

/// Exhaustive search over psi in the lattice {-1, -1 + 2/(levels-1), ..., 1}
/// per cell subject to the same constraints. Grids above 6 cells are
/// rejected. Independent of dual_norm; used to validate it.
double lattice_oracle(const Field& f, int levels);

/// sum_k || u_{k+1} - u_k ||_* over consecutive snapshots.
/// Throws InvalidArgument on fewer than two snapshots or mismatched grids.
double trajectory_variation(std::span<const Field> snapshots);

}  // namespace degentaxis
