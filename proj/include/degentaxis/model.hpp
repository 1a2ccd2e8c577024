#pragma once

#include <span>
#include <string>
#include <vector>

#include "degentaxis/grid.hpp"

namespace degentaxis {

enum class ClipPolicy { Reject, ClipAndAccount };

/// Face average of the mobility u*v.
enum class MobilityAveraging { Arithmetic, Harmonic };

/// Constants of the regularized system
///   u_t = div(u v grad u) - chi div(u^alpha v grad v) + ell u v,
///   v_t = lap v - u v,
/// plus the scheme knobs.
struct Params {
  double chi = 1.0;
  double ell = 1.0;
  double alpha = 1.55;
  /// Shift added to u0 when building initial data; nothing else sees it.
  double eps = 0.0;
  double safety = 0.5;
  double dt_max = 1e-2;
  ClipPolicy clip_policy = ClipPolicy::ClipAndAccount;
  MobilityAveraging mobility = MobilityAveraging::Arithmetic;
  /// Relative residual target of the v solve.
  double solver_tol = 1e-12;
  int solver_max_iter = 2000;

  /// alpha in the open window (3/2, 19/12) where the existence and
  /// stabilization theory applies.
  bool theory_window() const;
  /// Throws InvalidArgument listing every violated constraint.
  void validate() const;
};

bool in_theory_window(double alpha);

/// Snapshot of the coupled system.
struct State {
  Field u;
  Field v;
  double t = 0.0;
};

/// Checks shapes, finiteness, u >= 0 and v >= 0.
void validate_state(const State& s);

/// Exponent machinery of the L^{p0} bootstrap:
/// delta = min{(alpha - 4/3)/2, 19/12 - alpha, 1/2}, p0 = 3/2 + delta/2.
struct RegimeExponents {
  double delta = 0.0;
  double p0 = 0.0;
};

/// Throws RegimeError for alpha outside (3/2, 19/12).
RegimeExponents regime_exponents(double alpha);

/// Face value of the mobility from the two cell values of u*v.
double face_mobility(double a, double b, MobilityAveraging avg);

/// m_f (u_R - u_L) / h with m_f the face average of u*v.
FaceField diffusive_flux(const State& s, const Params& p);

/// u^alpha per cell (0 where u = 0), the upwinded factor of the taxis flux.
std::vector<double> taxis_weights(const Field& u, double alpha);

/// chi (u_up)^alpha v_f (v_R - v_L) / h, v_f the arithmetic face mean and
/// u_up taken from the cell the drift leaves. Positive values point along +axis.
FaceField taxis_flux(const State& s, const Params& p);

/// div(diffusive - taxis): the conservative transport part of rhs_u.
Field transport_u(const State& s, const Params& p);

/// Full right-hand side transport_u + ell u v.
Field rhs_u(const State& s, const Params& p);

/// Backward-Euler system for the nutrient:
///   (I - dt lap_h + dt diag(u)) v_new = v.
/// Matrix-free; the Neumann Laplacian uses the mirrored-ghost closure, so
/// every row sums to 1 + dt u_i and off-diagonals are -dt / h_a^2.
class VImplicitSystem {
 public:
  VImplicitSystem(const Grid& grid, double dt, std::vector<double> reaction, std::vector<double> rhs);

  const Grid& grid() const { return grid_; }
  double dt() const { return dt_; }
  const std::vector<double>& rhs() const { return rhs_; }
  const std::vector<double>& reaction() const { return reaction_; }

  /// Coupling -dt/h_a^2 between neighbors along axis a.
  double off_diagonal(int axis) const { return -dt_ / (grid_.spacing[axis] * grid_.spacing[axis]); }
  double diagonal(std::size_t i) const;
  std::vector<double> diagonal() const;
  /// y = A x.
  void apply(std::span<const double> x, std::span<double> y) const;
  /// Dense copy for inspection; only sensible on small grids.
  std::vector<std::vector<double>> to_dense() const;

 private:
  Grid grid_;
  double dt_;
  std::vector<double> reaction_;
  std::vector<double> rhs_;
};

/// Throws InvalidArgument when dt <= 0 or u has negative entries.
VImplicitSystem v_implicit_operator(const State& s, double dt);

std::string to_string(ClipPolicy p);
std::string to_string(MobilityAveraging m);

}  // namespace degentaxis
