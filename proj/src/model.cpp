#include "degentaxis/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "degentaxis/error.hpp"
#include "degentaxis/parallel.hpp"

namespace degentaxis {

bool in_theory_window(double alpha) { return alpha > 1.5 && alpha < 19.0 / 12.0; }

bool Params::theory_window() const { return in_theory_window(alpha); }

void Params::validate() const {
  std::ostringstream errs;
  if (!(chi > 0.0)) errs << "chi must be > 0; ";
  if (!(ell > 0.0)) errs << "ell must be > 0; ";
  if (!(alpha > 0.0)) errs << "alpha must be > 0; ";
  if (!(eps >= 0.0 && eps < 1.0)) errs << "eps must lie in [0, 1); ";
  if (!(safety > 0.0 && safety <= 1.0)) errs << "safety must lie in (0, 1]; ";
  if (!(dt_max > 0.0)) errs << "dt_max must be > 0; ";
  if (!(solver_tol > 0.0)) errs << "solver_tol must be > 0; ";
  if (solver_max_iter < 1) errs << "solver_max_iter must be >= 1; ";
  const auto msg = errs.str();
  if (!msg.empty()) throw InvalidArgument("invalid parameters: " + msg.substr(0, msg.size() - 2));
}

void validate_state(const State& s) {
  if (!(s.u.grid == s.v.grid)) throw InvalidArgument("u and v live on different grids");
  if (s.u.size() != s.u.grid.size() || s.v.size() != s.v.grid.size()) {
    throw InvalidArgument("field length does not match grid");
  }
  require_finite(s.u, "u");
  require_finite(s.v, "v");
  for (double x : s.u.values) {
    if (x < 0.0) throw InvalidArgument("u has negative entries");
  }
  for (double x : s.v.values) {
    if (x < 0.0) throw InvalidArgument("v has negative entries");
  }
}

RegimeExponents regime_exponents(double alpha) {
  if (!in_theory_window(alpha)) {
    throw RegimeError("alpha = " + std::to_string(alpha) + " lies outside (3/2, 19/12)");
  }
  RegimeExponents r;
  r.delta = std::min({0.5 * (alpha - 4.0 / 3.0), 19.0 / 12.0 - alpha, 0.5});
  r.p0 = 1.5 + 0.5 * r.delta;
  return r;
}

double face_mobility(double a, double b, MobilityAveraging avg) {
  if (avg == MobilityAveraging::Arithmetic) return 0.5 * (a + b);
  return (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
}

namespace {

void require_finite_state(const State& s) {
  if (!(s.u.grid == s.v.grid)) throw InvalidArgument("u and v live on different grids");
  require_finite(s.u, "u");
  require_finite(s.v, "v");
}

}  // namespace

FaceField diffusive_flux(const State& s, const Params& p) {
  require_finite_state(s);
  const Grid& g = s.u.grid;
  FaceField out(g);
  for (int a = 0; a < g.dim; ++a) {
    const double inv_h = 1.0 / g.spacing[a];
    auto& faces = out.axis[a];
    for_each_face(g, a, [&](std::size_t i, std::size_t j) {
      const double m = face_mobility(s.u[i] * s.v[i], s.u[j] * s.v[j], p.mobility);
      faces[i] = m * (s.u[j] - s.u[i]) * inv_h;
    });
  }
  return out;
}

std::vector<double> taxis_weights(const Field& u, double alpha) {
  std::vector<double> w(u.size());
  parallel_for(u.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) w[i] = u[i] > 0.0 ? std::pow(u[i], alpha) : 0.0;
  });
  return w;
}

FaceField taxis_flux(const State& s, const Params& p) {
  require_finite_state(s);
  for (double x : s.u.values) {
    if (x < 0.0) throw InvalidArgument("taxis flux needs u >= 0");
  }
  const Grid& g = s.u.grid;
  const std::vector<double> u_pow = taxis_weights(s.u, p.alpha);
  FaceField out(g);
  for (int a = 0; a < g.dim; ++a) {
    const double inv_h = 1.0 / g.spacing[a];
    auto& faces = out.axis[a];
    for_each_face(g, a, [&](std::size_t i, std::size_t j) {
      const double drift = p.chi * 0.5 * (s.v[i] + s.v[j]) * (s.v[j] - s.v[i]) * inv_h;
      faces[i] = drift * (drift > 0.0 ? u_pow[i] : u_pow[j]);
    });
  }
  return out;
}

Field transport_u(const State& s, const Params& p) {
  FaceField flux = diffusive_flux(s, p);
  const FaceField taxis = taxis_flux(s, p);
  for (int a = 0; a < flux.grid.dim; ++a) {
    for (std::size_t i = 0; i < flux.axis[a].size(); ++i) flux.axis[a][i] -= taxis.axis[a][i];
  }
  return divergence(flux);
}

Field rhs_u(const State& s, const Params& p) {
  Field r = transport_u(s, p);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += p.ell * s.u[i] * s.v[i];
  return r;
}

VImplicitSystem::VImplicitSystem(const Grid& grid, double dt, std::vector<double> reaction,
                                 std::vector<double> rhs)
    : grid_(grid), dt_(dt), reaction_(std::move(reaction)), rhs_(std::move(rhs)) {}

double VImplicitSystem::diagonal(std::size_t i) const {
  const auto c = grid_.coords(i);
  double d = 1.0 + dt_ * reaction_[i];
  for (int a = 0; a < grid_.dim; ++a) {
    const double w = -off_diagonal(a);
    if (c[a] > 0) d += w;
    if (c[a] + 1 < grid_.cells[a]) d += w;
  }
  return d;
}

std::vector<double> VImplicitSystem::diagonal() const {
  std::vector<double> d(grid_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 + dt_ * reaction_[i];
  for (int a = 0; a < grid_.dim; ++a) {
    const double w = -off_diagonal(a);
    for_each_face(grid_, a, [&](std::size_t i, std::size_t j) {
      d[i] += w;
      d[j] += w;
    });
  }
  return d;
}

void VImplicitSystem::apply(std::span<const double> x, std::span<double> y) const {
  const int nx = grid_.cells[0];
  const int ny = grid_.cells[1];
  const int nz = grid_.cells[2];
  const std::size_t sy = grid_.stride(1);
  const std::size_t sz = grid_.stride(2);
  const double wx = -off_diagonal(0);
  const double wy = grid_.dim > 1 ? -off_diagonal(1) : 0.0;
  const double wz = grid_.dim > 2 ? -off_diagonal(2) : 0.0;
  for_each_row(grid_, [&](std::size_t first, int iy, int iz) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = first + ix;
      const double xi = x[i];
      double acc = (1.0 + dt_ * reaction_[i]) * xi;
      if (ix > 0) acc += wx * (xi - x[i - 1]);
      if (ix + 1 < nx) acc += wx * (xi - x[i + 1]);
      if (iy > 0) acc += wy * (xi - x[i - sy]);
      if (iy + 1 < ny) acc += wy * (xi - x[i + sy]);
      if (iz > 0) acc += wz * (xi - x[i - sz]);
      if (iz + 1 < nz) acc += wz * (xi - x[i + sz]);
      y[i] = acc;
    }
  });
}

std::vector<std::vector<double>> VImplicitSystem::to_dense() const {
  const std::size_t n = grid_.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = grid_.coords(i);
    m[i][i] = diagonal(i);
    for (int a = 0; a < grid_.dim; ++a) {
      const std::size_t stride = grid_.stride(a);
      if (c[a] > 0) m[i][i - stride] = off_diagonal(a);
      if (c[a] + 1 < grid_.cells[a]) m[i][i + stride] = off_diagonal(a);
    }
  }
  return m;
}

VImplicitSystem v_implicit_operator(const State& s, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("v_implicit_operator needs dt > 0");
  for (double x : s.u.values) {
    if (x < 0.0) throw InvalidArgument("v_implicit_operator needs u >= 0");
  }
  return VImplicitSystem(s.u.grid, dt, s.u.values, s.v.values);
}

std::string to_string(ClipPolicy p) {
  return p == ClipPolicy::Reject ? "reject" : "clip-and-account";
}

std::string to_string(MobilityAveraging m) {
  return m == MobilityAveraging::Arithmetic ? "arithmetic" : "harmonic";
}

}  // namespace degentaxis
