#include "degentaxis/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "degentaxis/error.hpp"
#include "degentaxis/parallel.hpp"

namespace degentaxis {

Grid make_grid(int dim, std::span<const int> cells, std::span<const double> extents) {
  if (dim < 1 || dim > 3) {
    throw InvalidArgument("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  if (cells.size() != static_cast<std::size_t>(dim) ||
      extents.size() != static_cast<std::size_t>(dim)) {
    throw InvalidArgument("grid needs exactly " + std::to_string(dim) +
                          " cell counts and extents");
  }
  Grid g;
  g.dim = dim;
  for (int a = 0; a < dim; ++a) {
    if (cells[a] < 2) {
      throw InvalidArgument("cell count along axis " + std::to_string(a) +
                            " must be >= 2, got " + std::to_string(cells[a]));
    }
    if (!(extents[a] > 0.0) || !std::isfinite(extents[a])) {
      throw InvalidArgument("extent along axis " + std::to_string(a) +
                            " must be positive and finite");
    }
    g.cells[a] = cells[a];
    g.extents[a] = extents[a];
    g.spacing[a] = extents[a] / cells[a];
  }
  return g;
}

Field sample_field(const Grid& grid, const std::function<double(double, double, double)>& fn) {
  Field f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto c = grid.coords(i);
    f[i] = fn(grid.center(0, c[0]), grid.dim > 1 ? grid.center(1, c[1]) : 0.0,
              grid.dim > 2 ? grid.center(2, c[2]) : 0.0);
  }
  return f;
}

void require_finite(const Field& f, std::string_view what) {
  for (double x : f.values) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " contains non-finite values");
  }
}

namespace {
void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid == b.grid)) throw InvalidArgument("fields live on different grids");
}
}  // namespace

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field r(a.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field r(a.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Field operator*(double c, const Field& a) {
  Field r(a.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = c * a[i];
  return r;
}

double integrate(const Field& f) {
  CompensatedSum s;
  for (double x : f.values) s.add(x);
  return s.value() * f.grid.cell_volume();
}

double integrate_product(const Field& f, const Field& g) {
  require_same_grid(f, g);
  CompensatedSum s;
  for (std::size_t i = 0; i < f.size(); ++i) s.add(f[i] * g[i]);
  return s.value() * f.grid.cell_volume();
}

void for_each_row(const Grid& g, const std::function<void(std::size_t, int, int)>& fn) {
  const int ny = g.cells[1];
  const std::size_t rows = static_cast<std::size_t>(ny) * g.cells[2];
  const auto nx = static_cast<std::size_t>(g.cells[0]);
  const std::size_t rows_per_chunk = std::max<std::size_t>(1, 1024 / nx);
  parallel_for(
      rows,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) fn(r * nx, static_cast<int>(r % ny), static_cast<int>(r / ny));
      },
      rows_per_chunk);
}

FaceField face_gradient(const Field& f) {
  const Grid& g = f.grid;
  FaceField out(g);
  for (int a = 0; a < g.dim; ++a) {
    const double inv_h = 1.0 / g.spacing[a];
    auto& faces = out.axis[a];
    for_each_face(g, a, [&](std::size_t i, std::size_t j) { faces[i] = (f[j] - f[i]) * inv_h; });
  }
  return out;
}

namespace {

/// Calls fn(i, axis, has_lower, has_upper) for every cell and axis.
template <typename Fn>
void for_each_cell_axis(const Grid& g, Fn&& fn) {
  const int nx = g.cells[0];
  for_each_row(g, [&](std::size_t first, int iy, int iz) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = first + ix;
      fn(i, 0, ix > 0, ix + 1 < nx);
      if (g.dim > 1) fn(i, 1, iy > 0, iy + 1 < g.cells[1]);
      if (g.dim > 2) fn(i, 2, iz > 0, iz + 1 < g.cells[2]);
    }
  });
}

}  // namespace

Field divergence(const FaceField& flux) {
  const Grid& g = flux.grid;
  Field out(g);
  std::array<std::size_t, 3> strides{g.stride(0), g.stride(1), g.stride(2)};
  for_each_cell_axis(g, [&](std::size_t i, int a, bool lower, bool upper) {
    const double up = upper ? flux.axis[a][i] : 0.0;
    const double lo = lower ? flux.axis[a][i - strides[a]] : 0.0;
    out[i] += (up - lo) / g.spacing[a];
  });
  return out;
}

Field cell_gradient_squared(const Field& f) {
  const Grid& g = f.grid;
  Field out(g);
  std::array<std::size_t, 3> strides{g.stride(0), g.stride(1), g.stride(2)};
  for_each_cell_axis(g, [&](std::size_t i, int a, bool lower, bool upper) {
    const double inv_h = 1.0 / g.spacing[a];
    const double up = upper ? (f[i + strides[a]] - f[i]) * inv_h : 0.0;
    const double lo = lower ? (f[i] - f[i - strides[a]]) * inv_h : 0.0;
    out[i] += 0.5 * (up * up + lo * lo);
  });
  return out;
}

Field cell_gradient_magnitude(const Field& f) {
  Field out = cell_gradient_squared(f);
  for (double& x : out.values) x = std::sqrt(x);
  return out;
}

Field reflect(const Field& f, int axis) {
  const Grid& g = f.grid;
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto c = g.coords(i);
    c[axis] = g.cells[axis] - 1 - c[axis];
    out[g.index(c[0], c[1], c[2])] = f[i];
  }
  return out;
}

}  // namespace degentaxis
