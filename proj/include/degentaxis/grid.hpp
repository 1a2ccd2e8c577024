#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace degentaxis {

/// Uniform cell-centered mesh of a box [0, L_x] x [0, L_y] x [0, L_z].
///
/// Axes beyond `dim` carry one cell of unit length so that volumes and
/// indices are computed uniformly. Cells are stored with x varying fastest:
/// index = ix + n_x * (iy + n_y * iz).
struct Grid {
  int dim = 1;
  std::array<int, 3> cells{1, 1, 1};
  std::array<double, 3> extents{1.0, 1.0, 1.0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};

  std::size_t size() const {
    return static_cast<std::size_t>(cells[0]) * cells[1] * cells[2];
  }
  double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }
  double volume() const { return extents[0] * extents[1] * extents[2]; }

  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(cells[a]);
    return s;
  }
  std::size_t index(int ix, int iy = 0, int iz = 0) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(cells[0]) *
               (static_cast<std::size_t>(iy) + static_cast<std::size_t>(cells[1]) * iz);
  }
  std::array<int, 3> coords(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(cells[0]);
    const auto ny = static_cast<std::size_t>(cells[1]);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
            static_cast<int>(idx / (nx * ny))};
  }
  /// Coordinate of the center of cell i along `axis`.
  double center(int axis, int i) const { return (i + 0.5) * spacing[axis]; }

  bool operator==(const Grid& other) const {
    return dim == other.dim && cells == other.cells && extents == other.extents;
  }
};

/// Builds a grid; throws InvalidArgument on dim outside {1,2,3}, counts < 2,
/// non-positive or non-finite extents, or size mismatch with `dim`.
Grid make_grid(int dim, std::span<const int> cells, std::span<const double> extents);

/// One scalar per cell.
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Field whose value at each cell is fn(x, y, z) at the cell center.
Field sample_field(const Grid& grid, const std::function<double(double, double, double)>& fn);

/// Throws InvalidArgument naming `what` if any entry is NaN or infinite.
void require_finite(const Field& f, std::string_view what);

Field operator-(const Field& a, const Field& b);
Field operator+(const Field& a, const Field& b);
Field operator*(double c, const Field& a);

/// One scalar per interior face per axis.
///
/// `axis[a][i]` holds the value on the face between cell i and cell
/// i + stride(a). Entries of cells in the last layer along `a` sit on the
/// boundary and are always zero: the zero-flux closure is structural.
struct FaceField {
  Grid grid;
  std::array<std::vector<double>, 3> axis;

  FaceField() = default;
  explicit FaceField(const Grid& g) : grid(g) {
    for (int a = 0; a < g.dim; ++a) axis[a].assign(g.size(), 0.0);
  }
};

/// True if cell `idx` has a neighbor in the + direction of `axis`.
inline bool has_upper_neighbor(const Grid& g, std::size_t idx, int axis) {
  return g.coords(idx)[axis] + 1 < g.cells[axis];
}

/// Calls fn(first, iy, iz) once per x-row of cells, where `first` is the
/// index of cell (0, iy, iz). Rows are distributed over the worker threads,
/// so fn may only write to entries belonging to its own row.
void for_each_row(const Grid& g, const std::function<void(std::size_t, int, int)>& fn);

/// Calls fn(i, j) for every interior face along `axis`, j = i + stride(axis).
/// Each call writes the face slot i; faces are visited row by row.
template <typename Fn>
void for_each_face(const Grid& g, int axis, Fn&& fn) {
  const std::size_t stride = g.stride(axis);
  const int nx = g.cells[0];
  for_each_row(g, [&](std::size_t first, int iy, int iz) {
    if (axis == 0) {
      for (int ix = 0; ix + 1 < nx; ++ix) fn(first + ix, first + ix + 1);
      return;
    }
    if ((axis == 1 && iy + 1 >= g.cells[1]) || (axis == 2 && iz + 1 >= g.cells[2])) return;
    for (int ix = 0; ix < nx; ++ix) fn(first + ix, first + ix + stride);
  });
}

/// Midpoint-rule integral, summed in cell order with compensation.
double integrate(const Field& f);

/// Integral of the cellwise product f * g.
double integrate_product(const Field& f, const Field& g);

/// (f_R - f_L) / h on interior faces, zero on boundary faces.
FaceField face_gradient(const Field& f);

/// Net outward flux per cell divided by the cell volume:
/// div(F)_i = sum_a (F_{i+1/2} - F_{i-1/2}) / h_a. With boundary faces at
/// zero the cell-volume weighted sum telescopes to exactly zero.
Field divergence(const FaceField& flux);

/// Cellwise |grad f|^2: per axis, the mean of the squared gradients on the
/// two faces of the cell (boundary faces contribute zero). Summed over the
/// grid this reproduces the face-based Dirichlet form exactly.
Field cell_gradient_squared(const Field& f);

/// Square root of cell_gradient_squared.
Field cell_gradient_magnitude(const Field& f);

/// Copy of f mirrored along `axis` (i -> n - 1 - i).
Field reflect(const Field& f, int axis);

}  // namespace degentaxis
