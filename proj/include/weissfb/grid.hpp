#ifndef WEISSFB_GRID_HPP
#define WEISSFB_GRID_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "weissfb/geometry.hpp"

namespace wfb {

/// Uniform isotropic Cartesian grid. Physical grids live strictly inside the
/// half-plane {x > 0} since the operators carry the 1/x weight; reference
/// grids (used for blow-up rescalings around the origin) do not.
struct GridSpec {
  double x_min = 0.0;
  double y_min = 0.0;
  double h = 0.0;
  int nx = 0;
  int ny = 0;

  static GridSpec physical(double x_min, double y_min, double h, int nx, int ny);
  static GridSpec reference(double x_min, double y_min, double h, int nx, int ny);

  // Square grid of n x n nodes covering [cx - half, cx + half]^2.
  static GridSpec centered_square(Vec2 center, double half_width, int n);

  double x_max() const { return x_min + (nx - 1) * h; }
  double y_max() const { return y_min + (ny - 1) * h; }
  Vec2 node(int i, int j) const { return {x_min + i * h, y_min + j * h}; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

  bool contains(Vec2 p) const {
    return p.x >= x_min && p.x <= x_max() && p.y >= y_min && p.y <= y_max();
  }
  /// Distance from p to the hull boundary (negative outside).
  double hull_margin(Vec2 p) const;

  bool operator==(const GridSpec& o) const = default;
};

/// Immutable-by-convention scalar function sampled on grid nodes, row-major.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridSpec grid, std::vector<double> values);
  /// Samples fn at every node.
  ScalarField(GridSpec grid, const std::function<double(Vec2)>& fn);

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  double at(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& at(int i, int j) { return values_[grid_.index(i, j)]; }

  /// Bilinear interpolation; p must lie inside the hull.
  double interpolate(Vec2 p) const;

  /// Central-difference gradient of the bilinear interpolant, step h/2
  /// (shrunk near the hull edge). Exact for affine fields.
  Vec2 gradient(Vec2 p) const;

  /// Conservative 5-point stencil for div((1/x) grad psi) at interior node
  /// (i,j), face weights 1/x at face midpoints. Physical grids only.
  double weighted_divergence(int i, int j) const;

  void dump_csv(std::ostream& os) const;
  void dump_csv_file(const std::string& path) const;
  static ScalarField load_csv(std::istream& is);

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

}  // namespace wfb

#endif
