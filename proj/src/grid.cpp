#include "weissfb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace wfb {

static GridSpec make_grid(double x_min, double y_min, double h, int nx, int ny,
                          bool physical) {
  if (!(h > 0.0)) throw std::invalid_argument("GridSpec: spacing must be positive");
  if (nx < 3 || ny < 3) throw std::invalid_argument("GridSpec: need nx, ny >= 3");
  if (physical && !(x_min > 0.0))
    throw std::invalid_argument("GridSpec: physical grid must satisfy x > 0 at every node");
  GridSpec g;
  g.x_min = x_min;
  g.y_min = y_min;
  g.h = h;
  g.nx = nx;
  g.ny = ny;
  return g;
}

GridSpec GridSpec::physical(double x_min, double y_min, double h, int nx, int ny) {
  return make_grid(x_min, y_min, h, nx, ny, true);
}

GridSpec GridSpec::reference(double x_min, double y_min, double h, int nx, int ny) {
  return make_grid(x_min, y_min, h, nx, ny, false);
}

GridSpec GridSpec::centered_square(Vec2 center, double half_width, int n) {
  const double h = 2.0 * half_width / (n - 1);
  const double x0 = center.x - half_width;
  const double y0 = center.y - half_width;
  return x0 > 0.0 ? physical(x0, y0, h, n, n) : reference(x0, y0, h, n, n);
}

double GridSpec::hull_margin(Vec2 p) const {
  const double mx = std::min(p.x - x_min, x_max() - p.x);
  const double my = std::min(p.y - y_min, y_max() - p.y);
  return std::min(mx, my);
}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("ScalarField: value count must equal nx*ny");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("ScalarField: non-finite value");
}

ScalarField::ScalarField(GridSpec grid, const std::function<double(Vec2)>& fn)
    : grid_(grid), values_(grid.size()) {
  for (int j = 0; j < grid_.ny; ++j)
    for (int i = 0; i < grid_.nx; ++i) values_[grid_.index(i, j)] = fn(grid_.node(i, j));
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("ScalarField: non-finite value");
}

double ScalarField::interpolate(Vec2 p) const {
  if (!grid_.contains(p)) throw std::domain_error("interpolate: point outside grid hull");
  const double u = (p.x - grid_.x_min) / grid_.h;
  const double v = (p.y - grid_.y_min) / grid_.h;
  int i = std::min(static_cast<int>(u), grid_.nx - 2);
  int j = std::min(static_cast<int>(v), grid_.ny - 2);
  i = std::max(i, 0);
  j = std::max(j, 0);
  const double s = u - i;
  const double t = v - j;
  const double f00 = at(i, j), f10 = at(i + 1, j), f01 = at(i, j + 1), f11 = at(i + 1, j + 1);
  return (1 - s) * (1 - t) * f00 + s * (1 - t) * f10 + (1 - s) * t * f01 + s * t * f11;
}

Vec2 ScalarField::gradient(Vec2 p) const {
  const double margin = grid_.hull_margin(p);
  if (margin <= 0.0) throw std::domain_error("gradient: point outside grid hull");
  const double d = std::min(grid_.h / 2.0, margin);
  const double gx = (interpolate({p.x + d, p.y}) - interpolate({p.x - d, p.y})) / (2 * d);
  const double gy = (interpolate({p.x, p.y + d}) - interpolate({p.x, p.y - d})) / (2 * d);
  return {gx, gy};
}

double ScalarField::weighted_divergence(int i, int j) const {
  if (i < 1 || i > grid_.nx - 2 || j < 1 || j > grid_.ny - 2)
    throw std::domain_error("weighted_divergence: boundary node");
  const double x = grid_.x_min + i * grid_.h;
  const double h = grid_.h;
  const double we = 1.0 / (x + h / 2);
  const double ww = 1.0 / (x - h / 2);
  const double wn = 1.0 / x;
  const double c = at(i, j);
  const double flux = we * (at(i + 1, j) - c) - ww * (c - at(i - 1, j)) +
                      wn * (at(i, j + 1) - c) - wn * (c - at(i, j - 1));
  return flux / (h * h);
}

void ScalarField::dump_csv(std::ostream& os) const {
  os << "# nx,ny,h,x_min,y_min\n";
  os << std::setprecision(17) << grid_.nx << ',' << grid_.ny << ',' << grid_.h << ','
     << grid_.x_min << ',' << grid_.y_min << '\n';
  for (int j = 0; j < grid_.ny; ++j)
    for (int i = 0; i < grid_.nx; ++i) {
      const Vec2 p = grid_.node(i, j);
      os << i << ',' << j << ',' << p.x << ',' << p.y << ',' << at(i, j) << '\n';
    }
}

void ScalarField::dump_csv_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  dump_csv(os);
}

ScalarField ScalarField::load_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind('#', 0) != 0)
    throw std::runtime_error("field csv: missing header");
  if (!std::getline(is, line)) throw std::runtime_error("field csv: missing dimensions");
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream dims(line);
  int nx, ny;
  double h, x_min, y_min;
  if (!(dims >> nx >> ny >> h >> x_min >> y_min))
    throw std::runtime_error("field csv: bad dimension row");
  GridSpec g = x_min > 0.0 ? GridSpec::physical(x_min, y_min, h, nx, ny)
                           : GridSpec::reference(x_min, y_min, h, nx, ny);
  std::vector<double> values(g.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    int i, j;
    double x, y, v;
    if (!(row >> i >> j >> x >> y >> v)) throw std::runtime_error("field csv: bad row");
    values[g.index(i, j)] = v;
  }
  return ScalarField(g, std::move(values));
}

}  // namespace wfb
