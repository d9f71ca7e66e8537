#include "weissfb/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace wfb {

namespace {

// Root of the linear interpolant between (pa, va) and (pb, vb); va, vb have
// opposite signs.
Vec2 edge_root(Vec2 pa, double va, Vec2 pb, double vb) {
  const double t = va / (va - vb);
  return pa + (pb - pa) * t;
}

}  // namespace

std::vector<Vec2> BoundarySegmentSet::sample_points() const {
  std::vector<Vec2> pts;
  pts.reserve(segments.size() * 3);
  for (const auto& s : segments) {
    pts.push_back(s.a);
    pts.push_back(s.midpoint());
    pts.push_back(s.b);
  }
  return pts;
}

std::optional<Vec2> BoundarySegmentSet::nearest_point(Vec2 p) const {
  std::optional<Vec2> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Vec2& q : sample_points()) {
    const double d = (q - p).norm();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

BoundarySegmentSet extract_free_boundary(const ScalarField& field, double threshold) {
  const GridSpec& g = field.grid();
  BoundarySegmentSet out;

  auto emit = [&](Vec2 a, Vec2 b, Vec2 toward_positive) {
    Vec2 d = b - a;
    if (d.norm() < 1e-9 * g.h) return;
    Vec2 n = d.perp().normalized();
    if (n.dot(toward_positive) < 0.0) n = n * -1.0;
    out.segments.push_back({a, b, n});
  };

  for (int j = 0; j < g.ny - 1; ++j) {
    for (int i = 0; i < g.nx - 1; ++i) {
      const Vec2 p00 = g.node(i, j), p10 = g.node(i + 1, j);
      const Vec2 p01 = g.node(i, j + 1), p11 = g.node(i + 1, j + 1);
      const double v00 = field.at(i, j) - threshold;
      const double v10 = field.at(i + 1, j) - threshold;
      const double v01 = field.at(i, j + 1) - threshold;
      const double v11 = field.at(i + 1, j + 1) - threshold;
      const int code = (v00 > 0 ? 1 : 0) | (v10 > 0 ? 2 : 0) | (v11 > 0 ? 4 : 0) |
                       (v01 > 0 ? 8 : 0);
      if (code == 0 || code == 15) continue;

      // Edge intersections. bottom: 00-10, right: 10-11, top: 01-11, left: 00-01.
      auto bottom = [&] { return edge_root(p00, v00, p10, v10); };
      auto right = [&] { return edge_root(p10, v10, p11, v11); };
      auto top = [&] { return edge_root(p01, v01, p11, v11); };
      auto left = [&] { return edge_root(p00, v00, p01, v01); };

      // Positive-corner centroid minus negative-corner centroid. Robust even
      // when a root lands exactly on a corner (zero nodal value).
      Vec2 pos_c{0, 0}, neg_c{0, 0};
      int npos = 0, nneg = 0;
      for (auto [v, p] : {std::pair{v00, p00}, {v10, p10}, {v11, p11}, {v01, p01}}) {
        if (v > 0) {
          pos_c = pos_c + p;
          ++npos;
        } else {
          neg_c = neg_c + p;
          ++nneg;
        }
      }
      const Vec2 toward_pos = pos_c / npos - neg_c / nneg;
      const Vec2 cell_center = (p00 + p11) * 0.5;
      // For saddle sub-segments each piece cuts off one corner; orient by that
      // corner relative to the cell center.
      auto lone = [&](double vx, Vec2 px) {
        return vx > 0 ? (px - cell_center) : (cell_center - px);
      };

      switch (code) {
        case 1:
        case 14:
          emit(left(), bottom(), toward_pos);
          break;
        case 2:
        case 13:
          emit(bottom(), right(), toward_pos);
          break;
        case 4:
        case 11:
          emit(right(), top(), toward_pos);
          break;
        case 8:
        case 7:
          emit(top(), left(), toward_pos);
          break;
        case 3:
        case 12:
          emit(left(), right(), toward_pos);
          break;
        case 6:
        case 9:
          emit(bottom(), top(), toward_pos);
          break;
        case 5:
        case 10: {
          // Saddle: split by the sign of the cell-center average.
          const double vc = 0.25 * (v00 + v10 + v01 + v11);
          const bool connect_00_11 = (code == 5) == (vc > 0);
          if (connect_00_11) {
            emit(left(), top(), lone(v01, p01));
            emit(bottom(), right(), lone(v10, p10));
          } else {
            emit(left(), bottom(), lone(v00, p00));
            emit(right(), top(), lone(v11, p11));
          }
          break;
        }
        default:
          break;
      }
    }
  }
  return out;
}

std::optional<double> hausdorff_fb_distance(const ScalarField& a, const ScalarField& b,
                                            Vec2 window_center, double window_radius) {
  auto collect = [&](const ScalarField& f) {
    std::vector<Vec2> pts;
    for (const Vec2& p : extract_free_boundary(f).sample_points())
      if ((p - window_center).norm() <= window_radius) pts.push_back(p);
    return pts;
  };
  const std::vector<Vec2> pa = collect(a);
  const std::vector<Vec2> pb = collect(b);
  if (pa.empty() || pb.empty()) return std::nullopt;

  auto directed = [](const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
    double worst = 0.0;
    for (const Vec2& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& q : to) best = std::min(best, (p - q).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(pa, pb), directed(pb, pa));
}

}  // namespace wfb
