#ifndef WEISSFB_BOUNDARY_HPP
#define WEISSFB_BOUNDARY_HPP

#include <optional>
#include <vector>

#include "weissfb/grid.hpp"

namespace wfb {

struct BoundarySegment {
  Vec2 a;
  Vec2 b;
  Vec2 normal;  // unit, points into {psi > 0}
  Vec2 midpoint() const { return (a + b) * 0.5; }
};

struct BoundarySegmentSet {
  std::vector<BoundarySegment> segments;

  bool empty() const { return segments.empty(); }
  std::vector<Vec2> sample_points() const;
  /// Nearest segment point (endpoints and midpoints) to p, if any.
  std::optional<Vec2> nearest_point(Vec2 p) const;
};

/// Marching-squares segments on the zero level of psi - threshold. Saddle
/// cells are disambiguated by the cell-center average sign. A single-phase
/// field yields the empty set.
BoundarySegmentSet extract_free_boundary(const ScalarField& field, double threshold = 0.0);

/// Symmetric Hausdorff distance between the sampled free boundaries of two
/// fields, restricted to |p - window_center| <= window_radius. Empty boundary
/// in the window is flagged via the optional.
std::optional<double> hausdorff_fb_distance(const ScalarField& a, const ScalarField& b,
                                            Vec2 window_center, double window_radius);

}  // namespace wfb

#endif
