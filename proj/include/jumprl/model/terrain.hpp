#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "jumprl/model/params.hpp"

namespace jumprl {

// Ground height model: a support block under each foot for x before the
// landing platform edge, then the platform surface. Flat ground is the
// default (zero blocks, no platform).
struct Terrain {
  std::array<double, 2> block_heights{0.0, 0.0};  // front, rear
  double platform_height = 0.0;
  double platform_edge_x = std::numeric_limits<double>::infinity();
  double friction = 0.8;

  double ground_height(Leg leg, double x) const {
    return x < platform_edge_x ? block_heights[static_cast<int>(leg)] : platform_height;
  }

  // C1 blend of the platform step, rising over [edge, edge + blend_width].
  double smooth_ground_height(double x, double blend_width = 0.05) const {
    if (!std::isfinite(platform_edge_x)) return 0.0;
    const double u = (x - platform_edge_x) / blend_width;
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return platform_height;
    return platform_height * u * u * (3.0 - 2.0 * u);
  }

  double smooth_ground_slope(double x, double blend_width = 0.05) const {
    if (!std::isfinite(platform_edge_x)) return 0.0;
    const double u = (x - platform_edge_x) / blend_width;
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return platform_height * 6.0 * u * (1.0 - u) / blend_width;
  }
};

}  // namespace jumprl
