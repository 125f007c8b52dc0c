#pragma once

#include <algorithm>
#include <array>

#include "jumprl/model/params.hpp"
#include "jumprl/model/terrain.hpp"

namespace jumprl {

// Spring-damper penalty contact with an anchored tangential spring and a
// Coulomb cap. Stiffnesses chosen stable at 1 ms steps.
struct ContactParams {
  double k_normal = 1e5;     // N/m
  double d_normal = 1e3;     // N*s/m
  double k_tangent = 1e4;    // N/m
  double d_tangent = 30.0;   // N*s/m
  double max_penetration = 0.05;  // force saturates past this depth (platform edge hits)
};

// Tangential anchor, owned by the caller as part of simulation state.
struct ContactAnchor {
  bool active = false;
  double anchor_x = 0.0;
};

struct ContactReportEntry {
  double normal = 0.0;
  double tangential = 0.0;
  bool in_contact = false;
};

using ContactReport = std::array<ContactReportEntry, 2>;

// Force on the foot from the ground. Updates the anchor in place: set on
// touchdown, dragged along when the Coulomb cap saturates, cleared on liftoff.
inline ContactReportEntry contact_force(const Vec2& foot_pos, const Vec2& foot_vel,
                                        double ground_z, double friction,
                                        const ContactParams& cp, ContactAnchor& anchor) {
  ContactReportEntry out;
  const double penetration = ground_z - foot_pos.y();
  if (penetration <= 0.0) {
    anchor.active = false;
    return out;
  }
  if (!anchor.active) {
    anchor.active = true;
    anchor.anchor_x = foot_pos.x();
  }
  const double pen = std::min(penetration, cp.max_penetration);
  out.normal = std::max(0.0, cp.k_normal * pen - cp.d_normal * foot_vel.y());
  const double slip = foot_pos.x() - anchor.anchor_x;
  const double raw = -cp.k_tangent * slip - cp.d_tangent * foot_vel.x();
  const double cap = friction * out.normal;
  out.tangential = std::clamp(raw, -cap, cap);
  if (out.tangential != raw) {
    // Drag the anchor so the spring term alone reproduces the capped force.
    anchor.anchor_x = foot_pos.x() + (out.tangential + cp.d_tangent * foot_vel.x()) / cp.k_tangent;
  }
  out.in_contact = true;
  return out;
}

}  // namespace jumprl
