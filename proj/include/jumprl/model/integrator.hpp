#pragma once

#include <array>
#include <stdexcept>

#include "jumprl/model/contact.hpp"
#include "jumprl/model/dynamics.hpp"
#include "jumprl/model/terrain.hpp"

namespace jumprl {

struct SimDivergedError : std::runtime_error {
  SimDivergedError() : std::runtime_error("simulation diverged: state outside sanity bounds") {}
};

struct SimState {
  PlanarState x;
  std::array<ContactAnchor, 2> anchors{};
  double t = 0.0;
};

// One semi-implicit Euler step at dt (1 ms nominal). Contact forces are
// evaluated at the pre-step state; joint speeds are clamped to the actuator
// limit and joint angles to their ranges (with the outward velocity zeroed).
// Torques must already be saturated by the caller. Throws SimDivergedError
// when the state leaves sanity bounds.
ContactReport sim_step(const ModelParams& p, const ContactParams& cp, const Terrain& terrain,
                       SimState& s, const Vec4& tau, double dt = 1e-3);

}  // namespace jumprl
