#include <doctest.h>

#include "jumprl/model/contact.hpp"

using namespace jumprl;

TEST_CASE("no force above the ground") {
  ContactParams cp;
  ContactAnchor anchor;
  const auto r = contact_force(Vec2(0.3, 0.01), Vec2(1.0, -2.0), 0.0, 0.8, cp, anchor);
  CHECK(r.normal == 0.0);
  CHECK(r.tangential == 0.0);
  CHECK_FALSE(r.in_contact);
  CHECK_FALSE(anchor.active);
}

TEST_CASE("one millimetre of static penetration gives the spring force") {
  ContactParams cp;
  ContactAnchor anchor;
  const auto r = contact_force(Vec2(0.0, -0.001), Vec2::Zero(), 0.0, 0.8, cp, anchor);
  CHECK(r.normal == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(r.tangential == 0.0);
  CHECK(r.in_contact);
  CHECK(anchor.active);
  CHECK(anchor.anchor_x == 0.0);
}

TEST_CASE("normal damping adds to downward motion and never pulls") {
  ContactParams cp;
  ContactAnchor anchor;
  auto r = contact_force(Vec2(0.0, -0.001), Vec2(0.0, -0.1), 0.0, 0.8, cp, anchor);
  CHECK(r.normal == doctest::Approx(200.0).epsilon(1e-12));
  anchor = {};
  r = contact_force(Vec2(0.0, -0.001), Vec2(0.0, 0.5), 0.0, 0.8, cp, anchor);
  CHECK(r.normal == 0.0);  // clamped, no adhesion
}

TEST_CASE("penetration depth saturates") {
  ContactParams cp;
  ContactAnchor anchor;
  const auto r = contact_force(Vec2(0.0, -0.08), Vec2::Zero(), 0.0, 0.8, cp, anchor);
  CHECK(r.normal == doctest::Approx(cp.k_normal * cp.max_penetration).epsilon(1e-12));
}

TEST_CASE("tangential force is capped by the friction cone and the anchor drags") {
  ContactParams cp;
  ContactAnchor anchor;
  // Touch down, then slide 2 cm: the raw spring force exceeds mu*N.
  contact_force(Vec2(0.0, -0.001), Vec2::Zero(), 0.0, 0.8, cp, anchor);
  auto r = contact_force(Vec2(0.02, -0.001), Vec2::Zero(), 0.0, 0.8, cp, anchor);
  CHECK(r.normal == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(r.tangential == doctest::Approx(-0.8 * 100.0).epsilon(1e-12));
  // The dragged anchor keeps the force at the cap, without jumps.
  r = contact_force(Vec2(0.02, -0.001), Vec2::Zero(), 0.0, 0.8, cp, anchor);
  CHECK(r.tangential == doctest::Approx(-0.8 * 100.0).epsilon(1e-12));
}

TEST_CASE("small slips stay inside the cone and spring back") {
  ContactParams cp;
  ContactAnchor anchor;
  contact_force(Vec2(0.0, -0.001), Vec2::Zero(), 0.0, 0.8, cp, anchor);
  const auto r = contact_force(Vec2(0.0005, -0.001), Vec2::Zero(), 0.0, 0.8, cp, anchor);
  CHECK(r.tangential == doctest::Approx(-5.0).epsilon(1e-12));
  CHECK(anchor.anchor_x == 0.0);  // unsaturated: anchor untouched
}

TEST_CASE("lift-off releases the anchor") {
  ContactParams cp;
  ContactAnchor anchor;
  contact_force(Vec2(0.1, -0.002), Vec2::Zero(), 0.0, 0.8, cp, anchor);
  CHECK(anchor.active);
  const auto r = contact_force(Vec2(0.1, 0.004), Vec2::Zero(), 0.0, 0.8, cp, anchor);
  CHECK_FALSE(r.in_contact);
  CHECK_FALSE(anchor.active);
}
