#include <doctest.h>

#include <cmath>

#include "csa/plant.hpp"
#include "support/fixtures.hpp"

using namespace csa;
using namespace csa::plant;

TEST_CASE("admittance law") {
  const auto plate = testing::flat_plate();
  auto s = rest_at({0.1, 0.1, 0.0}, &plate);
  CHECK(s.force == 0.0);
  PlantCommand c;
  c.mode = CommandMode::hybrid;
  c.target = s.position;
  c.force = 5.0;
  PlantParams params;
  const double dt = 0.001;
  const auto next = plant_step(s, c, &plate, params, dt);
  // 0.002 m/(s N) * 5 N toward the surface (-z).
  CHECK(next.velocity.z() == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(std::abs(next.velocity.x()) < 1e-12);
  CHECK(std::abs(next.velocity.y()) < 1e-12);
}

TEST_CASE("force settles and does not oscillate") {
  const auto plate = testing::flat_plate();
  auto s = rest_at({0.1, 0.1, 0.0}, &plate);
  PlantCommand c;
  c.mode = CommandMode::hybrid;
  c.target = s.position;
  c.force = 5.0;
  PlantParams params;
  const double dt = 0.001;
  double settled_at = -1.0;
  double peak = 0.0;
  double last_excursion = 1e9;
  bool after_peak = false;
  bool growth = false;
  for (int k = 1; k <= 10000; ++k) {
    const double before = s.force;
    s = plant_step(s, c, &plate, params, dt);
    CHECK(std::abs(s.force - before) <= params.k_s * params.v_max * dt + params.damping * params.v_max + 1e-9);
    if (std::abs(s.force - 5.0) > 0.02 * 5.0) settled_at = -1.0;
    else if (settled_at < 0.0) settled_at = k * dt;
    if (s.force > peak) peak = s.force;
    else after_peak = true;
    if (after_peak) {
      const double exc = std::abs(s.force - 5.0);
      if (exc > last_excursion + 1e-12) growth = true;
      last_excursion = exc;
    }
  }
  CHECK(settled_at > 0.0);
  CHECK(settled_at < 1.0);
  CHECK_FALSE(growth);
  CHECK(s.penetration <= 5.0 / params.k_s + 1e-9);
  CHECK(s.contact);
}

TEST_CASE("rest stays at rest and speed is limited") {
  PlantParams params;
  auto s = rest_at({0.3, -0.2, 0.5}, nullptr);
  PlantCommand c;
  c.target = s.position;
  for (int k = 0; k < 100; ++k) s = plant_step(s, c, nullptr, params, 0.001);
  CHECK(s.position == Eigen::Vector3d(0.3, -0.2, 0.5));
  CHECK(s.velocity.isZero(0.0));
  c.target = {1.0, 1.0, 1.0};
  s = plant_step(s, c, nullptr, params, 0.001);
  CHECK(s.velocity.norm() <= params.v_max + 1e-12);
  CHECK_THROWS_AS(plant_step(s, c, nullptr, params, 0.0), std::invalid_argument);
}

TEST_CASE("contact force never pulls") {
  const auto plate = testing::flat_plate();
  PlantParams params;
  auto s = rest_at({0.1, 0.1, -0.001}, &plate);
  PlantCommand c;
  c.target = {0.1, 0.1, 0.01};
  for (int k = 0; k < 200; ++k) {
    s = plant_step(s, c, &plate, params, 0.001);
    CHECK(s.force >= 0.0);
    if (s.penetration == 0.0) CHECK(s.force == 0.0);
  }
  CHECK_FALSE(s.contact);
}
