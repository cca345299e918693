#include "leoho/orbital.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace leoho::orbital {

double OrbitalConfig::orbital_period_s() const {
  return 2.0 * std::numbers::pi * (kEarthRadius + altitude_m) / orbital_speed(altitude_m);
}

double OrbitalConfig::arc_spacing_m() const {
  return 2.0 * std::numbers::pi * (kEarthRadius + altitude_m) /
         static_cast<double>(sats_per_plane);
}

void OrbitalConfig::validate() const {
  if (!(altitude_m > 0.0)) throw std::invalid_argument("orbital.altitude_m must be > 0");
  if (num_planes < 2) throw std::invalid_argument("orbital.num_planes must be >= 2");
  if (sats_per_plane < 1) throw std::invalid_argument("orbital.sats_per_plane must be >= 1");
  if (!(slot_duration_s > 0.0)) throw std::invalid_argument("orbital.slot_duration_s must be > 0");
  if (plane_velocity_dirs.size() != num_planes)
    throw std::invalid_argument("orbital.plane_velocity_dirs must have num_planes entries");
  if (initial_positions.size() != num_planes)
    throw std::invalid_argument("orbital.initial_positions must have num_planes entries");
  for (std::size_t k = 0; k < num_planes; ++k) {
    if (std::abs(plane_velocity_dirs[k].norm() - 1.0) > 1e-9)
      throw std::invalid_argument("orbital.plane_velocity_dirs[" + std::to_string(k) +
                                  "] is not a unit vector");
  }
}

double orbital_speed(double altitude_m) {
  if (altitude_m < 0.0) throw std::domain_error("orbital_speed: negative altitude");
  return std::sqrt(kEarthGM / (kEarthRadius + altitude_m));
}

OrbitalConfig default_orbital_config(std::size_t num_planes, std::size_t episode_slots,
                                     double slot_duration_s, double altitude_m) {
  OrbitalConfig cfg;
  cfg.altitude_m = altitude_m;
  cfg.num_planes = num_planes;
  cfg.sats_per_plane = 1;
  cfg.slot_duration_s = slot_duration_s;

  const double track = static_cast<double>(episode_slots) * slot_duration_s *
                       orbital_speed(altitude_m);
  cfg.plane_velocity_dirs.push_back(Vec3(0.0, 1.0, 0.0));
  cfg.initial_positions.push_back(Vec3(0.0, -track / 2.0, altitude_m));

  // Targets approach symmetrically from both sides of the serving track.
  for (std::size_t k = 1; k < num_planes; ++k) {
    const std::size_t pair = (k + 1) / 2;
    const double side = (k % 2 == 1) ? 1.0 : -1.0;
    const double angle = std::numbers::pi / 4.0 / static_cast<double>(pair);
    const Vec3 dir(side * std::sin(angle), std::cos(angle), 0.0);
    cfg.plane_velocity_dirs.push_back(dir);
    Vec3 start = -track * dir;
    start.z() = altitude_m;
    cfg.initial_positions.push_back(start);
  }
  return cfg;
}

ConstellationState initial_state(const OrbitalConfig& config) {
  config.validate();
  const double speed = orbital_speed(config.altitude_m);
  const double spacing = config.arc_spacing_m();
  ConstellationState state;
  state.positions.resize(config.num_planes);
  state.velocities.resize(config.num_planes);
  for (std::size_t k = 0; k < config.num_planes; ++k) {
    const Vec3& dir = config.plane_velocity_dirs[k];
    for (std::size_t i = 0; i < config.sats_per_plane; ++i) {
      state.positions[k].push_back(config.initial_positions[k] -
                                   static_cast<double>(i) * spacing * dir);
      state.velocities[k].push_back(speed * dir);
    }
  }
  return state;
}

ConstellationState propagate(const ConstellationState& state, const OrbitalConfig& config,
                             long steps) {
  if (steps < 0) throw std::invalid_argument("propagate: steps must be >= 0");
  ConstellationState next = state;
  const double dt = static_cast<double>(steps) * config.slot_duration_s;
  for (std::size_t k = 0; k < next.positions.size(); ++k)
    for (std::size_t i = 0; i < next.positions[k].size(); ++i)
      next.positions[k][i] += dt * next.velocities[k][i];
  next.slot_index += steps;
  return next;
}

double slant_distance(const Vec3& sat_pos, const Vec3& ue_pos) { return (sat_pos - ue_pos).norm(); }

double propagation_delay(double distance_m) {
  if (distance_m < 0.0) throw std::domain_error("propagation_delay: negative distance");
  return distance_m / kPropagationSpeed;
}

std::size_t nearest_sat(const ConstellationState& state, std::size_t plane, const Vec3& ue_pos) {
  const auto& sats = state.positions.at(plane);
  std::size_t best = 0;
  double best_d = slant_distance(sats[0], ue_pos);
  for (std::size_t i = 1; i < sats.size(); ++i) {
    const double d = slant_distance(sats[i], ue_pos);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace leoho::orbital
