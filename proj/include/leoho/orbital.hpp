#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace leoho::orbital {

using Vec3 = Eigen::Vector3d;

inline constexpr double kEarthGM = 3.986004418e14;     // m^3/s^2
inline constexpr double kEarthRadius = 6.371e6;        // m
inline constexpr double kPropagationSpeed = 2.997e8;   // m/s

/// Constellation description in a flat area-local frame centred on the UE
/// area. Plane 0 carries the serving satellite, planes 1..K-1 the targets.
struct OrbitalConfig {
  double altitude_m = 550e3;
  std::size_t num_planes = 3;
  std::size_t sats_per_plane = 1;
  /// One unit direction of motion per plane.
  std::vector<Vec3> plane_velocity_dirs;
  /// Position of satellite 0 of each plane at slot 0. Further satellites of
  /// a plane trail it along the track at equal arc spacing.
  std::vector<Vec3> initial_positions;
  double slot_duration_s = 0.3;

  double orbital_period_s() const;
  /// Along-track distance between neighbouring satellites of one plane.
  double arc_spacing_m() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ConstellationState {
  // Indexed [plane][sat].
  std::vector<std::vector<Vec3>> positions;
  std::vector<std::vector<Vec3>> velocities;
  long slot_index = 0;
};

/// Circular orbital speed at the given altitude. Throws std::domain_error
/// for negative altitudes.
double orbital_speed(double altitude_m);

/// Table-style default geometry: serving plane moves along +y and is overhead
/// at mid-episode, the two targets move diagonally and reach the overhead
/// point at the last slot. Extra planes beyond three are spread on a fan.
OrbitalConfig default_orbital_config(std::size_t num_planes, std::size_t episode_slots,
                                     double slot_duration_s, double altitude_m = 550e3);

ConstellationState initial_state(const OrbitalConfig& config);

/// Straight-line advance of every satellite by steps * tau * velocity,
/// evaluated in closed form from the initial geometry.
ConstellationState propagate(const ConstellationState& state, const OrbitalConfig& config,
                             long steps);

double slant_distance(const Vec3& sat_pos, const Vec3& ue_pos);

/// One-way delay over the given distance. Throws std::domain_error for
/// negative distances.
double propagation_delay(double distance_m);

/// Index of the satellite of `plane` closest to `ue_pos`.
std::size_t nearest_sat(const ConstellationState& state, std::size_t plane, const Vec3& ue_pos);

}  // namespace leoho::orbital
