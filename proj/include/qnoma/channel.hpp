#ifndef QNOMA_CHANNEL_HPP
#define QNOMA_CHANNEL_HPP

#include <cstdint>
#include <vector>

#include "qnoma/rng.hpp"

namespace qnoma::channel {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Vec2& a, const Vec2& b);
double distance_to_origin(const Vec2& p);

// Base station at the origin; users live in the annulus
// [min_distance_m, radius_m].
struct CellGeometry {
  double radius_m = 500.0;
  double min_distance_m = 10.0;
  void validate() const;
};

struct UserState {
  int user_id = 0;
  Vec2 position;
  Vec2 waypoint;
  double speed_mps = 1.0;
};

struct ChannelSample {
  int user_id = 0;
  int slot = 0;
  double path_loss_lin = 0.0;  // distance-dependent linear power gain
  double fading_lin = 0.0;     // |h|^2, unit mean
  double gain_lin = 0.0;       // path_loss_lin * fading_lin
};

struct NoiseConfig {
  double psd_dbm_hz = -174.0;
  double noise_figure_db = 9.0;
  void validate() const;
};

// Log-distance model: gain_dB(d) = pl0_db - 10 * exponent * log10(d / 1 m).
struct PathLossConfig {
  double pl0_db = -30.0;
  double exponent = 3.5;
};

// Uniform point in the annulus (area-uniform, not radius-uniform).
Vec2 random_annulus_point(const CellGeometry& geom, Rng& rng);

std::vector<UserState> init_users(int n_users, const CellGeometry& geom,
                                  double speed_mps, Rng& rng);

// Random-waypoint step: each user moves toward its waypoint by speed*dt and
// draws a fresh waypoint on arrival. Positions are clamped to the annulus
// (the straight segment between two annulus points can cut inside the inner
// exclusion disc).
void advance_mobility(std::vector<UserState>& users, const CellGeometry& geom,
                      double dt_s, Rng& rng);

// Linear power gain at a given distance. Distances below min_distance_m are a
// geometry violation.
double path_loss(double distance_m, const PathLossConfig& cfg,
                 double min_distance_m);

// |h|^2 of a unit-power Rayleigh envelope: Exponential with mean 1.
double sample_fading(Rng& rng);

// Fading as a pure function of (seed, slot, user): the draw does not depend
// on call order, so runs can be compared across configs slot by slot.
double fading_at(std::uint64_t seed, int slot, int user_id);

// Thermal noise power over a bandwidth, in watts.
double noise_power(double bandwidth_hz, const NoiseConfig& cfg);

ChannelSample sample_channel(std::uint64_t seed, int slot, const UserState& user,
                             const PathLossConfig& plc, const CellGeometry& geom);

}  // namespace qnoma::channel

#endif  // QNOMA_CHANNEL_HPP
