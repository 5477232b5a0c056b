#include "qnoma/channel.hpp"

#include <cmath>
#include <string>

#include "qnoma/errors.hpp"

namespace qnoma::channel {

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double distance_to_origin(const Vec2& p) { return std::hypot(p.x, p.y); }

void CellGeometry::validate() const {
  if (!(radius_m > min_distance_m && min_distance_m > 0.0)) {
    throw ConfigError("cell geometry requires radius_m > min_distance_m > 0 (got " +
                      std::to_string(radius_m) + ", " + std::to_string(min_distance_m) + ")");
  }
}

void NoiseConfig::validate() const {
  if (!(psd_dbm_hz < 0.0)) {
    throw ConfigError("noise.psd_dbm_hz must be negative");
  }
}

Vec2 random_annulus_point(const CellGeometry& geom, Rng& rng) {
  // Area-uniform radius: r = sqrt(u * (R^2 - r0^2) + r0^2).
  double r0sq = geom.min_distance_m * geom.min_distance_m;
  double rsq = rng.uniform() * (geom.radius_m * geom.radius_m - r0sq) + r0sq;
  double r = std::sqrt(rsq);
  double theta = rng.uniform() * 2.0 * M_PI;
  return {r * std::cos(theta), r * std::sin(theta)};
}

std::vector<UserState> init_users(int n_users, const CellGeometry& geom,
                                  double speed_mps, Rng& rng) {
  geom.validate();
  std::vector<UserState> users;
  users.reserve(static_cast<std::size_t>(n_users));
  for (int u = 0; u < n_users; ++u) {
    UserState s;
    s.user_id = u;
    s.position = random_annulus_point(geom, rng);
    s.waypoint = random_annulus_point(geom, rng);
    s.speed_mps = speed_mps;
    users.push_back(s);
  }
  return users;
}

namespace {

// Pull a point back into the annulus along the ray from the origin.
Vec2 clamp_to_annulus(const Vec2& p, const CellGeometry& geom) {
  double d = distance_to_origin(p);
  if (d >= geom.min_distance_m && d <= geom.radius_m) return p;
  if (d < 1e-12) return {geom.min_distance_m, 0.0};
  double target = d < geom.min_distance_m ? geom.min_distance_m : geom.radius_m;
  double scale = target / d;
  return {p.x * scale, p.y * scale};
}

}  // namespace

void advance_mobility(std::vector<UserState>& users, const CellGeometry& geom,
                      double dt_s, Rng& rng) {
  geom.validate();
  if (!(dt_s > 0.0)) throw ConfigError("mobility step dt must be positive");
  for (auto& u : users) {
    double step = u.speed_mps * dt_s;
    if (step <= 0.0) continue;
    double remaining = distance(u.position, u.waypoint);
    if (remaining <= step) {
      u.position = u.waypoint;
      u.waypoint = random_annulus_point(geom, rng);
    } else {
      double f = step / remaining;
      u.position.x += (u.waypoint.x - u.position.x) * f;
      u.position.y += (u.waypoint.y - u.position.y) * f;
    }
    u.position = clamp_to_annulus(u.position, geom);
  }
}

double path_loss(double distance_m, const PathLossConfig& cfg, double min_distance_m) {
  if (distance_m < min_distance_m * (1.0 - 1e-12)) {
    throw SimError("geometry violation: distance " + std::to_string(distance_m) +
                   " m below minimum " + std::to_string(min_distance_m) + " m");
  }
  double gain_db = cfg.pl0_db - 10.0 * cfg.exponent * std::log10(distance_m);
  return std::pow(10.0, gain_db / 10.0);
}

double sample_fading(Rng& rng) { return rng.exponential(); }

double fading_at(std::uint64_t seed, int slot, int user_id) {
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(slot),
                   static_cast<std::uint64_t>(user_id)));
  return sample_fading(rng);
}

double noise_power(double bandwidth_hz, const NoiseConfig& cfg) {
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth must be positive");
  double dbm = cfg.psd_dbm_hz + cfg.noise_figure_db + 10.0 * std::log10(bandwidth_hz);
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

ChannelSample sample_channel(std::uint64_t seed, int slot, const UserState& user,
                             const PathLossConfig& plc, const CellGeometry& geom) {
  ChannelSample s;
  s.user_id = user.user_id;
  s.slot = slot;
  s.path_loss_lin = path_loss(distance_to_origin(user.position), plc, geom.min_distance_m);
  s.fading_lin = fading_at(seed, slot, user.user_id);
  s.gain_lin = s.path_loss_lin * s.fading_lin;
  return s;
}

}  // namespace qnoma::channel
