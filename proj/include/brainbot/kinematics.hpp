#pragma once

// Forward kinematics of spontaneous brainbot motion.
//
// A motor command drives a signed "drive rate" s(t) (rad/s) that follows the
// command target with a first-order lag. The body then moves rigidly:
//
//   * rotation rate          omega = eta * s
//   * centre speed           |v|   = |s| * l_leg
//
// so the noiseless motion always satisfies eta = |omega| l_leg / |v| exactly.
// For eta = 1 this is pure rotation about the rear leg on the inner side of
// the turn. For 0 < eta < 1 the rear-leg rotation is superposed with a
// body-forward translation; the combined rigid motion is a rotation about a
// body-fixed pivot further out on the same side, at distance l_leg / eta.
// For eta > 1 the pivot is pulled along the rear-leg bearing towards the
// centre (distance l_leg / eta). For eta = 0 the body translates forward.
//
// Because the pivot is body-fixed and independent of |s|, each integration
// piece is an exact rotation by eta * integral(s dt); the lagged drive rate is
// integrated in closed form. Segment boundaries and drive-rate sign changes
// split integration pieces, so results do not depend on dt.

#include <brainbot/core.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace brainbot {

/// Spontaneous-motion parameters for one control point (V_E, alpha_leg).
/// Stored for the counter-clockwise sense; see for_direction().
struct ModeParams {
  double eta_target = 1.0;
  double omega_max = 0.0;  // rad/s, signed: > 0 CCW, < 0 CW
  Vec2 icr_offset;         // body frame, cm: centre of the rotation part

  /// Mirror into the given spin sense (CW flips omega and the offset's y).
  ModeParams for_direction(Direction d) const {
    ModeParams m = *this;
    const double mag = std::abs(omega_max);
    if (d == Direction::CW) {
      m.omega_max = -mag;
      m.icr_offset.y = -std::abs(icr_offset.y);
    } else {
      m.omega_max = mag;
      m.icr_offset.y = std::abs(icr_offset.y);
    }
    return m;
  }
};

/// Body-frame rotation centre of the rotation part of the motion, CCW sense.
inline Vec2 rotation_part_offset(double eta, const BotGeometry& g) {
  const Vec2 leg = g.left_rear_leg();
  if (eta > 1.0) return (1.0 / eta) * leg;
  return leg;
}

/// Body-frame pivot of the complete rigid motion for the CCW sense (the
/// instantaneous centre of rotation including the forward translation).
/// Undefined for eta = 0, where the motion is a pure translation.
inline Vec2 effective_pivot(double eta, const BotGeometry& g) {
  if (!(eta > 0.0)) throw InvalidArgument("effective_pivot: eta must be positive");
  const Vec2 leg = g.left_rear_leg();
  if (eta > 1.0) return (1.0 / eta) * leg;
  const double radius = g.l_leg / eta;
  return {leg.x, std::sqrt(radius * radius - leg.x * leg.x)};
}

// ---------------------------------------------------------------------------
// Empirical (V_E, alpha_leg) -> mode map
// ---------------------------------------------------------------------------

/// Rectilinear grid of eta and drive-rate magnitude over effective voltage and
/// leg tilt, interpolated bilinearly. Rows follow v_eff, columns alpha_leg.
struct ModeMap {
  std::vector<double> v_eff;      // volts, strictly increasing
  std::vector<double> alpha_leg;  // degrees, strictly increasing
  std::vector<double> eta;        // row-major, v_eff.size() x alpha_leg.size()
  std::vector<double> omega_max;  // rad/s magnitudes, same layout

  double eta_at(std::size_t i, std::size_t j) const { return eta[i * alpha_leg.size() + j]; }
  double omega_at(std::size_t i, std::size_t j) const { return omega_max[i * alpha_leg.size() + j]; }

  void validate() const {
    if (v_eff.empty() || alpha_leg.empty()) throw InvalidArgument("mode map: empty axis");
    const std::size_t cells = v_eff.size() * alpha_leg.size();
    if (eta.size() != cells || omega_max.size() != cells) {
      throw InvalidArgument("mode map: table size does not match axes");
    }
    auto increasing = [](const std::vector<double>& a) {
      for (std::size_t i = 1; i < a.size(); ++i)
        if (!(a[i] > a[i - 1])) return false;
      return true;
    };
    if (!increasing(v_eff) || !increasing(alpha_leg)) throw InvalidArgument("mode map: axes must be strictly increasing");
    for (std::size_t k = 0; k < cells; ++k) {
      if (!std::isfinite(eta[k]) || eta[k] < 0.0) throw InvalidArgument("mode map: eta must be finite and >= 0");
      if (!std::isfinite(omega_max[k]) || omega_max[k] < 0.0) {
        throw InvalidArgument("mode map: omega_max must be finite and >= 0");
      }
    }
  }

  /// Single mode over the whole validated control range.
  static ModeMap uniform(double eta_value, double omega_value) {
    return ModeMap{{0.0, kMaxEffectiveVoltage},
                   {5.0, 25.0},
                   std::vector<double>(4, eta_value),
                   std::vector<double>(4, omega_value)};
  }

  /// Shipped illustrative map. Eta falls with voltage at every tilt; low tilt
  /// tends to pure spin or pure translation, higher tilt to mixed motion.
  /// Drive rates at (3.0 V, 15 deg) are calibrated so that the alternating
  /// CW/CCW gait peaks near 3.5 cm/s at T near 1.5 s with tau_m = 0.2 s.
  static ModeMap default_map() {
    ModeMap m;
    m.v_eff = {1.5, 1.875, 2.25, 2.625, 3.0};
    m.alpha_leg = {5.0, 10.0, 15.0, 20.0, 25.0};
    // clang-format off
    m.eta = {
        // 5     10    15    20    25   deg
        1.00, 1.00, 1.00, 0.98, 0.95,   // 1.5 V
        0.90, 0.88, 0.85, 0.82, 0.80,   // 1.875 V
        0.55, 0.62, 0.65, 0.68, 0.70,   // 2.25 V
        0.20, 0.40, 0.50, 0.58, 0.62,   // 2.625 V
        0.05, 0.20, 0.35, 0.45, 0.50,   // 3.0 V
    };
    m.omega_max = {
        1.60, 1.60, 1.60, 1.60, 1.60,
        2.00, 2.00, 2.00, 2.00, 2.00,
        2.40, 2.40, 2.40, 2.40, 2.40,
        2.90, 2.90, 2.90, 2.90, 2.90,
        3.40, 3.40, 3.40, 3.40, 3.40,
    };
    // clang-format on
    return m;
  }
};

namespace detail {

/// Bracketing interval and weight of `v` on a strictly increasing axis.
inline std::optional<std::pair<std::size_t, double>> locate(const std::vector<double>& axis, double v) {
  if (axis.size() == 1) {
    if (v == axis[0]) return std::pair<std::size_t, double>{0, 0.0};
    return std::nullopt;
  }
  if (v < axis.front() || v > axis.back()) return std::nullopt;
  std::size_t i = 0;
  while (i + 2 < axis.size() && v > axis[i + 1]) ++i;
  return std::pair<std::size_t, double>{i, (v - axis[i]) / (axis[i + 1] - axis[i])};
}

}  // namespace detail

/// Bilinear lookup of the CCW-sense mode for a control point.
inline ModeParams mode_from_controls(double v_eff, double alpha_leg, const ModeMap& table,
                                     const BotGeometry& geometry = {}) {
  if (!(v_eff >= 0.0 && v_eff <= kMaxEffectiveVoltage)) throw InvalidArgument("v_eff outside [0, 3] V");
  if (!(alpha_leg >= 5.0 && alpha_leg <= 25.0)) throw InvalidArgument("alpha_leg outside [5, 25] degrees");
  table.validate();
  const auto vi = detail::locate(table.v_eff, v_eff);
  const auto aj = detail::locate(table.alpha_leg, alpha_leg);
  if (!vi || !aj) throw OutOfRange("control point outside the mode map grid");

  const auto [i, u] = *vi;
  const auto [j, w] = *aj;
  const std::size_t i1 = table.v_eff.size() > 1 ? i + 1 : i;
  const std::size_t j1 = table.alpha_leg.size() > 1 ? j + 1 : j;
  auto blend = [&](auto at) {
    return (1 - u) * (1 - w) * at(i, j) + (1 - u) * w * at(i, j1) + u * (1 - w) * at(i1, j) + u * w * at(i1, j1);
  };
  ModeParams m;
  m.eta_target = blend([&](std::size_t a, std::size_t b) { return table.eta_at(a, b); });
  m.omega_max = blend([&](std::size_t a, std::size_t b) { return table.omega_at(a, b); });
  m.icr_offset = rotation_part_offset(m.eta_target, geometry);
  return m;
}

// ---------------------------------------------------------------------------
// Elementary kinematics
// ---------------------------------------------------------------------------

/// Planar v = omega z x (r - r_c).
inline Vec2 icr_velocity(const Pose& pose, double omega, Vec2 r_c) {
  return {-omega * (pose.y - r_c.y), omega * (pose.x - r_c.x)};
}

/// First-order approach of the drive rate towards its target over dt.
inline double motor_response(double omega, double target, double dt, double tau_m) {
  if (!(tau_m > 0.0)) throw InvalidArgument("motor_response: tau_m must be positive");
  if (dt < 0.0) throw InvalidArgument("motor_response: dt must be non-negative");
  return target + (omega - target) * std::exp(-dt / tau_m);
}

struct MotorState {
  double omega = 0.0;         // current signed drive rate, rad/s
  double target_omega = 0.0;  // commanded drive rate, rad/s
};

enum class WallMode { REFLECT, NONE };

struct ArenaConfig {
  double width = 300.0;   // cm
  double height = 300.0;  // cm
  WallMode wall_mode = WallMode::REFLECT;

  void validate() const {
    if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("arena: width and height must be positive");
  }
  bool contains(Vec2 p) const { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; }
};

struct NoiseConfig {
  double sigma_xy = 0.0;   // cm
  double sigma_phi = 0.0;  // rad
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma_xy >= 0.0) || !(sigma_phi >= 0.0)) throw InvalidArgument("noise: sigmas must be non-negative");
  }
};

/// Clamps the position into the arena and reflects the heading off any wall
/// it has reached while pointing outwards. Vertical walls map theta to
/// pi - theta, horizontal walls map theta to -theta.
inline std::pair<Pose, double> reflect_at_wall(const Pose& pose, double heading, const ArenaConfig& arena) {
  Pose p = pose;
  double h = heading;
  const double c = std::cos(h);
  const double s = std::sin(h);
  if (p.x <= 0.0 || p.x >= arena.width) {
    const bool outwards = p.x <= 0.0 ? c < 0.0 : c > 0.0;
    p.x = std::clamp(p.x, 0.0, arena.width);
    if (outwards) h = kPi - h;
  }
  if (p.y <= 0.0 || p.y >= arena.height) {
    const bool outwards = p.y <= 0.0 ? s < 0.0 : s > 0.0;
    p.y = std::clamp(p.y, 0.0, arena.height);
    if (outwards) h = -h;
  }
  return {p, h};
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// Noiseless integrator of a motion program. Exposed so callers can query the
/// exact pose at arbitrary times (e.g. segment boundaries); simulate() wraps
/// it with sampling, walls and measurement noise.
class Integrator {
 public:
  Integrator(const MotionProgram& program, const BotGeometry& geometry, const ModeMap& mode_map, double tau_m,
             const Pose& initial)
      : geometry_(geometry), tau_m_(tau_m), pose_(initial) {
    geometry.validate();
    if (!(tau_m >= 0.0) || !std::isfinite(tau_m)) throw InvalidArgument("tau_m must be >= 0");
    if (!initial.finite()) throw InvalidArgument("initial pose must be finite");

    ModeParams previous = resting_mode(geometry);
    double start = 0.0;
    for (const auto& cmd : program.segments()) {
      Segment seg;
      seg.start = start;
      seg.end = start + cmd.duration;
      if (cmd.direction == Direction::OFF) {
        seg.mode = previous;
        seg.target = 0.0;
      } else {
        seg.mode = mode_from_controls(cmd.v_eff, geometry.alpha_leg, mode_map, geometry);
        seg.target = std::abs(seg.mode.omega_max) * (cmd.direction == Direction::CW ? -1.0 : 1.0);
        previous = seg.mode;
      }
      segments_.push_back(seg);
      start = seg.end;
    }
    idle_mode_ = previous;
  }

  const Pose& pose() const noexcept { return pose_; }
  double time() const noexcept { return time_; }
  const MotorState& motor() const noexcept { return motor_; }
  double program_end() const { return segments_.empty() ? 0.0 : segments_.back().end; }

  /// Body rotation rate at the current instant.
  double body_omega() const { return current_mode().eta_target * motor_.omega; }

  /// World-frame instantaneous centre of rotation at the current instant, or
  /// nothing when the body is translating or at rest.
  std::optional<Vec2> current_icr() const {
    const ModeParams& m = current_mode();
    if (!(m.eta_target > 0.0) || motor_.omega == 0.0) return std::nullopt;
    Vec2 pivot = effective_pivot(m.eta_target, geometry_);
    if (motor_.omega < 0.0) pivot.y = -pivot.y;
    return pose_.position() + rotate(pivot, pose_.phi);
  }

  /// Overrides the integrated pose (used for wall reflection).
  void set_pose(const Pose& p) { pose_ = p; }

  /// Advances to absolute time `t` (>= current time).
  void advance_to(double t) {
    while (time_ < t) {
      const Segment* seg = active_segment();
      const double end = seg ? std::min(t, seg->end) : t;
      const ModeParams& mode = seg ? seg->mode : idle_mode_;
      const double target = seg ? seg->target : 0.0;
      advance_piece(mode, target, end - time_);
      time_ = end;
    }
  }

 private:
  struct Segment {
    double start = 0.0;
    double end = 0.0;
    double target = 0.0;
    ModeParams mode;
  };

  static ModeParams resting_mode(const BotGeometry& g) {
    ModeParams m;
    m.eta_target = 1.0;
    m.icr_offset = g.left_rear_leg();
    return m;
  }

  const Segment* active_segment() {
    while (cursor_ < segments_.size() && time_ >= segments_[cursor_].end) ++cursor_;
    return cursor_ < segments_.size() ? &segments_[cursor_] : nullptr;
  }

  const ModeParams& current_mode() const {
    std::size_t k = cursor_;
    while (k < segments_.size() && time_ >= segments_[k].end) ++k;
    return k < segments_.size() ? segments_[k].mode : idle_mode_;
  }

  void advance_piece(const ModeParams& mode, double target, double h) {
    motor_.target_omega = target;
    if (tau_m_ == 0.0) {
      motor_.omega = target;
      move(mode, target * h);
      return;
    }
    double s0 = motor_.omega;
    // Split at a sign change of the drive rate: the pivot switches sides there.
    if (s0 * target < 0.0) {
      const double t_zero = tau_m_ * std::log((s0 - target) / (-target));
      if (t_zero < h) {
        move(mode, lag_integral(s0, target, t_zero));
        motor_.omega = 0.0;
        s0 = 0.0;
        h -= t_zero;
      }
    }
    move(mode, lag_integral(s0, target, h));
    motor_.omega = motor_response(s0, target, h, tau_m_);
  }

  double lag_integral(double s0, double target, double h) const {
    return target * h + (s0 - target) * tau_m_ * -std::expm1(-h / tau_m_);
  }

  /// Rigid displacement for a drive-rate integral `drive` (rad) whose sign is
  /// the spin sense of the piece.
  void move(const ModeParams& mode, double drive) {
    if (drive == 0.0) return;
    const double eta = mode.eta_target;
    if (!(eta > 0.0)) {
      const double dist = geometry_.l_leg * std::abs(drive);
      pose_.x += dist * std::cos(pose_.phi);
      pose_.y += dist * std::sin(pose_.phi);
      return;
    }
    Vec2 pivot = effective_pivot(eta, geometry_);
    if (drive < 0.0) pivot.y = -pivot.y;
    const double angle = eta * drive;
    const Vec2 r = pose_.position();
    const Vec2 centre = r + rotate(pivot, pose_.phi);
    const Vec2 moved = centre + rotate(r - centre, angle);
    pose_.x = moved.x;
    pose_.y = moved.y;
    pose_.phi += angle;
  }

  BotGeometry geometry_;
  double tau_m_;
  Pose pose_;
  double time_ = 0.0;
  MotorState motor_;
  std::vector<Segment> segments_;
  std::size_t cursor_ = 0;
  ModeParams idle_mode_;
};

/// Simulates a program and returns the recorded trajectory sampled at dt,
/// covering [0, total duration]. Noise perturbs only the recorded poses.
inline Trajectory simulate(const MotionProgram& program, const BotGeometry& geometry, const ModeMap& mode_map,
                           const ArenaConfig& arena, const NoiseConfig& noise, double tau_m, double dt,
                           const Pose& initial) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("simulate: dt must be positive");
  arena.validate();
  noise.validate();
  if (!arena.contains(initial.position())) throw InvalidArgument("simulate: initial pose outside arena");

  Integrator integrator(program, geometry, mode_map, tau_m, initial);
  const auto steps = static_cast<std::size_t>(std::floor(program.total_duration() / dt + 1e-9));

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto record = [&](double t, Pose p) {
    if (noise.sigma_xy > 0.0) {
      p.x += noise.sigma_xy * gauss(rng);
      p.y += noise.sigma_xy * gauss(rng);
    }
    if (noise.sigma_phi > 0.0) p.phi += noise.sigma_phi * gauss(rng);
    return TrajectorySample{t, p};
  };

  std::vector<TrajectorySample> samples;
  samples.reserve(steps + 1);
  samples.push_back(record(0.0, integrator.pose()));
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    integrator.advance_to(t);
    if (arena.wall_mode == WallMode::REFLECT && !arena.contains(integrator.pose().position())) {
      const Pose cur = integrator.pose();
      auto [clamped, heading] = reflect_at_wall(cur, cur.phi, arena);
      // Keep the stored orientation on the branch nearest the old one.
      clamped.phi = cur.phi + wrap_angle(heading - cur.phi);
      integrator.set_pose(clamped);
    }
    samples.push_back(record(t, integrator.pose()));
  }
  return validate_trajectory(std::move(samples));
}

}  // namespace brainbot
