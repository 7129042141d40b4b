#pragma once

// Motion-program encoders for ballistic and run-and-tumble gaits, the
// closed-form zigzag mean speed, and a simulated scan over rotation duration.

#include <brainbot/core.hpp>
#include <brainbot/kinematics.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace brainbot {

struct BallisticSpec {
  double T = 1.5;  // seconds per rotation
  std::size_t n_segments = 10;
  double v_eff = 3.0;
  double alpha_chord = kPi;  // only used by the speed predictor
  bool start_ccw = false;

  void validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("ballistic: T must be positive");
    if (n_segments == 0) throw InvalidArgument("ballistic: program would be empty (n_segments = 0)");
    if (!(v_eff >= 0.0 && v_eff <= kMaxEffectiveVoltage)) throw InvalidArgument("ballistic: v_eff outside [0, 3] V");
    if (!(alpha_chord > 0.0 && alpha_chord <= kPi)) throw InvalidArgument("ballistic: alpha_chord outside (0, pi]");
  }
};

struct RunTumbleSpec {
  double T_min = 0.4;
  double T_max = 1.0;
  double total_time = 60.0;
  double v_eff = 2.0;  // spin-leaning drive: heading decorrelates within ~1 s
  std::uint64_t seed = 0;

  void validate() const {
    if (!(T_min > 0.0)) throw InvalidArgument("run-and-tumble: T_min must be positive");
    if (!(T_min <= T_max)) throw InvalidArgument("run-and-tumble: T_min > T_max");
    if (!std::isfinite(T_max)) throw InvalidArgument("run-and-tumble: T_max must be finite");
    if (!(total_time > 0.0) || !std::isfinite(total_time)) throw InvalidArgument("run-and-tumble: total_time must be positive");
    if (total_time < T_min) throw InvalidArgument("run-and-tumble: total_time < T_min");
    if (!(v_eff >= 0.0 && v_eff <= kMaxEffectiveVoltage)) throw InvalidArgument("run-and-tumble: v_eff outside [0, 3] V");
  }
};

/// Strictly alternating CW/CCW rotations of equal duration.
inline MotionProgram encode_ballistic(const BallisticSpec& spec) {
  spec.validate();
  std::vector<MotorCommand> segs;
  segs.reserve(spec.n_segments);
  Direction d = spec.start_ccw ? Direction::CCW : Direction::CW;
  for (std::size_t i = 0; i < spec.n_segments; ++i) {
    segs.push_back({d, spec.v_eff, spec.T});
    d = flipped(d);
  }
  return MotionProgram(std::move(segs));
}

/// Random spin sense and uniformly distributed duration per segment. The last
/// segment is truncated so the program lasts exactly total_time.
inline MotionProgram encode_run_and_tumble(const RunTumbleSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> duration(spec.T_min, spec.T_max);

  constexpr double kMergeTolerance = 1e-9;
  std::vector<MotorCommand> segs;
  double elapsed = 0.0;
  while (true) {
    const Direction d = coin(rng) ? Direction::CCW : Direction::CW;
    const double T = spec.T_min == spec.T_max ? spec.T_min : duration(rng);
    const double remaining = spec.total_time - elapsed;
    if (T >= remaining - kMergeTolerance) {
      segs.push_back({d, spec.v_eff, remaining});
      break;
    }
    segs.push_back({d, spec.v_eff, T});
    elapsed += T;
  }
  return MotionProgram(std::move(segs), spec.seed);
}

/// Mean translational speed of an alternating-rotation gait built from arcs
/// of radius R swept at angular speed omega for T seconds, with successive
/// chords meeting at alpha_chord:
///
///   v = (2R / T) |sin(omega T / 2)| sin(alpha_chord / 2)
///
/// This is an upper limit on what a lagging motor realizes.
inline double predict_mean_speed(double R, double omega, double T, double alpha_chord) {
  if (!(R > 0.0)) throw InvalidArgument("predict_mean_speed: R must be positive");
  if (!(omega > 0.0)) throw InvalidArgument("predict_mean_speed: omega must be positive");
  if (!(T > 0.0)) throw InvalidArgument("predict_mean_speed: T must be positive");
  if (!(alpha_chord >= 0.0 && alpha_chord <= kPi)) throw InvalidArgument("predict_mean_speed: alpha_chord outside [0, pi]");
  return 2.0 * R / T * std::abs(std::sin(0.5 * omega * T)) * std::sin(0.5 * alpha_chord);
}

/// Arc geometry of the lag-free zigzag for a given mode.
struct ZigzagGeometry {
  double R = 0.0;            // cm, arc radius of the centre
  double omega = 0.0;        // rad/s, body rotation rate magnitude
  double alpha_chord = 0.0;  // rad
};

inline ZigzagGeometry zigzag_geometry(const ModeParams& mode, const BotGeometry& geometry) {
  if (!(mode.eta_target > 0.0)) throw InvalidArgument("zigzag_geometry: pure translation has no arcs");
  const Vec2 pivot = effective_pivot(mode.eta_target, geometry);
  ZigzagGeometry z;
  z.R = pivot.norm();
  z.omega = mode.eta_target * std::abs(mode.omega_max);
  // Alternating mirror-image pivots: net progress per pair is 4 |pivot.y|
  // sin(theta/2), i.e. sin(alpha_chord / 2) = |pivot.y| / R.
  z.alpha_chord = 2.0 * std::asin(std::min(1.0, std::abs(pivot.y) / z.R));
  return z;
}

struct ScanContext {
  BotGeometry geometry;
  ModeMap mode_map = ModeMap::default_map();
  double tau_m = 0.2;
  double v_eff = 3.0;
  double min_time = 30.0;  // each grid point simulates at least this long
};

struct ScanPoint {
  double T = 0.0;
  double v_realized = 0.0;
  double v_predicted = 0.0;        // lag-free closed form
  double alpha_chord_realized = 0.0;  // from the last two simulated chords
};

struct ScanResult {
  double T_opt = 0.0;
  double v_opt = 0.0;
  std::vector<ScanPoint> curve;
};

/// Realized mean speed of one alternating program: |net displacement| over
/// total time, evaluated at an exact segment-pair boundary.
inline ScanPoint measure_zigzag(double T, const ScanContext& ctx) {
  BallisticSpec spec;
  spec.T = T;
  spec.v_eff = ctx.v_eff;
  spec.n_segments = 2 * static_cast<std::size_t>(std::max(1.0, std::ceil(ctx.min_time / (2.0 * T))));
  const MotionProgram program = encode_ballistic(spec);

  Integrator integrator(program, ctx.geometry, ctx.mode_map, ctx.tau_m, Pose{});
  std::vector<Vec2> corners{integrator.pose().position()};
  for (std::size_t k = 1; k <= spec.n_segments; ++k) {
    integrator.advance_to(static_cast<double>(k) * T);
    corners.push_back(integrator.pose().position());
  }
  const double total = static_cast<double>(spec.n_segments) * T;

  ScanPoint p;
  p.T = T;
  p.v_realized = (corners.back() - corners.front()).norm() / total;
  const ModeParams mode = mode_from_controls(ctx.v_eff, ctx.geometry.alpha_leg, ctx.mode_map, ctx.geometry);
  const ZigzagGeometry z = zigzag_geometry(mode, ctx.geometry);
  p.v_predicted = predict_mean_speed(z.R, z.omega, T, z.alpha_chord);
  const std::size_t n = corners.size();
  const Vec2 c1 = corners[n - 2] - corners[n - 3];
  const Vec2 c2 = corners[n - 1] - corners[n - 2];
  p.alpha_chord_realized = kPi - std::abs(std::atan2(cross(c1, c2), dot(c1, c2)));
  return p;
}

/// Evaluates the realized zigzag speed on a uniform T grid and returns the
/// best grid point. Noise is off; walls are irrelevant to the measurement.
inline ScanResult scan_optimal_T(double T_lo, double T_hi, std::size_t steps, const ScanContext& ctx) {
  if (!(T_lo > 0.0) || !(T_hi > T_lo) || !std::isfinite(T_hi)) throw InvalidArgument("scan: invalid T range");
  if (steps < 3) throw InvalidArgument("scan: need at least 3 grid points");
  ScanResult result;
  for (std::size_t k = 0; k < steps; ++k) {
    const double T = T_lo + (T_hi - T_lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
    result.curve.push_back(measure_zigzag(T, ctx));
    if (result.curve.back().v_realized > result.v_opt) {
      result.v_opt = result.curve.back().v_realized;
      result.T_opt = T;
    }
  }
  return result;
}

}  // namespace brainbot
