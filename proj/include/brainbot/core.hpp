#pragma once

// Domain types shared by every brainbot module.
//
// Units are fixed across the library: centimetres, seconds, radians.
// Degrees only appear at configuration boundaries (leg tilt).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace brainbot {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Raised by validate_trajectory; carries the offending sample index.
class ValidationError : public std::runtime_error {
 public:
  enum class Kind { TooFewSamples, NonFinite, NegativeTime, NonMonotonic, NonUniformSpacing };

  ValidationError(Kind kind, std::size_t index, const std::string& what)
      : std::runtime_error(what), kind_(kind), index_(index) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t index() const noexcept { return index_; }

 private:
  Kind kind_;
  std::size_t index_;
};

// ---------------------------------------------------------------------------
// Plane vectors
// ---------------------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;

  double norm() const { return std::hypot(x, y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Counter-clockwise rotation of `v` by `angle`.
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// ---------------------------------------------------------------------------
// Pose and trajectories
// ---------------------------------------------------------------------------

/// Ellipse-centre position (cm) and major-axis orientation (rad, unwrapped).
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;

  Vec2 position() const { return {x, y}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(phi); }

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct TrajectorySample {
  double t = 0.0;
  Pose pose;

  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

/// Maps an angle into (-pi, pi]. Throws InvalidArgument on non-finite input.
inline double wrap_angle(double phi) {
  if (!std::isfinite(phi)) throw InvalidArgument("wrap_angle: non-finite angle");
  double r = std::remainder(phi, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

class Trajectory;
Trajectory validate_trajectory(std::vector<TrajectorySample> raw);

/// Uniformly sampled, validated time series of poses.
///
/// Only validate_trajectory constructs one, so every instance satisfies:
/// at least two samples, strictly increasing timestamps whose spacing is
/// within 1e-6 s of dt(), and an unwrapped orientation (consecutive phi
/// values differ by at most pi).
class Trajectory {
 public:
  const std::vector<TrajectorySample>& samples() const noexcept { return samples_; }
  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const TrajectorySample& operator[](std::size_t i) const { return samples_[i]; }
  const TrajectorySample& front() const { return samples_.front(); }
  const TrajectorySample& back() const { return samples_.back(); }
  double duration() const { return samples_.back().t - samples_.front().t; }

  std::vector<double> times() const { return column([](const TrajectorySample& s) { return s.t; }); }
  std::vector<double> xs() const { return column([](const TrajectorySample& s) { return s.pose.x; }); }
  std::vector<double> ys() const { return column([](const TrajectorySample& s) { return s.pose.y; }); }
  std::vector<double> phis() const { return column([](const TrajectorySample& s) { return s.pose.phi; }); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  Trajectory(std::vector<TrajectorySample> samples, double dt) : samples_(std::move(samples)), dt_(dt) {}

  template <typename F>
  std::vector<double> column(F f) const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(f(s));
    return out;
  }

  std::vector<TrajectorySample> samples_;
  double dt_ = 0.0;

  friend Trajectory validate_trajectory(std::vector<TrajectorySample> raw);
};

inline constexpr double kSpacingTolerance = 1e-6;  // seconds

/// Checks ordering and uniform spacing, unwraps phi, and infers dt from the
/// median spacing so one corrupt interval cannot skew it.
inline Trajectory validate_trajectory(std::vector<TrajectorySample> raw) {
  using Kind = ValidationError::Kind;
  const std::size_t n = raw.size();
  if (n < 2) {
    throw ValidationError(Kind::TooFewSamples, n, "trajectory needs at least 2 samples, got " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(raw[i].t) || !raw[i].pose.finite()) {
      throw ValidationError(Kind::NonFinite, i, "non-finite value at sample " + std::to_string(i));
    }
    if (raw[i].t < 0.0) {
      throw ValidationError(Kind::NegativeTime, i, "negative timestamp at sample " + std::to_string(i));
    }
    if (i > 0 && raw[i].t <= raw[i - 1].t) {
      throw ValidationError(Kind::NonMonotonic, i, "non-monotonic timestamp at sample " + std::to_string(i));
    }
  }

  std::vector<double> spacing(n - 1);
  for (std::size_t i = 1; i < n; ++i) spacing[i - 1] = raw[i].t - raw[i - 1].t;
  std::vector<double> sorted = spacing;
  const std::size_t mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
  double dt = sorted[mid];
  if (sorted.size() % 2 == 0) {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + mid);
    dt = 0.5 * (dt + lower);
  }
  for (std::size_t i = 0; i < spacing.size(); ++i) {
    if (std::abs(spacing[i] - dt) > kSpacingTolerance) {
      throw ValidationError(Kind::NonUniformSpacing, i + 1,
                            "sampling interval before sample " + std::to_string(i + 1) + " deviates from dt");
    }
  }

  // Only whole turns are added, so an already-unwrapped series is untouched.
  double offset = 0.0;
  double prev_raw = raw[0].pose.phi;
  for (std::size_t i = 1; i < n; ++i) {
    const double cur_raw = raw[i].pose.phi;
    const double jump = cur_raw - prev_raw;
    offset += kTwoPi * std::round(-jump / kTwoPi);
    prev_raw = cur_raw;
    raw[i].pose.phi = cur_raw + offset;
  }
  return Trajectory(std::move(raw), dt);
}

// ---------------------------------------------------------------------------
// Robot description and motor programs
// ---------------------------------------------------------------------------

/// Elliptical body with paired inclined legs. Defaults describe the 5.5 cm x
/// 3 cm body whose rear legs sit 1.45 cm from the geometric centre.
struct BotGeometry {
  double semi_major = 2.75;  // cm
  double semi_minor = 1.5;   // cm
  double l_leg = 1.45;       // cm, centre to rear leg
  double alpha_leg = 15.0;   // degrees
  int n_leg_pairs = 5;

  /// Lateral offset of each rear leg from the major axis.
  double rear_leg_half_track() const { return 0.5 * semi_minor; }

  /// Body-frame position of the rear leg on the left (+y) side.
  Vec2 left_rear_leg() const {
    const double w = rear_leg_half_track();
    return {-std::sqrt(l_leg * l_leg - w * w), w};
  }
  Vec2 right_rear_leg() const {
    const Vec2 l = left_rear_leg();
    return {l.x, -l.y};
  }

  void validate() const {
    if (!(semi_minor > 0.0) || !(semi_major > semi_minor)) {
      throw InvalidArgument("geometry: require semi_major > semi_minor > 0");
    }
    if (!(l_leg > 0.0) || !(l_leg < semi_major)) throw InvalidArgument("geometry: require 0 < l_leg < semi_major");
    if (!(l_leg > rear_leg_half_track())) throw InvalidArgument("geometry: require l_leg > semi_minor / 2");
    if (!(alpha_leg >= 5.0 && alpha_leg <= 25.0)) throw InvalidArgument("geometry: alpha_leg outside [5, 25] degrees");
    if (n_leg_pairs < 1) throw InvalidArgument("geometry: n_leg_pairs must be positive");
  }

  friend bool operator==(const BotGeometry&, const BotGeometry&) = default;
};

enum class Direction { CW, CCW, OFF };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::CW: return "CW";
    case Direction::CCW: return "CCW";
    case Direction::OFF: return "OFF";
  }
  return "?";
}

inline Direction flipped(Direction d) {
  if (d == Direction::CW) return Direction::CCW;
  if (d == Direction::CCW) return Direction::CW;
  return d;
}

inline constexpr double kMaxEffectiveVoltage = 3.0;

struct MotorCommand {
  Direction direction = Direction::OFF;
  double v_eff = 0.0;     // volts
  double duration = 0.0;  // seconds

  void validate() const {
    if (!(v_eff >= 0.0 && v_eff <= kMaxEffectiveVoltage)) throw InvalidArgument("motor command: v_eff outside [0, 3] V");
    if (!std::isfinite(duration) || !(duration > 0.0)) throw InvalidArgument("motor command: duration must be positive");
  }

  friend bool operator==(const MotorCommand&, const MotorCommand&) = default;
};

class MotionProgram {
 public:
  explicit MotionProgram(std::vector<MotorCommand> segments, std::uint64_t seed = 0)
      : segments_(std::move(segments)), seed_(seed) {
    if (segments_.empty()) throw InvalidArgument("motion program is empty");
    for (const auto& s : segments_) s.validate();
  }

  const std::vector<MotorCommand>& segments() const noexcept { return segments_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return segments_.size(); }

  double total_duration() const {
    double sum = 0.0;
    for (const auto& s : segments_) sum += s.duration;
    return sum;
  }

  /// Same program with every CW/CCW swapped.
  MotionProgram mirrored() const {
    auto segs = segments_;
    for (auto& s : segs) s.direction = flipped(s.direction);
    return MotionProgram(std::move(segs), seed_);
  }

  friend bool operator==(const MotionProgram&, const MotionProgram&) = default;

 private:
  std::vector<MotorCommand> segments_;
  std::uint64_t seed_ = 0;
};

}  // namespace brainbot
