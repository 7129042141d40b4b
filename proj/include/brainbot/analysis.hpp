#pragma once

// Trajectory measurement pipeline: Savitzky-Golay smoothing and derivatives,
// instantaneous-centre estimation, the eta spin/translation ratio and its
// classification, root-mean-square displacement, and the two-regime log-log
// fit of an RMSD curve.

#include <brainbot/core.hpp>
#include <brainbot/kinematics.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace brainbot {

// ---------------------------------------------------------------------------
// Savitzky-Golay
// ---------------------------------------------------------------------------

inline void check_savgol(std::size_t window, std::size_t degree, int deriv_order) {
  if (window < 3 || window % 2 == 0) throw InvalidArgument("savgol: window must be odd and >= 3");
  if (degree >= window) throw InvalidArgument("savgol: degree must be smaller than window");
  if (deriv_order < 0 || deriv_order > 1) throw InvalidArgument("savgol: deriv_order must be 0 or 1");
  if (static_cast<std::size_t>(deriv_order) > degree) throw InvalidArgument("savgol: deriv_order exceeds degree");
}

/// Least-squares weights that evaluate the fitted polynomial (deriv_order 0)
/// or its slope per sample (deriv_order 1) at `position` samples from the
/// centre of the stencil.
inline std::vector<double> savgol_weights(std::size_t window, std::size_t degree, int deriv_order, double position) {
  check_savgol(window, degree, deriv_order);
  const auto half = static_cast<double>(window / 2);
  const auto cols = static_cast<Eigen::Index>(degree + 1);
  Eigen::MatrixXd vander(static_cast<Eigen::Index>(window), cols);
  for (Eigen::Index i = 0; i < vander.rows(); ++i) {
    const double u = static_cast<double>(i) - half;
    double p = 1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      vander(i, j) = p;
      p *= u;
    }
  }
  // Row vector that evaluates coefficient j (or its derivative) at position.
  Eigen::VectorXd probe = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (deriv_order == 0) {
      probe(j) = std::pow(position, static_cast<double>(j));
    } else if (j >= 1) {
      probe(j) = static_cast<double>(j) * std::pow(position, static_cast<double>(j - 1));
    }
  }
  const Eigen::MatrixXd gram = vander.transpose() * vander;
  const Eigen::VectorXd z = gram.ldlt().solve(probe);
  const Eigen::VectorXd w = vander * z;
  return {w.data(), w.data() + w.size()};
}

/// Centred convolution weights.
inline std::vector<double> savgol_kernel(std::size_t window, std::size_t degree, int deriv_order) {
  return savgol_weights(window, degree, deriv_order, 0.0);
}

/// Applies the filter to every sample. Samples within half a window of either
/// end use the polynomial fitted to the first (last) full window.
inline std::vector<double> savgol_apply(std::span<const double> series, std::size_t window, std::size_t degree,
                                        int deriv_order) {
  check_savgol(window, degree, deriv_order);
  const std::size_t n = series.size();
  if (n < window) throw InvalidArgument("savgol: series shorter than window");
  const std::size_t half = window / 2;
  std::vector<double> out(n, 0.0);

  auto convolve = [&](const std::vector<double>& w, std::size_t first) {
    double acc = 0.0;
    for (std::size_t k = 0; k < window; ++k) acc += w[k] * series[first + k];
    return acc;
  };

  const auto centre = savgol_kernel(window, degree, deriv_order);
  for (std::size_t i = half; i + half < n; ++i) out[i] = convolve(centre, i - half);
  for (std::size_t i = 0; i < half; ++i) {
    const double offset = static_cast<double>(i) - static_cast<double>(half);
    out[i] = convolve(savgol_weights(window, degree, deriv_order, offset), 0);
    out[n - 1 - i] = convolve(savgol_weights(window, degree, deriv_order, -offset), n - window);
  }
  return out;
}

inline std::vector<double> smooth(std::span<const double> series, std::size_t window, std::size_t degree) {
  return savgol_apply(series, window, degree, 0);
}

// ---------------------------------------------------------------------------
// Velocities, instantaneous centre, eta
// ---------------------------------------------------------------------------

/// Derivatives on the interior samples [first_index, first_index + size()).
struct VelocitySeries {
  std::size_t first_index = 0;
  std::vector<double> t;
  std::vector<double> vx;
  std::vector<double> vy;
  std::vector<double> omega;

  std::size_t size() const noexcept { return t.size(); }
};

/// Savitzky-Golay first derivatives of x, y and phi, scaled by 1/dt. Edge
/// samples (half a window at each end) are dropped.
inline VelocitySeries differentiate(const Trajectory& traj, std::size_t window, std::size_t degree) {
  check_savgol(window, degree, 1);
  if (traj.size() < window) throw InvalidArgument("differentiate: trajectory shorter than window");
  const auto w = savgol_kernel(window, degree, 1);
  const std::size_t half = window / 2;
  const auto xs = traj.xs();
  const auto ys = traj.ys();
  const auto phis = traj.phis();
  const double inv_dt = 1.0 / traj.dt();

  VelocitySeries v;
  v.first_index = half;
  for (std::size_t i = half; i + half < traj.size(); ++i) {
    double dx = 0.0, dy = 0.0, dphi = 0.0;
    for (std::size_t k = 0; k < window; ++k) {
      dx += w[k] * xs[i - half + k];
      dy += w[k] * ys[i - half + k];
      dphi += w[k] * phis[i - half + k];
    }
    v.t.push_back(traj[i].t);
    v.vx.push_back(dx * inv_dt);
    v.vy.push_back(dy * inv_dt);
    v.omega.push_back(dphi * inv_dt);
  }
  return v;
}

class NearZeroRotation : public std::domain_error {
 public:
  NearZeroRotation() : std::domain_error("instantaneous centre at infinity: |omega| below threshold") {}
};

/// Inverts v = omega z x (r - r_c): r_c = (x - v_y / omega, y + v_x / omega).
inline Vec2 estimate_icr(const Pose& pose, Vec2 v, double omega, double eps_omega) {
  if (!(std::abs(omega) >= eps_omega)) throw NearZeroRotation();
  return {pose.x - v.y / omega, pose.y + v.x / omega};
}

/// eta = |omega| l_leg / |v|, or nothing when |v| < eps_v.
inline std::optional<double> compute_eta(Vec2 v, double omega, double l_leg, double eps_v) {
  if (!(l_leg > 0.0)) throw InvalidArgument("compute_eta: l_leg must be positive");
  const double speed = v.norm();
  if (!(speed >= eps_v)) return std::nullopt;
  return std::abs(omega) * l_leg / speed;
}

struct EtaSeries {
  std::vector<double> t;
  std::vector<double> eta;  // 0 where invalid
  std::vector<bool> valid;

  std::size_t size() const noexcept { return t.size(); }
  std::size_t valid_count() const { return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true)); }
};

inline EtaSeries eta_series(const VelocitySeries& v, double l_leg, double eps_v) {
  EtaSeries out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto eta = compute_eta({v.vx[i], v.vy[i]}, v.omega[i], l_leg, eps_v);
    out.t.push_back(v.t[i]);
    out.eta.push_back(eta.value_or(0.0));
    out.valid.push_back(eta.has_value());
  }
  return out;
}

enum class MotionClass { PURE_SPIN, MIXED, TRANSLATION, BACKWARD };

inline const char* to_string(MotionClass c) {
  switch (c) {
    case MotionClass::PURE_SPIN: return "PURE_SPIN";
    case MotionClass::MIXED: return "MIXED";
    case MotionClass::TRANSLATION: return "TRANSLATION";
    case MotionClass::BACKWARD: return "BACKWARD";
  }
  return "?";
}

/// Band edges on the median eta: <= translation -> TRANSLATION,
/// < spin_low -> MIXED, <= spin_high -> PURE_SPIN, else BACKWARD.
struct EtaBands {
  double translation = 0.15;
  double spin_low = 0.85;
  double spin_high = 1.15;

  void validate() const {
    if (!(translation >= 0.0 && translation < spin_low && spin_low <= spin_high)) {
      throw InvalidArgument("eta bands must satisfy 0 <= translation < spin_low <= spin_high");
    }
  }
};

inline double median_valid_eta(const EtaSeries& etas) {
  std::vector<double> vals;
  for (std::size_t i = 0; i < etas.size(); ++i)
    if (etas.valid[i]) vals.push_back(etas.eta[i]);
  if (vals.empty()) throw InvalidArgument("classify: no valid eta samples");
  std::sort(vals.begin(), vals.end());
  const std::size_t m = vals.size() / 2;
  return vals.size() % 2 ? vals[m] : 0.5 * (vals[m - 1] + vals[m]);
}

inline MotionClass classify_value(double median_eta, const EtaBands& bands = {}) {
  bands.validate();
  if (median_eta <= bands.translation) return MotionClass::TRANSLATION;
  if (median_eta < bands.spin_low) return MotionClass::MIXED;
  if (median_eta <= bands.spin_high) return MotionClass::PURE_SPIN;
  return MotionClass::BACKWARD;
}

inline MotionClass classify(const EtaSeries& etas, const EtaBands& bands = {}) {
  return classify_value(median_valid_eta(etas), bands);
}

struct EtaHistogram {
  std::vector<double> edges;  // counts.size() + 1 entries, starting at 0
  std::vector<std::size_t> counts;
  std::size_t n_invalid = 0;
};

/// Pooled histogram of valid eta values with bins [k w, (k+1) w) over [0, max].
inline EtaHistogram eta_histogram(std::span<const EtaSeries> pooled, double bin_width) {
  if (!(bin_width > 0.0)) throw InvalidArgument("eta_histogram: bin width must be positive");
  std::vector<double> vals;
  EtaHistogram h;
  for (const auto& s : pooled) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.valid[i]) {
        vals.push_back(s.eta[i]);
      } else {
        ++h.n_invalid;
      }
    }
  }
  if (vals.empty()) throw InvalidArgument("eta_histogram: no valid eta samples");
  auto bin_of = [&](double v) {
    auto k = static_cast<std::size_t>(std::floor(v / bin_width));
    // Align with the printed edges k * bin_width.
    if (static_cast<double>(k + 1) * bin_width <= v) ++k;
    if (k > 0 && static_cast<double>(k) * bin_width > v) --k;
    return k;
  };
  const double vmax = *std::max_element(vals.begin(), vals.end());
  const std::size_t bins = bin_of(vmax) + 1;
  h.counts.assign(bins, 0);
  for (std::size_t k = 0; k <= bins; ++k) h.edges.push_back(static_cast<double>(k) * bin_width);
  for (double v : vals) ++h.counts[bin_of(v)];
  return h;
}

inline EtaHistogram eta_histogram(const EtaSeries& etas, double bin_width) {
  return eta_histogram(std::span<const EtaSeries>(&etas, 1), bin_width);
}

// ---------------------------------------------------------------------------
// Full per-trajectory pipeline
// ---------------------------------------------------------------------------

struct AnalysisOptions {
  std::size_t window = 9;
  std::size_t degree = 3;
  double l_leg = 1.45;
  double eps_v = 0.05;      // cm/s
  double eps_omega = 0.05;  // rad/s
  EtaBands bands;
};

struct TrajectoryAnalysis {
  VelocitySeries velocity;
  EtaSeries eta;
  std::vector<std::optional<Vec2>> icr;  // aligned with velocity samples
  double median_eta = 0.0;
  MotionClass motion_class = MotionClass::MIXED;
};

/// Smooth positions, differentiate, estimate the centre of rotation and eta
/// per interior sample, and classify by the median valid eta.
inline TrajectoryAnalysis analyze(const Trajectory& traj, const AnalysisOptions& opt = {}) {
  TrajectoryAnalysis a;
  a.velocity = differentiate(traj, opt.window, opt.degree);
  a.eta = eta_series(a.velocity, opt.l_leg, opt.eps_v);
  const auto xs = traj.xs();
  const auto ys = traj.ys();
  const auto sx = smooth(xs, opt.window, opt.degree);
  const auto sy = smooth(ys, opt.window, opt.degree);
  for (std::size_t k = 0; k < a.velocity.size(); ++k) {
    const std::size_t i = a.velocity.first_index + k;
    const double omega = a.velocity.omega[k];
    if (std::abs(omega) >= opt.eps_omega) {
      a.icr.emplace_back(estimate_icr({sx[i], sy[i], traj[i].pose.phi}, {a.velocity.vx[k], a.velocity.vy[k]}, omega,
                                      opt.eps_omega));
    } else {
      a.icr.emplace_back(std::nullopt);
    }
  }
  a.median_eta = median_valid_eta(a.eta);
  a.motion_class = classify_value(a.median_eta, opt.bands);
  return a;
}

// ---------------------------------------------------------------------------
// Root-mean-square displacement
// ---------------------------------------------------------------------------

/// Neumaier compensated sum; keeps accumulation order effects near 1 ulp.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct RmsdCurve {
  std::vector<double> tau;  // s, strictly increasing
  std::vector<double> rmsd;  // cm
  std::vector<std::size_t> n_pairs;

  std::size_t size() const noexcept { return tau.size(); }
};

/// Geometric grid from tau_min to tau_max (inclusive up to rounding).
inline std::vector<double> log_spaced_taus(double tau_min, double tau_max, int per_decade = 20) {
  if (!(tau_min > 0.0) || !(tau_max >= tau_min) || per_decade < 1) throw InvalidArgument("invalid tau grid");
  std::vector<double> taus;
  const double step = 1.0 / per_decade;
  const double span = std::log10(tau_max / tau_min);
  for (int k = 0; static_cast<double>(k) * step <= span + 1e-12; ++k) {
    taus.push_back(tau_min * std::pow(10.0, static_cast<double>(k) * step));
  }
  return taus;
}

/// Time-and-ensemble averaged displacement over all overlapping origins.
/// Each requested tau is rounded to a whole number of samples; duplicate lags
/// collapse and the reported tau is the realized lag.
inline RmsdCurve rmsd(std::span<const Trajectory> ensemble, std::span<const double> taus) {
  if (ensemble.empty()) throw InvalidArgument("rmsd: empty ensemble");
  const double dt = ensemble.front().dt();
  for (const auto& tr : ensemble) {
    if (std::abs(tr.dt() - dt) > 1e-9 * dt) throw InvalidArgument("rmsd: trajectories have different sampling intervals");
  }
  std::vector<std::size_t> lags;
  for (double tau : taus) {
    if (!(tau > 0.0)) throw InvalidArgument("rmsd: tau must be positive");
    const auto lag = static_cast<std::size_t>(std::llround(tau / dt));
    if (lag == 0) throw InvalidArgument("rmsd: tau below the sampling interval");
    lags.push_back(lag);
  }
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());

  RmsdCurve curve;
  for (std::size_t lag : lags) {
    CompensatedSum acc;
    std::size_t pairs = 0;
    for (const auto& tr : ensemble) {
      const auto& s = tr.samples();
      for (std::size_t i = 0; i + lag < s.size(); ++i) {
        const double dx = s[i + lag].pose.x - s[i].pose.x;
        const double dy = s[i + lag].pose.y - s[i].pose.y;
        acc.add(dx * dx + dy * dy);
        ++pairs;
      }
    }
    if (pairs == 0) {
      throw InvalidArgument("rmsd: tau = " + std::to_string(static_cast<double>(lag) * dt) +
                            " s exceeds every trajectory's duration");
    }
    curve.tau.push_back(static_cast<double>(lag) * dt);
    curve.rmsd.push_back(std::sqrt(acc.value() / static_cast<double>(pairs)));
    curve.n_pairs.push_back(pairs);
  }
  return curve;
}

inline RmsdCurve rmsd(const Trajectory& traj, std::span<const double> taus) {
  return rmsd(std::span<const Trajectory>(&traj, 1), taus);
}

// ---------------------------------------------------------------------------
// Two-regime fit
// ---------------------------------------------------------------------------

struct RegimeFit {
  double slope_short = 0.0;
  double slope_long = 0.0;
  double tau_star = 0.0;            // s
  double intercept_short = 0.0;     // log10 RMSD at log10 tau = 0, short line
  double intercept_long = 0.0;      // same, long line
  double residual = 0.0;            // RMS in log10 space
  bool degenerate = false;          // slopes differ by less than the gap
  std::size_t n_points = 0;
};

struct RegimeFitOptions {
  std::size_t min_pairs = 10;
  double degenerate_slope_gap = 0.1;
};

/// Continuous two-segment least-squares fit of log10 RMSD against log10 tau.
/// Every interior grid point with at least three points per side (breakpoint
/// included) is tried as the breakpoint; the lowest residual wins.
inline RegimeFit fit_regimes(const RmsdCurve& curve, const RegimeFitOptions& opt = {}) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.n_pairs[i] < opt.min_pairs) continue;
    if (!(curve.rmsd[i] > 0.0)) throw InvalidArgument("fit_regimes: non-positive RMSD cannot be log-transformed");
    lx.push_back(std::log10(curve.tau[i]));
    ly.push_back(std::log10(curve.rmsd[i]));
  }
  const std::size_t n = lx.size();
  if (n < 6) throw InvalidArgument("fit_regimes: need at least 6 points");
  if (lx.back() - lx.front() < 1.0 - 1e-12) throw InvalidArgument("fit_regimes: tau range spans less than one decade");

  const Eigen::Map<const Eigen::VectorXd> y(ly.data(), static_cast<Eigen::Index>(n));
  RegimeFit best;
  double best_ssr = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k + 2 < n; ++k) {
    const double b = lx[k];
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = lx[i] - b;
      const auto r = static_cast<Eigen::Index>(i);
      design(r, 0) = 1.0;
      design(r, 1) = std::min(d, 0.0);
      design(r, 2) = std::max(d, 0.0);
    }
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(y);
    const double ssr = (design * coef - y).squaredNorm();
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best.slope_short = coef(1);
      best.slope_long = coef(2);
      best.tau_star = std::pow(10.0, b);
      best.intercept_short = coef(0) - coef(1) * b;
      best.intercept_long = coef(0) - coef(2) * b;
    }
  }
  best.n_points = n;
  best.residual = std::sqrt(best_ssr / static_cast<double>(n));
  best.degenerate = std::abs(best.slope_short - best.slope_long) < opt.degenerate_slope_gap;
  return best;
}

}  // namespace brainbot
