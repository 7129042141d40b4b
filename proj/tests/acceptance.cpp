// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.

#include <brainbot/brainbot.hpp>
#include <brainbot/cli.hpp>

#include <fmt/core.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace brainbot;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

const Pose kCentre{150.0, 150.0, 0.0};

ArenaConfig open_arena() {
  ArenaConfig a;
  a.wall_mode = WallMode::NONE;
  return a;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::path(BRAINBOT_TEST_TMPDIR) / "acceptance" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Trajectory pure_spin(double sigma_xy) {
  const MotionProgram prog({{Direction::CCW, 3.0, 20.0}});
  return simulate(prog, {}, ModeMap::uniform(1.0, 5.0), open_arena(), {sigma_xy, 0.0, 1}, 0.2, 0.02, kCentre);
}

Outcome pure_spin_eta() {
  AnalysisOptions opt;
  opt.window = 9;
  opt.degree = 3;
  const auto a = analyze(pure_spin(0.03), opt);
  const bool ok = std::abs(a.median_eta - 1.0) <= 0.05 && a.motion_class == MotionClass::PURE_SPIN;
  return {ok, fmt::format("median eta {:.4f}, class {}", a.median_eta, to_string(a.motion_class))};
}

Outcome icr_recovery() {
  const auto tr = pure_spin(0.0);
  const auto a = analyze(tr);
  const Vec2 leg = kCentre.position() + BotGeometry{}.left_rear_leg();
  Vec2 sum;
  std::size_t n = 0;
  double worst_radius = 0.0;
  for (std::size_t k = 0; k < a.icr.size(); ++k) {
    if (!a.icr[k]) continue;
    sum = sum + *a.icr[k];
    ++n;
    const Vec2 r = tr[a.velocity.first_index + k].pose.position();
    worst_radius = std::max(worst_radius, std::abs((r - *a.icr[k]).norm() - 1.45));
  }
  if (n == 0) return {false, "no centre estimates"};
  const Vec2 mean = (1.0 / static_cast<double>(n)) * sum;
  const double err = (mean - leg).norm();
  return {err <= 0.05 && worst_radius <= 0.01,
          fmt::format("mean centre off by {:.2e} cm, worst | |r - r_c| - 1.45 | = {:.2e} cm", err, worst_radius)};
}

Outcome zigzag_oracle() {
  ScanContext ctx;
  ctx.tau_m = 0.0;
  const auto free = scan_optimal_T(0.25, 2.5, 10, ctx);
  double worst = 0.0;
  for (const auto& p : free.curve) worst = std::max(worst, std::abs(p.v_realized / p.v_predicted - 1.0));
  ctx.tau_m = 0.2;
  const auto lagged = scan_optimal_T(0.25, 2.5, 10, ctx);
  double margin = -1e300;
  for (const auto& p : lagged.curve) margin = std::max(margin, p.v_realized / p.v_predicted - 1.0);
  return {worst <= 0.01 && margin <= 0.0,
          fmt::format("lag-free worst rel. error {:.2e}; lagged max realized/predicted - 1 = {:.3f}", worst, margin)};
}

Outcome calibration() {
  const fs::path d = scratch("scan");
  cli::ScanArgs args;
  args.output = (d / "scan.csv").string();
  std::ostringstream out, err;
  if (cli::cmd_scan(args, out, err) != cli::kExitOk) return {false, "scan failed: " + err.str()};
  std::istringstream is(out.str());
  std::string k1, k2;
  double T = 0.0, v = 0.0;
  is >> k1 >> T >> k2 >> v;
  return {std::abs(T - 1.5) <= 0.3 && std::abs(v - 3.5) <= 0.35, fmt::format("T_opt {:.3f} s, v_opt {:.3f} cm/s", T, v)};
}

Outcome ballistic_rmsd() {
  BallisticSpec spec;
  spec.T = 1.5;
  spec.n_segments = 40;
  const auto tr = simulate(encode_ballistic(spec), {}, ModeMap::default_map(), open_arena(), {}, 0.2, 0.02, kCentre);
  const auto curve = rmsd(tr, log_spaced_taus(3.0, 30.0));
  const auto fit = fit_regimes(curve);
  const bool ok = std::abs(fit.slope_short - 1.0) <= 0.05 && std::abs(fit.slope_long - 1.0) <= 0.05;
  return {ok, fmt::format("tau 3-30 s: slopes {:.3f} / {:.3f}, degenerate {}", fit.slope_short, fit.slope_long,
                          fit.degenerate)};
}

Outcome run_tumble_rmsd() {
  std::vector<Trajectory> runs;
  for (std::uint64_t r = 0; r < 12; ++r) {
    RunTumbleSpec spec;
    spec.seed = 1000 + r;
    runs.push_back(simulate(encode_run_and_tumble(spec), {}, ModeMap::default_map(), open_arena(), {}, 0.2, 0.02,
                            kCentre));
  }
  const auto fit = fit_regimes(rmsd(runs, log_spaced_taus(0.02, 20.0)));
  const bool ok = std::abs(fit.slope_short - 1.0) <= 0.1 && std::abs(fit.slope_long - 0.5) <= 0.1 &&
                  fit.tau_star >= 0.4 && fit.tau_star <= 1.5;
  return {ok, fmt::format("slopes {:.3f} / {:.3f}, tau* {:.3f} s", fit.slope_short, fit.slope_long, fit.tau_star)};
}

Outcome savgol_exactness() {
  std::vector<double> p, dp;
  const double h = 0.05;
  for (int i = 0; i < 60; ++i) {
    const double u = 1.0 + h * i;
    p.push_back(2.0 - 0.5 * u + 1.5 * u * u + 0.3 * u * u * u);
    dp.push_back(-0.5 + 3.0 * u + 0.9 * u * u);
  }
  const auto s = smooth(p, 9, 3);
  const auto d = savgol_apply(p, 9, 3, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    worst = std::max(worst, std::abs(s[i] - p[i]) / std::abs(p[i]));
    worst = std::max(worst, std::abs(d[i] / h - dp[i]) / std::abs(dp[i]));
  }
  const auto k = savgol_kernel(5, 2, 0);
  const double ref[] = {-3, 12, 17, 12, -3};
  double kernel_err = 0.0;
  for (int i = 0; i < 5; ++i) kernel_err = std::max(kernel_err, std::abs(k[i] - ref[i] / 35.0));
  return {worst <= 1e-9 && kernel_err <= 1e-14,
          fmt::format("worst rel. error {:.2e}, kernel error {:.2e}", worst, kernel_err)};
}

Trajectory trajectory_of(std::size_t n, double dt, const std::function<Vec2(double)>& f) {
  std::vector<TrajectorySample> s;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const Vec2 p = f(t);
    s.push_back({t, {p.x, p.y, 0.0}});
  }
  return validate_trajectory(std::move(s));
}

Outcome rmsd_identities() {
  const double dt = 0.02;
  const auto taus = log_spaced_taus(dt, 4.0, 10);
  const auto still = rmsd(trajectory_of(500, dt, [](double) { return Vec2{3, 4}; }), taus);
  double still_max = 0.0;
  for (double r : still.rmsd) still_max = std::max(still_max, r);

  const double v = 2.7;
  const auto line = rmsd(trajectory_of(500, dt, [&](double t) { return Vec2{5.0 + v * t * 0.6, -1.0 + v * t * 0.8}; }), taus);
  double line_err = 0.0;
  for (std::size_t k = 0; k < line.size(); ++k) line_err = std::max(line_err, std::abs(line.rmsd[k] - v * line.tau[k]));

  const double R = 4.0, w = 1.7;
  const auto circle = rmsd(trajectory_of(500, dt, [&](double t) { return Vec2{R * std::cos(w * t), R * std::sin(w * t)}; }), taus);
  double circle_err = 0.0;
  for (std::size_t k = 0; k < circle.size(); ++k) {
    circle_err = std::max(circle_err, std::abs(circle.rmsd[k] - 2.0 * R * std::abs(std::sin(w * circle.tau[k] / 2))));
  }

  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  double x = 0.0, y = 0.0;
  const auto walk = trajectory_of(100, 0.1, [&](double) { return Vec2{x += g(rng), y += g(rng)}; });
  std::vector<double> lags;
  for (int l = 1; l < 100; ++l) lags.push_back(0.1 * l);
  const auto c = rmsd(walk, lags);
  double brute_err = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto lag = k + 1;
    long double sum = 0.0L;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < walk.size(); ++i)
      for (std::size_t j = i + 1; j < walk.size(); ++j) {
        if (j - i != lag) continue;
        const long double dx = walk[j].pose.x - walk[i].pose.x, dy = walk[j].pose.y - walk[i].pose.y;
        sum += dx * dx + dy * dy;
        ++pairs;
      }
    brute_err = std::max(brute_err, std::abs(c.rmsd[k] - static_cast<double>(std::sqrt(sum / pairs))));
  }
  const bool ok = still_max == 0.0 && line_err <= 1e-9 && circle_err <= 1e-6 && brute_err <= 1e-10 && c.size() == 99;
  return {ok, fmt::format("stationary {:.1e}, linear {:.1e}, circle {:.1e}, brute force {:.1e}", still_max, line_err,
                          circle_err, brute_err)};
}

Outcome regime_fit_oracle() {
  const auto taus = log_spaced_taus(0.02, 20.0);
  const double tau_b = 0.9;
  RmsdCurve c;
  for (double t : taus) {
    const double lx = std::log10(t / tau_b);
    c.tau.push_back(t);
    c.rmsd.push_back(std::pow(10.0, (lx < 0 ? 1.0 : 0.5) * lx));
    c.n_pairs.push_back(1000);
  }
  const auto fit = fit_regimes(c);
  const double step = 1.0 / 20.0;
  const bool ok = std::abs(fit.slope_short - 1.0) <= 0.01 && std::abs(fit.slope_long - 0.5) <= 0.01 &&
                  std::abs(std::log10(fit.tau_star / tau_b)) <= step + 1e-12;
  return {ok, fmt::format("slopes {:.4f} / {:.4f}, tau* {:.4f} s", fit.slope_short, fit.slope_long, fit.tau_star)};
}

Outcome determinism_and_mirror() {
  const fs::path d = scratch("determinism");
  {
    std::ofstream cfg(d / "run.cfg");
    cfg << "noise.sigma_xy = 0.03\nnoise.sigma_phi = 0.01\nseed = 31\n";
  }
  cli::EncodeArgs enc;
  enc.kind = cli::EncodeArgs::Kind::RunTumble;
  enc.runtumble.seed = 31;
  enc.output = (d / "rt.prog").string();
  std::ostringstream o, e;
  if (cli::cmd_encode(enc, o, e) != cli::kExitOk) return {false, "encode failed"};
  for (const char* name : {"a.csv", "b.csv"}) {
    if (cli::cmd_simulate({(d / "run.cfg").string(), enc.output, (d / name).string()}, o, e) != cli::kExitOk) {
      return {false, "simulate failed: " + e.str()};
    }
  }
  const bool identical = slurp(d / "a.csv") == slurp(d / "b.csv");

  RunTumbleSpec spec;
  spec.seed = 31;
  const auto prog = encode_run_and_tumble(spec);
  const Pose start{150.0, 150.0, 0.4};
  const auto a = simulate(prog, {}, ModeMap::default_map(), open_arena(), {}, 0.2, 0.02, start);
  const auto b = simulate(prog.mirrored(), {}, ModeMap::default_map(), open_arena(), {}, 0.2, 0.02, start);
  const Vec2 axis{std::cos(start.phi), std::sin(start.phi)};
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec2 r = a[i].pose.position() - start.position();
    const Vec2 m = start.position() + (2.0 * dot(r, axis)) * axis - r;
    worst = std::max(worst, (b[i].pose.position() - m).norm());
  }
  return {identical && worst <= 1e-9,
          fmt::format("outputs identical: {}, worst mirror deviation {:.2e} cm", identical ? "yes" : "no", worst)};
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"pure-spin eta", pure_spin_eta},
      {"centre-of-rotation recovery", icr_recovery},
      {"zigzag speed vs closed form", zigzag_oracle},
      {"calibrated optimum", calibration},
      {"ballistic RMSD slope", ballistic_rmsd},
      {"run-and-tumble RMSD regimes", run_tumble_rmsd},
      {"Savitzky-Golay exactness", savgol_exactness},
      {"RMSD identities", rmsd_identities},
      {"regime-fit oracle", regime_fit_oracle},
      {"determinism and mirror symmetry", determinism_and_mirror},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome r;
    try {
      r = check();
    } catch (const std::exception& ex) {
      r = {false, std::string("exception: ") + ex.what()};
    }
    if (!r.pass) ++failed;
    fmt::print("{} criterion {:2d} ({}): {}\n", r.pass ? "PASS" : "FAIL", index, name, r.detail);
  }
  fmt::print("{} of {} criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
