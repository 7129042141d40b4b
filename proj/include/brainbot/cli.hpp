#pragma once

// Command implementations behind the `brainbot` executable. Each command
// returns the process exit status and writes diagnostics to `err`:
//
//   0  success
//   2  bad input file or invalid flags
//   3  bad motion program
//   4  simulation precondition failure

#include <brainbot/analysis.hpp>
#include <brainbot/core.hpp>
#include <brainbot/io.hpp>
#include <brainbot/kinematics.hpp>
#include <brainbot/programs.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace brainbot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitBadProgram = 3;
inline constexpr int kExitPrecondition = 4;

namespace detail {

/// Opens `path` for writing, or returns nullptr and reports.
inline std::unique_ptr<std::ofstream> open_output(const std::string& path, std::ostream& err) {
  auto os = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*os) {
    err << path << ":0: cannot open for writing\n";
    return nullptr;
  }
  return os;
}

inline RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return read_config(path);
}

inline std::vector<Trajectory> load_trajectories(const std::vector<std::string>& paths) {
  std::vector<Trajectory> out;
  for (const auto& p : paths) out.push_back(read_trajectory_csv(p));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;  // empty: built-in defaults
  std::string program;
  std::string output;
};

inline int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = detail::load_config(args.config);
  } catch (const ParseError& e) {
    err << e.what() << '\n';
    return kExitBadInput;
  }
  std::optional<MotionProgram> program;
  try {
    program = read_program(args.program);
  } catch (const ParseError& e) {
    err << e.what() << '\n';
    return kExitBadProgram;
  }
  std::optional<Trajectory> traj;
  try {
    traj = simulate(*program, cfg.geometry, cfg.mode_map, cfg.arena, cfg.noise, cfg.tau_m, cfg.dt, cfg.initial);
  } catch (const std::exception& e) {
    err << (args.config.empty() ? std::string("<defaults>") : args.config) << ":0: simulation failed: " << e.what()
        << '\n';
    return kExitPrecondition;
  }
  auto os = detail::open_output(args.output, err);
  if (!os) return kExitBadInput;
  write_trajectory_csv(*os, *traj);

  const Vec2 net = traj->back().pose.position() - traj->front().pose.position();
  out << "duration " << format_number(traj->duration()) << " s\n"
      << "net_displacement " << format_number(net.norm()) << " cm\n"
      << "mean_speed " << format_number(net.norm() / traj->duration()) << " cm/s\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
  enum class Kind { Ballistic, RunTumble } kind = Kind::Ballistic;
  BallisticSpec ballistic;
  RunTumbleSpec runtumble;
  std::string output;  // empty: write to `out`
};

inline int cmd_encode(const EncodeArgs& args, std::ostream& out, std::ostream& err) {
  std::optional<MotionProgram> program;
  try {
    program = args.kind == EncodeArgs::Kind::Ballistic ? encode_ballistic(args.ballistic)
                                                       : encode_run_and_tumble(args.runtumble);
  } catch (const InvalidArgument& e) {
    err << "encode: " << e.what() << '\n';
    return kExitBadInput;
  }
  if (args.output.empty()) {
    write_program(out, *program);
    return kExitOk;
  }
  auto os = detail::open_output(args.output, err);
  if (!os) return kExitBadInput;
  write_program(*os, *program);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  AnalysisOptions options;
  double bin_width = 0.05;
  std::string out_dir = ".";
};

inline void write_analysis_csv(std::ostream& os, const TrajectoryAnalysis& a) {
  os << "t,vx,vy,omega,eta,icr_x,icr_y,valid\n";
  for (std::size_t k = 0; k < a.velocity.size(); ++k) {
    const bool valid = a.eta.valid[k];
    os << format_number(a.velocity.t[k]) << ',' << format_number(a.velocity.vx[k]) << ','
       << format_number(a.velocity.vy[k]) << ',' << format_number(a.velocity.omega[k]) << ','
       << (valid ? format_number(a.eta.eta[k]) : std::string("nan")) << ',';
    if (a.icr[k]) {
      os << format_number(a.icr[k]->x) << ',' << format_number(a.icr[k]->y);
    } else {
      os << "nan,nan";
    }
    os << ',' << (valid ? 1 : 0) << '\n';
  }
}

inline void write_histogram_csv(std::ostream& os, const EtaHistogram& h) {
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    os << format_number(h.edges[k]) << ',' << format_number(h.edges[k + 1]) << ',' << h.counts[k] << '\n';
  }
}

inline int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  if (args.inputs.empty()) {
    err << "analyze: no trajectory given\n";
    return kExitBadInput;
  }
  try {
    args.options.bands.validate();
    check_savgol(args.options.window, args.options.degree, 1);
    if (!(args.bin_width > 0.0)) throw InvalidArgument("bin width must be positive");
  } catch (const InvalidArgument& e) {
    err << "analyze: " << e.what() << '\n';
    return kExitBadInput;
  }
  const std::filesystem::path dir(args.out_dir);
  std::vector<EtaSeries> pooled;
  for (const auto& path : args.inputs) {
    std::optional<TrajectoryAnalysis> a;
    try {
      a = analyze(read_trajectory_csv(path), args.options);
    } catch (const ParseError& e) {
      err << e.what() << '\n';
      return kExitBadInput;
    } catch (const std::exception& e) {
      err << path << ":0: " << e.what() << '\n';
      return kExitBadInput;
    }
    const auto stem = std::filesystem::path(path).stem().string();
    auto os = detail::open_output((dir / (stem + "_eta.csv")).string(), err);
    if (!os) return kExitBadInput;
    write_analysis_csv(*os, *a);
    out << path << ' ' << to_string(a->motion_class) << " median_eta " << format_number(a->median_eta) << " valid "
        << a->eta.valid_count() << '/' << a->eta.size() << '\n';
    pooled.push_back(std::move(a->eta));
  }
  const EtaHistogram h = eta_histogram(pooled, args.bin_width);
  auto os = detail::open_output((dir / "eta_histogram.csv").string(), err);
  if (!os) return kExitBadInput;
  write_histogram_csv(*os, h);
  out << "histogram_invalid_samples " << h.n_invalid << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RmsdArgs {
  std::vector<std::string> inputs;
  double tau_min = 0.0;  // 0: one sampling interval
  double tau_max = 0.0;  // 0: half the shortest trajectory
  int per_decade = 20;
  std::size_t min_pairs = 10;
  std::string output;  // empty: curve goes to `out`
};

inline void write_rmsd_csv(std::ostream& os, const RmsdCurve& c) {
  os << "tau,rmsd,n_pairs\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << format_number(c.tau[i]) << ',' << format_number(c.rmsd[i]) << ',' << c.n_pairs[i] << '\n';
  }
}

inline int cmd_rmsd(const RmsdArgs& args, std::ostream& out, std::ostream& err) {
  if (args.inputs.empty()) {
    err << "rmsd: no trajectory given\n";
    return kExitBadInput;
  }
  std::vector<Trajectory> ensemble;
  try {
    ensemble = detail::load_trajectories(args.inputs);
  } catch (const ParseError& e) {
    err << e.what() << '\n';
    return kExitBadInput;
  }
  double shortest = ensemble.front().duration();
  for (const auto& t : ensemble) shortest = std::min(shortest, t.duration());
  const double tau_min = args.tau_min > 0.0 ? args.tau_min : ensemble.front().dt();
  const double tau_max = args.tau_max > 0.0 ? args.tau_max : 0.5 * shortest;
  if (shortest < tau_min) {
    err << args.inputs.front() << ":0: trajectories shorter than the minimum tau " << format_number(tau_min) << " s\n";
    return kExitBadInput;
  }
  try {
    const RmsdCurve curve = rmsd(ensemble, log_spaced_taus(tau_min, tau_max, args.per_decade));
    RegimeFitOptions fit_opt;
    fit_opt.min_pairs = args.min_pairs;
    const RegimeFit fit = fit_regimes(curve, fit_opt);
    if (args.output.empty()) {
      write_rmsd_csv(out, curve);
    } else {
      auto os = detail::open_output(args.output, err);
      if (!os) return kExitBadInput;
      write_rmsd_csv(*os, curve);
    }
    out << format_number(fit.slope_short) << ' ' << format_number(fit.slope_long) << ' '
        << format_number(fit.tau_star) << ' ' << format_number(fit.residual) << '\n';
    out << "degenerate_breakpoint " << (fit.degenerate ? 1 : 0) << '\n';
  } catch (const InvalidArgument& e) {
    err << args.inputs.front() << ":0: rmsd: " << e.what() << '\n';
    return kExitBadInput;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ScanArgs {
  std::string config;
  double T_min = 0.2;
  double T_max = 4.0;
  std::size_t steps = 20;
  std::string output;  // empty: curve goes to `out`
};

inline void write_scan_csv(std::ostream& os, const ScanResult& r) {
  os << "T,v_mean,v_predicted,alpha_chord\n";
  for (const auto& p : r.curve) {
    os << format_number(p.T) << ',' << format_number(p.v_realized) << ',' << format_number(p.v_predicted) << ','
       << format_number(p.alpha_chord_realized) << '\n';
  }
}

inline int cmd_scan(const ScanArgs& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = detail::load_config(args.config);
  } catch (const ParseError& e) {
    err << e.what() << '\n';
    return kExitBadInput;
  }
  ScanContext ctx;
  ctx.geometry = cfg.geometry;
  ctx.mode_map = cfg.mode_map;
  ctx.tau_m = cfg.tau_m;
  ctx.v_eff = cfg.scan_v_eff;
  ctx.min_time = cfg.scan_min_time;
  ScanResult result;
  try {
    result = scan_optimal_T(args.T_min, args.T_max, args.steps, ctx);
  } catch (const std::exception& e) {
    err << "scan: " << e.what() << '\n';
    return kExitBadInput;
  }
  if (args.output.empty()) {
    write_scan_csv(out, result);
  } else {
    auto os = detail::open_output(args.output, err);
    if (!os) return kExitBadInput;
    write_scan_csv(*os, result);
  }
  out << "T_opt " << format_number(result.T_opt) << '\n' << "v_opt " << format_number(result.v_opt) << '\n';
  return kExitOk;
}

}  // namespace brainbot::cli
