// Run-and-tumble ensemble: RMSD curve and the ballistic/diffusive crossover.

#include <brainbot/brainbot.hpp>

#include <fmt/core.h>

#include <cstdlib>

int main(int argc, char** argv) {
  using namespace brainbot;

  const int runs = argc > 1 ? std::atoi(argv[1]) : 12;
  ArenaConfig arena;
  arena.wall_mode = WallMode::NONE;

  std::vector<Trajectory> ensemble;
  for (int r = 0; r < runs; ++r) {
    RunTumbleSpec spec;
    spec.seed = 1000 + static_cast<std::uint64_t>(r);
    const MotionProgram program = encode_run_and_tumble(spec);
    ensemble.push_back(simulate(program, {}, ModeMap::default_map(), arena, {}, 0.2, 0.02, {150.0, 150.0, 0.0}));
  }

  const RmsdCurve curve = rmsd(ensemble, log_spaced_taus(0.02, 20.0, 10));
  for (std::size_t i = 0; i < curve.size(); ++i) fmt::print("{:8.3f} {:10.4f}\n", curve.tau[i], curve.rmsd[i]);

  const RegimeFit fit = fit_regimes(curve);
  fmt::print("short-lag slope {:.3f}, long-lag slope {:.3f}, crossover {:.2f} s\n", fit.slope_short, fit.slope_long,
             fit.tau_star);
}
