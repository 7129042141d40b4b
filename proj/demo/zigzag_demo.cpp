// Mean speed of the alternating CW/CCW gait as a function of rotation time,
// compared with the lag-free closed form.

#include <brainbot/brainbot.hpp>

#include <fmt/core.h>

int main() {
  using namespace brainbot;

  ScanContext ctx;
  const ScanResult scan = scan_optimal_T(0.2, 4.0, 20, ctx);
  fmt::print("{:>6} {:>10} {:>12}\n", "T [s]", "v [cm/s]", "bound [cm/s]");
  for (const auto& p : scan.curve) fmt::print("{:6.2f} {:10.3f} {:12.3f}\n", p.T, p.v_realized, p.v_predicted);
  fmt::print("fastest: T = {:.2f} s, v = {:.3f} cm/s\n", scan.T_opt, scan.v_opt);
}
