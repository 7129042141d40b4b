#pragma once

// File formats:
//
//   trajectory CSV   header `t,x,y,phi`, one row per sample, s / cm / cm / rad
//   program text     one segment per line: `<CW|CCW|OFF> <v_eff> <duration>`,
//                    `#` starts a comment
//   config           flat `key = value` lines with dotted keys, `#` comments
//
// Numbers are written with 9 significant digits.

#include <brainbot/core.hpp>
#include <brainbot/kinematics.hpp>

#include <fmt/core.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace brainbot {

/// Malformed input file; what() reads `source:line: message`.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + message),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

inline std::string format_number(double v) { return fmt::format("{:.9g}", v); }

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  return hash == std::string_view::npos ? s : s.substr(0, hash);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && !(s[i] == ' ' || s[i] == '\t' || s[i] == ',' || s[i] == '\r')) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectory CSV
// ---------------------------------------------------------------------------

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x,y,phi\n";
  for (const auto& s : traj.samples()) {
    os << format_number(s.t) << ',' << format_number(s.pose.x) << ',' << format_number(s.pose.y) << ','
       << format_number(s.pose.phi) << '\n';
  }
}

/// Parses and validates a trajectory. Validation failures are reported with
/// the file line of the offending row (header is line 1).
inline Trajectory read_trajectory_csv(std::istream& is, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::size_t> row_lines;
  std::vector<TrajectorySample> samples;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      std::string compact;
      for (char c : text)
        if (c != ' ' && c != '\t') compact.push_back(c);
      if (compact != "t,x,y,phi") throw ParseError(source, lineno, "expected header `t,x,y,phi`");
      header_seen = true;
      continue;
    }
    const auto fields = detail::split(text, ',');
    if (fields.size() != 4) throw ParseError(source, lineno, "expected 4 comma-separated fields");
    double vals[4];
    for (std::size_t k = 0; k < 4; ++k) {
      const auto v = detail::parse_double(fields[k]);
      if (!v) throw ParseError(source, lineno, "malformed number `" + std::string(detail::trim(fields[k])) + "`");
      vals[k] = *v;
    }
    samples.push_back({vals[0], {vals[1], vals[2], vals[3]}});
    row_lines.push_back(lineno);
  }
  if (!header_seen) throw ParseError(source, lineno, "empty trajectory file");
  try {
    return validate_trajectory(std::move(samples));
  } catch (const ValidationError& e) {
    const std::size_t at = e.index() < row_lines.size() ? row_lines[e.index()] : lineno;
    throw ParseError(source, at, e.what());
  }
}

inline Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_trajectory_csv(in, path.string());
}

// ---------------------------------------------------------------------------
// Program text
// ---------------------------------------------------------------------------

inline void write_program(std::ostream& os, const MotionProgram& program) {
  os << "# direction v_eff[V] duration[s]\n";
  os << "# seed " << program.seed() << '\n';
  for (const auto& s : program.segments()) {
    os << to_string(s.direction) << ' ' << format_number(s.v_eff) << ' ' << format_number(s.duration) << '\n';
  }
}

inline MotionProgram parse_program(std::istream& is, const std::string& source) {
  std::vector<MotorCommand> segs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto text = detail::trim(detail::strip_comment(line));
    if (text.empty()) continue;
    const auto tok = detail::split_ws(text);
    if (tok.size() != 3) throw ParseError(source, lineno, "expected `<CW|CCW|OFF> <v_eff> <duration>`");
    MotorCommand cmd;
    if (tok[0] == "CW") {
      cmd.direction = Direction::CW;
    } else if (tok[0] == "CCW") {
      cmd.direction = Direction::CCW;
    } else if (tok[0] == "OFF") {
      cmd.direction = Direction::OFF;
    } else {
      throw ParseError(source, lineno, "unknown direction `" + std::string(tok[0]) + "`");
    }
    const auto v = detail::parse_double(tok[1]);
    const auto d = detail::parse_double(tok[2]);
    if (!v || !d) throw ParseError(source, lineno, "malformed number");
    cmd.v_eff = *v;
    cmd.duration = *d;
    try {
      cmd.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError(source, lineno, e.what());
    }
    segs.push_back(cmd);
  }
  if (segs.empty()) throw ParseError(source, lineno, "program has no segments");
  return MotionProgram(std::move(segs));
}

inline MotionProgram read_program(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_program(in, path.string());
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  BotGeometry geometry;
  ArenaConfig arena;
  NoiseConfig noise;
  double tau_m = 0.2;
  double dt = 0.02;
  ModeMap mode_map = ModeMap::default_map();
  std::uint64_t seed = 0;
  Pose initial{150.0, 150.0, 0.0};
  double scan_v_eff = 3.0;
  double scan_min_time = 30.0;
};

namespace detail {

struct KeyValue {
  std::string value;
  std::size_t line = 0;
};

inline std::map<std::string, KeyValue> read_key_values(std::istream& is, const std::string& source) {
  std::map<std::string, KeyValue> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto text = trim(strip_comment(line));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, lineno, "expected `key = value`");
    const std::string key(trim(text.substr(0, eq)));
    if (key.empty()) throw ParseError(source, lineno, "empty key");
    if (kv.count(key)) throw ParseError(source, lineno, "duplicate key `" + key + "`");
    kv[key] = {std::string(trim(text.substr(eq + 1))), lineno};
  }
  return kv;
}

inline double number_value(const std::string& source, const std::string& key, const KeyValue& kv) {
  const auto v = parse_double(kv.value);
  if (!v || !std::isfinite(*v)) throw ParseError(source, kv.line, "`" + key + "` expects a number");
  return *v;
}

inline std::vector<double> list_value(const std::string& source, const std::string& key, const KeyValue& kv) {
  std::vector<double> out;
  for (auto tok : split_ws(kv.value)) {
    const auto v = parse_double(tok);
    if (!v) throw ParseError(source, kv.line, "`" + key + "` expects a list of numbers");
    out.push_back(*v);
  }
  return out;
}

/// Consumes the `mode_map.*` keys; returns true when any were present.
inline bool take_mode_map(std::map<std::string, KeyValue>& kv, const std::string& source, ModeMap& out) {
  static const char* const keys[] = {"mode_map.v_eff", "mode_map.alpha_leg", "mode_map.eta", "mode_map.omega_max"};
  std::size_t present = 0;
  std::size_t first_line = 0;
  ModeMap m;
  std::vector<double>* fields[] = {&m.v_eff, &m.alpha_leg, &m.eta, &m.omega_max};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto it = kv.find(keys[k]);
    if (it == kv.end()) continue;
    ++present;
    if (first_line == 0 || it->second.line < first_line) first_line = it->second.line;
    *fields[k] = list_value(source, keys[k], it->second);
    kv.erase(it);
  }
  if (present == 0) return false;
  if (present != 4) throw ParseError(source, first_line, "mode map needs v_eff, alpha_leg, eta and omega_max");
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(source, first_line, e.what());
  }
  out = std::move(m);
  return true;
}

}  // namespace detail

inline ModeMap parse_mode_map(std::istream& is, const std::string& source) {
  auto kv = detail::read_key_values(is, source);
  ModeMap m;
  if (!detail::take_mode_map(kv, source, m)) throw ParseError(source, 0, "no mode_map.* keys found");
  if (!kv.empty()) {
    throw ParseError(source, kv.begin()->second.line, "unknown key `" + kv.begin()->first + "`");
  }
  return m;
}

inline void write_mode_map(std::ostream& os, const ModeMap& m) {
  auto list = [&](const char* key, const std::vector<double>& v) {
    os << key << " =";
    for (double x : v) os << ' ' << format_number(x);
    os << '\n';
  };
  os << "# rows follow v_eff, columns alpha_leg\n";
  list("mode_map.v_eff", m.v_eff);
  list("mode_map.alpha_leg", m.alpha_leg);
  list("mode_map.eta", m.eta);
  list("mode_map.omega_max", m.omega_max);
}

/// Parses a run configuration. `base_dir` resolves a relative `mode_map`
/// file path. Unknown keys are rejected.
inline RunConfig parse_config(std::istream& is, const std::string& source,
                              const std::filesystem::path& base_dir = {}) {
  using detail::KeyValue;
  auto kv = detail::read_key_values(is, source);
  RunConfig cfg;

  std::map<std::string, std::size_t> group_line;
  auto take = [&](const std::string& key) -> std::optional<KeyValue> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    KeyValue v = it->second;
    kv.erase(it);
    const std::string group = key.substr(0, key.find('.'));
    if (!group_line.count(group) || v.line < group_line[group]) group_line[group] = v.line;
    return v;
  };
  auto num = [&](const std::string& key, double& target) {
    if (auto v = take(key)) target = detail::number_value(source, key, *v);
  };

  num("geometry.semi_major", cfg.geometry.semi_major);
  num("geometry.semi_minor", cfg.geometry.semi_minor);
  num("geometry.l_leg", cfg.geometry.l_leg);
  num("geometry.alpha_leg", cfg.geometry.alpha_leg);
  if (auto v = take("geometry.n_leg_pairs")) {
    const auto n = detail::parse_uint(v->value);
    if (!n || *n == 0) throw ParseError(source, v->line, "`geometry.n_leg_pairs` expects a positive integer");
    cfg.geometry.n_leg_pairs = static_cast<int>(*n);
  }
  num("arena.width", cfg.arena.width);
  num("arena.height", cfg.arena.height);
  if (auto v = take("arena.wall_mode")) {
    if (v->value == "REFLECT") {
      cfg.arena.wall_mode = WallMode::REFLECT;
    } else if (v->value == "NONE") {
      cfg.arena.wall_mode = WallMode::NONE;
    } else {
      throw ParseError(source, v->line, "`arena.wall_mode` expects REFLECT or NONE");
    }
  }
  num("noise.sigma_xy", cfg.noise.sigma_xy);
  num("noise.sigma_phi", cfg.noise.sigma_phi);
  num("tau_m", cfg.tau_m);
  num("dt", cfg.dt);
  num("scan.v_eff", cfg.scan_v_eff);
  num("scan.min_time", cfg.scan_min_time);

  auto seed_of = [&](const std::string& key) -> std::optional<std::uint64_t> {
    auto v = take(key);
    if (!v) return std::nullopt;
    const auto n = detail::parse_uint(v->value);
    if (!n) throw ParseError(source, v->line, "`" + key + "` expects a non-negative integer");
    return n;
  };
  if (auto s = seed_of("seed")) cfg.seed = *s;
  cfg.noise.seed = seed_of("noise.seed").value_or(cfg.seed);

  cfg.initial = {0.5 * cfg.arena.width, 0.5 * cfg.arena.height, 0.0};
  num("initial.x", cfg.initial.x);
  num("initial.y", cfg.initial.y);
  num("initial.phi", cfg.initial.phi);

  const bool inline_map = detail::take_mode_map(kv, source, cfg.mode_map);
  if (auto v = take("mode_map")) {
    if (inline_map) throw ParseError(source, v->line, "give either `mode_map` or inline `mode_map.*` keys, not both");
    const std::filesystem::path p = base_dir.empty() ? std::filesystem::path(v->value) : base_dir / v->value;
    std::ifstream in(p);
    if (!in) throw ParseError(source, v->line, "cannot open mode map `" + p.string() + "`");
    cfg.mode_map = parse_mode_map(in, p.string());
  }

  if (!kv.empty()) {
    const auto& [key, v] = *std::min_element(kv.begin(), kv.end(), [](const auto& a, const auto& b) {
      return a.second.line < b.second.line;
    });
    throw ParseError(source, v.line, "unknown key `" + key + "`");
  }

  auto check = [&](const std::string& group, auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      throw ParseError(source, group_line.count(group) ? group_line[group] : 0, e.what());
    }
  };
  check("geometry", [&] { cfg.geometry.validate(); });
  check("arena", [&] { cfg.arena.validate(); });
  check("noise", [&] { cfg.noise.validate(); });
  check("tau_m", [&] {
    if (!(cfg.tau_m >= 0.0)) throw InvalidArgument("tau_m must be >= 0");
  });
  check("dt", [&] {
    if (!(cfg.dt > 0.0)) throw InvalidArgument("dt must be positive");
  });
  check("scan", [&] {
    if (!(cfg.scan_v_eff >= 0.0 && cfg.scan_v_eff <= kMaxEffectiveVoltage)) throw InvalidArgument("scan.v_eff outside [0, 3] V");
    if (!(cfg.scan_min_time > 0.0)) throw InvalidArgument("scan.min_time must be positive");
  });
  return cfg;
}

inline RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_config(in, path.string(), path.parent_path());
}

}  // namespace brainbot
