#include "floq/config.hpp"

#include "floq/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

namespace floq {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

long parse_integer(std::string_view text, std::string_view key) {
  text = trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("expected an integer for '" + std::string(key) + "', got '" +
                      std::string(text) + "'");
  }
  return v;
}

std::string real_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double parse_real(std::string_view text) {
  text = trim(text);
  std::string s(text);
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = kPi;
    s.erase(s.size() - 2);
    if (s.empty()) return kPi;
    if (s.back() == '*') s.pop_back();
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("malformed number '" + std::string(text) + "'");
  }
  return v * factor;
}

std::vector<double> OmegaGrid::values() const {
  if (!(step > 0.0) || !(stop >= start)) throw ConfigError("omega grid must be increasing");
  std::vector<double> out;
  const long count = static_cast<long>(std::floor((stop - start) / step + 1e-3)) + 1;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

FloquetSolveOptions ExperimentConfig::solve_options() const {
  FloquetSolveOptions o;
  o.points = points;
  o.basis_size = basis;
  o.substeps_per_period = substeps;
  o.start_time = start_time;
  o.workers = workers;
  return o;
}

PropagationParams ExperimentConfig::propagation() const {
  return solve_options().params_for(lattice.frequency);
}

void ExperimentConfig::validate() const {
  lattice.validate();
  if (initial.kind == InitialStateSpec::Kind::gaussian && !(initial.width > 0.0)) {
    throw ConfigError("sigma must be positive for a gaussian initial state");
  }
  if (supercells < 1) throw ConfigError("supercells must be >= 1");
  if (substeps != 0 && substeps < 256) throw ConfigError("substeps must be 0 (auto) or >= 256");
  if (horizon < 1) throw ConfigError("horizon must be >= 1 period");
  if (!(omega_grid.step > 0.0) || !(omega_grid.stop >= omega_grid.start) ||
      !(omega_grid.start > 0.0)) {
    throw ConfigError("omega grid must be positive and monotone (start <= stop, step > 0)");
  }
  if (basis != kAllModes && basis < 1) throw ConfigError("basis must be >= 1 or 'all'");
  const Index n = points > 0 ? points : default_points_per_cell(lattice);
  SupercellGrid grid(lattice, n);
  if (basis != kAllModes && basis > n) throw ConfigError("basis exceeds grid points per supercell");
  if (outdir.empty()) throw ConfigError("outdir must not be empty");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "mass",    "hbar",       "v0",        "delta",       "spacing",    "amplitude", "omega",
      "phases",  "np",         "sigma",     "center",      "domain",     "supercells",
      "substeps", "horizon",   "omega_start", "omega_stop", "omega_step", "outdir",
      "points",  "basis"};
  return keys;
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  LatticeSpec& l = c.lattice;
  if (key == "mass") {
    l.mass = parse_real(value);
  } else if (key == "hbar") {
    l.hbar = parse_real(value);
  } else if (key == "v0") {
    l.barrier_height = parse_real(value);
  } else if (key == "delta") {
    l.barrier_width = parse_real(value);
  } else if (key == "spacing") {
    l.spacing = parse_real(value);
  } else if (key == "amplitude") {
    l.amplitude = parse_real(value);
  } else if (key == "omega") {
    l.frequency = parse_real(value);
  } else if (key == "phases") {
    l.phases.clear();
    std::size_t pos = 0;
    while (pos <= value.size()) {
      const auto comma = value.find(',', pos);
      const auto item = value.substr(pos, comma == std::string_view::npos ? value.npos : comma - pos);
      l.phases.push_back(parse_real(item));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    l.sites_per_cell = static_cast<int>(l.phases.size());
  } else if (key == "np") {
    l.sites_per_cell = static_cast<int>(parse_integer(value, key));
  } else if (key == "sigma") {
    const double sigma = parse_real(value);
    c.initial.width = sigma;
    c.initial.kind = sigma > 0.0 ? InitialStateSpec::Kind::gaussian : InitialStateSpec::Kind::uniform;
  } else if (key == "center") {
    c.initial.center = parse_real(value);
  } else if (key == "domain") {
    if (value == "supercell") {
      c.domain = DomainKind::supercell;
    } else if (value == "ring") {
      c.domain = DomainKind::ring;
    } else {
      throw ConfigError("domain must be 'supercell' or 'ring'");
    }
  } else if (key == "supercells") {
    c.supercells = parse_integer(value, key);
  } else if (key == "substeps") {
    c.substeps = parse_integer(value, key);
  } else if (key == "horizon") {
    c.horizon = parse_integer(value, key);
  } else if (key == "omega_start") {
    c.omega_grid.start = parse_real(value);
  } else if (key == "omega_stop") {
    c.omega_grid.stop = parse_real(value);
  } else if (key == "omega_step") {
    c.omega_grid.step = parse_real(value);
  } else if (key == "outdir") {
    c.outdir = std::string(value);
  } else if (key == "points") {
    c.points = parse_integer(value, key);
  } else if (key == "basis") {
    c.basis = value == "all" ? kAllModes : parse_integer(value, key);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      apply_setting(base, trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

std::string to_text(const ExperimentConfig& c) {
  const LatticeSpec& l = c.lattice;
  std::ostringstream out;
  out << "mass = " << real_text(l.mass) << '\n'
      << "hbar = " << real_text(l.hbar) << '\n'
      << "v0 = " << real_text(l.barrier_height) << '\n'
      << "delta = " << real_text(l.barrier_width) << '\n'
      << "spacing = " << real_text(l.spacing) << '\n'
      << "amplitude = " << real_text(l.amplitude) << '\n'
      << "omega = " << real_text(l.frequency) << '\n'
      << "phases = ";
  for (std::size_t i = 0; i < l.phases.size(); ++i) {
    out << (i ? ", " : "") << real_text(l.phases[i]);
  }
  out << '\n'
      << "np = " << l.sites_per_cell << '\n'
      << "sigma = "
      << real_text(c.initial.kind == InitialStateSpec::Kind::gaussian ? c.initial.width : 0.0)
      << '\n'
      << "center = " << real_text(c.initial.center) << '\n'
      << "domain = " << (c.domain == DomainKind::ring ? "ring" : "supercell") << '\n'
      << "supercells = " << c.supercells << '\n'
      << "substeps = " << c.substeps << '\n'
      << "horizon = " << c.horizon << '\n'
      << "omega_start = " << real_text(c.omega_grid.start) << '\n'
      << "omega_stop = " << real_text(c.omega_grid.stop) << '\n'
      << "omega_step = " << real_text(c.omega_grid.step) << '\n'
      << "outdir = " << c.outdir << '\n'
      << "points = " << c.points << '\n'
      << "basis = " << (c.basis == kAllModes ? std::string("all") : std::to_string(c.basis))
      << '\n';
  return out.str();
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  ExperimentConfig physics = c;
  physics.outdir = ".";
  for (unsigned char ch : to_text(physics)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace floq
