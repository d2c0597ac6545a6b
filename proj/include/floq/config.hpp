#pragma once

#include "floq/floquet.hpp"
#include "floq/lattice.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace floq {

inline constexpr std::string_view kVersion = "1.0.0";

enum class DomainKind { supercell, ring };

struct OmegaGrid {
  double start = 0.5;
  double stop = 6.0;
  double step = 0.01;

  /// start, start + step, ... up to stop (inclusive within step/1000).
  std::vector<double> values() const;
};

/// Everything an experiment run needs. Parsed from flat `key = value` text;
/// command-line flags override file values.
struct ExperimentConfig {
  LatticeSpec lattice;
  InitialStateSpec initial = InitialStateSpec::uniform();
  DomainKind domain = DomainKind::supercell;
  Index supercells = 1;
  long substeps = 0;  // 0: PropagationParams::for_frequency
  double start_time = 0.0;
  long horizon = 400;
  OmegaGrid omega_grid;
  std::string outdir = ".";
  Index points = 0;   // 0: default_points_per_cell
  Index basis = kDefaultBasisSize;
  unsigned workers = 1;

  Index supercell_count() const { return domain == DomainKind::ring ? supercells : 1; }
  FloquetSolveOptions solve_options() const;
  PropagationParams propagation() const;

  /// Throws ConfigError on any violated invariant; called before any computation.
  void validate() const;
};

/// Keys accepted in config files (and as --key flags).
const std::vector<std::string>& config_keys();

/// Applies one `key = value` setting. Throws ConfigError for unknown keys or
/// malformed values. Numbers may be written as multiples of pi ("pi", "0.2pi", "2*pi").
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines; '#' starts a comment.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Canonical text form with every resolved value (used for sidecar files and hashing).
std::string to_text(const ExperimentConfig& config);

/// FNV-1a 64-bit hash of the canonical text (output directory excluded), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

double parse_real(std::string_view text);

}  // namespace floq
