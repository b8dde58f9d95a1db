#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetdist/types.hpp"

namespace hetdist {

enum class ExperimentKind {
  Circle,
  TwoCircles,
  LsapDecay,
  ErrorScalingM,
  ErrorScalingN,
  PoissonSurrogate,
  CorrectFile
};

/// Accepts both "two_circles" and "two-circles" spellings.
std::optional<ExperimentKind> parse_experiment(const std::string& name);
std::string experiment_name(ExperimentKind kind);

/// Parameters of one run. Unset n, m and seeds take the experiment's
/// desk-scale defaults (see `describe_defaults`).
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Circle;
  std::optional<Index> n;
  std::optional<Index> m;
  std::vector<Seed> seeds;
  std::filesystem::path output_dir = "out";
  std::map<std::string, std::string> overrides;
  int threads = 1;
};

/// "1..5" (inclusive range), "1,2,7" or a mix such as "1..3,9".
/// Throws InvalidArgument on malformed input.
std::vector<Seed> parse_seeds(const std::string& text);

/// Override keys an experiment accepts.
std::vector<std::string> known_overrides(ExperimentKind kind);

/// Human-readable defaults for --help.
std::string describe_defaults(ExperimentKind kind);

/// Fills in unset n, m and seeds with the experiment's defaults.
ExperimentConfig with_defaults(ExperimentConfig config);

/// Every violation in the configuration; empty when it is runnable.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Runs the experiment and writes its CSV tables plus metadata.json into
/// output_dir. Progress goes to `log`. Throws hetdist::Error on failure.
void run(const ExperimentConfig& config, std::ostream& log);

/// Version string captured when the library was configured.
const char* git_describe() noexcept;

}  // namespace hetdist
