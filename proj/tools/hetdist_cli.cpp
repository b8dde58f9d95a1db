// Command-line front end: one subcommand per experiment.
//
//   hetdist circle --n 1000 --m 10000 --seeds 1..5 --out runs/circle
//   hetdist correct-file --set input=data.csv --out runs/file
//   hetdist --experiment lsap_decay --out runs/decay
//
// Exit status: 0 success, 1 runtime failure, 2 configuration error.

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetdist/error.hpp"
#include "hetdist/parallel.hpp"
#include "hetdist/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kConfig = 2;

struct Flags {
  long n = -1;
  long m = -1;
  std::string seeds;
  std::string out = "out";
  std::vector<std::string> sets;
  int threads = 0;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--n", f.n, "Number of observations");
  cmd.add_option("--m", f.m, "Feature dimension");
  cmd.add_option("--seed,--seeds", f.seeds, "Seeds: 7, 1..5 or 1,4,9");
  cmd.add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd.add_option("--set", f.sets, "Parameter override key=value (repeatable)");
  cmd.add_option("--threads", f.threads, "Worker threads (default: HETDIST_THREADS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  using hetdist::ExperimentKind;

  CLI::App app{"Noise magnitude estimation and distance correction experiments"};
  app.require_subcommand(0, 1);
  Flags top;
  std::string experiment;
  app.add_option("--experiment", experiment,
                 "Experiment to run when no subcommand is given");
  add_flags(app, top);

  const ExperimentKind kinds[] = {ExperimentKind::Circle,        ExperimentKind::TwoCircles,
                                  ExperimentKind::LsapDecay,     ExperimentKind::ErrorScalingM,
                                  ExperimentKind::ErrorScalingN, ExperimentKind::PoissonSurrogate,
                                  ExperimentKind::CorrectFile};
  std::vector<CLI::App*> subcommands;
  std::vector<Flags> sub_flags(std::size(kinds));
  for (std::size_t i = 0; i < std::size(kinds); ++i) {
    std::string name = hetdist::experiment_name(kinds[i]);
    std::replace(name.begin(), name.end(), '_', '-');
    std::string keys;
    for (const auto& k : hetdist::known_overrides(kinds[i])) keys += (keys.empty() ? "" : ", ") + k;
    CLI::App* cmd = app.add_subcommand(
        name, "Defaults: " + hetdist::describe_defaults(kinds[i]) + ". Overrides: " + keys);
    add_flags(*cmd, sub_flags[i]);
    subcommands.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  hetdist::ExperimentConfig config;
  const Flags* flags = &top;
  bool chosen = false;
  for (std::size_t i = 0; i < subcommands.size(); ++i) {
    if (subcommands[i]->parsed()) {
      config.experiment = kinds[i];
      flags = &sub_flags[i];
      chosen = true;
    }
  }
  if (!chosen) {
    if (experiment.empty()) {
      std::cerr << "error: choose an experiment (subcommand or --experiment)\n"
                << app.help();
      return kConfig;
    }
    const auto kind = hetdist::parse_experiment(experiment);
    if (!kind) {
      std::cerr << "error: unknown experiment '" << experiment << "'\n";
      return kConfig;
    }
    config.experiment = *kind;
  }

  try {
    if (flags->n >= 0) config.n = flags->n;
    if (flags->m >= 0) config.m = flags->m;
    if (!flags->seeds.empty()) config.seeds = hetdist::parse_seeds(flags->seeds);
    config.output_dir = flags->out;
    config.threads = flags->threads > 0 ? flags->threads : hetdist::default_threads();
    for (const std::string& kv : flags->sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
        return kConfig;
      }
      config.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  } catch (const hetdist::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }

  config = hetdist::with_defaults(std::move(config));
  if (const auto problems = hetdist::validate(config); !problems.empty()) {
    for (const auto& p : problems) std::cerr << "error: " << p << '\n';
    return kConfig;
  }

  try {
    hetdist::run(config, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
