#include "hetdist/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>

#include "hetdist/analysis.hpp"
#include "hetdist/error.hpp"
#include "hetdist/experiments.hpp"
#include "hetdist/graphs.hpp"
#include "hetdist/ingest.hpp"
#include "hetdist/parallel.hpp"
#include "json.hpp"

#ifndef HETDIST_GIT_DESCRIBE
#define HETDIST_GIT_DESCRIBE "unknown"
#endif

namespace hetdist {

namespace fs = std::filesystem;

const char* git_describe() noexcept { return HETDIST_GIT_DESCRIBE; }

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::Circle, "circle"},
    {ExperimentKind::TwoCircles, "two_circles"},
    {ExperimentKind::LsapDecay, "lsap_decay"},
    {ExperimentKind::ErrorScalingM, "error_scaling_m"},
    {ExperimentKind::ErrorScalingN, "error_scaling_n"},
    {ExperimentKind::PoissonSurrogate, "poisson_surrogate"},
    {ExperimentKind::CorrectFile, "correct_file"},
};

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || p != end) bad(key + ": cannot parse '" + text + "'");
  return value;
}

std::vector<Index> parse_index_list(const std::string& key, const std::string& text) {
  std::vector<Index> out;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(parse_number<Index>(key, tok));
  if (out.empty()) bad(key + ": empty list");
  return out;
}

/// Typed view of the override map.
class Overrides {
 public:
  explicit Overrides(const std::map<std::string, std::string>& map) : map_(map) {}

  double real(const std::string& key, double fallback) const {
    auto it = map_.find(key);
    return it == map_.end() ? fallback : parse_number<double>(key, it->second);
  }
  Index count(const std::string& key, Index fallback) const {
    auto it = map_.find(key);
    return it == map_.end() ? fallback : parse_number<Index>(key, it->second);
  }
  std::vector<Index> list(const std::string& key, std::vector<Index> fallback) const {
    auto it = map_.find(key);
    return it == map_.end() ? fallback : parse_index_list(key, it->second);
  }
  std::string text(const std::string& key, std::string fallback) const {
    auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
  }
  bool flag(const std::string& key, bool fallback) const {
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    if (it->second == "1" || it->second == "true") return true;
    if (it->second == "0" || it->second == "false") return false;
    bad(key + ": expected 0/1 or true/false");
  }

 private:
  const std::map<std::string, std::string>& map_;
};

void require_ascending(const std::string& key, const std::vector<Index>& grid, Index min) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < min) bad(key + ": every value must be at least " + std::to_string(min));
    if (i > 0 && grid[i] <= grid[i - 1]) bad(key + ": values must be strictly ascending");
  }
}

void require_k_grid(const std::vector<Index>& grid, Index n) {
  for (Index k : grid) {
    if (k < 1 || k > n - 1) bad("k_grid: every k must lie in [1, n - 1]");
  }
}

CircleParams circle_params(const ExperimentConfig& c) {
  const Overrides o(c.overrides);
  CircleParams p;
  p.n = *c.n;
  p.m = *c.m;
  p.phi = o.real("phi", p.phi);
  p.noise_scale = o.real("noise_scale", p.noise_scale);
  p.sigma_sq = o.real("sigma_sq", p.sigma_sq);
  p.kernel_row = o.count("kernel_row", std::min<Index>(p.kernel_row, p.n - 1));
  p.k_grid = o.list("k_grid", p.k_grid);
  if (p.m < 2) bad("m must be >= 2 for the circle");
  if (!(p.sigma_sq > 0.0)) bad("sigma_sq must be positive");
  if (p.kernel_row < 0 || p.kernel_row >= p.n) bad("kernel_row must lie in [0, n)");
  require_k_grid(p.k_grid, p.n);
  return p;
}

TwoCircleParams two_circle_params(const ExperimentConfig& c) {
  const Overrides o(c.overrides);
  TwoCircleParams p;
  p.n = *c.n;
  p.m = *c.m;
  p.bandwidth_k = o.count("bandwidth_k", p.bandwidth_k);
  p.eigenpairs = o.count("eigenpairs", p.eigenpairs);
  if (p.n % 2 != 0) bad("n must be even for two circles");
  if (p.m < 2) bad("m must be >= 2 for two circles");
  if (p.bandwidth_k < 1 || p.bandwidth_k > p.n - 1) bad("bandwidth_k must lie in [1, n - 1]");
  if (p.eigenpairs < 2 || p.eigenpairs > p.n) bad("eigenpairs must lie in [2, n]");
  return p;
}

struct DecayParams {
  CurveFamily family = CurveFamily::BallAndRing;
  std::vector<Index> n_grid{250, 500, 1000, 2000, 4000};
};

DecayParams decay_params(const ExperimentConfig& c) {
  const Overrides o(c.overrides);
  DecayParams p;
  const std::string family = o.text("family", "ball_and_ring");
  if (family == "ball_and_ring") {
    p.family = CurveFamily::BallAndRing;
  } else if (family == "circle") {
    p.family = CurveFamily::Circle;
  } else if (family == "duplicates") {
    p.family = CurveFamily::Duplicates;
  } else {
    bad("family: expected ball_and_ring, circle or duplicates");
  }
  p.n_grid = o.list("n_grid", p.n_grid);
  require_ascending("n_grid", p.n_grid, 4);
  if (p.family == CurveFamily::Duplicates) {
    for (Index n : p.n_grid) {
      if (n % 4 != 0) bad("n_grid: duplicates need multiples of 4");
    }
  }
  return p;
}

ScalingConfig scaling_params(const ExperimentConfig& c) {
  const Overrides o(c.overrides);
  ScalingConfig s;
  const bool along_m = c.experiment == ExperimentKind::ErrorScalingM;
  s.axis = along_m ? ScalingAxis::M : ScalingAxis::N;
  s.fixed = along_m ? *c.n : *c.m;
  s.grid = o.list("grid", along_m ? std::vector<Index>{1000, 3162, 10000, 31623, 100000}
                                  : std::vector<Index>{250, 500, 1000, 2000});
  s.tau = {o.real("tau_lo", s.tau.lo), o.real("tau_hi", s.tau.hi)};
  s.delta = {o.real("delta_lo", s.delta.lo), o.real("delta_hi", s.delta.hi)};
  s.with_noise = o.flag("noise", true);
  s.seeds = c.seeds;
  s.threads = c.threads;
  require_ascending("grid", s.grid, along_m ? 3 : 4);
  if (along_m ? s.fixed < 4 : s.fixed < 3) bad("fixed dimension too small");
  if (!(s.tau.lo >= 0.0 && s.tau.lo <= s.tau.hi) || !(s.delta.lo >= 0.0 && s.delta.lo <= s.delta.hi)) {
    bad("noise ranges must be nonnegative and ordered");
  }
  return s;
}

PoissonParams poisson_params(const ExperimentConfig& c) {
  const Overrides o(c.overrides);
  PoissonParams p;
  auto& s = p.surrogate;
  s.clusters = o.count("clusters", s.clusters);
  if (s.clusters < 1) bad("clusters must be positive");
  if (*c.n % s.clusters != 0) bad("n must be a multiple of clusters");
  s.cells_per_cluster = *c.n / s.clusters;
  s.genes = *c.m;
  s.library = {o.real("library_lo", s.library.lo), o.real("library_hi", s.library.hi)};
  s.library_window = o.real("library_window", s.library_window);
  s.base_log_sd = o.real("base_log_sd", s.base_log_sd);
  s.marker_fraction = o.real("marker_fraction", s.marker_fraction);
  s.marker_log_sd = o.real("marker_log_sd", s.marker_log_sd);
  p.k_grid = o.list("k_grid", p.k_grid);
  if (!(s.library.lo > 0.0 && s.library.lo <= s.library.hi)) bad("library range invalid");
  if (!(s.library_window >= 0.0 && s.library_window <= 1.0)) bad("library_window outside [0, 1]");
  if (!(s.marker_fraction >= 0.0 && s.marker_fraction <= 1.0)) bad("marker_fraction outside [0, 1]");
  require_k_grid(p.k_grid, *c.n);
  return p;
}

struct CorrectFileParams {
  fs::path input;
  MatrixFormat format = MatrixFormat::CsvDense;
  bool normalize = false;
  Index knn_k = 0;
};

CorrectFileParams correct_file_params(const ExperimentConfig& c) {
  const Overrides o(c.overrides);
  CorrectFileParams p;
  p.input = o.text("input", "");
  if (p.input.empty()) bad("input: path to a matrix file is required");
  if (!fs::exists(p.input)) bad("input: no such file " + p.input.string());
  const std::string format = o.text("format", "auto");
  p.format = format == "auto" ? format_from_extension(p.input) : parse_matrix_format(format);
  p.normalize = o.flag("normalize", false);
  p.knn_k = o.count("knn_k", 0);
  if (p.knn_k < 0) bad("knn_k must be nonnegative");
  return p;
}

// Output helpers ----------------------------------------------------------

using Row = std::vector<double>;

class TableWriter {
 public:
  TableWriter(const ExperimentConfig& config, const fs::path& dir) : config_(config), dir_(dir) {}

  void write(const std::string& name, const std::vector<std::string>& header,
             const std::vector<Row>& rows, const std::string& note = "") {
    const fs::path path = dir_ / name;
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << "# experiment: " << experiment_name(config_.experiment) << '\n';
    out << "# git: " << git_describe() << '\n';
    const ExperimentKind kind = config_.experiment;
    if (kind != ExperimentKind::CorrectFile) {
      out << "# seeds:";
      for (Seed s : config_.seeds) out << ' ' << s;
      out << '\n';
    }
    out << "# params:";
    if (kind != ExperimentKind::LsapDecay && kind != ExperimentKind::CorrectFile) {
      if (kind != ExperimentKind::ErrorScalingN) out << " n=" << *config_.n;
      if (kind != ExperimentKind::ErrorScalingM) out << " m=" << *config_.m;
    }
    for (const auto& [k, v] : config_.overrides) out << ' ' << k << '=' << v;
    out << '\n';
    if (!note.empty()) out << "# " << note << '\n';
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (const Row& row : rows) {
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
      out << '\n';
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
    files_.push_back(name);
  }

  void note_file(const std::string& name) { files_.push_back(name); }
  const std::vector<std::string>& files() const { return files_; }

 private:
  const ExperimentConfig& config_;
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string seed_suffix(Seed s) { return "_s" + std::to_string(s); }

class Progress {
 public:
  Progress(std::ostream& log, std::string tag) : log_(log), tag_(std::move(tag)) {}
  void operator()(const std::string& msg) {
    std::lock_guard lock(mutex_);
    log_ << '[' << tag_ << "] " << msg << std::endl;
  }

 private:
  std::ostream& log_;
  std::string tag_;
  std::mutex mutex_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

void run_circle_experiment(const ExperimentConfig& c, TableWriter& out, Progress& progress) {
  const CircleParams p = circle_params(c);
  std::vector<CircleResult> results(c.seeds.size());
  parallel_for(results.size(), c.threads, [&](std::size_t s) {
    const auto t0 = std::chrono::steady_clock::now();
    results[s] = run_circle(p, c.seeds[s]);
    progress("seed " + std::to_string(c.seeds[s]) + " done in " + fixed3(seconds_since(t0)) + " s");
  });

  std::vector<Row> acc, summary;
  for (const CircleResult& r : results) {
    const auto seed = static_cast<double>(r.seed);
    std::vector<Row> points, kernel;
    for (Index i = 0; i < p.n; ++i) {
      const bool valid = r.snr_hat.valid[static_cast<std::size_t>(i)];
      points.push_back({static_cast<double>(i), r.theta(i), r.r_true(i), r.r_hat(i),
                        r.snr_true(i), r.snr_hat.value(i), valid ? 1.0 : 0.0});
      kernel.push_back({static_cast<double>(i), r.theta(i), r.kernel_clean(i),
                        r.kernel_corrupted(i), r.kernel_corrected(i)});
    }
    out.write("points" + seed_suffix(r.seed) + ".csv",
              {"i", "theta", "r_true", "r_hat", "snr_true", "snr_hat", "snr_valid"}, points,
              "snr_hat is 0 where snr_valid is 0 (r_hat <= 0)");
    out.write("kernel_row" + seed_suffix(r.seed) + ".csv",
              {"j", "theta", "w_clean", "w_corrupted", "w_corrected"}, kernel,
              "row " + std::to_string(p.kernel_row) + " of the row-stochastic kernels");
    for (const KnnAccuracyRow& a : r.accuracy) {
      acc.push_back({seed, static_cast<double>(a.k), a.corrupted, a.corrected});
    }
    summary.push_back({seed, r.r_correlation, r.snr_rel_error_p90,
                       static_cast<double>(r.snr_invalid)});
  }
  out.write("knn_accuracy.csv", {"seed", "k", "accuracy_corrupted", "accuracy_corrected"}, acc);
  out.write("summary.csv", {"seed", "r_correlation", "snr_rel_error_p90", "snr_invalid"},
            summary);
}

void run_two_circle_experiment(const ExperimentConfig& c, TableWriter& out, Progress& progress) {
  const TwoCircleParams p = two_circle_params(c);
  std::vector<TwoCircleResult> results(c.seeds.size());
  parallel_for(results.size(), c.threads, [&](std::size_t s) {
    const auto t0 = std::chrono::steady_clock::now();
    results[s] = run_two_circles(p, c.seeds[s]);
    progress("seed " + std::to_string(c.seeds[s]) + " done in " + fixed3(seconds_since(t0)) + " s");
  });

  std::vector<Row> summary, spectrum;
  for (const TwoCircleResult& r : results) {
    const auto seed = static_cast<double>(r.seed);
    std::vector<Row> points;
    for (Index i = 0; i < r.r_hat.size(); ++i) {
      points.push_back({static_cast<double>(i),
                        static_cast<double>(r.labels[static_cast<std::size_t>(i)]), r.theta(i),
                        r.r_true(i), r.r_hat(i)});
    }
    out.write("points" + seed_suffix(r.seed) + ".csv", {"i", "label", "theta", "r_true", "r_hat"},
              points, "label 0 is the large circle, 1 the small one");

    const SpectralView* views[] = {&r.clean, &r.corrupted, &r.corrected};
    const char* names[] = {"clean", "corrupted", "corrected"};
    for (int v = 0; v < 3; ++v) {
      const LaplacianSpectrum& sp = views[v]->spectrum;
      std::vector<std::string> header{"i", "label"};
      for (Index j = 0; j < sp.eigenvectors.cols(); ++j) {
        header.push_back("psi" + std::to_string(j + 1));
      }
      std::vector<Row> vecs;
      for (Index i = 0; i < sp.eigenvectors.rows(); ++i) {
        Row row{static_cast<double>(i), static_cast<double>(r.labels[static_cast<std::size_t>(i)])};
        for (Index j = 0; j < sp.eigenvectors.cols(); ++j) row.push_back(sp.eigenvectors(i, j));
        vecs.push_back(std::move(row));
      }
      out.write(std::string("eigenvectors_") + names[v] + seed_suffix(r.seed) + ".csv", header,
                vecs);
      for (Index j = 0; j < sp.eigenvalues.size(); ++j) {
        spectrum.push_back({seed, static_cast<double>(v), static_cast<double>(j + 1),
                            sp.eigenvalues(j), sp.residuals(j)});
      }
      const CircleSplit& cs = views[v]->split;
      summary.push_back({seed, static_cast<double>(v), cs.within_rel_var[0], cs.within_rel_var[1],
                         cs.leakage[0], cs.leakage[1], cs.cross_weight_ratio});
    }
  }
  const std::string views_note = "view 0 = clean, 1 = corrupted, 2 = corrected distances";
  out.write("spectrum.csv", {"seed", "view", "index", "eigenvalue", "residual"}, spectrum,
            views_note);
  out.write("summary.csv",
            {"seed", "view", "rel_var_large", "rel_var_small", "leakage_large", "leakage_small",
             "cross_weight_ratio"},
            summary, views_note);
}

void run_decay_experiment(const ExperimentConfig& c, TableWriter& out, Progress& progress) {
  const DecayParams p = decay_params(c);
  const auto t0 = std::chrono::steady_clock::now();
  const CostCurve curve = lsap_cost_curve(p.family, p.n_grid, c.seeds, c.threads);
  progress("cost curve done in " + fixed3(seconds_since(t0)) + " s");

  std::vector<Row> runs, points;
  std::vector<double> ns, c1, c2;
  for (const CostCurveRun& r : curve.runs) {
    runs.push_back({static_cast<double>(r.n), static_cast<double>(r.seed), r.round1, r.round2});
  }
  for (const CostCurvePoint& q : curve.points) {
    points.push_back({static_cast<double>(q.n), q.mean_round1, q.mean_round2});
    ns.push_back(static_cast<double>(q.n));
    c1.push_back(q.mean_round1);
    c2.push_back(q.mean_round2);
  }
  out.write("runs.csv", {"n", "seed", "cost_round1", "cost_round2"}, runs,
            "costs are Tr(P^T D) / n on clean distances");
  out.write("points.csv", {"n", "mean_cost_round1", "mean_cost_round2"}, points);
  if (ns.size() >= 3 && std::all_of(c1.begin(), c1.end(), [](double v) { return v > 0.0; })) {
    out.write("summary.csv", {"slope_round1", "slope_round2"},
              {{loglog_slope(ns, c1), loglog_slope(ns, c2)}});
  } else {
    progress("slope skipped: needs three grid points with positive costs");
  }
}

void run_scaling_experiment(const ExperimentConfig& c, TableWriter& out, Progress& progress) {
  const ScalingConfig s = scaling_params(c);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<ErrorReport> reports = error_scaling_experiment(s);
  progress("sweep done in " + fixed3(seconds_since(t0)) + " s");

  std::vector<Row> runs, points;
  std::vector<double> xs, noise, dist;
  for (const ErrorReport& e : reports) {
    runs.push_back({static_cast<double>(e.n), static_cast<double>(e.m),
                    static_cast<double>(e.seed), e.l1_noise, e.l1_dist});
  }
  const std::size_t per = s.seeds.size();
  for (std::size_t g = 0; g < s.grid.size(); ++g) {
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < per; ++k) {
      a += reports[g * per + k].l1_noise;
      b += reports[g * per + k].l1_dist;
    }
    xs.push_back(static_cast<double>(s.grid[g]));
    noise.push_back(a / static_cast<double>(per));
    dist.push_back(b / static_cast<double>(per));
    points.push_back({xs.back(), noise.back(), dist.back()});
  }
  const char* axis = s.axis == ScalingAxis::M ? "m" : "n";
  out.write("runs.csv", {"n", "m", "seed", "l1_noise", "l1_dist"}, runs);
  out.write("points.csv", {axis, "mean_l1_noise", "mean_l1_dist"}, points);
  if (xs.size() >= 3) {
    out.write("summary.csv", {"slope_l1_noise", "slope_l1_dist"},
              {{loglog_slope(xs, noise), loglog_slope(xs, dist)}},
              std::string("log-log slopes against ") + axis);
  } else {
    progress("slope skipped: needs three grid points");
  }
}

void run_poisson_experiment(const ExperimentConfig& c, TableWriter& out, Progress& progress) {
  const PoissonParams p = poisson_params(c);
  std::vector<PoissonResult> results(c.seeds.size());
  parallel_for(results.size(), c.threads, [&](std::size_t s) {
    const auto t0 = std::chrono::steady_clock::now();
    results[s] = run_poisson_surrogate(p, c.seeds[s]);
    progress("seed " + std::to_string(c.seeds[s]) + " done in " + fixed3(seconds_since(t0)) + " s");
  });

  std::vector<Row> impurity, summary;
  for (const PoissonResult& r : results) {
    const auto seed = static_cast<double>(r.seed);
    std::vector<Row> points;
    for (Index i = 0; i < r.r_hat.size(); ++i) {
      points.push_back({static_cast<double>(i),
                        static_cast<double>(i / p.surrogate.cells_per_cluster), r.r_hat(i),
                        r.reference(i)});
    }
    out.write("points" + seed_suffix(r.seed) + ".csv",
              {"i", "label", "r_hat", "inverse_library_size"}, points);
    for (const ImpurityRow& row : r.impurity) {
      impurity.push_back({seed, static_cast<double>(row.k), row.corrupted, row.corrected});
    }
    summary.push_back({seed, r.correlation});
  }
  out.write("impurity.csv", {"seed", "k", "impurity_corrupted", "impurity_corrected"}, impurity);
  out.write("summary.csv", {"seed", "r_correlation"}, summary);
}

void run_correct_file(const ExperimentConfig& c, TableWriter& out, Progress& progress,
                      const fs::path& dir) {
  const CorrectFileParams p = correct_file_params(c);
  DataMatrix data = read_matrix(p.input, p.format);
  progress("read " + std::to_string(data.rows()) + " x " + std::to_string(data.cols()) +
           " matrix");
  if (p.normalize) data = library_normalize(data);
  const CorrectedDistances corrected = correct_distances(pairwise_sq_dists(data));

  std::vector<Row> r_hat;
  for (Index i = 0; i < corrected.r_hat.size(); ++i) {
    r_hat.push_back({static_cast<double>(i), corrected.r_hat(i)});
  }
  out.write("r_hat.csv", {"i", "r_hat"}, r_hat);
  write_matrix(DataMatrix(corrected.d_hat.values()), dir / "d_hat.bin", MatrixFormat::BinaryDense);
  out.note_file("d_hat.bin");
  if (p.knn_k > 0) {
    std::ofstream knn_out(dir / "knn.csv");
    write_knn_csv(knn(corrected.d_hat, p.knn_k), knn_out);
    if (!knn_out) throw Error(ErrorKind::IoError, "write failed for knn.csv");
    out.note_file("knn.csv");
  }
  progress("wrote r_hat.csv and d_hat.bin");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

std::optional<ExperimentKind> parse_experiment(const std::string& name) {
  std::string key = name;
  std::replace(key.begin(), key.end(), '-', '_');
  for (const auto& k : kKinds) {
    if (key == k.name) return k.kind;
  }
  return std::nullopt;
}

std::string experiment_name(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

std::vector<Seed> parse_seeds(const std::string& text) {
  std::vector<Seed> out;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto dots = tok.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_number<Seed>("seeds", tok));
      continue;
    }
    const Seed lo = parse_number<Seed>("seeds", tok.substr(0, dots));
    const Seed hi = parse_number<Seed>("seeds", tok.substr(dots + 2));
    if (hi < lo) bad("seeds: range '" + tok + "' is descending");
    if (hi - lo > 100000) bad("seeds: range '" + tok + "' is too long");
    for (Seed s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) bad("seeds: empty list");
  return out;
}

std::vector<std::string> known_overrides(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Circle:
      return {"phi", "noise_scale", "sigma_sq", "kernel_row", "k_grid"};
    case ExperimentKind::TwoCircles:
      return {"bandwidth_k", "eigenpairs"};
    case ExperimentKind::LsapDecay:
      return {"family", "n_grid"};
    case ExperimentKind::ErrorScalingM:
    case ExperimentKind::ErrorScalingN:
      return {"grid", "tau_lo", "tau_hi", "delta_lo", "delta_hi", "noise"};
    case ExperimentKind::PoissonSurrogate:
      return {"clusters",       "library_lo",      "library_hi",    "library_window",
              "base_log_sd",    "marker_fraction", "marker_log_sd", "k_grid"};
    case ExperimentKind::CorrectFile:
      return {"input", "format", "normalize", "knn_k"};
  }
  return {};
}

std::string describe_defaults(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Circle:
      return "n=1000 m=10000 seeds=1..5 sigma_sq=0.5 phi=0 k_grid=5,10,20,40,60,80,100";
    case ExperimentKind::TwoCircles:
      return "n=4000 m=2000 seeds=1 bandwidth_k=150 eigenpairs=6 (reduced m)";
    case ExperimentKind::LsapDecay:
      return "family=ball_and_ring n_grid=250,500,1000,2000,4000 seeds=1..10";
    case ExperimentKind::ErrorScalingM:
      return "n=2000 grid(m)=1000,3162,10000,31623,100000 seeds=1..5 (desk-scale n)";
    case ExperimentKind::ErrorScalingN:
      return "m=100000 grid(n)=250,500,1000,2000 seeds=1..5 (desk-scale m)";
    case ExperimentKind::PoissonSurrogate:
      return "n=3000 (6 clusters x 500 cells) m=5000 genes seeds=1..5 k_grid=5,10,20,30,40,50";
    case ExperimentKind::CorrectFile:
      return "input=<matrix file> format=auto normalize=0 knn_k=0";
  }
  return "";
}

ExperimentConfig with_defaults(ExperimentConfig c) {
  struct Defaults {
    Index n, m;
    Seed seed_lo, seed_hi;
  };
  Defaults d{1000, 10000, 1, 5};
  switch (c.experiment) {
    case ExperimentKind::Circle:
      break;
    case ExperimentKind::TwoCircles:
      d = {4000, 2000, 1, 1};
      break;
    case ExperimentKind::LsapDecay:
      d = {4000, 3, 1, 10};
      break;
    case ExperimentKind::ErrorScalingM:
      d = {2000, 100000, 1, 5};
      break;
    case ExperimentKind::ErrorScalingN:
      d = {2000, 100000, 1, 5};
      break;
    case ExperimentKind::PoissonSurrogate:
      d = {3000, 5000, 1, 5};
      break;
    case ExperimentKind::CorrectFile:
      d = {4, 1, 0, 0};
      break;
  }
  if (!c.n) c.n = d.n;
  if (!c.m) c.m = d.m;
  if (c.seeds.empty()) {
    for (Seed s = d.seed_lo; s <= d.seed_hi; ++s) c.seeds.push_back(s);
  }
  return c;
}

std::vector<std::string> validate(const ExperimentConfig& config) {
  std::vector<std::string> out;
  const ExperimentConfig c = [&] {
    ExperimentConfig copy = config;
    if (!copy.n) copy.n = with_defaults(config).n;
    if (!copy.m) copy.m = with_defaults(config).m;
    return copy;
  }();
  const bool file_mode = c.experiment == ExperimentKind::CorrectFile;
  if (!file_mode && *c.n < 4) out.push_back("n must be >= 4");
  if (!file_mode && *c.m < 1) out.push_back("m must be >= 1");
  if (c.seeds.empty()) out.push_back("seeds must not be empty");
  if (c.threads < 1) out.push_back("threads must be >= 1");

  const auto known = known_overrides(c.experiment);
  bool overrides_ok = true;
  for (const auto& [key, value] : c.overrides) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      out.push_back("unknown override '" + key + "' for " + experiment_name(c.experiment));
      overrides_ok = false;
    }
  }
  if (!out.empty() || !overrides_ok) return out;

  try {
    switch (c.experiment) {
      case ExperimentKind::Circle:
        circle_params(c);
        break;
      case ExperimentKind::TwoCircles:
        two_circle_params(c);
        break;
      case ExperimentKind::LsapDecay:
        decay_params(c);
        break;
      case ExperimentKind::ErrorScalingM:
      case ExperimentKind::ErrorScalingN:
        scaling_params(c);
        break;
      case ExperimentKind::PoissonSurrogate:
        poisson_params(c);
        break;
      case ExperimentKind::CorrectFile:
        correct_file_params(c);
        break;
    }
  } catch (const Error& e) {
    out.push_back(e.what());
  }
  return out;
}

void run(const ExperimentConfig& config, std::ostream& log) {
  const ExperimentConfig c = with_defaults(config);
  if (const auto problems = validate(c); !problems.empty()) {
    throw Error(ErrorKind::InvalidArgument, problems.front());
  }
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + c.output_dir.string());

  const std::string name = experiment_name(c.experiment);
  Progress progress(log, name);
  TableWriter out(c, c.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  switch (c.experiment) {
    case ExperimentKind::Circle:
      run_circle_experiment(c, out, progress);
      break;
    case ExperimentKind::TwoCircles:
      run_two_circle_experiment(c, out, progress);
      break;
    case ExperimentKind::LsapDecay:
      run_decay_experiment(c, out, progress);
      break;
    case ExperimentKind::ErrorScalingM:
    case ExperimentKind::ErrorScalingN:
      run_scaling_experiment(c, out, progress);
      break;
    case ExperimentKind::PoissonSurrogate:
      run_poisson_experiment(c, out, progress);
      break;
    case ExperimentKind::CorrectFile:
      run_correct_file(c, out, progress, c.output_dir);
      break;
  }

  nlohmann::json meta;
  meta["experiment"] = name;
  meta["git_describe"] = git_describe();
  meta["timestamp_utc"] = utc_timestamp();
  meta["elapsed_seconds"] = seconds_since(t0);
  meta["n"] = *c.n;
  meta["m"] = *c.m;
  meta["seeds"] = c.seeds;
  meta["threads"] = c.threads;
  meta["overrides"] = c.overrides;
  meta["defaults"] = describe_defaults(c.experiment);
  meta["rng"] = "mt19937_64 seeded by seed_seq{seed, stream, index}";
  meta["files"] = out.files();
  std::ofstream meta_out(c.output_dir / "metadata.json");
  meta_out << meta.dump(2) << '\n';
  if (!meta_out) throw Error(ErrorKind::IoError, "cannot write metadata.json");
  progress("finished in " + fixed3(seconds_since(t0)) + " s, outputs in " + c.output_dir.string());
}

}  // namespace hetdist
