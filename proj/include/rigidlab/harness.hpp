#pragma once

// Seeded Monte Carlo experiments over GAF zeros and Ginibre spectra, their
// configuration, and CSV / JSON / plot-data reports.
//
// Every trial draws from its own stream, derive_seed(master_seed, tag, n,
// trial), and trials are reduced in (n, trial) order, so a report depends
// only on the config.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rigidlab/ensembles.hpp"
#include "rigidlab/mcmc.hpp"

namespace rigidlab {

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment { tolerance_gaf, tolerance_ginibre, rigidity_sum, expansion_decay, tails, nr2_bound };

const char* to_string(Experiment e);
/// Throws DomainError for an unknown name.
Experiment experiment_from_string(const std::string& name);
const std::vector<Experiment>& all_experiments();
/// One line per experiment: name and the phenomenon it probes.
std::string experiment_help();

enum class Format { csv, json, plotdata };
Format format_from_string(const std::string& name);

struct ExperimentConfig {
  Experiment experiment = Experiment::tolerance_gaf;
  std::vector<int> n_list{20, 40, 80};
  int m = 2;
  double r0 = 1.0;
  int trials = 50;
  int grid_resolution = 200;    // res x res midpoints on the disk (2-D grids)
  int grid_resolution_4d = 32;  // per-factor resolution for grids over D x D
  bool use_mcmc = false;        // tolerance experiments with m >= 3
  McmcConfig mcmc;
  std::uint64_t master_seed = 1;
  std::string output_path = ".";
  unsigned workers = 0;  // 0 = hardware concurrency
  bool timing = false;   // adds wall-clock to the JSON summary
};

/// Throws DomainError naming the offending field.
void validate(const ExperimentConfig& cfg);

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are an error.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
/// Throws IoError if the file cannot be read, DomainError if it does not parse.
ExperimentConfig load_config(const std::filesystem::path& path);

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

struct PlotSeries {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> points;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;  // one per (n, trial), n-major
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<PlotSeries> plots;
  int flagged = 0;
  std::vector<std::pair<std::string, int>> flag_reasons;
  bool degraded = false;  // flag rate >= 2%
  std::optional<double> wall_clock_seconds;
};

inline constexpr double kMinSeparation = 0.05;
inline constexpr int kMinGridPoints = 10;
inline constexpr int kSplitAttempts = 2000;
inline constexpr double kDegradedFlagRate = 0.02;

// Per-trial results, exposed for testing.

struct GafDraw {
  GafInstance instance;
  SplitConfiguration split;
  std::string flag;  // "", "no_m_split", "root_solver"
};

/// GAF of degree n from `seed`, redrawn within the same stream until exactly
/// m zeros fall in the disk (at most kSplitAttempts draws).
GafDraw draw_gaf_with_m(int n, int m, double r0, std::uint64_t seed);

struct ToleranceTrial {
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  std::vector<cplx> omega;
  cplx s{0.0, 0.0};
  // R = rho / |Delta(zeta)|^2 over the valid set, scaled to geometric mean 1
  double log_sup = 0.0;
  double log_inf = 0.0;
  int grid_points = 0;
  std::string flag;
};

/// Valid set: grid nodes (or chain states) with all inside points at
/// distance >= kMinSeparation from each other and from every omega.
ToleranceTrial tolerance_gaf_trial(const ExperimentConfig& cfg, int n, int trial);
ToleranceTrial tolerance_ginibre_trial(const ExperimentConfig& cfg, int n, int trial);

struct RigidityTrial {
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  cplx mean_sum{0.0, 0.0};
  double variance = 0.0;  // E |sum zeta - E sum zeta|^2 given omega
  int grid_points = 0;
  std::string flag;
};

RigidityTrial rigidity_trial(const ExperimentConfig& cfg, int n, int trial);

ExperimentReport run_tolerance_gaf(const ExperimentConfig& cfg);
ExperimentReport run_tolerance_ginibre(const ExperimentConfig& cfg);
ExperimentReport run_rigidity_sum(const ExperimentConfig& cfg);
ExperimentReport run_expansion_decay(const ExperimentConfig& cfg);
ExperimentReport run_tails(const ExperimentConfig& cfg);
ExperimentReport run_nr2_bound(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::string to_csv(const ExperimentReport& report);
nlohmann::ordered_json to_json(const ExperimentReport& report);
/// Shortest round-trip decimal form ("nan", "inf", "-inf" for non-finite).
std::string format_double(double x);

/// Writes <dir>/<experiment>.csv, .json, or one <experiment>_<series>.dat per
/// plot series. Returns the paths written; throws IoError naming the path.
std::vector<std::filesystem::path> emit(const ExperimentReport& report, Format format,
                                       const std::filesystem::path& dir);

}  // namespace rigidlab
