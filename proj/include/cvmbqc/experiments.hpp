#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvmbqc/common.hpp"
#include "cvmbqc/nogo.hpp"
#include "cvmbqc/scheme.hpp"
#include "cvmbqc/stats.hpp"
#include "cvmbqc/wire.hpp"

// Batch experiment runner: one config record, one engine per named
// experiment, machine-readable outputs. All engines are deterministic for a
// fixed (config, seed) independent of the worker count; the CLI layer owns
// all file I/O.
namespace cvmbqc::exp {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
  std::string experiment;  // compile|couple|readout|transport|nogo-scan|
                           // weak-compile|truncation|error-growth|failure-bound
  double alpha = 2.0;
  double theta = 0.39269908169872414;  // pi/8
  int n_max = 40;
  long trials = 1000;
  std::vector<double> eps = {1e-9};
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";  // csv | jsonl
  int threads = 1;

  // transport
  long steps = 200;
  long trajectories = 1000;
  std::string wire = "gaussian";  // gaussian | synthetic
  double ratio = 0.9;             // synthetic wire singular ratio

  // truncation
  std::vector<double> alpha_list = {0.5, 1.0, 2.0};
  std::vector<long> nmax_list = {10, 20, 40};

  // couple / readout sampling
  long samples = 100000;

  // nogo-scan
  int theta_grid = 64;
  long scan_samples = 1000000;
  int n_targets = 5;

  // weak-compile
  double weak_p0 = 8.0;
  double weak_phi = -1.2;  // target phase; requires p0*q0 = -phi

  // error-growth
  long growth_n = 1000;
  double growth_eps = 1e-3;
  std::string growth_mode = "unitary";  // unitary | nonunitary

  // failure-bound
  std::vector<long> layout_n = {4, 16, 64};
  long layout_samples = 10000;

  std::string canonical() const;
  void validate() const;
};

// Strict key=value parser ('#' comments); unknown keys and malformed values
// are rejected with a line-numbered message.
ExperimentConfig parse_config_text(const std::string& text);

// ---- engines ----------------------------------------------------------

struct CompileSummary {
  struct PerEps {
    double eps = 0.0;
    double mean_steps = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
  };
  std::vector<PerEps> per_eps;
  double p_floor = 0.0;
  double x_min = 0.0, x_max = 0.0;
  std::vector<double> window_probs;  // fresh-plan success probabilities seen
  bool all_terminated = true;
  std::vector<scheme::WalkTrace> traces;  // kept only when requested
};
CompileSummary run_compile(const ExperimentConfig& cfg, bool keep_traces = false);

struct TruncationRow {
  double alpha = 0.0;
  long n_max = 0;
  double n_mean = 0.0;
  double bound = 0.0;
  double measured = 0.0;
};
std::vector<TruncationRow> run_truncation(const ExperimentConfig& cfg);

struct CoupleSummary {
  double max_oracle_dist = 0.0;  // closed form vs Fock oracle, n1,n2 <= 6
  bool parity_law_holds = true;  // entangling iff n1+n2 odd, n1,n2 <= 8
  double odd_frequency = 0.0;
  double odd_analytic = 0.0;  // parity summation
  double odd_closed_form = 0.0;
  double z_score = 0.0;
  long samples = 0;
};
CoupleSummary run_couple(const ExperimentConfig& cfg);

struct InitializeSummary {
  double min_fidelity = 1.0;
  double mean_repetitions = 0.0;
  std::vector<double> per_seed_mean;
  std::vector<double> per_seed_se;
  bool seeds_stable = true;  // pairwise means within 3 sigma
  std::vector<long> repetition_histogram;
};
InitializeSummary run_initialize(const ExperimentConfig& cfg, int n_seeds = 5);

struct TransportSummary {
  std::vector<double> mean_f;
  std::vector<double> mean_infidelity;
  std::vector<double> min_f;
  stats::LinearFit log_mean_f_fit;  // log E[f] vs step (synthetic wire)
  double blind_final = 0.0;
};
TransportSummary run_transport(const ExperimentConfig& cfg, bool with_blind = false);

struct ScanSummary {
  std::vector<double> target_phases;
  std::vector<nogo::ControlScanResult> per_target;
  bool haar_counts_zero = true;  // a Haar SU(2) target never comes close
};
ScanSummary run_nogo_scan(const ExperimentConfig& cfg);

struct WeakCompileSummary {
  struct Row {
    double eps = 0.0;
    double mean_steps = 0.0;
    double se = 0.0;
    double max_distance = 0.0;  // accepted-gate distance, always <= eps
  };
  std::vector<Row> rows;
  stats::LinearFit loglog;  // log mean steps vs log(1/eps)
};
WeakCompileSummary run_weak_compile(const ExperimentConfig& cfg);

struct GrowthSummary {
  struct Row {
    std::string mode;
    double eps = 0.0;
    long n = 0;
    double bound = 0.0;
    double witnessed = 0.0;
  };
  std::vector<Row> rows;
};
GrowthSummary run_error_growth(const ExperimentConfig& cfg);

struct FailureBoundSummary {
  struct Cell {
    long n = 0;
    long k = 0;
    double p0 = 0.0;
    double bound = 0.0;
    double frequency = 0.0;
  };
  std::vector<Cell> cells;
  double p0 = 0.0;  // minimum observed window probability
};
FailureBoundSummary run_failure_bound(const ExperimentConfig& cfg);

// Dispatch on cfg.experiment, write the data file(s) plus a manifest, and
// return the exit code (0 on success). Throws ConfigError for invalid
// configs and NumericalContractViolation for violated numeric invariants.
int run(const ExperimentConfig& cfg);

// Work-stealing loop over [0, n); deterministic because each index writes its
// own slot.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

}  // namespace cvmbqc::exp
