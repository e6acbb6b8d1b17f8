#include "cvmbqc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cvmbqc/io.hpp"

namespace cvmbqc::exp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names = {
      "compile",     "couple",       "readout",     "transport",    "nogo-scan",
      "weak-compile", "truncation",  "error-growth", "failure-bound"};
  return names;
}

scheme::SchemeParameters scheme_params(const ExperimentConfig& cfg) {
  scheme::SchemeParameters p;
  p.alpha = cfg.alpha;
  p.theta = cfg.theta;
  p.n_max = cfg.n_max;
  p.validate();
  return p;
}

template <typename T>
std::string join_list(const std::vector<T>& xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_same_v<T, double>)
      os << io::format_double(xs[i]);
    else
      os << xs[i];
  }
  return os.str();
}

}  // namespace

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  auto worker = [&]() {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "experiment=" << experiment << ";alpha=" << io::format_double(alpha)
     << ";theta=" << io::format_double(theta) << ";n_max=" << n_max << ";trials=" << trials
     << ";eps=" << join_list(eps) << ";seed=" << seed << ";format=" << format
     << ";steps=" << steps << ";trajectories=" << trajectories << ";wire=" << wire
     << ";ratio=" << io::format_double(ratio) << ";alpha_list=" << join_list(alpha_list)
     << ";nmax_list=" << join_list(nmax_list) << ";samples=" << samples
     << ";theta_grid=" << theta_grid << ";scan_samples=" << scan_samples
     << ";n_targets=" << n_targets << ";weak_p0=" << io::format_double(weak_p0)
     << ";weak_phi=" << io::format_double(weak_phi) << ";growth_n=" << growth_n
     << ";growth_eps=" << io::format_double(growth_eps) << ";growth_mode=" << growth_mode
     << ";layout_n=" << join_list(layout_n) << ";layout_samples=" << layout_samples;
  return os.str();
}

void ExperimentConfig::validate() const {
  const auto& names = known_experiments();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    throw ConfigError("unknown experiment '" + experiment + "'");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  for (double e : eps)
    if (!(e > 0)) throw ConfigError("eps values must be > 0");
  if (eps.empty()) throw ConfigError("eps must not be empty");
  if (format != "csv" && format != "jsonl") throw ConfigError("format must be csv or jsonl");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (wire != "gaussian" && wire != "synthetic")
    throw ConfigError("wire must be gaussian or synthetic");
  if (growth_mode != "unitary" && growth_mode != "nonunitary")
    throw ConfigError("growth_mode must be unitary or nonunitary");
  if (!(ratio > 0 && ratio <= 1)) throw ConfigError("ratio must lie in (0,1]");
  if (trajectories < 1 || steps < 0) throw ConfigError("bad transport sizes");
  if (samples < 1 || scan_samples < 1 || layout_samples < 1)
    throw ConfigError("sample counts must be >= 1");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line_no) + ": " + msg);
  };
  auto parse_double = [&](const std::string& v) {
    std::size_t pos = 0;
    double d = 0;
    try {
      d = std::stod(v, &pos);
    } catch (...) {
      fail("expected a number, got '" + v + "'");
    }
    if (pos != v.size()) fail("trailing characters in number '" + v + "'");
    return d;
  };
  auto parse_long = [&](const std::string& v) {
    std::size_t pos = 0;
    long d = 0;
    try {
      d = std::stol(v, &pos);
    } catch (...) {
      fail("expected an integer, got '" + v + "'");
    }
    if (pos != v.size()) fail("trailing characters in integer '" + v + "'");
    return d;
  };
  auto split_list = [](const std::string& v) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : v) {
      if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    return parts;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) fail("empty value for '" + key + "'");
    if (key == "experiment") cfg.experiment = value;
    else if (key == "alpha") cfg.alpha = parse_double(value);
    else if (key == "theta") cfg.theta = parse_double(value);
    else if (key == "n_max" || key == "nmax") cfg.n_max = static_cast<int>(parse_long(value));
    else if (key == "trials") cfg.trials = parse_long(value);
    else if (key == "eps") {
      cfg.eps.clear();
      for (const auto& part : split_list(value)) cfg.eps.push_back(parse_double(part));
    }
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(value));
    else if (key == "out") cfg.out = value;
    else if (key == "format") cfg.format = value;
    else if (key == "threads") cfg.threads = static_cast<int>(parse_long(value));
    else if (key == "steps") cfg.steps = parse_long(value);
    else if (key == "trajectories") cfg.trajectories = parse_long(value);
    else if (key == "wire") cfg.wire = value;
    else if (key == "ratio") cfg.ratio = parse_double(value);
    else if (key == "alpha_list") {
      cfg.alpha_list.clear();
      for (const auto& part : split_list(value)) cfg.alpha_list.push_back(parse_double(part));
    }
    else if (key == "nmax_list") {
      cfg.nmax_list.clear();
      for (const auto& part : split_list(value)) cfg.nmax_list.push_back(parse_long(part));
    }
    else if (key == "samples") cfg.samples = parse_long(value);
    else if (key == "theta_grid") cfg.theta_grid = static_cast<int>(parse_long(value));
    else if (key == "scan_samples") cfg.scan_samples = parse_long(value);
    else if (key == "n_targets") cfg.n_targets = static_cast<int>(parse_long(value));
    else if (key == "weak_p0") cfg.weak_p0 = parse_double(value);
    else if (key == "weak_phi") cfg.weak_phi = parse_double(value);
    else if (key == "growth_n") cfg.growth_n = parse_long(value);
    else if (key == "growth_eps") cfg.growth_eps = parse_double(value);
    else if (key == "growth_mode") cfg.growth_mode = value;
    else if (key == "layout_n") {
      cfg.layout_n.clear();
      for (const auto& part : split_list(value)) cfg.layout_n.push_back(parse_long(part));
    }
    else if (key == "layout_samples") cfg.layout_samples = parse_long(value);
    else fail("unknown key '" + key + "'");
  }
  return cfg;
}

CompileSummary run_compile(const ExperimentConfig& cfg, bool keep_traces) {
  const scheme::SchemeParameters p = scheme_params(cfg);
  const scheme::PFloorEstimate pf = scheme::p_floor(p);

  struct TrialOut {
    std::vector<long> steps_per_eps;
    std::vector<double> windows;
    bool terminated = true;
    scheme::WalkTrace trace;
  };
  std::vector<TrialOut> trials(cfg.trials);

  parallel_for(cfg.trials, cfg.threads, [&](long t) {
    Rng target_rng(cfg.seed, static_cast<std::uint64_t>(t), 0);
    const Gate2 target = su2::haar_random_su2(target_rng);
    TrialOut& out = trials[t];
    out.steps_per_eps.resize(cfg.eps.size());
    for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
      Rng walk_rng(cfg.seed, static_cast<std::uint64_t>(t), 1);
      scheme::WalkTrace trace = scheme::compile_gate(p, target, walk_rng, cfg.eps[e]);
      out.steps_per_eps[e] = static_cast<long>(trace.steps.size());
      out.terminated = out.terminated && trace.success;
      if (e == 0) {
        // Fresh-plan success probabilities: at the start and after every
        // unintended outcome.
        const Complex det =
            target(0, 0) * target(1, 1) - target(0, 1) * target(1, 0);
        const Gate2 target_su = target / std::sqrt(det);
        Gate2 total = Gate2::Identity();
        bool fresh = true;
        for (const auto& step : trace.steps) {
          if (fresh) {
            const Gate2 residual = target_su * total.adjoint();
            double prob = 1.0;
            for (double angle : scheme::plan_phase_angles(residual)) {
              const auto choice = scheme::choose_shift(p, angle);
              prob *= choice.success_probability;
            }
            out.windows.push_back(prob);
            fresh = false;
          }
          total = step.applied * total;
          if (step.observed_n != step.intended_n) fresh = true;
        }
        if (keep_traces) out.trace = std::move(trace);
      }
    }
  });

  CompileSummary summary;
  summary.p_floor = pf.p_floor;
  summary.x_min = pf.x_min;
  summary.x_max = pf.x_max;
  for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
    std::vector<double> steps;
    steps.reserve(cfg.trials);
    for (const auto& t : trials) steps.push_back(static_cast<double>(t.steps_per_eps[e]));
    CompileSummary::PerEps row;
    row.eps = cfg.eps[e];
    row.mean_steps = stats::mean(steps);
    const double se = stats::stderr_of_mean(steps);
    row.ci_low = row.mean_steps - 1.959963984540054 * se;
    row.ci_high = row.mean_steps + 1.959963984540054 * se;
    summary.per_eps.push_back(row);
  }
  for (auto& t : trials) {
    summary.all_terminated = summary.all_terminated && t.terminated;
    summary.window_probs.insert(summary.window_probs.end(), t.windows.begin(),
                                t.windows.end());
    if (keep_traces) summary.traces.push_back(std::move(t.trace));
  }
  return summary;
}

std::vector<TruncationRow> run_truncation(const ExperimentConfig& cfg) {
  std::vector<TruncationRow> rows;
  for (double alpha : cfg.alpha_list) {
    const int big = static_cast<int>(4.0 * alpha * alpha) + 160;
    const fock::FockVector full = fock::coherent_state(alpha, big);
    for (long n_max : cfg.nmax_list) {
      TruncationRow row;
      row.alpha = alpha;
      row.n_max = n_max;
      row.n_mean = alpha * alpha;
      row.bound = fock::truncation_bound(row.n_mean, 1, static_cast<int>(n_max)).trace_norm_bound;
      row.measured = fock::truncation_trace_distance(full, static_cast<int>(n_max));
      rows.push_back(row);
    }
  }
  return rows;
}

CoupleSummary run_couple(const ExperimentConfig& cfg) {
  const scheme::SchemeParameters p = scheme_params(cfg);
  CoupleSummary out;
  out.samples = cfg.samples;

  const auto branches = scheme::coupling_oracle_branches(p);
  const int d = p.n_max + 1;
  for (int n1 = 0; n1 <= 6; ++n1)
    for (int n2 = 0; n2 <= 6; ++n2) {
      Gate4 oracle = Gate4::Zero();
      double scale = 0.0;
      for (int b = 0; b < 4; ++b) {
        const Complex amp = branches[b].amplitudes[n1 * d + n2];
        oracle(b, b) = amp;
        scale += std::norm(amp);
      }
      oracle /= std::sqrt(scale / 4.0);
      const Gate4 closed = scheme::coupling_gate(n1, n2);
      out.max_oracle_dist =
          std::max(out.max_oracle_dist, su2::dist_up_to_phase(closed, oracle));
    }

  for (int n1 = 0; n1 <= 8 && out.parity_law_holds; ++n1)
    for (int n2 = 0; n2 <= 8; ++n2)
      if (su2::is_entangling(scheme::coupling_gate(n1, n2)) != (((n1 + n2) % 2) == 1)) {
        out.parity_law_holds = false;
        break;
      }

  const double mean = p.gamma() * p.gamma();
  std::vector<char> odd(cfg.samples);
  parallel_for(cfg.samples, cfg.threads, [&](long s) {
    Rng rng(cfg.seed, 999, static_cast<std::uint64_t>(s));
    const int n1 = rng.poisson(mean);
    const int n2 = rng.poisson(mean);
    odd[s] = ((n1 + n2) % 2) == 1;
  });
  long count = 0;
  for (char c : odd) count += c;
  out.odd_frequency = static_cast<double>(count) / cfg.samples;
  out.odd_analytic = scheme::cz_success_probability(p);
  out.odd_closed_form = 0.5 * (1.0 - std::exp(-4.0 * mean));
  const double sigma =
      std::sqrt(out.odd_analytic * (1.0 - out.odd_analytic) / cfg.samples);
  out.z_score = std::abs(out.odd_frequency - out.odd_analytic) / sigma;
  return out;
}

InitializeSummary run_initialize(const ExperimentConfig& cfg, int n_seeds) {
  const scheme::SchemeParameters p = scheme_params(cfg);
  InitializeSummary out;
  std::vector<std::vector<double>> reps(n_seeds);
  std::vector<double> min_fid(n_seeds, 1.0);
  std::vector<long> hist(256, 0);
  for (int s = 0; s < n_seeds; ++s) {
    std::vector<double> r(cfg.trials);
    std::vector<double> f(cfg.trials);
    const std::uint64_t master = cfg.seed + static_cast<std::uint64_t>(s);
    parallel_for(cfg.trials, cfg.threads, [&](long t) {
      Rng state_rng(master, static_cast<std::uint64_t>(t), 0);
      const Gate2 u = su2::haar_random_su2(state_rng);
      Eigen::Vector2cd start(u(0, 0), u(1, 0));
      Rng walk_rng(master, static_cast<std::uint64_t>(t), 1);
      const auto res = scheme::initialize(p, start, walk_rng);
      r[t] = static_cast<double>(res.repetitions);
      f[t] = res.fidelity;
    });
    for (long t = 0; t < cfg.trials; ++t) {
      min_fid[s] = std::min(min_fid[s], f[t]);
      const long bin = std::min<long>(static_cast<long>(r[t]), 255);
      ++hist[bin];
    }
    reps[s] = std::move(r);
  }
  out.repetition_histogram = hist;
  std::vector<double> pooled;
  for (int s = 0; s < n_seeds; ++s) {
    out.per_seed_mean.push_back(stats::mean(reps[s]));
    out.per_seed_se.push_back(stats::stderr_of_mean(reps[s]));
    out.min_fidelity = std::min(out.min_fidelity, min_fid[s]);
    pooled.insert(pooled.end(), reps[s].begin(), reps[s].end());
  }
  out.mean_repetitions = stats::mean(pooled);
  for (int i = 0; i < n_seeds; ++i)
    for (int j = i + 1; j < n_seeds; ++j) {
      const double gap = std::abs(out.per_seed_mean[i] - out.per_seed_mean[j]);
      const double sigma = std::sqrt(out.per_seed_se[i] * out.per_seed_se[i] +
                                     out.per_seed_se[j] * out.per_seed_se[j]);
      if (gap > 3.0 * sigma) out.seeds_stable = false;
    }
  return out;
}

TransportSummary run_transport(const ExperimentConfig& cfg, bool with_blind) {
  TransportSummary out;
  wire::WireTensor w;
  wire::Basis basis;
  if (cfg.wire == "gaussian") {
    const ComplexMatrix u = wire::controlled_rotation_interaction(cfg.theta, cfg.n_max);
    w = wire::matrices_from_interaction(
        u, fock::coherent_state(cfg.alpha, cfg.n_max).amplitudes, 2);
    wire::ContinuousBasis cb;
    cb.theta = 0.0;
    cb.x_lim = std::sqrt(2.0) * cfg.alpha + 6.0;
    cb.label = "homodyne-q";
    basis = cb;
  } else {
    w = wire::synthetic_ratio_wire(cfg.ratio);
    basis = wire::DiscreteBasis{};
  }
  const auto res = wire::transport_fidelity_trace(w, static_cast<int>(cfg.steps), basis,
                                                  static_cast<int>(cfg.trajectories), cfg.seed,
                                                  cfg.threads);
  out.mean_f = res.mean_f;
  out.mean_infidelity = res.mean_infidelity;
  out.min_f = res.min_f;
  std::vector<double> ns, logf;
  for (std::size_t s = 1; s < res.mean_f.size(); ++s) {
    if (res.mean_f[s] <= 0) continue;
    ns.push_back(static_cast<double>(s));
    logf.push_back(std::log(res.mean_f[s]));
  }
  if (ns.size() >= 3) out.log_mean_f_fit = stats::linear_fit(ns, logf);
  if (with_blind) {
    std::vector<Gate2> finals(res.final_products.begin(),
                              res.final_products.begin() +
                                  std::min<std::size_t>(res.final_products.size(), 32));
    Rng rng(cfg.seed, 4242);
    out.blind_final = wire::transport_blind_fidelity(finals, rng);
  }
  return out;
}

ScanSummary run_nogo_scan(const ExperimentConfig& cfg) {
  ScanSummary out;
  std::vector<Gate2> targets;
  Rng phase_rng(cfg.seed, 777);
  for (int t = 0; t < cfg.n_targets; ++t) {
    const double phi = phase_rng.uniform(0.0, 2.0 * kPi);
    out.target_phases.push_back(phi);
    targets.push_back(su2::phase_gate(phi));
  }
  // One Haar SU(2) target rides along: every gate of the wire is diagonal, so
  // its counts stay at zero (the suppression bound holds vacuously).
  Rng haar_rng(cfg.seed, 778);
  targets.push_back(su2::haar_random_su2(haar_rng));

  std::vector<double> eps_grid;
  for (int i = 0; i <= 6; ++i) eps_grid.push_back(std::pow(10.0, -3.0 + 2.0 * i / 6.0));

  auto results = nogo::control_scan(targets, eps_grid, cfg.theta_grid, cfg.scan_samples,
                                    cfg.seed, cfg.threads);
  const auto& haar_res = results.back();
  for (double ph : haar_res.p_hat)
    if (ph > 0) out.haar_counts_zero = false;
  results.pop_back();
  out.per_target = std::move(results);
  return out;
}

WeakCompileSummary run_weak_compile(const ExperimentConfig& cfg) {
  nogo::GaussianWireSpec spec;
  spec.p0 = cfg.weak_p0;
  spec.q0 = -cfg.weak_phi / cfg.weak_p0;
  WeakCompileSummary out;
  for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
    std::vector<double> steps(cfg.trials);
    std::vector<double> dists(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](long t) {
      Rng rng(cfg.seed, static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(t));
      const auto res = nogo::weak_phase_compiler(spec, cfg.weak_phi, cfg.eps[e], rng);
      steps[t] = static_cast<double>(res.steps);
      dists[t] = res.distance;
    });
    WeakCompileSummary::Row row;
    row.eps = cfg.eps[e];
    row.mean_steps = stats::mean(steps);
    row.se = stats::stderr_of_mean(steps);
    row.max_distance = *std::max_element(dists.begin(), dists.end());
    out.rows.push_back(row);
  }
  if (out.rows.size() >= 2) {
    std::vector<double> lx, ly;
    for (const auto& r : out.rows) {
      lx.push_back(std::log(1.0 / r.eps));
      ly.push_back(std::log(r.mean_steps));
    }
    out.loglog = stats::linear_fit(lx, ly);
  }
  return out;
}

GrowthSummary run_error_growth(const ExperimentConfig& cfg) {
  GrowthSummary out;
  const bool unitary = cfg.growth_mode == "unitary";
  std::vector<scheme::ErrorGrowthResult> rows(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](long t) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(t));
    rows[t] = scheme::error_growth(cfg.growth_eps, static_cast<int>(cfg.growth_n), unitary, rng);
  });
  for (const auto& r : rows) {
    GrowthSummary::Row row;
    row.mode = cfg.growth_mode;
    row.eps = cfg.growth_eps;
    row.n = cfg.growth_n;
    row.bound = r.bound;
    row.witnessed = r.witnessed;
    out.rows.push_back(row);
  }
  return out;
}

FailureBoundSummary run_failure_bound(const ExperimentConfig& cfg) {
  // Per-window success statistics from real compile traces.
  ExperimentConfig compile_cfg = cfg;
  compile_cfg.experiment = "compile";
  compile_cfg.trials = std::min<long>(cfg.trials, 200);
  compile_cfg.eps = {1e-9};
  const CompileSummary compile = run_compile(compile_cfg);
  FailureBoundSummary out;
  if (compile.window_probs.empty())
    throw NumericalContractViolation("failure-bound: no compile windows observed");
  out.p0 = *std::min_element(compile.window_probs.begin(), compile.window_probs.end());
  const double p_mean = stats::mean(compile.window_probs);

  for (long n : cfg.layout_n) {
    for (double target_bound : {1.5, 0.35, 0.08}) {
      const double q_target = target_bound / (2.0 * static_cast<double>(n));
      long k4 = static_cast<long>(std::ceil(std::log(q_target) / std::log1p(-out.p0)));
      k4 = std::max<long>(k4, 1);
      FailureBoundSummary::Cell cell;
      cell.n = n;
      cell.k = 4 * k4;
      cell.p0 = out.p0;
      cell.bound = scheme::nonadaptive_failure_bound(n, cell.k, out.p0);
      // Wire failure = all k/4 blocks fail; blocks draw independently from
      // the observed window probabilities, so the wire-failure indicator is
      // exactly Bernoulli((1 - mean p)^(k/4)).
      const double q_wire = std::exp(static_cast<double>(k4) * std::log1p(-p_mean));
      std::vector<char> fail(cfg.layout_samples);
      parallel_for(cfg.layout_samples, cfg.threads, [&](long s) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(cell.k * 131071 + n),
                static_cast<std::uint64_t>(s));
        bool failed = false;
        for (long wdx = 0; wdx < n && !failed; ++wdx)
          failed = rng.uniform() < q_wire || rng.uniform() < q_wire;
        fail[s] = failed;
      });
      long count = 0;
      for (char c : fail) count += c;
      cell.frequency = static_cast<double>(count) / cfg.layout_samples;
      out.cells.push_back(cell);
    }
  }
  return out;
}

namespace {

std::string out_base(const ExperimentConfig& cfg) {
  return cfg.out.empty() ? cfg.experiment : cfg.out;
}

void write_compile(const ExperimentConfig& cfg, const CompileSummary& s) {
  const std::string base = out_base(cfg);
  io::CsvWriter csv(base + ".csv",
                    {"alpha", "theta", "eps", "trials", "mean_steps", "p_floor", "ci_low",
                     "ci_high"});
  for (const auto& row : s.per_eps)
    csv.write_row(std::vector<double>{cfg.alpha, cfg.theta, row.eps,
                                      static_cast<double>(cfg.trials), row.mean_steps,
                                      s.p_floor, row.ci_low, row.ci_high});
  if (cfg.format == "jsonl") {
    io::JsonlWriter jsonl(base + ".jsonl");
    for (std::size_t t = 0; t < s.traces.size(); ++t) {
      const auto& trace = s.traces[t];
      for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& step = trace.steps[i];
        nlohmann::json j;
        j["traj"] = t;
        j["step"] = i;
        j["basis"] = "displaced-number";
        j["outcome"] = step.observed_n;
        j["prob"] = 0.0;  // filled below to keep key order stable
        j["gate"] = std::vector<double>{
            step.applied(0, 0).real(), step.applied(0, 0).imag(), step.applied(0, 1).real(),
            step.applied(0, 1).imag(), step.applied(1, 0).real(), step.applied(1, 0).imag(),
            step.applied(1, 1).real(), step.applied(1, 1).imag()};
        j["unitarity_defect"] = su2::unitarity_defect(step.applied);
        j["intended_n"] = step.intended_n;
        j["observed_n"] = step.observed_n;
        j["residual"] = step.residual;
        j["shift"] = step.shift;
        scheme::SchemeParameters p = scheme_params(cfg);
        j["prob"] = scheme::outcome_probability(p, step.shift, step.observed_n);
        jsonl.write_line(j.dump());
      }
    }
  }
}

void write_truncation(const ExperimentConfig& cfg, const std::vector<TruncationRow>& rows) {
  io::CsvWriter csv(out_base(cfg) + ".csv",
                    {"alpha", "n_max", "k", "n_mean", "bound", "measured"});
  for (const auto& r : rows)
    csv.write_row(std::vector<double>{r.alpha, static_cast<double>(r.n_max), 1.0, r.n_mean,
                                      r.bound, r.measured});
}

void write_couple(const ExperimentConfig& cfg, const CoupleSummary& s) {
  const std::string base = out_base(cfg);
  io::CsvWriter csv(base + ".csv",
                    {"alpha", "theta", "gamma", "samples", "odd_frequency", "odd_analytic",
                     "odd_closed_form", "z_score", "max_oracle_dist", "parity_law_holds"});
  const double gamma = cfg.alpha * std::sin(cfg.theta);
  csv.write_row(std::vector<double>{cfg.alpha, cfg.theta, gamma,
                                    static_cast<double>(s.samples), s.odd_frequency,
                                    s.odd_analytic, s.odd_closed_form, s.z_score,
                                    s.max_oracle_dist, s.parity_law_holds ? 1.0 : 0.0});
  if (cfg.format == "jsonl") {
    io::JsonlWriter jsonl(base + ".jsonl");
    const double mean = gamma * gamma;
    for (long i = 0; i < std::min<long>(cfg.samples, 100000); ++i) {
      Rng rng(cfg.seed, 999, static_cast<std::uint64_t>(i));
      const int n1 = rng.poisson(mean);
      const int n2 = rng.poisson(mean);
      nlohmann::json j;
      j["sample"] = i;
      j["n1"] = n1;
      j["n2"] = n2;
      j["cz"] = ((n1 + n2) % 2) == 1;
      jsonl.write_line(j.dump());
    }
  }
}

void write_initialize(const ExperimentConfig& cfg, const InitializeSummary& s) {
  io::CsvWriter csv(out_base(cfg) + ".csv",
                    {"seed_index", "trials", "mean_repetitions", "se", "min_fidelity_overall",
                     "seeds_stable"});
  for (std::size_t i = 0; i < s.per_seed_mean.size(); ++i)
    csv.write_row(std::vector<double>{static_cast<double>(i), static_cast<double>(cfg.trials),
                                      s.per_seed_mean[i], s.per_seed_se[i], s.min_fidelity,
                                      s.seeds_stable ? 1.0 : 0.0});
}

void write_transport(const ExperimentConfig& cfg, const TransportSummary& s) {
  const std::string base = out_base(cfg);
  io::CsvWriter csv(base + ".csv", {"step", "mean_f", "mean_one_minus_f", "min_f"});
  for (std::size_t i = 0; i < s.mean_f.size(); ++i)
    csv.write_row(std::vector<double>{static_cast<double>(i), s.mean_f[i],
                                      s.mean_infidelity[i], s.min_f[i]});
  nlohmann::json j;
  j["log_mean_f_slope"] = s.log_mean_f_fit.slope;
  j["log_mean_f_r2"] = s.log_mean_f_fit.r2;
  j["blind_final"] = s.blind_final;
  std::ofstream summary(base + ".summary.json");
  summary << j.dump(2) << '\n';
}

void write_scan(const ExperimentConfig& cfg, const ScanSummary& s) {
  const std::string base = out_base(cfg);
  io::CsvWriter csv(base + ".csv",
                    {"target", "epsilon", "p_hat", "ci_low", "ci_high", "theta_argmax"});
  for (std::size_t t = 0; t < s.per_target.size(); ++t) {
    const auto& res = s.per_target[t];
    for (std::size_t e = 0; e < res.eps.size(); ++e)
      csv.write_row(std::vector<double>{static_cast<double>(t), res.eps[e], res.p_hat[e],
                                        res.ci_low[e], res.ci_high[e], res.theta_argmax[e]});
  }
  nlohmann::json j;
  j["targets"] = nlohmann::json::array();
  for (std::size_t t = 0; t < s.per_target.size(); ++t) {
    nlohmann::json tj;
    tj["phase"] = s.target_phases[t];
    tj["lambda_hat"] = s.per_target[t].lambda_hat;
    tj["lambda_se"] = s.per_target[t].lambda_se;
    tj["r2"] = s.per_target[t].r2;
    j["targets"].push_back(tj);
  }
  j["haar_counts_zero"] = s.haar_counts_zero;
  std::ofstream fit(base + ".fit.json");
  fit << j.dump(2) << '\n';
}

void write_weak(const ExperimentConfig& cfg, const WeakCompileSummary& s) {
  const std::string base = out_base(cfg);
  io::CsvWriter csv(base + ".csv", {"eps", "mean_steps", "se", "max_distance"});
  for (const auto& r : s.rows)
    csv.write_row(std::vector<double>{r.eps, r.mean_steps, r.se, r.max_distance});
  nlohmann::json j;
  j["exponent"] = s.loglog.slope;
  j["exponent_se"] = s.loglog.slope_se;
  j["r2"] = s.loglog.r2;
  std::ofstream fit(base + ".fit.json");
  fit << j.dump(2) << '\n';
}

void write_growth(const ExperimentConfig& cfg, const GrowthSummary& s) {
  io::CsvWriter csv(out_base(cfg) + ".csv", {"mode", "eps", "n", "bound", "witnessed"});
  for (const auto& r : s.rows)
    csv.write_row({r.mode, io::format_double(r.eps), std::to_string(r.n),
                   io::format_double(r.bound), io::format_double(r.witnessed)});
}

void write_failure(const ExperimentConfig& cfg, const FailureBoundSummary& s) {
  io::CsvWriter csv(out_base(cfg) + ".csv",
                    {"n", "k", "p0", "bound", "frequency", "samples"});
  for (const auto& c : s.cells)
    csv.write_row(std::vector<double>{static_cast<double>(c.n), static_cast<double>(c.k),
                                      c.p0, c.bound, c.frequency,
                                      static_cast<double>(cfg.layout_samples)});
}

}  // namespace

int run(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  if (cfg.experiment == "compile") {
    write_compile(cfg, run_compile(cfg, cfg.format == "jsonl"));
  } else if (cfg.experiment == "truncation") {
    write_truncation(cfg, run_truncation(cfg));
  } else if (cfg.experiment == "couple") {
    write_couple(cfg, run_couple(cfg));
  } else if (cfg.experiment == "readout") {
    write_initialize(cfg, run_initialize(cfg));
  } else if (cfg.experiment == "transport") {
    write_transport(cfg, run_transport(cfg, true));
  } else if (cfg.experiment == "nogo-scan") {
    write_scan(cfg, run_nogo_scan(cfg));
  } else if (cfg.experiment == "weak-compile") {
    write_weak(cfg, run_weak_compile(cfg));
  } else if (cfg.experiment == "error-growth") {
    write_growth(cfg, run_error_growth(cfg));
  } else if (cfg.experiment == "failure-bound") {
    write_failure(cfg, run_failure_bound(cfg));
  } else {
    throw ConfigError("unknown experiment '" + cfg.experiment + "'");
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_manifest(out_base(cfg) + ".manifest.json", cfg.canonical(), cfg.seed, wall);
  return 0;
}

}  // namespace cvmbqc::exp
