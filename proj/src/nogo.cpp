#include "cvmbqc/nogo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cvmbqc/stats.hpp"
#include "cvmbqc/su2.hpp"

namespace cvmbqc::nogo {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSqrtPi = 1.7724538509055160272981674833411;

// Phase-quotiented distance between two diagonal gates with unit-modulus
// target entries and arbitrary sample entries; exact small-candidate search.
double diag_dist_up_to_phase(Complex z0, Complex z1, Complex b0, Complex b1) {
  const double r0 = std::abs(z0);
  const double r1 = std::abs(z1);
  const double a0 = std::arg(z0) - std::arg(b0);
  const double a1 = std::arg(z1) - std::arg(b1);
  auto value = [&](double u) {
    const double d0 = r0 * r0 + 1.0 - 2.0 * r0 * std::cos(a0 - u);
    const double d1 = r1 * r1 + 1.0 - 2.0 * r1 * std::cos(a1 - u);
    return std::max(d0, d1);
  };
  double best = std::min(value(a0), value(a1));
  // Crossings of the two wells: A cos(u) + B sin(u) = C.
  const double a_c = 2.0 * (r0 * std::cos(a0) - r1 * std::cos(a1));
  const double b_c = 2.0 * (r0 * std::sin(a0) - r1 * std::sin(a1));
  const double c_c = r0 * r0 - r1 * r1;
  const double rr = std::hypot(a_c, b_c);
  if (rr >= std::abs(c_c) && rr > 0) {
    const double base = std::atan2(b_c, a_c);
    const double off = std::acos(std::clamp(c_c / rr, -1.0, 1.0));
    best = std::min(best, std::min(value(base + off), value(base - off)));
  }
  return std::sqrt(std::max(0.0, best));
}

}  // namespace

GaussianWireSpec GaussianWireSpec::from_interaction(double alpha, double theta) {
  GaussianWireSpec s;
  s.q0 = std::sqrt(2.0) * alpha * std::cos(theta);
  s.p0 = std::sqrt(2.0) * alpha * std::sin(theta);
  return s;
}

GateDensity gaussian_wire_gate(const GaussianWireSpec& spec, double x) {
  GateDensity out;
  const double phase = spec.p0 * (x - 0.5 * spec.q0);
  out.gate = Gate2::Zero();
  out.gate(0, 0) = std::exp(Complex(0, phase));
  out.gate(1, 1) = std::exp(Complex(0, -phase));
  const double d = x - spec.q0;
  out.density = std::exp(-d * d) / kSqrtPi;
  return out;
}

Gate2 displaced_gaussian_gate(const GaussianWireSpec& spec, double dq, double dp, double x) {
  Gate2 g = Gate2::Zero();
  const double center = 0.5 * (spec.q0 + dq);
  g(0, 0) = std::exp(Complex(0, (spec.p0 + dp) * (x - center)));
  g(1, 1) = std::exp(Complex(0, -(spec.p0 - dp) * (x - center)));
  return g;
}

double displacement_invariance_check(const GaussianWireSpec& spec,
                                     const std::vector<double>& dq_grid,
                                     const std::vector<double>& dp_grid,
                                     const std::vector<double>& x_grid) {
  double worst = 0.0;
  for (double dq : dq_grid)
    for (double dp : dp_grid) {
      GaussianWireSpec shifted = spec;
      shifted.q0 = spec.q0 + dq;
      for (double x : x_grid) {
        const Gate2 displaced = displaced_gaussian_gate(spec, dq, dp, x);
        const Gate2 base = gaussian_wire_gate(shifted, x).gate;
        worst = std::max(worst, diag_dist_up_to_phase(displaced(0, 0), displaced(1, 1),
                                                      base(0, 0), base(1, 1)));
      }
    }
  return worst;
}

GateDensity two_basis_example(double x, char basis) {
  if (basis != 'q' && basis != 'p')
    throw std::invalid_argument("two_basis_example: basis must be 'q' or 'p'");
  const double phi = std::atan((2.0 * x * x - 1.0) / std::sqrt(2.0));
  const double sign = basis == 'q' ? -1.0 : 1.0;
  GateDensity out;
  out.gate = Gate2::Zero();
  out.gate(0, 0) = std::exp(Complex(0, sign * phi));
  out.gate(1, 1) = std::exp(Complex(0, -sign * phi));
  const double x2 = x * x;
  out.density = (4.0 * x2 * x2 - 4.0 * x2 + 3.0) * std::exp(-x2) / (4.0 * kSqrtPi);
  return out;
}

wire::WireTensor two_basis_example_wire() {
  wire::WireTensor w;
  w.bond_dim = 2;
  const double s = 1.0 / std::sqrt(2.0);
  Gate2 a0 = Gate2::Zero();
  a0(0, 0) = s;
  a0(1, 1) = s;
  Gate2 a2 = Gate2::Zero();
  a2(0, 0) = Complex(0, -s);
  a2(1, 1) = Complex(0, s);
  w.site_matrices = {a0, Gate2::Zero(), a2};
  w.boundary_right = Eigen::Vector2cd(1, 0);
  w.completeness_defect = wire::completeness_defect(w.site_matrices, 2);
  return w;
}

namespace {

// Example-wire gate entries at quadrature angle theta and outcome x, already
// normalized by the mixed-state density (psi0^2 + psi2^2)/2.
struct ExampleGateEval {
  Complex z0, z1;
};

ExampleGateEval example_gate(double theta, double x) {
  const double psi0 = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  const double psi2 = psi0 * (2.0 * x * x - 1.0) / std::sqrt(2.0);
  const double pbar = 0.5 * (psi0 * psi0 + psi2 * psi2);
  const Complex rot = std::exp(Complex(0, 2.0 * theta));
  const double s = 1.0 / std::sqrt(2.0);
  const Complex z0 = s * (psi0 - Complex(0, 1) * rot * psi2);
  const Complex z1 = s * (psi0 + Complex(0, 1) * rot * psi2);
  const double norm = std::sqrt(pbar);
  return {z0 / norm, z1 / norm};
}

// Inverse-CDF sampler for the theta-independent outcome density
// (psi0^2 + psi2^2)/2 of the example wire.
class ExampleSampler {
 public:
  ExampleSampler() {
    const int n = 16385;
    xs_.resize(n);
    cdf_.resize(n);
    dens_.resize(n);
    const double lim = 7.0;
    const double h = 2.0 * lim / (n - 1);
    for (int i = 0; i < n; ++i) {
      xs_[i] = -lim + h * i;
      const double psi0 = std::pow(kPi, -0.25) * std::exp(-0.5 * xs_[i] * xs_[i]);
      const double psi2 = psi0 * (2.0 * xs_[i] * xs_[i] - 1.0) / std::sqrt(2.0);
      dens_[i] = 0.5 * (psi0 * psi0 + psi2 * psi2);
    }
    cdf_[0] = 0.0;
    for (int i = 1; i < n; ++i)
      cdf_[i] = cdf_[i - 1] + 0.5 * (dens_[i - 1] + dens_[i]) * h;
  }

  double sample(Rng& rng) const {
    const double u = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const int i = std::max(1, static_cast<int>(it - cdf_.begin())) - 1;
    const int j = std::min<int>(i, static_cast<int>(xs_.size()) - 2);
    const double h = xs_[j + 1] - xs_[j];
    const double r = u - cdf_[j];
    const double a = dens_[j];
    const double slope = (dens_[j + 1] - dens_[j]) / h;
    double t;
    if (std::abs(slope) < 1e-14)
      t = a > 0 ? r / a : 0.5 * h;
    else
      t = (-a + std::sqrt(std::max(0.0, a * a + 2.0 * slope * r))) / slope;
    return xs_[j] + std::clamp(t, 0.0, h);
  }

 private:
  std::vector<double> xs_, cdf_, dens_;
};

struct TargetView {
  Complex b0, b1;
  double offdiag = 0.0;  // lower bound on any distance when the target is not diagonal
};

// Counts per (target, eps) for one quadrature angle.
void scan_at_theta(double theta, long samples, const ExampleSampler& sampler,
                   const std::vector<TargetView>& targets, const std::vector<double>& eps_grid,
                   Rng rng, std::vector<std::vector<long>>& counts) {
  const double eps_max = *std::max_element(eps_grid.begin(), eps_grid.end());
  // Skip a sample only when || |z| - 1 || > eps_max already proves the
  // distance too large.
  const double lo2 = eps_max >= 1.0 ? 0.0 : (1.0 - eps_max) * (1.0 - eps_max);
  const double hi2 = (1.0 + eps_max) * (1.0 + eps_max);
  for (long s = 0; s < samples; ++s) {
    const double x = sampler.sample(rng);
    const ExampleGateEval g = example_gate(theta, x);
    const double m0 = std::norm(g.z0);
    const double m1 = std::norm(g.z1);
    if (m0 < lo2 || m0 > hi2 || m1 < lo2 || m1 > hi2) continue;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (targets[t].offdiag > eps_max) continue;
      const double d = diag_dist_up_to_phase(g.z0, g.z1, targets[t].b0, targets[t].b1);
      for (std::size_t e = 0; e < eps_grid.size(); ++e)
        if (d <= eps_grid[e]) ++counts[t][e];
    }
  }
}

}  // namespace

std::vector<ControlScanResult> control_scan(const std::vector<Gate2>& targets,
                                            const std::vector<double>& eps_grid,
                                            int theta_grid_size, long samples_per_theta,
                                            std::uint64_t seed, int threads) {
  if (targets.empty() || eps_grid.empty())
    throw std::invalid_argument("control_scan: empty targets or eps grid");
  const ExampleSampler sampler;
  std::vector<TargetView> views;
  for (const auto& u : targets) {
    TargetView v;
    const Complex det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
    const Gate2 su = u / std::sqrt(det);
    v.b0 = su(0, 0) / std::abs(su(0, 0) == Complex(0, 0) ? Complex(1, 0) : su(0, 0));
    v.b1 = su(1, 1) / std::abs(su(1, 1) == Complex(0, 0) ? Complex(1, 0) : su(1, 1));
    v.offdiag = std::max(std::abs(su(0, 1)), std::abs(su(1, 0)));
    views.push_back(v);
  }

  const int n_theta = theta_grid_size + 1;  // uniform on [0, pi], endpoints included
  std::vector<std::vector<std::vector<long>>> counts(
      n_theta, std::vector<std::vector<long>>(targets.size(),
                                              std::vector<long>(eps_grid.size(), 0)));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_theta) return;
      const double theta = kPi * i / theta_grid_size;
      scan_at_theta(theta, samples_per_theta, sampler, views, eps_grid,
                    Rng(seed, static_cast<std::uint64_t>(i)), counts[i]);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < std::max(1, threads); ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::vector<ControlScanResult> results;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    ControlScanResult res;
    res.eps = eps_grid;
    res.samples_per_theta = samples_per_theta;
    res.p_hat.resize(eps_grid.size());
    res.ci_low.resize(eps_grid.size());
    res.ci_high.resize(eps_grid.size());
    res.theta_argmax.resize(eps_grid.size());
    // Local refinement around the coarse argmax at the smallest epsilon.
    const std::size_t e_min =
        std::min_element(eps_grid.begin(), eps_grid.end()) - eps_grid.begin();
    int best_i = 0;
    long best_c = -1;
    for (int i = 0; i < n_theta; ++i)
      if (counts[i][t][e_min] > best_c) {
        best_c = counts[i][t][e_min];
        best_i = i;
      }
    double theta_lo = kPi * std::max(0, best_i - 1) / theta_grid_size;
    double theta_hi = kPi * std::min(theta_grid_size, best_i + 1) / theta_grid_size;
    std::vector<TargetView> one{views[t]};
    double theta_best = kPi * best_i / theta_grid_size;
    std::vector<long> best_counts = counts[best_i][t];
    for (int it = 0; it < 4; ++it) {
      int side = 0;
      for (const double cand : {0.5 * (theta_lo + theta_best), 0.5 * (theta_best + theta_hi)}) {
        std::vector<std::vector<long>> slot(1, std::vector<long>(eps_grid.size(), 0));
        scan_at_theta(cand, samples_per_theta, sampler, one, eps_grid,
                      Rng(seed, 10000 + t, static_cast<std::uint64_t>(it * 2 + side)), slot);
        if (slot[0][e_min] > best_counts[e_min]) {
          best_counts = slot[0];
          theta_best = cand;
        }
        ++side;
      }
      theta_lo = 0.5 * (theta_lo + theta_best);
      theta_hi = 0.5 * (theta_best + theta_hi);
    }
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
      long c = best_counts[e];
      double th_arg = theta_best;
      for (int i = 0; i < n_theta; ++i)
        if (counts[i][t][e] > c) {
          c = counts[i][t][e];
          th_arg = kPi * i / theta_grid_size;
        }
      const auto ci = stats::proportion_ci(c, samples_per_theta);
      res.p_hat[e] = ci.p_hat;
      res.ci_low[e] = ci.ci_low;
      res.ci_high[e] = ci.ci_high;
      res.theta_argmax[e] = th_arg;
    }
    // Power-law fit of log p vs log eps on the nonzero estimates.
    std::vector<double> lx, ly, ls;
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
      if (res.p_hat[e] <= 0) continue;
      lx.push_back(std::log(eps_grid[e]));
      ly.push_back(std::log(res.p_hat[e]));
      const double n = static_cast<double>(samples_per_theta);
      ls.push_back(std::sqrt(std::max(1e-12, (1.0 - res.p_hat[e]) / (n * res.p_hat[e]))));
    }
    if (lx.size() >= 3) {
      const auto fit = stats::linear_fit_weighted(lx, ly, ls);
      res.lambda_hat = fit.slope;
      res.lambda_se = fit.slope_se;
      res.r2 = fit.r2;
    }
    results.push_back(std::move(res));
  }
  return results;
}

WeakCompileResult weak_phase_compiler(const GaussianWireSpec& spec, double target_phi,
                                      double eps, Rng& rng) {
  if (std::abs(spec.p0 * spec.q0 + target_phi) > 1e-9)
    throw std::invalid_argument("weak_phase_compiler: spec must satisfy p0*q0 = -target_phi");
  if (eps <= 0) throw std::invalid_argument("weak_phase_compiler: eps must be > 0");
  WeakCompileResult out;
  for (long step = 1; step <= 100000000L; ++step) {
    const double x = spec.q0 + rng.normal() / std::sqrt(2.0);
    const GateDensity gd = gaussian_wire_gate(spec, x);
    // Applied and target gates differ by the phase-gate angle -2 p0 (x - q0);
    // the operator-norm distance is 2|sin(p0 (x - q0)/2)| <= |2 p0 (x - q0)|/2.
    const double d = 2.0 * std::abs(std::sin(0.5 * spec.p0 * (x - spec.q0)));
    if (d <= eps) {
      out.steps = step;
      out.accepted = gd.gate;
      out.distance = d;
      return out;
    }
  }
  throw NumericalContractViolation("weak_phase_compiler: no acceptance within step cap");
}

}  // namespace cvmbqc::nogo
