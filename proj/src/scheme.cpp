#include "cvmbqc/scheme.hpp"

#include <array>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace cvmbqc::scheme {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_to_pi(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - kPi;
}

double poisson_pmf(double mean, int n) {
  double p = std::exp(-mean);
  for (int k = 1; k <= n; ++k) p *= mean / k;
  return p;
}

}  // namespace

void SchemeParameters::validate() const {
  if (!(alpha > 0)) throw std::invalid_argument("SchemeParameters: alpha must be > 0");
  if (!(theta > 0 && theta < 0.5 * kPi))
    throw std::invalid_argument("SchemeParameters: theta must lie in (0, pi/2)");
  if (n_max < 0) throw std::invalid_argument("SchemeParameters: n_max must be >= 0");
}

double phi_of_x(const SchemeParameters& p, double x) {
  return std::atan2(p.alpha * std::sin(p.theta), p.alpha * std::cos(p.theta) + x);
}

double x_of_phi(const SchemeParameters& p, double phi) {
  if (!(phi > 0 && phi < kPi))
    throw std::domain_error("x_of_phi: phi must lie in (0, pi)");
  return p.alpha * std::sin(p.theta) / std::tan(phi) - p.alpha * std::cos(p.theta);
}

double shift_mean(const SchemeParameters& p, double x) {
  const double c = p.alpha * std::cos(p.theta);
  return (c + x) * (c + x) + p.gamma() * p.gamma();
}

double step_phase(const SchemeParameters& p, double x, int n) {
  return 2.0 * n * phi_of_x(p, x) - 2.0 * x * p.gamma();
}

Gate2 step_gate(const SchemeParameters& p, double x, int n) {
  if (n < 0) throw std::invalid_argument("step_gate: n must be >= 0");
  return su2::hadamard() * su2::phase_gate(step_phase(p, x, n));
}

double outcome_probability(const SchemeParameters& p, double x, int n) {
  if (n < 0) throw std::invalid_argument("outcome_probability: n must be >= 0");
  return poisson_pmf(shift_mean(p, x), n);
}

ShiftChoice choose_shift(const SchemeParameters& p, double phase) {
  if (phase == 0.0) {
    // Identity phase gate: count n = 0 at zero shift applies exactly H.
    return {0.0, 0, outcome_probability(p, 0.0, 0)};
  }
  const double g = p.gamma();
  ShiftChoice best;
  best.success_probability = -1.0;
  for (int m = -2; m <= 2; ++m) {
    const double target = phase + kTwoPi * m;
    // 2 phi(x) - 2 x gamma is strictly decreasing from +inf to -inf.
    double lo = -(std::abs(target) + 1.0) / (2.0 * g) - 1.0;
    double hi = (kTwoPi + std::abs(target) + 1.0) / (2.0 * g) + 1.0;
    auto f = [&](double x) { return step_phase(p, x, 1) - target; };
    while (f(lo) < 0) lo -= 1.0;
    while (f(hi) > 0) hi += 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid) > 0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-15 * std::max(1.0, std::abs(mid))) break;
    }
    const double x = 0.5 * (lo + hi);
    const double prob = outcome_probability(p, x, 1);
    if (prob > best.success_probability) best = {x, 1, prob};
  }
  return best;
}

namespace {

// Plan: list of phase-gate angles, executed left to right, each realized as
// one H*S(angle) site. The product of the planned gates equals the residual
// up to global phase.
std::vector<double> plan_steps(const Gate2& residual) {
  const double scale = residual.cwiseAbs().maxCoeff();
  const double tiny = 1e-12 * std::max(1.0, scale);
  auto diag_angle = [](const Gate2& m) {
    return wrap_to_pi(std::arg(m(1, 1)) - std::arg(m(0, 0)));
  };
  auto off_mag = [](const Gate2& m) {
    return std::max(std::abs(m(0, 1)), std::abs(m(1, 0)));
  };
  const Gate2 h = su2::hadamard();
  if (off_mag(residual) < tiny) {
    return {diag_angle(residual), 0.0};  // S(psi) = HS(0) . HS(psi)
  }
  const Gate2 hr = h * residual;
  if (off_mag(hr) < tiny) {
    return {diag_angle(hr)};  // H S(psi) in one site
  }
  const Gate2 hrh = h * residual * h;
  if (off_mag(hrh) < tiny) {
    return {0.0, diag_angle(hrh)};  // R_x(d) = HS(d) . HS(0)
  }
  const Complex det = residual(0, 0) * residual(1, 1) - residual(0, 1) * residual(1, 0);
  if (det.real() < 0) {
    // Odd number of H factors outstanding: three sites suffice.
    const su2::PhaseTriple t = su2::euler_decompose(Gate2(h * residual));
    return {t.phi3 == 0.0 ? 0.0 : wrap_to_pi(t.phi3),
            t.phi2 == 0.0 ? 0.0 : wrap_to_pi(t.phi2),
            t.phi1 == 0.0 ? 0.0 : wrap_to_pi(t.phi1)};
  }
  const su2::PhaseTriple t = su2::euler_decompose(residual);
  return {t.phi3 == 0.0 ? 0.0 : wrap_to_pi(t.phi3),
          t.phi2 == 0.0 ? 0.0 : wrap_to_pi(t.phi2),
          t.phi1 == 0.0 ? 0.0 : wrap_to_pi(t.phi1), 0.0};
}

}  // namespace

std::vector<double> plan_phase_angles(const Gate2& residual) { return plan_steps(residual); }

WalkTrace compile_gate(const SchemeParameters& p, const Gate2& target, Rng& rng, double eps,
                       long max_steps) {
  p.validate();
  if (eps <= 0) throw std::invalid_argument("compile_gate: eps must be > 0");
  if (su2::unitarity_defect(target) > 1e-10)
    throw std::invalid_argument("compile_gate: target is not unitary");
  const Complex det = target(0, 0) * target(1, 1) - target(0, 1) * target(1, 0);
  const Gate2 target_su = target / std::sqrt(det);

  WalkTrace trace;
  trace.target = target;
  Gate2 total = Gate2::Identity();
  std::vector<double> plan;
  std::size_t plan_pos = 0;

  double dist = su2::frobenius_dist_up_to_phase(total, target_su);
  while (dist > eps && static_cast<long>(trace.steps.size()) < max_steps) {
    if (plan_pos >= plan.size()) {
      const Gate2 residual = target_su * total.adjoint();
      plan = plan_steps(residual);
      plan_pos = 0;
      if (plan.empty()) break;
    }
    const double angle = plan[plan_pos];
    const ShiftChoice choice = choose_shift(p, angle);
    const int observed = rng.poisson(shift_mean(p, choice.x));
    const Gate2 applied = step_gate(p, choice.x, observed);
    total = applied * total;
    dist = su2::frobenius_dist_up_to_phase(total, target_su);
    WalkStep step;
    step.shift = choice.x;
    step.intended_n = choice.intended_n;
    step.observed_n = observed;
    step.applied = applied;
    step.residual = dist;
    trace.steps.push_back(step);
    if (observed == choice.intended_n) {
      ++plan_pos;
    } else {
      plan.clear();
      plan_pos = 0;
    }
  }
  trace.success = dist <= eps;
  trace.final_residual = su2::dist_up_to_phase(total, target_su);
  return trace;
}

PFloorEstimate p_floor(const SchemeParameters& p) {
  PFloorEstimate est;
  est.p_floor = outcome_probability(p, 0.0, 0);  // the n = 0 identity step
  est.x_min = 0.0;
  est.x_max = 0.0;
  const int grid = 4096;
  double worst_psi = 0.0;
  double worst_p = std::numeric_limits<double>::max();
  for (int i = 1; i <= grid; ++i) {
    const double psi = -kPi + kTwoPi * i / grid;
    if (psi == 0.0) continue;
    const ShiftChoice c = choose_shift(p, psi);
    est.x_min = std::min(est.x_min, c.x);
    est.x_max = std::max(est.x_max, c.x);
    if (c.success_probability < worst_p) {
      worst_p = c.success_probability;
      worst_psi = psi;
    }
  }
  // Local refinement around the worst grid angle.
  double lo = worst_psi - kTwoPi / grid;
  double hi = worst_psi + kTwoPi / grid;
  for (int it = 0; it < 60; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    const double p1 = m1 == 0.0 ? worst_p : choose_shift(p, m1).success_probability;
    const double p2 = m2 == 0.0 ? worst_p : choose_shift(p, m2).success_probability;
    if (p1 < p2)
      hi = m2;
    else
      lo = m1;
  }
  const double mid = 0.5 * (lo + hi);
  if (mid != 0.0) worst_p = std::min(worst_p, choose_shift(p, mid).success_probability);
  est.p_floor = std::min(est.p_floor, worst_p);
  return est;
}

Gate2 coupling_local1(int n1, int n2) {
  Gate2 l = Gate2::Zero();
  l(0, 0) = std::exp(Complex(0, -kPi * (n1 + 7.0 * n2) / 4.0));
  l(1, 1) = std::exp(Complex(0, -kPi * (3.0 * n1 + 5.0 * n2) / 4.0));
  return l;
}

Gate2 coupling_local2(int n1, int n2) {
  Gate2 l = Gate2::Identity();
  l(1, 1) = std::exp(Complex(0, -kPi * (6.0 * n1 - 6.0 * n2) / 4.0));
  return l;
}

Gate4 coupling_gate(int n1, int n2) {
  if (n1 < 0 || n2 < 0) throw std::invalid_argument("coupling_gate: counts must be >= 0");
  Gate4 cz_part = Gate4::Identity();
  cz_part(3, 3) = std::exp(Complex(0, -kPi * (n2 - n1)));
  return Eigen::kroneckerProduct(coupling_local1(n1, n2), coupling_local2(n1, n2)).eval() *
         cz_part;
}

CouplingOutcome couple_wires(const SchemeParameters& p, Eigen::Vector4cd& state, Rng& rng) {
  p.validate();
  const double mean = p.gamma() * p.gamma();
  CouplingOutcome out;
  out.n1 = rng.poisson(mean);
  out.n2 = rng.poisson(mean);
  out.applied = coupling_gate(out.n1, out.n2);
  out.cz = ((out.n1 + out.n2) % 2) == 1;
  state = out.applied * state;
  state /= state.norm();
  return out;
}

std::array<fock::TwoModeState, 4> coupling_oracle_branches(const SchemeParameters& p) {
  p.validate();
  const double g = p.gamma();
  std::array<fock::TwoModeState, 4> out;
  for (int b1 = 0; b1 < 2; ++b1)
    for (int b2 = 0; b2 < 2; ++b2) {
      const Complex m1 = (b1 == 0 ? 1.0 : -1.0) * g;
      const Complex m2 = (b2 == 0 ? 1.0 : -1.0) * Complex(0, g);
      const auto pair = fock::two_mode_product(fock::coherent_state(m1, p.n_max),
                                               fock::coherent_state(m2, p.n_max));
      // Output ports ((m1-m2)/sqrt2, (m1+m2)/sqrt2): theta = -pi/2 in the
      // beam-splitter generator convention.
      out[2 * b1 + b2] = fock::beamsplitter_apply(pair, -0.5 * kPi);
    }
  return out;
}

double cz_success_probability(const SchemeParameters& p) {
  const double mean = p.gamma() * p.gamma();
  const int cap = static_cast<int>(std::ceil(mean)) + 80;
  double even = 0.0, odd = 0.0;
  double pmf = std::exp(-mean);
  for (int n = 0; n <= cap; ++n) {
    if (n % 2 == 0)
      even += pmf;
    else
      odd += pmf;
    pmf *= mean / (n + 1);
  }
  return even * odd + odd * even;
}

ReadoutResult readout(const SchemeParameters& p, Eigen::Vector2cd& state, Rng& rng) {
  p.validate();
  state /= state.norm();
  const double g = p.gamma();
  const double survive = std::exp(-2.0 * g * g);     // <0|2 i gamma> modulus
  const double chi = p.alpha * p.alpha * std::sin(2.0 * p.theta);  // displacement phase
  const Complex w = std::exp(Complex(0, chi));
  const double click_given_one = 1.0 - survive * survive;
  const Gate2 h = su2::hadamard();

  ReadoutResult res;
  for (int round = 0; round < 100000; ++round) {
    const double p1 = std::norm(state[1]);
    if (std::norm(state[0]) >= 1.0 - 1e-12 || p1 >= 1.0 - 1e-12) break;
    ++res.repetitions;
    const double p_click = p1 * click_given_one;
    if (rng.uniform() < p_click) {
      // Photon observed: conditional count n >= 1 with Poisson(4 gamma^2).
      int n = 0;
      while (n == 0) n = rng.poisson(4.0 * g * g);
      Complex amp = w * survive;
      for (int k = 1; k <= n; ++k) amp *= Complex(0, 2.0 * g) / std::sqrt(static_cast<double>(k));
      Gate2 kraus = Gate2::Zero();
      kraus(1, 1) = amp;
      Eigen::Vector2cd next = h * (kraus * state);
      next /= next.norm();
      state = h * next;  // the click collapses onto H|1>; map back
      state /= state.norm();
      break;
    }
    // Empty round: weak Kraus, then undo its unitary part H*diag(1, w).
    Gate2 kraus = Gate2::Zero();
    kraus(0, 0) = 1.0;
    kraus(1, 1) = w * survive;
    Eigen::Vector2cd next = h * (kraus * state);
    Gate2 undo = Gate2::Zero();
    undo(0, 0) = 1.0;
    undo(1, 1) = std::conj(w);
    state = undo * (h * next);
    state /= state.norm();
  }
  res.bit = std::norm(state[1]) > std::norm(state[0]) ? 1 : 0;
  res.fidelity = std::norm(state[res.bit]);
  return res;
}

InitializeResult initialize(const SchemeParameters& p, const Eigen::Vector2cd& start, Rng& rng,
                            double eps) {
  InitializeResult out;
  out.state = start;
  const ReadoutResult r = readout(p, out.state, rng);
  out.repetitions = r.repetitions;
  if (r.bit == 1) {
    const WalkTrace flip = compile_gate(p, su2::pauli_x(), rng, eps);
    for (const auto& step : flip.steps) out.state = step.applied * out.state;
    out.state /= out.state.norm();
    out.repetitions += static_cast<int>(flip.steps.size());
  }
  out.fidelity = std::norm(out.state[0]);
  return out;
}

double nonadaptive_failure_bound(long n_gates, long k_spacing, double p0) {
  if (!(p0 > 0 && p0 <= 1)) throw std::invalid_argument("failure bound: p0 in (0,1] required");
  if (k_spacing % 4 != 0) throw std::invalid_argument("failure bound: k must be a multiple of 4");
  return 2.0 * static_cast<double>(n_gates) *
         std::pow(1.0 - p0, static_cast<double>(k_spacing) / 4.0);
}

ErrorGrowthResult error_growth(double eps, int n, bool unitary_mode, Rng& rng) {
  if (eps < 0) throw std::invalid_argument("error_growth: eps must be >= 0");
  ErrorGrowthResult out;
  Gate2 exact = Gate2::Identity();
  Gate2 actual = Gate2::Identity();
  if (unitary_mode) {
    out.bound = n * eps;
    const double delta_max = 2.0 * std::asin(0.5 * std::min(2.0, eps));
    for (int i = 0; i < n; ++i) {
      const Gate2 u = su2::haar_random_su2(rng);
      // Random Hermitian direction with unit norm: eigenvalues +-1.
      double a = rng.normal(), b = rng.normal(), c = rng.normal();
      const double r = std::sqrt(a * a + b * b + c * c);
      a /= r;
      b /= r;
      c /= r;
      Gate2 k;
      k << c, Complex(a, -b), Complex(a, b), -c;
      const double delta = delta_max * rng.uniform();
      Gate2 pert;
      const Complex ep = std::exp(Complex(0, delta));
      const Complex em = std::exp(Complex(0, -delta));
      // exp(i delta K) = cos(delta) I + i sin(delta) K for K^2 = I.
      pert = 0.5 * (ep + em) * Gate2::Identity() + Complex(0, 1) * std::sin(delta) * k;
      exact = u * exact;
      actual = (u * pert) * actual;
    }
  } else {
    out.bound = n * eps * std::pow(1.0 + eps, n);
    for (int i = 0; i < n; ++i) {
      const Gate2 u = su2::haar_random_su2(rng);
      exact = u * exact;
      actual = ((1.0 + eps) * u) * actual;
    }
  }
  out.witnessed = Eigen::JacobiSVD<Gate2>(Gate2(actual - exact)).singularValues()[0];
  return out;
}

}  // namespace cvmbqc::scheme
