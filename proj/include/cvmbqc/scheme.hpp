#pragma once

#include <array>
#include <vector>

#include "cvmbqc/common.hpp"
#include "cvmbqc/fock.hpp"
#include "cvmbqc/rng.hpp"
#include "cvmbqc/su2.hpp"

// The feasible CV-MBQC scheme: controlled phase-space rotation resource plus
// displaced photon counting. Closed-form gates and probabilities (cross-checked
// against the fock oracle), the four-phase-gate compiler, beam-splitter wire
// coupling with parity post-selection, readout/initialization, and the
// non-adaptive coupling and error-growth bounds.
namespace cvmbqc::scheme {

struct SchemeParameters {
  double alpha = 2.0;                     // coherent amplitude, > 0
  double theta = 0.39269908169872414;     // interaction angle, in (0, pi/2)
  int n_max = 40;                         // oracle cutoff

  double gamma() const { return alpha * std::sin(theta); }
  void validate() const;
};

// phi(x) = arctan(alpha sin(theta)/(alpha cos(theta)+x)), continuous branch in
// (0, pi) so the whole phase range is reachable.
double phi_of_x(const SchemeParameters& p, double x);

// Closed-form inverse of phi_of_x on (0, pi).
double x_of_phi(const SchemeParameters& p, double phi);

// Poisson mean of the displaced count at shift x:
// mu(x) = |e^{i theta} alpha + x|^2 = alpha^2 + x^2 + 2 x alpha cos(theta).
double shift_mean(const SchemeParameters& p, double x);

// Phase-gate angle of the applied gate for shift x and count n. The
// displacement contributes a known outcome-dependent term on top of the
// rotation phase: 2 n phi(x) - 2 x gamma.
double step_phase(const SchemeParameters& p, double x, int n);

// Applied gate H * S(step_phase); exactly unitary, matches the truncated-Fock
// oracle (skew measurement with displaced-number rows) to roundoff.
Gate2 step_gate(const SchemeParameters& p, double x, int n);

// p_x(n), a normalized Poisson weight for every x.
double outcome_probability(const SchemeParameters& p, double x, int n);

struct ShiftChoice {
  double x = 0.0;
  int intended_n = 1;
  double success_probability = 0.0;
};

// Shift implementing the phase-gate angle `phase` with the intended count
// (n=1, or n=0 at x=0 when the angle vanishes). Among the 2pi-shifted
// solutions the one with the largest success probability wins.
ShiftChoice choose_shift(const SchemeParameters& p, double phase);

struct WalkStep {
  double shift = 0.0;
  int intended_n = 0;
  int observed_n = 0;
  Gate2 applied;
  double residual = 0.0;  // phase-quotiented distance to the target so far
};

struct WalkTrace {
  Gate2 target;
  std::vector<WalkStep> steps;
  bool success = false;
  double final_residual = 0.0;
};

// Stochastic compiler: Euler-decompose the residual into phase gates, execute
// the shifts, fold the actually applied gates back in, re-decompose on
// unintended outcomes. Terminates when the product matches the target up to
// global phase within eps.
WalkTrace compile_gate(const SchemeParameters& p, const Gate2& target, Rng& rng, double eps,
                       long max_steps = 2000000);

struct PFloorEstimate {
  double p_floor = 0.0;
  double x_min = 0.0;  // shift range the compiler actually uses
  double x_max = 0.0;
};

// Minimum per-step success probability over the compiler's shift range
// (grid minimization with refinement), including the n=0 identity step.
PFloorEstimate p_floor(const SchemeParameters& p);

// Phase-gate angles (applied left to right, one H*S(angle) site each) whose
// product equals the residual up to global phase; at most four entries.
std::vector<double> plan_phase_angles(const Gate2& residual);

// Closed-form two-wire gate for photon counts (n1, n2) after the balanced
// beam-splitter coupling; equals (local1 (x) local2) * CZ^{parity}.
Gate4 coupling_gate(int n1, int n2);
Gate2 coupling_local1(int n1, int n2);
Gate2 coupling_local2(int n1, int n2);

struct CouplingOutcome {
  Gate4 applied;
  int n1 = 0;
  int n2 = 0;
  bool cz = false;  // parity(n1+n2) odd: a controlled-Z up to local factors
};

// Simulates one coupling event on a joint 4-dim correlation state: counts are
// drawn (independent Poissons with mean gamma^2), the exact gate is applied in
// place, and the parity flag reports whether a CZ was implemented.
CouplingOutcome couple_wires(const SchemeParameters& p, Eigen::Vector4cd& state, Rng& rng);

// P(n1+n2 odd) by truncated parity summation of the two Poisson factors.
double cz_success_probability(const SchemeParameters& p);

// Brute-force route to the coupling gate: the four branch mode pairs of the
// joint pre-measurement state (correlation labels b1 b2, coherent amplitudes
// (+-gamma, +-i gamma)) pushed through the balanced beam splitter in truncated
// Fock space. The (n1, n2) photon-count projection of branch b gives the
// diagonal entry of the applied gate; matches coupling_gate up to global
// phase.
std::array<fock::TwoModeState, 4> coupling_oracle_branches(const SchemeParameters& p);

struct ReadoutResult {
  int bit = 0;
  int repetitions = 0;
  double fidelity = 0.0;  // overlap with the reported basis vector
};

// Repeated interact / displace-by-Delta / count cycle. A click projects onto
// |1>, an empty round applies the weak Kraus element whose unitary part is
// undone before repeating; terminates within 1e-6 of a basis vector.
ReadoutResult readout(const SchemeParameters& p, Eigen::Vector2cd& state, Rng& rng);

struct InitializeResult {
  Eigen::Vector2cd state;
  int repetitions = 0;  // wire sites consumed, incl. the correction compile
  double fidelity = 0.0;
};

// Readout followed by the outcome-dependent correction routed through
// compile_gate; lands on |0> within 1e-6.
InitializeResult initialize(const SchemeParameters& p, const Eigen::Vector2cd& start, Rng& rng,
                            double eps = 1e-7);

// 2 n (1-p0)^{k/4}: failure bound for the non-adaptive blocked layout.
double nonadaptive_failure_bound(long n_gates, long k_spacing, double p0);

struct ErrorGrowthResult {
  double bound = 0.0;
  double witnessed = 0.0;
};

// Unitary mode: n perturbed unitaries, total error <= n*eps. Non-unitary mode:
// the amplifying construction with per-factor norm 1+eps, witnessed growth
// against the bound n*eps*(1+eps)^n.
ErrorGrowthResult error_growth(double eps, int n, bool unitary_mode, Rng& rng);

}  // namespace cvmbqc::scheme
