#pragma once

#include <vector>

#include "cvmbqc/common.hpp"
#include "cvmbqc/rng.hpp"
#include "cvmbqc/wire.hpp"

// Numerical embodiment of the limitation results: displacement invariance of
// controlled-Gaussian wires under homodyning, the two-basis control of the
// non-Gaussian-input example, the probability-suppression scan, and the weak
// O(1/eps) Gaussian-measurement compiler.
namespace cvmbqc::nogo {

struct GaussianWireSpec {
  double q0 = 0.0;  // sqrt(2) alpha cos(theta)
  double p0 = 0.0;  // sqrt(2) alpha sin(theta)

  static GaussianWireSpec from_interaction(double alpha, double theta);
};

struct GateDensity {
  Gate2 gate;
  double density = 0.0;
};

// Homodyne gate family of the controlled-rotation wire on a coherent input:
// diag(e^{i p0 (x - q0/2)}, e^{-i p0 (x - q0/2)}), density e^{-(x-q0)^2}/sqrt(pi).
GateDensity gaussian_wire_gate(const GaussianWireSpec& spec, double x);

// Same family after a phase-space displacement (dq + i dp)/sqrt(2) of the
// measured mode.
Gate2 displaced_gaussian_gate(const GaussianWireSpec& spec, double dq, double dp, double x);

// Max over the (delta, x) grids of the phase-quotiented distance between the
// displaced family and the undisplaced family with q0 -> q0 + dq; the
// numerical form of "constant in Delta".
double displacement_invariance_check(const GaussianWireSpec& spec,
                                     const std::vector<double>& dq_grid,
                                     const std::vector<double>& dp_grid,
                                     const std::vector<double>& x_grid);

// The d_p = 3 example: input (|0>+|2>)/sqrt(2), theta = pi/4. Gates
// diag(e^{-i phi(x)}, e^{+i phi(x)}) (conjugate pattern in the p basis) with
// phi(x) = arctan((2x^2-1)/sqrt(2)), density (4x^4-4x^2+3)e^{-x^2}/(4 sqrt(pi)).
GateDensity two_basis_example(double x, char basis);

// The same wire as correlation-space matrices (d_p = 3, exact completeness).
wire::WireTensor two_basis_example_wire();

struct ControlScanResult {
  std::vector<double> eps;
  std::vector<double> p_hat;        // sup over the quadrature angle
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<double> theta_argmax;
  double lambda_hat = 0.0;          // fitted suppression exponent
  double lambda_se = 0.0;
  double r2 = 0.0;
  long samples_per_theta = 0;
};

// Monte Carlo estimate of sup_theta P_theta(dist(A_theta[x], U) <= eps) on the
// example wire, one result per target, with a power-law fit of log P vs
// log eps. The theta grid is uniform with local refinement around the argmax.
std::vector<ControlScanResult> control_scan(const std::vector<Gate2>& targets,
                                            const std::vector<double>& eps_grid,
                                            int theta_grid_size, long samples_per_theta,
                                            std::uint64_t seed, int threads = 1);

struct WeakCompileResult {
  long steps = 0;
  Gate2 accepted;
  double distance = 0.0;  // operator-norm distance to the target phase gate
};

// Repeats homodyne steps on the Gaussian wire until the applied phase gate is
// within eps of the target in operator norm; the expected step count scales
// as 1/eps. Requires p0*q0 = -target_phi so the density peak sits on the
// target.
WeakCompileResult weak_phase_compiler(const GaussianWireSpec& spec, double target_phi,
                                      double eps, Rng& rng);

}  // namespace cvmbqc::nogo
