#pragma once

#include <vector>

#include "cvmbqc/common.hpp"

// Truncated Fock-space linear algebra: states, Gaussian unitaries, the beam
// splitter, homodyne projector rows and truncation certificates. Everything
// here is a pure function on immutable values; this module is the independent
// brute-force oracle for the closed forms implemented elsewhere.
namespace cvmbqc::fock {

struct FockVector {
  ComplexVector amplitudes;  // index = photon number 0..n_max
  int n_max = 0;
  double norm_deficit = 0.0;  // 1 - sum |amplitude|^2 when built from a normalized state
};

struct FockOperator {
  ComplexMatrix matrix;  // (n_max+1)^modes square, mode-major indexing
  int modes = 1;
  int n_max = 0;
};

struct TruncationCertificate {
  double n_mean = 0.0;
  int modes = 1;
  int n_max = 0;
  double trace_norm_bound = 0.0;  // 3*sqrt(n_mean/(modes*(n_max+1)))
};

// Two-mode pure state with a shared per-mode cutoff; index = n1*(n_max+1)+n2.
struct TwoModeState {
  ComplexVector amplitudes;
  int n_max = 0;
};

FockVector coherent_state(Complex alpha, int n_max);
FockVector number_state(int n, int n_max);

ComplexMatrix annihilation_op(int n_max);
ComplexMatrix creation_op(int n_max);
ComplexMatrix number_op(int n_max);
ComplexMatrix position_op(int n_max);  // q = (a + a^dag)/sqrt(2)
ComplexMatrix momentum_op(int n_max);  // p = -i (a - a^dag)/sqrt(2)

// Exact-unitary exponential of an anti-Hermitian generator, via the
// eigendecomposition of i*g.
ComplexMatrix expm_antihermitian(const ComplexMatrix& g);

// Internal cutoff padding for non-number-conserving unitaries.
int default_pad(double parameter_magnitude);

// D(x) = exp(x a^dag - conj(x) a), built at cutoff n_max+pad and cropped.
FockOperator displacement_op(Complex x, int n_max, int pad = -1);

// R(theta) = exp(-i theta n); diagonal, exactly unitary.
FockOperator rotation_op(double theta, int n_max);

// S(r) = exp[(r/2)(a^2 - a^dag^2)]. Rejects r if the squeezed vacuum keeps
// less than 99% of its norm below n_max.
FockOperator squeeze_op(double r, int n_max, int pad = -1);

FockVector apply(const FockOperator& op, const FockVector& state);

TwoModeState two_mode_product(const FockVector& a, const FockVector& b);

// exp[(theta/2)(a1^dag a2 - a1 a2^dag)] applied block-diagonally over
// fixed-total-photon-number subspaces; conserves total photon number exactly.
TwoModeState beamsplitter_apply(const TwoModeState& state, double theta);

// Harmonic-oscillator eigenfunction psi_n(x), stable Hermite-function
// recurrence (no factorials, no raw Hermite polynomials).
double quadrature_wavefunction(int n, double x);
void quadrature_wavefunctions(int n_max, double x, double* out);  // fills 0..n_max

// Row of <x_theta| in the Fock basis: entries e^{i theta n} psi_n(x).
Eigen::RowVectorXcd homodyne_projector_row(double theta, double x, int n_max);

TruncationCertificate truncation_bound(double n_mean, int modes, int n_max);

// Smallest n_max whose certificate bound is <= eps.
int n_max_for_bound(double eps, double n_mean, int modes);

// ||rho_trunc - rho||_1 for a pure state truncated at n_max; `state` must be
// held at a cutoff large enough that its own deficit is negligible.
double truncation_trace_distance(const FockVector& state, int n_max);

// ||O^dag O - 1|| restricted to the leading block of the given size.
double unitarity_defect(const ComplexMatrix& op, int block_dim);

double norm_squared(const FockVector& v);
double mean_photon_number(const FockVector& v);

}  // namespace cvmbqc::fock
