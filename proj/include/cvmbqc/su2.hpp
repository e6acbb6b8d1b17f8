#pragma once

#include "cvmbqc/common.hpp"
#include "cvmbqc/rng.hpp"

// Exact 2x2 / 4x4 gate algebra: phase gates, Hadamard, global-phase-quotiented
// distances, the four-phase-gate Euler normal form, entanglement detection and
// 2x2 SVD with canonical phases.
namespace cvmbqc::su2 {

struct PhaseTriple {
  double phi1 = 0.0;  // in [0, 2pi)
  double phi2 = 0.0;
  double phi3 = 0.0;
};

// S(phi) = e^{-i phi/2} diag(1, e^{i phi}) = diag(e^{-i phi/2}, e^{i phi/2}).
Gate2 phase_gate(double phi);
Gate2 hadamard();
Gate2 pauli_x();
Gate2 pauli_z();
Gate4 cz_gate();

// min over phi of the operator norm ||a - e^{i phi} b||.
double dist_up_to_phase(const Gate2& a, const Gate2& b);
double dist_up_to_phase(const Gate4& a, const Gate4& b);

// Closed-form Frobenius analogue; an upper bound on the operator-norm
// distance, cheap enough for inner loops.
double frobenius_dist_up_to_phase(const Gate2& a, const Gate2& b);

// U = S(phi1) H S(phi2) H S(phi3) up to global phase; total on unitaries.
// Degeneracies resolved by phi3 = 0.
PhaseTriple euler_decompose(const Gate2& u);
Gate2 reconstruct(const PhaseTriple& t);

// Operator-Schmidt rank > 1 above threshold.
bool is_entangling(const Gate4& g, double threshold = 1e-9);

struct SingularGap {
  double s1 = 0.0;  // s1 >= s2 >= 0
  double s2 = 0.0;
  Gate2 u;
  Gate2 v;  // a = u * diag(s1,s2) * v^dag, column phases canonicalized
};
SingularGap singular_gap(const Gate2& m);

// Haar-random U(2) via complex-Gaussian QR with phase-fixed R diagonal,
// then det-normalized into SU(2).
Gate2 haar_random_su2(Rng& rng);

double unitarity_defect(const Gate2& g);
double unitarity_defect(const Gate4& g);

}  // namespace cvmbqc::su2
