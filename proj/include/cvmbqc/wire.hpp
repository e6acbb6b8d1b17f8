#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cvmbqc/common.hpp"
#include "cvmbqc/fock.hpp"
#include "cvmbqc/rng.hpp"

// The MPS quantum-wire engine: correlation-space matrices from an interaction
// unitary, skew-basis and two-site measurements, outcome sampling, transport
// fidelity. WireTensor values are immutable after construction; trajectory
// simulation is embarrassingly parallel with per-trajectory RNG streams.
namespace cvmbqc::wire {

struct WireTensor {
  std::vector<ComplexMatrix> site_matrices;  // one D x D matrix per basis label
  Eigen::VectorXcd boundary_right;           // defaults to |0>
  int bond_dim = 2;
  double completeness_defect = 0.0;  // ||sum A^dag A - 1||
};

using CorrelationState = Eigen::VectorXcd;

struct StepRecord {
  long traj = 0;
  long step = 0;
  std::string basis;
  double outcome = 0.0;      // index for discrete bases, x for continuous
  double probability = 0.0;  // probability (discrete) or density (continuous)
  std::vector<double> gate;  // normalized gate, re/im interleaved row-major
  double unitarity_defect = 0.0;
};

// Discrete measurement basis given by rows <x|i> in the site's computational
// basis; empty rows means the computational basis itself.
struct DiscreteBasis {
  std::vector<Eigen::RowVectorXcd> rows;
  std::string label = "computational";
};

// Continuous homodyne-type basis <x_theta|; outcomes are sampled by
// inverse-CDF on an adaptive grid over [-x_lim, x_lim].
struct ContinuousBasis {
  double theta = 0.0;
  double x_lim = 8.0;
  int initial_points = 2049;
  std::string label = "homodyne";
};

using Basis = std::variant<DiscreteBasis, ContinuousBasis>;

// A[i]_{j,k} = (<k| (x) <i|) U (|j> (x) |Psi>); qubit-major indexing of U.
// Rejects completeness defects above tol.completeness.
WireTensor matrices_from_interaction(const ComplexMatrix& u,
                                     const Eigen::VectorXcd& input_state, int bond_dim,
                                     const Tolerances& tol = default_tolerances());

double completeness_defect(const std::vector<ComplexMatrix>& mats, int bond_dim);

// A_B[x] = sum_i <x|i> A[i].
std::vector<ComplexMatrix> skew_measure(const WireTensor& w,
                                        const std::vector<Eigen::RowVectorXcd>& basis_rows);

// Gate at a single continuous homodyne outcome, sum_n e^{i theta n} psi_n(x) A[n].
ComplexMatrix homodyne_gate(const WireTensor& w, double theta, double x);

// Interaction unitaries used throughout: the controlled phase-space rotation
// (|0><0| (x) e^{-i theta n} + |1><1| (x) e^{+i theta n}) and its variant with
// a Hadamard on the correlation system.
ComplexMatrix controlled_rotation_interaction(double theta, int n_max);
ComplexMatrix controlled_rotation_with_hadamard(double theta, int n_max);

// Gate family of a continuous basis evaluated on the sampling grid; built
// once per (wire, basis), refined until the completeness integral holds to
// tol.quadrature.
struct ContinuousCache {
  double theta = 0.0;
  std::vector<double> xs;
  std::vector<ComplexMatrix> gates;
  double completeness_defect = 0.0;
};

ContinuousCache prepare_continuous(const WireTensor& w, const ContinuousBasis& basis,
                                   const Tolerances& tol = default_tolerances());

struct StepResult {
  double outcome = 0.0;
  CorrelationState state;
  StepRecord record;
};

// Draws an outcome from p = ||A|psi>||^2 (density for continuous bases),
// renormalizes the state, and records the applied normalized gate. Aborts with
// NumericalContractViolation when the total probability mass defect exceeds
// tol.probability_mass.
StepResult sample_step(const WireTensor& w, const CorrelationState& state, const Basis& basis,
                       Rng& rng, const Tolerances& tol = default_tolerances());

// Same, reusing a prepared grid (the gate family is fixed per basis).
StepResult sample_step(const WireTensor& w, const ContinuousCache& cache,
                       const CorrelationState& state, Rng& rng,
                       const std::string& label = "homodyne",
                       const Tolerances& tol = default_tolerances());

// A[x1,x2] = sum_{i,j} <x1,x2|W|i,j> A[i] (x) A[j]; empty row sets mean the
// computational bases. W is indexed mode-major with the shared site cutoff.
std::vector<ComplexMatrix> two_site_matrices(
    const WireTensor& w1, const WireTensor& w2, const ComplexMatrix& coupling,
    const std::vector<Eigen::RowVectorXcd>& rows1 = {},
    const std::vector<Eigen::RowVectorXcd>& rows2 = {});

struct EncodingIsometry {
  ComplexMatrix v;  // D x d, V^dag V = 1_d
};

struct EncodedWire {
  WireTensor wire;
  double invariance_defect = 0.0;  // max_i ||(1 - V V^dag) A[i] V||
};

// B[i] = V^dag A[i] V. The Eq.-style product equivalence holds exactly when
// the wire leaves range(V) invariant; the returned defect reports how far the
// wire is from that.
EncodedWire encode(const WireTensor& w, const EncodingIsometry& v);

// Outcome-conditioned worst-case transport fidelity of a (possibly
// non-unitary) accumulated product: f = 4 s1 s2 / (s1+s2)^2.
double fidelity_min_conditioned(const Gate2& product);

struct TransportResult {
  std::vector<double> mean_f;          // per step, averaged over trajectories
  std::vector<double> mean_infidelity; // per step, E[1-f]
  std::vector<double> min_f;           // per step, worst trajectory
  std::vector<Gate2> final_products;   // per trajectory, scale-normalized
  std::vector<StepRecord> records;     // all step records (traj-major)
};

TransportResult transport_fidelity_trace(const WireTensor& w, int n_steps, const Basis& basis,
                                         int n_traj, std::uint64_t master_seed, int threads = 1,
                                         bool keep_records = false,
                                         const Tolerances& tol = default_tolerances());

// Outcome-blind figure: a single undo unitary optimized against the final
// products of the given trajectories (the literal reading of the transport
// requirement, reported alongside the conditioned one).
double transport_blind_fidelity(const std::vector<Gate2>& products, Rng& rng);

// Synthetic d_p = 2 wire whose outcome gates have fixed singular ratio.
WireTensor synthetic_ratio_wire(double ratio);

}  // namespace cvmbqc::wire
