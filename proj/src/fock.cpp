#include "cvmbqc/fock.hpp"

#include <algorithm>
#include <cmath>

namespace cvmbqc::fock {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

FockVector coherent_state(Complex alpha, int n_max) {
  if (n_max < 0) throw std::invalid_argument("coherent_state: n_max must be >= 0");
  FockVector v;
  v.n_max = n_max;
  v.amplitudes = ComplexVector::Zero(n_max + 1);
  v.amplitudes[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= n_max; ++n)
    v.amplitudes[n] = v.amplitudes[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  v.norm_deficit = 1.0 - v.amplitudes.squaredNorm();
  if (v.norm_deficit > 0.5)
    throw std::invalid_argument("coherent_state: cutoff keeps less than half the state");
  return v;
}

FockVector number_state(int n, int n_max) {
  if (n < 0 || n > n_max) throw std::invalid_argument("number_state: n out of range");
  FockVector v;
  v.n_max = n_max;
  v.amplitudes = ComplexVector::Zero(n_max + 1);
  v.amplitudes[n] = 1.0;
  v.norm_deficit = 0.0;
  return v;
}

ComplexMatrix annihilation_op(int n_max) {
  ComplexMatrix a = ComplexMatrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

ComplexMatrix creation_op(int n_max) { return annihilation_op(n_max).adjoint(); }

ComplexMatrix number_op(int n_max) {
  ComplexMatrix n = ComplexMatrix::Zero(n_max + 1, n_max + 1);
  for (int k = 0; k <= n_max; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

ComplexMatrix position_op(int n_max) {
  const ComplexMatrix a = annihilation_op(n_max);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

ComplexMatrix momentum_op(int n_max) {
  const ComplexMatrix a = annihilation_op(n_max);
  return Complex(0, -1) * (a - a.adjoint()) / std::sqrt(2.0);
}

ComplexMatrix expm_antihermitian(const ComplexMatrix& g) {
  const ComplexMatrix h = Complex(0, -1) * g;  // Hermitian
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const Eigen::VectorXd lam = es.eigenvalues();
  ComplexVector phases(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    phases[i] = std::exp(Complex(0, 1) * lam[i]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

int default_pad(double parameter_magnitude) {
  const double p = 10.0 * parameter_magnitude * parameter_magnitude;
  return std::max(20, static_cast<int>(std::ceil(p)));
}

FockOperator displacement_op(Complex x, int n_max, int pad) {
  if (n_max < 0) throw std::invalid_argument("displacement_op: n_max must be >= 0");
  if (pad < 0) pad = default_pad(std::abs(x));
  const int big = n_max + pad;
  const ComplexMatrix a = annihilation_op(big);
  const ComplexMatrix gen = x * a.adjoint() - std::conj(x) * a;
  FockOperator op;
  op.n_max = n_max;
  op.matrix = expm_antihermitian(gen).topLeftCorner(n_max + 1, n_max + 1);
  return op;
}

FockOperator rotation_op(double theta, int n_max) {
  FockOperator op;
  op.n_max = n_max;
  op.matrix = ComplexMatrix::Zero(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    op.matrix(n, n) = std::exp(Complex(0, -theta * n));
  return op;
}

FockOperator squeeze_op(double r, int n_max, int pad) {
  if (n_max < 0) throw std::invalid_argument("squeeze_op: n_max must be >= 0");
  if (pad < 0) pad = default_pad(std::abs(r)) + 20;
  const int big = n_max + pad;
  const ComplexMatrix a = annihilation_op(big);
  const ComplexMatrix gen = 0.5 * r * (a * a - (a * a).adjoint());
  const ComplexMatrix full = expm_antihermitian(gen);
  // Precondition: the squeezed vacuum must keep >= 99% of its norm below n_max.
  double kept = 0.0;
  for (int n = 0; n <= n_max; ++n) kept += std::norm(full(n, 0));
  if (kept < 0.99)
    throw std::invalid_argument("squeeze_op: squeezed vacuum loses too much norm at this cutoff");
  FockOperator op;
  op.n_max = n_max;
  op.matrix = full.topLeftCorner(n_max + 1, n_max + 1);
  return op;
}

FockVector apply(const FockOperator& op, const FockVector& state) {
  if (op.modes != 1 || op.n_max != state.n_max)
    throw std::invalid_argument("apply: operator/state cutoff mismatch");
  FockVector out;
  out.n_max = state.n_max;
  out.amplitudes = op.matrix * state.amplitudes;
  out.norm_deficit = 1.0 - out.amplitudes.squaredNorm();
  return out;
}

TwoModeState two_mode_product(const FockVector& a, const FockVector& b) {
  if (a.n_max != b.n_max) throw std::invalid_argument("two_mode_product: cutoff mismatch");
  const int d = a.n_max + 1;
  TwoModeState s;
  s.n_max = a.n_max;
  s.amplitudes = ComplexVector::Zero(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s.amplitudes[i * d + j] = a.amplitudes[i] * b.amplitudes[j];
  return s;
}

TwoModeState beamsplitter_apply(const TwoModeState& state, double theta) {
  const int m = state.n_max;
  const int d = m + 1;
  TwoModeState out;
  out.n_max = m;
  out.amplitudes = ComplexVector::Zero(d * d);
  // Fixed total photon number N: basis |k, N-k> restricted to the cutoff.
  for (int total = 0; total <= 2 * m; ++total) {
    const int k_lo = std::max(0, total - m);
    const int k_hi = std::min(total, m);
    const int dim = k_hi - k_lo + 1;
    ComplexVector block(dim);
    for (int k = k_lo; k <= k_hi; ++k)
      block[k - k_lo] = state.amplitudes[k * d + (total - k)];
    if (block.squaredNorm() == 0.0) continue;
    ComplexMatrix gen = ComplexMatrix::Zero(dim, dim);
    for (int k = k_lo; k < k_hi; ++k) {
      // <k+1, N-k-1| a1^dag a2 |k, N-k> = sqrt((k+1)(N-k))
      const double c = 0.5 * theta * std::sqrt(static_cast<double>(k + 1) * (total - k));
      gen(k + 1 - k_lo, k - k_lo) = c;
      gen(k - k_lo, k + 1 - k_lo) = -c;
    }
    const ComplexVector moved = expm_antihermitian(gen) * block;
    for (int k = k_lo; k <= k_hi; ++k)
      out.amplitudes[k * d + (total - k)] = moved[k - k_lo];
  }
  return out;
}

double quadrature_wavefunction(int n, double x) {
  if (n < 0) throw std::invalid_argument("quadrature_wavefunction: n must be >= 0");
  double p_prev = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (n == 0) return p_prev;
  double p_cur = std::sqrt(2.0) * x * p_prev;
  for (int k = 2; k <= n; ++k) {
    const double p_next =
        std::sqrt(2.0 / k) * x * p_cur - std::sqrt(static_cast<double>(k - 1) / k) * p_prev;
    p_prev = p_cur;
    p_cur = p_next;
  }
  return p_cur;
}

void quadrature_wavefunctions(int n_max, double x, double* out) {
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (n_max == 0) return;
  out[1] = std::sqrt(2.0) * x * out[0];
  for (int k = 2; k <= n_max; ++k)
    out[k] = std::sqrt(2.0 / k) * x * out[k - 1] -
             std::sqrt(static_cast<double>(k - 1) / k) * out[k - 2];
}

Eigen::RowVectorXcd homodyne_projector_row(double theta, double x, int n_max) {
  std::vector<double> psi(n_max + 1);
  quadrature_wavefunctions(n_max, x, psi.data());
  Eigen::RowVectorXcd row(n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    row[n] = std::exp(Complex(0, theta * n)) * psi[n];
  return row;
}

TruncationCertificate truncation_bound(double n_mean, int modes, int n_max) {
  if (n_mean < 0 || modes < 1 || n_max < 0)
    throw std::invalid_argument("truncation_bound: bad arguments");
  TruncationCertificate cert;
  cert.n_mean = n_mean;
  cert.modes = modes;
  cert.n_max = n_max;
  cert.trace_norm_bound = 3.0 * std::sqrt(n_mean / (static_cast<double>(modes) * (n_max + 1)));
  return cert;
}

int n_max_for_bound(double eps, double n_mean, int modes) {
  if (eps <= 0) throw std::invalid_argument("n_max_for_bound: eps must be > 0");
  // bound <= eps  <=>  n_max+1 >= 9 n_mean/(modes eps^2)
  const double need = 9.0 * n_mean / (static_cast<double>(modes) * eps * eps);
  int n_max = std::max(0, static_cast<int>(std::ceil(need - 1.0)));
  while (truncation_bound(n_mean, modes, n_max).trace_norm_bound > eps) ++n_max;
  while (n_max > 0 && truncation_bound(n_mean, modes, n_max - 1).trace_norm_bound <= eps) --n_max;
  return n_max;
}

double truncation_trace_distance(const FockVector& state, int n_max) {
  if (n_max >= state.n_max)
    throw std::invalid_argument("truncation_trace_distance: need state above the cutoff");
  double tail = 0.0;
  for (int n = n_max + 1; n <= state.n_max; ++n) tail += std::norm(state.amplitudes[n]);
  tail += std::max(0.0, state.norm_deficit);
  // Rank-2 difference of pure states: eigenvalues give sqrt(delta(4-3delta)).
  return std::sqrt(tail * (4.0 - 3.0 * tail));
}

double unitarity_defect(const ComplexMatrix& op, int block_dim) {
  const ComplexMatrix g = op.adjoint() * op;
  const ComplexMatrix block = g.topLeftCorner(block_dim, block_dim) -
                              ComplexMatrix::Identity(block_dim, block_dim);
  return block.operatorNorm();
}

double norm_squared(const FockVector& v) { return v.amplitudes.squaredNorm(); }

double mean_photon_number(const FockVector& v) {
  double s = 0.0;
  for (int n = 0; n <= v.n_max; ++n) s += n * std::norm(v.amplitudes[n]);
  return s;
}

}  // namespace cvmbqc::fock
