#include "cvmbqc/su2.hpp"

#include <cmath>

namespace cvmbqc::su2 {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_to_2pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

template <typename Mat>
double op_norm(const Mat& m) {
  return Eigen::JacobiSVD<Mat>(m).singularValues()[0];
}

// f(phi) = ||a - e^{i phi} b|| is continuous and piecewise smooth; coarse scan
// plus golden-section refinement around the best bracket.
template <typename Mat>
double dist_phase_impl(const Mat& a, const Mat& b) {
  const int coarse = 96;
  double best_phi = 0.0, best = std::numeric_limits<double>::max();
  for (int i = 0; i < coarse; ++i) {
    const double phi = kTwoPi * i / coarse;
    const double v = op_norm(Mat(a - std::exp(Complex(0, phi)) * b));
    if (v < best) {
      best = v;
      best_phi = phi;
    }
  }
  double lo = best_phi - kTwoPi / coarse;
  double hi = best_phi + kTwoPi / coarse;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = op_norm(Mat(a - std::exp(Complex(0, x1)) * b));
  double f2 = op_norm(Mat(a - std::exp(Complex(0, x2)) * b));
  for (int it = 0; it < 70; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = op_norm(Mat(a - std::exp(Complex(0, x1)) * b));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = op_norm(Mat(a - std::exp(Complex(0, x2)) * b));
    }
  }
  return std::min(best, std::min(f1, f2));
}

}  // namespace

Gate2 phase_gate(double phi) {
  Gate2 g;
  g << std::exp(Complex(0, -0.5 * phi)), 0.0, 0.0, std::exp(Complex(0, 0.5 * phi));
  return g;
}

Gate2 hadamard() {
  Gate2 g;
  const double s = 1.0 / std::sqrt(2.0);
  g << s, s, s, -s;
  return g;
}

Gate2 pauli_x() {
  Gate2 g;
  g << 0, 1, 1, 0;
  return g;
}

Gate2 pauli_z() {
  Gate2 g;
  g << 1, 0, 0, -1;
  return g;
}

Gate4 cz_gate() {
  Gate4 g = Gate4::Identity();
  g(3, 3) = -1.0;
  return g;
}

double dist_up_to_phase(const Gate2& a, const Gate2& b) { return dist_phase_impl(a, b); }
double dist_up_to_phase(const Gate4& a, const Gate4& b) { return dist_phase_impl(a, b); }

double frobenius_dist_up_to_phase(const Gate2& a, const Gate2& b) {
  // Subtract at the optimal phase rather than expanding the square; the
  // expanded form cancels catastrophically near zero distance.
  const Complex z = (b.adjoint() * a).trace();
  const Complex phase = std::abs(z) > 0 ? z / std::abs(z) : Complex(1, 0);
  return (a - phase * b).norm();
}

PhaseTriple euler_decompose(const Gate2& u) {
  if (unitarity_defect(u) > 1e-10)
    throw std::invalid_argument("euler_decompose: input is not unitary");
  const Complex det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  const Gate2 su = u / std::sqrt(det);
  // SU(2) in the Z-X-Z form: a = cos(phi2/2) e^{-i(phi1+phi3)/2},
  // b = -i sin(phi2/2) e^{-i(phi1-phi3)/2}.
  const Complex a = su(0, 0);
  const Complex b = su(0, 1);
  PhaseTriple t;
  const double ca = std::min(1.0, std::abs(a));
  const double sb = std::min(1.0, std::abs(b));
  t.phi2 = 2.0 * std::atan2(sb, ca);
  if (sb < 1e-14) {
    // Diagonal gate: split fixed by phi3 = 0.
    t.phi1 = wrap_to_2pi(-2.0 * std::arg(a));
    t.phi3 = 0.0;
    t.phi2 = 0.0;
  } else if (ca < 1e-14) {
    // Anti-diagonal gate: only phi1 - phi3 is determined; phi3 = 0.
    t.phi2 = kPi;
    t.phi1 = wrap_to_2pi(-2.0 * std::arg(b) - kPi);
    t.phi3 = 0.0;
  } else {
    const double sum = -2.0 * std::arg(a);
    const double diff = -2.0 * std::arg(b) - kPi;
    t.phi1 = wrap_to_2pi(0.5 * (sum + diff));
    t.phi3 = wrap_to_2pi(0.5 * (sum - diff));
    t.phi2 = wrap_to_2pi(t.phi2);
  }
  return t;
}

Gate2 reconstruct(const PhaseTriple& t) {
  const Gate2 h = hadamard();
  return phase_gate(t.phi1) * h * phase_gate(t.phi2) * h * phase_gate(t.phi3);
}

bool is_entangling(const Gate4& g, double threshold) {
  // Reshuffle G[(i j),(i' j')] -> R[(i i'),(j j')] and look at the operator
  // Schmidt spectrum.
  Gate4 r;
  for (int i = 0; i < 2; ++i)
    for (int ip = 0; ip < 2; ++ip)
      for (int j = 0; j < 2; ++j)
        for (int jp = 0; jp < 2; ++jp)
          r(2 * i + ip, 2 * j + jp) = g(2 * i + j, 2 * ip + jp);
  const Eigen::Vector4d s = Eigen::JacobiSVD<Gate4>(r).singularValues();
  return s[1] > threshold;
}

SingularGap singular_gap(const Gate2& m) {
  Eigen::JacobiSVD<Gate2> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SingularGap out;
  out.s1 = svd.singularValues()[0];
  out.s2 = svd.singularValues()[1];
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  // Canonical phases: make the largest entry of each U column real positive.
  for (int j = 0; j < 2; ++j) {
    const int i = std::abs(out.u(0, j)) >= std::abs(out.u(1, j)) ? 0 : 1;
    const Complex z = out.u(i, j);
    if (std::abs(z) > 0) {
      const Complex ph = z / std::abs(z);
      out.u.col(j) /= ph;
      out.v.col(j) /= ph;
    }
  }
  return out;
}

Gate2 haar_random_su2(Rng& rng) {
  Gate2 z;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      z(i, j) = Complex(rng.normal(), rng.normal()) / std::sqrt(2.0);
  Eigen::HouseholderQR<Gate2> qr(z);
  Gate2 q = qr.householderQ();
  const Gate2 r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 2; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= (std::abs(d) > 0 ? d / std::abs(d) : Complex(1, 0));
  }
  const Complex det = q(0, 0) * q(1, 1) - q(0, 1) * q(1, 0);
  return q / std::sqrt(det);
}

double unitarity_defect(const Gate2& g) {
  return op_norm(Gate2(g.adjoint() * g - Gate2::Identity()));
}

double unitarity_defect(const Gate4& g) {
  return op_norm(Gate4(g.adjoint() * g - Gate4::Identity()));
}

}  // namespace cvmbqc::su2
