#include <doctest.h>

#include <cmath>

#include "cvmbqc/fock.hpp"
#include "cvmbqc/rng.hpp"

using namespace cvmbqc;
using fock::FockVector;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double simpson_integral(const std::function<double(double)>& f, double lo, double hi, int n) {
  n |= 1;  // odd point count
  const double h = (hi - lo) / (n - 1);
  double s = f(lo) + f(hi);
  for (int i = 1; i + 1 < n; ++i) s += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("coherent state amplitudes and tails") {
  const auto vac = fock::coherent_state(0.0, 10);
  CHECK(std::abs(vac.amplitudes[0] - Complex(1, 0)) < 1e-15);
  for (int n = 1; n <= 10; ++n) CHECK(std::abs(vac.amplitudes[n]) == 0.0);
  CHECK(vac.norm_deficit == doctest::Approx(0.0).epsilon(1e-14));

  const auto one = fock::coherent_state(1.0, 30);
  CHECK(std::abs(one.amplitudes[0].real() - std::exp(-0.5)) < 1e-14);

  // Poisson mean |alpha|^2 by direct summation.
  const auto two = fock::coherent_state(2.0, 40);
  CHECK(std::abs(fock::mean_photon_number(two) - 4.0) < 1e-8);

  // Norm never exceeds 1 and the deficit matches the tail.
  CHECK(fock::norm_squared(two) <= 1.0 + 1e-12);
  CHECK(std::abs(two.norm_deficit - (1.0 - fock::norm_squared(two))) < 1e-12);

  // A cutoff that keeps less than half the state is rejected.
  CHECK_THROWS_AS(fock::coherent_state(3.0, 2), std::invalid_argument);
}

TEST_CASE("displacement operator against the coherent closed form") {
  const auto id = fock::displacement_op(0.0, 12);
  CHECK((id.matrix - ComplexMatrix::Identity(13, 13)).norm() < 1e-12);

  for (const Complex alpha : {Complex(1.5, 0.0), Complex(0.7, -1.1), Complex(-2.0, 0.3)}) {
    const auto d = fock::displacement_op(alpha, 40, 20);
    const auto target = fock::coherent_state(alpha, 40);
    const ComplexVector col = d.matrix.col(0);
    CHECK((col - target.amplitudes).norm() < 1e-8);
  }

  // D(alpha) D(-alpha) = identity on the low-photon block.
  const auto dp = fock::displacement_op(1.3, 40);
  const auto dm = fock::displacement_op(-1.3, 40);
  const ComplexMatrix prod = dp.matrix * dm.matrix;
  CHECK((prod.topLeftCorner(20, 20) - ComplexMatrix::Identity(20, 20)).norm() < 1e-8);
}

TEST_CASE("rotation operator") {
  const auto id = fock::rotation_op(0.0, 8);
  CHECK((id.matrix - ComplexMatrix::Identity(9, 9)).norm() == 0.0);

  const auto r = fock::rotation_op(kPi, 60);
  const auto a = fock::coherent_state(1.2, 60);
  const auto ma = fock::coherent_state(-1.2, 60);
  CHECK((r.matrix * a.amplitudes - ma.amplitudes).norm() < 1e-10);

  const auto rt = fock::rotation_op(0.7321, 30);
  CHECK(fock::unitarity_defect(rt.matrix, 31) < 1e-14);
}

TEST_CASE("squeezing operator variance and inverse") {
  const auto id = fock::squeeze_op(0.0, 20);
  CHECK((id.matrix - ComplexMatrix::Identity(21, 21)).norm() < 1e-12);

  // Matrix-element oracle for the quadrature variance of the squeezed vacuum:
  // with the generator (r/2)(a^2 - a^dag^2), S^dag q S = e^{-r} q, so
  // Var(q) = e^{-2r}/2 in S(r)|0>.
  const double r = 0.3;
  const auto s = fock::squeeze_op(r, 60);
  ComplexVector sv = s.matrix.col(0);
  const ComplexMatrix q = fock::position_op(60);
  const Complex mean = sv.adjoint() * (q * sv);
  const Complex second = sv.adjoint() * (q * (q * sv)).eval();
  const double var = second.real() - mean.real() * mean.real();
  CHECK(var == doctest::Approx(0.5 * std::exp(-2.0 * r)).epsilon(0.01));

  // And the opposite sign gives e^{+2r}/2.
  const auto sm = fock::squeeze_op(-r, 60);
  ComplexVector smv = sm.matrix.col(0);
  const Complex second_m = smv.adjoint() * (q * (q * smv)).eval();
  CHECK(second_m.real() == doctest::Approx(0.5 * std::exp(2.0 * r)).epsilon(0.01));

  const auto sp = fock::squeeze_op(0.4, 60);
  const auto sn = fock::squeeze_op(-0.4, 60);
  const ComplexMatrix prod = sp.matrix * sn.matrix;
  CHECK((prod.topLeftCorner(25, 25) - ComplexMatrix::Identity(25, 25)).norm() < 1e-8);

  CHECK_THROWS_AS(fock::squeeze_op(2.5, 10), std::invalid_argument);
}

TEST_CASE("beam splitter: coherent action, identity, photon conservation") {
  const auto in = fock::two_mode_product(fock::coherent_state(Complex(0.9, 0.0), 40),
                                         fock::coherent_state(Complex(0.2, 0.5), 40));

  // theta = pi/2 sends (a, b) to ((a+b)/sqrt2, (b-a)/sqrt2) for the
  // exp[(theta/2)(a1^dag a2 - a1 a2^dag)] generator.
  const auto out = fock::beamsplitter_apply(in, 0.5 * kPi);
  const Complex a(0.9, 0.0), b(0.2, 0.5);
  const auto expect = fock::two_mode_product(
      fock::coherent_state((a + b) / std::sqrt(2.0), 40),
      fock::coherent_state((b - a) / std::sqrt(2.0), 40));
  CHECK((out.amplitudes - expect.amplitudes).norm() < 1e-7);

  // theta = -pi/2 swaps the sign convention: ((a-b)/sqrt2, (a+b)/sqrt2).
  const auto out2 = fock::beamsplitter_apply(in, -0.5 * kPi);
  const auto expect2 = fock::two_mode_product(
      fock::coherent_state((a - b) / std::sqrt(2.0), 40),
      fock::coherent_state((a + b) / std::sqrt(2.0), 40));
  CHECK((out2.amplitudes - expect2.amplitudes).norm() < 1e-7);

  // Balanced splitter on |alpha>|alpha> empties one port.
  const auto same = fock::two_mode_product(fock::coherent_state(0.8, 40),
                                           fock::coherent_state(0.8, 40));
  const auto merged = fock::beamsplitter_apply(same, 0.5 * kPi);
  const auto expect3 = fock::two_mode_product(
      fock::coherent_state(0.8 * std::sqrt(2.0), 40), fock::coherent_state(0.0, 40));
  CHECK((merged.amplitudes - expect3.amplitudes).norm() < 1e-7);

  const auto nothing = fock::beamsplitter_apply(in, 0.0);
  CHECK((nothing.amplitudes - in.amplitudes).norm() < 1e-13);

  // Total photon number conserved exactly: per-block mass unchanged.
  const int d = 41;
  std::vector<double> before(2 * d - 1, 0.0), after(2 * d - 1, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      before[i + j] += std::norm(in.amplitudes[i * d + j]);
      after[i + j] += std::norm(out.amplitudes[i * d + j]);
    }
  for (int t = 0; t < 2 * d - 1; ++t) CHECK(std::abs(before[t] - after[t]) < 1e-12);
  CHECK(std::abs(out.amplitudes.squaredNorm() - in.amplitudes.squaredNorm()) < 1e-12);
}

TEST_CASE("Hermite wavefunctions: values, orthonormality, boundedness") {
  CHECK(fock::quadrature_wavefunction(0, 0.0) ==
        doctest::Approx(std::pow(kPi, -0.25)).epsilon(1e-12));
  CHECK(fock::quadrature_wavefunction(1, 0.0) == 0.0);

  for (int n = 0; n <= 10; ++n)
    for (int m = n; m <= 10; ++m) {
      const double overlap = simpson_integral(
          [&](double x) {
            return fock::quadrature_wavefunction(n, x) * fock::quadrature_wavefunction(m, x);
          },
          -12.0, 12.0, 4001);
      CHECK(std::abs(overlap - (n == m ? 1.0 : 0.0)) < 1e-8);
    }

  double biggest = 0.0;
  for (int n = 0; n <= 200; n += 5)
    for (double x = -20.0; x <= 20.0; x += 0.05)
      biggest = std::max(biggest, std::abs(fock::quadrature_wavefunction(n, x)));
  CHECK(biggest <= 0.8);
}

TEST_CASE("homodyne projector rows") {
  const auto row0 = fock::homodyne_projector_row(0.0, 0.7, 12);
  for (int n = 0; n <= 12; ++n)
    CHECK(std::abs(row0[n] - Complex(fock::quadrature_wavefunction(n, 0.7), 0)) < 1e-14);

  const auto row_pi = fock::homodyne_projector_row(kPi, -0.4, 12);
  for (int n = 0; n <= 12; ++n) {
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    CHECK(std::abs(row_pi[n] - Complex(sign * fock::quadrature_wavefunction(n, -0.4), 0)) <
          1e-12);
  }

  // Quadrature density of a coherent state is the shifted vacuum Gaussian.
  const double alpha = 1.1;
  const auto state = fock::coherent_state(alpha, 60);
  auto density = [&](double x) {
    const auto row = fock::homodyne_projector_row(0.0, x, 60);
    return std::norm((row * state.amplitudes)(0, 0));
  };
  const double q0 = std::sqrt(2.0) * alpha;
  for (double x = -2.0; x <= 4.0; x += 0.5)
    CHECK(std::abs(density(x) - std::exp(-(x - q0) * (x - q0)) / std::sqrt(kPi)) < 1e-6);
  CHECK(std::abs(simpson_integral(density, -8.0, 10.0, 4001) - 1.0) < 1e-9);
}

TEST_CASE("truncation certificate and measured trace distance") {
  CHECK(fock::truncation_bound(0.0, 1, 5).trace_norm_bound == 0.0);
  CHECK(fock::truncation_bound(4.0, 1, 35).trace_norm_bound == doctest::Approx(1.0).epsilon(1e-15));

  const auto big = fock::coherent_state(2.0, 200);
  const double measured = fock::truncation_trace_distance(big, 35);
  CHECK(measured <= 1.0);

  // Randomly drawn coherent and superposition states stay under the bound.
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform(0.2, 2.2);
    const auto state = fock::coherent_state(a, 200);
    const int n_max = 5 + static_cast<int>(rng.uniform() * 30);
    const double bound = fock::truncation_bound(fock::mean_photon_number(state), 1, n_max)
                             .trace_norm_bound;
    CHECK(fock::truncation_trace_distance(state, n_max) <= bound + 1e-12);
  }

  // Cutoff selection helper inverts the bound.
  const int n = fock::n_max_for_bound(0.1, 4.0, 1);
  CHECK(fock::truncation_bound(4.0, 1, n).trace_norm_bound <= 0.1);
  if (n > 0)
    CHECK(fock::truncation_bound(4.0, 1, n - 1).trace_norm_bound > 0.1);
}

TEST_CASE("Gaussian constructors reproduce coherent-state images") {
  // Displacement: D(z)|beta> = e^{i Im(z conj(beta))} |z + beta>.
  const Complex z(0.6, -0.8), beta(1.0, 0.4);
  const auto d = fock::displacement_op(z, 40);
  const auto in = fock::coherent_state(beta, 40);
  const Complex phase = std::exp(Complex(0, std::imag(z * std::conj(beta))));
  const auto img = fock::coherent_state(z + beta, 40);
  CHECK((d.matrix * in.amplitudes - phase * img.amplitudes).norm() < 1e-7);

  // Rotation: R(t)|beta> = |e^{-it} beta>.
  const double t = 0.9;
  const auto r = fock::rotation_op(t, 40);
  const auto img2 = fock::coherent_state(std::exp(Complex(0, -t)) * beta, 40);
  CHECK((r.matrix * in.amplitudes - img2.amplitudes).norm() < 1e-7);

  // Squeezing: first and second q/p moments follow the Heisenberg maps.
  const double rs = 0.25;
  const auto s = fock::squeeze_op(rs, 60);
  const auto in2 = fock::coherent_state(0.5, 60);
  const ComplexVector sv = s.matrix * in2.amplitudes;
  const ComplexMatrix q = fock::position_op(60);
  const ComplexMatrix p = fock::momentum_op(60);
  const double mq = (sv.adjoint() * (q * sv))(0, 0).real();
  const double mp = (sv.adjoint() * (p * sv))(0, 0).real();
  const double q_in = std::sqrt(2.0) * 0.5;
  CHECK(std::abs(mq - std::exp(-rs) * q_in) < 1e-7);
  CHECK(std::abs(mp) < 1e-7);
}
