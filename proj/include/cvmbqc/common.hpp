#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cvmbqc {

inline constexpr const char* kVersion = "0.1.0";

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Gate2 = Eigen::Matrix2cd;
using Gate4 = Eigen::Matrix4cd;

// Single record of numeric tolerances used across modules. Operations take a
// Tolerances argument only where the spec makes the threshold a contract;
// everything else uses the defaults.
struct Tolerances {
  double unitarity = 1e-8;          // unitarity defect on the occupied block
  double completeness = 1e-4;       // wire completeness rejection threshold
  double probability_mass = 1e-4;   // per-step total-probability abort
  double quadrature = 1e-6;         // continuous-basis completeness target
  double state_norm = 1e-12;        // correlation-state renormalization check
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

// Thrown when a numeric invariant that the artifact promises to hold is
// violated at runtime (probability mass defect, completeness defect, ...).
// The CLI maps this to exit code 3.
class NumericalContractViolation : public std::runtime_error {
 public:
  explicit NumericalContractViolation(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace cvmbqc
