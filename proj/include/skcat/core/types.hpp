#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace skcat {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline constexpr cplx I_unit{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

// Every failure mode the library reports derives from skcat::Error so the CLI
// can map it onto an exit code in one place.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised for inputs outside an operation's documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Numerical failures (non-convergence, tolerance breaches, missing roots).
class NumericalError : public Error {
 public:
  using Error::Error;
};

#define SKCAT_ERROR(name, base)                 \
  class name : public base {                    \
   public:                                      \
    using base::base;                           \
  };

SKCAT_ERROR(DegenerateCat, DomainError)
SKCAT_ERROR(NonHermitian, DomainError)
SKCAT_ERROR(NonUnitTrace, DomainError)
SKCAT_ERROR(NonTraceless, DomainError)
SKCAT_ERROR(NonSymmetric, DomainError)
SKCAT_ERROR(InvalidRegime, DomainError)
SKCAT_ERROR(RegimeViolation, DomainError)
SKCAT_ERROR(MissingTone, DomainError)
SKCAT_ERROR(DegenerateDenominator, DomainError)
SKCAT_ERROR(NotInCatSubspace, DomainError)
SKCAT_ERROR(ParityMixing, NumericalError)
SKCAT_ERROR(NoClockTransition, NumericalError)
SKCAT_ERROR(IntegratorTolerance, NumericalError)
SKCAT_ERROR(NoRoot, NumericalError)
SKCAT_ERROR(PerturbationTooStrong, NumericalError)
SKCAT_ERROR(AdiabaticityViolated, NumericalError)
SKCAT_ERROR(IntegralMismatch, NumericalError)

#undef SKCAT_ERROR

// Soft diagnostics (regime flags) collected alongside a result.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string msg) {
  if (sink) sink->push_back(std::move(msg));
}

}  // namespace skcat
