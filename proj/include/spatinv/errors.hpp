#pragma once

#include <stdexcept>
#include <string>

namespace spatinv {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rational-function layer.
struct DegreeZero final : Error { using Error::Error; };
struct NearPole final : Error { using Error::Error; };
struct NotReduced final : Error { using Error::Error; };
struct NoConvergence final : Error { using Error::Error; };

// System layer.
struct ZeroA1 final : Error { using Error::Error; };
struct NoCharacteristicFunction final : Error { using Error::Error; };
struct ShapeMismatch final : Error { using Error::Error; };

// Monotonicity layer.
struct PoleInRightHalfPlane final : Error { using Error::Error; };
struct NonRealOnAxis final : Error { using Error::Error; };
struct EpsTooLarge final : Error { using Error::Error; };
struct NotNormalized final : Error { using Error::Error; };

// Spectral layer.
struct OnLevelSet final : Error { using Error::Error; };
struct WindowTooCoarse final : Error { using Error::Error; };

// Semigroup layer.
struct ToleranceNotMet final : Error { using Error::Error; };
struct DegenerateWindow final : Error { using Error::Error; };
struct ZeroInSpectrum final : Error { using Error::Error; };
struct RangeInconsistent final : Error { using Error::Error; };
struct PhiPrimeZero final : Error { using Error::Error; };

// Model and I/O layer.
struct BadModel final : Error { using Error::Error; };
struct IoError final : Error { using Error::Error; };

}  // namespace spatinv
