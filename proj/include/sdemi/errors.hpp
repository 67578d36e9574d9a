#pragma once

#include <stdexcept>

namespace sdemi {

// Domain failure taxonomy. Everything derives from std::runtime_error so the
// CLI and tests can map failures to exit codes in one place.

// A diffusion evaluation returned G with G^2 below the declared bound K.
struct NonDegeneracyViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A simulated state left the representable range; the replicate is aborted
// and counted, never clamped.
struct NonFiniteState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact conditioning is not available for this (system, input) combination.
struct UnsupportedInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SNR-gated computation requested for a system whose verdict is weaker.
struct NotStrongSnr : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureUnstable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewReplicates : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sdemi
