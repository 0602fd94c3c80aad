#pragma once

#include <stdexcept>
#include <string>

namespace singloc {

/// Error categories raised by the library. Each validation or precondition
/// failure maps to exactly one code so callers (and tests) can dispatch on it.
enum class errc {
  invalid_order,                  // p outside (-1,0)u(0,1), or p == 0
  nonpositive_intensity,          // s(x) <= 0 somewhere on [-T,T]\{0}
  smooth_part_nonzero_at_origin,  // p > 0 with psi(0) != 0
  bad_interval,                   // theta or (alpha,beta) not inside (0,T)
  out_of_interval,                // candidate shift outside (alpha,beta)
  degenerate_grid,                // unusable posterior grid
  mle_undefined_for_negative_p,   // MLE requested with p < 0
  all_nodes_singular,             // every scan node hit an event exactly
  xi_undefined_for_negative_p,    // argmax draw requested with p < 0
  bad_config,                     // malformed config / parameter block
  io_error,                       // file read/write failure
  fingerprint_mismatch,           // batch file does not match the model
};

inline const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::invalid_order: return "InvalidOrder";
    case errc::nonpositive_intensity: return "NonpositiveIntensity";
    case errc::smooth_part_nonzero_at_origin: return "SmoothPartNonzeroAtOrigin";
    case errc::bad_interval: return "BadInterval";
    case errc::out_of_interval: return "OutOfInterval";
    case errc::degenerate_grid: return "DegenerateGrid";
    case errc::mle_undefined_for_negative_p: return "MleUndefinedForNegativeP";
    case errc::all_nodes_singular: return "AllNodesSingular";
    case errc::xi_undefined_for_negative_p: return "XiUndefinedForNegativeP";
    case errc::bad_config: return "BadConfig";
    case errc::io_error: return "IoError";
    case errc::fingerprint_mismatch: return "FingerprintMismatch";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace singloc
