#pragma once

#include <stdexcept>
#include <string>

namespace pmech {

// Everything user-facing derives from Error so the CLI can map failures to
// exit codes in one place (0 ok, 1 assertion, 2 config/validation).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct RankMismatch : Error { using Error::Error; };
struct NotSymplectic : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct BoxTooSmall : Error { using Error::Error; };
struct OutOfBox : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };
struct DegreeOverflow : Error { using Error::Error; };
struct NotConvolution : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// Indicates a broken internal invariant (ordering bug, overflow), not bad input.
struct InternalError : Error { using Error::Error; };

}  // namespace pmech
