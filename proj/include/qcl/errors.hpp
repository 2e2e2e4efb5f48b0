#pragma once

#include <stdexcept>

namespace qcl {

// Base type for all library failures so callers can catch one class.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KeyLengthMismatch : Error { using Error::Error; };
struct AuthFailure : Error { using Error::Error; };
struct TooShort : Error { using Error::Error; };
struct UnknownSuite : Error { using Error::Error; };
struct UnknownHpAlg : Error { using Error::Error; };
struct InvalidConnectionIdLength : Error { using Error::Error; };
struct PayloadTooShortForSample : Error { using Error::Error; };
struct MalformedHeader : Error { using Error::Error; };
struct MtuTooSmall : Error { using Error::Error; };
struct UnknownAlgorithm : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct VectorMismatch : Error { using Error::Error; };

}  // namespace qcl
