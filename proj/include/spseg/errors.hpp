#pragma once

#include <stdexcept>
#include <string>

namespace spseg {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class OverflowError : public Error { using Error::Error; };
class InvalidParams : public Error { using Error::Error; };
class EmptyRegion : public Error { using Error::Error; };
class LengthMismatch : public Error { using Error::Error; };
class DimensionMismatch : public Error { using Error::Error; };
class EmptyMask : public Error { using Error::Error; };
class EmptySegment : public Error { using Error::Error; };

/// Binary training data with a single class present.
class DegenerateLabels : public Error { using Error::Error; };

/// Raised by train_bank when only one label is active. The outer loop treats
/// it as convergence, not as a failure.
class SingleClass : public Error { using Error::Error; };

}  // namespace spseg
