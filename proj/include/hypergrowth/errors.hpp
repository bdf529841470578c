#pragma once

#include <stdexcept>
#include <string>

namespace hypergrowth {

/// Base class for all library errors. Subclasses map onto the CLI exit
/// codes: data/shape problems exit 2, a non-hyperbolic fit exits 3 and
/// filesystem failures exit 4.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class SingularityReached : public Error {
  public:
    explicit SingularityReached(const std::string& msg) : Error(msg) {}
};

class NoSingularity : public Error {
  public:
    explicit NoSingularity(const std::string& msg) : Error(msg) {}
};

class InsufficientData : public Error {
  public:
    explicit InsufficientData(const std::string& msg) : Error(msg) {}
};

class NonPositiveValue : public Error {
  public:
    explicit NonPositiveValue(const std::string& msg) : Error(msg) {}
};

/// The reciprocal regression produced a non-positive slope magnitude
/// (k <= 0): the window's data decay or flatten instead of growing.
class NonHyperbolic : public Error {
  public:
    explicit NonHyperbolic(const std::string& msg) : Error(msg) {}
};

class SchemaError : public Error {
  public:
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

class ValueError : public Error {
  public:
    explicit ValueError(const std::string& msg) : Error(msg) {}
};

class DuplicateYear : public Error {
  public:
    explicit DuplicateYear(const std::string& msg) : Error(msg) {}
};

class RegionMismatch : public Error {
  public:
    explicit RegionMismatch(const std::string& msg) : Error(msg) {}
};

class NoCommonYears : public Error {
  public:
    explicit NoCommonYears(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace hypergrowth
