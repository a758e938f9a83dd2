#pragma once

#include <stdexcept>
#include <string>

namespace mwgan {

// Invalid manifold input: tag mismatch, antipodal pair, non-tangent vector.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A matrix that should be SPD is not. Carries the offending eigenvalue.
class EigenvalueError : public GeometryError {
public:
    EigenvalueError(const std::string& what, double min_eigenvalue)
        : GeometryError(what), min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

// Malformed file contents (bad magic, truncation, invariant violation on load).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite or otherwise unusable numeric data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// OS-level read/write failure, as opposed to malformed contents.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative solver stopped at its iteration cap without meeting tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration document that fails schema validation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace mwgan
