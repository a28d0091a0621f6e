#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ggconv {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An angle arm shorter than the distance floor.
class DegenerateAngle : public Error {
public:
    using Error::Error;
};

/// A dihedral plane normal shorter than the floor (collinear chain).
class DegenerateDihedral : public Error {
public:
    using Error::Error;
};

/// A pair distance at or below the 1e-9 A floor (coincident nodes).
class ZeroDistance : public Error {
public:
    using Error::Error;
};

/// A graph violating its structural invariants; carries the full report.
class ValidationError : public Error {
public:
    ValidationError(std::string id, std::vector<std::string> violations);
    const std::string& graph_id() const { return id_; }
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::string id_;
    std::vector<std::string> violations_;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(long line, const std::string& reason);
    long line() const { return line_; }

private:
    long line_ = 0;
};

/// SDF counts line disagrees with the actual atom/bond block.
class CountsMismatch : public Error {
public:
    using Error::Error;
};

/// Input format recognized but not supported (e.g. V3000 molblocks).
class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

/// Training loss became NaN or infinite.
class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

/// Kernel matrix not positive definite even after jitter escalation.
class SingularKernel : public Error {
public:
    using Error::Error;
};

/// Split sizes or fractions inconsistent with the dataset.
class SizeMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace ggconv
