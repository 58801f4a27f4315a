#ifndef GROVGEN_ERRORS_HPP
#define GROVGEN_ERRORS_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace grovgen {

/// Input failed a structural check (dimension, unitarity, normalization).
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Basis index outside [0, dim).
class IndexError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// The closed-form recursion needs every overlap <i|U|s> to be nonzero.
class PreconditionError : public std::domain_error {
  public:
    PreconditionError(const std::string& what, std::size_t index)
        : std::domain_error(what), index_(index) {}

    std::size_t offending_index() const noexcept { return index_; }

  private:
    std::size_t index_;
};

/// Transfer matrix with a repeated eigenvalue and a single eigenvector.
class DefectiveMatrixError : public std::domain_error {
  public:
    DefectiveMatrixError(const std::string& what, std::complex<double> eigenvalue)
        : std::domain_error(what), eigenvalue_(eigenvalue) {}

    std::complex<double> eigenvalue() const noexcept { return eigenvalue_; }

  private:
    std::complex<double> eigenvalue_;
};

/// Requested pulse program is not one of the supported targets.
class UnsupportedTargetError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A gradient (or other non-unitary) event inside a sequence that must be unitary.
class NonUnitarySequenceError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Compiled sequence does not reproduce its target.
class CompilationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Reference spectrum has no observable element to lock the phase to.
class CalibrationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Deviation matrix has no pure-state part (e.g. it vanishes).
class PositivityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace grovgen

#endif  // GROVGEN_ERRORS_HPP
