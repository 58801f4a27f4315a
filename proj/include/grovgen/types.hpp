#ifndef GROVGEN_TYPES_HPP
#define GROVGEN_TYPES_HPP

#include "grovgen/errors.hpp"
#include "grovgen/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace grovgen {

inline constexpr double kUnitarityTolerance = 1e-10;
inline constexpr double kNormTolerance = 1e-10;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Normalized amplitude vector over 2^q computational basis states.
class StateVector {
  public:
    explicit StateVector(Vector amps) : amps_(std::move(amps)) {
        if (!is_power_of_two(static_cast<std::size_t>(amps_.size())))
            throw ValidationError("state dimension " + std::to_string(amps_.size()) +
                                  " is not a power of two");
        if (std::abs(amps_.squaredNorm() - 1.0) > kNormTolerance)
            throw ValidationError("state is not normalized (norm^2 = " +
                                  std::to_string(amps_.squaredNorm()) + ")");
    }

    StateVector(std::initializer_list<Complex> amps)
        : StateVector(Vector::Map(std::data(amps), static_cast<Eigen::Index>(amps.size()))) {}

    static StateVector basis(std::size_t dim, std::size_t index) {
        if (index >= dim)
            throw IndexError("basis index " + std::to_string(index) + " out of range for dim " +
                             std::to_string(dim));
        Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
        v(static_cast<Eigen::Index>(index)) = 1.0;
        return StateVector(std::move(v));
    }

    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    const Vector& amps() const { return amps_; }
    Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }
    double norm() const { return amps_.norm(); }

  private:
    Vector amps_;
};

/// |<a|b>|^2; blind to global phase.
inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw ValidationError("fidelity: dimension mismatch");
    return std::norm(a.amps().dot(b.amps()));
}

/// Sorted, duplicate-free subset of [0, dim).
class MarkedSet {
  public:
    MarkedSet(std::size_t dim, std::vector<std::size_t> members) : dim_(dim), members_(std::move(members)) {
        if (dim_ == 0) throw ValidationError("marked set over an empty basis");
        std::sort(members_.begin(), members_.end());
        if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
            throw ValidationError("marked set contains duplicate indices");
        if (!members_.empty() && members_.back() >= dim_)
            throw IndexError("marked index " + std::to_string(members_.back()) + " out of range for dim " +
                             std::to_string(dim_));
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return members_.size(); }
    const std::vector<std::size_t>& members() const { return members_; }

    bool contains(std::size_t i) const { return std::binary_search(members_.begin(), members_.end(), i); }

    std::vector<std::size_t> complement() const {
        std::vector<std::size_t> out;
        out.reserve(dim_ - members_.size());
        for (std::size_t i = 0; i < dim_; ++i)
            if (!contains(i)) out.push_back(i);
        return out;
    }

    friend bool operator==(const MarkedSet&, const MarkedSet&) = default;

  private:
    std::size_t dim_;
    std::vector<std::size_t> members_;
};

/// Phase of the source reflection (beta) and of the marked-state oracle (gamma), radians.
struct PhaseParams {
    double beta = kPi;
    double gamma = kPi;
};

/// Square matrix with U†U = I to kUnitarityTolerance.
class UnitaryMatrix {
  public:
    explicit UnitaryMatrix(Matrix entries) : m_(std::move(entries)) {
        if (m_.rows() == 0 || m_.rows() != m_.cols())
            throw ValidationError("unitary must be a non-empty square matrix");
        const double defect = unitarity_defect(m_);
        if (!(defect < kUnitarityTolerance))
            throw ValidationError("matrix is not unitary (max |U^dag U - I| = " + std::to_string(defect) + ")");
    }

    static UnitaryMatrix identity(std::size_t dim) {
        return UnitaryMatrix(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
    }

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    Complex operator()(std::size_t r, std::size_t c) const {
        return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

    UnitaryMatrix adjoint() const { return UnitaryMatrix(m_.adjoint()); }

    friend UnitaryMatrix operator*(const UnitaryMatrix& a, const UnitaryMatrix& b) {
        if (a.dim() != b.dim()) throw ValidationError("unitary product: dimension mismatch");
        return UnitaryMatrix(a.m_ * b.m_);
    }

  private:
    Matrix m_;
};

}  // namespace grovgen

#endif  // GROVGEN_TYPES_HPP
