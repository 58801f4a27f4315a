#ifndef GROVGEN_RECURSION_SOLVER_HPP
#define GROVGEN_RECURSION_SOLVER_HPP

#include "grovgen/errors.hpp"
#include "grovgen/grover_core.hpp"
#include "grovgen/linalg.hpp"
#include "grovgen/types.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

// Closed-form amplitude evolution of the generalized Grover iteration.
//
// Dividing each amplitude by its overlap U_is collapses the N-dimensional
// dynamics onto two numbers: the primed amplitude shared by every marked
// state (kbar) and the one shared by every unmarked state (lbar). They
// start at (1, 1) and evolve under a fixed 2x2 transfer matrix A that
// depends only on beta, gamma and the marked/unmarked probability mass of
// U's source column, so
//
//     (kbar(n), lbar(n)) = A^n (1, 1)^T,   k_i(n) = U_is kbar(n),   l_i(n) = U_is lbar(n).
//
// A^n is evaluated through the eigendecomposition A = S diag(l+, l-) S^-1.

namespace grovgen {

inline constexpr double kOverlapFloor = 1e-12;
inline constexpr double kVanishingAmplitude = 1e-9;
inline constexpr double kDegenerateEigenvalueGap = 1e-12;
inline constexpr double kSimilarityDetFloor = 1e-8;

/// Probability mass of U's source column on the marked and unmarked sets.
struct Weights {
    double marked = 0.0;
    double unmarked = 0.0;
};

inline Weights weights(const UnitaryMatrix& prep, std::size_t source, const MarkedSet& marked) {
    detail::check_index(source, prep.dim(), "source");
    if (marked.dim() != prep.dim()) throw ValidationError("weights: marked set dimension mismatch");
    Weights w;
    for (std::size_t i = 0; i < prep.dim(); ++i) {
        const double p = std::norm(prep(i, source));
        (marked.contains(i) ? w.marked : w.unmarked) += p;
    }
    return w;
}

/// The 2x2 matrix A with its eigenvalues and similarity transform.
class TransferMatrix {
  public:
    explicit TransferMatrix(const Matrix2& a) : a_(a) { decompose(); }

    const Matrix2& matrix() const { return a_; }
    Complex lambda_plus() const { return lambda_plus_; }
    Complex lambda_minus() const { return lambda_minus_; }
    /// Columns are eigenvectors for (lambda_plus, lambda_minus), first component scaled to 1 when possible.
    const Matrix2& similarity() const { return s_; }
    const Matrix2& similarity_inverse() const { return s_inv_; }

    /// A^n via eigen powers.
    Matrix2 power(int n) const {
        if (n < 0) throw ValidationError("transfer matrix power must be non-negative");
        const Matrix2 d = Eigen::Vector2cd(ipow(lambda_plus_, n), ipow(lambda_minus_, n)).asDiagonal();
        return s_ * d * s_inv_;
    }

  private:
    static Complex ipow(Complex z, int n) {
        return std::polar(std::pow(std::abs(z), n), static_cast<double>(n) * std::arg(z));
    }

    Eigen::Vector2cd eigenvector(Complex lambda) const {
        // Either row of (A - lambda) gives a null vector; take the better conditioned one.
        const Eigen::Vector2cd from_row0(a_(0, 1), lambda - a_(0, 0));
        const Eigen::Vector2cd from_row1(lambda - a_(1, 1), a_(1, 0));
        Eigen::Vector2cd v = from_row0.norm() >= from_row1.norm() ? from_row0 : from_row1;
        if (std::abs(v(0)) > 1e-12 * v.norm())
            v /= v(0);
        else
            v.normalize();
        return v;
    }

    void decompose() {
        const Complex trace = a_.trace();
        const Complex det = a_.determinant();
        const Complex root = std::sqrt(trace * trace - 4.0 * det);
        lambda_plus_ = (trace + root) / 2.0;
        lambda_minus_ = (trace - root) / 2.0;

        if (std::abs(lambda_plus_ - lambda_minus_) < kDegenerateEigenvalueGap) {
            const bool scalar = std::abs(a_(0, 1)) < kDegenerateEigenvalueGap &&
                                std::abs(a_(1, 0)) < kDegenerateEigenvalueGap &&
                                std::abs(a_(0, 0) - a_(1, 1)) < kDegenerateEigenvalueGap;
            if (!scalar)
                throw DefectiveMatrixError("transfer matrix is defective: repeated eigenvalue (" +
                                               std::to_string(lambda_plus_.real()) + ", " +
                                               std::to_string(lambda_plus_.imag()) + ")",
                                           lambda_plus_);
            s_ = Matrix2::Identity();
            s_inv_ = Matrix2::Identity();
            return;
        }

        s_.col(0) = eigenvector(lambda_plus_);
        s_.col(1) = eigenvector(lambda_minus_);
        const Complex det_s = s_.determinant();
        if (std::abs(det_s) < kSimilarityDetFloor)
            throw DefectiveMatrixError("transfer matrix is numerically defective (|det S| too small)", lambda_plus_);
        s_inv_ << s_(1, 1), -s_(0, 1), -s_(1, 0), s_(0, 0);
        s_inv_ /= det_s;
    }

    Matrix2 a_;
    Complex lambda_plus_;
    Complex lambda_minus_;
    Matrix2 s_;
    Matrix2 s_inv_;
};

inline TransferMatrix transfer_matrix(const PhaseParams& phases, const Weights& w) {
    if (w.marked < -1e-12 || w.unmarked < -1e-12 || std::abs(w.marked + w.unmarked - 1.0) > 1e-12)
        throw ValidationError("weights must be non-negative and sum to 1");
    const Complex eg = unit_phase(phases.gamma);
    const Complex one_minus_eb = 1.0 - unit_phase(phases.beta);
    Matrix2 a;
    a << eg * one_minus_eb * w.marked - eg, one_minus_eb * w.unmarked,
         eg * one_minus_eb * w.marked,      one_minus_eb * w.unmarked - 1.0;
    return TransferMatrix(a);
}

/// Weighted-average primed amplitudes of the marked (kbar) and unmarked (lbar) sets.
struct Averages {
    Complex kbar;
    Complex lbar;
};

inline Averages averages_at(const TransferMatrix& tm, int n) {
    if (n < 0) throw ValidationError("iteration count must be non-negative");
    const Eigen::Vector2cd v = tm.power(n) * Eigen::Vector2cd(1.0, 1.0);
    return {v(0), v(1)};
}

/// Closed-form state after n iterations.
struct AmplitudeTrajectory {
    int n = 0;
    Complex kbar;
    Complex lbar;
    /// k_i(n) at marked indices, l_i(n) elsewhere.
    Vector amplitudes;

    StateVector state() const { return StateVector(amplitudes); }
};

namespace detail {

inline void require_nonzero_overlaps(const UnitaryMatrix& prep, std::size_t source) {
    for (std::size_t i = 0; i < prep.dim(); ++i)
        if (std::abs(prep(i, source)) <= kOverlapFloor)
            throw PreconditionError("overlap <" + std::to_string(i) + "|U|" + std::to_string(source) +
                                        "> vanishes; the closed-form recursion requires every U_is != 0",
                                    i);
}

}  // namespace detail

inline AmplitudeTrajectory amplitudes_at(const UnitaryMatrix& prep, std::size_t source, const MarkedSet& marked,
                                         const PhaseParams& phases, int n) {
    const Weights w = weights(prep, source, marked);
    detail::require_nonzero_overlaps(prep, source);
    const Averages avg = averages_at(transfer_matrix(phases, w), n);

    AmplitudeTrajectory out;
    out.n = n;
    out.kbar = avg.kbar;
    out.lbar = avg.lbar;
    out.amplitudes.resize(static_cast<Eigen::Index>(prep.dim()));
    for (std::size_t i = 0; i < prep.dim(); ++i)
        out.amplitudes(static_cast<Eigen::Index>(i)) = prep(i, source) * (marked.contains(i) ? avg.kbar : avg.lbar);
    return out;
}

struct TargetHit {
    int iteration;
    StateVector target;
};

/// Smallest n in [1, max_iterations] at which every unmarked amplitude vanishes.
inline std::optional<TargetHit> find_target_iteration(const UnitaryMatrix& prep, std::size_t source,
                                                      const MarkedSet& marked, const PhaseParams& phases,
                                                      int max_iterations) {
    const Weights w = weights(prep, source, marked);
    detail::require_nonzero_overlaps(prep, source);
    const TransferMatrix tm = transfer_matrix(phases, w);
    for (int n = 1; n <= max_iterations; ++n) {
        const Averages avg = averages_at(tm, n);
        if (std::abs(avg.lbar) >= kVanishingAmplitude) continue;
        Vector target = Vector::Zero(static_cast<Eigen::Index>(prep.dim()));
        for (std::size_t i : marked.members()) target(static_cast<Eigen::Index>(i)) = prep(i, source) * avg.kbar;
        if (target.norm() == 0.0) continue;
        target.normalize();
        return TargetHit{n, StateVector(std::move(target))};
    }
    return std::nullopt;
}

}  // namespace grovgen

#endif  // GROVGEN_RECURSION_SOLVER_HPP
