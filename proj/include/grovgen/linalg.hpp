#ifndef GROVGEN_LINALG_HPP
#define GROVGEN_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace grovgen {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// e^{i theta}
inline Complex unit_phase(double theta) { return std::polar(1.0, theta); }

/// Largest entrywise modulus of a - b.
template <typename A, typename B>
double max_abs_diff(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

/// ‖M†M − I‖_max
template <typename M>
double unitarity_defect(const Eigen::MatrixBase<M>& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    const Matrix product = m.adjoint() * m;
    return max_abs_diff(product, Matrix::Identity(m.rows(), m.cols()));
}

template <typename M>
double hermiticity_defect(const Eigen::MatrixBase<M>& m) {
    return max_abs_diff(m, m.adjoint());
}

/// Kronecker product; the left factor occupies the most significant index bits.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace grovgen

#endif  // GROVGEN_LINALG_HPP
