#ifndef GROVGEN_GROVER_CORE_HPP
#define GROVGEN_GROVER_CORE_HPP

#include "grovgen/errors.hpp"
#include "grovgen/linalg.hpp"
#include "grovgen/spin_ops.hpp"
#include "grovgen/types.hpp"

#include <cmath>
#include <cstddef>
#include <string>

// Generalized Grover search by direct state-vector simulation.
//
// One iteration is G * I_t^gamma with
//   I_t^gamma = sum_x e^{i gamma F(x)} |x><x|       (marked-state phase oracle)
//   I_s^beta  = I - (1 - e^{i beta}) |s><s|          (source reflection)
//   G         = -U I_s^beta U^dag
// and the search starts from |g(0)> = U|s>. With beta = gamma = pi, U the
// Walsh-Hadamard transform and s = 0 this is the textbook algorithm.

namespace grovgen {

namespace detail {

inline void check_index(std::size_t index, std::size_t dim, const char* what) {
    if (index >= dim)
        throw IndexError(std::string(what) + " index " + std::to_string(index) + " out of range for dim " +
                         std::to_string(dim));
}

}  // namespace detail

inline UnitaryMatrix phase_oracle(const MarkedSet& marked, double gamma) {
    const auto dim = static_cast<Eigen::Index>(marked.dim());
    Vector diag = Vector::Ones(dim);
    for (std::size_t i : marked.members()) diag(static_cast<Eigen::Index>(i)) = unit_phase(gamma);
    return UnitaryMatrix(diag.asDiagonal().toDenseMatrix());
}

inline UnitaryMatrix reflection_about_source(std::size_t source, double beta, std::size_t dim) {
    detail::check_index(source, dim, "source");
    Matrix m = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m(static_cast<Eigen::Index>(source), static_cast<Eigen::Index>(source)) = unit_phase(beta);
    return UnitaryMatrix(std::move(m));
}

/// G = -U I_s^beta U^dag
inline UnitaryMatrix grover_operator(const UnitaryMatrix& prep, std::size_t source, double beta) {
    const UnitaryMatrix reflection = reflection_about_source(source, beta, prep.dim());
    const Matrix g = -(prep.matrix() * reflection.matrix() * prep.matrix().adjoint());
    return UnitaryMatrix(g);
}

/// Y_1(phi1) Y_2(phi2), X_1(phi1) Y_2(phi2), ... on the two-spin register.
inline UnitaryMatrix two_spin_rotation(spin::Axis axis1, double angle1, spin::Axis axis2, double angle2) {
    return UnitaryMatrix(spin::product_rotation(axis1, angle1, axis2, angle2));
}

/// q-fold tensor power of (1/sqrt 2)[[1, 1], [1, -1]].
inline UnitaryMatrix walsh_hadamard(std::size_t qubits) {
    Matrix h(2, 2);
    h << 1.0, 1.0, 1.0, -1.0;
    h /= std::sqrt(2.0);
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t q = 0; q < qubits; ++q) out = kron(out, h);
    return UnitaryMatrix(std::move(out));
}

/// |g(0)> = U|s>
inline StateVector prepare_initial(const UnitaryMatrix& prep, std::size_t source) {
    detail::check_index(source, prep.dim(), "source");
    return StateVector(prep.matrix().col(static_cast<Eigen::Index>(source)));
}

/// The single-step operator G * I_t^gamma.
inline UnitaryMatrix grover_iteration(const UnitaryMatrix& prep, std::size_t source, const MarkedSet& marked,
                                      const PhaseParams& phases) {
    if (marked.dim() != prep.dim())
        throw ValidationError("marked set dim " + std::to_string(marked.dim()) + " does not match unitary dim " +
                              std::to_string(prep.dim()));
    return grover_operator(prep, source, phases.beta) * phase_oracle(marked, phases.gamma);
}

/// (G I_t^gamma)^n U|s>
inline StateVector run_iterations(const UnitaryMatrix& prep, std::size_t source, const MarkedSet& marked,
                                  const PhaseParams& phases, int iterations) {
    if (iterations < 0) throw ValidationError("iteration count must be non-negative");
    const UnitaryMatrix step = grover_iteration(prep, source, marked, phases);
    Vector amps = prepare_initial(prep, source).amps();
    for (int n = 0; n < iterations; ++n) amps = step.matrix() * amps;
    return StateVector(std::move(amps));
}

/// Probability of measuring some marked state.
inline double success_probability(const StateVector& state, const MarkedSet& marked) {
    if (state.dim() != marked.dim()) throw ValidationError("success_probability: dimension mismatch");
    double p = 0.0;
    for (std::size_t i : marked.members()) p += std::norm(state[i]);
    return p;
}

}  // namespace grovgen

#endif  // GROVGEN_GROVER_CORE_HPP
