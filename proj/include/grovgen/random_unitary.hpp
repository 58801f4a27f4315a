#ifndef GROVGEN_RANDOM_UNITARY_HPP
#define GROVGEN_RANDOM_UNITARY_HPP

#include "grovgen/linalg.hpp"
#include "grovgen/types.hpp"

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>

namespace grovgen {

/// Seed from GROVER_GEN_SEED when set, otherwise the given fallback.
inline std::uint64_t seed_from_env(std::uint64_t fallback) {
    if (const char* raw = std::getenv("GROVER_GEN_SEED"); raw != nullptr && *raw != '\0') {
        try {
            return std::stoull(raw);
        } catch (const std::exception&) {
            throw ValidationError(std::string("GROVER_GEN_SEED is not an unsigned integer: ") + raw);
        }
    }
    return fallback;
}

/// Unitary built from `layers` rounds of random two-level rotations
/// (Givens rotations with random phases) over every adjacent index pair,
/// followed by a random diagonal phase. Dense, but not Haar distributed.
template <typename Rng>
UnitaryMatrix random_rotation_unitary(std::size_t dim, Rng& rng, int layers = 3) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix u = Matrix::Identity(n, n);
    for (int layer = 0; layer < layers; ++layer) {
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            // Two-level rotation on rows (i, j), j random above i.
            std::uniform_int_distribution<Eigen::Index> pick(i + 1, n - 1);
            const Eigen::Index j = pick(rng);
            const double theta = angle(rng) / 2.0;
            const Complex a = unit_phase(angle(rng)) * std::cos(theta);
            const Complex b = unit_phase(angle(rng)) * std::sin(theta);
            const Eigen::RowVectorXcd ri = u.row(i);
            const Eigen::RowVectorXcd rj = u.row(j);
            u.row(i) = a * ri + b * rj;
            u.row(j) = -std::conj(b) * ri + std::conj(a) * rj;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) u.row(i) *= unit_phase(angle(rng));
    return UnitaryMatrix(std::move(u));
}

/// Smallest |<i|U|s>| over all i.
inline double min_source_overlap(const UnitaryMatrix& u, std::size_t source) {
    return u.matrix().col(static_cast<Eigen::Index>(source)).cwiseAbs().minCoeff();
}

}  // namespace grovgen

#endif  // GROVGEN_RANDOM_UNITARY_HPP
