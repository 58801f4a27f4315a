#ifndef GROVGEN_SPIN_OPS_HPP
#define GROVGEN_SPIN_OPS_HPP

#include "grovgen/errors.hpp"
#include "grovgen/linalg.hpp"

#include <cmath>
#include <string>

// Spin-1/2 operators for the two-spin (carbon, proton) register.
// Spin 1 is the most significant bit: index 0 = |up up>, 1 = |up down>,
// 2 = |down up>, 3 = |down down>. |up> is the +1/2 eigenstate of I_z.

namespace grovgen::spin {

enum class Axis { x, y, z };

inline Matrix2 angular_momentum(Axis axis) {
    Matrix2 m;
    switch (axis) {
        case Axis::x: m << 0.0, 0.5, 0.5, 0.0; break;
        case Axis::y: m << 0.0, -0.5 * kI, 0.5 * kI, 0.0; break;
        case Axis::z: m << 0.5, 0.0, 0.0, -0.5; break;
    }
    return m;
}

/// exp(i * angle * I_axis) on one spin; the sign follows X_k(phi) = e^{i phi I_x^k}.
inline Matrix2 rotation(Axis axis, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    // 2 I_a is the Pauli matrix, so exp(i angle I_a) = c + i s sigma_a.
    return c * Matrix2::Identity() + (2.0 * kI * s) * angular_momentum(axis);
}

/// Lift a single-spin operator onto spin 1 or spin 2.
inline Matrix4 on_spin(const Matrix2& op, int spin) {
    const Matrix2 id = Matrix2::Identity();
    Matrix4 out;
    if (spin == 1)
        out = kron(op, id);
    else if (spin == 2)
        out = kron(id, op);
    else
        throw IndexError("spin label must be 1 or 2, got " + std::to_string(spin));
    return out;
}

inline Matrix4 iz(int spin) { return on_spin(angular_momentum(Axis::z), spin); }

/// I_z^1 I_z^2 = diag(1/4, -1/4, -1/4, 1/4)
inline Matrix4 zz() { return iz(1) * iz(2); }

/// Tensor product R_1(phi1) ⊗ R_2(phi2) of independent single-spin rotations.
inline Matrix4 product_rotation(Axis axis1, double angle1, Axis axis2, double angle2) {
    Matrix4 out = kron(rotation(axis1, angle1), rotation(axis2, angle2));
    return out;
}

}  // namespace grovgen::spin

#endif  // GROVGEN_SPIN_OPS_HPP
