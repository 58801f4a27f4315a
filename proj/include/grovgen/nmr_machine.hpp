#ifndef GROVGEN_NMR_MACHINE_HPP
#define GROVGEN_NMR_MACHINE_HPP

#include "grovgen/errors.hpp"
#include "grovgen/linalg.hpp"
#include "grovgen/spin_ops.hpp"
#include "grovgen/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

// Ideal two-spin liquid-state NMR machine (13C = spin 1, 1H = spin 2) in the
// doubly rotating frame. Only the scalar coupling 2 pi J Iz1 Iz2 survives in
// the free-evolution Hamiltonian; rf pulses are instantaneous; no relaxation.
// States are deviation density matrices: the unobservable identity part is
// dropped, leaving a traceless Hermitian 4x4 matrix.

namespace grovgen::nmr {

struct SpinSystem {
    double nu1_mhz = 125.76;  // 13C
    double nu2_mhz = 500.13;  // 1H
    double j_hz = 215.0;
    /// gamma_1 / gamma_2; the resonance-frequency ratio at fixed field.
    double gamma_ratio = 0.2514;

    void validate() const {
        if (!(std::isfinite(j_hz) && j_hz > 0.0)) throw ValidationError("J coupling must be positive");
        if (!(std::isfinite(gamma_ratio) && gamma_ratio > 0.0))
            throw ValidationError("gyromagnetic ratio gamma1/gamma2 must be positive");
        if (!(std::isfinite(nu1_mhz) && std::isfinite(nu2_mhz) && nu1_mhz > 0.0 && nu2_mhz > 0.0))
            throw ValidationError("resonance frequencies must be positive");
    }
};

inline constexpr double kDeviationTolerance = 1e-10;

/// Traceless Hermitian 4x4 deviation density matrix.
class DeviationDensityMatrix {
  public:
    explicit DeviationDensityMatrix(const Matrix4& m) : m_(m) {
        const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
        if (hermiticity_defect(m_) > kDeviationTolerance * scale)
            throw ValidationError("deviation density matrix is not Hermitian");
        if (std::abs(m_.trace()) > kDeviationTolerance * scale)
            throw ValidationError("deviation density matrix is not traceless");
    }

    /// |psi><psi| - I/4: a pseudo-pure state of unit polarization.
    static DeviationDensityMatrix from_pure(const StateVector& psi) {
        if (psi.dim() != 4) throw ValidationError("two-spin state must have dimension 4");
        const Matrix4 m = psi.amps() * psi.amps().adjoint() - 0.25 * Matrix4::Identity();
        return DeviationDensityMatrix(m);
    }

    const Matrix4& matrix() const { return m_; }
    Complex operator()(int r, int c) const { return m_(r, c); }

  private:
    Matrix4 m_;
};

// --- pulse events -------------------------------------------------------

enum class Spins { first = 1, second = 2, both = 3 };
enum class RfAxis { plus_x, minus_x, plus_y, minus_y };

/// [angle]_axis on the given spins: exp(i angle I_axis) per spin.
struct RfRotation {
    Spins spins;
    RfAxis axis;
    double angle;
};

/// Free precession for numerator/denominator * (1/J).
struct FreeEvolution {
    long numerator;
    long denominator = 1;

    double j_times_t() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

/// Idealized z-gradient: destroys every coherence.
struct Gradient {};

using PulseEvent = std::variant<RfRotation, FreeEvolution, Gradient>;

inline void validate(const RfRotation& e) {
    if (!std::isfinite(e.angle)) throw ValidationError("rf angle must be finite");
}

inline void validate(const FreeEvolution& e) {
    if (e.denominator <= 0) throw ValidationError("evolution denominator must be positive");
    if (e.numerator < 0) throw ValidationError("evolution time must be non-negative");
}

inline bool acts_on(Spins spins, int spin) { return (static_cast<int>(spins) & spin) != 0; }

inline Matrix4 rf_unitary(const RfRotation& e) {
    validate(e);
    const bool y = e.axis == RfAxis::plus_y || e.axis == RfAxis::minus_y;
    const bool negative = e.axis == RfAxis::minus_x || e.axis == RfAxis::minus_y;
    const spin::Axis axis = y ? spin::Axis::y : spin::Axis::x;
    const double angle = negative ? -e.angle : e.angle;
    const Matrix2 r = spin::rotation(axis, angle);
    const Matrix2 id = Matrix2::Identity();
    Matrix4 out = kron(acts_on(e.spins, 1) ? r : id, acts_on(e.spins, 2) ? r : id);
    return out;
}

/// exp(-i 2 pi J t Iz1 Iz2) for the dimensionless product J t.
inline Matrix4 evolution_unitary(double j_times_t) {
    if (!(j_times_t >= 0.0)) throw ValidationError("evolution time must be non-negative");
    const Matrix4 zz = spin::zz();
    Eigen::Vector4cd d;
    for (int i = 0; i < 4; ++i) d(i) = unit_phase(-2.0 * kPi * j_times_t * zz(i, i).real());
    return d.asDiagonal();
}

inline Matrix4 evolution_unitary(const FreeEvolution& e) {
    validate(e);
    return evolution_unitary(e.j_times_t());
}

// --- state transformations ---------------------------------------------

inline DeviationDensityMatrix conjugate(const DeviationDensityMatrix& rho, const Matrix4& u) {
    const Matrix4 m = u * rho.matrix() * u.adjoint();
    return DeviationDensityMatrix(m);
}

/// rho_eq = gamma1 Iz1 + gamma2 Iz2 with gamma2 = 1.
inline DeviationDensityMatrix equilibrium(const SpinSystem& sys) {
    sys.validate();
    const Matrix4 m = sys.gamma_ratio * spin::iz(1) + spin::iz(2);
    return DeviationDensityMatrix(m);
}

inline DeviationDensityMatrix apply_rf(const DeviationDensityMatrix& rho, const RfRotation& e) {
    return conjugate(rho, rf_unitary(e));
}

inline DeviationDensityMatrix free_evolution(const DeviationDensityMatrix& rho, double j_times_t) {
    return conjugate(rho, evolution_unitary(j_times_t));
}

inline DeviationDensityMatrix free_evolution(const DeviationDensityMatrix& rho, const FreeEvolution& e) {
    return conjugate(rho, evolution_unitary(e));
}

/// Free evolution for a duration in seconds.
inline DeviationDensityMatrix free_evolution_seconds(const DeviationDensityMatrix& rho, double seconds,
                                                     const SpinSystem& sys) {
    sys.validate();
    return free_evolution(rho, seconds * sys.j_hz);
}

inline DeviationDensityMatrix gradient_crush(const DeviationDensityMatrix& rho) {
    const Matrix4 m = rho.matrix().diagonal().asDiagonal();
    return DeviationDensityMatrix(m);
}

inline DeviationDensityMatrix apply_event(const DeviationDensityMatrix& rho, const PulseEvent& event) {
    return std::visit(
        [&rho](const auto& e) {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, RfRotation>)
                return apply_rf(rho, e);
            else if constexpr (std::is_same_v<E, FreeEvolution>)
                return free_evolution(rho, e);
            else
                return gradient_crush(rho);
        },
        event);
}

/// Events are applied left to right.
inline DeviationDensityMatrix run_events(DeviationDensityMatrix rho, std::span<const PulseEvent> events) {
    for (const PulseEvent& e : events) rho = apply_event(rho, e);
    return rho;
}

// --- pseudo-pure preparation -------------------------------------------

/// Flip angle alpha = arccos(gamma1 / (2 gamma2)) of the first proton pulse.
inline double pseudo_pure_flip_angle(const SpinSystem& sys) {
    sys.validate();
    if (!(sys.gamma_ratio > 0.0 && sys.gamma_ratio < 2.0))
        throw ValidationError("pseudo-pure preparation needs 0 < gamma1/gamma2 < 2, got " +
                              std::to_string(sys.gamma_ratio));
    return std::acos(sys.gamma_ratio / 2.0);
}

/// [alpha]_x^2 - grad - [pi/4]_x^1 - 1/4J - [pi]_x^{1,2} - 1/4J - [-pi]_x^{1,2} - [-pi/4]_y^1 - grad
inline std::vector<PulseEvent> pseudo_pure_sequence(const SpinSystem& sys) {
    const double alpha = pseudo_pure_flip_angle(sys);
    return {
        RfRotation{Spins::second, RfAxis::plus_x, alpha},
        Gradient{},
        RfRotation{Spins::first, RfAxis::plus_x, kPi / 4.0},
        FreeEvolution{1, 4},
        RfRotation{Spins::both, RfAxis::plus_x, kPi},
        FreeEvolution{1, 4},
        RfRotation{Spins::both, RfAxis::plus_x, -kPi},
        RfRotation{Spins::first, RfAxis::plus_y, -kPi / 4.0},
        Gradient{},
    };
}

/// Spatially averaged pseudo-pure |up up>: proportional to diag(3, -1, -1, -1)/4.
inline DeviationDensityMatrix prepare_pseudo_pure(const SpinSystem& sys) {
    const auto events = pseudo_pure_sequence(sys);
    return run_events(equilibrium(sys), events);
}

// --- density / state bridge ---------------------------------------------

/// Rescale so the largest minus smallest eigenvalue is 1; a pseudo-pure
/// state then reads |psi><psi| - I/4.
inline DeviationDensityMatrix normalize_deviation(const DeviationDensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(rho.matrix(), Eigen::EigenvaluesOnly);
    const double spread = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
    if (!(spread > 1e-14)) throw PositivityError("deviation matrix vanishes; nothing to normalize");
    const Matrix4 m = rho.matrix() / spread;
    return DeviationDensityMatrix(m);
}

/// <target| rho_n |target>, where rho_n is rho shifted by the smallest
/// identity offset that makes it positive semidefinite, then trace-normalized.
inline double to_pure_state_check(const DeviationDensityMatrix& rho, const StateVector& target) {
    if (target.dim() != 4) throw ValidationError("two-spin target must have dimension 4");
    Eigen::SelfAdjointEigenSolver<Matrix4> es(rho.matrix(), Eigen::EigenvaluesOnly);
    const double lowest = es.eigenvalues().minCoeff();
    const Matrix4 shifted = rho.matrix() - lowest * Matrix4::Identity();
    const double trace = shifted.trace().real();
    if (!(trace > 1e-14))
        throw PositivityError("deviation matrix has no positive part after the identity offset (trace " +
                              std::to_string(trace) + ")");
    const Matrix4 normalized = shifted / trace;
    const Complex f = target.amps().dot(normalized * target.amps());
    return f.real();
}

}  // namespace grovgen::nmr

#endif  // GROVGEN_NMR_MACHINE_HPP
