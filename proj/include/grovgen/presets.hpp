#ifndef GROVGEN_PRESETS_HPP
#define GROVGEN_PRESETS_HPP

#include "grovgen/errors.hpp"
#include "grovgen/grover_core.hpp"
#include "grovgen/types.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// The four EPR-synthesis experiments on the C-H register. Each runs one
// Grover iteration from |g(0)> = Y_1(+-pi/2) Y_2(pi/2) |up up>.

namespace grovgen {

enum class EprCase { psi1, psi2, psi3, psi4 };

inline constexpr std::array<EprCase, 4> kAllEprCases{EprCase::psi1, EprCase::psi2, EprCase::psi3, EprCase::psi4};

struct EprPreset {
    EprCase id;
    std::string_view name;
    double spin1_angle;  // +pi/2 or -pi/2
    double spin2_angle;  // always pi/2
    PhaseParams phases;
    std::array<std::size_t, 2> marked;
    std::array<double, 4> target_real;  // unnormalized, real

    UnitaryMatrix preparation() const {
        return two_spin_rotation(spin::Axis::y, spin1_angle, spin::Axis::y, spin2_angle);
    }
    MarkedSet marked_set() const { return MarkedSet(4, {marked[0], marked[1]}); }
    StateVector target() const {
        Vector v(4);
        for (int i = 0; i < 4; ++i) v(i) = target_real[static_cast<std::size_t>(i)];
        v.normalize();
        return StateVector(std::move(v));
    }
};

inline const EprPreset& preset(EprCase c) {
    static const std::array<EprPreset, 4> table{{
        {EprCase::psi1, "psi1", kPi / 2, kPi / 2, {-kPi / 2, -kPi / 2}, {0, 3}, {1, 0, 0, 1}},
        {EprCase::psi2, "psi2", -kPi / 2, kPi / 2, {-kPi / 2, -kPi / 2}, {0, 3}, {1, 0, 0, -1}},
        {EprCase::psi3, "psi3", kPi / 2, kPi / 2, {kPi / 2, kPi / 2}, {1, 2}, {0, 1, 1, 0}},
        {EprCase::psi4, "psi4", -kPi / 2, kPi / 2, {kPi / 2, kPi / 2}, {1, 2}, {0, 1, -1, 0}},
    }};
    return table[static_cast<std::size_t>(c)];
}

/// Accepts "psi1".."psi4" and the Greek spelling.
inline std::optional<EprCase> parse_epr_case(std::string_view name) {
    static constexpr std::array<std::string_view, 4> ascii{"psi1", "psi2", "psi3", "psi4"};
    static constexpr std::array<std::string_view, 4> greek{"ψ1", "ψ2", "ψ3", "ψ4"};
    for (std::size_t i = 0; i < 4; ++i)
        if (name == ascii[i] || name == greek[i]) return static_cast<EprCase>(i);
    return std::nullopt;
}

inline std::string_view to_string(EprCase c) { return preset(c).name; }

}  // namespace grovgen

#endif  // GROVGEN_PRESETS_HPP
