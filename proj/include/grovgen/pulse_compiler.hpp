#ifndef GROVGEN_PULSE_COMPILER_HPP
#define GROVGEN_PULSE_COMPILER_HPP

#include "grovgen/errors.hpp"
#include "grovgen/grover_core.hpp"
#include "grovgen/linalg.hpp"
#include "grovgen/nmr_machine.hpp"
#include "grovgen/presets.hpp"
#include "grovgen/types.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

// Pulse programs for the abstract Grover operators on the C-H register, and
// the machinery to check that a program's net unitary matches its target up
// to a global phase.

namespace grovgen::pulse {

using nmr::FreeEvolution;
using nmr::Gradient;
using nmr::PulseEvent;
using nmr::RfAxis;
using nmr::RfRotation;
using nmr::Spins;

/// Events run left to right.
struct PulseSequence {
    std::string label;
    std::vector<PulseEvent> events;

    PulseSequence& append(const PulseSequence& other) {
        events.insert(events.end(), other.events.begin(), other.events.end());
        return *this;
    }
};

inline constexpr double kCompileTolerance = 1e-8;

struct CompiledOperator {
    PulseSequence sequence;
    UnitaryMatrix target;
    UnitaryMatrix achieved;
    /// achieved = global_phase * target
    Complex global_phase;
};

/// Ordered product of event unitaries; the last event multiplies on the left.
inline UnitaryMatrix sequence_unitary(const PulseSequence& seq) {
    Matrix4 u = Matrix4::Identity();
    for (const PulseEvent& event : seq.events) {
        const Matrix4 step = std::visit(
            [](const auto& e) -> Matrix4 {
                using E = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<E, RfRotation>)
                    return nmr::rf_unitary(e);
                else if constexpr (std::is_same_v<E, FreeEvolution>)
                    return nmr::evolution_unitary(e);
                else
                    throw NonUnitarySequenceError("gradient pulse has no unitary representation");
            },
            event);
        u = step * u;
    }
    return UnitaryMatrix(Matrix(u));
}

struct PhaseCheck {
    bool ok = false;
    /// Unset when tr(b^dag a) vanishes.
    std::optional<Complex> phase;
};

/// Is a = phase * b? phase = tr(b^dag a) / |tr(b^dag a)|.
inline PhaseCheck verify_up_to_global_phase(const UnitaryMatrix& a, const UnitaryMatrix& b, double tol) {
    if (a.dim() != b.dim()) throw ValidationError("verify_up_to_global_phase: dimension mismatch");
    const Complex overlap = (b.matrix().adjoint() * a.matrix()).trace();
    const double magnitude = std::abs(overlap);
    if (magnitude < 1e-12) return {false, std::nullopt};
    const Complex phase = overlap / magnitude;
    const bool close = max_abs_diff(a.matrix(), phase * b.matrix()) < tol;
    const bool aligned = magnitude / static_cast<double>(a.dim()) > 1.0 - tol;
    return {close && aligned, phase};
}

inline PulseEvent inverse(const PulseEvent& event) {
    if (const auto* rf = std::get_if<RfRotation>(&event)) return RfRotation{rf->spins, rf->axis, -rf->angle};
    if (std::holds_alternative<FreeEvolution>(event))
        throw UnsupportedTargetError("free evolution cannot be inverted by a pulse program");
    throw NonUnitarySequenceError("gradient pulse cannot be inverted");
}

/// Reverse the event list and invert each event.
inline PulseSequence inverse(const PulseSequence& seq) {
    PulseSequence out{seq.label + "^dag", {}};
    for (auto it = seq.events.rbegin(); it != seq.events.rend(); ++it) out.events.push_back(inverse(*it));
    return out;
}

inline CompiledOperator finish(PulseSequence seq, UnitaryMatrix target) {
    UnitaryMatrix achieved = sequence_unitary(seq);
    const PhaseCheck check = verify_up_to_global_phase(achieved, target, kCompileTolerance);
    if (!check.ok)
        throw CompilationError("pulse program '" + seq.label + "' does not reproduce its target");
    return {std::move(seq), std::move(target), std::move(achieved), *check.phase};
}

namespace detail {

inline bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace detail

/// U = Y_1(phi1) Y_2(phi2) as [phi1]_y^1 - [phi2]_y^2; phi1 = +-pi/2, phi2 = pi/2.
inline CompiledOperator compile_preparation(double spin1_angle, double spin2_angle) {
    const bool supported = (detail::near(spin1_angle, kPi / 2) || detail::near(spin1_angle, -kPi / 2)) &&
                           detail::near(spin2_angle, kPi / 2);
    if (!supported)
        throw UnsupportedTargetError("preparation pulses exist only for Y1(+-pi/2) Y2(pi/2), got (" +
                                     std::to_string(spin1_angle) + ", " + std::to_string(spin2_angle) + ")");
    PulseSequence seq{spin1_angle > 0 ? "U(+pi/2,pi/2)" : "U(-pi/2,pi/2)",
                      {RfRotation{Spins::first, RfAxis::plus_y, spin1_angle},
                       RfRotation{Spins::second, RfAxis::plus_y, spin2_angle}}};
    return finish(std::move(seq), two_spin_rotation(spin::Axis::y, spin1_angle, spin::Axis::y, spin2_angle));
}

enum class OracleKind { i14_minus, i23_plus };

/// 1/4J - [pi]_x^{1,2} - 1/4J - [-pi]_x^{1,2}: the coupled evolution [1/2J].
inline PulseSequence refocused_half_j() {
    return {"[1/2J]",
            {FreeEvolution{1, 4}, RfRotation{Spins::both, RfAxis::plus_x, kPi}, FreeEvolution{1, 4},
             RfRotation{Spins::both, RfAxis::plus_x, -kPi}}};
}

/// I_14^{-pi/2} = diag(-i, 1, 1, -i) and I_23^{pi/2} = i I_14^{-pi/2} share one program.
inline CompiledOperator compile_phase_oracle(OracleKind which) {
    PulseSequence seq = refocused_half_j();
    if (which == OracleKind::i14_minus) {
        seq.label = "I14(-pi/2)";
        return finish(std::move(seq), phase_oracle(MarkedSet(4, {0, 3}), -kPi / 2));
    }
    seq.label = "I23(+pi/2)";
    return finish(std::move(seq), phase_oracle(MarkedSet(4, {1, 2}), kPi / 2));
}

/// I_s^beta for beta = -pi/2 (1/8J delays) or +pi/2 (15/8J delays).
inline CompiledOperator compile_reflection(double beta) {
    long delay_numerator = 0;
    double z_angle = 0.0;
    if (detail::near(beta, -kPi / 2)) {
        delay_numerator = 1;
        z_angle = -kPi / 4;
    } else if (detail::near(beta, kPi / 2)) {
        delay_numerator = 15;
        z_angle = kPi / 4;
    } else {
        throw UnsupportedTargetError("source reflection pulses exist only for beta = +-pi/2, got " +
                                     std::to_string(beta));
    }
    PulseSequence seq{beta < 0 ? "Is(-pi/2)" : "Is(+pi/2)",
                      {FreeEvolution{delay_numerator, 8}, RfRotation{Spins::both, RfAxis::plus_x, kPi},
                       FreeEvolution{delay_numerator, 8}, RfRotation{Spins::both, RfAxis::plus_x, -kPi},
                       RfRotation{Spins::both, RfAxis::plus_y, -kPi / 2},
                       RfRotation{Spins::both, RfAxis::plus_x, z_angle},
                       RfRotation{Spins::both, RfAxis::plus_y, kPi / 2}}};
    return finish(std::move(seq), reflection_about_source(0, beta, 4));
}

/// U followed by one Grover iteration (-U I_s U^dag I_t) for an EPR preset.
inline CompiledOperator compile_full_iteration(EprCase c) {
    const EprPreset& p = preset(c);
    const CompiledOperator prep = compile_preparation(p.spin1_angle, p.spin2_angle);
    const CompiledOperator oracle =
        compile_phase_oracle(p.phases.gamma < 0 ? OracleKind::i14_minus : OracleKind::i23_plus);
    const CompiledOperator reflection = compile_reflection(p.phases.beta);

    PulseSequence seq{"G.It.U[" + std::string(p.name) + "]", {}};
    seq.append(prep.sequence)
        .append(oracle.sequence)
        .append(inverse(prep.sequence))
        .append(reflection.sequence)
        .append(prep.sequence);

    const UnitaryMatrix u = p.preparation();
    const UnitaryMatrix target = grover_iteration(u, 0, p.marked_set(), p.phases) * u;
    return finish(std::move(seq), target);
}

// --- text format ----------------------------------------------------------
//   rf <spins> <axis> <angle_rad>     spins: 1 | 2 | 1,2   axis: +x -x +y -y
//   evolve <numerator>/<denominator>J
//   grad

inline std::string_view spins_text(Spins s) {
    switch (s) {
        case Spins::first: return "1";
        case Spins::second: return "2";
        case Spins::both: return "1,2";
    }
    return "?";
}

inline std::string_view axis_text(RfAxis a) {
    switch (a) {
        case RfAxis::plus_x: return "+x";
        case RfAxis::minus_x: return "-x";
        case RfAxis::plus_y: return "+y";
        case RfAxis::minus_y: return "-y";
    }
    return "?";
}

inline std::string to_text(const PulseEvent& event) {
    if (const auto* rf = std::get_if<RfRotation>(&event)) {
        char angle[32];
        std::snprintf(angle, sizeof angle, "%.17g", rf->angle);
        return "rf " + std::string(spins_text(rf->spins)) + " " + std::string(axis_text(rf->axis)) + " " + angle;
    }
    if (const auto* ev = std::get_if<FreeEvolution>(&event))
        return "evolve " + std::to_string(ev->numerator) + "/" + std::to_string(ev->denominator) + "J";
    return "grad";
}

inline std::string to_text(const PulseSequence& seq) {
    std::string out;
    for (const PulseEvent& e : seq.events) out += to_text(e) + "\n";
    return out;
}

/// Inverse of to_text; blank lines and '#' comments are skipped.
inline PulseSequence parse_sequence(std::string_view text, std::string label = {}) {
    PulseSequence seq{std::move(label), {}};
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    auto fail = [&line_no](const std::string& why) -> ValidationError {
        return ValidationError("pulse text line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string kind;
        if (!(fields >> kind)) continue;
        if (kind == "grad") {
            seq.events.emplace_back(Gradient{});
        } else if (kind == "evolve") {
            std::string t;
            if (!(fields >> t) || t.size() < 4 || t.back() != 'J') throw fail("expected evolve <n>/<d>J");
            const auto slash = t.find('/');
            if (slash == std::string::npos) throw fail("expected evolve <n>/<d>J");
            FreeEvolution ev{};
            const char* end = t.data() + t.size() - 1;
            auto r1 = std::from_chars(t.data(), t.data() + slash, ev.numerator);
            auto r2 = std::from_chars(t.data() + slash + 1, end, ev.denominator);
            if (r1.ec != std::errc{} || r1.ptr != t.data() + slash || r2.ec != std::errc{} || r2.ptr != end)
                throw fail("bad evolution time '" + t + "'");
            nmr::validate(ev);
            seq.events.emplace_back(ev);
        } else if (kind == "rf") {
            std::string spins, axis, angle;
            if (!(fields >> spins >> axis >> angle)) throw fail("expected rf <spins> <axis> <angle_rad>");
            RfRotation rf{};
            if (spins == "1") rf.spins = Spins::first;
            else if (spins == "2") rf.spins = Spins::second;
            else if (spins == "1,2") rf.spins = Spins::both;
            else throw fail("bad spin list '" + spins + "'");
            if (axis == "+x") rf.axis = RfAxis::plus_x;
            else if (axis == "-x") rf.axis = RfAxis::minus_x;
            else if (axis == "+y") rf.axis = RfAxis::plus_y;
            else if (axis == "-y") rf.axis = RfAxis::minus_y;
            else throw fail("bad axis '" + axis + "'");
            try {
                std::size_t used = 0;
                rf.angle = std::stod(angle, &used);
                if (used != angle.size()) throw fail("bad angle '" + angle + "'");
            } catch (const std::logic_error&) {
                throw fail("bad angle '" + angle + "'");
            }
            nmr::validate(rf);
            seq.events.emplace_back(rf);
        } else {
            throw fail("unknown event '" + kind + "'");
        }
        std::string extra;
        if (fields >> extra) throw fail("trailing text '" + extra + "'");
    }
    return seq;
}

}  // namespace grovgen::pulse

#endif  // GROVGEN_PULSE_COMPILER_HPP
