#ifndef GROVGEN_EXPERIMENT_HPP
#define GROVGEN_EXPERIMENT_HPP

#include "grovgen/grover_core.hpp"
#include "grovgen/nmr_machine.hpp"
#include "grovgen/presets.hpp"
#include "grovgen/pulse_compiler.hpp"
#include "grovgen/spectra_readout.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// End-to-end EPR synthesis on the simulated spectrometer:
// equilibrium -> pseudo-pure |up up> -> compiled U + one Grover iteration
// -> [pi/2]_y^2 readout -> calibrated carbon and proton peaks -> verdict.

namespace grovgen {

/// Pipeline failure tagged with the stage that raised it.
class StageError : public std::runtime_error {
  public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

namespace detail {

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

}  // namespace detail

struct ReferenceRun {
    nmr::DeviationDensityMatrix pseudo_pure;
    nmr::DeviationDensityMatrix carbon_readout;  // after [pi/2]_y^1
    nmr::DeviationDensityMatrix proton_readout;  // after [pi/2]_y^2
    spectra::ReferencePhase reference;
    std::vector<spectra::Peak> carbon_peaks;
    std::vector<spectra::Peak> proton_peaks;
    /// Max entrywise error of the normalized readouts against the expected reference matrices.
    double carbon_readout_error;
    double proton_readout_error;
};

inline ReferenceRun run_reference(const nmr::SpinSystem& sys) {
    using spectra::ReadoutPulse;
    const auto pp = detail::in_stage("pseudo-pure preparation", [&] { return nmr::prepare_pseudo_pure(sys); });
    const auto carbon = spectra::apply_readout(pp, ReadoutPulse::spin1);
    const auto proton = spectra::apply_readout(pp, ReadoutPulse::spin2);
    const auto ref = detail::in_stage("calibration", [&] { return spectra::calibrate_from(carbon, proton); });
    return ReferenceRun{
        pp,
        carbon,
        proton,
        ref,
        spectra::extract_peaks(carbon, spectra::Nucleus::carbon, ref, sys),
        spectra::extract_peaks(proton, spectra::Nucleus::proton, ref, sys),
        max_abs_diff(nmr::normalize_deviation(carbon).matrix(), spectra::expected_reference_readout(ReadoutPulse::spin1)),
        max_abs_diff(nmr::normalize_deviation(proton).matrix(), spectra::expected_reference_readout(ReadoutPulse::spin2)),
    };
}

struct EprRun {
    EprCase which;
    pulse::CompiledOperator program;
    nmr::DeviationDensityMatrix equilibrium;
    nmr::DeviationDensityMatrix pseudo_pure;
    nmr::DeviationDensityMatrix synthesized;
    nmr::DeviationDensityMatrix readout;
    spectra::ReferencePhase reference;
    std::vector<spectra::Peak> carbon_peaks;
    std::vector<spectra::Peak> proton_peaks;
    std::optional<EprCase> classification;

    double pseudo_pure_fidelity;    // pure part of the prepared state vs |up up>
    double synthesis_fidelity;      // pure part after the iteration vs the named EPR state
    double state_vector_fidelity;   // same, vs grover_core's state-vector result
    double readout_error;           // normalized readout vs the expected post-readout matrix
    double pre_readout_coherence;   // largest observable element before any readout pulse
};

inline EprRun run_epr_experiment(EprCase which, const nmr::SpinSystem& sys) {
    const EprPreset& p = preset(which);
    auto program = detail::in_stage("compilation", [&] { return pulse::compile_full_iteration(which); });

    const auto eq = detail::in_stage("equilibrium", [&] { return nmr::equilibrium(sys); });
    const auto pp = detail::in_stage("pseudo-pure preparation", [&] { return nmr::prepare_pseudo_pure(sys); });
    const auto synthesized =
        detail::in_stage("grover iteration", [&] { return nmr::run_events(pp, program.sequence.events); });
    const auto readout = spectra::apply_readout(synthesized, spectra::ReadoutPulse::spin2);
    const auto ref = detail::in_stage("calibration", [&] { return spectra::calibrate_reference(sys); });
    auto carbon = spectra::extract_peaks(readout, spectra::Nucleus::carbon, ref, sys);
    auto proton = spectra::extract_peaks(readout, spectra::Nucleus::proton, ref, sys);
    const auto verdict = spectra::classify_epr(carbon, proton);

    const StateVector simulated = run_iterations(p.preparation(), 0, p.marked_set(), p.phases, 1);
    double coherence = 0.0;
    for (auto n : {spectra::Nucleus::carbon, spectra::Nucleus::proton})
        for (auto [r, c] : spectra::observable_elements(n))
            coherence = std::max(coherence, std::abs(synthesized(r, c)));

    return EprRun{
        which,
        std::move(program),
        eq,
        pp,
        synthesized,
        readout,
        ref,
        std::move(carbon),
        std::move(proton),
        verdict,
        nmr::to_pure_state_check(pp, StateVector::basis(4, 0)),
        nmr::to_pure_state_check(synthesized, p.target()),
        nmr::to_pure_state_check(synthesized, simulated),
        max_abs_diff(nmr::normalize_deviation(readout).matrix(), spectra::expected_readout(which)),
        coherence,
    };
}

}  // namespace grovgen

#endif  // GROVGEN_EXPERIMENT_HPP
