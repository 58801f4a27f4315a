#ifndef GROVGEN_SPECTRA_READOUT_HPP
#define GROVGEN_SPECTRA_READOUT_HPP

#include "grovgen/errors.hpp"
#include "grovgen/linalg.hpp"
#include "grovgen/nmr_machine.hpp"
#include "grovgen/presets.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Predicted stick spectra. A selective [pi/2]_y readout pulse turns the
// synthesized state into single-quantum coherences; the carbon spectrum
// shows elements (0,2) and (1,3), the proton spectrum (0,1) and (2,3).
// Absolute receiver phase is meaningless, so every spectrum is referenced
// to the pseudo-pure |up up> run, where the lone observable element is real
// and negative and is displayed as a positive absorption peak.

namespace grovgen::spectra {

using nmr::DeviationDensityMatrix;
using nmr::SpinSystem;

enum class Nucleus { carbon, proton };
enum class ReadoutPulse { spin1, spin2 };  // [pi/2]_y on spin 1 (13C) or spin 2 (1H)

inline std::string_view to_string(Nucleus n) { return n == Nucleus::carbon ? "carbon" : "proton"; }

inline DeviationDensityMatrix apply_readout(const DeviationDensityMatrix& rho, ReadoutPulse pulse) {
    const nmr::Spins spins = pulse == ReadoutPulse::spin1 ? nmr::Spins::first : nmr::Spins::second;
    return nmr::apply_rf(rho, nmr::RfRotation{spins, nmr::RfAxis::plus_y, kPi / 2});
}

using Element = std::pair<int, int>;

/// Observable elements, upper triangle; the first sits at nu + J/2.
inline std::array<Element, 2> observable_elements(Nucleus n) {
    if (n == Nucleus::carbon) return {Element{0, 2}, Element{1, 3}};
    return {Element{0, 1}, Element{2, 3}};
}

struct ReferencePhase {
    Complex carbon{1.0, 0.0};
    Complex proton{1.0, 0.0};

    Complex of(Nucleus n) const { return n == Nucleus::carbon ? carbon : proton; }
};

inline constexpr double kPeakFloor = 1e-12;

namespace detail {

/// Unit scalar c with c * element real and negative.
inline Complex lock_phase(Complex element, Nucleus n) {
    const double mag = std::abs(element);
    if (!(mag > kPeakFloor))
        throw CalibrationError("reference " + std::string(to_string(n)) + " signal vanishes; cannot calibrate");
    return -mag / element;
}

}  // namespace detail

/// Calibrate from the two reference readouts: [pi/2]_y^1 (carbon) and [pi/2]_y^2 (proton)
/// applied to the pseudo-pure state.
inline ReferencePhase calibrate_from(const DeviationDensityMatrix& carbon_reference,
                                     const DeviationDensityMatrix& proton_reference) {
    return {detail::lock_phase(carbon_reference(0, 2), Nucleus::carbon),
            detail::lock_phase(proton_reference(0, 1), Nucleus::proton)};
}

inline ReferencePhase calibrate_reference(const SpinSystem& sys) {
    const DeviationDensityMatrix pp = nmr::prepare_pseudo_pure(sys);
    return calibrate_from(apply_readout(pp, ReadoutPulse::spin1), apply_readout(pp, ReadoutPulse::spin2));
}

struct Peak {
    Nucleus nucleus;
    Element element;
    double frequency_offset_hz;
    /// Calibrated matrix element.
    Complex amplitude;

    double magnitude() const { return std::abs(amplitude); }

    /// Spectral phase in degrees, 0 = positive absorption (negative element). Unset for empty peaks.
    std::optional<double> phase_deg() const {
        if (!(magnitude() > kPeakFloor)) return std::nullopt;
        Complex signal = -amplitude;
        // Snap numerical dust so a real signal reads exactly 0 or 180.
        if (std::abs(signal.imag()) < 1e-12 * std::abs(signal)) signal.imag(0.0);
        if (std::abs(signal.real()) < 1e-12 * std::abs(signal)) signal.real(0.0);
        return std::arg(signal) * 180.0 / kPi;
    }
};

inline std::vector<Peak> extract_peaks(const DeviationDensityMatrix& rho_r, Nucleus nucleus,
                                       const ReferencePhase& ref, const SpinSystem& sys = {}) {
    const auto elements = observable_elements(nucleus);
    const Complex phase = ref.of(nucleus);
    std::vector<Peak> peaks;
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto [r, c] = elements[k];
        const double offset = (k == 0 ? 0.5 : -0.5) * sys.j_hz;
        peaks.push_back({nucleus, elements[k], offset, phase * rho_r(r, c)});
    }
    return peaks;
}

/// Post-readout matrices for the four EPR states.
inline Matrix4 expected_readout(EprCase c) {
    Matrix4 m;
    switch (c) {
        case EprCase::psi1: m << 0, -1, 1, 1, -1, 0, -1, -1, 1, -1, 0, 1, 1, -1, 1, 0; break;
        case EprCase::psi2: m << 0, -1, -1, -1, -1, 0, 1, 1, -1, 1, 0, 1, -1, 1, 1, 0; break;
        case EprCase::psi3: m << 0, 1, 1, -1, 1, 0, 1, -1, 1, 1, 0, -1, -1, -1, -1, 0; break;
        case EprCase::psi4: m << 0, 1, -1, 1, 1, 0, -1, 1, -1, -1, 0, -1, 1, 1, -1, 0; break;
    }
    return m / 4.0;
}

/// Pseudo-pure state after [pi/2]_y^1 (spin1) or [pi/2]_y^2 (spin2).
inline Matrix4 expected_reference_readout(ReadoutPulse pulse) {
    Matrix4 m;
    if (pulse == ReadoutPulse::spin1)
        m << 1, 0, -2, 0, 0, -1, 0, 0, -2, 0, 1, 0, 0, 0, 0, -1;
    else
        m << 1, -2, 0, 0, -2, 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, -1;
    return m / 4.0;
}

inline constexpr double kClassifyTolerance = 0.1;

namespace detail {

inline std::array<Complex, 4> quadruple(const Matrix4& m) {
    return {m(0, 2), m(1, 3), m(0, 1), m(2, 3)};
}

inline bool normalize(std::array<Complex, 4>& q) {
    double peak = 0.0;
    for (const Complex& z : q) peak = std::max(peak, std::abs(z));
    if (!(peak > kPeakFloor)) return false;
    for (Complex& z : q) z /= peak;
    return true;
}

}  // namespace detail

/// Which EPR state produced these calibrated peaks, if any.
inline std::optional<EprCase> classify_epr(const std::vector<Peak>& carbon_peaks, const std::vector<Peak>& proton_peaks) {
    std::array<Complex, 4> observed{};
    auto slot = [](const Peak& p) -> int {
        const auto [r, c] = p.element;
        if (r == 0 && c == 2) return 0;
        if (r == 1 && c == 3) return 1;
        if (r == 0 && c == 1) return 2;
        if (r == 2 && c == 3) return 3;
        return -1;
    };
    for (const auto* peaks : {&carbon_peaks, &proton_peaks})
        for (const Peak& p : *peaks)
            if (const int s = slot(p); s >= 0) observed[static_cast<std::size_t>(s)] = p.amplitude;
    if (!detail::normalize(observed)) return std::nullopt;

    for (EprCase c : kAllEprCases) {
        auto pattern = detail::quadruple(expected_readout(c));
        detail::normalize(pattern);
        double worst = 0.0;
        for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(observed[i] - pattern[i]));
        if (worst < kClassifyTolerance) return c;
    }
    return std::nullopt;
}

// --- spectrum records -----------------------------------------------------

struct SpectrumPeak {
    double freq_hz = 0.0;
    double magnitude = 0.0;
    std::optional<double> phase_deg;
    Element element{0, 0};

    friend bool operator==(const SpectrumPeak&, const SpectrumPeak&) = default;
};

struct SpectrumRecord {
    std::string nucleus;
    std::vector<SpectrumPeak> peaks;

    friend bool operator==(const SpectrumRecord&, const SpectrumRecord&) = default;
};

inline SpectrumRecord emit_spectrum(const std::vector<Peak>& peaks, const SpinSystem& sys) {
    sys.validate();
    SpectrumRecord rec;
    if (!peaks.empty()) rec.nucleus = std::string(to_string(peaks.front().nucleus));
    for (const Peak& p : peaks) {
        const double base_hz = (p.nucleus == Nucleus::carbon ? sys.nu1_mhz : sys.nu2_mhz) * 1e6;
        rec.peaks.push_back({base_hz + p.frequency_offset_hz, p.magnitude(), p.phase_deg(), p.element});
    }
    return rec;
}

inline nlohmann::json to_json(const SpectrumRecord& rec) {
    nlohmann::json peaks = nlohmann::json::array();
    for (const SpectrumPeak& p : rec.peaks) {
        peaks.push_back({{"freq_hz", p.freq_hz},
                         {"magnitude", p.magnitude},
                         {"phase_deg", p.phase_deg ? nlohmann::json(*p.phase_deg) : nlohmann::json(nullptr)},
                         {"element", {p.element.first, p.element.second}}});
    }
    return {{"nucleus", rec.nucleus}, {"peaks", std::move(peaks)}};
}

inline SpectrumRecord spectrum_from_json(const nlohmann::json& j) {
    SpectrumRecord rec;
    rec.nucleus = j.at("nucleus").get<std::string>();
    for (const auto& p : j.at("peaks")) {
        SpectrumPeak peak;
        peak.freq_hz = p.at("freq_hz").get<double>();
        peak.magnitude = p.at("magnitude").get<double>();
        if (!p.at("phase_deg").is_null()) peak.phase_deg = p.at("phase_deg").get<double>();
        peak.element = {p.at("element").at(0).get<int>(), p.at("element").at(1).get<int>()};
        rec.peaks.push_back(peak);
    }
    return rec;
}

inline constexpr std::string_view kCsvHeader = "nucleus,freq_hz,magnitude,phase_deg,element_r,element_c";

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// One peak per row; an empty phase_deg cell means the peak has no phase.
inline std::string to_csv(const std::vector<SpectrumRecord>& records) {
    std::string out(kCsvHeader);
    out += "\n";
    for (const SpectrumRecord& rec : records)
        for (const SpectrumPeak& p : rec.peaks) {
            out += rec.nucleus + "," + detail::format_double(p.freq_hz) + "," + detail::format_double(p.magnitude) +
                   "," + (p.phase_deg ? detail::format_double(*p.phase_deg) : std::string()) + "," +
                   std::to_string(p.element.first) + "," + std::to_string(p.element.second) + "\n";
        }
    return out;
}

/// Rows are grouped into records by consecutive nucleus.
inline std::vector<SpectrumRecord> spectra_from_csv(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ValidationError("spectrum CSV: missing header");
    std::vector<SpectrumRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (std::size_t comma; (comma = line.find(',', start)) != std::string::npos; start = comma + 1)
            cells.push_back(line.substr(start, comma - start));
        cells.push_back(line.substr(start));
        if (cells.size() != 6) throw ValidationError("spectrum CSV: expected 6 cells in '" + line + "'");
        SpectrumPeak p;
        try {
            p.freq_hz = std::stod(cells[1]);
            p.magnitude = std::stod(cells[2]);
            if (!cells[3].empty()) p.phase_deg = std::stod(cells[3]);
            p.element = {std::stoi(cells[4]), std::stoi(cells[5])};
        } catch (const std::logic_error&) {
            throw ValidationError("spectrum CSV: bad number in '" + line + "'");
        }
        if (records.empty() || records.back().nucleus != cells[0]) records.push_back({cells[0], {}});
        records.back().peaks.push_back(p);
    }
    return records;
}

}  // namespace grovgen::spectra

#endif  // GROVGEN_SPECTRA_READOUT_HPP
