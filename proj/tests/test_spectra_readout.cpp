#include "grovgen/experiment.hpp"
#include "grovgen/spectra_readout.hpp"

#include "test_support.hpp"

using namespace grovgen;
using namespace grovgen::spectra;
using nmr::DeviationDensityMatrix;
using nmr::SpinSystem;
using testing::dense;

namespace {

Matrix4 quarter(std::initializer_list<std::initializer_list<Complex>> rows) {
    Matrix4 m = dense(rows);
    return m / 4.0;
}

// Post-readout matrices typed out independently of the library.
Matrix4 known_readout(int k) {
    switch (k) {
        case 1: return quarter({{0, -1, 1, 1}, {-1, 0, -1, -1}, {1, -1, 0, 1}, {1, -1, 1, 0}});
        case 2: return quarter({{0, -1, -1, -1}, {-1, 0, 1, 1}, {-1, 1, 0, 1}, {-1, 1, 1, 0}});
        case 3: return quarter({{0, 1, 1, -1}, {1, 0, 1, -1}, {1, 1, 0, -1}, {-1, -1, -1, 0}});
        default: return quarter({{0, 1, -1, 1}, {1, 0, -1, 1}, {-1, -1, 0, -1}, {1, 1, -1, 0}});
    }
}

const Matrix4 kSr1 = quarter({{1, 0, -2, 0}, {0, -1, 0, 0}, {-2, 0, 1, 0}, {0, 0, 0, -1}});
const Matrix4 kSr2 = quarter({{1, -2, 0, 0}, {-2, 1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}});

DeviationDensityMatrix pure_deviation(const Matrix4& readout) { return DeviationDensityMatrix(readout); }

/// Multiply every coherence above the diagonal by z and below by conj(z).
DeviationDensityMatrix rotate_coherences(const DeviationDensityMatrix& rho, Complex z) {
    Matrix4 m = rho.matrix();
    for (int r = 0; r < 4; ++r)
        for (int c = r + 1; c < 4; ++c) {
            m(r, c) *= z;
            m(c, r) *= std::conj(z);
        }
    return DeviationDensityMatrix(m);
}

}  // namespace

TEST_CASE("readout pulses", "[spectra_readout]") {
    const StateVector psi1{1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)};
    const auto rho1 = DeviationDensityMatrix::from_pure(psi1);
    CHECK(max_abs_diff(apply_readout(rho1, ReadoutPulse::spin2).matrix(), known_readout(1)) < 1e-15);

    const auto pp = DeviationDensityMatrix::from_pure(StateVector::basis(4, 0));
    CHECK(max_abs_diff(apply_readout(pp, ReadoutPulse::spin1).matrix(), kSr1) < 1e-15);
    CHECK(max_abs_diff(apply_readout(pp, ReadoutPulse::spin2).matrix(), kSr2) < 1e-15);

    CHECK(max_abs_diff(expected_reference_readout(ReadoutPulse::spin1), kSr1) == 0.0);
    CHECK(max_abs_diff(expected_reference_readout(ReadoutPulse::spin2), kSr2) == 0.0);
    for (int k = 1; k <= 4; ++k)
        CHECK(max_abs_diff(expected_readout(kAllEprCases[static_cast<std::size_t>(k - 1)]), known_readout(k)) == 0.0);
}

TEST_CASE("reference calibration", "[spectra_readout]") {
    const ReferencePhase ref = calibrate_reference(SpinSystem{});
    CHECK(std::abs(ref.carbon - 1.0) < 1e-12);
    CHECK(std::abs(ref.proton - 1.0) < 1e-12);

    SECTION("a rotated receiver phase is compensated") {
        const auto pp = nmr::prepare_pseudo_pure(SpinSystem{});
        const auto carbon = apply_readout(pp, ReadoutPulse::spin1);
        const auto proton = apply_readout(pp, ReadoutPulse::spin2);
        for (double theta : {0.3, 1.7, -2.9, kPi}) {
            const Complex z = unit_phase(theta);
            const auto c2 = rotate_coherences(carbon, z);
            const ReferencePhase r2 = calibrate_from(c2, rotate_coherences(proton, z));
            CHECK(std::abs(r2.carbon - std::conj(z)) < 1e-12);
            const Complex calibrated = r2.carbon * c2(0, 2);
            CHECK(std::abs(calibrated - carbon(0, 2)) < 1e-12);
            CHECK(calibrated.real() < 0.0);
        }
    }
    SECTION("calibrating an already calibrated reference changes nothing") {
        const auto pp = nmr::prepare_pseudo_pure(SpinSystem{});
        const auto carbon = rotate_coherences(apply_readout(pp, ReadoutPulse::spin1), unit_phase(0.8));
        const auto proton = rotate_coherences(apply_readout(pp, ReadoutPulse::spin2), unit_phase(-1.1));
        const ReferencePhase once = calibrate_from(carbon, proton);
        const ReferencePhase twice =
            calibrate_from(rotate_coherences(carbon, once.carbon), rotate_coherences(proton, once.proton));
        CHECK(std::abs(twice.carbon - 1.0) < 1e-12);
        CHECK(std::abs(twice.proton - 1.0) < 1e-12);
    }
    SECTION("a dark reference cannot calibrate") {
        const DeviationDensityMatrix diag(Matrix4(Eigen::Vector4cd(0.25, -0.25, -0.25, 0.25).asDiagonal()));
        CHECK_THROWS_AS(calibrate_from(diag, diag), CalibrationError);
    }
}

TEST_CASE("peak extraction", "[spectra_readout]") {
    const ReferencePhase unit;
    const SpinSystem sys;

    const auto carbon = extract_peaks(pure_deviation(known_readout(1)), Nucleus::carbon, unit, sys);
    REQUIRE(carbon.size() == 2);
    CHECK(carbon[0].element == Element{0, 2});
    CHECK(carbon[1].element == Element{1, 3});
    CHECK(std::abs(carbon[0].amplitude - 0.25) < 1e-15);
    CHECK(std::abs(carbon[1].amplitude + 0.25) < 1e-15);
    CHECK(carbon[0].magnitude() == carbon[1].magnitude());
    CHECK(carbon[0].phase_deg() == Catch::Approx(180.0));
    CHECK(carbon[1].phase_deg() == Catch::Approx(0.0));
    CHECK(carbon[0].frequency_offset_hz == 107.5);
    CHECK(carbon[1].frequency_offset_hz == -107.5);

    const auto proton = extract_peaks(pure_deviation(known_readout(3)), Nucleus::proton, unit, sys);
    CHECK(proton[0].element == Element{0, 1});
    CHECK(proton[1].element == Element{2, 3});
    CHECK(std::abs(proton[0].amplitude - 0.25) < 1e-15);
    CHECK(std::abs(proton[1].amplitude + 0.25) < 1e-15);

    const DeviationDensityMatrix diag(Matrix4(Eigen::Vector4cd(0.1, 0.2, -0.4, 0.1).asDiagonal()));
    for (const Peak& p : extract_peaks(diag, Nucleus::carbon, unit, sys)) {
        CHECK(p.magnitude() == 0.0);
        CHECK_FALSE(p.phase_deg());
    }
}

TEST_CASE("classification of the four EPR readouts", "[spectra_readout]") {
    const ReferencePhase unit;
    for (int k = 1; k <= 4; ++k) {
        const auto rho = pure_deviation(known_readout(k));
        const auto verdict =
            classify_epr(extract_peaks(rho, Nucleus::carbon, unit), extract_peaks(rho, Nucleus::proton, unit));
        REQUIRE(verdict);
        CHECK(*verdict == kAllEprCases[static_cast<std::size_t>(k - 1)]);
    }

    const DeviationDensityMatrix zero(Matrix4::Zero());
    CHECK_FALSE(classify_epr(extract_peaks(zero, Nucleus::carbon, unit), extract_peaks(zero, Nucleus::proton, unit)));

    // The reference readout has one peak per nucleus and matches no EPR pattern.
    const auto sr1 = pure_deviation(kSr1), sr2 = pure_deviation(kSr2);
    CHECK_FALSE(classify_epr(extract_peaks(sr1, Nucleus::carbon, unit), extract_peaks(sr2, Nucleus::proton, unit)));

    // Scale does not matter, small noise does not matter.
    const auto scaled = pure_deviation(Matrix4(known_readout(2) * 0.013));
    Matrix4 noisy = known_readout(4);
    noisy(0, 2) += 0.01;
    noisy(2, 0) += 0.01;
    CHECK(classify_epr(extract_peaks(scaled, Nucleus::carbon, unit), extract_peaks(scaled, Nucleus::proton, unit)) ==
          EprCase::psi2);
    const auto n = pure_deviation(noisy);
    CHECK(classify_epr(extract_peaks(n, Nucleus::carbon, unit), extract_peaks(n, Nucleus::proton, unit)) ==
          EprCase::psi4);
}

TEST_CASE("spectrum records", "[spectra_readout]") {
    const SpinSystem sys;
    const auto rho = pure_deviation(known_readout(1));
    const auto rec = emit_spectrum(extract_peaks(rho, Nucleus::carbon, ReferencePhase{}, sys), sys);
    CHECK(rec.nucleus == "carbon");
    REQUIRE(rec.peaks.size() == 2);
    CHECK(rec.peaks[0].freq_hz == Catch::Approx(125.76e6 + 107.5).epsilon(1e-15));
    CHECK(rec.peaks[1].freq_hz == Catch::Approx(125.76e6 - 107.5).epsilon(1e-15));
    CHECK(rec.peaks[0].magnitude == Catch::Approx(0.25));

    const DeviationDensityMatrix zero(Matrix4::Zero());
    const auto dark = emit_spectrum(extract_peaks(zero, Nucleus::proton, ReferencePhase{}, sys), sys);
    CHECK(dark.nucleus == "proton");
    for (const auto& p : dark.peaks) {
        CHECK(p.magnitude == 0.0);
        CHECK_FALSE(p.phase_deg);
    }

    const nlohmann::json j = to_json(rec);
    CHECK(j.at("nucleus") == "carbon");
    CHECK(j.at("peaks").at(0).at("element") == nlohmann::json::array({0, 2}));
    CHECK(j.at("peaks").at(0).contains("freq_hz"));
    CHECK(j.at("peaks").at(0).contains("magnitude"));
    CHECK(j.at("peaks").at(0).contains("phase_deg"));
    CHECK(to_json(dark).at("peaks").at(0).at("phase_deg").is_null());

    const std::string csv = to_csv({rec, dark});
    CHECK(csv.rfind("nucleus,freq_hz,magnitude,phase_deg,element_r,element_c\n", 0) == 0);
    CHECK_THROWS_AS(spectra_from_csv("bogus\n"), ValidationError);
    CHECK_THROWS_AS(spectra_from_csv(std::string(kCsvHeader) + "\ncarbon,1,2\n"), ValidationError);
    CHECK_THROWS_AS(spectra_from_csv(std::string(kCsvHeader) + "\ncarbon,x,2,,0,2\n"), ValidationError);
}

TEST_CASE("JSON and CSV emissions round-trip", "[spectra_readout][property]") {
    auto rng = testing::make_rng(37);
    std::normal_distribution<double> g;
    const SpinSystem sys;
    for (int trial = 0; trial < 100; ++trial) {
        Matrix4 a;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) a(r, c) = Complex(g(rng), g(rng));
        Matrix4 h = (a + a.adjoint()) / 2.0;
        h -= (h.trace() / 4.0) * Matrix4::Identity();
        if (trial % 5 == 0) h(0, 2) = h(2, 0) = 0.0;
        const DeviationDensityMatrix rho(h);
        const ReferencePhase ref{unit_phase(g(rng)), unit_phase(g(rng))};
        const std::vector<SpectrumRecord> recs{emit_spectrum(extract_peaks(rho, Nucleus::carbon, ref, sys), sys),
                                               emit_spectrum(extract_peaks(rho, Nucleus::proton, ref, sys), sys)};
        for (const auto& rec : recs) CHECK(spectrum_from_json(nlohmann::json::parse(to_json(rec).dump())) == rec);
        CHECK(spectra_from_csv(to_csv(recs)) == recs);
    }
}

TEST_CASE("simulated pipelines reproduce the known readouts", "[spectra_readout][property]") {
    const SpinSystem sys;
    for (int k = 1; k <= 4; ++k) {
        const EprCase c = kAllEprCases[static_cast<std::size_t>(k - 1)];
        const EprRun run = run_epr_experiment(c, sys);
        CHECK(max_abs_diff(nmr::normalize_deviation(run.readout).matrix(), known_readout(k)) < 1e-9);
        REQUIRE(run.classification);
        CHECK(*run.classification == c);
        for (auto n : {Nucleus::carbon, Nucleus::proton})
            for (auto [r, col] : observable_elements(n)) CHECK(std::abs(run.synthesized(r, col)) < 1e-12);
    }

    const ReferenceRun ref = run_reference(sys);
    CHECK(max_abs_diff(nmr::normalize_deviation(ref.carbon_readout).matrix(), kSr1) < 1e-9);
    CHECK(max_abs_diff(nmr::normalize_deviation(ref.proton_readout).matrix(), kSr2) < 1e-9);
    CHECK(ref.carbon_peaks[0].phase_deg() == Catch::Approx(0.0).margin(1e-9));
    CHECK(ref.proton_peaks[0].phase_deg() == Catch::Approx(0.0).margin(1e-9));
    CHECK(ref.carbon_peaks[1].magnitude() < 1e-12);
    CHECK(ref.proton_peaks[1].magnitude() < 1e-12);
}

TEST_CASE("calibrated peak phases ignore a common receiver phase", "[spectra_readout][property]") {
    const SpinSystem sys;
    const auto pp = nmr::prepare_pseudo_pure(sys);
    const auto carbon_ref = apply_readout(pp, ReadoutPulse::spin1);
    const auto proton_ref = apply_readout(pp, ReadoutPulse::spin2);
    const ReferencePhase base = calibrate_from(carbon_ref, proton_ref);

    auto rng = testing::make_rng(41);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (EprCase c : kAllEprCases) {
        const auto readout = run_epr_experiment(c, sys).readout;
        const auto before = extract_peaks(readout, Nucleus::carbon, base, sys);
        for (int trial = 0; trial < 20; ++trial) {
            const Complex z = unit_phase(angle(rng));
            const ReferencePhase shifted =
                calibrate_from(rotate_coherences(carbon_ref, z), rotate_coherences(proton_ref, z));
            const auto after = extract_peaks(rotate_coherences(readout, z), Nucleus::carbon, shifted, sys);
            for (std::size_t k = 0; k < before.size(); ++k) {
                REQUIRE(before[k].phase_deg());
                REQUIRE(after[k].phase_deg());
                const double d = std::remainder(*after[k].phase_deg() - *before[k].phase_deg(), 360.0);
                CHECK(std::abs(d) < 1e-9);
            }
        }
    }
}
