#ifndef GROVGEN_CLI_HPP
#define GROVGEN_CLI_HPP

#include "grovgen/experiment.hpp"
#include "grovgen/grover_core.hpp"
#include "grovgen/nmr_machine.hpp"
#include "grovgen/presets.hpp"
#include "grovgen/pulse_compiler.hpp"
#include "grovgen/random_unitary.hpp"
#include "grovgen/recursion_solver.hpp"
#include "grovgen/spectra_readout.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

// Command layer behind tools/grovgen: config resolution plus the run,
// solve, nmr and compile subcommands. Every command returns its report as
// a string so it can be tested without a process boundary.

namespace grovgen::cli {

using nlohmann::json;

enum ExitCode : int { kSuccess = 0, kVerificationFailure = 1, kUsageError = 2 };

/// Bad flags, bad config, or a target the tool does not know.
class UsageError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

enum class OutputFormat { text, json, csv };

inline OutputFormat parse_format(const std::string& s) {
    if (s == "text") return OutputFormat::text;
    if (s == "json") return OutputFormat::json;
    if (s == "csv") return OutputFormat::csv;
    throw UsageError("unknown output format '" + s + "' (expected json, csv or text)");
}

struct RotationPrep {
    spin::Axis axis1 = spin::Axis::y;
    double angle1 = kPi / 2;
    spin::Axis axis2 = spin::Axis::y;
    double angle2 = kPi / 2;
};
struct WalshHadamardPrep {};
struct IdentityPrep {};
struct RandomPrep {
    std::uint64_t seed = 0;
};
using PrepSpec = std::variant<RotationPrep, WalshHadamardPrep, IdentityPrep, RandomPrep>;

struct ExperimentConfig {
    std::size_t dim = 4;
    std::size_t source_index = 0;
    std::vector<std::size_t> marked{0, 3};
    PhaseParams phases{-kPi / 2, -kPi / 2};
    PrepSpec prep = RotationPrep{};
    /// Unset means "auto": the first iteration at which unmarked amplitudes vanish.
    std::optional<int> iterations = 1;
    int n_max = 12;
    nmr::SpinSystem spin_system;
    OutputFormat output = OutputFormat::text;
    std::optional<std::string> out_path;

    /// psi1..psi4, "grover4" or "reference".
    std::optional<std::string> named_case;
    std::optional<std::string> compile_target;
};

// --- config resolution ----------------------------------------------------

inline void apply_case(ExperimentConfig& cfg, const std::string& name) {
    if (const auto c = parse_epr_case(name)) {
        const EprPreset& p = preset(*c);
        cfg.dim = 4;
        cfg.source_index = 0;
        cfg.marked = {p.marked[0], p.marked[1]};
        cfg.phases = p.phases;
        cfg.prep = RotationPrep{spin::Axis::y, p.spin1_angle, spin::Axis::y, p.spin2_angle};
        cfg.iterations = 1;
        cfg.named_case = std::string(p.name);
    } else if (name == "grover4") {
        // Textbook search: Walsh-Hadamard, beta = gamma = pi, one marked item in four.
        cfg.dim = 4;
        cfg.source_index = 0;
        cfg.marked = {2};
        cfg.phases = {kPi, kPi};
        cfg.prep = WalshHadamardPrep{};
        cfg.iterations = 1;
        cfg.named_case = name;
    } else if (name == "reference") {
        cfg.named_case = name;
    } else {
        throw UsageError("unknown case '" + name + "' (expected psi1, psi2, psi3, psi4, grover4 or reference)");
    }
}

namespace detail {

inline spin::Axis parse_axis(const std::string& s) {
    if (s == "x") return spin::Axis::x;
    if (s == "y") return spin::Axis::y;
    throw UsageError("rotation axis must be x or y, got '" + s + "'");
}

inline PrepSpec parse_prep(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "walsh_hadamard") return WalshHadamardPrep{};
        if (s == "identity") return IdentityPrep{};
        if (s == "random") return RandomPrep{seed_from_env(0)};
        throw UsageError("unknown prep '" + s + "'");
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "rotation") {
        const auto axes = j.at("axes").get<std::vector<std::string>>();
        const auto angles = j.at("angles").get<std::vector<double>>();
        if (axes.size() != 2 || angles.size() != 2) throw UsageError("rotation prep needs two axes and two angles");
        return RotationPrep{parse_axis(axes[0]), angles[0], parse_axis(axes[1]), angles[1]};
    }
    if (kind == "walsh_hadamard") return WalshHadamardPrep{};
    if (kind == "identity") return IdentityPrep{};
    if (kind == "random") return RandomPrep{j.contains("seed") ? j.at("seed").get<std::uint64_t>() : seed_from_env(0)};
    throw UsageError("unknown prep kind '" + kind + "'");
}

}  // namespace detail

/// Merge a JSON config into cfg. A "case" key expands first; explicit keys override it.
inline void apply_config_json(ExperimentConfig& cfg, const json& j) {
    try {
        if (!j.is_object()) throw UsageError("config must be a JSON object");
        if (j.contains("case")) apply_case(cfg, j.at("case").get<std::string>());
        if (j.contains("dim")) cfg.dim = j.at("dim").get<std::size_t>();
        if (j.contains("source_index")) cfg.source_index = j.at("source_index").get<std::size_t>();
        if (j.contains("marked")) cfg.marked = j.at("marked").get<std::vector<std::size_t>>();
        if (j.contains("beta")) cfg.phases.beta = j.at("beta").get<double>();
        if (j.contains("gamma")) cfg.phases.gamma = j.at("gamma").get<double>();
        if (j.contains("prep")) cfg.prep = detail::parse_prep(j.at("prep"));
        if (j.contains("iterations")) {
            const auto& it = j.at("iterations");
            if (it.is_string() && it.get<std::string>() == "auto")
                cfg.iterations.reset();
            else
                cfg.iterations = it.get<int>();
        }
        if (j.contains("n_max")) cfg.n_max = j.at("n_max").get<int>();
        if (j.contains("spin_system")) {
            const auto& s = j.at("spin_system");
            if (s.contains("nu1_mhz")) cfg.spin_system.nu1_mhz = s.at("nu1_mhz").get<double>();
            if (s.contains("nu2_mhz")) cfg.spin_system.nu2_mhz = s.at("nu2_mhz").get<double>();
            if (s.contains("j_hz")) cfg.spin_system.j_hz = s.at("j_hz").get<double>();
            if (s.contains("gamma_ratio")) cfg.spin_system.gamma_ratio = s.at("gamma_ratio").get<double>();
        }
        if (j.contains("output")) cfg.output = parse_format(j.at("output").get<std::string>());
        if (j.contains("target")) cfg.compile_target = j.at("target").get<std::string>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config file '" + path + "': " + e.what());
    }
}

/// Command-line overrides; flags win over the config file.
struct Flags {
    std::optional<std::string> config_path;
    std::optional<std::string> case_name;
    std::optional<int> n;
    std::optional<std::string> out_path;
    std::optional<std::string> format;
    std::optional<std::string> target;
};

enum class Command { run, solve, nmr, compile };

inline ExperimentConfig resolve_config(Command cmd, const Flags& flags) {
    ExperimentConfig cfg;
    if (flags.config_path) apply_config_json(cfg, read_json_file(*flags.config_path));
    if (flags.case_name) apply_case(cfg, *flags.case_name);
    if (flags.n) {
        if (cmd == Command::solve)
            cfg.n_max = *flags.n;
        else
            cfg.iterations = *flags.n;
    }
    if (flags.format) cfg.output = parse_format(*flags.format);
    if (flags.out_path) cfg.out_path = flags.out_path;
    if (flags.target) cfg.compile_target = flags.target;
    return cfg;
}

inline UnitaryMatrix build_preparation(const ExperimentConfig& cfg) {
    return std::visit(
        [&cfg](const auto& p) -> UnitaryMatrix {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, RotationPrep>) {
                if (cfg.dim != 4) throw UsageError("rotation prep is defined for the two-spin register (dim 4)");
                return two_spin_rotation(p.axis1, p.angle1, p.axis2, p.angle2);
            } else if constexpr (std::is_same_v<P, WalshHadamardPrep>) {
                if (!is_power_of_two(cfg.dim)) throw UsageError("Walsh-Hadamard needs a power-of-two dim");
                std::size_t q = 0;
                while ((std::size_t{1} << q) < cfg.dim) ++q;
                return walsh_hadamard(q);
            } else if constexpr (std::is_same_v<P, IdentityPrep>) {
                return UnitaryMatrix::identity(cfg.dim);
            } else {
                std::mt19937_64 rng(p.seed);
                return random_rotation_unitary(cfg.dim, rng);
            }
        },
        cfg.prep);
}

inline void validate(const ExperimentConfig& cfg) {
    if (!is_power_of_two(cfg.dim) || cfg.dim > 1024) throw UsageError("dim must be a power of two <= 1024");
    if (cfg.source_index >= cfg.dim) throw UsageError("source_index out of range");
    if (!std::isfinite(cfg.phases.beta) || !std::isfinite(cfg.phases.gamma))
        throw UsageError("beta and gamma must be finite");
    if (cfg.iterations && *cfg.iterations < 0) throw UsageError("iterations must be non-negative");
    if (cfg.n_max < 0) throw UsageError("n_max must be non-negative");
    try {
        MarkedSet(cfg.dim, cfg.marked);
        cfg.spin_system.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

// --- formatting -------------------------------------------------------------

namespace detail {

inline double clean(double v) { return std::abs(v) < 1e-15 ? 0.0 : v; }

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", clean(v));
    return buf;
}

inline std::string num(Complex z) {
    const double re = clean(z.real());
    const double im = clean(z.imag());
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.12g%+.12gi", re, im);
    return buf;
}

inline json cjson(Complex z) { return json::array({clean(z.real()), clean(z.imag())}); }

inline json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(cjson(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string matrix_text(const Matrix& m) {
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out += "  [";
        for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? ", " : "") + num(m(r, c));
        out += "]\n";
    }
    return out;
}

}  // namespace detail

struct CommandResult {
    int exit_code = kSuccess;
    std::string report;
    /// Extra files the command wants written (path, contents).
    std::vector<std::pair<std::string, std::string>> files;
};

inline std::optional<StateVector> named_target(const ExperimentConfig& cfg) {
    if (!cfg.named_case) return std::nullopt;
    if (const auto c = parse_epr_case(*cfg.named_case)) return preset(*c).target();
    if (*cfg.named_case == "grover4") return StateVector::basis(4, 2);
    return std::nullopt;
}

inline constexpr double kRunFidelityTolerance = 1e-10;

// --- run --------------------------------------------------------------------

inline CommandResult cmd_run(const ExperimentConfig& cfg) {
    validate(cfg);
    const UnitaryMatrix u = build_preparation(cfg);
    const MarkedSet marked(cfg.dim, cfg.marked);

    int n = 0;
    if (cfg.iterations) {
        n = *cfg.iterations;
    } else {
        const auto hit = find_target_iteration(u, cfg.source_index, marked, cfg.phases, cfg.n_max);
        if (!hit) return {kVerificationFailure, "no iteration in [1, " + std::to_string(cfg.n_max) +
                                                    "] drives the unmarked amplitudes to zero\n", {}};
        n = hit->iteration;
    }
    const StateVector state = run_iterations(u, cfg.source_index, marked, cfg.phases, n);
    const double p = success_probability(state, marked);
    const auto target = named_target(cfg);
    const double f = target ? fidelity(*target, state) : 0.0;
    const bool ok = !target || f >= 1.0 - kRunFidelityTolerance;

    CommandResult res;
    res.exit_code = ok ? kSuccess : kVerificationFailure;
    switch (cfg.output) {
        case OutputFormat::json: {
            json amps = json::array();
            for (std::size_t i = 0; i < state.dim(); ++i) amps.push_back(detail::cjson(state[i]));
            json j{{"command", "run"},
                   {"case", cfg.named_case ? json(*cfg.named_case) : json(nullptr)},
                   {"dim", cfg.dim},
                   {"iterations", n},
                   {"amplitudes", amps},
                   {"success_probability", detail::clean(p)},
                   {"fidelity", target ? json(f) : json(nullptr)},
                   {"verified", ok}};
            res.report = j.dump(2) + "\n";
            break;
        }
        case OutputFormat::csv:
            res.report = "index,re,im,probability\n";
            for (std::size_t i = 0; i < state.dim(); ++i)
                res.report += std::to_string(i) + "," + detail::num(state[i].real()) + "," +
                              detail::num(state[i].imag()) + "," + detail::num(std::norm(state[i])) + "\n";
            break;
        case OutputFormat::text:
            res.report = "generalized Grover run: dim " + std::to_string(cfg.dim) + ", " + std::to_string(n) +
                         " iteration(s)\n";
            for (std::size_t i = 0; i < state.dim(); ++i)
                res.report += "  |" + std::to_string(i) + ">  " + detail::num(state[i]) + (marked.contains(i) ? "  *" : "") + "\n";
            res.report += "success probability: " + detail::num(p) + "\n";
            if (target)
                res.report += "fidelity to " + *cfg.named_case + ": " + detail::num(f) + (ok ? " (ok)" : " (FAILED)") + "\n";
            break;
    }
    return res;
}

// --- solve ------------------------------------------------------------------

inline constexpr double kSolveAgreementTolerance = 1e-9;

inline CommandResult cmd_solve(const ExperimentConfig& cfg) {
    validate(cfg);
    const UnitaryMatrix u = build_preparation(cfg);
    const MarkedSet marked(cfg.dim, cfg.marked);
    grovgen::detail::require_nonzero_overlaps(u, cfg.source_index);
    const Weights w = weights(u, cfg.source_index, marked);
    const TransferMatrix tm = transfer_matrix(cfg.phases, w);

    struct Row {
        int n;
        Averages avg;
        double mismatch;
    };
    std::vector<Row> rows;
    double worst = 0.0;
    for (int n = 0; n <= cfg.n_max; ++n) {
        const AmplitudeTrajectory t = amplitudes_at(u, cfg.source_index, marked, cfg.phases, n);
        const StateVector direct = run_iterations(u, cfg.source_index, marked, cfg.phases, n);
        const double mismatch = max_abs_diff(t.amplitudes, direct.amps());
        worst = std::max(worst, mismatch);
        rows.push_back({n, {t.kbar, t.lbar}, mismatch});
    }
    const auto hit = find_target_iteration(u, cfg.source_index, marked, cfg.phases, std::max(cfg.n_max, 1));

    // A^{n+3} = c A^n for every n iff A^3 = c I.
    const Matrix2 cube = tm.power(3);
    const Complex factor = cube(0, 0);
    const bool period3 = std::abs(std::abs(factor) - 1.0) < 1e-10 &&
                         max_abs_diff(cube, factor * Matrix2::Identity()) < 1e-10;
    const bool ok = worst <= kSolveAgreementTolerance;

    CommandResult res;
    res.exit_code = ok ? kSuccess : kVerificationFailure;
    switch (cfg.output) {
        case OutputFormat::json: {
            json table = json::array();
            for (const Row& r : rows)
                table.push_back({{"n", r.n}, {"kbar", detail::cjson(r.avg.kbar)}, {"lbar", detail::cjson(r.avg.lbar)}});
            json target = nullptr;
            if (hit) {
                json amps = json::array();
                for (std::size_t i = 0; i < hit->target.dim(); ++i) amps.push_back(detail::cjson(hit->target[i]));
                target = {{"n0", hit->iteration}, {"state", amps}};
            }
            json j{{"command", "solve"},
                   {"case", cfg.named_case ? json(*cfg.named_case) : json(nullptr)},
                   {"weights", {{"marked", w.marked}, {"unmarked", w.unmarked}}},
                   {"transfer_matrix", detail::matrix_json(tm.matrix())},
                   {"eigenvalues", {detail::cjson(tm.lambda_plus()), detail::cjson(tm.lambda_minus())}},
                   {"table", table},
                   {"target", target},
                   {"period3", period3},
                   {"period3_factor", period3 ? detail::cjson(factor) : json(nullptr)},
                   {"max_state_vector_mismatch", worst},
                   {"verified", ok}};
            res.report = j.dump(2) + "\n";
            break;
        }
        case OutputFormat::csv:
            res.report = "n,kbar_re,kbar_im,lbar_re,lbar_im\n";
            for (const Row& r : rows)
                res.report += std::to_string(r.n) + "," + detail::num(r.avg.kbar.real()) + "," +
                              detail::num(r.avg.kbar.imag()) + "," + detail::num(r.avg.lbar.real()) + "," +
                              detail::num(r.avg.lbar.imag()) + "\n";
            break;
        case OutputFormat::text: {
            std::string& s = res.report;
            s += "weights: W_k = " + detail::num(w.marked) + ", W_l = " + detail::num(w.unmarked) + "\n";
            s += "transfer matrix A:\n" + detail::matrix_text(tm.matrix());
            s += "eigenvalues: " + detail::num(tm.lambda_plus()) + " (arg " +
                 detail::num(std::arg(tm.lambda_plus()) / kPi) + " pi), " + detail::num(tm.lambda_minus()) + " (arg " +
                 detail::num(std::arg(tm.lambda_minus()) / kPi) + " pi)\n";
            s += "   n  kbar'(n)                          lbar'(n)\n";
            for (const Row& r : rows) {
                char line[160];
                std::snprintf(line, sizeof line, "%4d  %-32s  %s\n", r.n, detail::num(r.avg.kbar).c_str(),
                              detail::num(r.avg.lbar).c_str());
                s += line;
            }
            if (hit) {
                s += "unmarked amplitudes vanish at n0 = " + std::to_string(hit->iteration) + "; target state:\n";
                for (std::size_t i = 0; i < hit->target.dim(); ++i)
                    if (std::abs(hit->target[i]) > 1e-12)
                        s += "  |" + std::to_string(i) + ">  " + detail::num(hit->target[i]) + "\n";
            } else {
                s += "unmarked amplitudes never vanish for n <= " + std::to_string(std::max(cfg.n_max, 1)) + "\n";
            }
            if (period3) s += "period 3: A^(n+3) = (" + detail::num(factor) + ") A^n\n";
            s += "state-vector agreement: max |diff| = " + detail::num(worst) + (ok ? " (ok)" : " (FAILED)") + "\n";
            break;
        }
    }
    return res;
}

// --- nmr --------------------------------------------------------------------

inline constexpr double kNmrFidelityTolerance = 1e-8;
inline constexpr double kNmrReadoutTolerance = 1e-9;

namespace detail {

inline json peaks_json(const std::vector<spectra::Peak>& peaks) {
    json out = json::array();
    for (const auto& p : peaks)
        out.push_back({{"element", {p.element.first, p.element.second}},
                       {"amplitude", cjson(p.amplitude)},
                       {"phase_deg", p.phase_deg() ? json(*p.phase_deg()) : json(nullptr)}});
    return out;
}

inline std::string peaks_text(const std::vector<spectra::Peak>& peaks) {
    std::string s;
    for (const auto& p : peaks) {
        s += "    (" + std::to_string(p.element.first) + "," + std::to_string(p.element.second) + ") at " +
             (p.frequency_offset_hz >= 0 ? "+" : "") + num(p.frequency_offset_hz) + " Hz: " + num(p.amplitude);
        s += p.phase_deg() ? "  phase " + num(*p.phase_deg()) + " deg\n" : "  (no signal)\n";
    }
    return s;
}

inline std::string spectra_file(const ExperimentConfig& cfg, const std::vector<spectra::SpectrumRecord>& recs) {
    if (cfg.output == OutputFormat::csv) return spectra::to_csv(recs);
    json arr = json::array();
    for (const auto& r : recs) arr.push_back(spectra::to_json(r));
    return arr.dump(2) + "\n";
}

}  // namespace detail

inline CommandResult cmd_nmr(const ExperimentConfig& cfg) {
    if (!cfg.named_case)
        throw UsageError("nmr needs a named case (--case psi1|psi2|psi3|psi4|reference)");
    cfg.spin_system.validate();
    const nmr::SpinSystem& sys = cfg.spin_system;
    CommandResult res;

    if (*cfg.named_case == "reference") {
        const ReferenceRun ref = run_reference(sys);
        const auto carbon = spectra::emit_spectrum(ref.carbon_peaks, sys);
        const auto proton = spectra::emit_spectrum(ref.proton_peaks, sys);
        auto lit = [](const std::vector<spectra::Peak>& ps) {
            int k = 0;
            for (const auto& p : ps) k += p.magnitude() > spectra::kPeakFloor;
            return k;
        };
        const bool ok = ref.carbon_readout_error < kNmrReadoutTolerance &&
                        ref.proton_readout_error < kNmrReadoutTolerance && lit(ref.carbon_peaks) == 1 &&
                        lit(ref.proton_peaks) == 1;
        res.exit_code = ok ? kSuccess : kVerificationFailure;
        if (cfg.output == OutputFormat::json) {
            json j{{"command", "nmr"},
                   {"case", "reference"},
                   {"carbon_readout_error", ref.carbon_readout_error},
                   {"proton_readout_error", ref.proton_readout_error},
                   {"carbon_phase", detail::cjson(ref.reference.carbon)},
                   {"proton_phase", detail::cjson(ref.reference.proton)},
                   {"spectra", {spectra::to_json(carbon), spectra::to_json(proton)}},
                   {"verified", ok}};
            res.report = j.dump(2) + "\n";
        } else if (cfg.output == OutputFormat::csv) {
            res.report = spectra::to_csv({carbon, proton});
        } else {
            res.report = "reference run (pseudo-pure |up up>)\n";
            res.report += "  carbon readout [pi/2]_y^1 error vs expected matrix: " + detail::num(ref.carbon_readout_error) + "\n";
            res.report += "  proton readout [pi/2]_y^2 error vs expected matrix: " + detail::num(ref.proton_readout_error) + "\n";
            res.report += "  carbon peaks:\n" + detail::peaks_text(ref.carbon_peaks);
            res.report += "  proton peaks:\n" + detail::peaks_text(ref.proton_peaks);
            res.report += std::string("verdict: ") + (ok ? "ok" : "FAILED") + "\n";
        }
        if (cfg.out_path) res.files.emplace_back(*cfg.out_path, detail::spectra_file(cfg, {carbon, proton}));
        return res;
    }

    const auto which = parse_epr_case(*cfg.named_case);
    if (!which) throw UsageError("nmr supports psi1..psi4 and reference, not '" + *cfg.named_case + "'");

    const EprRun run = run_epr_experiment(*which, sys);
    const auto carbon = spectra::emit_spectrum(run.carbon_peaks, sys);
    const auto proton = spectra::emit_spectrum(run.proton_peaks, sys);
    const std::string verdict = run.classification ? std::string(to_string(*run.classification)) : "unknown";
    const bool ok = run.classification == which && run.pseudo_pure_fidelity > 1.0 - kNmrFidelityTolerance &&
                    run.synthesis_fidelity > 1.0 - kNmrFidelityTolerance &&
                    run.state_vector_fidelity > 1.0 - kNmrFidelityTolerance &&
                    run.readout_error < kNmrReadoutTolerance;
    res.exit_code = ok ? kSuccess : kVerificationFailure;

    switch (cfg.output) {
        case OutputFormat::json: {
            json j{{"command", "nmr"},
                   {"case", std::string(to_string(*which))},
                   {"classification", verdict},
                   {"pseudo_pure_fidelity", run.pseudo_pure_fidelity},
                   {"synthesis_fidelity", run.synthesis_fidelity},
                   {"state_vector_fidelity", run.state_vector_fidelity},
                   {"readout_error", run.readout_error},
                   {"pre_readout_coherence", run.pre_readout_coherence},
                   {"global_phase", detail::cjson(run.program.global_phase)},
                   {"event_count", run.program.sequence.events.size()},
                   {"readout_matrix", detail::matrix_json(nmr::normalize_deviation(run.readout).matrix())},
                   {"carbon_peaks", detail::peaks_json(run.carbon_peaks)},
                   {"proton_peaks", detail::peaks_json(run.proton_peaks)},
                   {"spectra", {spectra::to_json(carbon), spectra::to_json(proton)}},
                   {"verified", ok}};
            res.report = j.dump(2) + "\n";
            break;
        }
        case OutputFormat::csv:
            res.report = spectra::to_csv({carbon, proton});
            break;
        case OutputFormat::text: {
            std::string& s = res.report;
            s += "NMR experiment " + std::string(to_string(*which)) + " (" +
                 std::to_string(run.program.sequence.events.size()) + " pulse events)\n";
            s += "  pseudo-pure fidelity to |up up>:      " + detail::num(run.pseudo_pure_fidelity) + "\n";
            s += "  synthesized fidelity to EPR target:  " + detail::num(run.synthesis_fidelity) + "\n";
            s += "  agreement with state-vector run:     " + detail::num(run.state_vector_fidelity) + "\n";
            s += "  observable coherence before readout: " + detail::num(run.pre_readout_coherence) + "\n";
            s += "  normalized readout matrix ([pi/2]_y^2), error " + detail::num(run.readout_error) + ":\n";
            s += detail::matrix_text(nmr::normalize_deviation(run.readout).matrix());
            s += "  carbon peaks:\n" + detail::peaks_text(run.carbon_peaks);
            s += "  proton peaks:\n" + detail::peaks_text(run.proton_peaks);
            s += "classification: " + verdict + (ok ? " (ok)" : " (FAILED)") + "\n";
            break;
        }
    }
    if (cfg.out_path) res.files.emplace_back(*cfg.out_path, detail::spectra_file(cfg, {carbon, proton}));
    return res;
}

// --- compile ----------------------------------------------------------------

inline const std::vector<std::string>& compile_targets() {
    static const std::vector<std::string> names{"U+",  "U-",  "I14-", "I23+", "Is-",  "Is+",        "refocus",
                                                "psi1", "psi2", "psi3", "psi4", "pseudo-pure"};
    return names;
}

inline CommandResult cmd_compile(const ExperimentConfig& cfg) {
    std::string target;
    if (cfg.compile_target)
        target = *cfg.compile_target;
    else if (cfg.named_case && parse_epr_case(*cfg.named_case))
        target = *cfg.named_case;
    else
        throw UsageError("compile needs --target (one of U+, U-, I14-, I23+, Is-, Is+, refocus, psi1..psi4, pseudo-pure)");

    pulse::PulseSequence seq;
    std::optional<pulse::CompiledOperator> compiled;
    std::string verification;
    bool ok = true;

    if (target == "U+") compiled = pulse::compile_preparation(kPi / 2, kPi / 2);
    else if (target == "U-") compiled = pulse::compile_preparation(-kPi / 2, kPi / 2);
    else if (target == "I14-") compiled = pulse::compile_phase_oracle(pulse::OracleKind::i14_minus);
    else if (target == "I23+") compiled = pulse::compile_phase_oracle(pulse::OracleKind::i23_plus);
    else if (target == "Is-") compiled = pulse::compile_reflection(-kPi / 2);
    else if (target == "Is+") compiled = pulse::compile_reflection(kPi / 2);
    else if (const auto c = parse_epr_case(target)) compiled = pulse::compile_full_iteration(*c);
    else if (target == "refocus") {
        seq = pulse::refocused_half_j();
        const double err = max_abs_diff(pulse::sequence_unitary(seq).matrix(), Matrix(nmr::evolution_unitary(0.5)));
        ok = err < 1e-10;
        verification = "equals free evolution [1/2J] (max |diff| = " + detail::num(err) + ")";
    } else if (target == "pseudo-pure") {
        seq = {"pseudo-pure", nmr::pseudo_pure_sequence(cfg.spin_system)};
        const auto rho = nmr::normalize_deviation(nmr::prepare_pseudo_pure(cfg.spin_system));
        Matrix4 want = Eigen::Vector4cd(3, -1, -1, -1).asDiagonal();
        const double err = max_abs_diff(rho.matrix(), want / 4.0);
        ok = err < 1e-9;
        verification = "prepares diag(3,-1,-1,-1)/4 up to scale (max |diff| = " + detail::num(err) + ")";
    } else {
        throw UsageError("unknown compile target '" + target + "'");
    }

    if (compiled) {
        seq = compiled->sequence;
        verification = "equals target up to global phase " + detail::num(compiled->global_phase);
    }

    CommandResult res;
    res.exit_code = ok ? kSuccess : kVerificationFailure;
    switch (cfg.output) {
        case OutputFormat::json: {
            json events = json::array();
            for (const auto& e : seq.events) events.push_back(pulse::to_text(e));
            json j{{"command", "compile"},
                   {"target", target},
                   {"label", seq.label},
                   {"events", events},
                   {"global_phase", compiled ? detail::cjson(compiled->global_phase) : json(nullptr)},
                   {"verified", ok}};
            if (compiled) j["achieved"] = detail::matrix_json(compiled->achieved.matrix());
            res.report = j.dump(2) + "\n";
            break;
        }
        case OutputFormat::csv:
            res.report = "index,event\n";
            for (std::size_t i = 0; i < seq.events.size(); ++i)
                res.report += std::to_string(i) + "," + pulse::to_text(seq.events[i]) + "\n";
            break;
        case OutputFormat::text:
            res.report = "# " + seq.label + " (" + std::to_string(seq.events.size()) + " events)\n";
            res.report += pulse::to_text(seq);
            res.report += std::string("# ") + (ok ? "verified: " : "FAILED: ") + verification + "\n";
            break;
    }
    return res;
}

inline CommandResult dispatch(Command cmd, const ExperimentConfig& cfg) {
    switch (cmd) {
        case Command::run: return cmd_run(cfg);
        case Command::solve: return cmd_solve(cfg);
        case Command::nmr: return cmd_nmr(cfg);
        case Command::compile: return cmd_compile(cfg);
    }
    throw UsageError("unknown command");
}

/// Errors become exit codes: usage problems and inputs the solver refuses 2, failed checks and stage errors 1.
inline CommandResult execute(Command cmd, const Flags& flags) {
    try {
        return dispatch(cmd, resolve_config(cmd, flags));
    } catch (const UsageError& e) {
        return {kUsageError, std::string("usage error: ") + e.what() + "\n", {}};
    } catch (const UnsupportedTargetError& e) {
        return {kUsageError, std::string("usage error: ") + e.what() + "\n", {}};
    } catch (const PreconditionError& e) {
        return {kUsageError, std::string("solver error: ") + e.what() + "\n", {}};
    } catch (const DefectiveMatrixError& e) {
        return {kUsageError, std::string("solver error: ") + e.what() + "\n", {}};
    } catch (const std::exception& e) {
        return {kVerificationFailure, std::string("error: ") + e.what() + "\n", {}};
    }
}

}  // namespace grovgen::cli

#endif  // GROVGEN_CLI_HPP
