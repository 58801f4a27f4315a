#include "grovgen/nmr_machine.hpp"
#include "grovgen/pulse_compiler.hpp"

#include "test_support.hpp"

#include <Eigen/Eigenvalues>

using namespace grovgen;
using namespace grovgen::nmr;
using testing::dense;

namespace {

Matrix4 rho1_expected() {
    Matrix4 m = dense({{0.25, 0, 0, 0.5}, {0, -0.25, 0, 0}, {0, 0, -0.25, 0}, {0.5, 0, 0, 0.25}});
    return m;
}

Matrix4 rho1r_expected() {
    Matrix4 m = dense({{0, -1, 1, 1}, {-1, 0, -1, -1}, {1, -1, 0, 1}, {1, -1, 1, 0}});
    return m / 4.0;
}

Matrix4 diag4(Complex a, Complex b, Complex c, Complex d) {
    Matrix4 m = Eigen::Vector4cd(a, b, c, d).asDiagonal();
    return m;
}

DeviationDensityMatrix random_rho(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix4 a;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) a(r, c) = Complex(g(rng), g(rng));
    Matrix4 h = (a + a.adjoint()) / 2.0;
    h -= (h.trace() / 4.0) * Matrix4::Identity();
    return DeviationDensityMatrix(h);
}

RfRotation random_rf(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> spins(1, 3), axis(0, 3);
    std::uniform_real_distribution<double> angle(-2 * kPi, 2 * kPi);
    return {static_cast<Spins>(spins(rng)), static_cast<RfAxis>(axis(rng)), angle(rng)};
}

Eigen::Vector4d spectrum(const DeviationDensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(rho.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

TEST_CASE("equilibrium deviation matrix", "[nmr_machine]") {
    SpinSystem sys;
    sys.gamma_ratio = 1.0;
    CHECK(max_abs_diff(equilibrium(sys).matrix(), diag4(1, 0, 0, -1)) < 1e-15);

    sys.gamma_ratio = 0.2514;
    CHECK(max_abs_diff(equilibrium(sys).matrix(), diag4(0.6257, -0.3743, 0.3743, -0.6257)) < 1e-15);

    sys.j_hz = 0.0;
    CHECK_THROWS_AS(equilibrium(sys), ValidationError);
}

TEST_CASE("deviation matrices reject non-Hermitian or traced input", "[nmr_machine]") {
    Matrix4 m = Matrix4::Zero();
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(DeviationDensityMatrix(m), ValidationError);
    CHECK_THROWS_AS(DeviationDensityMatrix(Matrix4::Identity()), ValidationError);

    const StateVector psi1{1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)};
    CHECK(max_abs_diff(DeviationDensityMatrix::from_pure(psi1).matrix(), rho1_expected()) < 1e-15);
}

TEST_CASE("rf rotations", "[nmr_machine]") {
    const DeviationDensityMatrix rho1(rho1_expected());

    SECTION("proton [pi/2]_y readout of the psi1 state") {
        const auto out = apply_rf(rho1, {Spins::second, RfAxis::plus_y, kPi / 2});
        CHECK(max_abs_diff(out.matrix(), rho1r_expected()) < 1e-15);
    }
    SECTION("zero angle does nothing") {
        for (Spins s : {Spins::first, Spins::second, Spins::both})
            CHECK(max_abs_diff(apply_rf(rho1, {s, RfAxis::minus_y, 0.0}).matrix(), rho1.matrix()) < 1e-15);
    }
    SECTION("a back-to-back pi pair with opposite phase cancels") {
        const auto a = apply_rf(rho1, {Spins::both, RfAxis::plus_x, kPi});
        const auto b = apply_rf(a, {Spins::both, RfAxis::plus_x, -kPi});
        CHECK(max_abs_diff(b.matrix(), rho1.matrix()) < 1e-15);
        const auto c = apply_rf(a, {Spins::both, RfAxis::minus_x, kPi});
        CHECK(max_abs_diff(c.matrix(), rho1.matrix()) < 1e-15);
    }
    SECTION("a non-finite angle is rejected") {
        CHECK_THROWS_AS(apply_rf(rho1, {Spins::first, RfAxis::plus_x, std::nan("")}), ValidationError);
    }
}

TEST_CASE("free evolution under the scalar coupling", "[nmr_machine]") {
    const Complex m = unit_phase(-kPi / 4), p = unit_phase(kPi / 4);
    CHECK(max_abs_diff(evolution_unitary(0.5), diag4(m, p, p, m)) < 1e-15);
    CHECK(max_abs_diff(evolution_unitary(FreeEvolution{1, 2}), diag4(m, p, p, m)) < 1e-15);

    const DeviationDensityMatrix rho1(rho1_expected());
    CHECK(max_abs_diff(free_evolution(rho1, 0.0).matrix(), rho1.matrix()) < 1e-15);

    // (0,3) joins two levels with the same Iz1 Iz2 value, so it does not precess.
    const auto half = free_evolution(rho1, 0.5);
    CHECK(std::abs(half(0, 3) - 0.5) < 1e-15);

    const DeviationDensityMatrix diag(diag4(0.3, -0.1, 0.2, -0.4));
    for (double t : {0.1, 0.25, 1.0, 7.3}) CHECK(max_abs_diff(free_evolution(diag, t).matrix(), diag.matrix()) < 1e-15);

    const SpinSystem sys;
    CHECK(max_abs_diff(free_evolution_seconds(rho1, 1.0 / (2 * sys.j_hz), sys).matrix(), half.matrix()) < 1e-14);

    CHECK_THROWS_AS(free_evolution(rho1, -0.1), ValidationError);
    CHECK_THROWS_AS(free_evolution(rho1, FreeEvolution{1, 0}), ValidationError);
}

TEST_CASE("gradient crush", "[nmr_machine]") {
    const DeviationDensityMatrix rho1(rho1_expected());
    const auto crushed = gradient_crush(rho1);
    CHECK(max_abs_diff(crushed.matrix(), diag4(0.25, -0.25, -0.25, 0.25)) < 1e-15);
    CHECK(max_abs_diff(gradient_crush(crushed).matrix(), crushed.matrix()) < 1e-15);

    const DeviationDensityMatrix diag(diag4(0.3, -0.1, 0.2, -0.4));
    CHECK(max_abs_diff(gradient_crush(diag).matrix(), diag.matrix()) < 1e-15);
}

TEST_CASE("pseudo-pure preparation", "[nmr_machine]") {
    const SpinSystem sys;
    const auto rho = prepare_pseudo_pure(sys);
    const Matrix4 shape = diag4(3, -1, -1, -1) / 4.0;
    const Complex scale = rho(0, 0) / shape(0, 0);
    CHECK(scale.real() > 0.0);
    CHECK(max_abs_diff(rho.matrix(), scale * shape) < 1e-9 * std::abs(scale));
    CHECK(max_abs_diff(rho.matrix(), Matrix4(rho.matrix().diagonal().asDiagonal())) == 0.0);

    // Iz1/2 + Iz2/2 + Iz1 Iz2 is the same shape.
    const Matrix4 reference = spin::iz(1) / 2.0 + spin::iz(2) / 2.0 + spin::zz();
    CHECK(max_abs_diff(reference, shape) < 1e-15);

    SpinSystem unit;
    unit.gamma_ratio = 1.0;
    CHECK(pseudo_pure_flip_angle(unit) == Catch::Approx(kPi / 3).epsilon(1e-15));

    for (double r : {0.1, 0.5, 1.0, 1.9}) {
        unit.gamma_ratio = r;
        const auto pp = prepare_pseudo_pure(unit);
        const Complex k = pp(0, 0) / shape(0, 0);
        CHECK(max_abs_diff(pp.matrix(), k * shape) < 1e-9 * std::abs(k));
    }

    unit.gamma_ratio = 2.0;
    CHECK_THROWS_AS(pseudo_pure_flip_angle(unit), ValidationError);
    unit.gamma_ratio = -0.3;
    CHECK_THROWS_AS(prepare_pseudo_pure(unit), ValidationError);
}

TEST_CASE("pure-state check", "[nmr_machine]") {
    const StateVector psi1{1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)};
    CHECK(to_pure_state_check(DeviationDensityMatrix(rho1_expected()), psi1) == Catch::Approx(1.0).epsilon(1e-12));

    const auto pp = prepare_pseudo_pure(SpinSystem{});
    CHECK(to_pure_state_check(pp, StateVector::basis(4, 0)) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(to_pure_state_check(pp, StateVector::basis(4, 2))) < 1e-12);

    const StateVector psi2{1 / std::sqrt(2.0), 0, 0, -1 / std::sqrt(2.0)};
    CHECK(std::abs(to_pure_state_check(DeviationDensityMatrix(rho1_expected()), psi2)) < 1e-12);

    CHECK_THROWS_AS(to_pure_state_check(DeviationDensityMatrix(Matrix4::Zero()), psi1), PositivityError);
    CHECK_THROWS_AS(normalize_deviation(DeviationDensityMatrix(Matrix4::Zero())), PositivityError);

    // Scaled pseudo-pure input normalizes back to unit spread.
    const auto n = normalize_deviation(DeviationDensityMatrix(Matrix4(rho1_expected() * 0.037)));
    CHECK(max_abs_diff(n.matrix(), rho1_expected()) < 1e-14);
}

TEST_CASE("every operation keeps rho Hermitian and traceless", "[nmr_machine][property]") {
    auto rng = testing::make_rng(17);
    std::uniform_real_distribution<double> t(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rho = random_rho(rng);
        const DeviationDensityMatrix outs[] = {apply_rf(rho, random_rf(rng)), free_evolution(rho, t(rng)),
                                               gradient_crush(rho)};
        for (const auto& o : outs) {
            CHECK(hermiticity_defect(o.matrix()) < 1e-12);
            CHECK(std::abs(o.matrix().trace()) < 1e-12);
        }
    }
}

TEST_CASE("unitary operations preserve the eigenvalue multiset", "[nmr_machine][property]") {
    auto rng = testing::make_rng(19);
    std::uniform_real_distribution<double> t(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rho = random_rho(rng);
        const Eigen::Vector4d before = spectrum(rho);
        CHECK((spectrum(apply_rf(rho, random_rf(rng))) - before).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((spectrum(free_evolution(rho, t(rng))) - before).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("refocused delays equal a plain 1/2J evolution", "[nmr_machine][property]") {
    const std::vector<PulseEvent> pair{FreeEvolution{1, 4}, RfRotation{Spins::both, RfAxis::plus_x, kPi},
                                       FreeEvolution{1, 4}, RfRotation{Spins::both, RfAxis::plus_x, -kPi}};
    auto rng = testing::make_rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rho = random_rho(rng);
        CHECK(max_abs_diff(run_events(rho, pair).matrix(), free_evolution(rho, 0.5).matrix()) < 1e-10);
    }
}

TEST_CASE("pseudo-pure state driven by compiled pulses tracks the state vector", "[nmr_machine][property]") {
    const auto pp = prepare_pseudo_pure(SpinSystem{});
    for (EprCase c : kAllEprCases) {
        const EprPreset& p = preset(c);
        const auto program = pulse::compile_full_iteration(c);
        const auto rho = run_events(pp, program.sequence.events);
        const StateVector psi = run_iterations(p.preparation(), 0, p.marked_set(), p.phases, 1);
        CHECK(to_pure_state_check(rho, psi) > 1 - 1e-8);
    }

    // Random rf trains act on the pseudo-pure part exactly like the product unitary.
    auto rng = testing::make_rng(29);
    std::uniform_real_distribution<double> t(0.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<PulseEvent> events;
        Matrix4 u = Matrix4::Identity();
        for (int k = 0; k < 6; ++k) {
            const RfRotation rf = random_rf(rng);
            const FreeEvolution ev{static_cast<long>(t(rng) * 8), 8};
            events.emplace_back(rf);
            events.emplace_back(ev);
            u = evolution_unitary(ev) * rf_unitary(rf) * u;
        }
        const StateVector psi(Vector(u.col(0)));
        CHECK(to_pure_state_check(run_events(pp, events), psi) > 1 - 1e-8);
    }
}
