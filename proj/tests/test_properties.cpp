// SPDX-License-Identifier: Apache-2.0
// Randomized checks of algebraic and statistical invariants.
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spinport/bell_basis.hpp"
#include "spinport/scattering.hpp"
#include "spinport/spin_core.hpp"
#include "spinport/teleport.hpp"

using namespace spinport;
using oracle::cd;

namespace
{
constexpr double kTol = 1e-12;
using B = BellOutcome;

UnitVector3 random_unit(std::mt19937_64& g)
{
    return UnitVector3::normalized(oracle::random_axis(g));
}

UnknownState random_state(std::mt19937_64& g)
{
    auto const [a, b] = oracle::random_qubit(g);
    return UnknownState::normalized(a, b);
}

InvariantAmplitudes random_amps(std::mt19937_64& g)
{
    return {oracle::random_complex(g), oracle::random_complex(g), oracle::random_complex(g),
            oracle::random_complex(g), oracle::random_complex(g), oracle::random_complex(g)};
}

double max_diff(Matrix const& a, Matrix const& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}
}  // namespace

TEST(Property, OperationsReturnNormalizedStates)
{
    std::mt19937_64 g{101};
    RandomStream rng{101, 0};
    for (int i = 0; i < 100; ++i)
    {
        auto const phi = random_state(g);
        auto const n = random_unit(g);
        auto const three = compose_three(phi, make_epr());
        EXPECT_NEAR(three.amplitudes().norm(), 1.0, kTol);
        auto const rotated = apply_normalized(rotation(n, 1.3), phi.ket());
        EXPECT_NEAR(rotated.amplitudes().norm(), 1.0, kTol);
        auto const m = measure_projection(three, 1, n, rng);
        EXPECT_NEAR(m.collapsed.amplitudes().norm(), 1.0, kTol);
        for (auto o : kBellOutcomes)
            EXPECT_NEAR(conditional_state_2(three, o).amplitudes().norm(), 1.0, kTol);
    }
}

TEST(Property, SpinProductIdentity)
{
    std::mt19937_64 g{102};
    for (int i = 0; i < 100; ++i)
    {
        auto const n = random_unit(g);
        auto const lhs = spin_component(n, 0, 2) * spin_component(n, 1, 2);
        auto const s = total_spin_component(n, 2);
        Matrix const rhs
            = 0.5 * ((s * s).matrix() - 0.5 * Matrix::Identity(4, 4));
        EXPECT_LT(max_diff(lhs.matrix(), rhs), kTol);
    }
}

TEST(Property, RotationComposesAndHasSpinorSign)
{
    std::mt19937_64 g{103};
    std::uniform_real_distribution<double> ang(-7, 7);
    for (int i = 0; i < 100; ++i)
    {
        auto const n = random_unit(g);
        double const a = ang(g), b = ang(g);
        EXPECT_LT(max_diff((rotation(n, a) * rotation(n, b)).matrix(),
                           rotation(n, a + b).matrix()),
                  kTol);
        EXPECT_LT(max_diff(rotation(n, 2 * std::numbers::pi).matrix(),
                           -Matrix::Identity(2, 2)),
                  kTol);
    }
}

TEST(Property, RepeatedMeasurementAgrees)
{
    std::mt19937_64 g{104};
    RandomStream rng{104, 0};
    for (int i = 0; i < 1000; ++i)
    {
        auto const n = random_unit(g);
        auto const three = compose_three(random_state(g), make_epr());
        int const particle = i % 3;
        auto const first = measure_projection(three, particle, n, rng);
        auto const second = measure_projection(first.collapsed, particle, n, rng);
        ASSERT_EQ(first.value, second.value);
        EXPECT_NEAR(second.probability, 1.0, kTol);
    }
}

TEST(Property, MeasurementFollowsBornWeights)
{
    cd const a{0.36, 0.48}, b{0.0, 0.8};
    auto const s = SpinState::qubit(a, b);
    double const p_up = std::norm(a);
    RandomStream rng{105, 0};
    int const n = 1000000;
    int up = 0;
    for (int i = 0; i < n; ++i)
        up += measure_projection(s, 0, UnitVector3::z_axis(), rng).value > 0;
    EXPECT_TRUE(oracle::within_sigmas(up, n, p_up)) << up << " vs " << p_up * n;
}

TEST(Property, TripletSpinSquaredIsTwo)
{
    auto s2 = SpinOperator::zero(2);
    for (auto w : {Collective::Sx, Collective::Sy, Collective::Sz})
    {
        auto const s = collective_operator(w);
        s2 += s * s;
    }
    Matrix triplet_proj = Matrix::Zero(4, 4);
    for (auto o : {B::PsiPlus, B::PhiMinus, B::PhiPlus})
        triplet_proj += bell_projector(o).matrix();
    EXPECT_LT(max_diff(triplet_proj * s2.matrix() * triplet_proj, 2.0 * triplet_proj), kTol);
    EXPECT_LT(max_diff(s2.matrix(), total_spin_squared(2).matrix()), kTol);
}

TEST(Property, SingletAnticorrelatedOnRandomAxes)
{
    std::mt19937_64 g{106};
    for (int i = 0; i < 100; ++i)
    {
        auto const n = random_unit(g);
        EXPECT_NEAR(correlation_probability(bell_ket(B::PsiMinus), n, n), 1.0, kTol);
    }
}

TEST(Property, PsiPlusTiltInAnyPlane)
{
    // Tilt from z toward a random direction in the xy plane.
    std::mt19937_64 g{107};
    std::uniform_real_distribution<double> phi(0, 2 * std::numbers::pi);
    for (int k = 0; k < 10; ++k)
    {
        double const p = phi(g);
        for (int i = 0; i <= 18; ++i)
        {
            double const th = std::numbers::pi * i / 36;
            auto const n = UnitVector3::normalized(std::sin(th) * std::cos(p),
                                                   std::sin(th) * std::sin(p), std::cos(th));
            EXPECT_NEAR(correlation_probability(bell_ket(B::PsiPlus), n, n),
                        std::cos(th) * std::cos(th), kTol);
        }
    }
}

TEST(Property, CorrelationFrequenciesMatchAnalytic)
{
    std::mt19937_64 g{108};
    RandomStream rng{108, 0};
    int const samples = 100000;
    for (auto o : kBellOutcomes)
    {
        auto const n = random_unit(g);
        auto const state = bell_ket(o);
        double const p = correlation_probability(state, n, n);
        int anti = 0;
        for (int i = 0; i < samples; ++i)
        {
            auto const first = measure_projection(state, 0, n, rng);
            auto const second = measure_projection(first.collapsed, 1, n, rng);
            anti += first.value != second.value;
        }
        EXPECT_TRUE(oracle::within_sigmas(anti, samples, p)) << to_string(o) << " " << anti << " vs " << p;
    }
}

TEST(Property, DiscriminationMakesNoErrors)
{
    for (auto o : kBellOutcomes)
    {
        for (std::uint64_t t = 0; t < 500; ++t)
        {
            auto rng = make_stream(109, t, StreamDomain::discrimination);
            ASSERT_EQ(discriminate_bell(bell_ket(o), 64, rng).estimate, o);
        }
    }
}

TEST(Property, InvariantAndBellFormsAgree)
{
    std::mt19937_64 g{110};
    auto const frame = ScatterFrame::canonical();
    for (int i = 0; i < 1000; ++i)
    {
        auto const x = random_amps(g);
        EXPECT_LT(max_diff(build_f_invariant(x, frame).matrix(),
                           build_f_bell(bell_coefficients(x)).matrix()),
                  kTol);
    }
}

TEST(Property, SpectralFormWithoutETerms)
{
    std::mt19937_64 g{111};
    for (int i = 0; i < 200; ++i)
    {
        auto x = random_amps(g);
        x.E = x.F = 0;
        auto const c = bell_coefficients(x);
        auto const f = build_f_bell(c);
        std::array<cd, 4> const ev{c.a, c.b, c.c, c.d};
        for (std::size_t k = 0; k < 4; ++k)
        {
            auto const ket = bell_ket(kBellOutcomes[k]);
            Vector const r = f.matrix() * ket.amplitudes() - ev[k] * ket.amplitudes();
            EXPECT_LT(r.cwiseAbs().maxCoeff(), kTol);
        }
    }
}

TEST(Property, FrameCovariance)
{
    std::mt19937_64 g{112};
    std::uniform_real_distribution<double> ang(-3, 3);
    for (int i = 0; i < 100; ++i)
    {
        auto const x = random_amps(g);
        auto const axis = oracle::random_axis(g);
        double const alpha = ang(g);
        auto rot = [&](Eigen::Vector3d const& v) {
            return UnitVector3::normalized(oracle::rodrigues(axis, alpha, v));
        };
        ScatterFrame const base = ScatterFrame::canonical();
        ScatterFrame const turned{rot(Eigen::Vector3d::UnitX()), rot(Eigen::Vector3d::UnitY()),
                                  rot(Eigen::Vector3d::UnitZ())};
        Matrix const u = oracle::su2_rotation(axis, alpha);
        Matrix const uu = oracle::kron(u, u);
        Matrix const conj = uu * build_f_invariant(x, base).matrix() * uu.adjoint();
        EXPECT_LT(max_diff(build_f_invariant(x, turned).matrix(), conj), 1e-9);
    }
}

TEST(Property, FourTermDecompositionHolds)
{
    std::mt19937_64 g{113};
    for (int i = 0; i < 100; ++i)
    {
        auto const phi = random_state(g);
        Vector const diff = compose_three(phi, make_epr()).amplitudes()
                            - oracle::four_term_expansion(phi.a(), phi.b());
        EXPECT_LT(diff.cwiseAbs().maxCoeff(), kTol);
        double total = 0;
        for (double p : bell_probabilities_13(compose_three(phi, make_epr())))
            total += p;
        EXPECT_NEAR(total, 1.0, kTol);
    }
}

TEST(Property, NoSignalingEnsembleIsMaximallyMixed)
{
    std::mt19937_64 g{114};
    for (int i = 0; i < 100; ++i)
    {
        auto const three = compose_three(random_state(g), make_epr());
        auto const p = bell_probabilities_13(three);
        Matrix rho = Matrix::Zero(2, 2);
        for (auto o : kBellOutcomes)
        {
            Vector const v = conditional_state_2(three, o).amplitudes();
            rho += p[index_of(o)] * v * v.adjoint();
        }
        EXPECT_LT(max_diff(rho, 0.5 * Matrix::Identity(2, 2)), kTol);
    }
}

TEST(Property, CorrectionRestoresEveryChannel)
{
    std::mt19937_64 g{115};
    for (int i = 0; i < 100; ++i)
    {
        auto const phi = random_state(g);
        auto const three = compose_three(phi, make_epr());
        for (auto o : kBellOutcomes)
        {
            PendingQubit const q{conditional_state_2(three, o)};
            auto const out = q.correct(ClassicalMessage{o, 0.0}, correction_for(o));
            EXPECT_NEAR(fidelity(out, phi.ket()), 1.0, kTol);
        }
    }
}

TEST(Property, OutcomeFrequenciesUniform)
{
    TeleportEngine const engine{ProtocolOptions{}};
    std::uint64_t const n = 1000000;
    auto const s = run_batch(engine, {0.6, cd(0.0, 0.8)}, n, 116, 1);
    for (auto h : s.histogram)
        EXPECT_TRUE(oracle::within_sigmas(double(h), double(n), 0.25)) << h;
}
