// SPDX-License-Identifier: Apache-2.0
//! \file spinport/scattering.hpp
//! Two-spin scattering operator from invariant amplitudes, its Bell-projector
//! form, identical-particle symmetries and Bell-state registration by
//! scattering.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bell_basis.hpp"
#include "spin_core.hpp"

namespace spinport
{
//---------------------------------------------------------------------------//
/*!
 * Coefficients of
 *   f = A + B (S1.l)(S2.l) + C (S1.m)(S2.m) + D (S1.n)(S2.n)
 *         + E (S1 + S2).n + F (S1 - S2).n
 * for a frame (l, m, n). Dimensionless model inputs.
 */
struct InvariantAmplitudes
{
    Amplitude A{};
    Amplitude B{};
    Amplitude C{};
    Amplitude D{};
    Amplitude E{};
    Amplitude F{};

    std::array<Amplitude, 6> as_array() const { return {A, B, C, D, E, F}; }

    bool finite() const
    {
        return std::ranges::all_of(as_array(),
                                   [](Amplitude z) { return is_finite(z); });
    }
};

//! Coefficients of f = a P(Psi-) + b P(Psi+) + c P(Phi-) + d P(Phi+) + E Sz + F sz.
struct BellCoefficients
{
    Amplitude a{};
    Amplitude b{};
    Amplitude c{};
    Amplitude d{};
    Amplitude E{};
    Amplitude F{};

    Amplitude projector_coefficient(BellOutcome o) const
    {
        switch (o)
        {
            case BellOutcome::PsiMinus:
                return a;
            case BellOutcome::PsiPlus:
                return b;
            case BellOutcome::PhiMinus:
                return c;
            case BellOutcome::PhiPlus:
                return d;
        }
        return {};
    }
};

//---------------------------------------------------------------------------//
/*!
 * Right-handed orthonormal frame (lambda, mu, nu).
 */
class ScatterFrame
{
  public:
    ScatterFrame(UnitVector3 lambda, UnitVector3 mu, UnitVector3 nu)
        : lambda_{lambda}, mu_{mu}, nu_{nu}
    {
        double const ortho = std::max({std::abs(lambda_.dot(mu_)),
                                       std::abs(lambda_.dot(nu_)),
                                       std::abs(mu_.dot(nu_))});
        if (ortho > kExactTol)
        {
            throw Error("scatter frame axes are not orthogonal");
        }
        if ((lambda_.vec().cross(mu_.vec()) - nu_.vec()).cwiseAbs().maxCoeff()
            > kExactTol)
        {
            throw Error("scatter frame is not right-handed");
        }
    }

    //! lambda || x, mu || y, nu || z
    static ScatterFrame canonical()
    {
        return {UnitVector3::x_axis(), UnitVector3::y_axis(),
                UnitVector3::z_axis()};
    }

    UnitVector3 const& lambda() const { return lambda_; }
    UnitVector3 const& mu() const { return mu_; }
    UnitVector3 const& nu() const { return nu_; }

  private:
    UnitVector3 lambda_;
    UnitVector3 mu_;
    UnitVector3 nu_;
};

//---------------------------------------------------------------------------//
// Operator construction
//---------------------------------------------------------------------------//

//! Assemble f term by term from single-particle spin components.
inline SpinOperator
build_f_invariant(InvariantAmplitudes const& amps, ScatterFrame const& frame)
{
    if (!amps.finite())
    {
        throw Error("invariant amplitudes must be finite");
    }
    auto pair = [](UnitVector3 const& n) {
        return spin_component(n, 0, 2) * spin_component(n, 1, 2);
    };
    return amps.A * SpinOperator::identity(2) + amps.B * pair(frame.lambda())
           + amps.C * pair(frame.mu()) + amps.D * pair(frame.nu())
           + amps.E * total_spin_component(frame.nu(), 2)
           + amps.F * relative_spin_component(frame.nu());
}

/*!
 * a = A - (B + C + D)/4, b = a + (B + C)/2, c = a + (C + D)/2,
 * d = a + (B + D)/2; E and F pass through.
 */
inline BellCoefficients bell_coefficients(InvariantAmplitudes const& amps)
{
    BellCoefficients c;
    c.a = amps.A - (amps.B + amps.C + amps.D) / 4.0;
    c.b = c.a + (amps.B + amps.C) / 2.0;
    c.c = c.a + (amps.C + amps.D) / 2.0;
    c.d = c.a + (amps.B + amps.D) / 2.0;
    c.E = amps.E;
    c.F = amps.F;
    return c;
}

//! Spectral form assembled from Bell projectors and collective operators.
inline SpinOperator build_f_bell(BellCoefficients const& c)
{
    return c.a * bell_projector(BellOutcome::PsiMinus)
           + c.b * bell_projector(BellOutcome::PsiPlus)
           + c.c * bell_projector(BellOutcome::PhiMinus)
           + c.d * bell_projector(BellOutcome::PhiPlus)
           + c.E * collective_operator(Collective::Sz)
           + c.F * collective_operator(Collective::sz);
}

/*!
 * True iff only the target's projector coefficient survives: |E|, |F| and
 * the three other coefficients below tol, the target's above it.
 */
inline bool registration_condition(BellCoefficients const& c,
                                   BellOutcome target,
                                   double tol)
{
    if (!(tol > 0))
    {
        throw Error("registration tolerance must be positive");
    }
    if (std::abs(c.E) >= tol || std::abs(c.F) >= tol)
    {
        return false;
    }
    for (auto o : kBellOutcomes)
    {
        double const m = std::abs(c.projector_coefficient(o));
        if (o == target ? !(m > tol) : !(m < tol))
        {
            return false;
        }
    }
    return true;
}

//! f = a P(Psi-) + E (|Phi-><Phi+| + |Phi+><Phi-|), identical nucleons at pi/2.
inline SpinOperator f_at_90_identical(Amplitude a, Amplitude e)
{
    return a * bell_projector(BellOutcome::PsiMinus)
           + e
                 * (bell_transition(BellOutcome::PhiMinus, BellOutcome::PhiPlus)
                    + bell_transition(BellOutcome::PhiPlus,
                                      BellOutcome::PhiMinus));
}

//---------------------------------------------------------------------------//
// Tabulated amplitudes
//---------------------------------------------------------------------------//

struct AmplitudeRow
{
    double theta;  //!< c.m. angle [rad]
    InvariantAmplitudes amps;
};

/*!
 * Amplitudes tabulated in c.m. angle, linearly interpolated between rows.
 */
class AmplitudeTable
{
  public:
    AmplitudeTable() = default;

    AmplitudeTable(std::vector<AmplitudeRow> rows, bool identical_nucleons)
        : rows_{std::move(rows)}, identical_{identical_nucleons}
    {
        if (rows_.empty())
        {
            throw Error("amplitude table is empty");
        }
        for (std::size_t i = 0; i < rows_.size(); ++i)
        {
            if (!std::isfinite(rows_[i].theta) || !rows_[i].amps.finite())
            {
                throw Error("amplitude table row " + std::to_string(i)
                            + " is not finite");
            }
            if (i > 0 && !(rows_[i].theta > rows_[i - 1].theta))
            {
                throw Error("amplitude table angles must strictly increase");
            }
        }
    }

    //! Table with one constant row.
    static AmplitudeTable constant(InvariantAmplitudes amps)
    {
        return {{{std::numbers::pi / 2, amps}}, false};
    }

    std::vector<AmplitudeRow> const& rows() const { return rows_; }
    bool identical_nucleons() const { return identical_; }

    InvariantAmplitudes evaluate(double theta) const
    {
        if (rows_.size() == 1)
        {
            return rows_.front().amps;
        }
        constexpr double slack = 1e-12;
        if (theta < rows_.front().theta - slack
            || theta > rows_.back().theta + slack)
        {
            throw Error("angle " + std::to_string(theta)
                        + " outside the tabulated range");
        }
        auto it = std::lower_bound(
            rows_.begin(), rows_.end(), theta,
            [](AmplitudeRow const& r, double t) { return r.theta < t; });
        if (it == rows_.begin())
        {
            return it->amps;
        }
        if (it == rows_.end())
        {
            return rows_.back().amps;
        }
        auto const& hi = *it;
        auto const& lo = *(it - 1);
        double const w = (theta - lo.theta) / (hi.theta - lo.theta);
        auto const la = lo.amps.as_array();
        auto const ha = hi.amps.as_array();
        std::array<Amplitude, 6> m;
        for (std::size_t k = 0; k < 6; ++k)
        {
            m[k] = (1.0 - w) * la[k] + w * ha[k];
        }
        return {m[0], m[1], m[2], m[3], m[4], m[5]};
    }

  private:
    std::vector<AmplitudeRow> rows_;
    bool identical_ = false;
};

/*!
 * Residuals of the identical-particle relations on tabulated angle pairs:
 *   a, E symmetric and b, c, d antisymmetric under theta -> pi - theta;
 *   F identically zero.
 */
struct SymmetryReport
{
    std::size_t pairs_checked = 0;
    std::vector<double> unpaired_angles;
    double a_residual = 0;  //!< max |a(t) - a(pi-t)|
    double b_residual = 0;  //!< max |b(t) + b(pi-t)|
    double c_residual = 0;
    double d_residual = 0;
    double e_residual = 0;  //!< max |E(t) - E(pi-t)|
    double f_max = 0;  //!< max |F|

    double max_residual() const
    {
        return std::max({a_residual, b_residual, c_residual, d_residual,
                         e_residual, f_max});
    }

    //! Names of the violated rules.
    std::vector<std::string> violations(double tol) const
    {
        std::vector<std::string> out;
        if (f_max > tol)
        {
            out.emplace_back("F=0 for identical nucleons (max |F| = "
                             + std::to_string(f_max) + ")");
        }
        if (a_residual > tol)
            out.emplace_back("a(theta) = a(pi - theta)");
        if (b_residual > tol)
            out.emplace_back("b(theta) = -b(pi - theta)");
        if (c_residual > tol)
            out.emplace_back("c(theta) = -c(pi - theta)");
        if (d_residual > tol)
            out.emplace_back("d(theta) = -d(pi - theta)");
        if (e_residual > tol)
            out.emplace_back("E(theta) = E(pi - theta)");
        if (!unpaired_angles.empty())
        {
            out.emplace_back("every angle needs a pi - theta partner ("
                             + std::to_string(unpaired_angles.size())
                             + " unpaired)");
        }
        return out;
    }

    bool ok(double tol) const { return violations(tol).empty(); }
};

inline SymmetryReport
check_identical_symmetry(AmplitudeTable const& table, double angle_tol = 1e-9)
{
    SymmetryReport rep;
    auto const& rows = table.rows();
    for (auto const& row : rows)
    {
        auto const c = bell_coefficients(row.amps);
        rep.f_max = std::max(rep.f_max, std::abs(c.F));

        double const mirror = std::numbers::pi - row.theta;
        auto partner = std::find_if(rows.begin(), rows.end(), [&](auto const& r) {
            return std::abs(r.theta - mirror) <= angle_tol;
        });
        if (partner == rows.end())
        {
            rep.unpaired_angles.push_back(row.theta);
            continue;
        }
        auto const m = bell_coefficients(partner->amps);
        ++rep.pairs_checked;
        rep.a_residual = std::max(rep.a_residual, std::abs(c.a - m.a));
        rep.b_residual = std::max(rep.b_residual, std::abs(c.b + m.b));
        rep.c_residual = std::max(rep.c_residual, std::abs(c.c + m.c));
        rep.d_residual = std::max(rep.d_residual, std::abs(c.d + m.d));
        rep.e_residual = std::max(rep.e_residual, std::abs(c.E - m.E));
    }
    return rep;
}

struct RightAngleReport
{
    BellCoefficients coefficients;
    double bcd_max;  //!< max(|b|, |c|, |d|) at pi/2
    double operator_residual;  //!< max |f - f_at_90_identical(a, E)|
};

//! Evaluate the table at pi/2 and compare with the reduced operator form.
inline RightAngleReport right_angle_check(AmplitudeTable const& table)
{
    auto const c = bell_coefficients(table.evaluate(std::numbers::pi / 2));
    RightAngleReport r{c, 0, 0};
    r.bcd_max = std::max({std::abs(c.b), std::abs(c.c), std::abs(c.d)});
    r.operator_residual
        = build_f_bell(c).max_abs_diff(f_at_90_identical(c.a, c.E));
    return r;
}

//---------------------------------------------------------------------------//
// Bell filtering by scattering
//---------------------------------------------------------------------------//

struct FilterOutcome
{
    BellOutcome outcome;
    double probability;  //!< conditional on an event being produced
    SpinState post_state;
};

/*!
 * Scattering followed by Bell-basis detection on a pair of particles.
 *
 * The state is first mapped by f (acting on the pair), then projected onto
 * the Bell basis of the pair. Outcome probabilities are
 * |P_b f psi|^2 / |f psi|^2; an annihilated f psi yields no event.
 */
class BellFilter
{
  public:
    explicit BellFilter(SpinOperator const& f,
                        int n_particles = 2,
                        std::array<int, 2> pair = {0, 1})
        : n_{n_particles}
        , f_{embed(f.matrix(), {pair[0], pair[1]}, n_particles).matrix()}
    {
        if (f.n_particles() != 2)
        {
            throw Error("Bell filter operator must act on two particles");
        }
        for (std::size_t i = 0; i < 4; ++i)
        {
            proj_[i] = embed(bell_projector(kBellOutcomes[i]).matrix(),
                             {pair[0], pair[1]}, n_particles)
                           .matrix();
        }
    }

    int n_particles() const { return n_; }

    //! Outcome probabilities, or nullopt if f annihilates the state.
    std::optional<std::array<double, 4>>
    probabilities(SpinState const& state) const
    {
        check(state);
        Vector const scattered = f_ * state.amplitudes();
        double const total = scattered.squaredNorm();
        if (std::sqrt(total) <= kZeroNorm)
        {
            return std::nullopt;
        }
        std::array<double, 4> p;
        for (std::size_t i = 0; i < 4; ++i)
        {
            p[i] = (proj_[i] * scattered).squaredNorm() / total;
        }
        return p;
    }

    std::optional<FilterOutcome>
    operator()(SpinState const& state, RandomStream& rng) const
    {
        check(state);
        Vector const scattered = f_ * state.amplitudes();
        double const total = scattered.squaredNorm();
        if (std::sqrt(total) <= kZeroNorm)
        {
            return std::nullopt;
        }
        std::array<Vector, 4> branch;
        std::array<double, 4> weight;
        double kept = 0;
        for (std::size_t i = 0; i < 4; ++i)
        {
            branch[i] = proj_[i] * scattered;
            weight[i] = branch[i].squaredNorm();
            // Branches below the zero-norm floor cannot be normalized.
            if (std::sqrt(weight[i]) <= kZeroNorm)
            {
                weight[i] = 0;
            }
            kept += weight[i];
        }
        if (kept <= 0)
        {
            return std::nullopt;
        }
        double const u = rng.uniform() * kept;
        double acc = 0;
        std::size_t pick = 4;
        for (std::size_t i = 0; i < 4; ++i)
        {
            if (weight[i] <= 0)
            {
                continue;
            }
            pick = i;
            acc += weight[i];
            if (u < acc)
            {
                break;
            }
        }
        return FilterOutcome{kBellOutcomes[pick], weight[pick] / kept,
                             SpinState{n_, std::move(branch[pick])}};
    }

  private:
    void check(SpinState const& state) const
    {
        if (state.n_particles() != n_)
        {
            throw Error("Bell filter expects a " + std::to_string(n_)
                        + "-particle state");
        }
    }

    int n_;
    Matrix f_;
    std::array<Matrix, 4> proj_;
};

//! Two-particle scatter-then-detect; nullopt means no detector event.
inline std::optional<FilterOutcome>
scatter_filter(SpinState const& state, SpinOperator const& f, RandomStream& rng)
{
    return BellFilter{f}(state, rng);
}

}  // namespace spinport
