// SPDX-License-Identifier: Apache-2.0
//! \file spinport/bell_basis.hpp
//! Bell states, Bell projectors, collective spin operators written in the
//! Bell basis, triplet relations, and statistical Bell-state discrimination.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "spin_core.hpp"

namespace spinport
{
//---------------------------------------------------------------------------//
/*!
 * One of the four Bell states. The underlying value is the 2-bit classical
 * code sent over the classical channel.
 */
enum class BellOutcome : unsigned
{
    PsiMinus = 0b00,
    PsiPlus = 0b01,
    PhiMinus = 0b10,
    PhiPlus = 0b11,
};

inline constexpr std::array<BellOutcome, 4> kBellOutcomes = {
    BellOutcome::PsiMinus,
    BellOutcome::PsiPlus,
    BellOutcome::PhiMinus,
    BellOutcome::PhiPlus,
};

inline constexpr unsigned code(BellOutcome o)
{
    return static_cast<unsigned>(o);
}

inline constexpr std::size_t index_of(BellOutcome o)
{
    return static_cast<std::size_t>(o);
}

inline BellOutcome outcome_from_code(unsigned c)
{
    if (c > 3)
    {
        throw Error("Bell code must be two bits, got " + std::to_string(c));
    }
    return static_cast<BellOutcome>(c);
}

inline constexpr std::string_view to_string(BellOutcome o)
{
    switch (o)
    {
        case BellOutcome::PsiMinus:
            return "PsiMinus";
        case BellOutcome::PsiPlus:
            return "PsiPlus";
        case BellOutcome::PhiMinus:
            return "PhiMinus";
        case BellOutcome::PhiPlus:
            return "PhiPlus";
    }
    return "?";
}

inline BellOutcome parse_outcome(std::string_view name)
{
    for (auto o : kBellOutcomes)
    {
        if (to_string(o) == name)
        {
            return o;
        }
    }
    throw Error("unknown Bell state name '" + std::string(name) + "'");
}

//---------------------------------------------------------------------------//
// Kets and projectors
//---------------------------------------------------------------------------//

//! Psi(+-) = (ud +- du)/sqrt2, Phi(+-) = (uu +- dd)/sqrt2.
inline SpinState bell_ket(BellOutcome o)
{
    double const h = 1.0 / std::numbers::sqrt2;
    Vector v = Vector::Zero(4);
    switch (o)
    {
        case BellOutcome::PsiMinus:
            v[1] = h;
            v[2] = -h;
            break;
        case BellOutcome::PsiPlus:
            v[1] = h;
            v[2] = h;
            break;
        case BellOutcome::PhiMinus:
            v[0] = h;
            v[3] = -h;
            break;
        case BellOutcome::PhiPlus:
            v[0] = h;
            v[3] = h;
            break;
    }
    return {2, std::move(v)};
}

inline SpinOperator bell_projector(BellOutcome o)
{
    auto const k = bell_ket(o);
    return SpinOperator::outer(k, k);
}

//! |to><from|, a Bell-state transition operator.
inline SpinOperator bell_transition(BellOutcome to, BellOutcome from)
{
    return SpinOperator::outer(bell_ket(to), bell_ket(from));
}

//---------------------------------------------------------------------------//
// Collective operators in the Bell basis
//---------------------------------------------------------------------------//

enum class Collective
{
    Sx,  //!< (S1 + S2).x
    Sy,  //!< (S1 + S2).y
    Sz,  //!< (S1 + S2).z
    sz,  //!< (S1 - S2).z
};

/*!
 * Collective two-spin operators assembled from Bell transition operators:
 *
 *   Sx = |Psi+><Phi+| + |Phi+><Psi+|
 *   Sy = i (|Psi+><Phi-| - |Phi-><Psi+|)
 *   Sz = |Phi-><Phi+| + |Phi+><Phi-|
 *   sz = |Psi+><Psi-| + |Psi-><Psi+|
 */
inline SpinOperator collective_operator(Collective which)
{
    using B = BellOutcome;
    switch (which)
    {
        case Collective::Sx:
            return bell_transition(B::PsiPlus, B::PhiPlus)
                   + bell_transition(B::PhiPlus, B::PsiPlus);
        case Collective::Sy:
            return Amplitude{0, 1}
                   * (bell_transition(B::PsiPlus, B::PhiMinus)
                      - bell_transition(B::PhiMinus, B::PsiPlus));
        case Collective::Sz:
            return bell_transition(B::PhiMinus, B::PhiPlus)
                   + bell_transition(B::PhiPlus, B::PhiMinus);
        case Collective::sz:
            return bell_transition(B::PsiPlus, B::PsiMinus)
                   + bell_transition(B::PsiMinus, B::PsiPlus);
    }
    throw Error("unknown collective operator");
}

//! The same operator built from single-particle spin components.
inline SpinOperator collective_operator_direct(Collective which)
{
    switch (which)
    {
        case Collective::Sx:
            return total_spin_component(UnitVector3::x_axis(), 2);
        case Collective::Sy:
            return total_spin_component(UnitVector3::y_axis(), 2);
        case Collective::Sz:
            return total_spin_component(UnitVector3::z_axis(), 2);
        case Collective::sz:
            return relative_spin_component(UnitVector3::z_axis());
    }
    throw Error("unknown collective operator");
}

//---------------------------------------------------------------------------//
// Triplet vector basis
//---------------------------------------------------------------------------//

//! e1 = |1,0>, e2 = |1,1>, e3 = |1,-1>
struct TripletVectorBasis
{
    SpinState e1;
    SpinState e2;
    SpinState e3;
};

struct TripletReport
{
    TripletVectorBasis basis;
    double psi_plus_residual;  //!< max |Psi+ - e1|
    double phi_minus_residual;  //!< max |Phi- - (e2 - e3)/sqrt2|
    double phi_plus_residual;  //!< max |Phi+ - (e2 + e3)/sqrt2|
    double orthonormality_residual;
    double eigen_residual;  //!< S^2 = 2 and S_z = 0, +1, -1

    double max_residual() const
    {
        return std::max({psi_plus_residual,
                         phi_minus_residual,
                         phi_plus_residual,
                         orthonormality_residual,
                         eigen_residual});
    }
    bool ok(double tol = kExactTol) const { return max_residual() <= tol; }
};

/*!
 * Build |1,m> by lowering |1,1> = |uu> with S- = Sx - i Sy (Condon-Shortley
 * phases) and compare against the Bell kets.
 */
inline TripletReport triplet_relations()
{
    auto const sx = total_spin_component(UnitVector3::x_axis(), 2);
    auto const sy = total_spin_component(UnitVector3::y_axis(), 2);
    auto const sz = total_spin_component(UnitVector3::z_axis(), 2);
    SpinOperator const lower = sx - Amplitude{0, 1} * sy;

    auto const e2 = SpinState::basis(2, 0);
    auto const e1 = apply_normalized(lower, e2);
    auto const e3 = apply_normalized(lower, e1);

    double const h = 1.0 / std::numbers::sqrt2;
    auto comp_diff = [](Vector const& a, Vector const& b) {
        return (a - b).cwiseAbs().maxCoeff();
    };

    TripletReport r{{e1, e2, e3}, 0, 0, 0, 0, 0};
    r.psi_plus_residual = comp_diff(bell_ket(BellOutcome::PsiPlus).amplitudes(),
                                    e1.amplitudes());
    r.phi_minus_residual
        = comp_diff(bell_ket(BellOutcome::PhiMinus).amplitudes(),
                    h * (e2.amplitudes() - e3.amplitudes()));
    r.phi_plus_residual = comp_diff(bell_ket(BellOutcome::PhiPlus).amplitudes(),
                                    h * (e2.amplitudes() + e3.amplitudes()));

    std::array<SpinState const*, 3> es = {&e1, &e2, &e3};
    for (std::size_t i = 0; i < 3; ++i)
    {
        for (std::size_t j = 0; j < 3; ++j)
        {
            double const expect = (i == j) ? 1.0 : 0.0;
            r.orthonormality_residual
                = std::max(r.orthonormality_residual,
                           std::abs(inner(*es[i], *es[j]) - expect));
        }
    }

    auto const s2 = total_spin_squared(2);
    std::array<double, 3> const m = {0.0, 1.0, -1.0};
    for (std::size_t i = 0; i < 3; ++i)
    {
        auto const& v = es[i]->amplitudes();
        r.eigen_residual = std::max(
            {r.eigen_residual,
             (s2.matrix() * v - 2.0 * v).cwiseAbs().maxCoeff(),
             (sz.matrix() * v - m[i] * v).cwiseAbs().maxCoeff()});
    }
    return r;
}

//---------------------------------------------------------------------------//
// Pi/2 rotations as permutations of the Bell states
//---------------------------------------------------------------------------//

enum class Axis
{
    x,
    y,
    z
};

inline UnitVector3 unit(Axis a)
{
    switch (a)
    {
        case Axis::x:
            return UnitVector3::x_axis();
        case Axis::y:
            return UnitVector3::y_axis();
        case Axis::z:
            return UnitVector3::z_axis();
    }
    throw Error("unknown axis");
}

struct PermutationReport
{
    Axis axis;
    //! image[i] is the Bell state that (R x R)|kBellOutcomes[i]> lands on.
    std::array<BellOutcome, 4> image;
    //! Overlap <image|R x R|input>; modulus 1 for a permutation.
    std::array<Amplitude, 4> overlap;
    bool is_permutation;  //!< every image unique and with modulus 1
    bool singlet_invariant;  //!< Psi- maps to itself
};

/*!
 * Apply a pi/2 rotation about a coordinate axis to both spins and identify
 * the image of each Bell state. Overlap moduli are matched within 1e-9.
 */
inline PermutationReport rotation_permutation(Axis axis)
{
    constexpr double tol = 1e-9;
    auto const r = rotation(unit(axis), std::numbers::pi / 2);
    auto const rr = tensor(r, r);

    PermutationReport rep{axis, {}, {}, true, false};
    std::array<bool, 4> used{};
    for (std::size_t i = 0; i < 4; ++i)
    {
        auto const rotated = apply_normalized(rr, bell_ket(kBellOutcomes[i]));
        std::optional<std::size_t> hit;
        for (std::size_t j = 0; j < 4; ++j)
        {
            Amplitude const ov = inner(bell_ket(kBellOutcomes[j]), rotated);
            if (std::abs(std::abs(ov) - 1.0) <= tol)
            {
                hit = j;
                rep.overlap[i] = ov;
            }
        }
        if (!hit || used[*hit])
        {
            rep.is_permutation = false;
            rep.image[i] = kBellOutcomes[i];
            continue;
        }
        used[*hit] = true;
        rep.image[i] = kBellOutcomes[*hit];
    }
    rep.singlet_invariant = rep.is_permutation
                            && rep.image[index_of(BellOutcome::PsiMinus)]
                                   == BellOutcome::PsiMinus;
    return rep;
}

//---------------------------------------------------------------------------//
// Correlations
//---------------------------------------------------------------------------//

/*!
 * Exact probability that particle 0 measured along axis1 and particle 1
 * measured along axis2 give opposite projections (sum zero).
 */
inline double correlation_probability(SpinState const& state,
                                      UnitVector3 const& axis1,
                                      UnitVector3 const& axis2)
{
    if (state.n_particles() != 2)
    {
        throw Error("correlation_probability needs a two-particle state");
    }
    double p = 0;
    for (int sign : {+1, -1})
    {
        Vector v = state.amplitudes();
        apply_local(projection_projector(axis1, sign), 0, 2, v);
        apply_local(projection_projector(axis2, -sign), 1, 2, v);
        p += v.squaredNorm();
    }
    return p;
}

//! Measure particle 0 then particle 1 along the given axes; true if the
//! projections are opposite.
inline bool sample_anticorrelated(SpinState const& state,
                                  UnitVector3 const& axis1,
                                  UnitVector3 const& axis2,
                                  RandomStream& rng)
{
    auto const first = measure_projection(state, 0, axis1, rng);
    auto const second = measure_projection(first.collapsed, 1, axis2, rng);
    return first.value + second.value == 0.0;
}

//---------------------------------------------------------------------------//
// Discrimination
//---------------------------------------------------------------------------//

struct Discrimination
{
    BellOutcome estimate;
    /*!
     * 1 - 2^-k, where k counts rounds whose outcome agreed with the majority
     * decision on their axis. A simple bound, not a posterior.
     */
    double confidence;
    int z_rounds = 0;
    int z_anticorrelated = 0;
    int x_rounds = 0;
    int x_anticorrelated = 0;
};

/*!
 * Identify a Bell state from `copies` identically prepared pairs.
 *
 * Even-numbered copies are measured on both particles along z, odd-numbered
 * along x. z anticorrelation selects {Psi-, Psi+} over {Phi-, Phi+}; x
 * anticorrelation then selects Psi- (resp. Phi-) over Psi+ (resp. Phi+).
 * Ties and missing rounds resolve to the anticorrelated branch.
 *
 * `source` is any callable returning a two-particle SpinState.
 */
template<std::invocable Source>
Discrimination discriminate_bell(Source&& source, int copies, RandomStream& rng)
{
    if (copies < 1)
    {
        throw Error("discriminate_bell: empty stream of copies");
    }
    auto const z = UnitVector3::z_axis();
    auto const x = UnitVector3::x_axis();

    Discrimination d{BellOutcome::PsiMinus, 0.0};
    for (int i = 0; i < copies; ++i)
    {
        SpinState const copy = source();
        if (copy.n_particles() != 2)
        {
            throw Error("discriminate_bell: copies must be two-particle states");
        }
        bool const on_z = (i % 2 == 0);
        bool const anti = sample_anticorrelated(copy, on_z ? z : x, on_z ? z : x, rng);
        if (on_z)
        {
            ++d.z_rounds;
            d.z_anticorrelated += anti;
        }
        else
        {
            ++d.x_rounds;
            d.x_anticorrelated += anti;
        }
    }

    bool const z_anti = 2 * d.z_anticorrelated >= d.z_rounds;
    bool const x_anti = 2 * d.x_anticorrelated >= d.x_rounds;
    if (z_anti)
    {
        d.estimate = x_anti ? BellOutcome::PsiMinus : BellOutcome::PsiPlus;
    }
    else
    {
        d.estimate = x_anti ? BellOutcome::PhiMinus : BellOutcome::PhiPlus;
    }

    int const agree
        = (z_anti ? d.z_anticorrelated : d.z_rounds - d.z_anticorrelated)
          + (x_anti ? d.x_anticorrelated : d.x_rounds - d.x_anticorrelated);
    d.confidence = 1.0 - std::ldexp(1.0, -agree);
    return d;
}

//! Discriminate using `copies` copies of one known-prepared state.
inline Discrimination
discriminate_bell(SpinState const& state, int copies, RandomStream& rng)
{
    return discriminate_bell([&state] { return state; }, copies, rng);
}

}  // namespace spinport
