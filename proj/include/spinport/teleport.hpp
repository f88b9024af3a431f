// SPDX-License-Identifier: Apache-2.0
//! \file spinport/teleport.hpp
//! Spin-state teleportation: EPR ancilla, Bell measurement on particles 1 and
//! 3, the two-bit classical message, and the receiver's correction.
//!
//! Three-particle registers use index 0 for particle 1 (the target spin to be
//! teleported), index 1 for particle 2 (the traveler that receives the state)
//! and index 2 for particle 3 (its EPR partner).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "bell_basis.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "scattering.hpp"
#include "spin_core.hpp"

namespace spinport
{
inline constexpr int kTarget = 0;
inline constexpr int kTraveler = 1;
inline constexpr int kPartner = 2;

//---------------------------------------------------------------------------//
/*!
 * The unknown state a|up> + b|down> to be teleported.
 */
class UnknownState
{
  public:
    UnknownState(Amplitude a, Amplitude b) : a_{a}, b_{b}
    {
        if (!is_finite(a) || !is_finite(b))
        {
            throw Error("unknown state amplitudes must be finite");
        }
        double const norm2 = std::norm(a) + std::norm(b);
        if (std::abs(norm2 - 1.0) > kExactTol)
        {
            throw Error("unknown state must satisfy |a|^2 + |b|^2 = 1");
        }
    }

    //! Normalizes (a, b).
    static UnknownState normalized(Amplitude a, Amplitude b)
    {
        double const n = std::sqrt(std::norm(a) + std::norm(b));
        if (!(n > kZeroNorm) || !std::isfinite(n))
        {
            throw Error("cannot normalize a zero unknown state");
        }
        return {a / n, b / n};
    }

    //! Pure state whose polarization points along `direction`.
    static UnknownState from_bloch(UnitVector3 const& direction)
    {
        double const theta = std::acos(std::clamp(direction.z(), -1.0, 1.0));
        double const phi = std::atan2(direction.y(), direction.x());
        return normalized(std::cos(theta / 2),
                          std::polar(std::sin(theta / 2), phi));
    }

    Amplitude a() const { return a_; }
    Amplitude b() const { return b_; }

    SpinState ket() const { return SpinState::qubit(a_, b_); }

    //! Polarization (2<S>) as a 3-vector.
    Eigen::Vector3d bloch() const
    {
        Amplitude const ab = std::conj(a_) * b_;
        return {2 * ab.real(), 2 * ab.imag(), std::norm(a_) - std::norm(b_)};
    }

  private:
    Amplitude a_;
    Amplitude b_;
};

//! Bell state of particles 2 and 3; the singlet by default.
inline SpinState make_epr(BellOutcome which = BellOutcome::PsiMinus)
{
    return bell_ket(which);
}

//! |phi_1> (x) |epr_23>
inline SpinState compose_three(UnknownState const& phi, SpinState const& epr)
{
    if (epr.n_particles() != 2)
    {
        throw Error("EPR ancilla must be a two-particle state");
    }
    return tensor(phi.ket(), epr);
}

//---------------------------------------------------------------------------//
/*!
 * Two-bit classical message announcing the Bell outcome on particles 1, 3.
 */
struct ClassicalMessage
{
    BellOutcome outcome;
    double emission_time = 0;  //!< [s]

    unsigned bits() const { return code(outcome); }
};

/*!
 * Particle 2 in flight, before the classical message has arrived.
 *
 * The corrected state is only reachable through `correct`, which requires a
 * message.
 */
class PendingQubit
{
  public:
    explicit PendingQubit(SpinState state) : state_{std::move(state)}
    {
        if (state_.n_particles() != 1)
        {
            throw Error("pending qubit must be a single spin");
        }
    }

    //! Uncorrected state of particle 2.
    SpinState const& raw() const { return state_; }

    SpinState correct(ClassicalMessage const& msg, SpinOperator const& u) const
    {
        (void)msg;
        return apply_normalized(u, state_);
    }

  private:
    SpinState state_;
};

struct BellMeasurement
{
    ClassicalMessage message;
    PendingQubit conditional_2;
    double probability;
};

namespace detail
{
//! Particle-2 amplitudes left after projecting (1, 3) onto `bell`, with the
//! projection's Born weight.
inline std::pair<Vector, double>
conditional_traveler(SpinState const& state3, BellOutcome bell)
{
    Vector v = partial_inner(bell_ket(bell), {kTarget, kPartner}, state3);
    double const w = v.squaredNorm();
    return {std::move(v), w};
}
}  // namespace detail

//! Born probabilities of the four Bell outcomes on particles (1, 3).
inline std::array<double, 4> bell_probabilities_13(SpinState const& state3)
{
    if (state3.n_particles() != 3)
    {
        throw Error("Bell measurement needs a three-particle state");
    }
    std::array<double, 4> p;
    for (std::size_t i = 0; i < 4; ++i)
    {
        p[i] = detail::conditional_traveler(state3, kBellOutcomes[i]).second;
    }
    return p;
}

//! Conditional state of particle 2 given a Bell outcome on (1, 3).
inline SpinState conditional_state_2(SpinState const& state3, BellOutcome bell)
{
    auto [v, w] = detail::conditional_traveler(state3, bell);
    if (std::sqrt(w) <= kZeroNorm)
    {
        throw ZeroNormError("Bell outcome has zero probability");
    }
    return {1, std::move(v)};
}

/*!
 * Ideal Bell measurement on particles 1 and 3, sampled with Born weights.
 */
inline BellMeasurement
bell_measure_13(SpinState const& state3, RandomStream& rng)
{
    auto const p = bell_probabilities_13(state3);
    double const u = rng.uniform() * (p[0] + p[1] + p[2] + p[3]);
    double acc = 0;
    std::size_t pick = 4;
    for (std::size_t i = 0; i < 4; ++i)
    {
        if (std::sqrt(p[i]) <= kZeroNorm)
        {
            continue;
        }
        pick = i;
        acc += p[i];
        if (u < acc)
        {
            break;
        }
    }
    auto const outcome = kBellOutcomes[pick];
    return {ClassicalMessage{outcome},
            PendingQubit{conditional_state_2(state3, outcome)},
            p[pick]};
}

//---------------------------------------------------------------------------//
// Corrections
//---------------------------------------------------------------------------//

/*!
 * Receiver's unitary for a singlet ancilla.
 *
 *   PsiMinus -> 1
 *   PsiPlus  -> diag(1, -1)
 *   PhiMinus -> [[0, 1], [1, 0]]
 *   PhiPlus  -> [[0, 1], [1, 0]] * diag(1, -1) = [[0, -1], [1, 0]]
 *
 * With these phases PsiMinus, PsiPlus and PhiPlus restore a|up> + b|down>
 * exactly; PhiMinus restores it up to the global phase -1.
 */
inline SpinOperator correction_for(BellOutcome outcome)
{
    switch (outcome)
    {
        case BellOutcome::PsiMinus:
            return SpinOperator::identity(1);
        case BellOutcome::PsiPlus:
            return {1, pauli::z()};
        case BellOutcome::PhiMinus:
            return {1, pauli::x()};
        case BellOutcome::PhiPlus:
            return {1, pauli::x() * pauli::z()};
    }
    throw Error("unknown Bell outcome");
}

/*!
 * Receiver's unitary for an arbitrary Bell ancilla on (2, 3).
 *
 * The map from |phi_1> to the (scaled) conditional state of particle 2 is
 * linear and unitary; the correction is its inverse. For the singlet this
 * coincides with `correction_for(outcome)` up to global phase.
 */
inline SpinOperator correction_for(BellOutcome outcome, BellOutcome ancilla)
{
    if (ancilla == BellOutcome::PsiMinus)
    {
        return correction_for(outcome);
    }
    auto const epr = make_epr(ancilla);
    Matrix m(2, 2);
    for (int col = 0; col < 2; ++col)
    {
        UnknownState const basis = col == 0 ? UnknownState{1, 0}
                                            : UnknownState{0, 1};
        auto const three = compose_three(basis, epr);
        m.col(col) = 2.0 * partial_inner(bell_ket(outcome), {kTarget, kPartner},
                                         three);
    }
    return {1, m.adjoint()};
}

//---------------------------------------------------------------------------//
// Protocol
//---------------------------------------------------------------------------//

struct TeleportRecord
{
    UnknownState input;
    BellOutcome outcome;
    double outcome_probability;
    SpinState pre_correction;  //!< particle 2 before correction
    BellOutcome correction;  //!< correction_for(correction) was applied
    SpinState output;
    double fidelity;  //!< |<phi_in|phi_out>|^2
};

struct ProtocolOptions
{
    BellOutcome ancilla = BellOutcome::PsiMinus;
    //! Scattering operator acting on (1, 3) before detection; none means an
    //! ideal Bell measurement.
    std::optional<SpinOperator> filter;
};

/*!
 * Prepared form of the protocol for repeated trials.
 */
class TeleportEngine
{
  public:
    explicit TeleportEngine(ProtocolOptions options = {})
        : options_{std::move(options)}
    {
        if (options_.filter)
        {
            filter_.emplace(*options_.filter, 3,
                            std::array<int, 2>{kTarget, kPartner});
        }
        for (std::size_t i = 0; i < 4; ++i)
        {
            corrections_[i] = correction_for(kBellOutcomes[i], options_.ancilla);
        }
    }

    ProtocolOptions const& options() const { return options_; }

    //! One trial; nullopt when the filter produced no detector event.
    std::optional<TeleportRecord>
    run(UnknownState const& phi, RandomStream& rng) const
    {
        auto const three = compose_three(phi, make_epr(options_.ancilla));

        BellOutcome outcome;
        double prob;
        SpinState conditional = SpinState::up();
        if (filter_)
        {
            auto const hit = (*filter_)(three, rng);
            if (!hit)
            {
                return std::nullopt;
            }
            outcome = hit->outcome;
            prob = hit->probability;
            conditional = conditional_state_2(hit->post_state, outcome);
        }
        else
        {
            auto m = bell_measure_13(three, rng);
            outcome = m.message.outcome;
            prob = m.probability;
            conditional = m.conditional_2.raw();
        }

        ClassicalMessage const msg{outcome};
        PendingQubit const pending{conditional};
        auto output = pending.correct(msg, corrections_[index_of(outcome)]);
        double const fid = fidelity(phi.ket(), output);
        return TeleportRecord{phi,        outcome, prob, conditional,
                              outcome,    output,  fid};
    }

  private:
    ProtocolOptions options_;
    std::optional<BellFilter> filter_;
    std::array<SpinOperator, 4> corrections_{
        SpinOperator::identity(1), SpinOperator::identity(1),
        SpinOperator::identity(1), SpinOperator::identity(1)};
};

inline std::optional<TeleportRecord> run_protocol(
    UnknownState const& phi,
    RandomStream& rng,
    std::optional<SpinOperator> filter = std::nullopt)
{
    return TeleportEngine{ProtocolOptions{BellOutcome::PsiMinus,
                                          std::move(filter)}}
        .run(phi, rng);
}

//---------------------------------------------------------------------------//
// Batch runs
//---------------------------------------------------------------------------//

struct TeleportSummary
{
    std::size_t trials = 0;
    std::size_t discarded = 0;
    std::array<std::size_t, 4> histogram{};
    double min_fidelity = 1.0;
    double mean_fidelity = 0.0;
    std::array<double, 4> channel_min_fidelity{1.0, 1.0, 1.0, 1.0};
    std::array<double, 4> channel_mean_fidelity{};
};

/*!
 * Run `trials` independent trials. Trial i draws from the stream
 * (seed, i, teleport domain), so results do not depend on `threads`.
 */
inline TeleportSummary run_batch(TeleportEngine const& engine,
                                 UnknownState const& phi,
                                 std::size_t trials,
                                 std::uint64_t seed,
                                 unsigned threads = 1)
{
    std::vector<std::optional<TeleportRecord>> records(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        auto rng = make_stream(seed, i, StreamDomain::teleport);
        records[i] = engine.run(phi, rng);
    });

    TeleportSummary s;
    s.trials = trials;
    std::array<double, 4> channel_sum{};
    double sum = 0;
    std::size_t accepted = 0;
    for (auto const& r : records)
    {
        if (!r)
        {
            ++s.discarded;
            continue;
        }
        auto const k = index_of(r->outcome);
        ++s.histogram[k];
        ++accepted;
        sum += r->fidelity;
        channel_sum[k] += r->fidelity;
        s.min_fidelity = std::min(s.min_fidelity, r->fidelity);
        s.channel_min_fidelity[k]
            = std::min(s.channel_min_fidelity[k], r->fidelity);
    }
    s.mean_fidelity = accepted ? sum / double(accepted) : 0.0;
    for (std::size_t k = 0; k < 4; ++k)
    {
        s.channel_mean_fidelity[k]
            = s.histogram[k] ? channel_sum[k] / double(s.histogram[k]) : 0.0;
    }
    return s;
}

}  // namespace spinport
