// SPDX-License-Identifier: Apache-2.0
//! \file spinport/expsim.hpp
//! Event-level Monte Carlo of the two-target proton teleportation layout.
//!
//! A beam proton scatters in the LH2 target into a singlet pair (p2, p3).
//! p3 flies to the polarized PH2 target, where scattering on a target proton
//! p1 acts as a Bell filter on (p1, p3) and detector F-1 registers the event.
//! p2 flies to the analyzer C (point K), scatters left or right with a
//! polarization-dependent asymmetry and is registered by F-2. Detector
//! timestamps are paired by a coincidence window and audited for causal
//! separation.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "bell_basis.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "scattering.hpp"
#include "spin_core.hpp"
#include "teleport.hpp"

namespace spinport
{
inline constexpr double kSpeedOfLight = 299792458.0;  // [m/s]
inline constexpr double kProtonMassMeV = 938.272;

//! Speed of a proton with kinetic energy T: c sqrt(1 - (m / (m + T))^2).
inline double proton_speed(double kinetic_mev)
{
    if (!(kinetic_mev > 0))
    {
        throw Error("kinetic energy must be positive");
    }
    double const r = kProtonMassMeV / (kProtonMassMeV + kinetic_mev);
    return kSpeedOfLight * std::sqrt(1.0 - r * r);
}

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//

using Point3 = Eigen::Vector3d;

struct GeometryConfig
{
    Point3 lh2{0.0, 0.0, 0.0};  //!< pair source [m]
    Point3 ph2{5.0, 5.0, 0.0};  //!< polarized target, x0 [m]
    Point3 analyzer{5.0, -5.0, 0.0};  //!< carbon analyzer C / point K, x1 [m]
    Point3 f1{6.0, 6.0, 0.0};  //!< detector F-1 [m]
    Point3 f2{6.0, -6.0, 0.0};  //!< detector F-2 [m]
    double beam_energy_mev = 30.0;
    double coincidence_window_s = 10e-9;

    //! Throws if any two points coincide, the energy is outside (0, 1000) MeV
    //! or the window is not positive.
    void validate() const
    {
        std::array<std::pair<char const*, Point3 const*>, 5> const pts{
            {{"lh2", &lh2},
             {"ph2", &ph2},
             {"analyzer", &analyzer},
             {"f1", &f1},
             {"f2", &f2}}};
        for (std::size_t i = 0; i < pts.size(); ++i)
        {
            if (!pts[i].second->allFinite())
            {
                throw Error(std::string("geometry point ") + pts[i].first
                            + " is not finite");
            }
            for (std::size_t j = 0; j < i; ++j)
            {
                if (!((*pts[i].second - *pts[j].second).norm() > 0))
                {
                    throw Error(std::string("geometry points ") + pts[j].first
                                + " and " + pts[i].first + " coincide");
                }
            }
        }
        if (!(beam_energy_mev > 0 && beam_energy_mev < 1000))
        {
            throw Error("beam energy must be in (0, 1000) MeV");
        }
        if (!(coincidence_window_s > 0))
        {
            throw Error("coincidence window must be positive");
        }
    }

    double detector_separation() const { return (f1 - f2).norm(); }
};

struct AnalyzerModel
{
    double analyzing_power = 0.5;

    void validate() const
    {
        if (!(std::abs(analyzing_power) <= 1.0))
        {
            throw Error("analyzing power must lie in [-1, 1]");
        }
    }
};

struct PolarizedTarget
{
    UnknownState state{1.0, 0.0};
};

struct DetectorModel
{
    double efficiency_f1 = 1.0;
    double efficiency_f2 = 1.0;
    double jitter_s = 0.0;  //!< Gaussian timestamp sigma at F-1 and F-2

    void validate() const
    {
        if (!(efficiency_f1 >= 0 && efficiency_f1 <= 1 && efficiency_f2 >= 0
              && efficiency_f2 <= 1))
        {
            throw Error("detector efficiencies must lie in [0, 1]");
        }
        if (!(jitter_s >= 0))
        {
            throw Error("timestamp jitter must be non-negative");
        }
    }
};

struct ExperimentSetup
{
    GeometryConfig geometry;
    PolarizedTarget target;
    SpinOperator filter = bell_projector(BellOutcome::PsiMinus);
    AnalyzerModel analyzer;
    DetectorModel detectors;
    //! Fraction of beam protons that produce a singlet pair toward both
    //! targets at 90 deg c.m.
    double singlet_fraction = 1.0;
    //! Mean spacing of beam protons (exponential inter-arrival) [s].
    double beam_interval_s = 1e-6;
    //! Expected t_F2 - t_F1 subtracted before applying the window [s].
    double coincidence_delay_s = 0.0;
    //! Outcome the summary conditions on.
    BellOutcome summary_outcome = BellOutcome::PsiMinus;
    //! Also require causal separation for events entering the summary.
    bool require_causal = false;

    void validate() const
    {
        geometry.validate();
        analyzer.validate();
        detectors.validate();
        if (filter.n_particles() != 2)
        {
            throw Error("Bell filter must act on two particles");
        }
        if (!(singlet_fraction >= 0 && singlet_fraction <= 1))
        {
            throw Error("singlet fraction must lie in [0, 1]");
        }
        if (!(beam_interval_s > 0))
        {
            throw Error("beam interval must be positive");
        }
        if (!std::isfinite(coincidence_delay_s))
        {
            throw Error("coincidence delay must be finite");
        }
    }
};

//---------------------------------------------------------------------------//
// Events
//---------------------------------------------------------------------------//

enum class Side
{
    Left,
    Right
};

inline constexpr char const* to_string(Side s)
{
    return s == Side::Left ? "Left" : "Right";
}

//! Analyzer normals cycled by event id.
inline std::array<UnitVector3, 3> analyzer_normals()
{
    return {UnitVector3::x_axis(), UnitVector3::y_axis(), UnitVector3::z_axis()};
}

struct EventRecord
{
    std::uint64_t id = 0;
    double t_emit = 0;  //!< pair creation at LH2 [s]
    double t_ph2 = 0;  //!< p3 at PH2
    double t_k = 0;  //!< p2 at the analyzer
    double t_f1_true = 0;
    double t_f2_true = 0;
    double t_f1 = 0;  //!< F-1 timestamp including jitter
    double t_f2 = 0;  //!< F-2 timestamp including jitter
    bool produced = false;
    bool detected_f1 = false;
    bool detected_f2 = false;
    std::optional<BellOutcome> outcome;  //!< empty: no filter event
    std::optional<Side> side;
    int normal_index = 0;
    bool causal_separated = false;
    bool accepted = false;  //!< F-1 and F-2 records paired with each other
};

//! |dx| > c |dt|, no tolerance.
inline bool causally_separated(double dx, double t1, double t2)
{
    return dx > kSpeedOfLight * std::abs(t1 - t2);
}

//---------------------------------------------------------------------------//
// Analyzer and asymmetry
//---------------------------------------------------------------------------//

//! P(Left) = (1 + A p_n) / 2 with p_n = 2 <S . normal>.
inline double left_probability(SpinState const& spin,
                               AnalyzerModel const& model,
                               UnitVector3 const& normal)
{
    if (spin.n_particles() != 1)
    {
        throw Error("analyzer takes a single spin");
    }
    double const pn = expectation(spin, SpinOperator{1, pauli::along(normal)});
    return 0.5 * (1.0 + model.analyzing_power * pn);
}

inline Side analyzer_scatter(SpinState const& spin,
                             AnalyzerModel const& model,
                             UnitVector3 const& normal,
                             RandomStream& rng)
{
    return rng.uniform() < left_probability(spin, model, normal) ? Side::Left
                                                                 : Side::Right;
}

struct Asymmetry
{
    double epsilon;
    double sigma;
};

//! (N_L - N_R)/(N_L + N_R) with binomial error sqrt((1 - eps^2)/N).
inline Asymmetry asymmetry(std::uint64_t n_left, std::uint64_t n_right)
{
    double const n = double(n_left) + double(n_right);
    if (!(n > 0))
    {
        throw Error("asymmetry of zero counts");
    }
    double const eps = (double(n_left) - double(n_right)) / n;
    return {eps, std::sqrt(std::max(0.0, 1.0 - eps * eps) / n)};
}

//---------------------------------------------------------------------------//
// Coincidences and causality
//---------------------------------------------------------------------------//

struct TimedRecord
{
    std::uint64_t id;
    double t;
};

struct CoincidenceResult
{
    //! Matched (F-1 id, F-2 id), ordered by F-1 time.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
    std::size_t dropped_f1 = 0;
    std::size_t dropped_f2 = 0;
};

/*!
 * Greedy nearest-in-time pairing.
 *
 * Candidates are all (i, j) with |t2_j - t1_i - delay| <= window. They are
 * taken in order of increasing |t2_j - t1_i - delay|, ties broken by (i, j),
 * and accepted when neither record is already used. Streams must be sorted
 * by time.
 */
inline CoincidenceResult coincidence_match(std::vector<TimedRecord> const& f1,
                                           std::vector<TimedRecord> const& f2,
                                           double window,
                                           double delay = 0.0)
{
    if (!(window > 0))
    {
        throw Error("coincidence window must be positive");
    }
    auto by_time = [](TimedRecord const& a, TimedRecord const& b) {
        return a.t < b.t;
    };
    if (!std::is_sorted(f1.begin(), f1.end(), by_time)
        || !std::is_sorted(f2.begin(), f2.end(), by_time))
    {
        throw Error("coincidence streams must be sorted by time");
    }

    std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < f1.size(); ++i)
    {
        double const centre = f1[i].t + delay;
        while (lo < f2.size() && f2[lo].t < centre - window)
        {
            ++lo;
        }
        for (std::size_t j = lo; j < f2.size() && f2[j].t <= centre + window;
             ++j)
        {
            double const d = std::abs(f2[j].t - centre);
            if (d <= window)
            {
                cand.emplace_back(d, i, j);
            }
        }
    }
    std::sort(cand.begin(), cand.end());

    std::vector<bool> used1(f1.size()), used2(f2.size());
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (auto const& [d, i, j] : cand)
    {
        if (used1[i] || used2[j])
        {
            continue;
        }
        used1[i] = used2[j] = true;
        idx.emplace_back(i, j);
    }
    std::sort(idx.begin(), idx.end());

    CoincidenceResult r;
    r.pairs.reserve(idx.size());
    for (auto const& [i, j] : idx)
    {
        r.pairs.emplace_back(f1[i].id, f2[j].id);
    }
    r.dropped_f1 = f1.size() - idx.size();
    r.dropped_f2 = f2.size() - idx.size();
    return r;
}

//! Events whose F-1/F-2 timestamps satisfy |x_F1 - x_F2| > c |t_F1 - t_F2|.
inline std::vector<EventRecord>
causal_filter(std::vector<EventRecord> const& events,
              GeometryConfig const& geometry)
{
    double const dx = geometry.detector_separation();
    std::vector<EventRecord> out;
    std::copy_if(events.begin(), events.end(), std::back_inserter(out),
                 [dx](EventRecord const& e) {
                     return causally_separated(dx, e.t_f1, e.t_f2);
                 });
    return out;
}

//---------------------------------------------------------------------------//
// Event generation
//---------------------------------------------------------------------------//

/*!
 * Prepared per-run state shared by all events (read-only).
 */
class EventGenerator
{
  public:
    explicit EventGenerator(ExperimentSetup setup)
        : setup_{(setup.validate(), std::move(setup))}
        , filter_{setup_.filter, 3, {kTarget, kPartner}}
        , speed_{proton_speed(setup_.geometry.beam_energy_mev)}
        , normals_{analyzer_normals()}
    {
        auto const& g = setup_.geometry;
        leg_lh2_ph2_ = (g.ph2 - g.lh2).norm() / speed_;
        leg_ph2_f1_ = (g.f1 - g.ph2).norm() / speed_;
        leg_lh2_k_ = (g.analyzer - g.lh2).norm() / speed_;
        leg_k_f2_ = (g.f2 - g.analyzer).norm() / speed_;
    }

    ExperimentSetup const& setup() const { return setup_; }
    double speed() const { return speed_; }

    /*!
     * Simulate one beam proton emitted at t_emit.
     *
     * Draw order on the event stream: pair production, Bell filter (only if
     * produced), F-1 efficiency, analyzer side, F-2 efficiency, F-1 jitter,
     * F-2 jitter.
     */
    EventRecord
    generate(std::uint64_t id, double t_emit, RandomStream& rng) const
    {
        EventRecord ev;
        ev.id = id;
        ev.normal_index = static_cast<int>(id % 3);
        ev.t_emit = t_emit;
        ev.t_ph2 = t_emit + leg_lh2_ph2_;
        ev.t_f1_true = ev.t_ph2 + leg_ph2_f1_;
        ev.t_k = t_emit + leg_lh2_k_;
        ev.t_f2_true = ev.t_k + leg_k_f2_;

        ev.produced = rng.bernoulli(setup_.singlet_fraction);
        if (ev.produced)
        {
            auto const three
                = compose_three(setup_.target.state, make_epr(BellOutcome::PsiMinus));
            auto const hit = filter_(three, rng);
            double p_left = 0.5;  // p2 alone is unpolarized without a filter event
            if (hit)
            {
                ev.outcome = hit->outcome;
                auto const p2 = conditional_state_2(hit->post_state, hit->outcome);
                p_left = left_probability(
                    p2, setup_.analyzer,
                    normals_[static_cast<std::size_t>(ev.normal_index)]);
            }
            ev.detected_f1
                = ev.outcome.has_value()
                  && rng.bernoulli(setup_.detectors.efficiency_f1);
            ev.side = rng.uniform() < p_left ? Side::Left : Side::Right;
            ev.detected_f2 = rng.bernoulli(setup_.detectors.efficiency_f2);
        }

        double const jitter = setup_.detectors.jitter_s;
        ev.t_f1 = ev.t_f1_true + (jitter > 0 ? jitter * rng.normal() : 0.0);
        ev.t_f2 = ev.t_f2_true + (jitter > 0 ? jitter * rng.normal() : 0.0);
        ev.causal_separated = causally_separated(
            setup_.geometry.detector_separation(), ev.t_f1, ev.t_f2);
        return ev;
    }

  private:
    ExperimentSetup setup_;
    BellFilter filter_;
    double speed_;
    std::array<UnitVector3, 3> normals_;
    double leg_lh2_ph2_ = 0;
    double leg_ph2_f1_ = 0;
    double leg_lh2_k_ = 0;
    double leg_k_f2_ = 0;
};

//! One event at t_emit = 0 on the stream (seed, id).
inline EventRecord generate_event(ExperimentSetup const& setup,
                                  std::uint64_t id,
                                  RandomStream& rng)
{
    return EventGenerator{setup}.generate(id, 0.0, rng);
}

//---------------------------------------------------------------------------//
// Run and summary
//---------------------------------------------------------------------------//

struct AxisAsymmetry
{
    std::uint64_t n_left = 0;
    std::uint64_t n_right = 0;
    double epsilon = 0;
    double sigma = 0;
    bool valid = false;
};

struct ExperimentSummary
{
    std::uint64_t generated = 0;
    std::uint64_t produced = 0;
    std::uint64_t no_event = 0;  //!< produced, but the filter gave no event
    std::array<std::uint64_t, 4> outcome_counts{};
    std::uint64_t detected_f1 = 0;
    std::uint64_t detected_f2 = 0;
    std::uint64_t matched_pairs = 0;
    std::uint64_t true_coincidences = 0;
    std::uint64_t accidental_coincidences = 0;
    std::uint64_t dropped_f1 = 0;
    std::uint64_t dropped_f2 = 0;

    BellOutcome conditioned_on = BellOutcome::PsiMinus;
    bool require_causal = false;
    std::uint64_t selected = 0;
    double analyzing_power = 0;
    std::array<AxisAsymmetry, 3> asymmetry;
    Eigen::Vector3d polarization = Eigen::Vector3d::Zero();
    Eigen::Vector3d polarization_sigma = Eigen::Vector3d::Zero();
    bool polarization_valid = false;

    std::uint64_t causal_retained = 0;  //!< causal_filter over all events
    double causal_fraction = 0;
    std::uint64_t causal_accepted = 0;  //!< accepted and causal

    bool degenerate = false;
    std::string warning;
};

struct ExperimentResult
{
    std::vector<EventRecord> events;
    ExperimentSummary summary;
};

/*!
 * Aggregate events: coincidence matching, causal audit, asymmetries and the
 * reconstructed polarization p_i = epsilon_i / analyzing_power.
 */
inline ExperimentSummary summarize(std::vector<EventRecord>& events,
                                   ExperimentSetup const& setup)
{
    ExperimentSummary s;
    s.generated = events.size();
    s.conditioned_on = setup.summary_outcome;
    s.require_causal = setup.require_causal;
    s.analyzing_power = setup.analyzer.analyzing_power;

    std::vector<TimedRecord> f1, f2;
    for (auto const& e : events)
    {
        s.produced += e.produced;
        if (e.produced && !e.outcome)
        {
            ++s.no_event;
        }
        if (e.outcome)
        {
            ++s.outcome_counts[index_of(*e.outcome)];
        }
        if (e.detected_f1)
        {
            f1.push_back({e.id, e.t_f1});
        }
        if (e.detected_f2)
        {
            f2.push_back({e.id, e.t_f2});
        }
    }
    s.detected_f1 = f1.size();
    s.detected_f2 = f2.size();

    auto order = [](TimedRecord const& a, TimedRecord const& b) {
        return std::tie(a.t, a.id) < std::tie(b.t, b.id);
    };
    std::sort(f1.begin(), f1.end(), order);
    std::sort(f2.begin(), f2.end(), order);
    auto const match = coincidence_match(f1, f2,
                                         setup.geometry.coincidence_window_s,
                                         setup.coincidence_delay_s);
    s.matched_pairs = match.pairs.size();
    s.dropped_f1 = match.dropped_f1;
    s.dropped_f2 = match.dropped_f2;

    // Event ids equal their position in `events`.
    for (auto const& [i1, i2] : match.pairs)
    {
        if (i1 == i2)
        {
            events[i1].accepted = true;
            ++s.true_coincidences;
        }
        else
        {
            ++s.accidental_coincidences;
        }
    }

    s.causal_retained = causal_filter(events, setup.geometry).size();
    s.causal_fraction
        = events.empty() ? 0.0 : double(s.causal_retained) / double(events.size());

    for (auto const& e : events)
    {
        s.causal_accepted += e.accepted && e.causal_separated;
        bool const selected = e.accepted && e.outcome
                              && *e.outcome == setup.summary_outcome
                              && (!setup.require_causal || e.causal_separated);
        if (!selected || !e.side)
        {
            continue;
        }
        ++s.selected;
        auto& ax = s.asymmetry[static_cast<std::size_t>(e.normal_index)];
        (*e.side == Side::Left ? ax.n_left : ax.n_right) += 1;
    }

    s.polarization_valid = s.analyzing_power != 0.0;
    for (std::size_t i = 0; i < 3; ++i)
    {
        auto& ax = s.asymmetry[i];
        if (ax.n_left + ax.n_right == 0)
        {
            s.polarization_valid = false;
            continue;
        }
        auto const a = asymmetry(ax.n_left, ax.n_right);
        ax.epsilon = a.epsilon;
        ax.sigma = a.sigma;
        ax.valid = true;
        if (s.analyzing_power != 0.0)
        {
            s.polarization[static_cast<Eigen::Index>(i)]
                = a.epsilon / s.analyzing_power;
            s.polarization_sigma[static_cast<Eigen::Index>(i)]
                = a.sigma / std::abs(s.analyzing_power);
        }
    }

    if (s.selected == 0)
    {
        s.degenerate = true;
        s.warning = "no accepted events with outcome "
                    + std::string(to_string(setup.summary_outcome));
    }
    else if (!s.polarization_valid)
    {
        s.degenerate = true;
        s.warning = s.analyzing_power == 0.0
                        ? "analyzing power is zero; polarization not reconstructed"
                        : "an analyzer orientation has no accepted events";
    }
    return s;
}

/*!
 * Generate `n_events` events and summarize them.
 *
 * Event k uses the stream (seed, k, experiment domain); its emission time is
 * the running sum of exponential inter-arrival gaps drawn from the streams
 * (seed, j, beam-clock domain), j <= k. Output is identical for any thread
 * count.
 */
inline ExperimentResult run_experiment(ExperimentSetup const& setup,
                                       std::uint64_t n_events,
                                       std::uint64_t seed,
                                       unsigned threads = 1)
{
    if (n_events < 1)
    {
        throw Error("experiment needs at least one event");
    }
    EventGenerator const gen{setup};

    std::vector<double> t_emit(n_events);
    double t = 0;
    for (std::uint64_t k = 0; k < n_events; ++k)
    {
        auto clock = make_stream(seed, k, StreamDomain::beam_clock);
        t += clock.exponential(setup.beam_interval_s);
        t_emit[k] = t;
    }

    ExperimentResult r;
    r.events.resize(n_events);
    parallel_for(n_events, threads, [&](std::size_t k) {
        auto rng = make_stream(seed, k, StreamDomain::experiment);
        r.events[k] = gen.generate(k, t_emit[k], rng);
    });
    r.summary = summarize(r.events, setup);
    return r;
}

}  // namespace spinport
