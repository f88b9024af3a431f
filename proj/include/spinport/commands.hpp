// SPDX-License-Identifier: Apache-2.0
//! \file spinport/commands.hpp
//! Batch subcommands behind the `spinport` tool. Each returns the bytes of
//! its output files so that callers can write, compare or inspect them.
#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "amplitude_file.hpp"
#include "bell_basis.hpp"
#include "config.hpp"
#include "expsim.hpp"
#include "parallel.hpp"
#include "scattering.hpp"
#include "teleport.hpp"

namespace spinport
{
struct OutputFile
{
    std::string name;
    std::string contents;
};

struct CommandOutput
{
    int exit_code = 0;
    std::vector<OutputFile> files;
    std::string diagnostics;  //!< human-readable notes for stderr

    std::string const& file(std::string const& name) const
    {
        for (auto const& f : files)
        {
            if (f.name == name)
            {
                return f.contents;
            }
        }
        throw Error("command produced no file '" + name + "'");
    }
};

//! Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

using OrderedJson = nlohmann::ordered_json;

namespace detail
{
//! printf-style fixed formatting for CSV fields.
inline std::string fmt(char const* spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline OrderedJson complex_json(Amplitude z)
{
    return OrderedJson::array({z.real(), z.imag()});
}

inline OrderedJson vec_json(Eigen::Vector3d const& v)
{
    return OrderedJson::array({v.x(), v.y(), v.z()});
}

inline std::string dump(OrderedJson const& j)
{
    return j.dump(2) + "\n";
}
}  // namespace detail

//---------------------------------------------------------------------------//
// teleport
//---------------------------------------------------------------------------//

/*!
 * Run the protocol `trials` times; report the outcome histogram and
 * fidelities. Exit 0 iff the minimum fidelity is at least 1 - 1e-9.
 */
inline CommandOutput cmd_teleport(RunConfig const& cfg)
{
    auto const& tc = cfg.teleport;
    TeleportEngine const engine{ProtocolOptions{tc.ancilla, tc.filter}};
    auto const s = run_batch(engine, tc.state, tc.trials, cfg.seed, cfg.threads);

    std::size_t accepted = 0;
    for (auto h : s.histogram)
    {
        accepted += h;
    }
    bool const pass = accepted > 0 && s.min_fidelity >= 1.0 - 1e-9;

    OrderedJson j;
    j["command"] = "teleport";
    j["schema_version"] = kConfigSchemaVersion;
    j["seed"] = cfg.seed;
    j["input"] = {{"a", detail::complex_json(tc.state.a())},
                  {"b", detail::complex_json(tc.state.b())}};
    j["ancilla"] = std::string(to_string(tc.ancilla));
    j["filtered"] = tc.filter.has_value();
    j["trials"] = s.trials;
    j["accepted"] = accepted;
    j["discarded"] = s.discarded;
    OrderedJson hist, channels;
    for (auto o : kBellOutcomes)
    {
        auto const k = index_of(o);
        hist[std::string(to_string(o))] = s.histogram[k];
        channels[std::string(to_string(o))]
            = {{"count", s.histogram[k]},
               {"mean_fidelity", s.channel_mean_fidelity[k]},
               {"min_fidelity", s.channel_min_fidelity[k]}};
    }
    j["histogram"] = hist;
    j["fidelity"] = {{"mean", s.mean_fidelity},
                     {"min", s.min_fidelity},
                     {"per_channel", channels}};
    j["pass"] = pass;

    CommandOutput out;
    out.exit_code = pass ? kExitOk : kExitCheckFailed;
    out.files.push_back({"teleport.json", detail::dump(j)});
    if (!pass)
    {
        out.diagnostics = accepted == 0 ? "no accepted trials\n"
                                        : "minimum fidelity below 1 - 1e-9\n";
    }
    return out;
}

//---------------------------------------------------------------------------//
// scatter-check
//---------------------------------------------------------------------------//

struct CheckResult
{
    std::string name;
    bool passed;
    double max_residual;
    double tolerance;
    std::string detail;
};

/*!
 * Algebraic checks of a tabulated scattering operator.
 *
 *  - invariant_vs_bell: invariant form equals the Bell-projector form.
 *  - spectral: rows with E = F = 0 have the Bell kets as eigenvectors.
 *  - frame_covariance: rotating the frame equals conjugating by R (x) R.
 *  - identical_symmetry, F_zero, right_angle: identical nucleons only.
 */
inline std::vector<CheckResult>
scatter_checks(AmplitudeTable const& table,
               bool identical,
               double tol,
               double sym_tol)
{
    std::vector<CheckResult> checks;
    auto const frame = ScatterFrame::canonical();

    double equiv = 0, spectral = 0;
    std::size_t spectral_rows = 0;
    for (auto const& row : table.rows())
    {
        auto const coeffs = bell_coefficients(row.amps);
        auto const f_bell = build_f_bell(coeffs);
        equiv = std::max(equiv,
                         build_f_invariant(row.amps, frame).max_abs_diff(f_bell));
        if (std::abs(coeffs.E) <= tol && std::abs(coeffs.F) <= tol)
        {
            ++spectral_rows;
            for (auto o : kBellOutcomes)
            {
                auto const& v = bell_ket(o).amplitudes();
                spectral = std::max(
                    spectral,
                    (f_bell.matrix() * v - coeffs.projector_coefficient(o) * v)
                        .cwiseAbs()
                        .maxCoeff());
            }
        }
    }
    checks.push_back({"invariant_vs_bell", equiv < tol, equiv, tol, ""});
    checks.push_back({"spectral", spectral < tol, spectral, tol,
                      std::to_string(spectral_rows) + " rows with E = F = 0"});

    // Fixed generic rotation for the covariance check.
    auto const axis = UnitVector3::normalized(1.0, 2.0, 3.0);
    double const angle = 0.7;
    Eigen::Matrix3d const o3
        = Eigen::AngleAxisd(angle, axis.vec()).toRotationMatrix();
    ScatterFrame const rotated{UnitVector3::normalized(o3 * frame.lambda().vec()),
                               UnitVector3::normalized(o3 * frame.mu().vec()),
                               UnitVector3::normalized(o3 * frame.nu().vec())};
    auto const u1 = rotation(axis, angle);
    auto const u2 = tensor(u1, u1);
    double cov = 0;
    for (auto const& row : table.rows())
    {
        auto const f = build_f_invariant(row.amps, frame);
        auto const conj = u2 * f * u2.adjoint();
        cov = std::max(cov, build_f_invariant(row.amps, rotated).max_abs_diff(conj));
    }
    double const cov_tol = 1e-9;
    checks.push_back({"frame_covariance", cov < cov_tol, cov, cov_tol, ""});

    if (identical)
    {
        auto const sym = check_identical_symmetry(table);
        checks.push_back({"F_zero", sym.f_max <= sym_tol, sym.f_max, sym_tol,
                          sym.f_max <= sym_tol
                              ? ""
                              : "violates F=0 for identical nucleons"});
        auto sym_no_f = sym;
        sym_no_f.f_max = 0;
        auto const violations = sym_no_f.violations(sym_tol);
        std::string msg;
        for (auto const& v : violations)
        {
            msg += (msg.empty() ? "" : "; ") + v;
        }
        checks.push_back({"identical_symmetry", violations.empty(),
                          sym_no_f.max_residual(), sym_tol,
                          std::to_string(sym.pairs_checked) + " pairs"
                              + (msg.empty() ? "" : "; violated: " + msg)});

        auto const& rows = table.rows();
        double const half_pi = std::numbers::pi / 2;
        if (rows.size() == 1
            || (rows.front().theta <= half_pi && rows.back().theta >= half_pi))
        {
            auto const ra = right_angle_check(table);
            double const worst = std::max(ra.bcd_max, ra.operator_residual);
            checks.push_back({"right_angle", worst <= sym_tol, worst, sym_tol,
                              "b, c, d vanish and f reduces at theta = pi/2"});
        }
    }
    return checks;
}

inline CommandOutput cmd_scatter_check(RunConfig const& cfg,
                                       AmplitudeTable const& table)
{
    auto const& sc = cfg.scatter_check;
    bool const identical
        = sc.identical_nucleons.value_or(table.identical_nucleons());
    auto const checks
        = scatter_checks(table, identical, sc.tolerance, sc.symmetry_tolerance);

    bool all = true;
    OrderedJson arr = OrderedJson::array();
    std::string diag;
    for (auto const& c : checks)
    {
        all = all && c.passed;
        arr.push_back({{"name", c.name},
                       {"passed", c.passed},
                       {"max_residual", c.max_residual},
                       {"tolerance", c.tolerance},
                       {"detail", c.detail}});
        if (!c.passed)
        {
            diag += "check " + c.name + " failed: " + c.detail + "\n";
        }
    }
    OrderedJson j;
    j["command"] = "scatter-check";
    j["schema_version"] = kConfigSchemaVersion;
    j["amplitude_file"] = sc.amplitude_file;
    j["rows"] = table.rows().size();
    j["identical_nucleons"] = identical;
    j["checks"] = arr;
    j["pass"] = all;

    CommandOutput out;
    out.exit_code = all ? kExitOk : kExitCheckFailed;
    out.files.push_back({"scatter_check.json", detail::dump(j)});
    out.diagnostics = diag;
    return out;
}

//---------------------------------------------------------------------------//
// bellscan
//---------------------------------------------------------------------------//

struct BellScanRow
{
    double theta;
    double analytic;
    double mc_frequency;
    double mc_sigma;
};

/*!
 * Anticorrelation probability with both spins measured along an axis
 * tilted by theta from z toward x, on a grid of `points` angles in
 * [0, theta_max]. mc_sigma = max(sqrt(p(1 - p)/N), 1/N) with p the analytic
 * value; the floor is the resolution of a frequency from N samples.
 */
inline std::vector<BellScanRow>
bell_scan(BellScanConfig const& bc, std::uint64_t seed, unsigned threads)
{
    if (bc.points < 2)
    {
        throw Error("bell scan needs at least two grid points");
    }
    if (bc.samples < 1)
    {
        throw Error("bell scan needs at least one sample per point");
    }
    auto const state = bell_ket(bc.state);
    std::vector<BellScanRow> rows(bc.points);
    parallel_for(bc.points, threads, [&](std::size_t k) {
        double const theta
            = bc.theta_max * double(k) / double(bc.points - 1);
        auto const n = UnitVector3::tilted_from_z(theta);
        double const p = correlation_probability(state, n, n);
        auto rng = make_stream(seed, k, StreamDomain::bellscan);
        std::uint64_t hits = 0;
        for (std::uint64_t s = 0; s < bc.samples; ++s)
        {
            hits += sample_anticorrelated(state, n, n, rng);
        }
        double const N = double(bc.samples);
        double const sigma = std::max(
            std::sqrt(std::max(0.0, p * (1.0 - p)) / N), 1.0 / N);
        rows[k] = {theta, p, double(hits) / N, sigma};
    });
    return rows;
}

inline CommandOutput cmd_bellscan(RunConfig const& cfg)
{
    auto const rows = bell_scan(cfg.bellscan, cfg.seed, cfg.threads);
    std::string csv = "theta_radians,analytic_probability,mc_frequency,mc_sigma\n";
    int bad = 0;
    for (auto const& r : rows)
    {
        csv += detail::fmt("%.12f", r.theta) + ","
               + detail::fmt("%.12f", r.analytic) + ","
               + detail::fmt("%.12f", r.mc_frequency) + ","
               + detail::fmt("%.12f", r.mc_sigma) + "\n";
        bad += !(std::abs(r.mc_frequency - r.analytic) < 4.0 * r.mc_sigma);
    }
    CommandOutput out;
    out.files.push_back({"bellscan.csv", std::move(csv)});
    if (bad)
    {
        out.exit_code = kExitCheckFailed;
        out.diagnostics = std::to_string(bad)
                          + " rows deviate from the analytic law by 4 sigma "
                            "or more\n";
    }
    return out;
}

//---------------------------------------------------------------------------//
// experiment
//---------------------------------------------------------------------------//

inline std::string events_csv(std::vector<EventRecord> const& events)
{
    std::string csv = "event_id,t_f1_s,t_f2_s,outcome,side,causal,accepted\n";
    csv.reserve(csv.size() + events.size() * 72);
    for (auto const& e : events)
    {
        csv += std::to_string(e.id);
        csv += ',';
        csv += detail::fmt("%.15e", e.t_f1);
        csv += ',';
        csv += detail::fmt("%.15e", e.t_f2);
        csv += ',';
        csv += e.outcome ? std::string(to_string(*e.outcome)) : "none";
        csv += ',';
        csv += e.side ? to_string(*e.side) : "none";
        csv += e.causal_separated ? ",1" : ",0";
        csv += e.accepted ? ",1\n" : ",0\n";
    }
    return csv;
}

inline OrderedJson summary_json(ExperimentSummary const& s,
                                ExperimentSetup const& setup,
                                std::uint64_t seed)
{
    auto const normals = analyzer_normals();
    char const* axis_names[3] = {"x", "y", "z"};

    OrderedJson j;
    j["command"] = "experiment";
    j["schema_version"] = kConfigSchemaVersion;
    j["seed"] = seed;
    j["target_polarization"] = detail::vec_json(setup.target.state.bloch());
    j["analyzing_power"] = s.analyzing_power;
    j["proton_speed_m_per_s"] = proton_speed(setup.geometry.beam_energy_mev);

    OrderedJson outcomes;
    for (auto o : kBellOutcomes)
    {
        outcomes[std::string(to_string(o))] = s.outcome_counts[index_of(o)];
    }
    j["counts"] = {{"generated", s.generated},
                   {"produced", s.produced},
                   {"no_event", s.no_event},
                   {"outcomes", outcomes},
                   {"detected_f1", s.detected_f1},
                   {"detected_f2", s.detected_f2},
                   {"matched_pairs", s.matched_pairs},
                   {"true_coincidences", s.true_coincidences},
                   {"accidental_coincidences", s.accidental_coincidences},
                   {"dropped_f1", s.dropped_f1},
                   {"dropped_f2", s.dropped_f2},
                   {"selected", s.selected}};
    j["selection"] = {{"outcome", std::string(to_string(s.conditioned_on))},
                      {"require_causal", s.require_causal}};

    OrderedJson asym = OrderedJson::array();
    for (std::size_t i = 0; i < 3; ++i)
    {
        auto const& a = s.asymmetry[i];
        OrderedJson row{{"axis", axis_names[i]},
                        {"normal", detail::vec_json(normals[i].vec())},
                        {"n_left", a.n_left},
                        {"n_right", a.n_right}};
        row["epsilon"] = a.valid ? OrderedJson(a.epsilon) : OrderedJson();
        row["sigma"] = a.valid ? OrderedJson(a.sigma) : OrderedJson();
        asym.push_back(row);
    }
    j["asymmetry"] = asym;
    if (s.polarization_valid)
    {
        j["polarization"] = {{"value", detail::vec_json(s.polarization)},
                             {"sigma", detail::vec_json(s.polarization_sigma)}};
    }
    else
    {
        j["polarization"] = nullptr;
    }
    j["causal"] = {{"detector_separation_m", setup.geometry.detector_separation()},
                   {"retained", s.causal_retained},
                   {"total", s.generated},
                   {"fraction", s.causal_fraction},
                   {"accepted_and_causal", s.causal_accepted}};
    j["degenerate"] = s.degenerate;
    j["warning"] = s.warning;
    return j;
}

/*!
 * Invariants checked on every experiment run: leg times non-negative and
 * consistent with path lengths (1e-9 relative), causal flags equal to the
 * predicate, and accepted events detected at both detectors.
 */
inline std::vector<std::string>
experiment_violations(std::vector<EventRecord> const& events,
                      ExperimentSetup const& setup)
{
    std::vector<std::string> out;
    auto const& g = setup.geometry;
    double const v = proton_speed(g.beam_energy_mev);
    double const path1 = (g.ph2 - g.lh2).norm() + (g.f1 - g.ph2).norm();
    double const path2 = (g.analyzer - g.lh2).norm() + (g.f2 - g.analyzer).norm();
    double const dx = g.detector_separation();
    std::size_t timing = 0, causal = 0, accepted = 0;
    for (auto const& e : events)
    {
        double const l1 = e.t_ph2 - e.t_emit, l2 = e.t_f1_true - e.t_ph2;
        double const l3 = e.t_k - e.t_emit, l4 = e.t_f2_true - e.t_k;
        bool const ok = l1 >= 0 && l2 >= 0 && l3 >= 0 && l4 >= 0
                        && std::abs((l1 + l2) * v - path1) <= 1e-9 * path1
                        && std::abs((l3 + l4) * v - path2) <= 1e-9 * path2;
        timing += !ok;
        causal += e.causal_separated != causally_separated(dx, e.t_f1, e.t_f2);
        accepted += e.accepted && !(e.detected_f1 && e.detected_f2);
    }
    if (timing)
        out.push_back(std::to_string(timing) + " events with inconsistent leg times");
    if (causal)
        out.push_back(std::to_string(causal) + " events with a wrong causal flag");
    if (accepted)
        out.push_back(std::to_string(accepted)
                      + " accepted events missing a detector hit");
    return out;
}

inline CommandOutput cmd_experiment(RunConfig const& cfg)
{
    auto const& ec = cfg.experiment;
    auto result = run_experiment(ec.setup, ec.events, cfg.seed, cfg.threads);

    CommandOutput out;
    auto const violations = experiment_violations(result.events, ec.setup);
    auto j = summary_json(result.summary, ec.setup, cfg.seed);
    j["invariant_violations"] = violations;
    out.files.push_back({"experiment_events.csv", events_csv(result.events)});
    out.files.push_back({"experiment_summary.json", detail::dump(j)});
    if (!violations.empty())
    {
        out.exit_code = kExitCheckFailed;
        for (auto const& v : violations)
        {
            out.diagnostics += v + "\n";
        }
    }
    if (result.summary.degenerate)
    {
        out.diagnostics += "warning: " + result.summary.warning + "\n";
    }
    return out;
}

}  // namespace spinport
