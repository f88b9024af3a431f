// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spinport/amplitude_file.hpp"
#include "spinport/commands.hpp"
#include "spinport/config.hpp"

using namespace spinport;
using oracle::cd;

namespace
{
using B = BellOutcome;

struct Verdict
{
    bool pass = true;
    std::string detail;

    void require(bool ok, std::string const& what)
    {
        if (!ok)
        {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(std::string const& what)
    {
        if (pass)
            detail += (detail.empty() ? "" : "; ") + what;
    }
};

std::string fmt(char const* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double max_diff(Matrix const& a, Matrix const& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

UnknownState random_state(std::mt19937_64& g)
{
    auto const [a, b] = oracle::random_qubit(g);
    return UnknownState::normalized(a, b);
}

// 1. Bell expansion of qubit (x) singlet.
Verdict bell_expansion()
{
    Verdict v;
    std::mt19937_64 g{1};
    double worst = 0;
    for (int i = 0; i < 100; ++i)
    {
        auto const phi = random_state(g);
        Vector const diff = compose_three(phi, make_epr()).amplitudes()
                            - oracle::four_term_expansion(phi.a(), phi.b());
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    v.require(worst < 1e-12, "max amplitude error " + fmt("%.3e", worst));
    v.note("max amplitude error " + fmt("%.3e", worst));
    return v;
}

// 2. Teleportation fidelity and uniform outcomes.
Verdict teleport_fidelity()
{
    Verdict v;
    TeleportEngine const engine{ProtocolOptions{}};
    std::uint64_t const n = 10000;
    auto const s = run_batch(engine, {0.6, cd(0.0, 0.8)}, n, 2, 1);
    v.require(s.discarded == 0, "trials discarded");
    v.require(s.min_fidelity >= 1.0 - 1e-12, "min fidelity " + fmt("%.15f", s.min_fidelity));
    for (auto h : s.histogram)
    {
        v.require(h > 0, "channel not exercised");
        v.require(oracle::within_sigmas(double(h), double(n), 0.25),
                  "histogram count " + std::to_string(h) + " outside 4 sigma");
    }
    v.note("min fidelity " + fmt("%.15f", s.min_fidelity) + ", histogram "
           + std::to_string(s.histogram[0]) + "/" + std::to_string(s.histogram[1]) + "/"
           + std::to_string(s.histogram[2]) + "/" + std::to_string(s.histogram[3]));
    return v;
}

// 3. (S1.n)(S2.n) = 1/2 [(S.n)^2 - 1/2].
Verdict operator_identity()
{
    Verdict v;
    std::mt19937_64 g{3};
    double worst = 0;
    for (int i = 0; i < 100; ++i)
    {
        auto const n = UnitVector3::normalized(oracle::random_axis(g));
        auto const lhs = spin_component(n, 0, 2) * spin_component(n, 1, 2);
        auto const s = total_spin_component(n, 2);
        Matrix const rhs = 0.5 * ((s * s).matrix() - 0.5 * Matrix::Identity(4, 4));
        worst = std::max(worst, max_diff(lhs.matrix(), rhs));
    }
    v.require(worst < 1e-12, "max entry error " + fmt("%.3e", worst));
    v.note("max entry error " + fmt("%.3e", worst));
    return v;
}

// 4. Invariant form vs Bell-projector form; spectral property.
Verdict form_equivalence()
{
    Verdict v;
    std::mt19937_64 g{4};
    auto rc = [&] { return oracle::random_complex(g); };
    double worst = 0, worst_eig = 0;
    for (int i = 0; i < 1000; ++i)
    {
        InvariantAmplitudes const x{rc(), rc(), rc(), rc(), rc(), rc()};
        worst = std::max(worst, max_diff(build_f_invariant(x, ScatterFrame::canonical()).matrix(),
                                         build_f_bell(bell_coefficients(x)).matrix()));
        InvariantAmplitudes const y{x.A, x.B, x.C, x.D, 0, 0};
        auto const c = bell_coefficients(y);
        auto const f = build_f_bell(c);
        std::array<cd, 4> const ev{c.a, c.b, c.c, c.d};
        for (std::size_t k = 0; k < 4; ++k)
        {
            Vector const ket = bell_ket(kBellOutcomes[k]).amplitudes();
            worst_eig = std::max(worst_eig,
                                 Vector(f.matrix() * ket - ev[k] * ket).cwiseAbs().maxCoeff());
        }
    }
    v.require(worst < 1e-12, "form difference " + fmt("%.3e", worst));
    v.require(worst_eig < 1e-12, "eigen residual " + fmt("%.3e", worst_eig));
    v.note("form difference " + fmt("%.3e", worst) + ", eigen residual "
           + fmt("%.3e", worst_eig));
    return v;
}

// 5. Identical-nucleon symmetry on the symmetric sample table.
Verdict identical_symmetry()
{
    Verdict v;
    auto const table
        = load_amplitude_table(std::string(SPINPORT_SAMPLES_DIR) + "/pp_symmetric.amp");
    auto const rep = check_identical_symmetry(table);
    v.require(rep.unpaired_angles.empty(), "unpaired angles in table");
    v.require(rep.ok(1e-9), "symmetry residual " + fmt("%.3e", rep.max_residual()));
    v.require(rep.f_max < 1e-9, "max |F| " + fmt("%.3e", rep.f_max));
    auto const ra = right_angle_check(table);
    v.require(ra.operator_residual < 1e-9,
              "right-angle residual " + fmt("%.3e", ra.operator_residual));
    v.note(std::to_string(rep.pairs_checked) + " mirrored rows, symmetry residual "
           + fmt("%.3e", rep.max_residual()) + ", right-angle residual "
           + fmt("%.3e", ra.operator_residual));
    return v;
}

// 6. Singlet anticorrelation and the Psi+ tilt curve.
Verdict correlation_laws()
{
    Verdict v;
    std::mt19937_64 g{6};
    double singlet_worst = 0;
    for (int i = 0; i < 100; ++i)
    {
        auto const n = UnitVector3::normalized(oracle::random_axis(g));
        singlet_worst = std::max(
            singlet_worst, std::abs(correlation_probability(bell_ket(B::PsiMinus), n, n) - 1.0));
    }
    v.require(singlet_worst <= 1e-12, "singlet deviation " + fmt("%.3e", singlet_worst));

    BellScanConfig bc;
    bc.state = B::PsiPlus;
    bc.points = 19;
    bc.theta_max = std::numbers::pi / 2;
    bc.samples = 100000;
    double curve_worst = 0, pull_worst = 0;
    for (auto const& r : bell_scan(bc, 6, 1))
    {
        double const c = std::cos(r.theta);
        curve_worst = std::max(curve_worst, std::abs(r.analytic - c * c));
        double const pull = std::abs(r.mc_frequency - r.analytic) / r.mc_sigma;
        pull_worst = std::max(pull_worst, pull);
        v.require(pull < 4.0, "theta " + fmt("%.4f", r.theta) + " off by "
                                  + fmt("%.2f", pull) + " sigma");
    }
    v.require(curve_worst < 1e-12, "cos^2 deviation " + fmt("%.3e", curve_worst));
    v.note("cos^2 deviation " + fmt("%.3e", curve_worst) + ", worst MC pull "
           + fmt("%.2f", pull_worst) + " sigma");
    return v;
}

// 7. 64-copy discrimination, 10^4 trials per state.
Verdict discrimination()
{
    Verdict v;
    std::uint64_t errors = 0;
    for (auto o : kBellOutcomes)
    {
        for (std::uint64_t t = 0; t < 10000; ++t)
        {
            auto rng = make_stream(7 + index_of(o), t, StreamDomain::discrimination);
            errors += discriminate_bell(bell_ket(o), 64, rng).estimate != o;
        }
    }
    v.require(errors == 0, std::to_string(errors) + " misidentifications");
    v.note("0 misidentifications in 40000 trials");
    return v;
}

// 8. Experiment pipeline and exact causal filtering.
Verdict experiment_pipeline()
{
    Verdict v;
    ExperimentSetup setup;
    setup.target.state = UnknownState::from_bloch(UnitVector3::y_axis());
    setup.filter = bell_projector(B::PsiMinus);
    setup.analyzer.analyzing_power = 0.5;
    auto const r = run_experiment(setup, 1000000, 8, 1);
    auto const& s = r.summary;
    auto const& ay = s.asymmetry[1];
    v.require(ay.valid && std::abs(ay.epsilon - 0.5) < 3 * ay.sigma,
              "y asymmetry " + fmt("%.5f", ay.epsilon) + " +- " + fmt("%.5f", ay.sigma));
    Eigen::Vector3d const expect{0, 1, 0};
    v.require(s.polarization_valid, "polarization not reconstructed");
    for (int i = 0; i < 3; ++i)
    {
        v.require(std::abs(s.polarization[i] - expect[i]) < 3 * s.polarization_sigma[i],
                  "polarization component " + std::to_string(i) + " = "
                      + fmt("%.5f", s.polarization[i]));
    }

    // Hand-built records: F-1/F-2 3 m apart, |dt| = k ns. 3 m / c = 10.007 ns,
    // so k = 0..10 are retained and k = 11..19 rejected.
    GeometryConfig line;
    line.f1 = {0, 0, 0};
    line.f2 = {3, 0, 0};
    line.lh2 = {0, 5, 0};
    line.ph2 = {1, 5, 0};
    line.analyzer = {2, 5, 0};
    std::vector<EventRecord> recs(20);
    for (std::size_t k = 0; k < recs.size(); ++k)
    {
        recs[k].id = k;
        recs[k].t_f1 = 1e-3;
        recs[k].t_f2 = 1e-3 + double(k) * 1e-9;
    }
    auto const kept = causal_filter(recs, line);
    v.require(kept.size() == 11, "synthetic retention " + std::to_string(kept.size()) + " != 11");
    v.require(causal_filter(kept, line).size() == kept.size(), "filter not idempotent");

    // Full pipeline, symmetric legs and no jitter: dt = 0, every event kept.
    v.require(s.causal_retained == s.generated,
              "symmetric geometry retained " + std::to_string(s.causal_retained));

    // F-2 300 m down the analyzer arm: path difference ~298 m at v ~ 0.25 c
    // gives c dt ~ 1190 m, more than the ~300 m separation, so nothing is kept.
    ExperimentSetup far = setup;
    far.geometry.lh2 = {0, 0, 0};
    far.geometry.ph2 = {1, 0, 0};
    far.geometry.f1 = {2, 0, 0};
    far.geometry.analyzer = {0, -1, 0};
    far.geometry.f2 = {0, -300, 0};
    auto const rf = run_experiment(far, 1000, 8, 1);
    v.require(rf.summary.causal_retained == 0,
              "far geometry retained " + std::to_string(rf.summary.causal_retained));

    v.note("y asymmetry " + fmt("%.5f", ay.epsilon) + " +- " + fmt("%.5f", ay.sigma)
           + ", P = (" + fmt("%.4f", s.polarization[0]) + ", " + fmt("%.4f", s.polarization[1])
           + ", " + fmt("%.4f", s.polarization[2]) + "), synthetic retention 11/20");
    return v;
}

// 9. Outcome-averaged particle-2 ensemble is maximally mixed.
Verdict no_signaling()
{
    Verdict v;
    std::mt19937_64 g{9};
    double worst = 0;
    for (int i = 0; i < 100; ++i)
    {
        auto const three = compose_three(random_state(g), make_epr());
        auto const p = bell_probabilities_13(three);
        Matrix rho = Matrix::Zero(2, 2);
        for (auto o : kBellOutcomes)
        {
            Vector const c = conditional_state_2(three, o).amplitudes();
            rho += p[index_of(o)] * c * c.adjoint();
        }
        worst = std::max(worst, max_diff(rho, 0.5 * Matrix::Identity(2, 2)));
    }
    v.require(worst < 1e-12, "density deviation " + fmt("%.3e", worst));
    v.note("density deviation " + fmt("%.3e", worst));
    return v;
}

// 10. Thread count does not change experiment output bytes.
Verdict determinism()
{
    Verdict v;
    auto cfg = load_config(std::string(SPINPORT_SAMPLES_DIR) + "/run.json");
    cfg.experiment.events = 100000;
    cfg.experiment.setup.detectors.jitter_s = 2e-10;
    cfg.experiment.setup.beam_interval_s = 5e-9;
    cfg.threads = 1;
    auto const a = cmd_experiment(cfg);
    cfg.threads = 4;
    auto const b = cmd_experiment(cfg);
    for (auto name : {"experiment_events.csv", "experiment_summary.json"})
        v.require(a.file(name) == b.file(name), std::string(name) + " differs");
    v.note("100000 events, threads 1 and 4 byte-identical");
    return v;
}

struct Criterion
{
    int id;
    char const* title;
    double budget_s;
    std::function<Verdict()> run;
};
}  // namespace

int main()
{
    std::vector<Criterion> const criteria{
        {1, "Bell-expansion identity", 1, bell_expansion},
        {2, "teleportation fidelity", 5, teleport_fidelity},
        {3, "operator identity", 1, operator_identity},
        {4, "invariant vs Bell-projector form", 5, form_equivalence},
        {5, "identical-nucleon symmetry", 1, identical_symmetry},
        {6, "correlation laws", 30, correlation_laws},
        {7, "Bell discrimination", 30, discrimination},
        {8, "experiment pipeline", 60, experiment_pipeline},
        {9, "no-signaling bookkeeping", 1, no_signaling},
        {10, "determinism across threads", 0, determinism},
    };

    int failed = 0;
    for (auto const& c : criteria)
    {
        auto const t0 = std::chrono::steady_clock::now();
        Verdict v;
        try
        {
            v = c.run();
        }
        catch (std::exception const& e)
        {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        double const secs
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs >= c.budget_s)
        {
            v.pass = false;
            v.detail += "; runtime over " + fmt("%.0f", c.budget_s) + " s";
        }
        failed += !v.pass;
        std::printf("criterion %2d: %s  %s (%s) [%.2f s]\n", c.id, v.pass ? "PASS" : "FAIL",
                    c.title, v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
