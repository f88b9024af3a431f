// SPDX-License-Identifier: Apache-2.0
//! \file spinport/config.hpp
//! Run configuration: a JSON document with a versioned schema. Unknown keys
//! are errors. See docs/formats.md for the schema.
#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "bell_basis.hpp"
#include "expsim.hpp"
#include "scattering.hpp"
#include "teleport.hpp"

namespace spinport
{
inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public Error
{
  public:
    using Error::Error;
};

//---------------------------------------------------------------------------//
namespace detail
{
/*!
 * Reads one JSON object, remembering which keys were consumed so that
 * `finish()` can reject the rest.
 */
class ObjectReader
{
  public:
    ObjectReader(nlohmann::json const& j, std::string path)
        : j_{j}, path_{std::move(path)}
    {
        if (!j_.is_object())
        {
            throw ConfigError(where() + " must be an object");
        }
    }

    bool has(std::string const& key)
    {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    nlohmann::json const& at(std::string const& key)
    {
        seen_.insert(key);
        if (!j_.contains(key))
        {
            throw ConfigError(where() + " is missing '" + key + "'");
        }
        return j_.at(key);
    }

    ObjectReader child(std::string const& key)
    {
        return {at(key), path_ + "." + key};
    }

    std::string child_path(std::string const& key) const
    {
        return path_ + "." + key;
    }

    template<class T>
    T get(std::string const& key, T fallback)
    {
        if (!has(key))
        {
            return fallback;
        }
        try
        {
            return j_.at(key).get<T>();
        }
        catch (nlohmann::json::exception const&)
        {
            throw ConfigError(child_path(key) + " has the wrong type");
        }
    }

    double number(std::string const& key, double fallback)
    {
        if (has(key) && !j_.at(key).is_number())
        {
            throw ConfigError(child_path(key) + " must be a number");
        }
        return get<double>(key, fallback);
    }

    void finish() const
    {
        for (auto const& item : j_.items())
        {
            if (!seen_.count(item.key()))
            {
                throw ConfigError("unknown key '" + item.key() + "' in "
                                  + where());
            }
        }
    }

    std::string where() const { return path_.empty() ? "<root>" : path_; }

  private:
    nlohmann::json const& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline Amplitude parse_complex(nlohmann::json const& j, std::string const& path)
{
    if (j.is_number())
    {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError(path + " must be a number or [re, im]");
}

inline Point3 parse_point(nlohmann::json const& j, std::string const& path)
{
    if (!j.is_array() || j.size() != 3)
    {
        throw ConfigError(path + " must be [x, y, z]");
    }
    Point3 p;
    for (int i = 0; i < 3; ++i)
    {
        if (!j[i].is_number())
        {
            throw ConfigError(path + " must be [x, y, z]");
        }
        p[i] = j[i].get<double>();
    }
    return p;
}

//! {"bloch": [x, y, z]} or {"a": c, "b": c} with c a number or [re, im].
inline UnknownState parse_unknown_state(ObjectReader r)
{
    std::optional<UnknownState> out;
    if (r.has("bloch"))
    {
        auto const p = parse_point(r.at("bloch"), r.child_path("bloch"));
        out = UnknownState::from_bloch(UnitVector3::normalized(p));
    }
    if (r.has("a") || r.has("b"))
    {
        if (out)
        {
            throw ConfigError(r.where() + " takes either 'bloch' or 'a'/'b'");
        }
        Amplitude const a = r.has("a") ? parse_complex(r.at("a"), r.child_path("a"))
                                       : Amplitude{};
        Amplitude const b = r.has("b") ? parse_complex(r.at("b"), r.child_path("b"))
                                       : Amplitude{};
        out = UnknownState::normalized(a, b);
    }
    r.finish();
    if (!out)
    {
        throw ConfigError(r.where() + " needs 'bloch' or 'a'/'b'");
    }
    return *out;
}

inline BellOutcome parse_outcome_at(nlohmann::json const& j, std::string const& path)
{
    if (!j.is_string())
    {
        throw ConfigError(path + " must be a Bell state name");
    }
    try
    {
        return parse_outcome(j.get<std::string>());
    }
    catch (Error const& e)
    {
        throw ConfigError(path + ": " + e.what());
    }
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Scattering operator used as a Bell filter.
 *
 *   {"kind": "identity"}
 *   {"kind": "projector", "outcome": "PsiMinus"}
 *   {"kind": "bell", "a": c, "b": c, "c": c, "d": c, "E": c, "F": c}
 *   {"kind": "invariant", "A": c, ..., "F": c}   (canonical frame)
 *   {"kind": "f90", "a": c, "E": c}
 */
inline SpinOperator parse_filter(nlohmann::json const& j, std::string const& path)
{
    detail::ObjectReader r{j, path};
    auto const kind = r.get<std::string>("kind", "");
    auto c = [&](char const* key) {
        return r.has(key) ? detail::parse_complex(r.at(key), r.child_path(key))
                          : Amplitude{};
    };
    std::optional<SpinOperator> op;
    if (kind == "identity")
    {
        op = SpinOperator::identity(2);
    }
    else if (kind == "projector")
    {
        op = bell_projector(
            detail::parse_outcome_at(r.at("outcome"), r.child_path("outcome")));
    }
    else if (kind == "bell")
    {
        op = build_f_bell({c("a"), c("b"), c("c"), c("d"), c("E"), c("F")});
    }
    else if (kind == "invariant")
    {
        op = build_f_invariant({c("A"), c("B"), c("C"), c("D"), c("E"), c("F")},
                               ScatterFrame::canonical());
    }
    else if (kind == "f90")
    {
        op = f_at_90_identical(c("a"), c("E"));
    }
    else
    {
        throw ConfigError(path + ".kind must be one of identity, projector, "
                                 "bell, invariant, f90");
    }
    r.finish();
    return *op;
}

//---------------------------------------------------------------------------//

struct TeleportConfig
{
    std::uint64_t trials = 10000;
    UnknownState state{1.0, 0.0};
    BellOutcome ancilla = BellOutcome::PsiMinus;
    std::optional<SpinOperator> filter;
};

struct BellScanConfig
{
    BellOutcome state = BellOutcome::PsiPlus;
    std::uint64_t points = 19;
    double theta_max = std::numbers::pi / 2;
    std::uint64_t samples = 100000;
};

struct ExperimentConfig
{
    std::uint64_t events = 100000;
    ExperimentSetup setup;
};

struct ScatterCheckConfig
{
    std::string amplitude_file;
    //! Overrides the file's directive when set.
    std::optional<bool> identical_nucleons;
    double tolerance = 1e-12;
    double symmetry_tolerance = 1e-9;
};

struct RunConfig
{
    int schema_version = kConfigSchemaVersion;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    TeleportConfig teleport;
    BellScanConfig bellscan;
    ExperimentConfig experiment;
    ScatterCheckConfig scatter_check;
};

//---------------------------------------------------------------------------//
namespace detail
{
inline TeleportConfig parse_teleport(ObjectReader r)
{
    TeleportConfig c;
    c.trials = r.get<std::uint64_t>("trials", c.trials);
    if (r.has("state"))
    {
        c.state = parse_unknown_state(r.child("state"));
    }
    if (r.has("ancilla"))
    {
        c.ancilla = parse_outcome_at(r.at("ancilla"), r.child_path("ancilla"));
    }
    if (r.has("filter"))
    {
        c.filter = parse_filter(r.at("filter"), r.child_path("filter"));
    }
    r.finish();
    return c;
}

inline BellScanConfig parse_bellscan(ObjectReader r)
{
    BellScanConfig c;
    if (r.has("state"))
    {
        c.state = parse_outcome_at(r.at("state"), r.child_path("state"));
    }
    c.points = r.get<std::uint64_t>("points", c.points);
    c.theta_max = r.number("theta_max", c.theta_max);
    c.samples = r.get<std::uint64_t>("samples", c.samples);
    r.finish();
    if (c.points < 2)
    {
        throw ConfigError("bellscan.points must be at least 2");
    }
    return c;
}

inline ExperimentConfig parse_experiment(ObjectReader r)
{
    ExperimentConfig c;
    auto& s = c.setup;
    c.events = r.get<std::uint64_t>("events", c.events);
    if (r.has("geometry"))
    {
        auto g = r.child("geometry");
        auto point = [&](char const* key, Point3& dst) {
            if (g.has(key))
            {
                dst = parse_point(g.at(key), g.child_path(key));
            }
        };
        point("lh2", s.geometry.lh2);
        point("ph2", s.geometry.ph2);
        point("analyzer", s.geometry.analyzer);
        point("f1", s.geometry.f1);
        point("f2", s.geometry.f2);
        s.geometry.beam_energy_mev
            = g.number("beam_energy_mev", s.geometry.beam_energy_mev);
        s.geometry.coincidence_window_s
            = g.number("coincidence_window_s", s.geometry.coincidence_window_s);
        g.finish();
    }
    if (r.has("target"))
    {
        s.target.state = parse_unknown_state(r.child("target"));
    }
    if (r.has("filter"))
    {
        s.filter = parse_filter(r.at("filter"), r.child_path("filter"));
    }
    if (r.has("analyzer"))
    {
        auto a = r.child("analyzer");
        s.analyzer.analyzing_power
            = a.number("analyzing_power", s.analyzer.analyzing_power);
        a.finish();
    }
    if (r.has("detectors"))
    {
        auto d = r.child("detectors");
        s.detectors.efficiency_f1
            = d.number("efficiency_f1", s.detectors.efficiency_f1);
        s.detectors.efficiency_f2
            = d.number("efficiency_f2", s.detectors.efficiency_f2);
        s.detectors.jitter_s = d.number("jitter_s", s.detectors.jitter_s);
        d.finish();
    }
    s.singlet_fraction = r.number("singlet_fraction", s.singlet_fraction);
    s.beam_interval_s = r.number("beam_interval_s", s.beam_interval_s);
    s.coincidence_delay_s
        = r.number("coincidence_delay_s", s.coincidence_delay_s);
    if (r.has("summary_outcome"))
    {
        s.summary_outcome = parse_outcome_at(r.at("summary_outcome"),
                                             r.child_path("summary_outcome"));
    }
    s.require_causal = r.get<bool>("require_causal", s.require_causal);
    r.finish();
    try
    {
        s.validate();
    }
    catch (ConfigError const&)
    {
        throw;
    }
    catch (Error const& e)
    {
        throw ConfigError(std::string("experiment: ") + e.what());
    }
    return c;
}

inline ScatterCheckConfig parse_scatter_check(ObjectReader r)
{
    ScatterCheckConfig c;
    c.amplitude_file = r.get<std::string>("amplitude_file", "");
    if (r.has("identical_nucleons"))
    {
        c.identical_nucleons = r.get<bool>("identical_nucleons", false);
    }
    c.tolerance = r.number("tolerance", c.tolerance);
    c.symmetry_tolerance = r.number("symmetry_tolerance", c.symmetry_tolerance);
    r.finish();
    return c;
}
}  // namespace detail

inline RunConfig parse_config(nlohmann::json const& j)
{
    detail::ObjectReader r{j, ""};
    RunConfig c;
    c.schema_version = r.get<int>("schema_version", -1);
    if (c.schema_version != kConfigSchemaVersion)
    {
        throw ConfigError("schema_version must be "
                          + std::to_string(kConfigSchemaVersion));
    }
    c.seed = r.get<std::uint64_t>("seed", c.seed);
    c.threads = r.get<unsigned>("threads", c.threads);
    try
    {
        if (r.has("teleport"))
            c.teleport = detail::parse_teleport(r.child("teleport"));
        if (r.has("bellscan"))
            c.bellscan = detail::parse_bellscan(r.child("bellscan"));
        if (r.has("experiment"))
            c.experiment = detail::parse_experiment(r.child("experiment"));
        if (r.has("scatter_check"))
            c.scatter_check
                = detail::parse_scatter_check(r.child("scatter_check"));
    }
    catch (ConfigError const&)
    {
        throw;
    }
    catch (Error const& e)
    {
        throw ConfigError(e.what());
    }
    r.finish();
    return c;
}

inline RunConfig parse_config_text(std::string const& text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (nlohmann::json::parse_error const& e)
    {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline RunConfig load_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace spinport
