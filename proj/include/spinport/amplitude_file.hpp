// SPDX-License-Identifier: Apache-2.0
//! \file spinport/amplitude_file.hpp
//! Reader and writer for tabulated invariant amplitudes.
//!
//! Format (whitespace separated text):
//!
//!   # any comment
//!   # identical_nucleons = true
//!   theta_rad A_re A_im B_re B_im C_re C_im D_re D_im E_re E_im F_re F_im
//!   1.5707963267948966 1 0 0 0 0 0 0 0 0 0 0 0
//!
//! Lines starting with '#' are comments; the only recognized directive is
//! `identical_nucleons = true|false`. The first non-comment line must be the
//! header shown above. Each following non-blank line is one row.
#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "scattering.hpp"

namespace spinport
{
class AmplitudeFileError : public Error
{
  public:
    AmplitudeFileError(std::string const& source, std::size_t line,
                       std::string const& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_{line}
    {
    }

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

inline constexpr std::array<std::string_view, 13> kAmplitudeColumns = {
    "theta_rad", "A_re", "A_im", "B_re", "B_im", "C_re", "C_im",
    "D_re",      "D_im", "E_re", "E_im", "F_re", "F_im",
};

namespace detail
{
inline std::vector<std::string> split_ws(std::string const& line)
{
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok)
    {
        out.push_back(tok);
    }
    return out;
}

inline std::string trim(std::string_view s)
{
    auto const b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
    {
        return {};
    }
    auto const e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline bool parse_double(std::string const& tok, double& out)
{
    auto const* first = tok.data();
    auto const* last = tok.data() + tok.size();
    auto const [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}
}  // namespace detail

inline AmplitudeTable read_amplitude_table(std::istream& in,
                                           std::string const& source = "<input>")
{
    bool identical = false;
    bool header_seen = false;
    std::vector<AmplitudeRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        auto const text = detail::trim(line);
        if (text.empty())
        {
            continue;
        }
        if (text.front() == '#')
        {
            auto const body = detail::trim(std::string_view(text).substr(1));
            auto const eq = body.find('=');
            if (eq != std::string::npos
                && detail::trim(std::string_view(body).substr(0, eq))
                       == "identical_nucleons")
            {
                auto const val
                    = detail::trim(std::string_view(body).substr(eq + 1));
                if (val == "true")
                    identical = true;
                else if (val == "false")
                    identical = false;
                else
                    throw AmplitudeFileError(
                        source, lineno,
                        "identical_nucleons must be true or false");
            }
            continue;
        }

        auto const tokens = detail::split_ws(text);
        if (!header_seen)
        {
            bool ok = tokens.size() == kAmplitudeColumns.size();
            for (std::size_t i = 0; ok && i < tokens.size(); ++i)
            {
                ok = tokens[i] == kAmplitudeColumns[i];
            }
            if (!ok)
            {
                throw AmplitudeFileError(
                    source, lineno,
                    "expected header 'theta_rad A_re A_im ... F_re F_im'");
            }
            header_seen = true;
            continue;
        }

        if (tokens.size() != kAmplitudeColumns.size())
        {
            throw AmplitudeFileError(source, lineno,
                                     "expected 13 columns, found "
                                         + std::to_string(tokens.size()));
        }
        std::array<double, 13> v{};
        for (std::size_t i = 0; i < tokens.size(); ++i)
        {
            if (!detail::parse_double(tokens[i], v[i]) || !std::isfinite(v[i]))
            {
                throw AmplitudeFileError(
                    source, lineno,
                    "column " + std::string(kAmplitudeColumns[i])
                        + " is not a finite number: '" + tokens[i] + "'");
            }
        }
        if (!rows.empty() && !(v[0] > rows.back().theta))
        {
            throw AmplitudeFileError(source, lineno,
                                     "theta_rad must strictly increase");
        }
        rows.push_back({v[0],
                        {{v[1], v[2]},
                         {v[3], v[4]},
                         {v[5], v[6]},
                         {v[7], v[8]},
                         {v[9], v[10]},
                         {v[11], v[12]}}});
    }
    if (!header_seen)
    {
        throw AmplitudeFileError(source, lineno, "missing header line");
    }
    if (rows.empty())
    {
        throw AmplitudeFileError(source, lineno, "no amplitude rows");
    }
    return {std::move(rows), identical};
}

inline AmplitudeTable load_amplitude_table(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error("cannot open amplitude file '" + path + "'");
    }
    return read_amplitude_table(in, path);
}

//! Writes the table in the format read by read_amplitude_table; numbers use
//! %.17g so the round trip is exact.
inline std::string format_amplitude_table(AmplitudeTable const& table)
{
    std::string out;
    if (table.identical_nucleons())
    {
        out += "# identical_nucleons = true\n";
    }
    for (std::size_t i = 0; i < kAmplitudeColumns.size(); ++i)
    {
        out += (i ? " " : "");
        out += kAmplitudeColumns[i];
    }
    out += '\n';
    char buf[32];
    for (auto const& row : table.rows())
    {
        std::snprintf(buf, sizeof buf, "%.17g", row.theta);
        out += buf;
        for (auto z : row.amps.as_array())
        {
            std::snprintf(buf, sizeof buf, " %.17g", z.real());
            out += buf;
            std::snprintf(buf, sizeof buf, " %.17g", z.imag());
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace spinport
