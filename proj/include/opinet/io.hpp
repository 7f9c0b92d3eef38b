/*
 * Copyright (C) 2026 opinet contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "opinet/analysis.hpp"
#include "opinet/errors.hpp"
#include "opinet/fields.hpp"

namespace opinet::io
{

/// Shortest decimal form that parses back to the same double; "nan" for NaN.
inline std::string format_double(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s)
{
    if (s == "nan" || s == "NaN") {
        return std::nan("");
    }
    double x = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, x);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("cannot parse number '" + std::string(s) + "'");
    }
    return x;
}

inline std::vector<std::string> split(std::string_view line, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw NumericalError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

/// Header plus numeric rows, tab- or comma-separated.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const
    {
        for (std::size_t k = 0; k < header.size(); ++k) {
            if (header[k] == name) {
                return k;
            }
        }
        throw ConfigError("table has no column '" + std::string(name) + "'");
    }

    std::vector<double> values(std::string_view name) const
    {
        const std::size_t k = column(name);
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) {
            v.push_back(r[k]);
        }
        return v;
    }
};

inline void write_row(std::ostream& out, const std::vector<double>& row, char sep = '\t')
{
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (k > 0) {
            out << sep;
        }
        out << format_double(row[k]);
    }
    out << '\n';
}

inline void write_header(std::ostream& out, const std::vector<std::string>& header, char sep = '\t')
{
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k > 0) {
            out << sep;
        }
        out << header[k];
    }
    out << '\n';
}

inline void write_table(const std::filesystem::path& path, const Table& t, char sep = '\t')
{
    auto out = open_output(path);
    write_header(out, t.header, sep);
    for (const auto& r : t.rows) {
        write_row(out, r, sep);
    }
}

/// Reads a table with a header line; every row must have the header's column count.
inline Table read_table(const std::filesystem::path& path, char sep = '\t')
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    Table t;
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("'" + path.string() + "' is empty");
    }
    t.header = split(line, sep);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line, sep);
        if (cells.size() != t.header.size()) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(t.header.size()) + " columns, got " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            row.push_back(parse_double(c));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---- run report ----------------------------------------------------------------------------

inline const std::vector<std::string>& report_columns()
{
    static const std::vector<std::string> cols{"t",           "E_micro",         "E_cont_labeled",
                                               "E_cont_unlabeled", "conserved_micro", "g_first_moment",
                                               "V_micro",     "lyapunov_tilde"};
    return cols;
}

inline Table report_table(const RunReport& r)
{
    Table t;
    t.header = report_columns();
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        t.rows.push_back({r.times[k], r.e_micro[k], r.e_cont_labeled[k], r.e_cont_unlabeled[k],
                          r.conserved_micro[k], r.g_first_moment[k], r.v_micro[k], r.lyapunov_tilde[k]});
    }
    return t;
}

inline void write_report(const std::filesystem::path& path, const RunReport& r)
{
    write_table(path, report_table(r));
}

/// Parses a report TSV back into the series of a RunReport (rates and consensus values are
/// not part of the file).
inline RunReport read_report(const std::filesystem::path& path)
{
    const Table t = read_table(path);
    RunReport r;
    r.times = t.values("t");
    r.e_micro = t.values("E_micro");
    r.e_cont_labeled = t.values("E_cont_labeled");
    r.e_cont_unlabeled = t.values("E_cont_unlabeled");
    r.conserved_micro = t.values("conserved_micro");
    r.g_first_moment = t.values("g_first_moment");
    r.v_micro = t.values("V_micro");
    r.lyapunov_tilde = t.values("lyapunov_tilde");
    return r;
}

// ---- sweep rates ---------------------------------------------------------------------------

struct RatesRow {
    double mu = 0.0;
    double rate_micro = std::nan("");
    double rate_cont_labeled = std::nan("");
    double rate_cont_unlabeled = std::nan("");
    double fit_err_micro = std::nan("");
    double fit_err_cont_labeled = std::nan("");
    double fit_err_cont_unlabeled = std::nan("");
};

inline const std::vector<std::string>& rates_columns()
{
    static const std::vector<std::string> cols{"mu",
                                               "rate_micro",
                                               "rate_cont_labeled",
                                               "rate_cont_unlabeled",
                                               "fit_err_micro",
                                               "fit_err_cont_labeled",
                                               "fit_err_cont_unlabeled"};
    return cols;
}

inline void write_rates(const std::filesystem::path& path, const std::vector<RatesRow>& rows)
{
    Table t;
    t.header = rates_columns();
    for (const auto& r : rows) {
        t.rows.push_back({r.mu, r.rate_micro, r.rate_cont_labeled, r.rate_cont_unlabeled, r.fit_err_micro,
                          r.fit_err_cont_labeled, r.fit_err_cont_unlabeled});
    }
    write_table(path, t);
}

inline std::vector<RatesRow> read_rates(const std::filesystem::path& path)
{
    const Table t = read_table(path);
    std::vector<RatesRow> rows;
    for (const auto& v : t.rows) {
        RatesRow r;
        r.mu = v[t.column("mu")];
        r.rate_micro = v[t.column("rate_micro")];
        r.rate_cont_labeled = v[t.column("rate_cont_labeled")];
        r.rate_cont_unlabeled = v[t.column("rate_cont_unlabeled")];
        r.fit_err_micro = v[t.column("fit_err_micro")];
        r.fit_err_cont_labeled = v[t.column("fit_err_cont_labeled")];
        r.fit_err_cont_unlabeled = v[t.column("fit_err_cont_unlabeled")];
        rows.push_back(r);
    }
    return rows;
}

// ---- grid snapshots ------------------------------------------------------------------------

inline std::string step_tag(std::size_t step)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "step%08zu", step);
    return buf;
}

/// Single-column CSV, one cell per line.
inline void write_f_csv(const std::filesystem::path& path, const ScalarField& f)
{
    auto out = open_output(path);
    for (double v : f.values) {
        out << format_double(v) << '\n';
    }
}

/// Dense matrix, row index = w cell.
inline void write_g_csv(const std::filesystem::path& path, const PairField& g)
{
    auto out = open_output(path);
    const std::size_t n = g.size();
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = g(i, j);
        }
        write_row(out, row, ',');
    }
}

inline std::vector<std::vector<double>> read_csv_matrix(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    std::vector<std::vector<double>> m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        for (const auto& c : split(line, ',')) {
            row.push_back(parse_double(c));
        }
        m.push_back(std::move(row));
    }
    return m;
}

/// f_<step>.csv and g_<step>.csv in `dir`.
inline void write_snapshot(const std::filesystem::path& dir, std::size_t step, const ScalarField& f,
                           const PairField& g)
{
    write_f_csv(dir / ("f_" + step_tag(step) + ".csv"), f);
    write_g_csv(dir / ("g_" + step_tag(step) + ".csv"), g);
}

/// f_p<p>_<step>.csv per label and g_p<p>_q<q>_<step>.csv per label pair.
inline void write_snapshot(const std::filesystem::path& dir, std::size_t step, const LabeledFields& fields)
{
    const std::string tag = step_tag(step);
    for (std::size_t p = 0; p < fields.n_groups; ++p) {
        write_f_csv(dir / ("f_p" + std::to_string(p) + "_" + tag + ".csv"), fields.f[p]);
        for (std::size_t q = 0; q < fields.n_groups; ++q) {
            write_g_csv(dir / ("g_p" + std::to_string(p) + "_q" + std::to_string(q) + "_" + tag + ".csv"),
                        fields.pair(p, q));
        }
    }
}

/// Gnuplot script plotting the fitted rates against mu on a log axis.
inline void write_rates_gnuplot(const std::filesystem::path& path, const std::string& rates_file = "rates.tsv",
                                const std::string& image = "rates.png")
{
    auto out = open_output(path);
    out << "# usage: gnuplot " << path.filename().string() << "\n"
        << "set terminal pngcairo size 900,600\n"
        << "set output '" << image << "'\n"
        << "set datafile separator '\\t'\n"
        << "set key top left\n"
        << "set logscale x\n"
        << "set xlabel 'mixing parameter mu'\n"
        << "set ylabel 'convergence rate'\n"
        << "set grid\n"
        << "plot '" << rates_file << "' using 1:2 skip 1 with linespoints title 'discrete', \\\n"
        << "     '' using 1:3 skip 1 with linespoints title 'continuum, labelled', \\\n"
        << "     '' using 1:4 skip 1 with linespoints title 'continuum, unlabelled'\n";
}

} // namespace opinet::io
