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

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "opinet/continuum.hpp"
#include "opinet/debate.hpp"
#include "opinet/empirical.hpp"
#include "opinet/errors.hpp"
#include "opinet/graph.hpp"
#include "opinet/io.hpp"
#include "opinet/micro.hpp"

namespace opinet
{

enum class Variant { micro, cont_unlabeled, cont_labeled };

inline std::string to_string(Variant v)
{
    switch (v) {
    case Variant::micro:
        return "micro";
    case Variant::cont_unlabeled:
        return "cont_unlabeled";
    case Variant::cont_labeled:
        return "cont_labeled";
    }
    return "?";
}

inline Variant variant_from_string(const std::string& s)
{
    if (s == "micro") {
        return Variant::micro;
    }
    if (s == "cont_unlabeled") {
        return Variant::cont_unlabeled;
    }
    if (s == "cont_labeled") {
        return Variant::cont_labeled;
    }
    throw ConfigError("run.variants: unknown variant '" + s + "' (expected micro, cont_unlabeled, cont_labeled)");
}

enum class SeedStage : std::uint64_t { graph = 1, sampling = 2, noise = 3 };

/// splitmix64 finaliser.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, SeedStage stage)
{
    return mix_seed(master ^ mix_seed(static_cast<std::uint64_t>(stage)));
}

struct ExperimentConfig {
    std::string name = "custom";
    std::string debate = "linear";
    GraphConfig graph;
    MixtureSpec mixture = MixtureSpec{{{{0.0, 0.1, 1.0}}}};
    MicroParams micro;
    ContinuumParams continuum;
    std::size_t grid_size = 101;
    BandwidthMethod kde_bandwidth = BandwidthMethod::sheather_jones;
    double kde_bandwidth_value = 0.0; ///< > 0 overrides the selector
    bool kde_exact_cells = false;

    std::vector<Variant> variants{Variant::micro, Variant::cont_unlabeled, Variant::cont_labeled};
    std::vector<double> mu_sweep;
    std::vector<double> snapshot_times;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> graph_seed;
    std::optional<std::uint64_t> sampling_seed;
    std::optional<std::uint64_t> noise_seed;
    double sample_dt = 0.01;
    double fit_t_lo = 2.0;
    double fit_t_hi = 8.0;
    bool fit_truncate = true;
    std::size_t trajectory_stride = 0; ///< samples between trajectory rows; 0 disables the dump

    std::uint64_t stage_seed(SeedStage s) const
    {
        const auto& o = s == SeedStage::graph ? graph_seed : s == SeedStage::sampling ? sampling_seed : noise_seed;
        return o ? *o : derive_seed(seed, s);
    }

    bool has(Variant v) const { return std::find(variants.begin(), variants.end(), v) != variants.end(); }
    bool has_continuum() const { return has(Variant::cont_labeled) || has(Variant::cont_unlabeled); }

    /// Longest horizon over the selected variants.
    double horizon() const
    {
        double t = 0.0;
        if (has(Variant::micro)) {
            t = micro.t_end;
        }
        if (has_continuum()) {
            t = std::max(t, continuum.t_end);
        }
        return t;
    }

    void validate() const
    {
        using detail::require_config;
        require_config(!variants.empty(), "run.variants", "select at least one variant");
        require_config(sample_dt > 0.0, "run.sample_dt", "must be positive");
        require_config(fit_t_lo < fit_t_hi, "run.fit_window", "t_lo must be below t_hi");
        require_config(kde_bandwidth_value >= 0.0, "continuum.kde_bandwidth", "must be positive");
        require_config(graph.n_groups == mixture.n_communities(), "mixture",
                       "needs one community entry per graph group");
        graph.validate();
        mixture.validate();
        const DebateOperator d = DebateOperator::by_name(debate);
        if (has(Variant::micro)) {
            micro.validate(d);
        }
        if (has_continuum()) {
            require_config(grid_size >= 2, "continuum.grid_size", "must be at least 2");
            continuum.validate(d, Grid(grid_size));
        }
        for (double mu : mu_sweep) {
            require_config(mu >= 0.0 && mu <= 1.0, "run.mu_sweep", "entries must lie in [0, 1]");
        }
        const double t_end = horizon();
        for (double t : snapshot_times) {
            require_config(t >= 0.0 && t <= t_end, "run.snapshot_times",
                           "entries must lie in [0, " + io::format_double(t_end) + "]");
        }
    }

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail
{
inline std::vector<double> parse_list(const std::string& s, const std::string& field)
{
    std::vector<double> out;
    for (auto cell : io::split(s, ',')) {
        cell.erase(0, cell.find_first_not_of(" \t"));
        cell.erase(cell.find_last_not_of(" \t") + 1);
        if (cell.empty()) {
            continue;
        }
        try {
            out.push_back(io::parse_double(cell));
        } catch (const ConfigError&) {
            throw ConfigError(field + ": cannot parse number '" + cell + "'");
        }
    }
    return out;
}

inline std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        s += (k ? ", " : "") + io::format_double(v[k]);
    }
    return s;
}

/// "center std weight; center std weight; ..."
inline std::vector<MixtureComponent> parse_components(const std::string& s, const std::string& field)
{
    std::vector<MixtureComponent> out;
    for (const auto& part : io::split(s, ';')) {
        std::istringstream in(part);
        std::string c;
        std::string sd;
        std::string w;
        if (!(in >> c)) {
            continue;
        }
        std::string extra;
        if (!(in >> sd >> w) || (in >> extra)) {
            throw ConfigError(field + ": each component needs exactly 'center std weight'");
        }
        try {
            out.push_back({io::parse_double(c), io::parse_double(sd), io::parse_double(w)});
        } catch (const ConfigError&) {
            throw ConfigError(field + ": cannot parse component '" + part + "'");
        }
    }
    return out;
}

/// Typed access to a property tree that remembers which keys were read.
class IniReader
{
public:
    explicit IniReader(const boost::property_tree::ptree& tree)
        : tree_(tree)
    {
    }

    std::optional<std::string> raw(const std::string& key)
    {
        used_.insert(key);
        const auto v = tree_.get_optional<std::string>(boost::property_tree::ptree::path_type(key, '.'));
        if (!v) {
            return std::nullopt;
        }
        std::string s = *v;
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
    }

    void number(const std::string& key, double& out)
    {
        if (auto v = raw(key)) {
            try {
                out = io::parse_double(*v);
            } catch (const ConfigError&) {
                throw ConfigError(key + ": expected a number, got '" + *v + "'");
            }
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out)
    {
        if (auto v = raw(key)) {
            out = parse_integer<Int>(key, *v);
        }
    }

    template <class Int>
    void integer(const std::string& key, std::optional<Int>& out)
    {
        if (auto v = raw(key)) {
            out = parse_integer<Int>(key, *v);
        }
    }

    void boolean(const std::string& key, bool& out)
    {
        if (auto v = raw(key)) {
            if (*v == "true" || *v == "1") {
                out = true;
            } else if (*v == "false" || *v == "0") {
                out = false;
            } else {
                throw ConfigError(key + ": expected true or false, got '" + *v + "'");
            }
        }
    }

    void text(const std::string& key, std::string& out)
    {
        if (auto v = raw(key)) {
            out = *v;
        }
    }

    /// Rejects keys that were never read, which catches misspellings.
    void check_unused() const
    {
        for (const auto& [section, body] : tree_) {
            if (body.empty()) {
                throw ConfigError(section + ": key outside any section");
            }
            for (const auto& kv : body) {
                const std::string key = section + "." + kv.first;
                if (!used_.contains(key)) {
                    throw ConfigError(key + ": unknown key");
                }
            }
        }
    }

private:
    template <class Int>
    static Int parse_integer(const std::string& key, const std::string& v)
    {
        Int x{};
        const auto* end = v.data() + v.size();
        const auto res = std::from_chars(v.data(), end, x);
        if (res.ec != std::errc{} || res.ptr != end) {
            throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
        }
        return x;
    }

    const boost::property_tree::ptree& tree_;
    std::set<std::string> used_;
};
} // namespace detail

/// Parses the INI text. Keys left out keep the defaults of ExperimentConfig; the result is
/// validated before it is returned.
inline ExperimentConfig parse_config(std::istream& in)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    detail::IniReader r(tree);
    ExperimentConfig c;

    r.text("run.name", c.name);
    r.text("run.debate", c.debate);
    if (auto v = r.raw("run.variants")) {
        c.variants.clear();
        for (auto name : io::split(*v, ',')) {
            name.erase(0, name.find_first_not_of(" \t"));
            name.erase(name.find_last_not_of(" \t") + 1);
            if (!name.empty()) {
                c.variants.push_back(variant_from_string(name));
            }
        }
    }
    if (auto v = r.raw("run.mu_sweep")) {
        c.mu_sweep = detail::parse_list(*v, "run.mu_sweep");
    }
    if (auto v = r.raw("run.snapshot_times")) {
        c.snapshot_times = detail::parse_list(*v, "run.snapshot_times");
    }
    if (auto v = r.raw("run.output_dir")) {
        c.output_dir = *v;
    }
    r.integer("run.seed", c.seed);
    r.integer("run.graph_seed", c.graph_seed);
    r.integer("run.sampling_seed", c.sampling_seed);
    r.integer("run.noise_seed", c.noise_seed);
    r.number("run.sample_dt", c.sample_dt);
    r.number("run.fit_t_lo", c.fit_t_lo);
    r.number("run.fit_t_hi", c.fit_t_hi);
    r.boolean("run.fit_truncate", c.fit_truncate);
    r.integer("run.trajectory_stride", c.trajectory_stride);

    r.integer("graph.n_nodes", c.graph.n_nodes);
    r.integer("graph.n_groups", c.graph.n_groups);
    if (auto v = r.raw("graph.group_proportions")) {
        c.graph.group_proportions = detail::parse_list(*v, "graph.group_proportions");
    } else {
        c.graph.group_proportions.assign(c.graph.n_groups, 1.0 / static_cast<double>(c.graph.n_groups));
    }
    r.number("graph.mean_degree", c.graph.mean_degree);
    r.number("graph.mixing_mu", c.graph.mixing_mu);

    if (tree.get_child_optional("mixture")) {
        c.mixture.communities.clear();
        for (std::size_t p = 0;; ++p) {
            const std::string key = "mixture.community_" + std::to_string(p);
            auto v = r.raw(key);
            if (!v) {
                break;
            }
            c.mixture.communities.push_back(detail::parse_components(*v, key));
        }
    }

    r.number("micro.dt", c.micro.dt);
    r.number("micro.t_end", c.micro.t_end);
    r.number("micro.noise_sigma", c.micro.noise_sigma);

    r.integer("continuum.grid_size", c.grid_size);
    r.number("continuum.dt", c.continuum.dt);
    r.number("continuum.t_end", c.continuum.t_end);
    r.number("continuum.eta_cutoff", c.continuum.eta_cutoff);
    r.number("continuum.diffusion_sigma", c.continuum.diffusion_sigma);
    r.number("continuum.birth_rate", c.continuum.birth_rate);
    r.number("continuum.death_rate", c.continuum.death_rate);
    if (auto v = r.raw("continuum.kde_bandwidth")) {
        if (*v == "sheather_jones") {
            c.kde_bandwidth = BandwidthMethod::sheather_jones;
        } else if (*v == "silverman") {
            c.kde_bandwidth = BandwidthMethod::silverman;
        } else {
            try {
                c.kde_bandwidth_value = io::parse_double(*v);
            } catch (const ConfigError&) {
                throw ConfigError("continuum.kde_bandwidth: expected sheather_jones, silverman or a number");
            }
            detail::require_config(c.kde_bandwidth_value > 0.0, "continuum.kde_bandwidth", "must be positive");
        }
    }
    r.boolean("continuum.kde_exact_cells", c.kde_exact_cells);

    r.check_unused();
    c.validate();
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path.string() + "'");
    }
    return parse_config(in);
}

inline std::string serialize_config(const ExperimentConfig& c)
{
    using io::format_double;
    std::ostringstream out;
    out << "[run]\n"
        << "name = " << c.name << "\n"
        << "debate = " << c.debate << "\n"
        << "variants = ";
    for (std::size_t k = 0; k < c.variants.size(); ++k) {
        out << (k ? ", " : "") << to_string(c.variants[k]);
    }
    out << "\n"
        << "mu_sweep = " << detail::join(c.mu_sweep) << "\n"
        << "snapshot_times = " << detail::join(c.snapshot_times) << "\n"
        << "output_dir = " << c.output_dir.string() << "\n"
        << "seed = " << c.seed << "\n";
    if (c.graph_seed) {
        out << "graph_seed = " << *c.graph_seed << "\n";
    }
    if (c.sampling_seed) {
        out << "sampling_seed = " << *c.sampling_seed << "\n";
    }
    if (c.noise_seed) {
        out << "noise_seed = " << *c.noise_seed << "\n";
    }
    out << "sample_dt = " << format_double(c.sample_dt) << "\n"
        << "fit_t_lo = " << format_double(c.fit_t_lo) << "\n"
        << "fit_t_hi = " << format_double(c.fit_t_hi) << "\n"
        << "fit_truncate = " << (c.fit_truncate ? "true" : "false") << "\n"
        << "trajectory_stride = " << c.trajectory_stride << "\n\n";

    out << "[graph]\n"
        << "n_nodes = " << c.graph.n_nodes << "\n"
        << "n_groups = " << c.graph.n_groups << "\n"
        << "group_proportions = " << detail::join(c.graph.group_proportions) << "\n"
        << "mean_degree = " << format_double(c.graph.mean_degree) << "\n"
        << "mixing_mu = " << format_double(c.graph.mixing_mu) << "\n\n";

    out << "[mixture]\n";
    for (std::size_t p = 0; p < c.mixture.communities.size(); ++p) {
        out << "community_" << p << " = ";
        const auto& comps = c.mixture.communities[p];
        for (std::size_t k = 0; k < comps.size(); ++k) {
            out << (k ? "; " : "") << format_double(comps[k].center) << ' ' << format_double(comps[k].stddev) << ' '
                << format_double(comps[k].weight);
        }
        out << "\n";
    }
    out << "\n";

    out << "[micro]\n"
        << "dt = " << format_double(c.micro.dt) << "\n"
        << "t_end = " << format_double(c.micro.t_end) << "\n"
        << "noise_sigma = " << format_double(c.micro.noise_sigma) << "\n\n";

    out << "[continuum]\n"
        << "grid_size = " << c.grid_size << "\n"
        << "dt = " << format_double(c.continuum.dt) << "\n"
        << "t_end = " << format_double(c.continuum.t_end) << "\n"
        << "eta_cutoff = " << format_double(c.continuum.eta_cutoff) << "\n"
        << "diffusion_sigma = " << format_double(c.continuum.diffusion_sigma) << "\n"
        << "birth_rate = " << format_double(c.continuum.birth_rate) << "\n"
        << "death_rate = " << format_double(c.continuum.death_rate) << "\n"
        << "kde_bandwidth = ";
    if (c.kde_bandwidth_value > 0.0) {
        out << format_double(c.kde_bandwidth_value);
    } else {
        out << (c.kde_bandwidth == BandwidthMethod::sheather_jones ? "sheather_jones" : "silverman");
    }
    out << "\n"
        << "kde_exact_cells = " << (c.kde_exact_cells ? "true" : "false") << "\n";
    return out.str();
}

// ---- presets -------------------------------------------------------------------------------

/// Three equally sized communities with the staggered bimodal opinion mixtures.
inline ExperimentConfig preset_three_communities()
{
    ExperimentConfig c;
    c.name = "three_communities";
    c.graph.n_nodes = 200;
    c.graph.n_groups = 3;
    c.graph.group_proportions = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    c.graph.mean_degree = 10.0;
    c.graph.mixing_mu = 0.05;
    c.mixture = MixtureSpec::three_communities();
    c.micro.dt = 1e-3;
    c.micro.t_end = 30.0;
    c.continuum.t_end = 8.0;
    c.grid_size = 101;
    c.mu_sweep = {1e-3, 1e-2, 1e-1, 0.5};
    c.snapshot_times = {0.0, 1.2, 4.0, 8.0};
    c.output_dir = "out/three_communities";
    c.seed = 1;
    return c;
}

/// Two nearly segregated groups whose inner sub-populations cross near the centre.
inline ExperimentConfig preset_crossing_two_groups()
{
    ExperimentConfig c = preset_three_communities();
    c.name = "crossing_two_groups";
    c.graph.n_groups = 2;
    c.graph.group_proportions = {0.5, 0.5};
    c.graph.mixing_mu = 1e-3;
    c.mixture = MixtureSpec::crossing_two_groups();
    c.mu_sweep = {1e-3};
    c.output_dir = "out/crossing_two_groups";
    return c;
}

inline std::map<std::string, ExperimentConfig (*)()> presets()
{
    return {{"three_communities", &preset_three_communities}, {"crossing_two_groups", &preset_crossing_two_groups}};
}

inline ExperimentConfig preset(const std::string& name)
{
    const auto all = presets();
    const auto it = all.find(name);
    if (it == all.end()) {
        throw ConfigError("preset: unknown preset '" + name + "'");
    }
    return it->second();
}

} // namespace opinet
