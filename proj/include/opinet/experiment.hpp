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
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "opinet/analysis.hpp"
#include "opinet/config.hpp"
#include "opinet/continuum.hpp"
#include "opinet/empirical.hpp"
#include "opinet/graph.hpp"
#include "opinet/io.hpp"
#include "opinet/micro.hpp"

namespace opinet
{

struct RunOptions {
    bool write_files = true;
    std::ostream* log = nullptr;
};

/// Initial data shared by all variants of one run.
struct InitialData {
    CommunityGraph graph;
    OpinionState opinions;
    double bandwidth = 0.0;
    std::optional<LabeledFields> labeled;
    std::optional<std::pair<ScalarField, PairField>> unlabeled;
};

/// Graph, opinions and (if a continuum variant is selected) the initial fields: f from cell
/// averages of the community mixtures weighted by the realised community shares, g from the
/// KDE of the edge distribution.
inline InitialData build_initial_data(const ExperimentConfig& config)
{
    InitialData data;
    GraphConfig gc = config.graph;
    gc.seed = config.stage_seed(SeedStage::graph);
    data.graph = generate_community_graph(gc);

    std::mt19937_64 rng(config.stage_seed(SeedStage::sampling));
    data.opinions = sample_initial_opinions(config.mixture, data.graph, rng);

    if (!config.has_continuum()) {
        return data;
    }
    const Grid grid(config.grid_size);
    data.bandwidth = config.kde_bandwidth_value > 0.0 ? config.kde_bandwidth_value
                                                      : bandwidth_select(data.opinions.omegas, config.kde_bandwidth);
    const KdeOptions opt{config.kde_exact_cells};
    const auto shares = community_shares(data.graph);
    auto f_parts = cell_average_mixture(config.mixture, grid, shares);

    LabeledFields labeled = split_by_group(data.opinions.omegas, data.graph, grid, data.bandwidth, opt);
    labeled.f = f_parts;
    if (config.has(Variant::cont_labeled)) {
        data.labeled = labeled;
    }
    if (config.has(Variant::cont_unlabeled)) {
        data.unlabeled.emplace(labeled.total_f(),
                               empirical_g_kde(data.graph, data.opinions.omegas, grid, data.bandwidth, opt));
    }
    return data;
}

namespace detail
{
/// Number of equal substeps of at most `dt_max` that tile one sampling interval.
inline std::size_t substeps(double sample_dt, double dt_max)
{
    return static_cast<std::size_t>(std::max(1.0, std::ceil(sample_dt / dt_max * (1.0 - 1e-12))));
}

inline void log_line(const RunOptions& opt, const std::string& msg)
{
    if (opt.log != nullptr) {
        *opt.log << msg << '\n';
    }
}

/// E series restricted to samples that the variant actually produced.
inline void fit_variant(RunReport& report, const std::string& key, const std::vector<double>& series,
                        double t_end, const ExperimentConfig& config)
{
    const double hi = std::min(config.fit_t_hi, t_end);
    // Only the continuum series reach a numerical-diffusion plateau.
    const bool plateau = key != to_string(Variant::micro);
    const double end = config.fit_truncate && plateau
                           ? truncated_window_end(report.times, series, config.fit_t_lo, hi)
                           : hi;
    try {
        report.fitted_rates[key] = fit_exponential_rate(report.times, series, config.fit_t_lo, end);
    } catch (const NumericalError& e) {
        report.warnings.push_back(key + ": " + e.what());
    }
}
} // namespace detail

/// Runs every selected variant on the shared sampling grid t_k = k * sample_dt and fills the
/// report; with `write_files` the report, diagnostics, snapshots and graph are written under
/// config.output_dir.
inline RunReport run_experiment(const ExperimentConfig& config, const RunOptions& opt = {})
{
    config.validate();
    const DebateOperator d = DebateOperator::by_name(config.debate);
    const InitialData data = build_initial_data(config);
    const CommunityGraph& graph = data.graph;
    const std::filesystem::path out = config.output_dir;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto n_samples = static_cast<std::size_t>(std::llround(config.horizon() / config.sample_dt)) + 1;
    RunReport report;
    report.times.resize(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        report.times[k] = static_cast<double>(k) * config.sample_dt;
    }
    for (auto* s : {&report.e_micro, &report.e_cont_labeled, &report.e_cont_unlabeled, &report.conserved_micro,
                    &report.g_first_moment, &report.v_micro, &report.lyapunov_tilde}) {
        s->assign(n_samples, nan);
    }
    auto last_sample = [&](double t_end) {
        return std::min(n_samples - 1, static_cast<std::size_t>(std::floor(t_end / config.sample_dt + 1e-9)));
    };

    std::vector<std::size_t> snapshot_samples;
    for (double t : config.snapshot_times) {
        snapshot_samples.push_back(static_cast<std::size_t>(std::llround(t / config.sample_dt)));
    }
    auto is_snapshot = [&](std::size_t k) {
        return std::find(snapshot_samples.begin(), snapshot_samples.end(), k) != snapshot_samples.end();
    };

    if (opt.write_files) {
        std::filesystem::create_directories(out);
        auto edges = io::open_output(out / "edges.tsv");
        write_edge_list(edges, graph);
        auto labels = io::open_output(out / "labels.tsv");
        write_labels(labels, graph);
        auto cfg = io::open_output(out / "config.ini");
        cfg << serialize_config(config);
    }

    if (config.has(Variant::micro)) {
        detail::log_line(opt, "micro: N=" + std::to_string(graph.n_nodes()) + ", edges=" +
                                  std::to_string(graph.n_edges()));
        report.omega_inf_micro = consensus_value_micro(data.opinions, graph);
        const std::size_t sub = detail::substeps(config.sample_dt, config.micro.dt);
        const double dt = config.sample_dt / static_cast<double>(sub);
        const std::size_t k_end = last_sample(config.micro.t_end);
        std::mt19937_64 noise(config.stage_seed(SeedStage::noise));

        std::optional<std::ofstream> traj;
        if (opt.write_files && config.trajectory_stride > 0) {
            traj = io::open_output(out / "micro_trajectory.tsv");
            std::vector<std::string> header{"t"};
            for (std::size_t i = 0; i < graph.n_nodes(); ++i) {
                header.push_back("omega_" + std::to_string(i));
            }
            io::write_header(*traj, header);
        }

        OpinionState state = data.opinions;
        for (std::size_t k = 0; k <= k_end; ++k) {
            if (k > 0) {
                for (std::size_t s = 0; s < sub; ++s) {
                    state = euler_maruyama_step(state, graph, d, dt, config.micro.noise_sigma, noise);
                }
                state.time = report.times[k];
            }
            report.e_micro[k] = e_micro(state, report.omega_inf_micro);
            report.conserved_micro[k] = conserved_quantity_micro(state, graph);
            report.v_micro[k] = potential_V(state, graph, d);
            if (traj && k % config.trajectory_stride == 0) {
                std::vector<double> row{report.times[k]};
                row.insert(row.end(), state.omegas.begin(), state.omegas.end());
                io::write_row(*traj, row);
            }
        }
        if (opt.write_files) {
            io::Table t;
            t.header = {"t", "conserved", "V", "E_micro"};
            for (std::size_t k = 0; k <= k_end; ++k) {
                t.rows.push_back({report.times[k], report.conserved_micro[k], report.v_micro[k], report.e_micro[k]});
            }
            io::write_table(out / "micro_diagnostics.tsv", t);
        }
        detail::fit_variant(report, to_string(Variant::micro), report.e_micro, config.micro.t_end, config);
    }

    if (config.has_continuum()) {
        const Grid grid(config.grid_size);
        const ContinuumSolver solver(d, grid, config.continuum);
        const std::size_t sub = detail::substeps(config.sample_dt, solver.dt());
        const double dt = config.sample_dt / static_cast<double>(sub);
        const std::size_t k_end = last_sample(config.continuum.t_end);
        const PairField g0 = data.unlabeled ? data.unlabeled->second : data.labeled->total_g();
        report.omega_inf_cont = consensus_value_cont(g0);
        detail::log_line(opt, "continuum: N_cont=" + std::to_string(grid.size()) + ", dt=" +
                                  io::format_double(dt) + ", bandwidth=" + io::format_double(data.bandwidth));

        if (data.unlabeled) {
            auto [f, g] = *data.unlabeled;
            for (std::size_t k = 0; k <= k_end; ++k) {
                if (k > 0) {
                    for (std::size_t s = 0; s < sub; ++s) {
                        std::tie(f, g) = solver.step(std::move(f), std::move(g), dt);
                    }
                }
                report.e_cont_unlabeled[k] = e_cont(f, report.omega_inf_cont);
                report.g_first_moment[k] = g_first_moment(g);
                report.lyapunov_tilde[k] = lyapunov_tilde(g, d);
                if (opt.write_files && is_snapshot(k)) {
                    io::write_snapshot(out / "cont_unlabeled", k * sub, f, g);
                }
            }
            detail::fit_variant(report, to_string(Variant::cont_unlabeled), report.e_cont_unlabeled,
                                config.continuum.t_end, config);
        }
        if (data.labeled) {
            LabeledFields fields = *data.labeled;
            for (std::size_t k = 0; k <= k_end; ++k) {
                if (k > 0) {
                    for (std::size_t s = 0; s < sub; ++s) {
                        solver.step(fields, dt);
                    }
                }
                report.e_cont_labeled[k] = e_cont(fields, report.omega_inf_cont);
                if (!data.unlabeled) {
                    const PairField g = fields.total_g();
                    report.g_first_moment[k] = g_first_moment(g);
                    report.lyapunov_tilde[k] = lyapunov_tilde(g, d);
                }
                if (opt.write_files && is_snapshot(k)) {
                    io::write_snapshot(out / "cont_labeled", k * sub, fields);
                }
            }
            detail::fit_variant(report, to_string(Variant::cont_labeled), report.e_cont_labeled,
                                config.continuum.t_end, config);
        }
    }

    for (const auto& w : report.warnings) {
        detail::log_line(opt, "warning: " + w);
    }
    if (opt.write_files) {
        io::write_report(out / "report.tsv", report);
    }
    return report;
}

inline io::RatesRow rates_row(double mu, const RunReport& r)
{
    io::RatesRow row;
    row.mu = mu;
    auto take = [&](const std::string& key, double& rate, double& err) {
        if (const auto it = r.fitted_rates.find(key); it != r.fitted_rates.end()) {
            rate = it->second.rate;
            err = it->second.fit_error;
        }
    };
    take("micro", row.rate_micro, row.fit_err_micro);
    take("cont_labeled", row.rate_cont_labeled, row.fit_err_cont_labeled);
    take("cont_unlabeled", row.rate_cont_unlabeled, row.fit_err_cont_unlabeled);
    return row;
}

struct SweepFailure {
    double mu = 0.0;
    std::string message;
};

struct SweepResult {
    std::vector<io::RatesRow> rows;
    std::vector<SweepFailure> failures;
};

/// One run per mu in config.mu_sweep, each in its own subdirectory mu_<value>. A failing mu is
/// recorded and the sweep moves on.
inline SweepResult run_mu_sweep(const ExperimentConfig& config, const RunOptions& opt = {})
{
    detail::require_config(!config.mu_sweep.empty(), "run.mu_sweep", "must not be empty for a sweep");
    config.validate();
    SweepResult result;
    for (double mu : config.mu_sweep) {
        ExperimentConfig c = config;
        c.graph.mixing_mu = mu;
        c.output_dir = config.output_dir / ("mu_" + io::format_double(mu));
        detail::log_line(opt, "sweep: mu=" + io::format_double(mu));
        try {
            result.rows.push_back(rates_row(mu, run_experiment(c, opt)));
        } catch (const std::exception& e) {
            result.failures.push_back({mu, e.what()});
            detail::log_line(opt, "sweep: mu=" + io::format_double(mu) + " failed: " + e.what());
        }
    }
    if (opt.write_files) {
        io::write_rates(config.output_dir / "rates.tsv", result.rows);
        io::write_rates_gnuplot(config.output_dir / "rates.gp");
    }
    return result;
}

} // namespace opinet
