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
// Acceptance suite. Prints one PASS/FAIL line per criterion; `--only K` runs criterion K.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "opinet/analysis.hpp"
#include "opinet/config.hpp"
#include "opinet/continuum.hpp"
#include "opinet/empirical.hpp"
#include "opinet/experiment.hpp"
#include "opinet/graph.hpp"
#include "opinet/io.hpp"
#include "opinet/micro.hpp"
#include "support.hpp"

using namespace opinet;
using opinet::io::format_double;
using opinet::fixtures::median;
using opinet::fixtures::scenario;

namespace
{

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

const std::vector<double> kMuGrid{1e-3, 1e-2, 1e-1, 0.5};
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

ExperimentConfig micro_only(ExperimentConfig c, double t_end)
{
    c.variants = {Variant::micro};
    c.micro.t_end = t_end;
    return c;
}

// ---- discrete model ------------------------------------------------------------------------

Outcome micro_conservation()
{
    const auto cfg = micro_only(scenario("three_communities", 1, 0.05), 30.0);
    const auto data = build_initial_data(cfg);
    const auto report = run_experiment(cfg, {false, nullptr});
    const double c0 = report.conserved_micro.front();
    double worst = 0.0;
    for (double c : report.conserved_micro) {
        if (!std::isnan(c)) {
            worst = std::max(worst, std::abs(c - c0));
        }
    }
    const double rel = worst / static_cast<double>(data.graph.degree_sum());
    return {rel < 1e-9, "max relative drift " + fmt(rel) + " over T=30 (tol 1e-9)"};
}

Outcome micro_consensus()
{
    const auto d = DebateOperator::linear();
    bool pass = true;
    std::string detail = "max|w_i(30) - w_inf|:";
    for (double mu : kMuGrid) {
        const auto cfg = micro_only(scenario("three_communities", 1, mu), 30.0);
        const auto data = build_initial_data(cfg);
        const double w_inf = consensus_value_micro(data.opinions, data.graph);
        const auto final = fixtures::integrate_micro(data.opinions, data.graph, d, cfg.micro.dt, 30.0);
        double worst = 0.0;
        for (double w : final.omegas) {
            worst = std::max(worst, std::abs(w - w_inf));
        }
        pass = pass && data.graph.is_connected() && worst < 1e-4;
        detail += " mu=" + fmt(mu) + ":" + fmt(worst);
    }
    return {pass, detail + " (tol 1e-4)"};
}

Outcome micro_rate_bound()
{
    bool pass = true;
    std::string detail = "rate / (lambda2/max deg):";
    for (std::uint64_t seed : kSeeds) {
        const auto cfg = micro_only(scenario("three_communities", seed, 0.05), 8.0);
        const auto data = build_initial_data(cfg);
        const double bound = spectral_gap(laplacian(data.graph)) / static_cast<double>(data.graph.max_degree());
        const auto report = run_experiment(cfg, {false, nullptr});
        const double rate = report.fitted_rates.at("micro").rate;
        pass = pass && rate >= 0.9 * bound;
        detail += " " + fmt(rate / bound);
    }
    return {pass, detail + " (need >= 0.9 on every seed)"};
}

Outcome micro_step_hull()
{
    std::mt19937_64 rng(20241015);
    std::uniform_int_distribution<std::size_t> size(3, 30);
    std::uniform_real_distribution<double> prob(0.05, 0.6);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    std::size_t admissible_violations = 0;
    std::size_t oversized_hits = 0;
    const std::size_t trials = 1000;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto d = t % 2 == 0 ? DebateOperator::linear() : DebateOperator::quartic();
        const auto graph = fixtures::random_graph(size(rng), prob(rng), rng);
        const OpinionState state{fixtures::uniform_opinions(graph.n_nodes(), rng), 0.0};
        const double bound = step_size_bound(d);
        const double dt = t % 10 == 0 ? bound : bound * (1.0 - frac(rng));
        admissible_violations += hull_violations(state, euler_step(state, graph, d, dt), graph);
        if (hull_violations(state, euler_step(state, graph, d, 4.0 * bound), graph) > 0) {
            ++oversized_hits;
        }
    }
    return {admissible_violations == 0 && oversized_hits > 0,
            std::to_string(admissible_violations) + " violations with dt <= bound over " + std::to_string(trials) +
                " trials; dt = 4x bound broke the hull in " + std::to_string(oversized_hits) + " trials"};
}

// ---- continuum scheme ----------------------------------------------------------------------

/// 10^4 steps of both continuum variants from the preset's initial data, shared by three criteria.
struct LongRun {
    double dt = 0.0;
    double cfl_dt = 0.0;
    double f_drift = 0.0;
    double g_drift = 0.0;
    double asym = 0.0;
    double min_value = 0.0;
};

const LongRun& long_run()
{
    static const LongRun result = [] {
        const auto cfg = scenario("three_communities", 1, 0.05);
        const auto data = build_initial_data(cfg);
        const Grid grid(cfg.grid_size);
        const auto d = DebateOperator::by_name(cfg.debate);
        const ContinuumSolver solver(d, grid, cfg.continuum);
        LongRun r;
        r.dt = solver.dt();
        r.cfl_dt = 0.9 * grid.width() / (2.0 * d.sup_norm);

        auto [f, g] = *data.unlabeled;
        LabeledFields fields = *data.labeled;
        const double f0 = f.mass();
        const double g0 = g.mass();
        const double lf0 = fields.f_mass();
        const double lg0 = fields.g_mass();
        for (int n = 0; n < 10000; ++n) {
            std::tie(f, g) = solver.step(std::move(f), std::move(g));
            solver.step(fields);
        }
        r.f_drift = std::max(std::abs(f.mass() - f0) / f0, std::abs(fields.f_mass() - lf0) / lf0);
        r.g_drift = std::max(std::abs(g.mass() - g0) / g0, std::abs(fields.g_mass() - lg0) / lg0);
        r.asym = std::max(g.asymmetry(), fields.cross_asymmetry());
        r.min_value = std::min(f.min(), g.min());
        for (const auto& fp : fields.f) {
            r.min_value = std::min(r.min_value, fp.min());
        }
        for (const auto& gpq : fields.g) {
            r.min_value = std::min(r.min_value, gpq.min());
        }
        return r;
    }();
    return result;
}

Outcome scheme_conservativity()
{
    const auto& r = long_run();
    return {r.f_drift < 1e-12 && r.g_drift < 1e-12,
            "relative mass drift after 1e4 steps: f " + fmt(r.f_drift) + ", g " + fmt(r.g_drift) + " (tol 1e-12)"};
}

Outcome scheme_symmetry()
{
    const auto& r = long_run();
    return {r.asym == 0.0, "max|g_ij - g_ji| after 1e4 steps = " + fmt(r.asym) + " (must be exactly 0)"};
}

Outcome scheme_positivity()
{
    const auto& r = long_run();
    const bool at_cfl = r.dt == r.cfl_dt;
    return {at_cfl && r.min_value >= 0.0, "dt = " + fmt(r.dt) + (at_cfl ? " (= 0.9 CFL)" : " (not 0.9 CFL!)") +
                                              ", min over all f and g after 1e4 steps = " + fmt(r.min_value)};
}

Outcome scaling_invariance()
{
    const auto cfg = scenario("three_communities", 1, 0.05);
    const auto data = build_initial_data(cfg);
    const ContinuumSolver solver(DebateOperator::by_name(cfg.debate), Grid(cfg.grid_size), cfg.continuum);
    auto [f1, g1] = *data.unlabeled;
    ScalarField f2 = f1;
    PairField g2 = g1;
    g2 *= 2.0;
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        std::tie(f1, g1) = solver.step(std::move(f1), std::move(g1));
        std::tie(f2, g2) = solver.step(std::move(f2), std::move(g2));
        for (std::size_t i = 0; i < f1.size(); ++i) {
            worst = std::max(worst, std::abs(f1[i] - f2[i]));
        }
    }
    return {worst <= 1e-13, "max |f[g0] - f[2 g0]| over 100 steps = " + fmt(worst) + " (tol 1e-13)"};
}

double first_moment_defect(std::size_t grid_size, double t_end)
{
    auto cfg = scenario("three_communities", 1, 0.05);
    cfg.variants = {Variant::cont_unlabeled};
    cfg.grid_size = grid_size;
    const auto data = build_initial_data(cfg);
    const Grid grid(grid_size);
    const ContinuumSolver solver(DebateOperator::by_name(cfg.debate), grid, cfg.continuum);
    const std::size_t steps = detail::substeps(t_end, solver.dt());
    const double dt = t_end / static_cast<double>(steps);
    auto [f, g] = *data.unlabeled;
    const double m0 = g_first_moment(g);
    for (std::size_t n = 0; n < steps; ++n) {
        std::tie(f, g) = solver.step(std::move(f), std::move(g), dt);
    }
    return std::abs(g_first_moment(g) - m0);
}

Outcome continuum_first_moment()
{
    const double coarse = first_moment_defect(101, 2.0);
    const double fine = first_moment_defect(202, 2.0);
    const double ratio = coarse / fine;
    return {ratio >= 1.6 && ratio <= 2.4, "defect N_cont=101: " + fmt(coarse) + ", N_cont=202: " + fmt(fine) +
                                              ", ratio " + fmt(ratio) + " (need 2 +- 20%)"};
}

Outcome continuum_lyapunov()
{
    const auto cfg = scenario("three_communities", 1, 0.05);
    const auto data = build_initial_data(cfg);
    const auto d = DebateOperator::by_name(cfg.debate);
    const Grid grid(cfg.grid_size);
    const ContinuumSolver solver(d, grid, cfg.continuum);
    const double slack = 10.0 * grid.width() * solver.dt();
    const auto steps = static_cast<std::size_t>(std::ceil(cfg.continuum.t_end / solver.dt()));

    auto [f, g] = *data.unlabeled;
    LabeledFields fields = *data.labeled;
    double v_u = lyapunov_tilde(g, d);
    double v_l = lyapunov_tilde(fields.total_g(), d);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < steps; ++n) {
        std::tie(f, g) = solver.step(std::move(f), std::move(g));
        solver.step(fields);
        const double nu = lyapunov_tilde(g, d);
        const double nl = lyapunov_tilde(fields.total_g(), d);
        worst = std::max({worst, nu - v_u, nl - v_l});
        v_u = nu;
        v_l = nl;
    }
    return {worst <= slack, "largest one-step increase " + fmt(worst) + " vs allowance 10 dw dt = " + fmt(slack) +
                                " over " + std::to_string(steps) + " steps (both variants)"};
}

// ---- sweeps ----------------------------------------------------------------------------------

Outcome mu_trend()
{
    std::vector<double> medians;
    std::string detail = "median rate_micro:";
    for (double mu : kMuGrid) {
        std::vector<double> rates;
        for (std::uint64_t seed : kSeeds) {
            const auto report = run_experiment(micro_only(scenario("three_communities", seed, mu), 8.0), {false, nullptr});
            rates.push_back(report.fitted_rates.at("micro").rate);
        }
        medians.push_back(median(rates));
        detail += " mu=" + fmt(mu) + ":" + fmt(medians.back());
    }
    const bool increasing = std::adjacent_find(medians.begin(), medians.end(), std::greater_equal<>()) == medians.end();
    return {increasing, detail};
}

/// Largest f value over cells with |mid| < 0.125, i.e. between the two inner sub-populations.
double central_peak(const ScalarField& f)
{
    double peak = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (std::abs(f.grid.midpoint(i)) < 0.125) {
            peak = std::max(peak, f[i]);
        }
    }
    return peak;
}

Outcome labeling_matters()
{
    std::vector<double> err_l;
    std::vector<double> err_u;
    std::vector<double> spike;
    for (std::uint64_t seed : kSeeds) {
        auto cfg = scenario("crossing_two_groups", seed, 1e-3);
        cfg.micro.t_end = 8.0;
        const auto report = run_experiment(cfg, {false, nullptr});
        const double m = report.fitted_rates.at("micro").rate;
        err_l.push_back(std::abs(report.fitted_rates.at("cont_labeled").rate - m));
        err_u.push_back(std::abs(report.fitted_rates.at("cont_unlabeled").rate - m));

        const auto data = build_initial_data(cfg);
        const ContinuumSolver solver(DebateOperator::by_name(cfg.debate), Grid(cfg.grid_size), cfg.continuum);
        const double t_snap = 1.2;
        const std::size_t steps = detail::substeps(t_snap, solver.dt());
        const double dt = t_snap / static_cast<double>(steps);
        auto [f, g] = *data.unlabeled;
        LabeledFields fields = *data.labeled;
        for (std::size_t n = 0; n < steps; ++n) {
            std::tie(f, g) = solver.step(std::move(f), std::move(g), dt);
            solver.step(fields, dt);
        }
        spike.push_back(central_peak(f) / central_peak(fields.total_f()));
    }
    const double ml = median(err_l);
    const double mu = median(err_u);
    const double ms = median(spike);
    std::string spikes;
    for (double s : spike) {
        spikes += " " + fmt(s);
    }
    return {ml < mu && ms > 3.0, "median |rate - rate_micro|: labelled " + fmt(ml) + ", unlabelled " + fmt(mu) +
                                     "; central peak ratio unlabelled/labelled at t=1.2:" + spikes + " (median " +
                                     fmt(ms) + ", need > 3)"};
}

// ---- reductions and oracles ----------------------------------------------------------------

Outcome labeled_reduction()
{
    GraphConfig gc;
    gc.n_nodes = 200;
    gc.mean_degree = 10.0;
    gc.seed = 7;
    const auto graph = generate_community_graph(gc);
    MixtureSpec pooled{{{}}};
    for (const auto& comm : MixtureSpec::three_communities().communities) {
        for (auto c : comm) {
            c.weight /= 3.0;
            pooled.communities[0].push_back(c);
        }
    }
    std::mt19937_64 rng(8);
    const auto opinions = sample_initial_opinions(pooled, graph, rng);
    const Grid grid(101);
    const double bw = bandwidth_select(opinions.omegas, BandwidthMethod::sheather_jones);
    LabeledFields fields = split_by_group(opinions.omegas, graph, grid, bw);
    fields.f = cell_average_mixture(pooled, grid, community_shares(graph));
    ScalarField f = fields.f[0];
    PairField g = empirical_g_kde(graph, opinions.omegas, grid, bw);

    const ContinuumSolver solver(DebateOperator::linear(), grid, ContinuumParams{});
    bool identical = g.values == fields.g[0].values;
    for (int n = 0; n < 100 && identical; ++n) {
        std::tie(f, g) = solver.step(std::move(f), std::move(g));
        solver.step(fields);
        identical = f.values == fields.f[0].values && g.values == fields.g[0].values;
    }
    return {identical, identical ? "bit-identical f and g for 100 steps" : "fields diverged"};
}

Outcome noise_variance()
{
    const std::size_t n = 10000;
    CommunityGraph ring(n);
    for (std::size_t i = 0; i < n; ++i) {
        ring.add_edge(i, (i + 1) % n);
    }
    const double sigma = 0.01;
    const double dt = 1e-3;
    const double t_end = 1.0;
    std::mt19937_64 rng(14);
    OpinionState state{std::vector<double>(n, 0.0), 0.0};
    const auto d = DebateOperator::zero();
    for (int k = 0; k < 1000; ++k) {
        state = euler_maruyama_step(state, ring, d, dt, sigma, rng);
    }
    double mean = 0.0;
    for (double w : state.omegas) {
        mean += w;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double w : state.omegas) {
        var += (w - mean) * (w - mean);
    }
    var /= static_cast<double>(n - 1);
    const double expected = 2.0 * sigma * t_end;
    const double rel = std::abs(var / expected - 1.0);
    return {rel < 0.05, "sample variance " + fmt(var) + " vs 2 sigma t = " + fmt(expected) + ", relative error " +
                            fmt(rel) + " (tol 5%)"};
}

Outcome three_node_oracle()
{
    // Path 0-1-2 with opinions on cell midpoints of a 10-cell grid (dw = 0.2), and a bandwidth
    // far below dw so every kernel collapses onto its own cell.
    CommunityGraph path(3);
    path.add_edge(0, 1);
    path.add_edge(1, 2);
    const std::vector<double> w{-0.5, 0.1, 0.5};
    const Grid grid(10);
    const std::size_t c0 = 2;
    const std::size_t c1 = 5;
    const std::size_t c2 = 7;
    const auto d = DebateOperator::linear();
    double err = 0.0;
    auto check = [&err](double got, double want) { err = std::max(err, std::abs(got - want)); };

    const auto f = empirical_f(w, grid);
    for (std::size_t i = 0; i < 10; ++i) {
        check(f[i], (i == c0 || i == c1 || i == c2) ? 5.0 / 3.0 : 0.0);
    }
    const auto g = empirical_g_kde(path, w, grid, 1e-3);
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 10; ++j) {
            const bool site = (i == c0 && j == c1) || (i == c1 && j == c0) || (i == c1 && j == c2) ||
                              (i == c2 && j == c1);
            check(g(i, j), site ? 6.25 : 0.0);
        }
    }
    const auto eta = eta_discrete(g, 1e-10);
    check(eta(c0, c1), 5.0);
    check(eta(c1, c0), 2.5);
    check(eta(c1, c2), 2.5);
    check(eta(c2, c1), 5.0);
    const auto a = velocity(g, d);
    check(a[c0], 0.6);
    check(a[c1], -0.1);
    check(a[c2], -0.4);
    const auto rhs = micro_rhs(OpinionState{w, 0.0}, path, d);
    check(rhs[0], 0.6);
    check(rhs[1], -0.1);
    check(rhs[2], -0.4);
    check(consensus_value_micro(OpinionState{w, 0.0}, path), 0.05);
    check(consensus_value_cont(g), 0.05);
    const auto h = connectivity_marginal(g);
    check(h[c0], 1.25);
    check(h[c1], 2.5);
    check(h[c2], 1.25);

    // Symmetric opinions off the midpoints, exact cell integrals: both consensus values are 0.
    const std::vector<double> ws{-0.5, 0.0, 0.5};
    const Grid coarse(5);
    const auto gs = empirical_g_kde(path, ws, coarse, 1e-4, KdeOptions{true});
    check(consensus_value_cont(gs), 0.0);
    check(consensus_value_micro(OpinionState{ws, 0.0}, path), 0.0);
    check(gs(1, 2), 0.25 / (0.4 * 0.4));

    return {err < 1e-10, "max deviation from hand-derived values " + fmt(err) + " (tol 1e-10)"};
}

struct Criterion {
    const char* name;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria()
{
    static const std::vector<Criterion> all{
        {"discrete conservation", micro_conservation},
        {"discrete consensus at T=30", micro_consensus},
        {"exponential rate bound", micro_rate_bound},
        {"step-size hull property", micro_step_hull},
        {"scheme conservativity", scheme_conservativity},
        {"scheme symmetry", scheme_symmetry},
        {"scheme positivity", scheme_positivity},
        {"scaling invariance", scaling_invariance},
        {"first-moment conservation order", continuum_first_moment},
        {"continuum Lyapunov decay", continuum_lyapunov},
        {"rate increases with mu", mu_trend},
        {"group labelling matters", labeling_matters},
        {"labelled/unlabelled reduction", labeled_reduction},
        {"noise variance", noise_variance},
        {"three-node oracle", three_node_oracle},
    };
    return all;
}

} // namespace

int main(int argc, char** argv)
{
    std::optional<std::size_t> only;
    for (int k = 1; k < argc; ++k) {
        if (std::string(argv[k]) == "--only" && k + 1 < argc) {
            only = std::strtoul(argv[++k], nullptr, 10);
        }
    }
    const auto& all = criteria();
    if (only && (*only < 1 || *only > all.size())) {
        std::cerr << "--only expects 1.." << all.size() << '\n';
        return 2;
    }
    int failures = 0;
    for (std::size_t k = 0; k < all.size(); ++k) {
        if (only && *only != k + 1) {
            continue;
        }
        Outcome o;
        try {
            o = all[k].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] %02zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, all[k].name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
