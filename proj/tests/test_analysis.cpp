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
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "opinet/analysis.hpp"
#include "opinet/empirical.hpp"

using namespace opinet;

namespace
{

PairField spike(const Grid& grid, std::size_t k, std::size_t l)
{
    PairField g(grid);
    g(k, l) = 1.0 / (grid.width() * grid.width());
    return g;
}

std::vector<double> sample_times(double t_end, double dt)
{
    std::vector<double> t;
    for (int k = 0; k * dt <= t_end + 1e-12; ++k) {
        t.push_back(k * dt);
    }
    return t;
}

} // namespace

TEST(ConsensusCont, SymmetricDataGivesZero)
{
    const Grid grid(20);
    PairField g(grid);
    for (std::size_t i = 0; i < 20; ++i) {
        for (std::size_t j = 0; j < 20; ++j) {
            g(i, j) = std::exp(-grid.midpoint(i) * grid.midpoint(i) - grid.midpoint(j) * grid.midpoint(j));
        }
    }
    g *= 1.0 / g.mass();
    EXPECT_NEAR(consensus_value_cont(g), 0.0, 1e-15);
}

TEST(ConsensusCont, SpikeEvaluatesMidpoint)
{
    const Grid grid(16);
    EXPECT_NEAR(consensus_value_cont(spike(grid, 3, 11)), grid.midpoint(3), 1e-14);
}

TEST(ConsensusCont, UnnormalisedIsRejected)
{
    const Grid grid(16);
    PairField g = spike(grid, 3, 3);
    g *= 1.5;
    EXPECT_THROW(consensus_value_cont(g), ConfigError);
}

TEST(ConsensusCont, PathGraphExample)
{
    CommunityGraph path(3);
    path.add_edge(0, 1);
    path.add_edge(1, 2);
    const auto g = empirical_g_kde(path, std::vector<double>{-0.5, 0.0, 0.5}, Grid(5), 1e-4, KdeOptions{true});
    EXPECT_NEAR(consensus_value_cont(g), 0.0, 1e-14);
}

TEST(ECont, SpikeIsWithinHalfCell)
{
    const Grid grid(21);
    ScalarField f(grid);
    f[13] = 1.0 / grid.width();
    const double w_inf = grid.lower(13) + 0.3 * grid.width();
    EXPECT_LE(e_cont(f, w_inf), grid.width() / 2.0);
}

TEST(ECont, UniformDensity)
{
    for (std::size_t n : {50u, 100u, 200u}) {
        const Grid grid(n);
        const ScalarField f(grid, 0.5);
        EXPECT_NEAR(e_cont(f, 0.0), std::sqrt(1.0 / 3.0), grid.width() * grid.width());
    }
}

TEST(ECont, LabelledAdditivity)
{
    const Grid grid(30);
    LabeledFields l(grid, 2);
    for (std::size_t i = 0; i < 30; ++i) {
        l.f[0][i] = i < 15 ? 1.0 / 3.0 : 0.0;
        l.f[1][i] = i < 15 ? 1.0 / 3.0 : 2.0 / 3.0;
    }
    EXPECT_NEAR(e_cont(l, 0.1), e_cont(l.total_f(), 0.1), 1e-15);
}

TEST(LyapunovTilde, SpikeValues)
{
    const Grid grid(12);
    const auto d = DebateOperator::linear();
    EXPECT_EQ(lyapunov_tilde(spike(grid, 4, 4), d), 0.0);
    const double z = grid.midpoint(2) - grid.midpoint(9);
    EXPECT_NEAR(lyapunov_tilde(spike(grid, 2, 9), d), 0.5 * z * z, 1e-14);
}

TEST(Connectivity, MassAndComplete)
{
    const Grid grid(25);
    ScalarField f(grid);
    for (std::size_t i = 0; i < 25; ++i) {
        f[i] = 1.0 + std::sin(static_cast<double>(i));
    }
    f *= 1.0 / f.mass();
    PairField g(grid);
    for (std::size_t i = 0; i < 25; ++i) {
        for (std::size_t j = 0; j < 25; ++j) {
            g(i, j) = f[i] * f[j];
        }
    }
    const auto h = connectivity_marginal(g);
    EXPECT_NEAR(h.mass(), g.mass(), 1e-14);
    for (std::size_t i = 0; i < 25; ++i) {
        EXPECT_NEAR(h[i], f[i], 1e-14);
    }
}

TEST(Connectivity, PathGraphIsNotProportionalToF)
{
    CommunityGraph path(3);
    path.add_edge(0, 1);
    path.add_edge(1, 2);
    const Grid grid(10);
    const std::vector<double> w{-0.5, 0.1, 0.5};
    const auto h = connectivity_marginal(empirical_g_kde(path, w, grid, 1e-3));
    EXPECT_NEAR(h[5] / h[2], 2.0, 1e-12);
    EXPECT_NEAR(h[7] / h[2], 1.0, 1e-12);
    const auto f = empirical_f(w, grid);
    EXPECT_EQ(f[2], f[5]);
}

TEST(RateFit, ExactExponential)
{
    const auto t = sample_times(10.0, 0.05);
    std::vector<double> v;
    std::vector<double> v2;
    for (double s : t) {
        v.push_back(std::exp(-0.3 * s));
        v2.push_back(2.0 * std::exp(-0.3 * s));
    }
    const auto a = fit_exponential_rate(t, v, 2.0, 8.0);
    EXPECT_NEAR(a.rate, 0.3, 1e-9);
    EXPECT_NEAR(a.fit_error, 0.0, 1e-9);
    const auto b = fit_exponential_rate(t, v2, 2.0, 8.0);
    EXPECT_NEAR(b.rate, 0.3, 1e-9);
    EXPECT_NEAR(b.intercept - a.intercept, std::log(2.0), 1e-9);
}

TEST(RateFit, FloorLowersTheRate)
{
    const auto t = sample_times(10.0, 0.05);
    std::vector<double> v;
    for (double s : t) {
        v.push_back(std::exp(-0.3 * s) + 0.007);
    }
    const auto fit = fit_exponential_rate(t, v, 2.0, 8.0);
    EXPECT_LT(fit.rate, 0.3);
    EXPECT_GT(fit.fit_error, 0.0);
    EXPECT_LE(fit.fit_error, 1.0);
}

TEST(RateFit, Errors)
{
    const auto t = sample_times(10.0, 0.5);
    std::vector<double> v(t.size(), 1.0);
    v[6] = 0.0;
    EXPECT_THROW(fit_exponential_rate(t, v, 2.0, 8.0), NumericalError);
    const std::vector<double> few_t{0, 1, 2};
    const std::vector<double> few_v{1, 0.5, 0.25};
    EXPECT_THROW(fit_exponential_rate(few_t, few_v, 0.0, 2.0), NumericalError);
    EXPECT_THROW(fit_exponential_rate(few_t, v, 0.0, 2.0), ConfigError);
}

TEST(RateFit, TruncationStopsAtThePlateau)
{
    const auto t = sample_times(10.0, 0.05);
    std::vector<double> v;
    for (double s : t) {
        v.push_back(std::max(std::exp(-1.0 * s), 1e-3));
    }
    const double end = truncated_window_end(t, v, 2.0, 8.0);
    // first sample with e^{-t} < 3e-3
    EXPECT_NEAR(end, std::ceil(-std::log(3e-3) / 0.05) * 0.05, 1e-9);
    EXPECT_NEAR(fit_exponential_rate(t, v, 2.0, end).rate, 1.0, 1e-6);

    std::vector<double> clean;
    for (double s : t) {
        clean.push_back(std::exp(-0.1 * s));
    }
    EXPECT_EQ(truncated_window_end(t, clean, 2.0, 8.0), 8.0);
}
