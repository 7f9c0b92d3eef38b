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
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "opinet/config.hpp"
#include "opinet/experiment.hpp"
#include "opinet/graph.hpp"
#include "opinet/micro.hpp"

namespace opinet::fixtures
{

/// Preset configuration with in-memory runs only.
inline ExperimentConfig scenario(const std::string& name, std::uint64_t seed, double mu)
{
    ExperimentConfig c = preset(name);
    c.seed = seed;
    c.graph.mixing_mu = mu;
    c.snapshot_times.clear();
    return c;
}

/// Fixed-step Euler run from `state` up to time t_end.
inline OpinionState integrate_micro(OpinionState state, const CommunityGraph& graph, const DebateOperator& d,
                                    double dt, double t_end)
{
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    for (std::size_t k = 0; k < steps; ++k) {
        state = euler_step(state, graph, d, dt);
    }
    return state;
}

inline double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Erdos-Renyi graph made connected; used for randomised property tests.
inline CommunityGraph random_graph(std::size_t n, double p, std::mt19937_64& rng)
{
    CommunityGraph g(n);
    std::bernoulli_distribution coin(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (coin(rng)) {
                g.add_edge(i, j);
            }
        }
    }
    return ensure_connected(std::move(g), rng);
}

inline std::vector<double> uniform_opinions(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(n);
    for (double& x : w) {
        x = u(rng);
    }
    return w;
}

} // namespace opinet::fixtures
