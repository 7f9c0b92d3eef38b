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
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "opinet/debate.hpp"
#include "opinet/errors.hpp"
#include "opinet/graph.hpp"

namespace opinet
{

struct OpinionState {
    std::vector<double> omegas;
    double time = 0.0;

    std::size_t size() const noexcept { return omegas.size(); }
    bool operator==(const OpinionState&) const = default;
};

/// Largest Euler step keeping every update inside the hull of its closed neighbourhood:
/// 1 / sup|D'|.
inline double step_size_bound(const DebateOperator& d)
{
    if (!(d.lipschitz_bound > 0.0) || !std::isfinite(d.lipschitz_bound)) {
        throw ConfigError("step_size_bound: debate operator '" + d.name +
                          "' has no positive finite Lipschitz bound; the step-size bound is unbounded");
    }
    return 1.0 / d.lipschitz_bound;
}

struct MicroParams {
    double dt = 1e-3;
    double t_end = 30.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    /// Deterministic runs must respect the hull-preserving step bound.
    void validate(const DebateOperator& d) const
    {
        detail::require_config(dt > 0.0, "micro.dt", "must be positive");
        detail::require_config(t_end > 0.0, "micro.t_end", "must be positive");
        detail::require_config(noise_sigma >= 0.0, "micro.noise_sigma", "must be nonnegative");
        if (noise_sigma == 0.0 && d.lipschitz_bound > 0.0) {
            const double bound = step_size_bound(d);
            detail::require_config(dt <= bound, "micro.dt",
                                   "exceeds the step-size bound 1/sup|D'| = " + std::to_string(bound));
        }
    }

    bool operator==(const MicroParams&) const = default;
};

/// Right-hand side (1/#I_i) sum_{j in I_i} D(w_i - w_j), summed in neighbour-index order.
inline std::vector<double> micro_rhs(const OpinionState& state, const CommunityGraph& graph,
                                     const DebateOperator& d)
{
    const auto& w = state.omegas;
    std::vector<double> rhs(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto nb = graph.neighbors(i);
        if (nb.empty()) {
            continue;
        }
        double sum = 0.0;
        for (std::size_t j : nb) {
            sum += d(w[i] - w[j]);
        }
        rhs[i] = sum / static_cast<double>(nb.size());
    }
    return rhs;
}

/// One explicit Euler step. The step bound is validated by the caller (see MicroParams).
inline OpinionState euler_step(const OpinionState& state, const CommunityGraph& graph, const DebateOperator& d,
                               double dt)
{
    const auto rhs = micro_rhs(state, graph, d);
    OpinionState next{state.omegas, state.time + dt};
    for (std::size_t i = 0; i < next.omegas.size(); ++i) {
        next.omegas[i] += dt * rhs[i];
    }
    return next;
}

/// Folds x back into [-1, 1] by mirror reflection at the endpoints.
inline double reflect_into_domain(double x)
{
    while (x > 1.0 || x < -1.0) {
        x = x > 1.0 ? 2.0 - x : -2.0 - x;
    }
    return x;
}

/// Euler-Maruyama step for dw = rhs dt + sqrt(2 sigma) dB, reflected at the boundary of (-1,1).
/// With sigma = 0 this is exactly `euler_step` and draws nothing from `rng`.
template <class Rng>
OpinionState euler_maruyama_step(const OpinionState& state, const CommunityGraph& graph, const DebateOperator& d,
                                 double dt, double sigma, Rng& rng)
{
    if (sigma == 0.0) {
        return euler_step(state, graph, d, dt);
    }
    const auto rhs = micro_rhs(state, graph, d);
    const double amplitude = std::sqrt(2.0 * sigma * dt);
    std::normal_distribution<double> xi(0.0, 1.0);
    OpinionState next{state.omegas, state.time + dt};
    for (std::size_t i = 0; i < next.omegas.size(); ++i) {
        next.omegas[i] = reflect_into_domain(next.omegas[i] + dt * rhs[i] + amplitude * xi(rng));
    }
    return next;
}

/// sum_i #I_i w_i, invariant along the exact flow.
inline double conserved_quantity_micro(const OpinionState& state, const CommunityGraph& graph)
{
    double s = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        s += static_cast<double>(graph.degree(i)) * state.omegas[i];
    }
    return s;
}

/// Degree-weighted mean of the initial opinions: the consensus value of a connected graph.
inline double consensus_value_micro(const OpinionState& initial, const CommunityGraph& graph)
{
    if (graph.degree_sum() == 0) {
        throw ConfigError("consensus_value_micro: graph has no edges");
    }
    return conserved_quantity_micro(initial, graph) / static_cast<double>(graph.degree_sum());
}

/// V = (1/2) sum_i sum_{j in I_i} W(w_i - w_j).
inline double potential_V(const OpinionState& state, const CommunityGraph& graph, const DebateOperator& d)
{
    double s = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        for (std::size_t j : graph.neighbors(i)) {
            s += d.W(state.omegas[i] - state.omegas[j]);
        }
    }
    return 0.5 * s;
}

/// RMS distance of the opinions to `omega_inf`.
inline double e_micro(const OpinionState& state, double omega_inf)
{
    if (state.omegas.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double w : state.omegas) {
        s += (w - omega_inf) * (w - omega_inf);
    }
    return std::sqrt(s / static_cast<double>(state.size()));
}

/// Number of nodes whose new opinion leaves the hull of {w_i} U {w_j : j in I_i} (previous
/// opinions) by more than `tol`.
inline std::size_t hull_violations(const OpinionState& before, const OpinionState& after,
                                   const CommunityGraph& graph, double tol = 1e-14)
{
    std::size_t count = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        double lo = before.omegas[i];
        double hi = before.omegas[i];
        for (std::size_t j : graph.neighbors(i)) {
            lo = std::min(lo, before.omegas[j]);
            hi = std::max(hi, before.omegas[j]);
        }
        if (after.omegas[i] < lo - tol || after.omegas[i] > hi + tol) {
            ++count;
        }
    }
    return count;
}

} // namespace opinet
