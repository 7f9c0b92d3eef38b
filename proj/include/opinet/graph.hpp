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
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "opinet/errors.hpp"
#include "opinet/linalg.hpp"

namespace opinet
{

/// Unordered node pair stored with first < second.
struct Edge {
    std::size_t first;
    std::size_t second;

    auto operator<=>(const Edge&) const = default;
};

/// Undirected simple graph whose nodes carry a static community index in [0, n_groups).
///
/// Neighbour lists are kept sorted so every reduction over I_i runs in a fixed order.
class CommunityGraph
{
public:
    CommunityGraph() = default;

    CommunityGraph(std::vector<std::size_t> community, std::size_t n_groups)
        : adjacency_(community.size())
        , community_(std::move(community))
        , n_groups_(n_groups)
    {
        for (std::size_t c : community_) {
            detail::require_config(c < n_groups_, "community", "label out of range [0, n_groups)");
        }
    }

    /// Graph with every node in community 0.
    explicit CommunityGraph(std::size_t n_nodes)
        : CommunityGraph(std::vector<std::size_t>(n_nodes, 0), 1)
    {
    }

    static CommunityGraph from_edges(std::size_t n_nodes, std::span<const Edge> edges)
    {
        CommunityGraph g(n_nodes);
        for (const Edge& e : edges) {
            g.add_edge(e.first, e.second);
        }
        return g;
    }

    /// Inserts {i,j}. Returns false for self-loops and already present pairs.
    bool add_edge(std::size_t i, std::size_t j)
    {
        if (i == j || i >= n_nodes() || j >= n_nodes()) {
            return false;
        }
        auto& ni = adjacency_[i];
        auto it = std::lower_bound(ni.begin(), ni.end(), j);
        if (it != ni.end() && *it == j) {
            return false;
        }
        ni.insert(it, j);
        auto& nj = adjacency_[j];
        nj.insert(std::lower_bound(nj.begin(), nj.end(), i), i);
        ++n_edges_;
        return true;
    }

    bool has_edge(std::size_t i, std::size_t j) const
    {
        const auto& ni = adjacency_[i];
        return std::binary_search(ni.begin(), ni.end(), j);
    }

    std::size_t n_nodes() const noexcept { return adjacency_.size(); }
    std::size_t n_edges() const noexcept { return n_edges_; }
    std::size_t n_groups() const noexcept { return n_groups_; }

    std::span<const std::size_t> neighbors(std::size_t i) const noexcept { return adjacency_[i]; }
    std::size_t degree(std::size_t i) const noexcept { return adjacency_[i].size(); }

    std::size_t community(std::size_t i) const noexcept { return community_[i]; }
    const std::vector<std::size_t>& communities() const noexcept { return community_; }

    std::size_t max_degree() const
    {
        std::size_t m = 0;
        for (const auto& n : adjacency_) {
            m = std::max(m, n.size());
        }
        return m;
    }

    std::size_t degree_sum() const noexcept { return 2 * n_edges_; }

    /// All edges as (i,j) with i<j in lexicographic order.
    std::vector<Edge> edges() const
    {
        std::vector<Edge> out;
        out.reserve(n_edges_);
        for (std::size_t i = 0; i < n_nodes(); ++i) {
            for (std::size_t j : adjacency_[i]) {
                if (i < j) {
                    out.push_back({i, j});
                }
            }
        }
        return out;
    }

    /// Component index per node, numbered in order of smallest member.
    std::vector<std::size_t> components() const
    {
        constexpr auto unset = static_cast<std::size_t>(-1);
        std::vector<std::size_t> comp(n_nodes(), unset);
        std::size_t next = 0;
        std::vector<std::size_t> stack;
        for (std::size_t s = 0; s < n_nodes(); ++s) {
            if (comp[s] != unset) {
                continue;
            }
            comp[s] = next;
            stack.push_back(s);
            while (!stack.empty()) {
                const std::size_t u = stack.back();
                stack.pop_back();
                for (std::size_t v : adjacency_[u]) {
                    if (comp[v] == unset) {
                        comp[v] = next;
                        stack.push_back(v);
                    }
                }
            }
            ++next;
        }
        return comp;
    }

    std::size_t n_components() const
    {
        const auto comp = components();
        return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
    }

    bool is_connected() const { return n_components() <= 1; }

    bool operator==(const CommunityGraph&) const = default;

private:
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<std::size_t> community_;
    std::size_t n_groups_ = 1;
    std::size_t n_edges_ = 0;
};

struct GraphConfig {
    std::size_t n_nodes = 200;
    std::size_t n_groups = 1;
    std::vector<double> group_proportions{1.0};
    double mean_degree = 10.0;
    double mixing_mu = 0.0;
    std::uint64_t seed = 0;

    void validate() const
    {
        using detail::require_config;
        require_config(n_nodes >= 2, "graph.n_nodes", "must be at least 2");
        require_config(n_groups >= 1, "graph.n_groups", "must be at least 1");
        require_config(group_proportions.size() == n_groups, "graph.group_proportions",
                       "needs exactly n_groups entries");
        double total = 0.0;
        for (double p : group_proportions) {
            require_config(p >= 0.0, "graph.group_proportions", "entries must be nonnegative");
            total += p;
        }
        require_config(std::abs(total - 1.0) < 1e-9, "graph.group_proportions", "must sum to 1");
        require_config(mean_degree > 0.0, "graph.mean_degree", "must be positive");
        require_config(mean_degree < static_cast<double>(n_nodes) - 1.0, "graph.mean_degree",
                       "must be below n_nodes - 1");
        require_config(mixing_mu >= 0.0 && mixing_mu <= 1.0, "graph.mixing_mu", "must lie in [0, 1]");
    }

    bool operator==(const GraphConfig&) const = default;
};

/// Community sizes from proportions by largest remainder; sums to n_nodes.
inline std::vector<std::size_t> community_sizes(std::size_t n_nodes, std::span<const double> proportions)
{
    std::vector<std::size_t> sizes(proportions.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < proportions.size(); ++p) {
        const double exact = proportions[p] * static_cast<double>(n_nodes);
        sizes[p] = static_cast<std::size_t>(std::floor(exact));
        assigned += sizes[p];
        remainders.emplace_back(exact - std::floor(exact), p);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n_nodes; ++k, ++assigned) {
        ++sizes[remainders[k % remainders.size()].second];
    }
    return sizes;
}

/// Links every non-main component to the main (largest) component with one bridge edge
/// between uniformly drawn representatives. Connected input is returned unchanged.
template <class Rng>
CommunityGraph ensure_connected(CommunityGraph g, Rng& rng)
{
    const auto comp = g.components();
    if (comp.empty()) {
        return g;
    }
    const std::size_t n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
    if (n_comp == 1) {
        return g;
    }
    std::vector<std::vector<std::size_t>> members(n_comp);
    for (std::size_t i = 0; i < comp.size(); ++i) {
        members[comp[i]].push_back(i);
    }
    std::size_t main = 0;
    for (std::size_t c = 1; c < n_comp; ++c) {
        if (members[c].size() > members[main].size()) {
            main = c;
        }
    }
    auto pick = [&rng](const std::vector<std::size_t>& v) {
        std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
        return v[d(rng)];
    };
    for (std::size_t c = 0; c < n_comp; ++c) {
        if (c == main) {
            continue;
        }
        const std::size_t a = pick(members[c]);
        const std::size_t b = pick(members[main]);
        g.add_edge(a, b);
    }
    return g;
}

inline CommunityGraph ensure_connected(CommunityGraph g, std::uint64_t seed = 0)
{
    std::mt19937_64 rng(seed);
    return ensure_connected(std::move(g), rng);
}

namespace detail
{
/// Pairs stubs uniformly at random, retrying rejected pairs on reshuffled leftovers.
template <class Rng, class Accept>
void match_stubs(std::vector<std::size_t> stubs, CommunityGraph& g, Rng& rng, Accept accept, int rounds = 20)
{
    for (int round = 0; round < rounds && stubs.size() >= 2; ++round) {
        std::shuffle(stubs.begin(), stubs.end(), rng);
        std::vector<std::size_t> leftover;
        std::size_t k = 0;
        for (; k + 1 < stubs.size(); k += 2) {
            const std::size_t a = stubs[k];
            const std::size_t b = stubs[k + 1];
            if (a == b || !accept(a, b) || !g.add_edge(a, b)) {
                leftover.push_back(a);
                leftover.push_back(b);
            }
        }
        if (k < stubs.size()) {
            leftover.push_back(stubs[k]);
        }
        stubs = std::move(leftover);
    }
}
} // namespace detail

/// Planted-partition generator in the spirit of LFR benchmark graphs.
///
/// Community sizes follow `group_proportions`; node degrees are Poisson around `mean_degree`
/// (at least 1). Each stub is intra-community with probability 1 - mu and inter-community
/// otherwise; stubs are paired uniformly within their class, rejecting self-loops and
/// duplicates. The result is made connected with `ensure_connected`.
inline CommunityGraph generate_community_graph(const GraphConfig& config)
{
    config.validate();
    const auto sizes = community_sizes(config.n_nodes, config.group_proportions);
    const double intra_target = (1.0 - config.mixing_mu) * config.mean_degree;
    for (std::size_t p = 0; p < sizes.size(); ++p) {
        if (intra_target > 0.0 && intra_target >= static_cast<double>(sizes[p])) {
            throw ConfigError("graph: community " + std::to_string(p) + " has " + std::to_string(sizes[p]) +
                              " nodes, too few for an intra-community degree of " + std::to_string(intra_target));
        }
    }

    std::vector<std::size_t> community;
    community.reserve(config.n_nodes);
    for (std::size_t p = 0; p < sizes.size(); ++p) {
        community.insert(community.end(), sizes[p], p);
    }
    CommunityGraph g(community, config.n_groups);

    std::mt19937_64 rng(config.seed);
    std::poisson_distribution<int> degree_dist(config.mean_degree);
    std::bernoulli_distribution leaves(config.mixing_mu);

    std::vector<std::vector<std::size_t>> intra_stubs(config.n_groups);
    std::vector<std::size_t> inter_stubs;
    const std::size_t max_deg = config.n_nodes - 1;
    for (std::size_t i = 0; i < config.n_nodes; ++i) {
        const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(degree_dist(rng)), 1, max_deg);
        std::size_t intra = 0;
        for (std::size_t s = 0; s < k; ++s) {
            if (leaves(rng)) {
                inter_stubs.push_back(i);
            } else {
                ++intra;
            }
        }
        intra = std::min(intra, sizes[community[i]] - 1);
        intra_stubs[community[i]].insert(intra_stubs[community[i]].end(), intra, i);
    }

    for (auto& stubs : intra_stubs) {
        detail::match_stubs(std::move(stubs), g, rng, [](std::size_t, std::size_t) { return true; });
    }
    detail::match_stubs(std::move(inter_stubs), g, rng,
                        [&](std::size_t a, std::size_t b) { return community[a] != community[b]; });

    return ensure_connected(std::move(g), rng);
}

/// Fraction of edges joining different communities.
inline double measured_mixing(const CommunityGraph& g)
{
    if (g.n_edges() == 0) {
        throw ConfigError("measured_mixing: graph has no edges");
    }
    std::size_t inter = 0;
    for (const Edge& e : g.edges()) {
        if (g.community(e.first) != g.community(e.second)) {
            ++inter;
        }
    }
    return static_cast<double>(inter) / static_cast<double>(g.n_edges());
}

/// Combinatorial Laplacian L = diag(#I_i) - A.
inline SquareMatrix laplacian(const CommunityGraph& g, std::size_t max_nodes = 2048)
{
    if (g.n_nodes() > max_nodes) {
        throw ConfigError("laplacian: " + std::to_string(g.n_nodes()) + " nodes exceeds the dense cap of " +
                          std::to_string(max_nodes));
    }
    SquareMatrix l(g.n_nodes());
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        l(i, i) = static_cast<double>(g.degree(i));
        for (std::size_t j : g.neighbors(i)) {
            l(i, j) = -1.0;
        }
    }
    return l;
}

/// Smallest nonzero eigenvalue of a connected-graph Laplacian.
///
/// Checks that the lowest eigenpair is (0, span(1)) and that zero is simple; a repeated zero
/// eigenvalue means the graph is disconnected and is reported as NumericalError.
inline double spectral_gap(const SquareMatrix& l, double rel_tol = 1e-10)
{
    const std::size_t n = l.size();
    if (n < 2) {
        throw ConfigError("spectral_gap: needs at least 2 nodes");
    }
    const auto eig = jacobi_eigen(l, std::min(rel_tol, 1e-13));
    double scale = 0.0;
    for (double v : eig.values) {
        scale = std::max(scale, std::abs(v));
    }
    const double zero_tol = std::max(rel_tol * scale, 1e-12);
    if (std::abs(eig.values[0]) > zero_tol) {
        throw NumericalError("spectral_gap: smallest eigenvalue " + std::to_string(eig.values[0]) +
                             " is not zero; input is not a Laplacian");
    }
    double along_ones = 0.0;
    for (double x : eig.vectors[0]) {
        along_ones += x;
    }
    if (std::abs(std::abs(along_ones) / std::sqrt(static_cast<double>(n)) - 1.0) > 1e-6) {
        throw NumericalError("spectral_gap: kernel vector is not proportional to the all-ones vector");
    }
    if (eig.values[1] <= zero_tol) {
        throw NumericalError("spectral_gap: eigenvalue 0 is not simple; graph is disconnected");
    }
    return eig.values[1];
}

// ---- edge list / label files -------------------------------------------------------------

inline void write_edge_list(std::ostream& os, const CommunityGraph& g)
{
    for (const Edge& e : g.edges()) {
        os << e.first << '\t' << e.second << '\n';
    }
}

/// One `node<TAB>label` line per node; labels are written 1-based.
inline void write_labels(std::ostream& os, const CommunityGraph& g)
{
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        os << i << '\t' << g.community(i) + 1 << '\n';
    }
}

/// Reads an edge list and its label sidecar back into a graph.
inline CommunityGraph read_graph(std::istream& edges, std::istream& labels)
{
    std::vector<std::pair<std::size_t, std::size_t>> node_label;
    std::string line;
    std::size_t max_label = 0;
    while (std::getline(labels, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::size_t node = 0;
        std::size_t label = 0;
        if (!(ls >> node >> label) || label == 0) {
            throw ConfigError("labels: malformed line '" + line + "'");
        }
        node_label.emplace_back(node, label - 1);
        max_label = std::max(max_label, label);
    }
    std::vector<std::size_t> community(node_label.size());
    std::vector<bool> seen(node_label.size(), false);
    for (auto [node, label] : node_label) {
        if (node >= community.size() || seen[node]) {
            throw ConfigError("labels: node ids must be exactly 0..N-1");
        }
        seen[node] = true;
        community[node] = label;
    }
    CommunityGraph g(std::move(community), std::max<std::size_t>(max_label, 1));
    while (std::getline(edges, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::size_t i = 0;
        std::size_t j = 0;
        if (!(ls >> i >> j) || i >= j || j >= g.n_nodes()) {
            throw ConfigError("edge list: malformed line '" + line + "' (expected i<TAB>j with i<j<N)");
        }
        if (!g.add_edge(i, j)) {
            throw ConfigError("edge list: duplicate edge '" + line + "'");
        }
    }
    return g;
}

} // namespace opinet
