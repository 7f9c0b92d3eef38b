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
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "opinet/errors.hpp"
#include "opinet/fields.hpp"
#include "opinet/graph.hpp"
#include "opinet/micro.hpp"

namespace opinet
{

// ---- initial-opinion mixtures ------------------------------------------------------------

struct MixtureComponent {
    double center = 0.0;
    double stddev = 0.1;
    double weight = 1.0;

    bool operator==(const MixtureComponent&) const = default;
};

/// Per-community mixtures of normal laws truncated to (-1, 1).
struct MixtureSpec {
    std::vector<std::vector<MixtureComponent>> communities;

    std::size_t n_communities() const noexcept { return communities.size(); }

    void validate() const
    {
        using detail::require_config;
        require_config(!communities.empty(), "mixture", "needs at least one community");
        for (std::size_t p = 0; p < communities.size(); ++p) {
            const std::string field = "mixture.community_" + std::to_string(p);
            require_config(!communities[p].empty(), field, "needs at least one component");
            double total = 0.0;
            for (const auto& c : communities[p]) {
                require_config(c.stddev > 0.0, field, "component std must be positive");
                require_config(c.weight >= 0.0, field, "component weight must be nonnegative");
                require_config(c.center > -1.0 && c.center < 1.0, field, "component center must lie in (-1, 1)");
                total += c.weight;
            }
            require_config(std::abs(total - 1.0) < 1e-9, field, "component weights must sum to 1");
        }
    }

    /// Truncated-mixture density of community p at w (integrates to 1 over (-1, 1)).
    double density(std::size_t p, double w) const
    {
        if (w < -1.0 || w > 1.0) {
            return 0.0;
        }
        double s = 0.0;
        for (const auto& c : communities[p]) {
            if (c.weight == 0.0) {
                continue;
            }
            const double z = (w - c.center) / c.stddev;
            const double pdf = std::exp(-0.5 * z * z) / (c.stddev * std::sqrt(2.0 * std::numbers::pi));
            s += c.weight * pdf / truncation_mass(c);
        }
        return s;
    }

    static double truncation_mass(const MixtureComponent& c)
    {
        auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
        return cdf((1.0 - c.center) / c.stddev) - cdf((-1.0 - c.center) / c.stddev);
    }

    double min_stddev() const
    {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& comm : communities) {
            for (const auto& c : comm) {
                m = std::min(m, c.stddev);
            }
        }
        return m;
    }

    /// Three communities: outer bumps at -1/2 and 1/2 carry more weight and spread than the
    /// inner bumps at 1/4 (community 0), 0 (community 1) and -1/4 (community 2).
    static MixtureSpec three_communities(double weight_outer = 0.6, double sigma_inner = 0.012,
                                         double sigma_outer = 0.05)
    {
        const double weight_inner = 1.0 - weight_outer;
        return {{{{-0.5, sigma_outer, weight_outer}, {0.25, sigma_inner, weight_inner}},
                 {{0.0, sigma_inner, 1.0}},
                 {{-0.25, sigma_inner, weight_inner}, {0.5, sigma_outer, weight_outer}}}};
    }

    /// Two poorly mixed groups whose inner sub-populations start on the wrong side of the
    /// centre and cross each other while each group contracts to its own mean.
    static MixtureSpec crossing_two_groups(double weight_outer = 0.6, double sigma_inner = 0.012,
                                           double sigma_outer = 0.05)
    {
        const double weight_inner = 1.0 - weight_outer;
        return {{{{-0.5, sigma_outer, weight_outer}, {0.25, sigma_inner, weight_inner}},
                 {{-0.25, sigma_inner, weight_inner}, {0.5, sigma_outer, weight_outer}}}};
    }

    bool operator==(const MixtureSpec&) const = default;
};

/// Each agent draws from its community's truncated mixture (component by weight, then a
/// normal draw rejected until it falls inside (-1, 1)). Agents are visited in index order.
template <class Rng>
OpinionState sample_initial_opinions(const MixtureSpec& spec, const CommunityGraph& graph, Rng& rng)
{
    spec.validate();
    detail::require_config(graph.n_groups() == spec.n_communities(), "mixture",
                           "number of communities (" + std::to_string(spec.n_communities()) +
                               ") does not match graph.n_groups (" + std::to_string(graph.n_groups()) + ")");
    std::vector<std::discrete_distribution<std::size_t>> pick;
    for (const auto& comm : spec.communities) {
        std::vector<double> w;
        for (const auto& c : comm) {
            w.push_back(c.weight);
        }
        pick.emplace_back(w.begin(), w.end());
    }
    OpinionState state;
    state.omegas.resize(graph.n_nodes());
    for (std::size_t i = 0; i < graph.n_nodes(); ++i) {
        const std::size_t p = graph.community(i);
        const auto& c = spec.communities[p][pick[p](rng)];
        std::normal_distribution<double> normal(c.center, c.stddev);
        double w = 0.0;
        do {
            w = normal(rng);
        } while (!(w > -1.0 && w < 1.0));
        state.omegas[i] = w;
    }
    return state;
}

// ---- cell averages -----------------------------------------------------------------------

/// (1/dw) * integral of `density` over each cell, by 5-point Gauss-Legendre on
/// `subdivisions` equal sub-intervals per cell.
inline ScalarField cell_average_density(const std::function<double(double)>& density, const Grid& grid,
                                        std::size_t subdivisions = 1)
{
    static constexpr std::array<double, 5> nodes{0.0, -0.5384693101056831, 0.5384693101056831,
                                                 -0.9061798459386640, 0.9061798459386640};
    static constexpr std::array<double, 5> weights{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                   0.2369268850561891, 0.2369268850561891};
    subdivisions = std::max<std::size_t>(subdivisions, 1);
    ScalarField out(grid);
    const double h = grid.width() / static_cast<double>(subdivisions);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double integral = 0.0;
        for (std::size_t s = 0; s < subdivisions; ++s) {
            const double centre = grid.lower(i) + (static_cast<double>(s) + 0.5) * h;
            double part = 0.0;
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                part += weights[k] * density(centre + 0.5 * h * nodes[k]);
            }
            integral += 0.5 * h * part;
        }
        out[i] = integral / grid.width();
    }
    return out;
}

/// Sub-interval count keeping composite Gauss-Legendre accurate for the narrowest component.
inline std::size_t quadrature_subdivisions(const MixtureSpec& spec, const Grid& grid)
{
    return static_cast<std::size_t>(std::max(1.0, std::ceil(grid.width() / spec.min_stddev())));
}

/// Cell averages of shares[p] * (community p mixture), one field per community.
inline std::vector<ScalarField> cell_average_mixture(const MixtureSpec& spec, const Grid& grid,
                                                     std::span<const double> shares)
{
    spec.validate();
    detail::require_config(shares.size() == spec.n_communities(), "mixture", "one share per community required");
    const std::size_t sub = quadrature_subdivisions(spec, grid);
    std::vector<ScalarField> out;
    for (std::size_t p = 0; p < spec.n_communities(); ++p) {
        auto f = cell_average_density([&](double w) { return spec.density(p, w); }, grid, sub);
        for (double& v : f.values) {
            v *= shares[p];
        }
        out.push_back(std::move(f));
    }
    return out;
}

/// Fraction of nodes in each community.
inline std::vector<double> community_shares(const CommunityGraph& graph)
{
    std::vector<double> shares(graph.n_groups(), 0.0);
    for (std::size_t i = 0; i < graph.n_nodes(); ++i) {
        shares[graph.community(i)] += 1.0;
    }
    for (double& s : shares) {
        s /= static_cast<double>(graph.n_nodes());
    }
    return shares;
}

// ---- empirical node and edge densities ---------------------------------------------------

/// Histogram f_i = #{w in I_i} / (N dw); unit mass.
inline ScalarField empirical_f(std::span<const double> omegas, const Grid& grid)
{
    ScalarField f(grid);
    if (omegas.empty()) {
        return f;
    }
    const double unit = 1.0 / (static_cast<double>(omegas.size()) * grid.width());
    for (double w : omegas) {
        f[grid.cell_of(w)] += unit;
    }
    return f;
}

struct KdeOptions {
    /// Integrate each Gaussian factor exactly over the cell instead of sampling it at the midpoint.
    bool exact_cell_integrals = false;
};

namespace detail
{
/// Per-node 1D kernel profile on the grid and the index range where it is nonzero.
struct KernelProfile {
    std::vector<double> values;
    std::size_t first = 0;
    std::size_t last = 0; ///< one past the end
};

inline KernelProfile kernel_profile(double w, double h, const Grid& grid, const KdeOptions& opt)
{
    KernelProfile k;
    k.values.assign(grid.size(), 0.0);
    k.first = grid.size();
    for (std::size_t a = 0; a < grid.size(); ++a) {
        double v = 0.0;
        if (opt.exact_cell_integrals) {
            auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
            v = (cdf((grid.upper(a) - w) / h) - cdf((grid.lower(a) - w) / h)) / grid.width();
        } else {
            const double z = (grid.midpoint(a) - w) / h;
            v = std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * std::numbers::pi));
        }
        if (v > 0.0) {
            k.values[a] = v;
            k.first = std::min(k.first, a);
            k.last = a + 1;
        }
    }
    if (k.first == grid.size()) {
        k.first = k.last = 0;
    }
    return k;
}

/// Unnormalised sum over ordered adjacent pairs (i, j), label(i) = p, label(j) = q, of
/// phi_i (x) phi_j. For p == q the result is symmetrised by mirroring the upper triangle.
inline PairField kde_block(const CommunityGraph& graph, const std::vector<KernelProfile>& phi, std::size_t p,
                           std::size_t q, const Grid& grid)
{
    const std::size_t n = grid.size();
    PairField g(grid);
    std::vector<double> partner(n);
    for (std::size_t i = 0; i < graph.n_nodes(); ++i) {
        if (graph.community(i) != p) {
            continue;
        }
        std::fill(partner.begin(), partner.end(), 0.0);
        bool any = false;
        std::size_t lo = n;
        std::size_t hi = 0;
        for (std::size_t j : graph.neighbors(i)) {
            if (graph.community(j) != q) {
                continue;
            }
            const auto& pj = phi[j];
            for (std::size_t b = pj.first; b < pj.last; ++b) {
                partner[b] += pj.values[b];
            }
            lo = std::min(lo, pj.first);
            hi = std::max(hi, pj.last);
            any = true;
        }
        if (!any) {
            continue;
        }
        const auto& pi = phi[i];
        for (std::size_t a = pi.first; a < pi.last; ++a) {
            const double va = pi.values[a];
            const std::size_t b0 = (p == q) ? std::max(lo, a) : lo;
            for (std::size_t b = b0; b < hi; ++b) {
                g(a, b) += va * partner[b];
            }
        }
    }
    if (p == q) {
        // Only the upper triangle was accumulated.
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                g(b, a) = g(a, b);
            }
        }
    }
    return g;
}
} // namespace detail

/// Group-labelled initial fields from discrete data.
///
/// f(p) is the histogram of the agents with label p scaled by 1/N (masses sum to 1);
/// g(p,q) is the Gaussian KDE (bandwidth `bandwidth` on each axis) of the ordered adjacent
/// pairs with labels (p, q), jointly normalised so the g masses sum to 1.
inline LabeledFields split_by_group(std::span<const double> omegas, const CommunityGraph& graph, const Grid& grid,
                                    double bandwidth, const KdeOptions& opt = {})
{
    detail::require_config(bandwidth > 0.0, "kde.bandwidth", "must be positive");
    detail::require_config(omegas.size() == graph.n_nodes(), "omegas", "length must match the graph");
    if (graph.n_edges() == 0) {
        throw ConfigError("empirical_g_kde: graph has no edges");
    }
    const std::size_t n_groups = graph.n_groups();
    LabeledFields out(grid, n_groups);

    const double unit = 1.0 / (static_cast<double>(omegas.size()) * grid.width());
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        out.f[graph.community(i)][grid.cell_of(omegas[i])] += unit;
    }

    std::vector<detail::KernelProfile> phi;
    phi.reserve(omegas.size());
    for (double w : omegas) {
        phi.push_back(detail::kernel_profile(w, bandwidth, grid, opt));
    }
    for (std::size_t p = 0; p < n_groups; ++p) {
        out.pair(p, p) = detail::kde_block(graph, phi, p, p, grid);
        for (std::size_t q = p + 1; q < n_groups; ++q) {
            out.pair(p, q) = detail::kde_block(graph, phi, p, q, grid);
            out.pair(q, p) = out.pair(p, q).transposed();
        }
    }
    const double total = out.g_mass();
    if (!(total > 0.0)) {
        throw NumericalError("empirical_g_kde: kernel mass vanished on the grid (bandwidth too small?)");
    }
    for (auto& gpq : out.g) {
        gpq *= 1.0 / total;
    }
    return out;
}

/// Gaussian KDE of the edge distribution, averaged on the product grid and normalised to
/// unit mass. Symmetric bit for bit.
inline PairField empirical_g_kde(const CommunityGraph& graph, std::span<const double> omegas, const Grid& grid,
                                 double bandwidth, const KdeOptions& opt = {})
{
    detail::require_config(bandwidth > 0.0, "kde.bandwidth", "must be positive");
    if (graph.n_edges() == 0) {
        throw ConfigError("empirical_g_kde: graph has no edges");
    }
    CommunityGraph single(std::vector<std::size_t>(graph.n_nodes(), 0), 1);
    for (const Edge& e : graph.edges()) {
        single.add_edge(e.first, e.second);
    }
    return std::move(split_by_group(omegas, single, grid, bandwidth, opt).g.front());
}

// ---- bandwidth selection -----------------------------------------------------------------

enum class BandwidthMethod { silverman, sheather_jones };

namespace detail
{
inline double sample_stddev(std::span<const double> x)
{
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Linear-interpolation quantile (the common "type 7" definition).
inline double quantile(std::vector<double> sorted, double prob)
{
    const double pos = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Kernel estimates of integral f''''f (phi4) and integral f''''''f (phi6) with a Gaussian
/// kernel, summing over all pairs (diagonal terms included).
class DensityFunctionals
{
public:
    explicit DensityFunctionals(std::span<const double> x)
        : n_(static_cast<double>(x.size()))
    {
        diffs_.reserve(x.size() * (x.size() - 1) / 2);
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (std::size_t j = i + 1; j < x.size(); ++j) {
                diffs_.push_back(x[i] - x[j]);
            }
        }
    }

    double phi4(double h) const
    {
        double sum = 0.0;
        for (double d : diffs_) {
            const double u = (d / h) * (d / h);
            sum += std::exp(-0.5 * u) * (u * u - 6.0 * u + 3.0);
        }
        sum = 2.0 * sum + 3.0 * n_;
        return sum / (n_ * (n_ - 1.0) * std::pow(h, 5.0) * std::sqrt(2.0 * std::numbers::pi));
    }

    double phi6(double h) const
    {
        double sum = 0.0;
        for (double d : diffs_) {
            const double u = (d / h) * (d / h);
            sum += std::exp(-0.5 * u) * (u * u * u - 15.0 * u * u + 45.0 * u - 15.0);
        }
        sum = 2.0 * sum - 15.0 * n_;
        return sum / (n_ * (n_ - 1.0) * std::pow(h, 7.0) * std::sqrt(2.0 * std::numbers::pi));
    }

private:
    double n_;
    std::vector<double> diffs_;
};
} // namespace detail

/// Rule-of-thumb 1.06 * sd * N^(-1/5).
inline double silverman_bandwidth(std::span<const double> x)
{
    detail::require_config(x.size() >= 2, "bandwidth", "needs at least 2 samples");
    const double sd = detail::sample_stddev(x);
    if (!(sd > 0.0)) {
        throw ConfigError("bandwidth: sample has zero variance");
    }
    return 1.06 * sd * std::pow(static_cast<double>(x.size()), -0.2);
}

/// Sheather-Jones "solve-the-equation" plug-in bandwidth. The fixed-point equation
/// h = (R(K) / (N * phi4(alpha2 * h^(5/7))))^(1/5) is solved by bisection.
inline double sheather_jones_bandwidth(std::span<const double> x)
{
    detail::require_config(x.size() >= 2, "bandwidth", "needs at least 2 samples");
    const double n = static_cast<double>(x.size());
    const double sd = detail::sample_stddev(x);
    if (!(sd > 0.0)) {
        throw ConfigError("bandwidth: sample has zero variance");
    }
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = detail::quantile(sorted, 0.75) - detail::quantile(sorted, 0.25);
    const double scale = iqr > 0.0 ? std::min(sd, iqr / 1.349) : sd;

    const detail::DensityFunctionals est(x);
    const double a = 1.24 * scale * std::pow(n, -1.0 / 7.0);
    const double b = 1.23 * scale * std::pow(n, -1.0 / 9.0);
    const double c1 = 1.0 / (2.0 * std::sqrt(std::numbers::pi) * n);
    const double td = -est.phi6(b);
    const double alpha2 = 1.357 * std::pow(est.phi4(a) / td, 1.0 / 7.0);
    auto residual = [&](double h) { return std::pow(c1 / est.phi4(alpha2 * std::pow(h, 5.0 / 7.0)), 0.2) - h; };

    const double hmax = 1.144 * scale * std::pow(n, -0.2);
    double lo = 0.1 * hmax;
    double hi = hmax;
    for (int attempt = 0; residual(lo) * residual(hi) > 0.0; ++attempt) {
        if (attempt > 99) {
            throw NumericalError("sheather_jones_bandwidth: could not bracket the fixed point");
        }
        if (attempt % 2 == 1) {
            hi *= 1.2;
        } else {
            lo /= 1.2;
        }
    }
    double f_lo = residual(lo);
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = residual(mid);
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double bandwidth_select(std::span<const double> x, BandwidthMethod method)
{
    return method == BandwidthMethod::silverman ? silverman_bandwidth(x) : sheather_jones_bandwidth(x);
}

} // namespace opinet
