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
#include <vector>

#include "opinet/errors.hpp"

namespace opinet
{

/// Uniform finite-volume partition of the opinion domain (-1, 1) into cells
/// I_i = [-1 + i dw, -1 + (i+1) dw].
class Grid
{
public:
    static constexpr double lower_bound = -1.0;
    static constexpr double upper_bound = 1.0;

    Grid() = default;
    explicit Grid(std::size_t n_cells)
        : n_(n_cells)
    {
        detail::require_config(n_cells >= 2, "grid_size", "needs at least 2 cells");
        dw_ = (upper_bound - lower_bound) / static_cast<double>(n_cells);
    }

    std::size_t size() const noexcept { return n_; }
    double width() const noexcept { return dw_; }

    double lower(std::size_t i) const noexcept { return lower_bound + static_cast<double>(i) * dw_; }
    double upper(std::size_t i) const noexcept { return lower_bound + static_cast<double>(i + 1) * dw_; }
    double midpoint(std::size_t i) const noexcept { return lower_bound + (static_cast<double>(i) + 0.5) * dw_; }

    /// Cell containing w; points on an interior face go to the right cell, w = 1 to the last.
    std::size_t cell_of(double w) const noexcept
    {
        const double k = std::floor((w - lower_bound) / dw_);
        if (k <= 0.0) {
            return 0;
        }
        return std::min(static_cast<std::size_t>(k), n_ - 1);
    }

    bool operator==(const Grid&) const = default;

private:
    std::size_t n_ = 0;
    double dw_ = 0.0;
};

/// Cell averages f_i of a density on the grid.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g)
        , values(g.size(), fill)
    {
    }

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) noexcept { return values[i]; }
    double operator[](std::size_t i) const noexcept { return values[i]; }

    double mass() const
    {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return grid.width() * s;
    }

    double min() const { return *std::min_element(values.begin(), values.end()); }
    double max() const { return *std::max_element(values.begin(), values.end()); }

    ScalarField& operator+=(const ScalarField& o)
    {
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] += o.values[i];
        }
        return *this;
    }

    ScalarField& operator*=(double c)
    {
        for (double& v : values) {
            v *= c;
        }
        return *this;
    }

    bool operator==(const ScalarField&) const = default;
};

/// Cell averages g_{i,j} of an edge density on the product grid; row index is the first
/// opinion variable.
struct PairField {
    Grid grid;
    std::vector<double> values;

    PairField() = default;
    explicit PairField(const Grid& g, double fill = 0.0)
        : grid(g)
        , values(g.size() * g.size(), fill)
    {
    }

    std::size_t size() const noexcept { return grid.size(); }
    double& operator()(std::size_t i, std::size_t j) noexcept { return values[i * grid.size() + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * grid.size() + j]; }

    double mass() const
    {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return grid.width() * grid.width() * s;
    }

    double min() const { return *std::min_element(values.begin(), values.end()); }
    double max() const { return *std::max_element(values.begin(), values.end()); }

    /// max |g_ij - g_ji|; zero for a symmetric field.
    double asymmetry() const
    {
        double worst = 0.0;
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
            }
        }
        return worst;
    }

    PairField transposed() const
    {
        PairField t(grid);
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                t(j, i) = (*this)(i, j);
            }
        }
        return t;
    }

    PairField& operator*=(double c)
    {
        for (double& v : values) {
            v *= c;
        }
        return *this;
    }

    PairField& operator+=(const PairField& o)
    {
        for (std::size_t k = 0; k < values.size(); ++k) {
            values[k] += o.values[k];
        }
        return *this;
    }

    bool operator==(const PairField&) const = default;
};

/// Group-labelled densities: one f per label p and one g per ordered label pair (p, q),
/// with g(p,q)(i,j) = g(q,p)(j,i).
struct LabeledFields {
    std::size_t n_groups = 0;
    std::vector<ScalarField> f;
    std::vector<PairField> g; ///< index p * n_groups + q

    LabeledFields() = default;
    LabeledFields(const Grid& grid, std::size_t groups)
        : n_groups(groups)
        , f(groups, ScalarField(grid))
        , g(groups * groups, PairField(grid))
    {
    }

    const Grid& grid() const { return f.front().grid; }

    PairField& pair(std::size_t p, std::size_t q) { return g[p * n_groups + q]; }
    const PairField& pair(std::size_t p, std::size_t q) const { return g[p * n_groups + q]; }

    ScalarField total_f() const
    {
        ScalarField out(grid());
        for (const auto& fp : f) {
            out += fp;
        }
        return out;
    }

    PairField total_g() const
    {
        PairField out(grid());
        for (const auto& gpq : g) {
            out += gpq;
        }
        return out;
    }

    double f_mass() const
    {
        double s = 0.0;
        for (const auto& fp : f) {
            s += fp.mass();
        }
        return s;
    }

    double g_mass() const
    {
        double s = 0.0;
        for (const auto& gpq : g) {
            s += gpq.mass();
        }
        return s;
    }

    /// max over (p,q,i,j) of |g(p,q)(i,j) - g(q,p)(j,i)|.
    double cross_asymmetry() const
    {
        double worst = 0.0;
        const std::size_t n = grid().size();
        for (std::size_t p = 0; p < n_groups; ++p) {
            for (std::size_t q = 0; q < n_groups; ++q) {
                const auto& a = pair(p, q);
                const auto& b = pair(q, p);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        worst = std::max(worst, std::abs(a(i, j) - b(j, i)));
                    }
                }
            }
        }
        return worst;
    }

    bool operator==(const LabeledFields&) const = default;
};

} // namespace opinet
