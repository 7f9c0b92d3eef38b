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
#include <string>
#include <utility>
#include <vector>

#include "opinet/debate.hpp"
#include "opinet/errors.hpp"
#include "opinet/fields.hpp"

namespace opinet
{

/// Largest stable step of the LLF transport, dw / (2 sup|D|). An interaction-free operator
/// imposes no bound and yields `unbounded`.
inline double cfl_max_dt(const DebateOperator& d, const Grid& grid, double unbounded)
{
    if (d.sup_norm <= 0.0) {
        return unbounded;
    }
    return grid.width() / (2.0 * d.sup_norm);
}

struct ContinuumParams {
    double dt = 0.0; ///< 0 selects the default below
    double t_end = 8.0;
    double eta_cutoff = 1e-10; ///< relative to the total g mass
    double diffusion_sigma = 0.0;
    double birth_rate = 0.0;
    double death_rate = 0.0;

    /// 0.9 * min(CFL bound, dw^2 / (4 sigma)).
    double default_dt(const DebateOperator& d, const Grid& grid) const
    {
        double bound = cfl_max_dt(d, grid, t_end);
        if (diffusion_sigma > 0.0) {
            bound = std::min(bound, grid.width() * grid.width() / (4.0 * diffusion_sigma));
        }
        return 0.9 * bound;
    }

    double effective_dt(const DebateOperator& d, const Grid& grid) const
    {
        return dt > 0.0 ? dt : default_dt(d, grid);
    }

    void validate(const DebateOperator& d, const Grid& grid) const
    {
        using detail::require_config;
        require_config(dt >= 0.0, "continuum.dt", "must be nonnegative (0 = automatic)");
        require_config(t_end > 0.0, "continuum.t_end", "must be positive");
        require_config(eta_cutoff > 0.0, "continuum.eta_cutoff", "must be positive");
        require_config(diffusion_sigma >= 0.0, "continuum.diffusion_sigma", "must be nonnegative");
        require_config(birth_rate >= 0.0, "continuum.birth_rate", "must be nonnegative");
        require_config(death_rate >= 0.0, "continuum.death_rate", "must be nonnegative");
        const double step = effective_dt(d, grid);
        if (d.sup_norm > 0.0) {
            const double cfl = cfl_max_dt(d, grid, t_end);
            require_config(step < cfl, "continuum.dt",
                           "violates the CFL bound dw/(2 sup|D|) = " + std::to_string(cfl));
        }
        if (diffusion_sigma > 0.0) {
            const double bound = grid.width() * grid.width() / (4.0 * diffusion_sigma);
            require_config(step < bound, "continuum.dt",
                           "violates the diffusion bound dw^2/(4 sigma) = " + std::to_string(bound));
        }
        require_config(step * death_rate < 1.0, "continuum.death_rate", "dt * death_rate must stay below 1");
    }

    bool operator==(const ContinuumParams&) const = default;
};

/// Cell values a_i of the transport velocity.
struct VelocityField {
    Grid grid;
    std::vector<double> values;

    double operator[](std::size_t i) const noexcept { return values[i]; }
    std::size_t size() const noexcept { return values.size(); }
};

/// D(mid_i - mid_j) on the product grid.
inline PairField debate_table(const DebateOperator& d, const Grid& grid)
{
    PairField t(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            t(i, j) = d(grid.midpoint(i) - grid.midpoint(j));
        }
    }
    return t;
}

/// Row normalisation eta_ij = g_ij / (dw sum_k g_ik) for rows whose integral reaches
/// cutoff * mass(g); rows below it are zero. Measuring the cutoff against the total mass keeps
/// eta[c g] = eta[g] exact for every c > 0.
inline PairField eta_discrete(const PairField& g, double cutoff)
{
    const std::size_t n = g.size();
    const double dw = g.grid.width();
    const double threshold = cutoff * g.mass();
    PairField eta(g.grid);
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row += g(i, j);
        }
        const double den = dw * row;
        if (den > 0.0 && den >= threshold) {
            for (std::size_t j = 0; j < n; ++j) {
                eta(i, j) = g(i, j) / den;
            }
        }
    }
    return eta;
}

namespace detail
{
/// Absolute row threshold: cutoff times the total g mass over all label pairs.
inline double eta_threshold(const std::vector<PairField>& g, double cutoff)
{
    double mass = 0.0;
    for (const auto& gpq : g) {
        mass += gpq.mass();
    }
    return cutoff * mass;
}

/// Velocity of label p in a labelled system: the eta normalisation of row (p, i) runs over
/// every partner label q and partner cell j. Rows with integral below `threshold` get a = 0.
inline VelocityField labeled_velocity(const std::vector<PairField>& g, std::size_t n_groups, std::size_t p,
                                      const PairField& table, double threshold)
{
    const Grid& grid = table.grid;
    const std::size_t n = grid.size();
    const double dw = grid.width();
    VelocityField a{grid, std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t q = 0; q < n_groups; ++q) {
            const PairField& gpq = g[p * n_groups + q];
            for (std::size_t j = 0; j < n; ++j) {
                row += gpq(i, j);
            }
        }
        const double den = dw * row;
        if (!(den > 0.0 && den >= threshold)) {
            continue;
        }
        double sum = 0.0;
        for (std::size_t q = 0; q < n_groups; ++q) {
            const PairField& gpq = g[p * n_groups + q];
            for (std::size_t j = 0; j < n; ++j) {
                sum += (gpq(i, j) / den) * table(i, j);
            }
        }
        a.values[i] = dw * sum;
    }
    return a;
}
} // namespace detail

/// a_i = dw sum_j eta_ij D(mid_i - mid_j).
inline VelocityField velocity(const PairField& g, const DebateOperator& d, double cutoff = 1e-10)
{
    const auto table = debate_table(d, g.grid);
    const std::vector<PairField> gs{g};
    return detail::labeled_velocity(gs, 1, 0, table, detail::eta_threshold(gs, cutoff));
}

/// Local Lax-Friedrichs interface flux for f: entry k is the flux through the face between
/// cells k-1 and k (k = 0 and k = N are the domain boundary, held at zero).
inline std::vector<double> llf_flux_f(const ScalarField& f, const VelocityField& a)
{
    const std::size_t n = f.size();
    std::vector<double> flux(n + 1, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t i = k - 1;
        const double s = std::max(std::abs(a[i]), std::abs(a[i + 1]));
        flux[k] = 0.5 * (a[i] * f[i] + a[i + 1] * f[i + 1] - (f[i + 1] - f[i]) * s);
    }
    return flux;
}

/// Interface fluxes of g in both directions.
struct PairFlux {
    std::size_t n = 0;
    std::vector<double> omega; ///< (n+1) x n: omega[k*n + j], face between rows k-1 and k
    std::vector<double> m;     ///< n x (n+1): m[i*(n+1) + k], face between columns k-1 and k

    double omega_face(std::size_t k, std::size_t j) const noexcept { return omega[k * n + j]; }
    double m_face(std::size_t i, std::size_t k) const noexcept { return m[i * (n + 1) + k]; }
};

/// LLF fluxes of g: rows move with `a_row` (first variable), columns with `a_col`.
inline PairFlux llf_flux_g(const PairField& g, const VelocityField& a_row, const VelocityField& a_col)
{
    const std::size_t n = g.size();
    PairFlux flux{n, std::vector<double>((n + 1) * n, 0.0), std::vector<double>(n * (n + 1), 0.0)};
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t i = k - 1;
        const double s = std::max(std::abs(a_row[i]), std::abs(a_row[i + 1]));
        for (std::size_t j = 0; j < n; ++j) {
            flux.omega[k * n + j] =
                0.5 * (a_row[i] * g(i, j) + a_row[i + 1] * g(i + 1, j) - (g(i + 1, j) - g(i, j)) * s);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 1; k < n; ++k) {
            const std::size_t j = k - 1;
            const double s = std::max(std::abs(a_col[j]), std::abs(a_col[j + 1]));
            flux.m[i * (n + 1) + k] =
                0.5 * (a_col[j] * g(i, j) + a_col[j + 1] * g(i, j + 1) - (g(i, j + 1) - g(i, j)) * s);
        }
    }
    return flux;
}

/// Explicit LLF finite-volume solver for the (f, g) transport system, plain or labelled.
///
/// Each step freezes the velocities computed from g^n, advances every f and g with
/// zero-flux boundaries, then applies the optional diffusion (mirrored ghost cells) and the
/// birth-death source lambda f(w) f(m) - mu g(w, m) as a forward Euler split step.
class ContinuumSolver
{
public:
    ContinuumSolver(DebateOperator d, const Grid& grid, ContinuumParams params)
        : debate_(std::move(d))
        , grid_(grid)
        , params_(params)
    {
        params_.validate(debate_, grid_);
        dt_ = params_.effective_dt(debate_, grid_);
        table_ = debate_table(debate_, grid_);
    }

    double dt() const noexcept { return dt_; }
    const Grid& grid() const noexcept { return grid_; }
    const ContinuumParams& params() const noexcept { return params_; }
    const PairField& table() const noexcept { return table_; }

    std::vector<VelocityField> velocities(const LabeledFields& fields) const
    {
        const double threshold = detail::eta_threshold(fields.g, params_.eta_cutoff);
        std::vector<VelocityField> a;
        for (std::size_t p = 0; p < fields.n_groups; ++p) {
            a.push_back(detail::labeled_velocity(fields.g, fields.n_groups, p, table_, threshold));
        }
        return a;
    }

    void step(LabeledFields& fields, double dt) const
    {
        check_dt(dt);
        advance(fields.f, fields.g, fields.n_groups, dt);
    }
    void step(LabeledFields& fields) const { step(fields, dt_); }

    std::pair<ScalarField, PairField> step(ScalarField f, PairField g, double dt) const
    {
        check_dt(dt);
        std::vector<ScalarField> fs;
        fs.push_back(std::move(f));
        std::vector<PairField> gs;
        gs.push_back(std::move(g));
        advance(fs, gs, 1, dt);
        return {std::move(fs.front()), std::move(gs.front())};
    }
    std::pair<ScalarField, PairField> step(ScalarField f, PairField g) const
    {
        return step(std::move(f), std::move(g), dt_);
    }

private:
    void check_dt(double dt) const
    {
        if (!(dt > 0.0) || dt > dt_) {
            ContinuumParams p = params_;
            p.dt = dt;
            p.validate(debate_, grid_);
        }
    }

    void advance(std::vector<ScalarField>& f, std::vector<PairField>& g, std::size_t n_groups, double dt) const
    {
        const std::size_t n = grid_.size();
        const double dw = grid_.width();
        const double k = dt / dw;
        const double r = dt * params_.diffusion_sigma / (dw * dw);
        const bool diffuse = params_.diffusion_sigma > 0.0;

        const double threshold = detail::eta_threshold(g, params_.eta_cutoff);
        std::vector<VelocityField> a;
        a.reserve(n_groups);
        for (std::size_t p = 0; p < n_groups; ++p) {
            a.push_back(detail::labeled_velocity(g, n_groups, p, table_, threshold));
        }

        for (std::size_t p = 0; p < n_groups; ++p) {
            const ScalarField& old = f[p];
            const auto flux = llf_flux_f(old, a[p]);
            ScalarField next(grid_);
            for (std::size_t i = 0; i < n; ++i) {
                double v = old[i] - k * (flux[i + 1] - flux[i]);
                if (diffuse) {
                    const double left = i > 0 ? old[i - 1] : old[i];
                    const double right = i + 1 < n ? old[i + 1] : old[i];
                    v += r * ((right - old[i]) - (old[i] - left));
                }
                next[i] = v;
            }
            f[p] = std::move(next);
        }

        for (std::size_t p = 0; p < n_groups; ++p) {
            for (std::size_t q = 0; q < n_groups; ++q) {
                PairField& gpq = g[p * n_groups + q];
                const auto flux = llf_flux_g(gpq, a[p], a[q]);
                PairField next(grid_);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const double transport = (flux.omega_face(i + 1, j) - flux.omega_face(i, j)) +
                                                 (flux.m_face(i, j + 1) - flux.m_face(i, j));
                        double v = gpq(i, j) - k * transport;
                        if (diffuse) {
                            const double c = gpq(i, j);
                            const double up = i > 0 ? gpq(i - 1, j) : c;
                            const double down = i + 1 < n ? gpq(i + 1, j) : c;
                            const double left = j > 0 ? gpq(i, j - 1) : c;
                            const double right = j + 1 < n ? gpq(i, j + 1) : c;
                            v += r * (((down - c) - (c - up)) + ((right - c) - (c - left)));
                        }
                        next(i, j) = v;
                    }
                }
                gpq = std::move(next);
            }
        }

        if (params_.birth_rate > 0.0 || params_.death_rate > 0.0) {
            for (std::size_t p = 0; p < n_groups; ++p) {
                for (std::size_t q = 0; q < n_groups; ++q) {
                    PairField& gpq = g[p * n_groups + q];
                    for (std::size_t i = 0; i < n; ++i) {
                        for (std::size_t j = 0; j < n; ++j) {
                            gpq(i, j) += dt * (params_.birth_rate * (f[p][i] * f[q][j]) -
                                               params_.death_rate * gpq(i, j));
                        }
                    }
                }
            }
        }
    }

    DebateOperator debate_;
    Grid grid_;
    ContinuumParams params_;
    double dt_ = 0.0;
    PairField table_;
};

/// One step of the unlabelled system.
inline std::pair<ScalarField, PairField> step_unlabeled(ScalarField f, PairField g, const DebateOperator& d,
                                                        const ContinuumParams& params)
{
    const ContinuumSolver solver(d, f.grid, params);
    return solver.step(std::move(f), std::move(g));
}

/// One step of the group-labelled system.
inline LabeledFields step_labeled(LabeledFields fields, const DebateOperator& d, const ContinuumParams& params)
{
    const ContinuumSolver solver(d, fields.grid(), params);
    solver.step(fields);
    return fields;
}

} // namespace opinet
