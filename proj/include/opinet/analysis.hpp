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
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "opinet/debate.hpp"
#include "opinet/errors.hpp"
#include "opinet/fields.hpp"

namespace opinet
{

/// dw^2 sum_ij mid_i g_ij. Exactly conserved by the continuum dynamics.
inline double g_first_moment(const PairField& g)
{
    const std::size_t n = g.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row += g(i, j);
        }
        s += g.grid.midpoint(i) * row;
    }
    return g.grid.width() * g.grid.width() * s;
}

/// Consensus value predicted by the continuum model from a normalised initial g.
inline double consensus_value_cont(const PairField& g0)
{
    const double mass = g0.mass();
    if (std::abs(mass - 1.0) > 1e-10) {
        throw ConfigError("consensus_value_cont: initial g has mass " + std::to_string(mass) + ", expected 1");
    }
    return g_first_moment(g0);
}

/// sqrt(dw sum_i (mid_i - w_inf)^2 f_i) by the midpoint rule.
inline double e_cont(const ScalarField& f, double omega_inf)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = f.grid.midpoint(i) - omega_inf;
        s += d * d * f[i];
    }
    return std::sqrt(std::max(0.0, f.grid.width() * s));
}

/// Labelled version: the second moments of all labels are added before the square root.
inline double e_cont(const LabeledFields& fields, double omega_inf)
{
    double s = 0.0;
    for (const auto& fp : fields.f) {
        const double e = e_cont(fp, omega_inf);
        s += e * e;
    }
    return std::sqrt(s);
}

/// dw^2 sum_ij W(mid_i - mid_j) g_ij, the continuum counterpart of the discrete potential.
inline double lyapunov_tilde(const PairField& g, const DebateOperator& d)
{
    const std::size_t n = g.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            s += d.W(g.grid.midpoint(i) - g.grid.midpoint(j)) * g(i, j);
        }
    }
    return g.grid.width() * g.grid.width() * s;
}

/// h_i = dw sum_j g_ij.
inline ScalarField connectivity_marginal(const PairField& g)
{
    ScalarField h(g.grid);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row += g(i, j);
        }
        h[i] = g.grid.width() * row;
    }
    return h;
}

struct RateFit {
    double rate = 0.0;
    double intercept = 0.0;
    double fit_error = 0.0; ///< mean |log v - fit| / |log v| over the window
    std::size_t samples = 0;
    double t_lo = 0.0;
    double t_hi = 0.0;
};

/// Least-squares fit of log(values) = intercept - rate * t over samples with t in [t_lo, t_hi].
inline RateFit fit_exponential_rate(std::span<const double> times, std::span<const double> values, double t_lo,
                                    double t_hi)
{
    detail::require_config(times.size() == values.size(), "fit", "times and values differ in length");
    std::vector<double> ts;
    std::vector<double> ls;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_lo || times[k] > t_hi) {
            continue;
        }
        if (!(values[k] > 0.0)) {
            throw NumericalError("fit_exponential_rate: nonpositive value at t=" + std::to_string(times[k]) +
                                 "; shrink the fit window");
        }
        ts.push_back(times[k]);
        ls.push_back(std::log(values[k]));
    }
    if (ts.size() < 10) {
        throw NumericalError("fit_exponential_rate: only " + std::to_string(ts.size()) +
                             " samples in the fit window (need 10)");
    }
    const double m = static_cast<double>(ts.size());
    double t_mean = 0.0;
    double l_mean = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        t_mean += ts[k];
        l_mean += ls[k];
    }
    t_mean /= m;
    l_mean /= m;
    double stt = 0.0;
    double stl = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        stt += (ts[k] - t_mean) * (ts[k] - t_mean);
        stl += (ts[k] - t_mean) * (ls[k] - l_mean);
    }
    const double slope = stl / stt;
    RateFit fit;
    fit.rate = -slope;
    fit.intercept = l_mean - slope * t_mean;
    fit.samples = ts.size();
    fit.t_lo = ts.front();
    fit.t_hi = ts.back();
    double err = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double model = fit.intercept + slope * ts[k];
        const double denom = std::abs(ls[k]);
        err += denom > 0.0 ? std::abs(ls[k] - model) / denom : 0.0;
    }
    fit.fit_error = std::min(1.0, err / m);
    return fit;
}

/// Shortens [t_lo, t_hi] so it ends before the series first drops below `floor_factor`
/// times its minimum (the numerical-diffusion plateau). The window is left unchanged if the
/// truncated one would hold fewer than `min_samples` samples.
inline double truncated_window_end(std::span<const double> times, std::span<const double> values, double t_lo,
                                   double t_hi, double floor_factor = 3.0, std::size_t min_samples = 10)
{
    double floor = std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (std::isfinite(v)) {
            floor = std::min(floor, v);
        }
    }
    if (!(floor > 0.0) || !std::isfinite(floor)) {
        return t_hi;
    }
    double end = t_hi;
    std::size_t kept = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_lo || times[k] > t_hi) {
            continue;
        }
        if (values[k] < floor_factor * floor) {
            end = times[k];
            break;
        }
        ++kept;
    }
    return kept >= min_samples ? end : t_hi;
}

/// Diagnostics of one run on a shared time base; absent series hold NaN.
struct RunReport {
    std::vector<double> times;
    std::vector<double> e_micro;
    std::vector<double> e_cont_labeled;
    std::vector<double> e_cont_unlabeled;
    std::vector<double> conserved_micro;
    std::vector<double> g_first_moment;
    std::vector<double> v_micro;
    std::vector<double> lyapunov_tilde;
    std::map<std::string, RateFit> fitted_rates;
    double omega_inf_micro = std::numeric_limits<double>::quiet_NaN();
    double omega_inf_cont = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> warnings;
};

} // namespace opinet
