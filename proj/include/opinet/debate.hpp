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

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "opinet/errors.hpp"

namespace opinet
{

/// Pairwise interaction D(z) = -W'(z) derived from an even interaction potential W.
///
/// `lipschitz_bound` is sup |D'| and `sup_norm` is sup |D| over the reachable differences
/// z in [-2, 2] (opinions live in (-1, 1)). Both are declared by the caller for custom
/// potentials.
struct DebateOperator {
    std::string name;
    std::function<double(double)> potential;
    std::function<double(double)> force;
    double lipschitz_bound = 0.0;
    double sup_norm = 0.0;

    double operator()(double z) const { return force(z); }
    double W(double z) const { return potential(z); }

    /// W(z) = z^2/2, D(z) = -z.
    static DebateOperator linear()
    {
        return {"linear", [](double z) { return 0.5 * z * z; }, [](double z) { return -z; }, 1.0, 2.0};
    }

    /// W(z) = z^4/4, D(z) = -z^3.
    static DebateOperator quartic()
    {
        return {"quartic", [](double z) { return 0.25 * z * z * z * z; }, [](double z) { return -z * z * z; },
                12.0, 8.0};
    }

    /// D = 0: no interaction. Not a consensus operator; used to isolate noise effects.
    static DebateOperator zero()
    {
        return {"zero", [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 0.0};
    }

    static DebateOperator from_potential(std::string name, std::function<double(double)> w,
                                         std::function<double(double)> dw, double lipschitz, double sup)
    {
        return {std::move(name), std::move(w), [dw = std::move(dw)](double z) { return -dw(z); }, lipschitz,
                sup};
    }

    static DebateOperator by_name(const std::string& name)
    {
        if (name == "linear") {
            return linear();
        }
        if (name == "quartic") {
            return quartic();
        }
        if (name == "zero") {
            return zero();
        }
        throw ConfigError("debate: unknown operator '" + name + "' (expected linear, quartic or zero)");
    }
};

/// Checks D(0) = 0, oddness and monotonicity on a uniform sample of [-2, 2].
inline bool is_consensus_operator(const DebateOperator& d, int samples = 4001, double tol = 1e-12)
{
    if (std::abs(d(0.0)) > tol) {
        return false;
    }
    double prev = d(-2.0);
    for (int k = 0; k < samples; ++k) {
        const double z = -2.0 + 4.0 * k / (samples - 1);
        const double v = d(z);
        if (std::abs(v + d(-z)) > tol || v > prev + tol) {
            return false;
        }
        prev = v;
    }
    return true;
}

} // namespace opinet
