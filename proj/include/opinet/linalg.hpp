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
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "opinet/errors.hpp"

namespace opinet
{

/// Row-major dense square matrix. Only used for desk-scale spectral diagnostics.
class SquareMatrix
{
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0)
        : n_(n)
        , data_(n * n, fill)
    {
    }

    std::size_t size() const noexcept { return n_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const SquareMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

struct EigenDecomposition {
    std::vector<double> values;          ///< ascending
    std::vector<std::vector<double>> vectors; ///< vectors[k] belongs to values[k], unit norm
};

/// Eigenvalues and eigenvectors of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm drops below
/// `rel_tol` times the Frobenius norm of the input. Throws NumericalError if
/// `max_sweeps` is exhausted first.
inline EigenDecomposition jacobi_eigen(const SquareMatrix& input, double rel_tol = 1e-13,
                                       int max_sweeps = 100)
{
    const std::size_t n = input.size();
    SquareMatrix a = input;
    SquareMatrix v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v(i, i) = 1.0;
    }

    double frob = 0.0;
    for (double x : input.data()) {
        frob += x * x;
    }
    frob = std::sqrt(frob);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                s += 2.0 * a(p, q) * a(p, q);
            }
        }
        return std::sqrt(s);
    };

    int sweep = 0;
    while (off_norm() > rel_tol * frob) {
        if (sweep++ >= max_sweeps) {
            throw NumericalError("jacobi_eigen: no convergence after " + std::to_string(max_sweeps) +
                                 " sweeps (n=" + std::to_string(n) + ")");
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                // Rotation angle zeroing a(p,q); see Golub & Van Loan, Alg. 8.5.1.
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    EigenDecomposition out;
    out.values.reserve(n);
    out.vectors.reserve(n);
    for (std::size_t k : order) {
        out.values.push_back(a(k, k));
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = v(i, k);
        }
        out.vectors.push_back(std::move(col));
    }
    return out;
}

} // namespace opinet
