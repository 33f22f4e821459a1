// Copyright 2026 The friendsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's algorithms; only its value types are used for input/output.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Mixed-radix digits of `index`, last factor fastest.
inline std::vector<std::size_t> digits(std::size_t index, const std::vector<std::size_t> &dims) {
    std::vector<std::size_t> d(dims.size());
    for (std::size_t k = dims.size(); k-- > 0;) {
        d[k] = index % dims[k];
        index /= dims[k];
    }
    return d;
}

inline std::size_t index(const std::vector<std::size_t> &d, const std::vector<std::size_t> &dims) {
    std::size_t i = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        i = i * dims[k] + d[k];
    }
    return i;
}

/**
 * (rho_keep)[r, c] = sum over full indices (i, j) whose kept digits are (r, c)
 * and whose traced digits agree. O(D^2) loop over every matrix entry.
 */
inline Matrix partial_trace(const Matrix &rho, const std::vector<std::size_t> &dims,
                            const std::vector<std::size_t> &keep_positions) {
    std::vector<std::size_t> kdims;
    for (auto p : keep_positions) {
        kdims.push_back(dims[p]);
    }
    std::size_t kd = 1;
    for (auto d : kdims) {
        kd *= d;
    }
    std::vector<bool> kept(dims.size(), false);
    for (auto p : keep_positions) {
        kept[p] = true;
    }
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(kd));
    const auto n = static_cast<std::size_t>(rho.rows());
    for (std::size_t i = 0; i < n; ++i) {
        const auto di = digits(i, dims);
        for (std::size_t j = 0; j < n; ++j) {
            const auto dj = digits(j, dims);
            bool traced_equal = true;
            for (std::size_t k = 0; k < dims.size(); ++k) {
                if (!kept[k] && di[k] != dj[k]) {
                    traced_equal = false;
                    break;
                }
            }
            if (!traced_equal) {
                continue;
            }
            std::vector<std::size_t> ri, rj;
            for (auto p : keep_positions) {
                ri.push_back(di[p]);
                rj.push_back(dj[p]);
            }
            out(static_cast<Eigen::Index>(index(ri, kdims)), static_cast<Eigen::Index>(index(rj, kdims))) +=
                rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

/// Tr(rho (op_1 x ... x op_n)) with op_k given per factor (identity if empty).
inline cplx product_expectation(const Matrix &rho, const std::vector<std::size_t> &dims,
                                const std::vector<Matrix> &ops) {
    const auto n = static_cast<std::size_t>(rho.rows());
    cplx total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto di = digits(i, dims);
        for (std::size_t j = 0; j < n; ++j) {
            const auto dj = digits(j, dims);
            cplx w = 1.0;
            for (std::size_t k = 0; k < dims.size() && w != 0.0; ++k) {
                if (ops[k].size() == 0) {
                    w *= (di[k] == dj[k]) ? 1.0 : 0.0;
                } else {
                    w *= ops[k](static_cast<Eigen::Index>(dj[k]), static_cast<Eigen::Index>(di[k]));
                }
            }
            total += rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * w;
        }
    }
    return total;
}

inline Vector random_pure(std::size_t dim, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        v(k) = cplx(g(rng), g(rng));
    }
    return v / v.norm();
}

/// G G^dagger / Tr with a Gaussian dim x rank matrix G.
inline Matrix random_density(std::size_t dim, std::size_t rank, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rank));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = cplx(g(rng), g(rng));
        }
    }
    Matrix rho = m * m.adjoint();
    return rho / rho.trace();
}

/// Bloch-sphere grid with the same indexing convention as the library
/// (theta = i*step up to pi, phi = j*step below 2*pi, poles once).
struct GridPoint {
    double theta;
    double phi;
    double x, y, z;
};

inline std::vector<GridPoint> grid_points(double step) {
    std::vector<GridPoint> out;
    const int nt = static_cast<int>(std::floor(std::numbers::pi / step + 1e-9)) + 1;
    const int np = static_cast<int>(std::ceil(2 * std::numbers::pi / step - 1e-9));
    for (int i = 0; i < nt; ++i) {
        const double th = i * step;
        const bool pole = i == 0 || std::abs(th - std::numbers::pi) < 1e-9;
        for (int j = 0; j < (pole ? 1 : np); ++j) {
            const double ph = j * step;
            out.push_back({th, ph, std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
        }
    }
    return out;
}

/**
 * Exhaustive max over the grid of |E(A1,B1) + E(A1,B0) + E(A0,B1) - E(A0,B0)|,
 * where each observable is n.G for a generator triple G. Every correlator is
 * tabulated by a direct trace, then all Alice pairs are enumerated with Bob's
 * best response per pair (the combination splits over B0 and B1).
 */
inline double grid_chsh_max(const Matrix &rho, const std::array<Matrix, 3> &ga, const std::array<Matrix, 3> &gb,
                            double step) {
    const auto pts = grid_points(step);
    const std::size_t n = pts.size();
    const auto da = ga[0].rows();
    const auto db = gb[0].rows();
    auto obs = [](const std::array<Matrix, 3> &g, const GridPoint &p) {
        return Matrix(p.x * g[0] + p.y * g[1] + p.z * g[2]);
    };
    std::vector<double> e(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix a = obs(ga, pts[i]);
        for (std::size_t j = 0; j < n; ++j) {
            const Matrix b = obs(gb, pts[j]);
            Matrix ab(da * db, da * db);
            for (Eigen::Index r = 0; r < da; ++r) {
                for (Eigen::Index c = 0; c < da; ++c) {
                    ab.block(r * db, c * db, db, db) = a(r, c) * b;
                }
            }
            e[i * n + j] = (rho * ab).trace().real();
        }
    }
    double best = 0.0;
    for (std::size_t a0 = 0; a0 < n; ++a0) {
        for (std::size_t a1 = 0; a1 < n; ++a1) {
            double hi1 = -1e300, lo1 = 1e300, hi0 = -1e300, lo0 = 1e300;
            for (std::size_t b = 0; b < n; ++b) {
                const double s1 = e[a1 * n + b] + e[a0 * n + b];
                const double s0 = e[a1 * n + b] - e[a0 * n + b];
                hi1 = std::max(hi1, s1);
                lo1 = std::min(lo1, s1);
                hi0 = std::max(hi0, s0);
                lo0 = std::min(lo0, s0);
            }
            best = std::max({best, hi1 + hi0, -(lo1 + lo0)});
        }
    }
    return best;
}

}  // namespace oracle
