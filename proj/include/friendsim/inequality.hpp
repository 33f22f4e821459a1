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

/**
 * @file
 * Correlators and the four-setting CHSH combination
 *
 *     S = E(A1,B1) + E(A1,B0) + E(A0,B1) - E(A0,B0),
 *
 * evaluated exactly or by sampling, plus an exhaustive search for the
 * settings maximizing |S| on a grid of Bloch angles.
 */

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "friendsim/hilbert.hpp"
#include "friendsim/measurement.hpp"
#include "friendsim/rng.hpp"

namespace friendsim {

inline constexpr double kClassicalBound = 2.0;
inline const double kTsirelsonBound = 2.0 * std::numbers::sqrt2;

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

inline Vector3 bloch_vector(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

/**
 * Three pairwise anticommuting dichotomic generators on one party's factors.
 * For every unit vector n, n.x G0 + n.y G1 + n.z G2 squares to the identity,
 * so the family is parameterized by Bloch angles like a qubit.
 */
class BlochFamily {
  public:
    BlochFamily(CompositeSpace space, std::array<Matrix, 3> generators)
        : space_(std::move(space)), gens_(std::move(generators)) {
        const auto n = static_cast<Eigen::Index>(space_.total_dim());
        for (std::size_t i = 0; i < 3; ++i) {
            // Constructing the observable checks hermiticity and G^2 = I.
            (void)DichotomicObservable(space_, gens_[i]);
            for (std::size_t j = 0; j < i; ++j) {
                Matrix ac = gens_[i] * gens_[j] + gens_[j] * gens_[i];
                if (ac.cwiseAbs().maxCoeff() > kValidityTol || ac.rows() != n) {
                    throw InvariantViolation("Bloch family generators must anticommute");
                }
            }
        }
    }

    /// Pauli X, Y, Z on one qubit.
    static BlochFamily qubit(const std::string &label) {
        return BlochFamily(CompositeSpace::qubits({label}),
                           {pauli_matrix('x'), pauli_matrix('y'), pauli_matrix('z')});
    }

    /**
     * Observables on a photon pair (first, second) that act as a logical
     * qubit on span{|hv>, |vh>} (and likewise on span{|hh>, |vv>}):
     * X(x)X, Y(x)X, Z(x)I. At theta = 0 this is "which polarization" of the
     * first photon; on the equator its eigenvectors are Bell states.
     */
    static BlochFamily pair(const std::string &first, const std::string &second) {
        const Matrix id = Matrix::Identity(2, 2);
        return BlochFamily(CompositeSpace::qubits({first, second}),
                           {kron(pauli_matrix('x'), pauli_matrix('x')), kron(pauli_matrix('y'), pauli_matrix('x')),
                            kron(pauli_matrix('z'), id)});
    }

    const CompositeSpace &space() const { return space_; }
    const std::array<Matrix, 3> &generators() const { return gens_; }

    Matrix matrix(const Vector3 &n) const { return n.x() * gens_[0] + n.y() * gens_[1] + n.z() * gens_[2]; }

    DichotomicObservable observable(double theta, double phi) const {
        return DichotomicObservable(space_, matrix(bloch_vector(theta, phi)));
    }

  private:
    CompositeSpace space_;
    std::array<Matrix, 3> gens_;
};

struct BlochSetting {
    double theta = 0.0;
    double phi = 0.0;
    DichotomicObservable obs;
};

/// Alice's (A0, A1) and Bob's (B0, B1).
struct MeasurementSettings {
    BlochSetting alice0;
    BlochSetting alice1;
    BlochSetting bob0;
    BlochSetting bob1;

    /// Angles in the order (A0 theta, A0 phi, A1 theta, A1 phi, B0 ..., B1 ...).
    static MeasurementSettings from_angles(const BlochFamily &alice, const BlochFamily &bob,
                                           const std::array<double, 8> &ang) {
        return {{ang[0], ang[1], alice.observable(ang[0], ang[1])},
                {ang[2], ang[3], alice.observable(ang[2], ang[3])},
                {ang[4], ang[5], bob.observable(ang[4], ang[5])},
                {ang[6], ang[7], bob.observable(ang[6], ang[7])}};
    }

    std::array<double, 8> angles() const {
        return {alice0.theta, alice0.phi, alice1.theta, alice1.phi, bob0.theta, bob0.phi, bob1.theta, bob1.phi};
    }
};

/// Labeled defaults, not measured values: A0/B0 "which polarization"
/// (theta = 0), A1/B1 the equatorial x setting (Bell-type for pair families).
inline MeasurementSettings default_settings(const BlochFamily &alice, const BlochFamily &bob) {
    const double half = std::numbers::pi / 2;
    return MeasurementSettings::from_angles(alice, bob, {0.0, 0.0, half, 0.0, 0.0, 0.0, half, 0.0});
}

struct InequalityResult {
    double s_value = 0.0;
    /// E(A1,B1), E(A1,B0), E(A0,B1), E(A0,B0).
    std::array<double, 4> correlators{};
    double bound = kClassicalBound;
    std::optional<CollapseHypothesis> hypothesis;
    bool exact = true;
    std::optional<long long> shots;
    std::optional<double> std_error;
    /// Sampled outcome counts per correlator, ordered (++, +-, -+, --).
    std::array<std::array<long long, 4>, 4> counts{};
    /// Born probabilities behind the counts, same layout.
    std::array<std::array<double, 4>, 4> probabilities{};

    bool violates() const { return std::abs(s_value) > bound; }
};

/// E = <A (x) B>. A and B must act on disjoint factors of rho.
inline double correlator(const DensityOperator &rho, const DichotomicObservable &a, const DichotomicObservable &b) {
    for (const auto &l : a.space().labels()) {
        if (b.space().contains(l)) {
            throw ShapeError("correlator observables overlap on '" + l + "'");
        }
    }
    auto on = a.space().labels();
    auto more = b.space().labels();
    on.insert(on.end(), more.begin(), more.end());
    for (const auto &l : on) {
        if (!rho.space().contains(l)) {
            throw ShapeError("observable factor '" + l + "' is not part of " + rho.space().describe());
        }
    }
    return expectation_of(rho, kron(a.matrix(), b.matrix()), on).real();
}

namespace detail {

inline double chsh_combination(const std::array<double, 4> &e) { return e[0] + e[1] + e[2] - e[3]; }

inline void check_tsirelson(double s) {
    if (std::abs(s) > kTsirelsonBound + 1e-9) {
        throw InvariantViolation("CHSH value " + std::to_string(s) + " exceeds the Tsirelson bound");
    }
}

}  // namespace detail

inline InequalityResult chsh_value(const DensityOperator &rho, const MeasurementSettings &st) {
    InequalityResult r;
    r.correlators = {correlator(rho, st.alice1.obs, st.bob1.obs), correlator(rho, st.alice1.obs, st.bob0.obs),
                     correlator(rho, st.alice0.obs, st.bob1.obs), correlator(rho, st.alice0.obs, st.bob0.obs)};
    r.s_value = detail::chsh_combination(r.correlators);
    r.exact = true;
    detail::check_tsirelson(r.s_value);
    return r;
}

/// Largest |S| over all local deterministic outcome assignments
/// (A0, A1, B0, B1) in {+1, -1}^4.
inline double local_deterministic_max() {
    double best = 0.0;
    for (int mask = 0; mask < 16; ++mask) {
        const double a0 = (mask & 1) ? -1.0 : 1.0;
        const double a1 = (mask & 2) ? -1.0 : 1.0;
        const double b0 = (mask & 4) ? -1.0 : 1.0;
        const double b1 = (mask & 8) ? -1.0 : 1.0;
        best = std::max(best, std::abs(detail::chsh_combination({a1 * b1, a1 * b0, a0 * b1, a0 * b0})));
    }
    return best;
}

/// T_ij = <G_i (x) H_j> for Alice's generators G and Bob's H. For Bloch
/// observables E(A(n), B(m)) = n^T T m.
inline Matrix3 correlation_matrix(const DensityOperator &rho, const BlochFamily &alice, const BlochFamily &bob) {
    Matrix3 t;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                correlator(rho, DichotomicObservable(alice.space(), alice.generators()[i]),
                           DichotomicObservable(bob.space(), bob.generators()[j]));
        }
    }
    return t;
}

/**
 * Regular grid of Bloch angles: theta = i*step for i = 0..n_theta-1 (up to
 * pi), phi = j*step for j = 0..n_phi-1 (below 2*pi). A pole is represented
 * only by phi index 0.
 */
class AngleGrid {
  public:
    explicit AngleGrid(double step) : step_(step) {
        if (!(step > 0.0) || step > std::numbers::pi / 8 + 1e-15) {
            throw std::invalid_argument("grid step must lie in (0, pi/8]");
        }
        n_theta_ = static_cast<int>(std::floor(std::numbers::pi / step + 1e-9)) + 1;
        n_phi_ = static_cast<int>(std::ceil(2.0 * std::numbers::pi / step - 1e-9));
        south_pole_ = std::abs((n_theta_ - 1) * step - std::numbers::pi) < 1e-9;
        points_.resize(static_cast<std::size_t>(n_theta_ * n_phi_));
        for (int i = 0; i < n_theta_; ++i) {
            for (int j = 0; j < n_phi_; ++j) {
                points_[flat(i, j)] = bloch_vector(theta(i), phi(j));
            }
        }
    }

    double step() const { return step_; }
    int n_theta() const { return n_theta_; }
    int n_phi() const { return n_phi_; }
    double theta(int i) const { return i * step_; }
    double phi(int j) const { return j * step_; }
    std::size_t flat(int i, int j) const { return static_cast<std::size_t>(i * n_phi_ + j); }
    const Vector3 &point(int i, int j) const { return points_[flat(i, j)]; }

    bool is_pole(int i) const { return i == 0 || (south_pole_ && i == n_theta_ - 1); }
    bool canonical(int i, int j) const { return j == 0 || !is_pole(i); }

    struct Best {
        double value = 0.0;
        int i = 0;
        int j = 0;
    };

    /**
     * max over grid points m of m.u, ties to the lexicographically smallest
     * (i, j). The maximizer is the grid point nearest to u's direction, which
     * lies within a few rings and columns of it; only those are scanned.
     */
    Best maximize_linear(const Vector3 &u) const {
        const double len = u.norm();
        if (!(len > 1e-300)) {
            return {0.0, 0, 0};
        }
        const double th = std::acos(std::clamp(u.z() / len, -1.0, 1.0));
        double ph = std::atan2(u.y(), u.x());
        if (ph < 0) {
            ph += 2.0 * std::numbers::pi;
        }
        const int fi = static_cast<int>(std::floor(th / step_));
        const int fj = static_cast<int>(std::floor(ph / step_));
        Best best{-std::numeric_limits<double>::infinity(), 0, 0};
        auto consider = [&](int i, int j) {
            const double v = point(i, j).dot(u);
            if (v > best.value || (v == best.value && (i < best.i || (i == best.i && j < best.j)))) {
                best = {v, i, j};
            }
        };
        for (int i = std::max(0, fi - 2); i <= std::min(n_theta_ - 1, fi + 3); ++i) {
            if (is_pole(i)) {
                consider(i, 0);
                continue;
            }
            for (int dj = -1; dj <= 2; ++dj) {
                consider(i, ((fj + dj) % n_phi_ + n_phi_) % n_phi_);
            }
        }
        return best;
    }

    /// Nearest grid point to a direction.
    std::pair<int, int> nearest(const Vector3 &n) const {
        auto b = maximize_linear(n);
        return {b.i, b.j};
    }

  private:
    double step_;
    int n_theta_ = 0;
    int n_phi_ = 0;
    bool south_pole_ = false;
    std::vector<Vector3> points_;
};

struct GridOptimum {
    MeasurementSettings settings;
    double s_max = 0.0;
    /// Grid indices (A0 i, A0 j, A1 i, A1 j, B0 i, B0 j, B1 i, B1 j).
    std::array<int, 8> indices{};
    std::size_t leaves_evaluated = 0;
};

namespace detail {

struct Candidate {
    double value = -1.0;
    std::array<int, 8> idx{};

    /// Larger value first, then lexicographically smaller angle tuple.
    bool better_than(const Candidate &o) const { return value > o.value || (value == o.value && idx < o.idx); }
};

/**
 * Exhaustive grid maximization of |S| by branch and bound.
 *
 * For fixed Alice vectors (n0, n1) Bob's problem decouples:
 *   S = m1.T^T(n1+n0) + m0.T^T(n1-n0),
 * so Bob's grid optimum is two independent nearest-point lookups. Alice's
 * pairs are enumerated over a 4-d index box that is split recursively; a box
 * is discarded when the Lipschitz bound
 *   |T^T(c1+c0)| + |T^T(c1-c0)| + 2 sigma_max (r0 + r1)
 * falls strictly below the incumbent. The result is the exact grid optimum
 * under the order (value desc, index tuple asc), independent of the thread
 * count because every slab starts from the same seed and the final reduction
 * uses the same total order.
 */
class GridSearch {
  public:
    GridSearch(const Matrix3 &t, double step) : t_(t), grid_(step) {
        Eigen::JacobiSVD<Matrix3> svd(t_, Eigen::ComputeFullU | Eigen::ComputeFullV);
        sigma_ = svd.singularValues()(0);
        u_ = svd.matrixU();
        s_ = svd.singularValues();
        half_theta_ = 2 * grid_.n_theta() - 1;
        half_phi_ = 2 * grid_.n_phi() - 1;
        centers_.resize(static_cast<std::size_t>(half_theta_ * half_phi_));
        for (int i = 0; i < half_theta_; ++i) {
            for (int j = 0; j < half_phi_; ++j) {
                centers_[static_cast<std::size_t>(i * half_phi_ + j)] =
                    bloch_vector(0.5 * i * grid_.step(), 0.5 * j * grid_.step());
            }
        }
        sin_theta_.resize(static_cast<std::size_t>(grid_.n_theta()));
        for (int i = 0; i < grid_.n_theta(); ++i) {
            sin_theta_[static_cast<std::size_t>(i)] = std::sin(grid_.theta(i));
        }
        images_.resize(static_cast<std::size_t>(grid_.n_theta() * grid_.n_phi()));
        for (int i = 0; i < grid_.n_theta(); ++i) {
            for (int j = 0; j < grid_.n_phi(); ++j) {
                images_[grid_.flat(i, j)] = t_.transpose() * grid_.point(i, j);
            }
        }
    }

    const AngleGrid &grid() const { return grid_; }

    Candidate evaluate(int i0, int j0, int i1, int j1) const {
        const Vector3 &q0 = images_[grid_.flat(i0, j0)];
        const Vector3 &q1 = images_[grid_.flat(i1, j1)];
        const Vector3 v = q1 + q0;
        const Vector3 w = q1 - q0;
        const auto bv = grid_.maximize_linear(v);
        const auto bw = grid_.maximize_linear(w);
        const auto nv = grid_.maximize_linear(-v);
        const auto nw = grid_.maximize_linear(-w);
        Candidate plus{bv.value + bw.value, {i0, j0, i1, j1, bw.i, bw.j, bv.i, bv.j}};
        Candidate minus{nv.value + nw.value, {i0, j0, i1, j1, nw.i, nw.j, nv.i, nv.j}};
        return minus.better_than(plus) ? minus : plus;
    }

    /// Alice's continuous optimum snapped to the grid.
    Candidate seed() const {
        Vector3 n0 = Vector3::UnitZ();
        Vector3 n1 = Vector3::UnitX();
        if (s_(0) > 0.0) {
            const double ang = std::atan2(s_(1), s_(0));
            n1 = std::cos(ang) * u_.col(0) + std::sin(ang) * u_.col(1);
            n0 = std::cos(ang) * u_.col(0) - std::sin(ang) * u_.col(1);
        }
        auto [i0, j0] = grid_.nearest(n0);
        auto [i1, j1] = grid_.nearest(n1);
        return evaluate(i0, j0, i1, j1);
    }

    struct Result {
        std::array<int, 8> indices{};
        double value = 0.0;
        std::size_t leaves_evaluated = 0;
    };

    Result run(unsigned threads) const {
        Result out;
        if (!(sigma_ > 1e-13)) {
            // Every correlator vanishes: all settings tie at 0.
            out.indices = {0, 0, 0, 0, 0, 0, 0, 0};
            out.leaves_evaluated = 1;
            return out;
        }
        const Candidate start = seed();
        const int slabs = grid_.n_theta();
        std::vector<Candidate> results(static_cast<std::size_t>(slabs), start);
        std::vector<std::size_t> leaves(static_cast<std::size_t>(slabs), 0);
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int k = next++; k < slabs; k = next++) {
                Candidate best = start;
                std::size_t count = 0;
                Box root{{k, 0, 0, 0}, {k, grid_.n_phi() - 1, grid_.n_theta() - 1, grid_.n_phi() - 1}};
                if (grid_.is_pole(k)) {
                    root.hi[1] = 0;
                }
                search(root, best, count);
                results[static_cast<std::size_t>(k)] = best;
                leaves[static_cast<std::size_t>(k)] = count;
            }
        };
        threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(slabs)));
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) {
                pool.emplace_back(worker);
            }
            for (auto &th : pool) {
                th.join();
            }
        }
        Candidate best = start;
        for (std::size_t k = 0; k < results.size(); ++k) {
            if (results[k].better_than(best)) {
                best = results[k];
            }
            out.leaves_evaluated += leaves[k];
        }
        out.indices = best.idx;
        out.value = best.value;
        return out;
    }

  private:
    struct Box {
        std::array<int, 4> lo;
        std::array<int, 4> hi;
    };

    /**
     * Upper bound on U(n0, n1) = |T^T(n1+n0)| + |T^T(n1-n0)| (which itself
     * bounds |S| for any Bob settings) over the unit vectors in a box.
     *
     * Every n in a box lies within arc r of the center c. Two bounds are
     * combined. First order: U(c) + 2 sigma (r0 + r1). Second order, from
     * |y + d| <= |y| + (y/|y|).d + |d|^2 / (2|y|) with d split into the
     * tangent part (size <= r) and the radial part (-|d|^2/2 along c):
     *   U(c) + |g1_t| r1 + |g1.c1| r1^2/2 + |g0_t| r0 + |g0.c0| r0^2/2
     *        + sigma^2 (r0 + r1)^2 (1/(2|y_a|) + 1/(2|y_b|)),
     * where y_a = T^T(c1+c0), y_b = T^T(c1-c0), g1 = T(y_a/|y_a| + y_b/|y_b|)
     * and g0 = T(y_a/|y_a| - y_b/|y_b|). The second bound is what lets boxes
     * straddling a flat optimum be discarded.
     */
    double bound(const Box &b) const {
        const double step = grid_.step();
        auto span = [&](int d) {
            return (b.hi[static_cast<std::size_t>(d)] - b.lo[static_cast<std::size_t>(d)]) * step;
        };
        // Arc from the center to any point: half the theta span plus half the
        // phi span scaled by the largest sin(theta) in the box.
        auto max_sin = [&](int d) {
            const int lo = b.lo[static_cast<std::size_t>(d)];
            const int hi = b.hi[static_cast<std::size_t>(d)];
            if (lo * step <= std::numbers::pi / 2 && hi * step >= std::numbers::pi / 2) {
                return 1.0;
            }
            return std::max(sin_theta_[static_cast<std::size_t>(lo)], sin_theta_[static_cast<std::size_t>(hi)]);
        };
        auto center = [&](int d) -> const Vector3 & {
            const auto t = static_cast<std::size_t>(d);
            return centers_[static_cast<std::size_t>((b.lo[t] + b.hi[t]) * half_phi_ + b.lo[t + 1] + b.hi[t + 1])];
        };
        const double r0 = std::min(2.0, 0.5 * (span(0) + max_sin(0) * span(1)));
        const double r1 = std::min(2.0, 0.5 * (span(2) + max_sin(2) * span(3)));
        const Vector3 &c0 = center(0);
        const Vector3 &c1 = center(2);
        const Vector3 ya = t_.transpose() * (c1 + c0);
        const Vector3 yb = t_.transpose() * (c1 - c0);
        const double la = ya.norm();
        const double lb = yb.norm();
        const double at_center = la + lb;
        double best = at_center + 2.0 * sigma_ * (r0 + r1);
        if (la > 1e-9 && lb > 1e-9) {
            const Vector3 ua = ya / la;
            const Vector3 ub = yb / lb;
            const Vector3 g1 = t_ * (ua + ub);
            const Vector3 g0 = t_ * (ua - ub);
            const double g1r = g1.dot(c1);
            const double g0r = g0.dot(c0);
            const double g1t = (g1 - g1r * c1).norm();
            const double g0t = (g0 - g0r * c0).norm();
            const double rr = r0 + r1;
            const double second = at_center + g1t * r1 + std::abs(g1r) * r1 * r1 / 2 + g0t * r0 +
                                  std::abs(g0r) * r0 * r0 / 2 + sigma_ * sigma_ * rr * rr * (0.5 / la + 0.5 / lb);
            best = std::min(best, second);
        }
        return best + 1e-12;
    }

    /// Continuous-Bob bound at a single Alice pair.
    double leaf_bound(int i0, int j0, int i1, int j1) const {
        const Vector3 &q0 = images_[grid_.flat(i0, j0)];
        const Vector3 &q1 = images_[grid_.flat(i1, j1)];
        return (q1 + q0).norm() + (q1 - q0).norm() + 1e-12;
    }

    void search(const Box &b, Candidate &best, std::size_t &count) const {
        int widest = -1;
        int width = 0;
        for (int d = 0; d < 4; ++d) {
            const int w = b.hi[static_cast<std::size_t>(d)] - b.lo[static_cast<std::size_t>(d)];
            if (w > width) {
                width = w;
                widest = d;
            }
        }
        std::size_t volume = 1;
        for (std::size_t d = 0; d < 4; ++d) {
            volume *= static_cast<std::size_t>(b.hi[d] - b.lo[d] + 1);
        }
        if (volume <= kLeafBatch) {
            for (int i0 = b.lo[0]; i0 <= b.hi[0]; ++i0) {
                for (int j0 = b.lo[1]; j0 <= b.hi[1]; ++j0) {
                    if (!grid_.canonical(i0, j0)) {
                        continue;
                    }
                    for (int i1 = b.lo[2]; i1 <= b.hi[2]; ++i1) {
                        for (int j1 = b.lo[3]; j1 <= b.hi[3]; ++j1) {
                            if (!grid_.canonical(i1, j1) || leaf_bound(i0, j0, i1, j1) < best.value) {
                                continue;
                            }
                            ++count;
                            auto c = evaluate(i0, j0, i1, j1);
                            if (c.better_than(best)) {
                                best = c;
                            }
                        }
                    }
                }
            }
            return;
        }
        const auto wd = static_cast<std::size_t>(widest);
        const int mid = b.lo[wd] + width / 2;
        Box left = b;
        Box right = b;
        left.hi[wd] = mid;
        right.lo[wd] = mid + 1;
        clip_pole(left);
        clip_pole(right);
        const double bl = bound(left);
        const double br = bound(right);
        const bool right_first = br > bl;
        const Box &first = right_first ? right : left;
        const Box &second = right_first ? left : right;
        const double bf = right_first ? br : bl;
        const double bs = right_first ? bl : br;
        if (!(bf < best.value)) {
            search(first, best, count);
        }
        if (!(bs < best.value)) {
            search(second, best, count);
        }
    }

    /// A box whose theta range is a single pole needs only phi index 0.
    void clip_pole(Box &b) const {
        for (int p = 0; p < 4; p += 2) {
            const auto ps = static_cast<std::size_t>(p);
            if (b.lo[ps] == b.hi[ps] && grid_.is_pole(b.lo[ps])) {
                b.hi[ps + 1] = b.lo[ps + 1];
            }
        }
    }

    /// Boxes with at most this many Alice pairs are scanned directly.
    static constexpr std::size_t kLeafBatch = 16;

    Matrix3 t_;
    AngleGrid grid_;
    int half_theta_ = 0;
    int half_phi_ = 0;
    std::vector<Vector3> centers_;
    std::vector<double> sin_theta_;
    double sigma_ = 0.0;
    Matrix3 u_;
    Vector3 s_;
    std::vector<Vector3> images_;
};

}  // namespace detail

/**
 * Settings maximizing |S| over the Bloch-angle grid of the given step, for
 * every one of the four observables. Deterministic; refining the step by an
 * integer factor never lowers the result (the coarse grid is a subset).
 */
inline GridOptimum optimize_settings(const DensityOperator &rho, const BlochFamily &alice, const BlochFamily &bob,
                                     double grid_step, unsigned threads = 1) {
    const Matrix3 t = correlation_matrix(rho, alice, bob);
    detail::GridSearch search(t, grid_step);
    const auto found = search.run(threads);
    const auto &g = search.grid();
    const auto &ix = found.indices;
    auto settings = MeasurementSettings::from_angles(
        alice, bob,
        {g.theta(ix[0]), g.phi(ix[1]), g.theta(ix[2]), g.phi(ix[3]), g.theta(ix[4]), g.phi(ix[5]), g.theta(ix[6]),
         g.phi(ix[7])});
    const double s = std::abs(chsh_value(rho, settings).s_value);
    return GridOptimum{std::move(settings), s, ix, found.leaves_evaluated};
}

/**
 * Sampled estimate of S: for each of the four setting pairs, `shots`
 * outcomes are drawn from the Born distribution over (++, +-, -+, --).
 * Each E is estimated by its sample mean with variance (1 - E^2)/shots.
 */
inline InequalityResult sample_inequality(const DensityOperator &rho, const MeasurementSettings &st, long long shots,
                                          Rng &rng) {
    if (shots < 1) {
        throw std::invalid_argument("sample_inequality needs at least one shot");
    }
    const std::array<std::pair<const DichotomicObservable *, const DichotomicObservable *>, 4> pairs{{
        {&st.alice1.obs, &st.bob1.obs},
        {&st.alice1.obs, &st.bob0.obs},
        {&st.alice0.obs, &st.bob1.obs},
        {&st.alice0.obs, &st.bob0.obs},
    }};
    InequalityResult r;
    r.exact = false;
    r.shots = shots;
    double var = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto &a = *pairs[k].first;
        const auto &b = *pairs[k].second;
        // Overlap check and label list, as in correlator().
        (void)correlator(rho, a, b);
        auto on = a.space().labels();
        auto more = b.space().labels();
        on.insert(on.end(), more.begin(), more.end());
        std::vector<double> p;
        for (int sa : {+1, -1}) {
            for (int sb : {+1, -1}) {
                p.push_back(expectation_of(rho, kron(a.projector(sa), b.projector(sb)), on).real());
            }
        }
        p = detail::clean_probabilities(std::move(p), "sample_inequality");
        // Multinomial draw as a chain of conditional binomials.
        long long remaining = shots;
        double mass = 1.0;
        std::array<long long, 4> n{};
        for (std::size_t o = 0; o < 3; ++o) {
            const double q = mass > 0.0 ? std::clamp(p[o] / mass, 0.0, 1.0) : 0.0;
            std::binomial_distribution<long long> bin(remaining, q);
            n[o] = remaining > 0 ? bin(rng) : 0;
            remaining -= n[o];
            mass -= p[o];
        }
        n[3] = remaining;
        const double e = static_cast<double>(n[0] - n[1] - n[2] + n[3]) / static_cast<double>(shots);
        r.correlators[k] = e;
        r.counts[k] = n;
        r.probabilities[k] = {p[0], p[1], p[2], p[3]};
        var += (1.0 - e * e) / static_cast<double>(shots);
    }
    r.s_value = detail::chsh_combination(r.correlators);
    r.std_error = std::sqrt(var);
    return r;
}

struct HypothesisRow {
    CollapseHypothesis hypothesis;
    /// Exact S at the shared witness settings.
    InequalityResult at_settings;
    /// Grid maximum of |S| for this hypothesis's state.
    double s_max = 0.0;
    /// True when the reference statistics exceed everything this hypothesis
    /// can produce: |S_data| > s_max + 1e-6.
    bool falsified = false;
    std::optional<InequalityResult> sampled;
};

struct HypothesisComparison {
    /// |S| of the UnitaryOnly state at the witness settings, the stand-in
    /// for the experimental data.
    double data_s = 0.0;
    MeasurementSettings settings;
    std::vector<HypothesisRow> rows;
};

/**
 * Evaluates each hypothesis's pre-measurement state at the witness settings,
 * grid-searches its own maximum, and flags it when the UnitaryOnly statistics
 * lie outside its reach: if P implies |S| <= s_max(P) and the data show a
 * larger |S|, P is false. Sampling (shots > 0) uses stream_seed(seed, row).
 */
inline HypothesisComparison hypothesis_comparison(
    const std::function<DensityOperator(const CollapseHypothesis &)> &scenario,
    std::span<const CollapseHypothesis> hypotheses, const BlochFamily &alice, const BlochFamily &bob,
    const MeasurementSettings &settings, double grid_step, long long shots, std::uint64_t seed,
    unsigned threads = 1) {
    HypothesisComparison out{0.0, settings, {}};
    out.data_s = std::abs(chsh_value(scenario(CollapseHypothesis::unitary_only()), settings).s_value);
    for (std::size_t k = 0; k < hypotheses.size(); ++k) {
        const auto &h = hypotheses[k];
        auto rho = scenario(h);
        require_valid(rho, h.name());
        HypothesisRow row{h, chsh_value(rho, settings), 0.0, false, std::nullopt};
        row.at_settings.hypothesis = h;
        row.s_max = optimize_settings(rho, alice, bob, grid_step, threads).s_max;
        row.falsified = out.data_s > row.s_max + 1e-6;
        if (shots > 0) {
            Rng rng = make_rng(stream_seed(seed, k));
            row.sampled = sample_inequality(rho, settings, shots, rng);
            row.sampled->hypothesis = h;
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace friendsim
