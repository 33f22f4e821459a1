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
 * Measurement models: unitary pointer coupling, improper mixtures from
 * partial traces, proper mixtures from dephasing, Born probabilities and
 * sampled projective collapse.
 */

#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "friendsim/hilbert.hpp"
#include "friendsim/rng.hpp"

namespace friendsim {

/**
 * Unitary copy of a system's basis into a pointer factor.
 *
 * System basis state i drives the pointer from its ready index to
 * copy_basis[i]. On the full pointer space the map is the transposition
 * (ready, copy_basis[i]), so the coupling is a permutation and hence unitary.
 */
struct PointerCoupling {
    std::string system_label;
    std::string pointer_label;
    std::vector<std::size_t> copy_basis;
    std::size_t pointer_ready_index = 0;
    /// Dimension of a freshly appended pointer factor.
    std::size_t pointer_dim = 2;

    void check(std::size_t system_dim, std::size_t pdim) const {
        if (copy_basis.size() != system_dim) {
            throw ShapeError("copy basis has " + std::to_string(copy_basis.size()) + " entries for a system of dim " +
                             std::to_string(system_dim));
        }
        if (pointer_ready_index >= pdim) {
            throw ShapeError("pointer ready index out of range");
        }
        for (std::size_t i = 0; i < copy_basis.size(); ++i) {
            if (copy_basis[i] >= pdim) {
                throw ShapeError("copy basis index out of range for pointer dim " + std::to_string(pdim));
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (copy_basis[i] == copy_basis[j]) {
                    throw ShapeError("copy map is not injective: two system states share a pointer state");
                }
            }
        }
    }
};

/**
 * Applies the pointer coupling. If the pointer label is not yet in the space,
 * a fresh pointer factor in its ready state is appended at the end.
 * Throws PointerNotReady if an existing pointer has weight outside its ready state.
 */
inline PureState couple_pointer(const PureState &psi, const PointerCoupling &c) {
    PureState in = psi;
    if (!in.space().contains(c.pointer_label)) {
        Vector ready = Vector::Zero(static_cast<Eigen::Index>(c.pointer_dim));
        if (c.pointer_ready_index >= c.pointer_dim) {
            throw ShapeError("pointer ready index out of range");
        }
        ready(static_cast<Eigen::Index>(c.pointer_ready_index)) = 1.0;
        in = tensor(in, PureState(CompositeSpace({{c.pointer_label, c.pointer_dim}}), ready));
    }
    const auto &space = in.space();
    const auto sys = space.position(c.system_label);
    const auto ptr = space.position(c.pointer_label);
    if (sys == ptr) {
        throw ShapeError("system and pointer must be different factors");
    }
    const auto pdim = space.factors()[ptr].dim;
    c.check(space.factors()[sys].dim, pdim);

    const Vector &a = in.amplitudes();
    for (std::size_t i = 0; i < space.total_dim(); ++i) {
        if (space.digit(i, ptr) != c.pointer_ready_index && std::abs(a(static_cast<Eigen::Index>(i))) > kValidityTol) {
            throw PointerNotReady("pointer '" + c.pointer_label + "' has weight outside its ready state");
        }
    }

    Vector out = Vector::Zero(a.size());
    const auto pstride = space.stride(ptr);
    for (std::size_t i = 0; i < space.total_dim(); ++i) {
        const auto s = space.digit(i, sys);
        const auto p = space.digit(i, ptr);
        const auto target = c.copy_basis[s];
        std::size_t q = p;
        if (p == c.pointer_ready_index) {
            q = target;
        } else if (p == target) {
            q = c.pointer_ready_index;
        }
        const auto j = i - p * pstride + q * pstride;
        out(static_cast<Eigen::Index>(j)) = a(static_cast<Eigen::Index>(i));
    }
    if (in.unnormalized_flag()) {
        return PureState::unnormalized(space, std::move(out));
    }
    return PureState(space, std::move(out));
}

/// Reduced state of an entangled pure state: partial trace of |psi><psi|.
inline DensityOperator improper_mixture(const PureState &psi, std::span<const std::string> keep) {
    if (psi.unnormalized_flag()) {
        throw InvariantViolation("improper_mixture needs a normalized state");
    }
    return partial_trace(DensityOperator::from_pure(psi), keep);
}

inline DensityOperator improper_mixture(const PureState &psi, std::initializer_list<std::string> keep) {
    return improper_mixture(psi, std::span<const std::string>(keep.begin(), keep.size()));
}

/**
 * Removes every coherence between product-basis states that differ on the
 * targeted factors: the proper mixture describing a definite but unknown
 * outcome on those factors. Trace and diagonal are untouched.
 */
inline DensityOperator dephase(const DensityOperator &rho, std::span<const std::string> on) {
    auto split = detail::split_indices(rho.space(), on);
    Matrix m = rho.matrix();
    const auto d = rho.space().total_dim();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (split.inner[i] != split.inner[j]) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
            }
        }
    }
    return DensityOperator(rho.space(), std::move(m));
}

inline DensityOperator dephase(const DensityOperator &rho, std::initializer_list<std::string> on) {
    return dephase(rho, std::span<const std::string>(on.begin(), on.size()));
}

namespace detail {

inline std::vector<double> clean_probabilities(std::vector<double> p, std::string_view what) {
    double sum = 0.0;
    for (auto &x : p) {
        if (x < 0.0) {
            if (x < -kValidityTol) {
                throw InvariantViolation(std::string(what) + ": negative probability " + std::to_string(x));
            }
            x = 0.0;
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > kValidityTol) {
        throw InvariantViolation(std::string(what) + ": probabilities sum to " + std::to_string(sum));
    }
    return p;
}

}  // namespace detail

/// Outcome distribution of a measurement in the computational product basis
/// of `labels` (joint index in the order listed).
inline std::vector<double> born_probabilities(const DensityOperator &rho, std::span<const std::string> labels) {
    auto split = detail::split_indices(rho.space(), labels);
    std::vector<double> p(split.inner_dim, 0.0);
    for (std::size_t i = 0; i < rho.space().total_dim(); ++i) {
        p[split.inner[i]] += rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    }
    return detail::clean_probabilities(std::move(p), "born_probabilities");
}

/// Outcome distribution of a projective measurement {P_k} acting on `labels`.
/// The projectors must resolve the identity on those factors.
inline std::vector<double> born_probabilities(const DensityOperator &rho, std::span<const Matrix> projectors,
                                              std::span<const std::string> labels) {
    std::vector<double> p;
    p.reserve(projectors.size());
    for (const auto &proj : projectors) {
        p.push_back(expectation_of(rho, proj, labels).real());
    }
    return detail::clean_probabilities(std::move(p), "born_probabilities");
}

/// {P(+1), P(-1)} for a dichotomic observable.
inline std::vector<double> born_probabilities(const DensityOperator &rho, const DichotomicObservable &obs) {
    const std::vector<Matrix> projs{obs.projector(+1), obs.projector(-1)};
    auto on = obs.space().labels();
    return born_probabilities(rho, projs, on);
}

inline std::vector<double> born_probabilities(const PureState &psi, std::span<const std::string> labels) {
    return born_probabilities(DensityOperator::from_pure(psi), labels);
}

inline std::vector<double> born_probabilities(const PureState &psi, std::span<const Matrix> projectors,
                                              std::span<const std::string> labels) {
    return born_probabilities(DensityOperator::from_pure(psi), projectors, labels);
}

struct CollapseOutcome {
    std::size_t outcome = 0;
    double probability = 0.0;
    PureState state;
};

/// Projectors onto the computational basis states of the listed factors.
inline std::vector<Matrix> computational_projectors(const CompositeSpace &space, std::span<const std::string> labels) {
    const auto n = static_cast<Eigen::Index>(space.select(labels).total_dim());
    std::vector<Matrix> out;
    for (Eigen::Index k = 0; k < n; ++k) {
        Matrix p = Matrix::Zero(n, n);
        p(k, k) = 1.0;
        out.push_back(std::move(p));
    }
    return out;
}

/**
 * Samples an outcome of the projective measurement {P_k} on `labels` by the
 * Born rule and returns the renormalized post-measurement state.
 */
inline CollapseOutcome projective_collapse(const PureState &psi, std::span<const Matrix> projectors,
                                           std::span<const std::string> labels, Rng &rng) {
    auto probs = born_probabilities(psi, projectors, labels);
    const auto k = sample_index(probs, rng);
    auto projected = apply_local(projectors[k], psi, labels);
    return CollapseOutcome{k, probs[k], projected.normalized()};
}

/// Projective collapse in the computational basis of `labels`.
inline CollapseOutcome projective_collapse(const PureState &psi, std::span<const std::string> labels, Rng &rng) {
    auto projs = computational_projectors(psi.space(), labels);
    return projective_collapse(psi, projs, labels, rng);
}

/// What, if anything, happens to the friend's factors when it "measures".
struct CollapseHypothesis {
    enum class Kind { UnitaryOnly, FriendProjective, FriendDephasing, SubjectiveCollapse, StochasticCollapse };

    Kind kind = Kind::UnitaryOnly;
    /// Collapse probability; meaningful for StochasticCollapse only.
    double p = 0.0;

    static CollapseHypothesis unitary_only() { return {Kind::UnitaryOnly, 0.0}; }
    static CollapseHypothesis friend_projective() { return {Kind::FriendProjective, 1.0}; }
    static CollapseHypothesis friend_dephasing() { return {Kind::FriendDephasing, 1.0}; }
    static CollapseHypothesis subjective_collapse() { return {Kind::SubjectiveCollapse, 1.0}; }
    static CollapseHypothesis stochastic(double p) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("collapse probability must lie in [0, 1]");
        }
        return {Kind::StochasticCollapse, p};
    }

    /// Probability that a definite outcome is realized at the friend.
    double collapse_probability() const {
        switch (kind) {
        case Kind::UnitaryOnly:
            return 0.0;
        case Kind::StochasticCollapse:
            return p;
        default:
            return 1.0;
        }
    }

    std::string name() const {
        switch (kind) {
        case Kind::UnitaryOnly:
            return "UnitaryOnly";
        case Kind::FriendProjective:
            return "FriendProjective";
        case Kind::FriendDephasing:
            return "FriendDephasing";
        case Kind::SubjectiveCollapse:
            return "SubjectiveCollapse";
        case Kind::StochasticCollapse: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "StochasticCollapse(%.12g)", p);
            return buf;
        }
        }
        return "?";
    }

    /// Inverse of name(); throws std::invalid_argument on anything else.
    static CollapseHypothesis parse(std::string_view text) {
        if (text == "UnitaryOnly") {
            return unitary_only();
        }
        if (text == "FriendProjective") {
            return friend_projective();
        }
        if (text == "FriendDephasing") {
            return friend_dephasing();
        }
        if (text == "SubjectiveCollapse") {
            return subjective_collapse();
        }
        constexpr std::string_view prefix = "StochasticCollapse(";
        if (text.starts_with(prefix) && text.ends_with(")")) {
            std::string inner(text.substr(prefix.size(), text.size() - prefix.size() - 1));
            std::size_t used = 0;
            double p = 0.0;
            try {
                p = std::stod(inner, &used);
            } catch (const std::exception &) {
                used = 0;
            }
            if (used == 0 || used != inner.size()) {
                throw std::invalid_argument("bad collapse probability in '" + std::string(text) + "'");
            }
            return stochastic(p);
        }
        throw std::invalid_argument("unknown hypothesis '" + std::string(text) + "'");
    }

    friend bool operator==(const CollapseHypothesis &, const CollapseHypothesis &) = default;
};

/**
 * Exact (ensemble) state after the friend's interaction under a hypothesis:
 * unchanged under UnitaryOnly, dephased on the friend factors when an outcome
 * is realized, and the p-weighted blend of the two for StochasticCollapse.
 */
inline DensityOperator ensemble_state(const PureState &psi, std::span<const std::string> friend_labels,
                                      const CollapseHypothesis &h) {
    auto rho = DensityOperator::from_pure(psi);
    const double p = h.collapse_probability();
    if (p == 0.0) {
        return rho;
    }
    auto collapsed = dephase(rho, friend_labels);
    if (p == 1.0) {
        return collapsed;
    }
    return DensityOperator(rho.space(), (1.0 - p) * rho.matrix() + p * collapsed.matrix());
}

/// One sampled realization of the same process: with the hypothesis's
/// collapse probability the friend factors are projectively collapsed.
inline PureState realize(const PureState &psi, std::span<const std::string> friend_labels,
                         const CollapseHypothesis &h, Rng &rng) {
    const double p = h.collapse_probability();
    if (p == 0.0) {
        return psi;
    }
    if (p < 1.0 && !(uniform01(rng) < p)) {
        return psi;
    }
    return projective_collapse(psi, friend_labels, rng).state;
}

}  // namespace friendsim
