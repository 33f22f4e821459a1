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
 * Named states and protocols.
 *
 * Photonic friend scenario: a source pair (a, b) is distributed to Alice and
 * Bob; on each side an auxiliary singlet (alpha', alpha) / (beta', beta) is
 * produced, the friend photon alpha is correlated with a, and detection of
 * the herald alpha' post-selects the correlated branch. Factor order is
 * (a, alpha', alpha, b, beta', beta) before heralding and (a, alpha, b, beta)
 * after both sides.
 *
 * Communicating-friend counterexample: spin A, friend memory B and friend
 * communication mode C, in that order.
 */

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "friendsim/hilbert.hpp"
#include "friendsim/measurement.hpp"
#include "friendsim/rng.hpp"

namespace friendsim {

namespace labels {
inline const std::string a = "a";
inline const std::string alpha_herald = "alpha'";
inline const std::string alpha = "alpha";
inline const std::string b = "b";
inline const std::string beta_herald = "beta'";
inline const std::string beta = "beta";

inline const std::string spin = "A";
inline const std::string memory = "B";
inline const std::string comm = "C";

inline const std::string electron1 = "e1";
inline const std::string electron2 = "e2";

inline const std::string system = "S";
inline const std::string pointer = "P";
}  // namespace labels

enum class Side { A, B };

struct SideLabels {
    std::string incoming;
    std::string herald;
    std::string friend_photon;
};

inline SideLabels side_labels(Side side) {
    if (side == Side::A) {
        return {labels::a, labels::alpha_herald, labels::alpha};
    }
    return {labels::b, labels::beta_herald, labels::beta};
}

inline Labels proietti_prepared_order() {
    return {labels::a, labels::alpha_herald, labels::alpha, labels::b, labels::beta_herald, labels::beta};
}

inline Labels proietti_final_order() { return {labels::a, labels::alpha, labels::b, labels::beta}; }

/// (1/sqrt2)[cos(pi/8)(|hv> + |vh>) + sin(pi/8)(|hh> - |vv>)] on (a, b).
inline PureState source_state() {
    const double c = std::cos(std::numbers::pi / 8) / std::numbers::sqrt2;
    const double s = std::sin(std::numbers::pi / 8) / std::numbers::sqrt2;
    Vector amps(4);
    amps << s, c, c, -s;  // hh, hv, vh, vv
    return PureState(CompositeSpace::qubits({labels::a, labels::b}), amps);
}

/// (1/sqrt2)[|h>_herald |v>_friend - |v>_herald |h>_friend].
inline PureState friend_pair_state(Side side) {
    auto l = side_labels(side);
    Vector amps(4);
    amps << 0.0, 1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2, 0.0;
    return PureState(CompositeSpace::qubits({l.herald, l.friend_photon}), amps);
}

/// Source pair and both friend singlets in the order (a, alpha', alpha, b, beta', beta).
inline PureState proietti_prepared_state() {
    auto joint = tensor({source_state(), friend_pair_state(Side::A), friend_pair_state(Side::B)});
    auto order = proietti_prepared_order();
    return reorder(joint, order);
}

enum class Stage { Prepared, FriendsInteracted, Collapsed, Final };

struct ScenarioState {
    Stage stage = Stage::Prepared;
    /// Set for Stage::Collapsed.
    std::optional<CollapseHypothesis> hypothesis;
    /// Normalized state.
    PureState state;
    /// Raw post-selected branch before renormalization (squared norm is the
    /// cumulative herald probability).
    PureState printed;
    /// Probability that every heralding so far succeeded, given the input.
    double herald_probability = 1.0;
    /// Success probability of the most recent heralding step alone.
    double last_herald_probability = 1.0;

    std::string stage_name() const {
        switch (stage) {
        case Stage::Prepared:
            return "Prepared";
        case Stage::FriendsInteracted:
            return "FriendsInteracted";
        case Stage::Collapsed:
            return "Collapsed(" + (hypothesis ? hypothesis->name() : std::string("?")) + ")";
        case Stage::Final:
            return "Final";
        }
        return "?";
    }
};

inline ScenarioState proietti_prepared() {
    auto psi = proietti_prepared_state();
    return ScenarioState{Stage::Prepared, std::nullopt, psi, psi, 1.0, 1.0};
}

/// Amplitude <d|s> of the herald detection state d = (|h> - |v>)/sqrt2.
inline double herald_detection_amplitude(std::size_t s) {
    return (s == 0 ? 1.0 : -1.0) / std::numbers::sqrt2;
}

/**
 * Heralded copy map for one side, without renormalization.
 *
 * The incoming photon and the herald pass a polarization parity filter (only
 * equal polarizations survive) and the herald is then detected in the
 * anti-diagonal state. On the surviving branch the friend photon, which was
 * anti-correlated with the herald, ends up anti-correlated with the incoming
 * photon: h -> (h, v_friend) and v -> (v, h_friend), each with amplitude 1/2
 * on a singlet input. The herald factor is removed from the result.
 */
inline PureState heralded_copy(const PureState &joint, Side side) {
    auto l = side_labels(side);
    const auto &in = joint.space();
    const auto inc = in.position(l.incoming);
    const auto her = in.position(l.herald);
    (void)in.position(l.friend_photon);
    if (in.factors()[inc].dim != 2 || in.factors()[her].dim != 2) {
        throw ShapeError("heralded copy expects two-level photons");
    }
    const Labels drop{l.herald};
    auto out_space = in.without(drop);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(out_space.total_dim()));
    std::vector<std::size_t> full(in.num_factors());
    for (std::size_t j = 0; j < out_space.total_dim(); ++j) {
        auto od = out_space.digits(j);
        for (std::size_t k = 0, o = 0; k < in.num_factors(); ++k) {
            if (k != her) {
                full[k] = od[o++];
            }
        }
        const auto s = full[inc];
        full[her] = s;
        out(static_cast<Eigen::Index>(j)) =
            herald_detection_amplitude(s) * joint.amplitude(in.index(full));
    }
    return PureState::unnormalized(std::move(out_space), std::move(out));
}

/**
 * Friend interaction on one side followed by heralding. Works on any joint
 * state holding that side's incoming, herald and friend photons. Throws
 * HeraldImpossible when the heralded branch has probability <= 1e-12.
 */
inline ScenarioState friend_interaction(const ScenarioState &prev, Side side) {
    auto raw = heralded_copy(prev.printed, side);
    const double step = raw.norm_squared() / prev.printed.norm_squared();
    if (!(step > 1e-12)) {
        throw HeraldImpossible("heralding on side " + std::string(side == Side::A ? "A" : "B") +
                               " has zero success probability");
    }
    ScenarioState next;
    next.state = raw.normalized();
    next.printed = raw;
    next.herald_probability = prev.herald_probability * step;
    next.last_herald_probability = step;
    const bool done = !next.state.space().contains(labels::alpha_herald) &&
                      !next.state.space().contains(labels::beta_herald);
    next.stage = done ? Stage::Final : Stage::FriendsInteracted;
    next.hypothesis = prev.hypothesis;
    if (prev.stage == Stage::Collapsed) {
        next.stage = Stage::Collapsed;
    }
    return next;
}

inline ScenarioState friend_interaction(const PureState &joint, Side side) {
    if (joint.unnormalized_flag()) {
        throw InvariantViolation("friend_interaction needs a normalized joint state");
    }
    return friend_interaction(ScenarioState{Stage::Prepared, std::nullopt, joint, joint, 1.0, 1.0}, side);
}

/// Both friend interactions on the prepared six-photon state.
inline ScenarioState proietti_final() {
    return friend_interaction(friend_interaction(proietti_prepared(), Side::A), Side::B);
}

/**
 * The "definite outcome at the friend" reading: the incoming photon is
 * sampled into h or v by the Born rule before the friend copies it, so the
 * (incoming, friend) pair leaves as a product with the rest. Averaged over
 * runs this equals dephasing the friend factor of friend_interaction().
 */
inline ScenarioState claimed_branch_collapse(const PureState &joint, Side side, Rng &rng) {
    auto l = side_labels(side);
    const Labels on{l.incoming};
    auto collapsed = projective_collapse(joint, on, rng);
    auto out = friend_interaction(collapsed.state, side);
    out.stage = Stage::Collapsed;
    out.hypothesis = CollapseHypothesis::subjective_collapse();
    return out;
}

/// Friend-level state of the final photonic scenario under a hypothesis; the
/// friends are alpha and beta.
inline DensityOperator proietti_hypothesis_state(const CollapseHypothesis &h) {
    const Labels friends{labels::alpha, labels::beta};
    return ensemble_state(proietti_final().state, friends, h);
}

// ---------------------------------------------------------------------------
// Communicating-friend counterexample

struct SpinAmplitudes {
    cplx up = 1.0 / std::numbers::sqrt2;
    cplx down = 1.0 / std::numbers::sqrt2;
};

/// |Phi+> = (|uu> + |dd>)/sqrt2 on two named spins.
inline PureState phi_plus(const std::string &first, const std::string &second) {
    Vector amps(4);
    amps << 1.0 / std::numbers::sqrt2, 0.0, 0.0, 1.0 / std::numbers::sqrt2;
    return PureState(CompositeSpace::qubits({first, second}), amps);
}

/// {P_Phi+, I - P_Phi+} on (A, B). Outcome 0 triggers the photon to the friend.
inline std::vector<Matrix> bell_measurement_projectors() {
    const auto phi = phi_plus(labels::spin, labels::memory);
    Matrix p = phi.amplitudes() * phi.amplitudes().adjoint();
    return {p, Matrix::Identity(4, 4) - p};
}

/**
 * Spin A prepared in up|u> + down|d>, copied unitarily into the friend's
 * memory B, with the communication mode C still in |0>. For equal amplitudes
 * this is |Phi+>_AB |0>_C.
 */
inline PureState counterexample_state(const SpinAmplitudes &amps = {}) {
    Vector a(2);
    a << amps.up, amps.down;
    PureState spin(CompositeSpace::qubits({labels::spin}), a);
    PointerCoupling copy{labels::spin, labels::memory, {0, 1}, 0, 2};
    auto coupled = couple_pointer(spin, copy);
    return tensor(coupled, PureState::basis(CompositeSpace::qubits({labels::comm}), "0"));
}

/// Exact probability that the friend receives the photon.
inline double counterexample_photon_probability(const CollapseHypothesis &h, const SpinAmplitudes &amps = {}) {
    const Labels friend_view{labels::spin};
    const Labels measured{labels::spin, labels::memory};
    auto rho = ensemble_state(counterexample_state(amps), friend_view, h);
    auto projs = bell_measurement_projectors();
    return born_probabilities(rho, projs, measured)[0];
}

/// One run of the protocol; true when the friend receives the photon.
inline bool counterexample_run(const CollapseHypothesis &h, Rng &rng, const SpinAmplitudes &amps = {}) {
    const Labels friend_view{labels::spin};
    const Labels measured{labels::spin, labels::memory};
    auto psi = realize(counterexample_state(amps), friend_view, h, rng);
    auto projs = bell_measurement_projectors();
    return projective_collapse(psi, projs, measured, rng).outcome == 0;
}

// ---------------------------------------------------------------------------

/// (1/sqrt2)[|ud> - |du>] on (e1, e2).
inline PureState bell_singlet() {
    Vector amps(4);
    amps << 0.0, 1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2, 0.0;
    return PureState(CompositeSpace::qubits({labels::electron1, labels::electron2}), amps);
}

/// c1|a1> + c2|a2> on S coupled to a fresh pointer P: c1|a1,phi1> + c2|a2,phi2>.
inline PureState pointer_basic_state(cplx c1 = 1.0 / std::numbers::sqrt2, cplx c2 = 1.0 / std::numbers::sqrt2) {
    Vector a(2);
    a << c1, c2;
    PureState sys(CompositeSpace::qubits({labels::system}), a);
    return couple_pointer(sys, PointerCoupling{labels::system, labels::pointer, {0, 1}, 0, 2});
}

}  // namespace friendsim
