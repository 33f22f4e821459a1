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

#include <gtest/gtest.h>

#include "friendsim/inequality.hpp"
#include "friendsim/scenarios.hpp"
#include "oracles.hpp"

namespace fs = friendsim;

namespace {

const double kR = 1.0 / std::numbers::sqrt2;
const double kC = std::cos(std::numbers::pi / 8);
const double kS = std::sin(std::numbers::pi / 8);

double max_abs(const fs::Matrix &m) { return m.cwiseAbs().maxCoeff(); }

/// Source amplitude for photon polarizations (a, b), 0 = h.
double source_amp(int a, int b) {
    if (a != b) {
        return kR * kC;
    }
    return a == 0 ? kR * kS : -kR * kS;
}

/// Friend-pair amplitude for (herald, friend).
double pair_amp(int herald, int friend_photon) {
    if (herald == friend_photon) {
        return 0.0;
    }
    return herald == 0 ? kR : -kR;
}

/// Expected four-photon state on (a, alpha, b, beta) after both interactions.
fs::Vector final_expected() {
    fs::Vector v = fs::Vector::Zero(16);
    v(0b0110) = kR * kC;  // h v v h
    v(0b1001) = kR * kC;  // v h h v
    v(0b0101) = kR * kS;  // h v h v
    v(0b1010) = -kR * kS; // v h v h
    return v;
}

}  // namespace

TEST(SourceState, Amplitudes) {
    auto s = fs::source_state();
    EXPECT_NEAR(s.amplitude("hv").real(), 0.6532814824381883, 1e-12);
    EXPECT_NEAR(s.amplitude("vh").real(), 0.6532814824381883, 1e-12);
    EXPECT_NEAR(s.amplitude("hh").real(), 0.2705980500730985, 1e-12);
    EXPECT_NEAR(s.amplitude("vv").real(), -0.2705980500730985, 1e-12);
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-15);
}

TEST(SourceState, ReducedStatesMaximallyMixed) {
    auto rho = fs::DensityOperator::from_pure(fs::source_state());
    fs::Matrix m(2, 2);
    m << source_amp(0, 0), source_amp(0, 1), source_amp(1, 0), source_amp(1, 1);
    EXPECT_LT(max_abs(m * m.adjoint() - fs::Matrix::Identity(2, 2) * 0.5), 1e-12);
    EXPECT_LT(max_abs(fs::partial_trace(rho, {"a"}).matrix() - fs::Matrix::Identity(2, 2) * 0.5), 1e-12);
    EXPECT_LT(max_abs(fs::partial_trace(rho, {"b"}).matrix() - fs::Matrix::Identity(2, 2) * 0.5), 1e-12);
}

TEST(FriendPair, Amplitudes) {
    auto p = fs::friend_pair_state(fs::Side::A);
    EXPECT_EQ(p.space().labels(), (fs::Labels{"alpha'", "alpha"}));
    EXPECT_NEAR(p.amplitude("hv").real(), kR, 1e-12);
    EXPECT_NEAR(std::abs(p.amplitude("hh")), 0.0, 1e-15);
    auto red = fs::partial_trace(fs::DensityOperator::from_pure(p), {"alpha"});
    EXPECT_LT(max_abs(red.matrix() - fs::Matrix::Identity(2, 2) * 0.5), 1e-12);
    EXPECT_EQ(fs::friend_pair_state(fs::Side::B).space().labels(), (fs::Labels{"beta'", "beta"}));
}

TEST(Prepared, EqualsSourceTimesTwoPairs) {
    auto st = fs::proietti_prepared();
    EXPECT_EQ(st.stage, fs::Stage::Prepared);
    EXPECT_EQ(st.state.space().labels(), (fs::Labels{"a", "alpha'", "alpha", "b", "beta'", "beta"}));
    const std::vector<std::size_t> dims(6, 2);
    for (std::size_t i = 0; i < 64; ++i) {
        auto d = oracle::digits(i, dims);
        const double expect = source_amp(static_cast<int>(d[0]), static_cast<int>(d[3])) *
                              pair_amp(static_cast<int>(d[1]), static_cast<int>(d[2])) *
                              pair_amp(static_cast<int>(d[4]), static_cast<int>(d[5]));
        EXPECT_NEAR(std::abs(st.state.amplitudes()(static_cast<Eigen::Index>(i)) - expect), 0.0, 1e-12);
    }
}

TEST(FriendInteraction, OneSideGivesHeraldedCopy) {
    auto joint = fs::tensor(fs::source_state(), fs::friend_pair_state(fs::Side::A));
    auto st = fs::friend_interaction(joint, fs::Side::A);
    EXPECT_EQ(st.stage, fs::Stage::Final);
    EXPECT_NEAR(st.herald_probability, 0.25, 1e-12);
    EXPECT_NEAR(st.printed.norm_squared(), 0.25, 1e-12);
    const fs::Labels order{"a", "alpha", "b"};
    auto s = fs::reorder(st.state, order);
    EXPECT_NEAR(s.amplitude("hvv").real(), kR * kC, 1e-12);
    EXPECT_NEAR(s.amplitude("vhh").real(), kR * kC, 1e-12);
    EXPECT_NEAR(s.amplitude("hvh").real(), kR * kS, 1e-12);
    EXPECT_NEAR(s.amplitude("vhv").real(), -kR * kS, 1e-12);
    auto raw = fs::reorder(st.printed, order);
    EXPECT_NEAR(raw.amplitude("hvv").real(), kC / (2 * std::numbers::sqrt2), 1e-12);
}

TEST(FriendInteraction, SingleIncomingPhoton) {
    auto joint =
        fs::tensor(fs::PureState::basis(fs::CompositeSpace::qubits({"a"}), "h"), fs::friend_pair_state(fs::Side::A));
    auto st = fs::friend_interaction(joint, fs::Side::A);
    EXPECT_EQ(st.state.space().labels(), (fs::Labels{"a", "alpha"}));
    EXPECT_NEAR(st.state.amplitude("hv").real(), 1.0, 1e-12);
    EXPECT_NEAR(st.printed.amplitude("hv").real(), 0.5, 1e-12);

    auto vin =
        fs::tensor(fs::PureState::basis(fs::CompositeSpace::qubits({"a"}), "v"), fs::friend_pair_state(fs::Side::A));
    auto vs = fs::friend_interaction(vin, fs::Side::A);
    EXPECT_NEAR(vs.printed.amplitude("vh").real(), 0.5, 1e-12);
}

TEST(FriendInteraction, BothSidesReachFinalState) {
    auto st = fs::proietti_final();
    EXPECT_EQ(st.stage, fs::Stage::Final);
    EXPECT_EQ(st.state.space().labels(), fs::proietti_final_order());
    EXPECT_LT((st.state.amplitudes() - final_expected()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(st.herald_probability, 1.0 / 16, 1e-12);
    EXPECT_NEAR(st.last_herald_probability, 0.25, 1e-12);
    EXPECT_NEAR(st.printed.norm_squared(), 1.0 / 16, 1e-12);
}

TEST(FriendInteraction, StagesInOrder) {
    auto one = fs::friend_interaction(fs::proietti_prepared(), fs::Side::A);
    EXPECT_EQ(one.stage, fs::Stage::FriendsInteracted);
    EXPECT_NEAR(one.state.norm_squared(), 1.0, 1e-12);
    EXPECT_GT(one.herald_probability, 0.0);
    EXPECT_LE(one.herald_probability, 1.0);
}

TEST(FriendInteraction, EntanglementSurvives) {
    auto joint = fs::tensor(fs::source_state(), fs::friend_pair_state(fs::Side::A));
    auto after = fs::DensityOperator::from_pure(fs::friend_interaction(joint, fs::Side::A).state);
    for (const auto &l : after.space().labels()) {
        auto red = fs::partial_trace(after, {l});
        const auto pos = after.space().position(l);
        auto ref = oracle::partial_trace(after.matrix(), {2, 2, 2}, {pos});
        EXPECT_LT(max_abs(red.matrix() - ref), 1e-12);
        EXPECT_LT(fs::purity(red), 1.0 - 1e-6) << l;
    }
}

TEST(FriendInteraction, FinalCompositePureFactorsMixed) {
    auto rho = fs::DensityOperator::from_pure(fs::proietti_final().state);
    EXPECT_NEAR(fs::purity(rho), 1.0, 1e-12);
    for (const auto &l : rho.space().labels()) {
        EXPECT_LT(fs::purity(fs::partial_trace(rho, {l})), 1.0 - 1e-6) << l;
    }
}

TEST(FriendInteraction, CorrelatorsMatchDirectState) {
    auto via = fs::DensityOperator::from_pure(fs::proietti_final().state);
    auto direct = fs::DensityOperator(fs::CompositeSpace::qubits({"a", "alpha", "b", "beta"}),
                                      final_expected() * final_expected().adjoint());
    auto alice = fs::BlochFamily::pair("a", "alpha");
    auto bob = fs::BlochFamily::pair("b", "beta");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> th(0.0, std::numbers::pi), ph(0.0, 2 * std::numbers::pi);
    for (int t = 0; t < 20; ++t) {
        auto a = alice.observable(th(rng), ph(rng));
        auto b = bob.observable(th(rng), ph(rng));
        EXPECT_NEAR(fs::correlator(via, a, b), fs::correlator(direct, a, b), 1e-12);
    }
}

TEST(FriendInteraction, ImpossibleHerald) {
    auto joint = fs::PureState::basis(fs::CompositeSpace::qubits({"a", "alpha'", "alpha"}), "hvh");
    EXPECT_THROW(fs::friend_interaction(joint, fs::Side::A), fs::HeraldImpossible);
}

TEST(ClaimedBranchCollapse, SingleRunIsProduct) {
    fs::Rng rng(10);
    auto joint = fs::tensor(fs::source_state(), fs::friend_pair_state(fs::Side::A));
    auto st = fs::claimed_branch_collapse(joint, fs::Side::A, rng);
    EXPECT_EQ(st.stage, fs::Stage::Collapsed);
    auto rho = fs::DensityOperator::from_pure(st.state);
    EXPECT_NEAR(fs::purity(fs::partial_trace(rho, {"a", "alpha"})), 1.0, 1e-12);
}

TEST(ClaimedBranchCollapse, EnsembleEqualsDephasing) {
    auto joint = fs::tensor(fs::source_state(), fs::friend_pair_state(fs::Side::A));
    auto unitary = fs::DensityOperator::from_pure(fs::friend_interaction(joint, fs::Side::A).state);
    auto dephased = fs::dephase(unitary, {"a", "alpha"});
    fs::Rng rng(2718);
    const int n = 100000;
    fs::Matrix acc = fs::Matrix::Zero(8, 8);
    for (int t = 0; t < n; ++t) {
        auto s = fs::claimed_branch_collapse(joint, fs::Side::A, rng).state;
        ASSERT_EQ(s.space(), unitary.space());
        acc += s.amplitudes() * s.amplitudes().adjoint();
    }
    acc /= n;
    fs::DensityOperator ensemble(unitary.space(), acc);
    EXPECT_LT(max_abs(acc - dephased.matrix()), 0.01);
    EXPECT_LT(fs::coherence_norm(ensemble, {"a", "alpha"}), 1e-2);
    EXPECT_GT(fs::coherence_norm(unitary, {"a", "alpha"}), 0.5);
}

TEST(Counterexample, UnitaryAlwaysReceives) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        fs::Rng rng(seed);
        EXPECT_TRUE(fs::counterexample_run(fs::CollapseHypothesis::unitary_only(), rng));
    }
}

TEST(Counterexample, SubjectiveCollapseHalves) {
    fs::Rng rng(42);
    const int n = 100000;
    int got = 0;
    for (int t = 0; t < n; ++t) {
        got += fs::counterexample_run(fs::CollapseHypothesis::subjective_collapse(), rng) ? 1 : 0;
    }
    EXPECT_NEAR(static_cast<double>(got) / n, 0.5, 0.005);
}

TEST(Counterexample, ExactProbabilities) {
    EXPECT_NEAR(fs::counterexample_photon_probability(fs::CollapseHypothesis::unitary_only()), 1.0, 1e-12);
    EXPECT_NEAR(fs::counterexample_photon_probability(fs::CollapseHypothesis::subjective_collapse()), 0.5, 1e-12);
    const fs::SpinAmplitudes up{1.0, 0.0};
    EXPECT_NEAR(fs::counterexample_photon_probability(fs::CollapseHypothesis::unitary_only(), up), 0.5, 1e-12);
    auto phi = fs::phi_plus("A", "B");
    auto uu = fs::PureState::basis(fs::CompositeSpace::qubits({"A", "B"}), "uu");
    EXPECT_NEAR(std::norm(phi.inner(uu)), 0.5, 1e-15);
}

TEST(Counterexample, PreparedState) {
    auto s = fs::counterexample_state();
    EXPECT_EQ(s.space().labels(), (fs::Labels{"A", "B", "C"}));
    EXPECT_NEAR(s.amplitude("000").real(), kR, 1e-15);
    EXPECT_NEAR(s.amplitude("110").real(), kR, 1e-15);
}

TEST(Counterexample, UnequalAmplitudes) {
    const fs::SpinAmplitudes amps{0.6, 0.8};
    EXPECT_NEAR(fs::counterexample_photon_probability(fs::CollapseHypothesis::unitary_only(), amps),
                (0.6 + 0.8) * (0.6 + 0.8) / 2, 1e-12);
    EXPECT_NEAR(fs::counterexample_photon_probability(fs::CollapseHypothesis::subjective_collapse(), amps), 0.5,
                1e-12);
}

TEST(BellSinglet, NoEncodedOutcome) {
    auto rho = fs::DensityOperator::from_pure(fs::bell_singlet());
    EXPECT_NEAR(fs::purity(rho), 1.0, 1e-12);
    for (const auto &l : {"e1", "e2"}) {
        auto red = fs::partial_trace(rho, {l});
        EXPECT_NEAR(fs::purity(red), 0.5, 1e-12);
        EXPECT_NEAR(fs::coherence_norm(red), 0.0, 1e-15);
    }
    EXPECT_NEAR(fs::correlator(rho, fs::pauli('z', "e1"), fs::pauli('z', "e2")), -1.0, 1e-12);
}
