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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "friendsim/runner.hpp"
#include "oracles.hpp"

namespace fs = friendsim;

namespace {

using Clock = std::chrono::steady_clock;

const double kPi = std::numbers::pi;
const double kTsirelson = 2.0 * std::numbers::sqrt2;

int failures = 0;

void report(int id, const char *name, bool ok, const std::string &detail) {
    std::printf("[%s] criterion %d: %s -- %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string fmt(const char *f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void criterion1() {
    // Warm caches once; the timed pass is the second.
    double composite = 0, reduced = 0, coh_improper = 0, coh_proper = 0, elapsed = 1e9;
    for (int pass = 0; pass < 2; ++pass) {
        const auto t0 = Clock::now();
        const auto psi = fs::pointer_basic_state();
        const auto rho = fs::DensityOperator::from_pure(psi);
        composite = fs::purity(rho);
        reduced = fs::purity(fs::improper_mixture(psi, {"S"}));
        coh_improper = fs::coherence_norm(rho);
        coh_proper = fs::coherence_norm(fs::dephase(rho, {"P"}));
        elapsed = seconds_since(t0);
    }
    const bool ok = std::abs(composite - 1.0) <= 1e-10 && std::abs(reduced - 0.5) <= 1e-10 &&
                    std::abs(coh_improper - 1.0) <= 1e-10 && coh_proper == 0.0 && elapsed < 1e-3;
    report(1, "improper-mixture signature", ok,
           fmt("purity %.12g / reduced %.12g, coherence %.12g vs %.12g", composite, reduced, coh_improper,
               coh_proper) +
               fmt(", %.3g ms", elapsed * 1e3));
}

void criterion2() {
    const double c = std::cos(kPi / 8) / std::numbers::sqrt2;
    const double s = std::sin(kPi / 8) / std::numbers::sqrt2;
    const auto src = fs::source_state();
    double src_err = std::abs(src.amplitude("hh") - s) + 0.0;
    src_err = std::max(src_err, std::abs(src.amplitude("hv") - c));
    src_err = std::max(src_err, std::abs(src.amplitude("vh") - c));
    src_err = std::max(src_err, std::abs(src.amplitude("vv") + s));

    fs::Vector expect = fs::Vector::Zero(16);
    expect(0b0110) = c;
    expect(0b1001) = c;
    expect(0b0101) = s;
    expect(0b1010) = -s;
    const auto fin = fs::proietti_final();
    const bool order_ok = fin.state.space().labels() == fs::Labels{"a", "alpha", "b", "beta"};
    const double fin_err = (fin.state.amplitudes() - expect).cwiseAbs().maxCoeff();
    const auto side = fs::friend_interaction(fs::proietti_prepared_state(), fs::Side::A);
    const double printed = side.printed.norm_squared();
    const bool ok = src_err <= 1e-12 && order_ok && fin_err <= 1e-12 && std::abs(printed - 0.25) <= 1e-12;
    report(2, "photonic state chain", ok,
           fmt("source err %.2g, final err %.2g, printed norm^2 %.12g", src_err, fin_err, printed));
}

void criterion3() {
    const auto t0 = Clock::now();
    const auto alice = fs::BlochFamily::pair("a", "alpha");
    const auto bob = fs::BlochFamily::pair("b", "beta");
    const double u = fs::optimize_settings(fs::proietti_hypothesis_state(fs::CollapseHypothesis::unitary_only()),
                                           alice, bob, kPi / 64)
                         .s_max;
    const double d = fs::optimize_settings(fs::proietti_hypothesis_state(fs::CollapseHypothesis::friend_dephasing()),
                                           alice, bob, kPi / 64)
                         .s_max;
    const double local = fs::local_deterministic_max();
    const double elapsed = seconds_since(t0);
    const bool ok = u > 2.0 && d <= 2.0 + 1e-6 && local == 2.0 && elapsed < 60.0;
    report(3, "inequality discrimination", ok,
           fmt("s_max unitary %.12g, dephasing %.12g, local %.12g, %.2f s", u, d, local, elapsed));
}

void criterion4() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
    const auto qa = fs::BlochFamily::qubit("x");
    const auto qb = fs::BlochFamily::qubit("y");
    const auto pa = fs::BlochFamily::pair("a", "alpha");
    const auto pb = fs::BlochFamily::pair("b", "beta");
    const auto two = fs::CompositeSpace::qubits({"x", "y"});
    const auto four = fs::CompositeSpace::qubits({"a", "alpha", "b", "beta"});
    double worst = 0.0;
    bool threw = false;
    for (int t = 0; t < 10000; ++t) {
        std::array<double, 8> a{};
        for (auto &v : a) {
            v = ang(rng);
        }
        try {
            if (t % 4 == 3) {
                fs::DensityOperator rho(four, oracle::random_density(16, 1 + t % 3, rng));
                worst = std::max(worst, std::abs(fs::chsh_value(rho, fs::MeasurementSettings::from_angles(pa, pb, a))
                                                     .s_value));
            } else {
                fs::DensityOperator rho(two, oracle::random_density(4, 1 + t % 2, rng));
                worst = std::max(worst, std::abs(fs::chsh_value(rho, fs::MeasurementSettings::from_angles(qa, qb, a))
                                                     .s_value));
            }
        } catch (const fs::InvariantViolation &) {
            threw = true;
        }
    }
    report(4, "Tsirelson ceiling", !threw && worst <= kTsirelson + 1e-9,
           fmt("max |S| %.12g over 10000 random cases (ceiling %.12g)", worst, kTsirelson));
}

void criterion5() {
    const int n = 100000;
    fs::Rng ru(fs::stream_seed(5, 0));
    fs::Rng rs(fs::stream_seed(5, 1));
    int got_u = 0, got_s = 0;
    for (int t = 0; t < n; ++t) {
        got_u += fs::counterexample_run(fs::CollapseHypothesis::unitary_only(), ru) ? 1 : 0;
        got_s += fs::counterexample_run(fs::CollapseHypothesis::subjective_collapse(), rs) ? 1 : 0;
    }
    const double fu = static_cast<double>(got_u) / n;
    const double fsub = static_cast<double>(got_s) / n;
    const double pu = fs::counterexample_photon_probability(fs::CollapseHypothesis::unitary_only());
    const double ps = fs::counterexample_photon_probability(fs::CollapseHypothesis::subjective_collapse());
    const bool ok = got_u == n && std::abs(fsub - 0.5) <= 0.005 && std::abs(pu - 1.0) <= 1e-12 &&
                    std::abs(ps - 0.5) <= 1e-12;
    report(5, "counterexample photon probability", ok,
           fmt("frequency %.12g vs %.12g, exact %.12g vs %.12g", fu, fsub, pu, ps));
}

void criterion6() {
    const auto rho = fs::DensityOperator::from_pure(fs::bell_singlet());
    const auto st = fs::detail::singlet_settings(fs::BlochFamily::qubit("e1"), fs::BlochFamily::qubit("e2"));
    const long long shots = 1000000;
    const int seeds = 100;
    double sum = 0.0, sigma = 0.0;
    std::array<std::array<long long, 4>, 4> pooled{};
    std::array<std::array<double, 4>, 4> born{};
    for (int k = 0; k < seeds; ++k) {
        fs::Rng rng(fs::stream_seed(6, static_cast<std::uint64_t>(k)));
        const auto r = fs::sample_inequality(rho, st, shots, rng);
        sum += r.s_value;
        sigma += *r.std_error;
        born = r.probabilities;
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                pooled[i][j] += r.counts[i][j];
            }
        }
    }
    const double mean = sum / seeds;
    sigma /= seeds;
    const bool mean_ok = std::abs(mean - kTsirelson) < 3.0 * sigma / 10.0;
    double chi2 = 0.0;
    const double total = static_cast<double>(shots) * seeds;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double e = total * born[i][j];
            chi2 += (static_cast<double>(pooled[i][j]) - e) * (static_cast<double>(pooled[i][j]) - e) / e;
        }
    }
    boost::math::chi_squared dist(12);
    const double p = boost::math::cdf(boost::math::complement(dist, chi2));
    report(6, "sampling soundness", mean_ok && p > 0.001,
           fmt("mean S %.12g (|dev| %.3g, limit %.3g), chi2 p %.4g", mean, std::abs(mean - kTsirelson),
               3.0 * sigma / 10.0, p));
}

void criterion7() {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> nf(1, 6);
    std::uniform_int_distribution<int> dim(2, 4);
    double worst = 0.0;
    std::size_t largest = 0;
    for (int t = 0; t < 500; ++t) {
        std::vector<fs::Factor> factors;
        std::vector<std::size_t> dims;
        std::size_t total = 1;
        const int n = nf(rng);
        for (int k = 0; k < n; ++k) {
            const auto d = static_cast<std::size_t>(t % 2 == 0 ? 2 : dim(rng));
            if (total * d > 64) {
                break;
            }
            total *= d;
            dims.push_back(d);
            factors.push_back({"f" + std::to_string(k), d});
        }
        largest = std::max(largest, total);
        fs::DensityOperator rho(fs::CompositeSpace(factors), oracle::random_density(total, 1 + t % 4, rng));
        std::vector<std::size_t> keep;
        fs::Labels keep_labels;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (rng() % 2 == 0) {
                keep.push_back(k);
                keep_labels.push_back(factors[k].label);
            }
        }
        if (keep.empty()) {
            const auto k = static_cast<std::size_t>(rng() % dims.size());
            keep.push_back(k);
            keep_labels.push_back(factors[k].label);
        }
        const auto lib = fs::partial_trace(rho, keep_labels);
        const auto ref = oracle::partial_trace(rho.matrix(), dims, keep);
        worst = std::max(worst, (lib.matrix() - ref).cwiseAbs().maxCoeff());
    }
    report(7, "partial-trace oracle equivalence", worst < 1e-12 && largest == 64,
           fmt("max entrywise error %.3g over 500 operators, largest dim %.0f", worst, static_cast<double>(largest)));
}

std::vector<std::string> data_rows(const fs::RunReport &r) {
    std::vector<std::string> out;
    for (const auto &row : r.rows) {
        out.push_back(fs::csv_data_row(row));
    }
    return out;
}

void criterion8() {
    bool ok = true;
    std::string detail;
    for (const char *scenario : {"proietti", "counterexample", "pointer_basic", "bell_singlet"}) {
        fs::ScenarioConfig cfg;
        cfg.scenario = scenario;
        cfg.shots = 20000;
        cfg.seed = 8;
        cfg.threads = 1;
        const auto a = data_rows(fs::run(cfg));
        const auto b = data_rows(fs::run(cfg));
        cfg.threads = 4;
        const auto c = data_rows(fs::run(cfg));
        const bool same = a == b && a == c && !a.empty();
        ok = ok && same;
        detail += std::string(detail.empty() ? "" : ", ") + scenario + (same ? " identical" : " DIFFER");
    }
    report(8, "determinism across runs and thread counts", ok, detail);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    std::printf("%d of 8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
