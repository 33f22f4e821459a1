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

/**
 * Batch runner: scenario configuration (YAML file plus overrides), execution
 * of the named scenario under each hypothesis, and CSV/JSON report emission.
 *
 * Every report row has the columns
 *   scenario, hypothesis, quantity, exact_value, estimate, std_error, shots, seed
 * with numbers printed to 12 significant digits and empty cells (null in
 * JSON) where a value does not apply.
 */

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "friendsim/errors.hpp"
#include "friendsim/hilbert.hpp"
#include "friendsim/inequality.hpp"
#include "friendsim/measurement.hpp"
#include "friendsim/rng.hpp"
#include "friendsim/scenarios.hpp"

#ifndef FRIENDSIM_VERSION
#define FRIENDSIM_VERSION "0.1.0"
#endif

namespace friendsim {

inline constexpr const char *kVersion = FRIENDSIM_VERSION;
inline constexpr const char *kOutputDirEnv = "FRIENDSIM_OUTPUT_DIR";

/// Invalid configuration; the message carries "source:line: " when known.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// The report could not be written.
class OutputError : public Error {
  public:
    using Error::Error;
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitInvariant = 3, kExitOutput = 4 };

inline const std::vector<std::string> &known_scenarios() {
    static const std::vector<std::string> names{"proietti", "counterexample", "pointer_basic", "bell_singlet"};
    return names;
}

/// Parses "0.05", "pi", "pi/64" or "3*pi/8" style angles.
inline double parse_angle(std::string_view text) {
    auto number = [](std::string_view s) {
        std::string str(s);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(str, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != str.size()) {
            throw std::invalid_argument("not a number: '" + str + "'");
        }
        return v;
    };
    const auto pi_at = text.find("pi");
    if (pi_at == std::string_view::npos) {
        return number(text);
    }
    double value = std::numbers::pi;
    auto head = text.substr(0, pi_at);
    auto tail = text.substr(pi_at + 2);
    if (!head.empty()) {
        if (head.back() != '*') {
            throw std::invalid_argument("bad angle '" + std::string(text) + "'");
        }
        value *= number(head.substr(0, head.size() - 1));
    }
    if (!tail.empty()) {
        if (tail.front() != '/') {
            throw std::invalid_argument("bad angle '" + std::string(text) + "'");
        }
        value /= number(tail.substr(1));
    }
    return value;
}

struct ScenarioConfig {
    std::string scenario = "proietti";
    /// Empty means the scenario's default list.
    std::vector<CollapseHypothesis> hypotheses;
    /// 0 is exact-only.
    long long shots = 0;
    std::uint64_t seed = 0;
    double grid_step = std::numbers::pi / 64;
    std::string output_format = "csv";
    /// Empty means "<scenario>.<format>" in the default output directory;
    /// "-" is standard output.
    std::string output_path;
    /// 0 means one per hardware core.
    unsigned threads = 0;
    /// State amplitudes for pointer_basic and counterexample.
    std::array<double, 2> amplitudes{1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2};

    unsigned effective_threads() const {
        if (threads > 0) {
            return threads;
        }
        return std::max(1u, std::thread::hardware_concurrency());
    }

    /// Throws ConfigError (prefixed with `where`) on the first bad field.
    void validate(const std::string &where = "config") const {
        auto fail = [&](const std::string &msg) { throw ConfigError(where + ": " + msg); };
        if (std::find(known_scenarios().begin(), known_scenarios().end(), scenario) == known_scenarios().end()) {
            fail("unknown scenario '" + scenario + "'");
        }
        if (shots < 0) {
            fail("shots must be >= 0");
        }
        if (!(grid_step > 0.0 && grid_step <= std::numbers::pi / 8 + 1e-15)) {
            fail("grid_step must lie in (0, pi/8]");
        }
        if (output_format != "csv" && output_format != "json") {
            fail("output_format must be csv or json");
        }
        const double n2 = amplitudes[0] * amplitudes[0] + amplitudes[1] * amplitudes[1];
        if (std::abs(n2 - 1.0) > kValidityTol) {
            fail("amplitudes must have unit norm");
        }
    }
};

namespace detail {

inline std::string mark_prefix(const std::string &source, const YAML::Mark &m) {
    if (m.is_null()) {
        return source;
    }
    return source + ":" + std::to_string(m.line + 1);
}

[[noreturn]] inline void config_fail(const std::string &source, const YAML::Node &node, const std::string &msg) {
    throw ConfigError(mark_prefix(source, node.Mark()) + ": " + msg);
}

inline std::string scalar(const std::string &source, const YAML::Node &node, const std::string &key) {
    if (!node.IsScalar()) {
        config_fail(source, node, key + " must be a scalar");
    }
    return node.Scalar();
}

inline long long parse_int(const std::string &text) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw std::invalid_argument("not an integer: '" + text + "'");
    }
    return v;
}

inline std::uint64_t parse_seed(const std::string &text) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw std::invalid_argument("seed must be a non-negative 64-bit integer");
    }
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used);
    } catch (const std::exception &) {
        throw std::invalid_argument("seed must be a non-negative 64-bit integer");
    }
    return v;
}

}  // namespace detail

/// Parses YAML text; errors are reported as "source:line: message".
inline ScenarioConfig parse_config(const std::string &text, const std::string &source = "config") {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception &e) {
        throw ConfigError(detail::mark_prefix(source, e.mark) + ": " + e.msg);
    }
    ScenarioConfig cfg;
    if (root.IsNull()) {
        return cfg;
    }
    if (!root.IsMap()) {
        detail::config_fail(source, root, "top level must be a mapping");
    }
    for (const auto &kv : root) {
        const std::string key = kv.first.Scalar();
        const YAML::Node &v = kv.second;
        try {
            if (key == "scenario") {
                cfg.scenario = detail::scalar(source, v, key);
            } else if (key == "hypotheses") {
                if (!v.IsSequence()) {
                    detail::config_fail(source, v, "hypotheses must be a list");
                }
                for (const auto &item : v) {
                    try {
                        cfg.hypotheses.push_back(CollapseHypothesis::parse(detail::scalar(source, item, key)));
                    } catch (const std::invalid_argument &e) {
                        detail::config_fail(source, item, e.what());
                    }
                }
            } else if (key == "shots") {
                cfg.shots = detail::parse_int(detail::scalar(source, v, key));
            } else if (key == "seed") {
                cfg.seed = detail::parse_seed(detail::scalar(source, v, key));
            } else if (key == "grid_step") {
                cfg.grid_step = parse_angle(detail::scalar(source, v, key));
            } else if (key == "output_format") {
                cfg.output_format = detail::scalar(source, v, key);
            } else if (key == "output_path") {
                cfg.output_path = detail::scalar(source, v, key);
            } else if (key == "threads") {
                const long long t = detail::parse_int(detail::scalar(source, v, key));
                if (t < 0) {
                    detail::config_fail(source, v, "threads must be >= 0");
                }
                cfg.threads = static_cast<unsigned>(t);
            } else if (key == "amplitudes") {
                if (!v.IsSequence() || v.size() != 2) {
                    detail::config_fail(source, v, "amplitudes must be a list of two numbers");
                }
                cfg.amplitudes = {parse_angle(detail::scalar(source, v[0], key)),
                                  parse_angle(detail::scalar(source, v[1], key))};
            } else {
                detail::config_fail(source, kv.first, "unknown key '" + key + "'");
            }
            // Field-level checks keep the offending line.
            ScenarioConfig probe = cfg;
            probe.validate(detail::mark_prefix(source, v.Mark()));
        } catch (const std::invalid_argument &e) {
            detail::config_fail(source, v, key + ": " + e.what());
        }
    }
    return cfg;
}

inline ScenarioConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot read config file");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

struct ReportRow {
    std::string scenario;
    std::string hypothesis;
    std::string quantity;
    std::optional<double> exact_value;
    std::optional<double> estimate;
    std::optional<double> std_error;
    long long shots = 0;
    std::uint64_t seed = 0;
};

struct RunReport {
    ScenarioConfig config;
    std::vector<std::string> factor_order;
    std::vector<ReportRow> rows;
    double wall_time_s = 0.0;
    std::string version = kVersion;
};

namespace detail {

class RowSink {
  public:
    RowSink(const ScenarioConfig &cfg, std::vector<ReportRow> &rows) : cfg_(cfg), rows_(rows) {}

    void exact(const std::string &hyp, const std::string &quantity, double value) {
        rows_.push_back({cfg_.scenario, hyp, quantity, value, std::nullopt, std::nullopt, 0, cfg_.seed});
    }

    void sampled(const std::string &hyp, const std::string &quantity, std::optional<double> exact_value,
                 double estimate, double std_error, long long shots) {
        rows_.push_back({cfg_.scenario, hyp, quantity, exact_value, estimate, std_error, shots, cfg_.seed});
    }

  private:
    const ScenarioConfig &cfg_;
    std::vector<ReportRow> &rows_;
};

inline std::vector<CollapseHypothesis> hypotheses_or(const ScenarioConfig &cfg,
                                                     std::vector<CollapseHypothesis> fallback) {
    return cfg.hypotheses.empty() ? std::move(fallback) : cfg.hypotheses;
}

inline const char *kCorrelatorNames[4] = {"E_A1B1", "E_A1B0", "E_A0B1", "E_A0B0"};

inline void run_proietti(const ScenarioConfig &cfg, RunReport &report) {
    RowSink out(cfg, report.rows);
    report.factor_order = proietti_final_order();
    const auto hyps = hypotheses_or(cfg, {CollapseHypothesis::unitary_only(), CollapseHypothesis::friend_dephasing()});

    const auto final_state = proietti_final();
    const auto side = friend_interaction(proietti_prepared_state(), Side::A);
    out.exact("", "printed_norm_squared_per_side", side.printed.norm_squared());
    out.exact("", "herald_probability_per_side", side.herald_probability);
    out.exact("", "herald_probability", final_state.herald_probability);
    const auto rho = DensityOperator::from_pure(final_state.state);
    out.exact("", "final_purity", purity(rho));
    for (const auto &l : proietti_final_order()) {
        out.exact("", "reduced_purity_" + l, purity(partial_trace(rho, {l})));
    }
    out.exact("", "local_deterministic_max", local_deterministic_max());

    const auto alice = BlochFamily::pair(labels::a, labels::alpha);
    const auto bob = BlochFamily::pair(labels::b, labels::beta);
    const unsigned threads = cfg.effective_threads();
    const auto witness =
        optimize_settings(proietti_hypothesis_state(CollapseHypothesis::unitary_only()), alice, bob, cfg.grid_step,
                          threads);
    const auto ang = witness.settings.angles();
    const char *angle_names[8] = {"A0_theta", "A0_phi", "A1_theta", "A1_phi",
                                  "B0_theta", "B0_phi", "B1_theta", "B1_phi"};
    for (std::size_t k = 0; k < 8; ++k) {
        out.exact("", std::string("witness_") + angle_names[k], ang[k]);
    }

    const auto cmp = hypothesis_comparison(proietti_hypothesis_state, hyps, alice, bob, witness.settings,
                                           cfg.grid_step, cfg.shots, cfg.seed, threads);
    out.exact("", "data_s", cmp.data_s);
    for (const auto &row : cmp.rows) {
        const std::string h = row.hypothesis.name();
        if (row.sampled) {
            const auto &smp = *row.sampled;
            for (std::size_t k = 0; k < 4; ++k) {
                const double e = smp.correlators[k];
                out.sampled(h, kCorrelatorNames[k], row.at_settings.correlators[k], e,
                            std::sqrt((1.0 - e * e) / static_cast<double>(cfg.shots)), cfg.shots);
            }
            out.sampled(h, "s_at_witness", row.at_settings.s_value, smp.s_value, smp.std_error.value_or(0.0),
                        cfg.shots);
        } else {
            for (std::size_t k = 0; k < 4; ++k) {
                out.exact(h, kCorrelatorNames[k], row.at_settings.correlators[k]);
            }
            out.exact(h, "s_at_witness", row.at_settings.s_value);
        }
        out.exact(h, "s_max", row.s_max);
        out.exact(h, "falsified", row.falsified ? 1.0 : 0.0);
    }
}

inline void run_counterexample(const ScenarioConfig &cfg, RunReport &report) {
    RowSink out(cfg, report.rows);
    report.factor_order = {labels::spin, labels::memory, labels::comm};
    const auto hyps =
        hypotheses_or(cfg, {CollapseHypothesis::unitary_only(), CollapseHypothesis::subjective_collapse()});
    const SpinAmplitudes amps{cfg.amplitudes[0], cfg.amplitudes[1]};
    out.exact("", "unitary_minus_subjective",
              counterexample_photon_probability(CollapseHypothesis::unitary_only(), amps) -
                  counterexample_photon_probability(CollapseHypothesis::subjective_collapse(), amps));
    for (std::size_t k = 0; k < hyps.size(); ++k) {
        const auto &h = hyps[k];
        const double p = counterexample_photon_probability(h, amps);
        if (cfg.shots > 0) {
            Rng rng = make_rng(stream_seed(cfg.seed, k));
            long long received = 0;
            for (long long r = 0; r < cfg.shots; ++r) {
                received += counterexample_run(h, rng, amps) ? 1 : 0;
            }
            const double f = static_cast<double>(received) / static_cast<double>(cfg.shots);
            out.sampled(h.name(), "photon_probability", p, f, std::sqrt(f * (1.0 - f) / static_cast<double>(cfg.shots)),
                        cfg.shots);
        } else {
            out.exact(h.name(), "photon_probability", p);
        }
    }
}

inline void run_pointer_basic(const ScenarioConfig &cfg, RunReport &report) {
    RowSink out(cfg, report.rows);
    report.factor_order = {labels::system, labels::pointer};
    const auto hyps = hypotheses_or(cfg, {CollapseHypothesis::unitary_only(), CollapseHypothesis::friend_dephasing()});
    const auto psi = pointer_basic_state(cfg.amplitudes[0], cfg.amplitudes[1]);
    const auto rho = DensityOperator::from_pure(psi);
    const Labels pointer{labels::pointer};
    const Labels system{labels::system};
    out.exact("", "composite_purity", purity(rho));
    out.exact("", "reduced_purity_system", purity(improper_mixture(psi, {labels::system})));
    out.exact("", "coherence_norm_composite", coherence_norm(rho));
    out.exact("", "coherence_norm_proper_mixture", coherence_norm(dephase(rho, pointer)));
    for (std::size_t k = 0; k < hyps.size(); ++k) {
        const auto &h = hyps[k];
        const auto ens = ensemble_state(psi, pointer, h);
        out.exact(h.name(), "purity", purity(ens));
        out.exact(h.name(), "coherence_norm", coherence_norm(ens));
        const double p0 = born_probabilities(ens, system)[0];
        if (cfg.shots > 0) {
            Rng rng = make_rng(stream_seed(cfg.seed, k));
            long long hits = 0;
            for (long long r = 0; r < cfg.shots; ++r) {
                const auto realized = realize(psi, pointer, h, rng);
                hits += projective_collapse(realized, system, rng).outcome == 0 ? 1 : 0;
            }
            const double f = static_cast<double>(hits) / static_cast<double>(cfg.shots);
            out.sampled(h.name(), "p_system_0", p0, f, std::sqrt(f * (1.0 - f) / static_cast<double>(cfg.shots)),
                        cfg.shots);
        } else {
            out.exact(h.name(), "p_system_0", p0);
        }
    }
}

/// Singlet-optimal settings: A0 = z, A1 = x, B0 = (z - x)/sqrt2, B1 = -(z + x)/sqrt2.
inline MeasurementSettings singlet_settings(const BlochFamily &alice, const BlochFamily &bob) {
    const double pi = std::numbers::pi;
    return MeasurementSettings::from_angles(alice, bob, {0.0, 0.0, pi / 2, 0.0, pi / 4, pi, 3 * pi / 4, pi});
}

inline void run_bell_singlet(const ScenarioConfig &cfg, RunReport &report) {
    RowSink out(cfg, report.rows);
    report.factor_order = {labels::electron1, labels::electron2};
    const auto psi = bell_singlet();
    const auto rho = DensityOperator::from_pure(psi);
    out.exact("", "composite_purity", purity(rho));
    for (const auto &l : {labels::electron1, labels::electron2}) {
        const auto reduced = partial_trace(rho, {l});
        out.exact("", "reduced_purity_" + l, purity(reduced));
        out.exact("", "reduced_coherence_norm_" + l, coherence_norm(reduced));
    }
    out.exact("", "zz_correlator",
              correlator(rho, pauli('z', labels::electron1), pauli('z', labels::electron2)));
    const auto alice = BlochFamily::qubit(labels::electron1);
    const auto bob = BlochFamily::qubit(labels::electron2);
    const auto st = singlet_settings(alice, bob);
    const double s = chsh_value(rho, st).s_value;
    if (cfg.shots > 0) {
        Rng rng = make_rng(stream_seed(cfg.seed, 0));
        const auto smp = sample_inequality(rho, st, cfg.shots, rng);
        out.sampled("", "chsh_optimal", s, smp.s_value, smp.std_error.value_or(0.0), cfg.shots);
    } else {
        out.exact("", "chsh_optimal", s);
    }
}

}  // namespace detail

/// Executes the configured scenario. Library errors propagate unchanged.
inline RunReport run(const ScenarioConfig &cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.config = cfg;
    if (cfg.scenario == "proietti") {
        detail::run_proietti(cfg, report);
    } else if (cfg.scenario == "counterexample") {
        detail::run_counterexample(cfg, report);
    } else if (cfg.scenario == "pointer_basic") {
        detail::run_pointer_basic(cfg, report);
    } else {
        detail::run_bell_singlet(cfg, report);
    }
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/// 12 significant digits, "%.12g"; -0 prints as 0.
inline std::string format_number(double x) {
    if (x == 0.0) {
        x = 0.0;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// The value a reader recovers from format_number(x).
inline double round12(double x) { return std::stod(format_number(x)); }

inline const char *kCsvHeader = "scenario,hypothesis,quantity,exact_value,estimate,std_error,shots,seed";

inline std::string config_echo(const ScenarioConfig &cfg) {
    std::string hyps;
    for (const auto &h : cfg.hypotheses) {
        hyps += (hyps.empty() ? "" : ";") + h.name();
    }
    std::ostringstream s;
    s << "scenario=" << cfg.scenario << " hypotheses=" << (hyps.empty() ? "default" : hyps)
      << " shots=" << cfg.shots << " seed=" << cfg.seed << " grid_step=" << format_number(cfg.grid_step)
      << " output_format=" << cfg.output_format << " amplitudes=" << format_number(cfg.amplitudes[0]) << ";"
      << format_number(cfg.amplitudes[1]);
    return s.str();
}

inline std::string csv_data_row(const ReportRow &r) {
    auto opt = [](const std::optional<double> &v) { return v ? format_number(*v) : std::string(); };
    std::string line = r.scenario + "," + r.hypothesis + "," + r.quantity + "," + opt(r.exact_value) + "," +
                       opt(r.estimate) + "," + opt(r.std_error) + "," + std::to_string(r.shots) + "," +
                       std::to_string(r.seed);
    return line;
}

/// Metadata lines start with '#'; the header and data rows follow.
inline std::string to_csv(const RunReport &report) {
    std::string factors;
    for (const auto &f : report.factor_order) {
        factors += (factors.empty() ? "" : ",") + f;
    }
    std::string out;
    out += "# friendsim " + report.version + "\n";
    out += "# config: " + config_echo(report.config) + "\n";
    out += "# factor_order: " + factors + " (last factor varies fastest)\n";
    out += "# wall_time_s: " + format_number(report.wall_time_s) + "\n";
    out += std::string(kCsvHeader) + "\n";
    for (const auto &r : report.rows) {
        out += csv_data_row(r) + "\n";
    }
    return out;
}

inline nlohmann::ordered_json to_json_value(const RunReport &report) {
    using nlohmann::ordered_json;
    auto num = [](const std::optional<double> &v) -> ordered_json {
        return v ? ordered_json(round12(*v)) : ordered_json(nullptr);
    };
    ordered_json hyps = ordered_json::array();
    for (const auto &h : report.config.hypotheses) {
        hyps.push_back(h.name());
    }
    const auto &c = report.config;
    ordered_json j;
    j["version"] = report.version;
    j["config"] = {{"scenario", c.scenario},
                   {"hypotheses", hyps},
                   {"shots", c.shots},
                   {"seed", c.seed},
                   {"grid_step", round12(c.grid_step)},
                   {"output_format", c.output_format},
                   {"amplitudes", {round12(c.amplitudes[0]), round12(c.amplitudes[1])}}};
    j["factor_order"] = report.factor_order;
    j["wall_time_s"] = round12(report.wall_time_s);
    ordered_json rows = ordered_json::array();
    for (const auto &r : report.rows) {
        rows.push_back({{"scenario", r.scenario},
                        {"hypothesis", r.hypothesis},
                        {"quantity", r.quantity},
                        {"exact_value", num(r.exact_value)},
                        {"estimate", num(r.estimate)},
                        {"std_error", num(r.std_error)},
                        {"shots", r.shots},
                        {"seed", r.seed}});
    }
    j["rows"] = std::move(rows);
    return j;
}

inline std::string to_json(const RunReport &report) { return to_json_value(report).dump(2) + "\n"; }

/// Rows of a JSON report, as emitted by to_json().
inline std::vector<ReportRow> rows_from_json(const std::string &text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<ReportRow> rows;
    auto num = [](const nlohmann::json &v) -> std::optional<double> {
        if (v.is_null()) {
            return std::nullopt;
        }
        return v.get<double>();
    };
    for (const auto &r : j.at("rows")) {
        rows.push_back({r.at("scenario").get<std::string>(), r.at("hypothesis").get<std::string>(),
                        r.at("quantity").get<std::string>(), num(r.at("exact_value")), num(r.at("estimate")),
                        num(r.at("std_error")), r.at("shots").get<long long>(), r.at("seed").get<std::uint64_t>()});
    }
    return rows;
}

/// Explicit path, else "<scenario>.<format>" under $FRIENDSIM_OUTPUT_DIR (or ".").
inline std::filesystem::path resolve_output_path(const ScenarioConfig &cfg) {
    if (!cfg.output_path.empty()) {
        return cfg.output_path;
    }
    const char *dir = std::getenv(kOutputDirEnv);
    std::filesystem::path base = (dir != nullptr && *dir != '\0') ? dir : ".";
    return base / (cfg.scenario + "." + cfg.output_format);
}

inline std::string render(const RunReport &report, const std::string &format) {
    return format == "json" ? to_json(report) : to_csv(report);
}

/// Writes the report; path "-" is standard output. Throws OutputError.
inline void emit(const RunReport &report, const std::string &format, const std::filesystem::path &path) {
    const auto text = render(report, format);
    if (path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
        return;
    }
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw OutputError(path.string() + ": cannot open for writing");
    }
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.close();
    if (!f) {
        throw OutputError(path.string() + ": write failed");
    }
}

}  // namespace friendsim
