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

// friendsim: run one scenario from a config file and/or flags, write a report.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "friendsim/runner.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> scenario;
    std::optional<std::vector<std::string>> hypotheses;
    std::optional<std::string> seed;
    std::optional<long long> shots;
    std::optional<std::string> grid_step;
    std::optional<std::string> format;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
};

friendsim::ScenarioConfig build_config(const Overrides &o) {
    using friendsim::ConfigError;
    friendsim::ScenarioConfig cfg;
    if (!o.config.empty()) {
        cfg = friendsim::load_config(o.config);
    }
    auto guarded = [](const char *flag, auto &&fn) {
        try {
            fn();
        } catch (const std::invalid_argument &e) {
            throw ConfigError(std::string(flag) + ": " + e.what());
        }
    };
    if (o.scenario) {
        cfg.scenario = *o.scenario;
    }
    if (o.hypotheses) {
        guarded("--hypotheses", [&] {
            cfg.hypotheses.clear();
            for (const auto &h : *o.hypotheses) {
                cfg.hypotheses.push_back(friendsim::CollapseHypothesis::parse(h));
            }
        });
    }
    if (o.seed) {
        guarded("--seed", [&] { cfg.seed = friendsim::detail::parse_seed(*o.seed); });
    }
    if (o.shots) {
        cfg.shots = *o.shots;
    }
    if (o.grid_step) {
        guarded("--grid-step", [&] { cfg.grid_step = friendsim::parse_angle(*o.grid_step); });
    }
    if (o.format) {
        cfg.output_format = *o.format;
    }
    if (o.out) {
        cfg.output_path = *o.out;
    }
    if (o.threads) {
        cfg.threads = *o.threads;
    }
    cfg.validate(o.config.empty() ? "flags" : o.config + " + flags");
    return cfg;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Wigner's-friend scenario simulator"};
    app.set_version_flag("--version", std::string(friendsim::kVersion));
    Overrides o;
    app.add_option("-c,--config", o.config, "YAML scenario configuration");
    app.add_option("--scenario", o.scenario, "proietti | counterexample | pointer_basic | bell_singlet");
    app.add_option("--hypotheses", o.hypotheses, "hypothesis names, e.g. UnitaryOnly StochasticCollapse(0.3)");
    app.add_option("--seed", o.seed, "64-bit master seed");
    app.add_option("--shots", o.shots, "Monte Carlo shots per quantity (0 = exact only)");
    app.add_option("--grid-step", o.grid_step, "setting-search grid step in radians, e.g. pi/64");
    app.add_option("--format", o.format, "csv | json");
    app.add_option("--out", o.out, "report path ('-' for stdout)");
    app.add_option("--threads", o.threads, "search threads (0 = all cores)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? friendsim::kExitOk : friendsim::kExitConfig;
    }

    try {
        const auto cfg = build_config(o);
        const auto report = friendsim::run(cfg);
        friendsim::emit(report, cfg.output_format, friendsim::resolve_output_path(cfg));
        return friendsim::kExitOk;
    } catch (const friendsim::ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return friendsim::kExitConfig;
    } catch (const friendsim::OutputError &e) {
        std::fprintf(stderr, "output error: %s\n", e.what());
        return friendsim::kExitOutput;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return friendsim::kExitInvariant;
    }
}
