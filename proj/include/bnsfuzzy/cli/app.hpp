#pragma once

/// Argument parsing and dispatch for the `bnsfuzzy` tool.

#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bnsfuzzy/cli/commands.hpp"
#include "bnsfuzzy/cli/config.hpp"
#include "bnsfuzzy/cli/output.hpp"
#include "bnsfuzzy/error.hpp"

namespace bnsfuzzy::cli {

/// Runs one command; returns the process exit code (0 ok, 2 config, 3 data, 4 numeric).
inline int run(const std::vector<std::string>& args, std::ostream& log = std::cerr) {
    CLI::App app{"Fuzzy-price features, BN-S simulation and jump classification"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::string> data;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda_f;
    std::optional<double> jump_threshold;
    std::string models;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--data", data, "OHLC CSV path or http(s) URL (data.source)");
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "base random seed (run.seed)");
    app.add_option("--lambda-f", lambda_f, "fuzzy optimism weight in [0,1] (fuzzy.lambda_f)");
    app.add_option("--jump-threshold", jump_threshold,
                   "big-jump threshold C in percent (features.jump_threshold)");

    const std::map<std::string, std::pair<const char*, std::function<void(Context&)>>> commands = {
        {"fuzzify", {"write fuzzy.csv (date, s_l, s_m, s_u, expectation)", cmd_fuzzify}},
        {"plotdata", {"write plot-ready CSV series under plotdata/", cmd_plotdata}},
        {"simulate", {"simulate matched-seed BN-S paths and the correlation table", cmd_simulate}},
        {"features", {"write daily changes and the labeled window matrix", cmd_features}},
        {"train", {"fit the configured classifiers on eval.train_split", cmd_train}},
        {"evaluate", {"score saved models on the test side of eval.train_split", cmd_evaluate}},
        {"pipeline", {"run every stage over every split", cmd_pipeline}},
    };
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        if (name == "evaluate") {
            sub->add_option("--models", models, "directory of saved models (default <out>/models)");
        }
    }

    std::vector<const char*> argv{"bnsfuzzy"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        log << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        log << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    std::vector<std::string> warnings;
    try {
        if (!config_path.empty()) {
            cfg = load_config(config_path);
        }
        bool unused = false;
        if (data) {
            set_value(cfg, "data.source", *data, unused);
        }
        if (seed) {
            cfg.seed = *seed;
        }
        if (lambda_f) {
            cfg.lambda_f = *lambda_f;
        }
        if (jump_threshold) {
            cfg.jump_threshold = *jump_threshold;
        }
        if (out) {
            cfg.out = *out;
        }
        warnings = cfg.validate();
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return static_cast<int>(exit_code_for(e));
    }
    for (const auto& w : warnings) {
        log << "warning: " << w << '\n';
    }

    std::optional<OutputDir> dir;
    try {
        dir.emplace(cfg.out);
        dir->write("resolved.cfg", config_text(cfg));
        Context ctx{cfg, *dir, log, models.empty() ? (dir->root() / "models").string() : models};
        commands.at(command).second(ctx);
        dir->finish(command, true);
        log << "wrote " << dir->root().string() << "/manifest.json\n";
        return 0;
    } catch (const std::exception& e) {
        log << "error: " << command << ": " << e.what() << '\n';
        if (dir) {
            dir->finish(command, false, e.what());
        }
        return static_cast<int>(exit_code_for(e));
    }
}

}  // namespace bnsfuzzy::cli
