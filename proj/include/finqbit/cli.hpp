// Copyright 2026 The finqbit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Command-line front end. `run` parses argv, dispatches one subcommand and
 * returns the process exit code (0 ok, 1 I/O, 2 validation, 3 non-convergence).
 *
 * Every command writes `<output>.manifest.json` (or `manifest.json` inside an
 * output directory) recording its effective arguments; `finqbit replay
 * <manifest>` re-executes them.
 *
 * Seed precedence: --seed, then FINQBIT_SEED, then the training config file,
 * then 0.
 */

#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "finqbit/bsm.hpp"
#include "finqbit/compression.hpp"
#include "finqbit/dataset.hpp"
#include "finqbit/error.hpp"
#include "finqbit/experiments.hpp"
#include "finqbit/metrics.hpp"
#include "finqbit/model.hpp"
#include "finqbit/qasm.hpp"
#include "finqbit/readout.hpp"
#include "finqbit/training.hpp"

namespace finqbit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char *kArtifactVersion = "0.1.0";

// Externally reported numbers for a gradient-boosted tree baseline. Not
// computed here; reports show them labeled as external.
struct ExternalReference {
    static constexpr double mse = 0.00022;
    static constexpr double rmse = 0.01480;
    static constexpr double mae = 0.01215;
    static constexpr double r2 = 0.97854;
    static constexpr double otm_mse = 0.000171;
    static constexpr double atm_mse = 0.000328;
    static constexpr double itm_mse = 0.000183;
};

// IO helpers ----------------------------------------------------------------

inline json read_json(const fs::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw ValidationError(path.string() + ": invalid JSON: " + e.what());
    }
}

inline void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

inline void write_json(const fs::path &path, const json &j) { write_text(path, j.dump(2) + "\n"); }

inline ModelParams load_params(const fs::path &path) {
    const auto j = read_json(path);
    try {
        return model_params_from_json(j.contains("best_params") ? j.at("best_params") : j);
    } catch (const json::exception &e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

inline std::vector<MarketPoint> load_points_or_benchmark(const std::string &path) {
    if (path.empty() || path == "benchmark") {
        return benchmark_points();
    }
    return load_dataset(path).points;
}

// Manifest ------------------------------------------------------------------

struct Invocation {
    std::string command;
    std::vector<std::string> args; ///< argv after the program name
    std::uint64_t seed = 0;
    json config = json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

inline void write_manifest(const fs::path &path, const Invocation &inv, double seconds) {
    // Replays pin the effective seed ahead of the recorded arguments.
    std::vector<std::string> replay{"--seed", std::to_string(inv.seed)};
    for (const auto &a : inv.args) {
        replay.push_back(a);
    }
    write_json(path, {{"schema_version", 1},
                      {"artifact_version", kArtifactVersion},
                      {"command", inv.command},
                      {"args", replay},
                      {"seed", inv.seed},
                      {"config", inv.config},
                      {"inputs", inv.inputs},
                      {"outputs", inv.outputs},
                      {"duration_seconds", seconds}});
}

inline fs::path manifest_for(const fs::path &output) {
    return fs::path(output.string() + ".manifest.json");
}

// Tables --------------------------------------------------------------------

inline std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

inline std::string fmt(const std::optional<double> &v, int prec = 6) {
    return v ? fmt(*v, prec) : std::string("n/a");
}

inline std::string fmt_json(const json &j, const char *key, int prec = 6) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return "n/a";
    }
    return fmt(j.at(key).get<double>(), prec);
}

inline json evaluation_json(const std::string &model, const std::string &variant, int L,
                            const MetricsReport &m, const RegimeBreakdown &b) {
    return {{"schema_version", 1}, {"kind", "evaluation"}, {"model", model},
            {"variant", variant},  {"L", L},               {"metrics", to_json(m)},
            {"regimes", to_json(b)}};
}

inline void print_evaluation(std::ostream &out, const std::string &model, const MetricsReport &m,
                             const RegimeBreakdown &b) {
    out << model << " on " << m.n << " samples\n"
        << "  MSE       " << fmt(m.mse) << "\n"
        << "  RMSE      " << fmt(m.rmse) << "\n"
        << "  MAE       " << fmt(m.mae) << "\n"
        << "  R2        " << fmt(m.r2, 5) << "\n"
        << "  Max error " << fmt(m.max_error) << "\n"
        << "  OTM MSE   " << fmt(b.otm_mse) << " (" << b.otm_count << ")\n"
        << "  ATM MSE   " << fmt(b.atm_mse) << " (" << b.atm_count << ")\n"
        << "  ITM MSE   " << fmt(b.itm_mse) << " (" << b.itm_count << ")\n";
}

// Report --------------------------------------------------------------------

inline std::string build_report(const fs::path &dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("run directory not found: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto &e : fs::recursive_directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && e.path().extension() == ".json" &&
            name.find(".manifest.") == std::string::npos && name != "manifest.json") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<std::pair<std::string, json>> evals;
    std::optional<json> shots, mitigation, compression;
    for (const auto &f : files) {
        json j;
        try {
            j = read_json(f);
        } catch (const Error &) {
            continue;
        }
        const auto kind = j.value("kind", std::string());
        if (kind == "evaluation") {
            evals.emplace_back(fs::relative(f, dir).generic_string(), j);
        } else if (kind == "shot_grid") {
            shots = j;
        } else if (kind == "mitigation") {
            mitigation = j;
        } else if (kind == "compression") {
            compression = j;
        }
    }
    auto find_model = [&](const std::string &model) -> const json * {
        for (const auto &[name, j] : evals) {
            if (j.value("model", std::string()) == model) {
                return &j;
            }
        }
        return nullptr;
    };
    auto depth_table = [&](std::ostringstream &os, const std::string &variant) {
        std::vector<const json *> rows;
        for (const auto &[name, j] : evals) {
            if (j.value("variant", std::string()) == variant) {
                rows.push_back(&j);
            }
        }
        std::sort(rows.begin(), rows.end(),
                  [](const json *a, const json *b) { return a->at("L") < b->at("L"); });
        os << "| L | MSE | R2 |\n|---|---|---|\n";
        if (rows.empty()) {
            os << "| not run | not run | not run |\n";
        }
        for (const auto *r : rows) {
            os << "| " << r->at("L").get<int>() << " | " << fmt_json(r->at("metrics"), "mse")
               << " | " << fmt_json(r->at("metrics"), "r2", 5) << " |\n";
        }
        os << "\n";
    };

    std::ostringstream os;
    os << "# finqbit run report\n\n";
    os << "Run directory: `" << dir.filename().string() << "`\n\n";

    os << "## 4-qubit baseline, depth scaling\n\n";
    depth_table(os, "baseline");
    os << "## 4-qubit Fourier re-uploading\n\n";
    depth_table(os, "fourier");

    os << "## Shot-noise grid\n\n";
    os << "MAE: mean over points of |mean price - BSM|. Std. Dev: mean over points of the "
          "per-point std across repetitions. Max error: max over points of the mean absolute "
          "per-repetition error. R2: mean curve vs BSM.\n\n";
    os << "| R | N shots | MAE | Std. Dev | Max error | R2 |\n|---|---|---|---|---|---|\n";
    if (!shots) {
        os << "| not run | not run | not run | not run | not run | not run |\n";
    } else {
        for (const auto &c : shots->at("cells")) {
            os << "| " << c.at("repetitions").get<std::size_t>() << " | "
               << c.at("shots").get<std::uint64_t>() << " | " << fmt_json(c, "mae") << " | "
               << fmt_json(c, "std_dev") << " | " << fmt_json(c, "max_error") << " | "
               << fmt_json(c, "r2", 5) << " |\n";
        }
    }
    os << "\n";

    os << "## Global comparison on the test set\n\n";
    os << "| Model | MSE | RMSE | MAE | R2 |\n|---|---|---|---|---|\n";
    for (const std::string model : {"OLS", "finQbit"}) {
        if (const auto *j = find_model(model)) {
            const auto &m = j->at("metrics");
            os << "| " << model << " | " << fmt_json(m, "mse", 5) << " | "
               << fmt_json(m, "rmse", 5) << " | " << fmt_json(m, "mae", 5) << " | "
               << fmt_json(m, "r2", 5) << " |\n";
        } else {
            os << "| " << model << " | not run | not run | not run | not run |\n";
        }
    }
    os << "| Gradient-boosted trees (external reference, not run here) | "
       << fmt(ExternalReference::mse, 5) << " | " << fmt(ExternalReference::rmse, 5) << " | "
       << fmt(ExternalReference::mae, 5) << " | " << fmt(ExternalReference::r2, 5) << " |\n\n";

    os << "## MSE by moneyness regime\n\n";
    os << "| Regime | OLS | Gradient-boosted trees (external) | finQbit |\n|---|---|---|---|\n";
    const auto *ols = find_model("OLS");
    const auto *qnn = find_model("finQbit");
    auto regime_cell = [](const json *j, const char *key) {
        return j ? fmt_json(j->at("regimes"), key) : std::string("not run");
    };
    const std::array<std::tuple<const char *, const char *, double>, 3> regimes{{
        {"OTM (m < 0.95)", "otm_mse", ExternalReference::otm_mse},
        {"ATM (0.95 <= m <= 1.05)", "atm_mse", ExternalReference::atm_mse},
        {"ITM (m > 1.05)", "itm_mse", ExternalReference::itm_mse},
    }};
    for (const auto &[label, key, ext] : regimes) {
        os << "| " << label << " | " << regime_cell(ols, key) << " | " << fmt(ext) << " | "
           << regime_cell(qnn, key) << " |\n";
    }
    os << "\n";

    os << "## Readout mitigation\n\n";
    os << "| MSE raw | MSE mitigated | Change |\n|---|---|---|\n";
    if (!mitigation) {
        os << "| not run | not run | not run |\n";
    } else {
        const double red = mitigation->at("reduction").get<double>();
        os << "| " << fmt_json(*mitigation, "mse_corrupted", 8) << " | "
           << fmt_json(*mitigation, "mse_mitigated", 8) << " | " << fmt(-100.0 * red, 1)
           << "% |\n";
    }
    os << "\n";

    os << "## Compression\n\n";
    os << "| m | Distance | CX original | CX compressed | <Z0> original | <Z0> compressed |\n"
          "|---|---|---|---|---|---|\n";
    if (!compression) {
        os << "| not run | not run | not run | not run | not run | not run |\n";
    } else {
        for (const auto &p : compression->at("points")) {
            std::ostringstream d;
            d << std::scientific << std::setprecision(2) << p.at("distance").get<double>();
            os << "| " << fmt(p.at("m").get<double>(), 2) << " | " << d.str() << " | "
               << p.at("cnots_original").get<int>() << " | " << p.at("cnots_compressed").get<int>()
               << " | " << fmt_json(p, "z_original") << " | " << fmt_json(p, "z_compressed")
               << " |\n";
        }
    }
    os << "\n";
    return os.str();
}

// Dispatcher ----------------------------------------------------------------

inline std::optional<std::uint64_t> env_seed() {
    const char *s = std::getenv("FINQBIT_SEED");
    if (s == nullptr || *s == '\0') {
        return std::nullopt;
    }
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos != std::string(s).size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception &) {
        throw ValidationError(std::string("FINQBIT_SEED is not an unsigned integer: ") + s);
    }
}

inline int run(const std::vector<std::string> &args, std::ostream &out = std::cout,
               std::ostream &err = std::cerr);

namespace detail {

inline int run_impl(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"finqbit: variational quantum option-pricing lab", "finqbit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<std::uint64_t> seed_flag;
    std::size_t jobs = 1;
    app.add_option("--seed", seed_flag, "Master seed (overrides FINQBIT_SEED)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));

    Invocation inv;
    inv.args = args;
    auto effective_seed = [&](std::optional<std::uint64_t> config_seed = std::nullopt) {
        if (seed_flag) {
            return *seed_flag;
        }
        if (auto e = env_seed()) {
            return *e;
        }
        return config_seed.value_or(0);
    };

    // generate
    auto *gen = app.add_subcommand("generate", "Sample a dataset and label it with BSM prices");
    std::size_t gen_n = 0;
    std::string gen_out;
    bool gen_test = false;
    gen->add_option("--n", gen_n, "Number of samples")->required();
    gen->add_option("--out", gen_out, "Output CSV")->required();
    gen->add_flag("--test", gen_test, "Draw from the test-split stream of the seed");

    // train
    auto *tr = app.add_subcommand("train", "Train a model");
    std::string tr_train, tr_test, tr_config, tr_out, tr_report, tr_loss, tr_variant = "finqbit";
    int tr_L = 0;
    std::optional<double> tr_lr;
    std::optional<std::size_t> tr_iters, tr_restarts, tr_patience, tr_batch;
    double tr_val = 0.1;
    tr->add_option("--train", tr_train, "Training CSV")->required();
    tr->add_option("--test", tr_test, "Test CSV (optional, adds test metrics)");
    tr->add_option("--variant", tr_variant, "finqbit | baseline4 | fourier4");
    tr->add_option("--L", tr_L, "Layers for 4-qubit variants");
    tr->add_option("--config", tr_config, "JSON training config");
    tr->add_option("--out", tr_out, "Output params JSON")->required();
    tr->add_option("--report", tr_report, "Training report JSON");
    tr->add_option("--loss-csv", tr_loss, "Loss history CSV");
    tr->add_option("--lr", tr_lr, "Adam learning rate");
    tr->add_option("--iters", tr_iters, "Iterations per restart");
    tr->add_option("--restarts", tr_restarts, "Random restarts");
    tr->add_option("--patience", tr_patience, "Early-stopping patience");
    tr->add_option("--batch", tr_batch, "Minibatch size (0 = full batch)");
    tr->add_option("--val-fraction", tr_val, "Tail fraction held out for validation")
        ->check(CLI::Range(0.0, 0.9));

    // evaluate
    auto *ev = app.add_subcommand("evaluate", "Metrics and regime breakdown on a test set");
    std::string ev_params, ev_test, ev_out;
    std::uint64_t ev_shots = 0;
    ev->add_option("--params", ev_params)->required();
    ev->add_option("--test", ev_test)->required();
    ev->add_option("--out", ev_out, "Output JSON");
    ev->add_option("--shots", ev_shots, "Shots per point (0 = exact)");

    // ols
    auto *ol = app.add_subcommand("ols", "Fit and evaluate the linear baseline");
    std::string ol_train, ol_test, ol_out;
    ol->add_option("--train", ol_train)->required();
    ol->add_option("--test", ol_test)->required();
    ol->add_option("--out", ol_out, "Output JSON");

    // shots
    auto *sh = app.add_subcommand("shots", "Shot-noise grid over repetitions x shots");
    std::string sh_params, sh_points, sh_out, sh_csv;
    std::vector<std::size_t> sh_R{20, 50};
    std::vector<std::uint64_t> sh_N{500, 2000, 5000};
    sh->add_option("--params", sh_params)->required();
    sh->add_option("--points", sh_points, "Dataset CSV of points (default: benchmark)");
    sh->add_option("--R", sh_R, "Repetition counts")->delimiter(',');
    sh->add_option("--N", sh_N, "Shot counts")->delimiter(',');
    sh->add_option("--out", sh_out, "Output JSON")->required();
    sh->add_option("--csv", sh_csv, "Output CSV");

    // stability
    auto *st = app.add_subcommand("stability", "Repetition stability track");
    std::string st_params, st_points, st_out, st_csv, st_noise = "none";
    std::size_t st_R = 25;
    std::uint64_t st_N = 4000;
    st->add_option("--params", st_params)->required();
    st->add_option("--points", st_points);
    st->add_option("--R", st_R);
    st->add_option("--N", st_N, "Shots per estimate (0 = exact)");
    st->add_option("--noise", st_noise, "none | rigetti")
        ->check(CLI::IsMember({"none", "rigetti"}));
    st->add_option("--out", st_out)->required();
    st->add_option("--csv", st_csv);

    // converge
    auto *cv = app.add_subcommand("converge", "Estimator mean/std along a shot ladder");
    std::string cv_params, cv_out, cv_csv;
    MarketPoint cv_point{1.2, 1.0, 0.05, 0.2};
    std::vector<std::uint64_t> cv_ladder = default_shot_ladder();
    std::size_t cv_R = 100;
    cv->add_option("--params", cv_params)->required();
    cv->add_option("--m", cv_point.m);
    cv->add_option("--T", cv_point.T);
    cv->add_option("--r", cv_point.r);
    cv->add_option("--sigma", cv_point.sigma);
    cv->add_option("--ladder", cv_ladder)->delimiter(',');
    cv->add_option("--R", cv_R);
    cv->add_option("--out", cv_out)->required();
    cv->add_option("--csv", cv_csv);

    // mitigate
    auto *mi = app.add_subcommand("mitigate", "Readout corruption and inverse-matrix mitigation");
    std::string mi_params, mi_points, mi_out, mi_inverse = "computed";
    std::uint64_t mi_shots = 0;
    mi->add_option("--params", mi_params)->required();
    mi->add_option("--points", mi_points);
    mi->add_option("--shots", mi_shots, "Shots per point (0 = exact probabilities)");
    mi->add_option("--inverse", mi_inverse, "computed | printed")
        ->check(CLI::IsMember({"computed", "printed"}));
    mi->add_option("--out", mi_out)->required();

    // compress
    auto *co = app.add_subcommand("compress", "Fit 3-CX circuits at fixed points");
    std::string co_params, co_points, co_dir;
    double co_tol = 1e-6;
    FitOptions co_opt;
    co->add_option("--params", co_params)->required();
    co->add_option("--points", co_points);
    co->add_option("--tol", co_tol);
    co->add_option("--restarts", co_opt.restarts);
    co->add_option("--iters", co_opt.max_iters);
    co->add_option("--out-dir", co_dir)->required();

    // report
    auto *rp = app.add_subcommand("report", "Consolidate a run directory into markdown tables");
    std::string rp_dir, rp_out;
    rp->add_option("--run-dir", rp_dir)->required();
    rp->add_option("--out", rp_out, "Output markdown (default: <run-dir>/report.md)");

    // replay
    auto *rl = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    std::string rl_manifest;
    rl->add_option("manifest", rl_manifest)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::Validation);
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    int status = 0;

    if (*rl) {
        const auto m = read_json(rl_manifest);
        std::vector<std::string> again;
        try {
            again = m.at("args").get<std::vector<std::string>>();
        } catch (const json::exception &e) {
            throw ValidationError(rl_manifest + ": manifest has no args");
        }
        return run(again, out, err);
    }

    if (*gen) {
        inv.command = "generate";
        inv.seed = effective_seed();
        const auto seed = gen_test ? derive_seed(inv.seed, {stream::kTestSplit}) : inv.seed;
        const auto d = generate_dataset(gen_n, seed);
        save_dataset(d, gen_out);
        inv.config = {{"n", gen_n}, {"test", gen_test}, {"dataset_seed", seed}};
        inv.outputs = {gen_out};
        out << "wrote " << d.size() << " rows to " << gen_out << "\n";
        write_manifest(manifest_for(gen_out), inv, elapsed());
        return 0;
    }

    if (*tr) {
        inv.command = "train";
        TrainConfig cfg;
        std::optional<std::uint64_t> config_seed;
        if (!tr_config.empty()) {
            const auto j = read_json(tr_config);
            cfg = train_config_from_json(j, cfg);
            if (j.contains("seed")) {
                config_seed = cfg.seed;
            }
            inv.inputs.push_back(tr_config);
        }
        if (tr->count("--variant") > 0) {
            cfg.target.variant = parse_variant(tr_variant);
            cfg.target.layers = cfg.target.variant == Variant::Finqbit ? 3 : 1;
        }
        if (tr_L > 0) {
            if (cfg.target.variant == Variant::Finqbit) {
                throw ValidationError("--L applies only to 4-qubit variants");
            }
            cfg.target.layers = tr_L;
        }
        if (tr_lr) cfg.learning_rate = *tr_lr;
        if (tr_iters) cfg.max_iters = *tr_iters;
        if (tr_restarts) cfg.restarts = *tr_restarts;
        if (tr_patience) cfg.early_stop_patience = *tr_patience;
        if (tr_batch) cfg.batch = *tr_batch;
        cfg.seed = effective_seed(config_seed);
        cfg.jobs = jobs;
        inv.seed = cfg.seed;
        const auto full = load_dataset(tr_train);
        inv.inputs.push_back(tr_train);
        auto [train_set, val_set] = split_tail(full, tr_val);
        const auto rep = train(cfg, train_set, val_set);
        write_json(tr_out, to_json(rep.best_params));
        inv.outputs.push_back(tr_out);
        json rj = to_json(rep);
        rj["kind"] = "train_report";
        rj["config"] = to_json(cfg);
        if (!tr_test.empty()) {
            const auto test = load_dataset(tr_test);
            inv.inputs.push_back(tr_test);
            const auto pred = predict_all(rep.best_params, test.points);
            const auto m = compute_metrics(pred, test.labels);
            rj["test_metrics"] = to_json(m);
            rj["test_regimes"] = to_json(regime_breakdown(pred, test.labels, test.points));
            out << "test R2 " << fmt(m.r2, 5) << "  MSE " << fmt(m.mse) << "\n";
        }
        const auto report_path = tr_report.empty() ? tr_out + ".report.json" : tr_report;
        write_json(report_path, rj);
        inv.outputs.push_back(report_path);
        if (!tr_loss.empty()) {
            std::ostringstream csv;
            write_loss_history_csv(csv, rep);
            write_text(tr_loss, csv.str());
            inv.outputs.push_back(tr_loss);
        }
        inv.config = to_json(cfg);
        inv.config["val_fraction"] = tr_val;
        out << rep.best_params.ansatz.label() << ": best restart " << rep.restart_index
            << ", validation MSE " << fmt(rep.best_val_mse) << "\n";
        write_manifest(manifest_for(tr_out), inv, elapsed());
        return 0;
    }

    if (*ev) {
        inv.command = "evaluate";
        inv.seed = effective_seed();
        const auto p = load_params(ev_params);
        const auto test = load_dataset(ev_test);
        inv.inputs = {ev_params, ev_test};
        std::vector<double> pred;
        for (std::size_t i = 0; i < test.size(); ++i) {
            const auto mode = ev_shots == 0
                                  ? EvalMode::exact()
                                  : EvalMode::sampled(ev_shots,
                                                      derive_seed(inv.seed, {stream::kShots, i}));
            pred.push_back(predict_price(test.points[i], p, mode));
        }
        const auto m = compute_metrics(pred, test.labels);
        const auto b = regime_breakdown(pred, test.labels, test.points);
        const std::string model =
            p.ansatz.variant == Variant::Finqbit ? "finQbit" : p.ansatz.label();
        print_evaluation(out, model, m, b);
        inv.config = {{"shots", ev_shots}};
        if (!ev_out.empty()) {
            auto j = evaluation_json(model, variant_name(p.ansatz.variant), p.ansatz.layers, m, b);
            j["shots"] = ev_shots;
            write_json(ev_out, j);
            inv.outputs = {ev_out};
            write_manifest(manifest_for(ev_out), inv, elapsed());
        }
        return 0;
    }

    if (*ol) {
        inv.command = "ols";
        inv.seed = effective_seed();
        const auto train_set = load_dataset(ol_train);
        const auto test = load_dataset(ol_test);
        inv.inputs = {ol_train, ol_test};
        const auto model = ols_fit(train_set);
        const auto pred = ols_predict(model, test.points);
        const auto m = compute_metrics(pred, test.labels);
        const auto b = regime_breakdown(pred, test.labels, test.points);
        print_evaluation(out, "OLS", m, b);
        if (!ol_out.empty()) {
            auto j = evaluation_json("OLS", "ols", 0, m, b);
            j["model_params"] = to_json(model);
            write_json(ol_out, j);
            inv.outputs = {ol_out};
            write_manifest(manifest_for(ol_out), inv, elapsed());
        }
        return 0;
    }

    if (*sh) {
        inv.command = "shots";
        inv.seed = effective_seed();
        const auto p = load_params(sh_params);
        const auto pts = load_points_or_benchmark(sh_points);
        inv.inputs = {sh_params};
        if (!sh_points.empty() && sh_points != "benchmark") {
            inv.inputs.push_back(sh_points);
        }
        std::vector<ShotGridConfig> grid;
        for (auto R : sh_R) {
            for (auto N : sh_N) {
                grid.push_back({R, N, pts, inv.seed});
            }
        }
        const auto cells = run_shot_grid(p, grid, jobs);
        auto j = shot_grid_json(cells);
        j["kind"] = "shot_grid";
        j["seed"] = inv.seed;
        write_json(sh_out, j);
        inv.outputs = {sh_out};
        if (!sh_csv.empty()) {
            std::ostringstream csv;
            write_shot_grid_csv(csv, cells);
            write_text(sh_csv, csv.str());
            inv.outputs.push_back(sh_csv);
        }
        out << "R     N      MAE       StdDev    MaxErr    R2\n";
        for (const auto &c : cells) {
            out << std::left << std::setw(6) << c.repetitions << std::setw(7) << c.shots
                << fmt(c.mae) << "  " << fmt(c.std_dev) << "  " << fmt(c.max_error) << "  "
                << fmt(c.r2, 5) << "\n";
        }
        inv.config = {{"R", sh_R}, {"N", sh_N}, {"points", sh_points.empty() ? "benchmark" : sh_points}};
        write_manifest(manifest_for(sh_out), inv, elapsed());
        return 0;
    }

    if (*st) {
        inv.command = "stability";
        inv.seed = effective_seed();
        const auto p = load_params(st_params);
        const auto pts = load_points_or_benchmark(st_points);
        std::optional<AssignmentMatrix> noise;
        if (st_noise == "rigetti") {
            noise = AssignmentMatrix::rigetti_ankaa3();
        }
        const auto t = stability_track(p, pts, st_R, st_N, noise, inv.seed);
        auto j = to_json(t);
        j["kind"] = "stability";
        write_json(st_out, j);
        inv.inputs = {st_params};
        inv.outputs = {st_out};
        if (!st_csv.empty()) {
            std::ostringstream csv;
            write_stability_csv(csv, t);
            write_text(st_csv, csv.str());
            inv.outputs.push_back(st_csv);
        }
        inv.config = {{"R", st_R}, {"N", st_N}, {"noise", st_noise}};
        out << "wrote " << pts.size() << " series of " << st_R << " repetitions\n";
        write_manifest(manifest_for(st_out), inv, elapsed());
        return 0;
    }

    if (*cv) {
        inv.command = "converge";
        inv.seed = effective_seed();
        const auto p = load_params(cv_params);
        validate_market_point(cv_point);
        const auto c = convergence_analysis(p, cv_point, cv_ladder, cv_R, inv.seed);
        auto j = to_json(c);
        j["kind"] = "convergence";
        write_json(cv_out, j);
        inv.inputs = {cv_params};
        inv.outputs = {cv_out};
        if (!cv_csv.empty()) {
            std::ostringstream csv;
            write_convergence_csv(csv, c);
            write_text(cv_csv, csv.str());
            inv.outputs.push_back(cv_csv);
        }
        for (const auto &r : c.rungs) {
            out << std::left << std::setw(7) << r.shots << fmt(r.mean) << "  " << fmt(r.std_dev)
                << "\n";
        }
        out << "top-rung fluctuation " << fmt(100.0 * c.top_fluctuation(), 2) << "%\n";
        inv.config = {{"point", {cv_point.m, cv_point.T, cv_point.r, cv_point.sigma}},
                      {"ladder", cv_ladder},
                      {"R", cv_R}};
        write_manifest(manifest_for(cv_out), inv, elapsed());
        return 0;
    }

    if (*mi) {
        inv.command = "mitigate";
        inv.seed = effective_seed();
        const auto p = load_params(mi_params);
        const auto pts = load_points_or_benchmark(mi_points);
        const auto A = AssignmentMatrix::rigetti_ankaa3();
        const auto inverse =
            mi_inverse == "printed" ? AssignmentMatrix::kRigettiAnkaa3PrintedInverse : A.inverse();
        const auto s = mitigation_study(p, pts, A, inverse, mi_shots, inv.seed);
        auto j = to_json(s);
        j["kind"] = "mitigation";
        j["assignment_matrix"] = A.a;
        j["inverse"] = inverse;
        write_json(mi_out, j);
        inv.inputs = {mi_params};
        inv.outputs = {mi_out};
        inv.config = {{"shots", mi_shots}, {"inverse", mi_inverse}};
        out << "MSE raw " << fmt(s.mse_corrupted, 8) << "  mitigated " << fmt(s.mse_mitigated, 8)
            << "  reduction " << fmt(100.0 * s.reduction(), 1) << "%\n";
        write_manifest(manifest_for(mi_out), inv, elapsed());
        return 0;
    }

    if (*co) {
        inv.command = "compress";
        inv.seed = effective_seed();
        const auto p = load_params(co_params);
        if (p.ansatz.variant != Variant::Finqbit) {
            throw ValidationError("compress requires finqbit parameters");
        }
        const auto pts = load_points_or_benchmark(co_points);
        co_opt.jobs = jobs;
        const auto fp = FinqbitParams::from_flat(p.values);
        const auto res = compress_benchmark_suite(fp, pts, inv.seed, co_tol, co_opt);
        json arr = json::array();
        const fs::path dir(co_dir);
        for (std::size_t i = 0; i < res.size(); ++i) {
            const auto &r = res[i];
            const auto orig = dir / ("original_" + std::to_string(i) + ".qasm");
            const auto comp = dir / ("compressed_" + std::to_string(i) + ".qasm");
            write_text(orig, to_qasm(r.original));
            write_text(comp, to_qasm(r.compressed));
            inv.outputs.push_back(orig.string());
            inv.outputs.push_back(comp.string());
            auto pj = to_json(r.result);
            pj.erase("schema_version");
            pj["m"] = r.point.m;
            pj["T"] = r.point.T;
            pj["r"] = r.point.r;
            pj["sigma"] = r.point.sigma;
            pj["cnots_original"] = r.original.cnot_count();
            pj["cnots_compressed"] = r.compressed.cnot_count();
            pj["z_original"] = r.original_z;
            pj["z_compressed"] = r.compressed_z;
            arr.push_back(pj);
            out << "m=" << fmt(r.point.m, 2) << "  distance " << std::scientific
                << std::setprecision(2) << r.result.distance << std::defaultfloat
                << (r.result.converged ? "" : "  (not converged)") << "\n";
            if (!r.result.converged) {
                status = static_cast<int>(ExitCode::NonConvergence);
            }
        }
        const auto jpath = dir / "compression.json";
        write_json(jpath, {{"schema_version", 1}, {"kind", "compression"}, {"tol", co_tol},
                           {"points", arr}});
        inv.outputs.push_back(jpath.string());
        inv.inputs = {co_params};
        inv.config = {{"tol", co_tol}, {"restarts", co_opt.restarts}, {"iters", co_opt.max_iters}};
        write_manifest(dir / "manifest.json", inv, elapsed());
        if (status != 0) {
            err << "error: some fits stayed above tol " << co_tol << "\n";
        }
        return status;
    }

    if (*rp) {
        inv.command = "report";
        inv.seed = effective_seed();
        const auto text = build_report(rp_dir);
        const fs::path outp = rp_out.empty() ? fs::path(rp_dir) / "report.md" : fs::path(rp_out);
        write_text(outp, text);
        inv.inputs = {rp_dir};
        inv.outputs = {outp.string()};
        out << "wrote " << outp.string() << "\n";
        write_manifest(manifest_for(outp), inv, elapsed());
        return 0;
    }
    return 0;
}

} // namespace detail

/// Runs one command; never throws.
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    try {
        return detail::run_impl(args, out, err);
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const fs::filesystem_error &e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::Io);
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::Validation);
    }
}

} // namespace finqbit::cli
