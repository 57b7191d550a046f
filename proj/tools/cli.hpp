#pragma once

// Command-line front end: simulate, detect, evaluate, compare-baselines.
// Exit codes: 0 success, 1 data error, 2 configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eigenevent/eigenevent.hpp"

namespace eigenevent::cli {

namespace fs = std::filesystem;

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Verbosity from EIGENEVENT_LOG (error, warn, info, debug); warn by default.
inline LogLevel log_level() {
    const char* v = std::getenv("EIGENEVENT_LOG");
    if (!v) return LogLevel::warn;
    const std::string s(v);
    if (s == "error") return LogLevel::error;
    if (s == "info") return LogLevel::info;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

inline void log(LogLevel level, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (level <= log_level()) std::cerr << "[eigenevent " << names[static_cast<int>(level)] << "] " << msg << '\n';
}

struct DetectorFlags {
    std::string indicators = "eigenvalue,spatial";
    std::size_t min_history = 5;
    std::string baseline_mode = "dynamic";
    std::size_t fixed_days = 7;

    void add_to(CLI::App* app) {
        app->add_option("--indicators", indicators, "Comma list of eigenvalue, spatial, feature")->capture_default_str();
        app->add_option("--min-history", min_history, "Past distances needed before p-values are emitted")
            ->capture_default_str();
        app->add_option("--baseline-mode", baseline_mode, "dynamic, fixed-history or env-match-only")
            ->capture_default_str();
        app->add_option("--fixed-days", fixed_days, "Window length of the fixed-history baseline")->capture_default_str();
    }

    DetectorConfig resolve() const {
        DetectorConfig c;
        c.indicators = IndicatorConfig::parse(indicators);
        c.min_history = min_history;
        c.baseline_mode = parse_baseline_mode(baseline_mode);
        c.fixed_history_days = fixed_days;
        return c;
    }
};

struct EvalFlags {
    std::string thresholds = "0.020:0.250:0.001";
    int train_days = 365;
    int eval_days = 365;
    std::size_t workers = 1;

    void add_to(CLI::App* app) {
        app->add_option("--thresholds", thresholds, "p-value sweep lo:hi:step")->capture_default_str();
        app->add_option("--train-days", train_days)->capture_default_str();
        app->add_option("--eval-days", eval_days)->capture_default_str();
        app->add_option("--workers", workers, "Datasets processed in parallel")->capture_default_str();
    }

    EvalConfig resolve() const {
        EvalConfig c;
        c.thresholds = parse_threshold_sweep(thresholds);
        c.train_days = train_days;
        c.eval_days = eval_days;
        c.validate();
        return c;
    }
};

inline std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    return out;
}

inline nlohmann::json summary_json(const EvaluationReport& rep, const EvalConfig& ec, const DetectorConfig& dc,
                                   std::optional<double> runtime) {
    nlohmann::json j;
    j["fp"] = rep.summary.fp;
    j["delay"] = rep.summary.delay;
    j["auamoc"] = rep.summary.area.value;
    j["auamoc_fp_range"] = {rep.summary.area.fp_min, rep.summary.area.fp_max};
    j["auamoc_degenerate"] = rep.summary.area.degenerate;
    j["datasets"] = rep.runs.size();
    j["thresholds"] = ec.thresholds.size();
    j["baseline_mode"] = to_string(dc.baseline_mode);
    j["indicators"] = dc.indicators.str();
    if (runtime) j["runtime_seconds"] = *runtime;
    return j;
}

inline void write_report(const fs::path& dir, const EvaluationReport& rep, const EvalConfig& ec,
                         const DetectorConfig& dc, std::optional<double> runtime) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "amoc.csv");
        io::write_amoc_csv(out, rep.curve);
    }
    {
        auto out = open_out(dir / "summary.json");
        out << summary_json(rep, ec, dc, runtime).dump(2) << '\n';
    }
    auto out = open_out(dir / "datasets.csv");
    out << "dataset_id,release_day,fp,delay,auamoc\n";
    for (const DatasetRun& r : rep.runs)
        out << r.id << ',' << r.release_day << ',' << io::format_double(r.summary.fp) << ','
            << io::format_double(r.summary.delay) << ',' << io::format_double(r.summary.area.value) << '\n';
}

/// Published reference row the CityBN benchmark run is checked against.
struct ReferenceRow {
    double fp = 1.866439;
    double delay = 2.839827;
    double auamoc = 8.027842;
};

struct ReferenceCheck {
    bool fp_ok = false;
    bool delay_ok = false;
    bool auamoc_ok = false;
    bool all() const { return fp_ok && delay_ok && auamoc_ok; }
};

/// fp within 15 %, delay within half a day, AUAMOC within 10 %.
inline ReferenceCheck check_reference(const CurveSummary& s, const ReferenceRow& ref = {}) {
    return {std::abs(s.fp - ref.fp) <= 0.15 * ref.fp, std::abs(s.delay - ref.delay) <= 0.5,
            std::abs(s.area.value - ref.auamoc) <= 0.10 * ref.auamoc};
}

inline Schema load_schema(const std::string& path) {
    if (path.empty()) return Schema::citybn();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schema " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("schema " + path + ": " + e.what());
    }
    return schema_from_json(j);
}

inline int run(int argc, const char* const* argv) {
    CLI::App app{"Eigenspace-matching event detection for spatiotemporal count streams"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");
    bool dump_config = false;
    app.add_flag("--dump-config", dump_config, "Print the resolved configuration and exit")->configurable(false);
    std::string schema_path;
    app.add_option("--schema", schema_path, "Schema JSON (default: 9-region CityBN layout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Write synthetic datasets and truth.csv");
    int n_datasets = 20, n_days = 730, release_from = 366;
    std::uint64_t seed = 7, model_seed = 2013;
    double peak = 5.0, noise = 0.1, env_effect = 0.25, base_volume = 40.0;
    std::size_t affected = 2;
    std::string sim_out;
    sim->add_option("--datasets", n_datasets)->capture_default_str();
    sim->add_option("--days", n_days)->capture_default_str();
    sim->add_option("--seed", seed)->capture_default_str();
    sim->add_option("--model-seed", model_seed, "Seed of the shared rate model")->capture_default_str();
    sim->add_option("--peak", peak, "Peak outbreak multiplier")->capture_default_str();
    sim->add_option("--affected-regions", affected)->capture_default_str();
    sim->add_option("--release-from", release_from, "Earliest release day")->capture_default_str();
    sim->add_option("--noise", noise, "Coefficient of variation of day-level volume noise")->capture_default_str();
    sim->add_option("--env-effect", env_effect, "Spread of environmental effects")->capture_default_str();
    sim->add_option("--base-volume", base_volume, "Mean records per region per day")->capture_default_str();
    sim->add_option("--out", sim_out, "Output directory")->required();

    // detect
    auto* det = app.add_subcommand("detect", "Run the detector over one dataset");
    std::string det_input, det_env, det_out;
    DetectorFlags det_flags;
    det->add_option("--input", det_input, "Window CSV, or record CSV together with --env")->required()->check(CLI::ExistingFile);
    det->add_option("--env", det_env, "Environment CSV for record input")->check(CLI::ExistingFile);
    det->add_option("--out", det_out, "Output CSV (default: stdout)");
    det_flags.add_to(det);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Sweep thresholds across datasets and score AMOC");
    std::string ev_data, ev_out, citybn_dir;
    bool timing = false;
    DetectorFlags ev_det;
    EvalFlags ev_flags;
    ev->add_option("--data-dir", ev_data, "Directory with truth.csv and dataset files");
    ev->add_option("--citybn-dir", citybn_dir, "CityBN benchmark directory; also checks the published reference row");
    ev->add_option("--out", ev_out, "Output directory")->required();
    ev->add_flag("--timing", timing, "Add runtime_seconds to summary.json");
    ev_det.add_to(ev);
    ev_flags.add_to(ev);

    // compare-baselines
    auto* cmp = app.add_subcommand("compare-baselines", "Evaluate each baseline strategy side by side");
    std::string cmp_data, cmp_out, cmp_modes = "dynamic,fixed-history,env-match-only";
    DetectorFlags cmp_det;
    EvalFlags cmp_flags;
    cmp->add_option("--data-dir", cmp_data)->required();
    cmp->add_option("--out", cmp_out, "Output directory")->required();
    cmp->add_option("--modes", cmp_modes, "Comma list of baseline modes")->capture_default_str();
    cmp_det.add_to(cmp);
    cmp_flags.add_to(cmp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (dump_config) {
        std::cout << app.config_to_str(true, true);
        return 0;
    }

    try {
        const Schema schema = load_schema(schema_path);

        if (*sim) {
            SuiteConfig suite;
            suite.base.schema = schema;
            suite.base.n_days = n_days;
            suite.base.seed = seed;
            suite.base.model_seed = model_seed;
            suite.base.noise_level = noise;
            suite.base.env_effect = env_effect;
            suite.base.base_volume = base_volume;
            suite.n_datasets = n_datasets;
            suite.release_from = release_from;
            suite.peak = peak;
            suite.affected_regions = affected;
            const fs::path dir(sim_out);
            fs::create_directories(dir);
            std::vector<std::pair<std::string, int>> truth;
            nlohmann::json members = nlohmann::json::array();
            for (int i = 0; i < n_datasets; ++i) {
                const SimConfig cfg = suite_member(suite, i);
                const SimDataset ds = generate(cfg);
                const std::string id = dataset_id(i);
                {
                    auto out = open_out(io::windows_path(dir, id));
                    io::write_window_csv(out, ds.windows, schema);
                }
                {
                    auto out = open_out(io::env_path(dir, id));
                    io::write_env_csv(out, ds.windows, schema);
                }
                truth.emplace_back(id, *ds.release_day);
                members.push_back({{"dataset_id", id},
                                   {"release_day", *ds.release_day},
                                   {"regions", cfg.release.regions},
                                   {"columns", cfg.release.columns},
                                   {"multipliers", cfg.release.multipliers},
                                   {"seed", cfg.seed}});
                log(LogLevel::info, "wrote " + id);
            }
            {
                auto out = open_out(dir / "truth.csv");
                io::write_truth_csv(out, truth);
            }
            nlohmann::json meta{{"seed", seed},           {"model_seed", model_seed}, {"days", n_days},
                                {"noise_level", noise},   {"env_effect", env_effect}, {"base_volume", base_volume},
                                {"peak", peak},           {"affected_regions", affected},
                                {"release_from", release_from}, {"schema", schema_to_json(schema)},
                                {"datasets", members}};
            auto out = open_out(dir / "simulation.json");
            out << meta.dump(2) << '\n';
            return 0;
        }

        if (*det) {
            const DetectorConfig dc = det_flags.resolve();
            std::vector<DailyWindow> windows;
            if (det_env.empty()) {
                windows = io::read_window_csv(det_input, schema);
            } else {
                windows = io::windows_from_records(io::read_records_csv(det_input, schema),
                                                   io::read_env_csv(det_env, schema), schema);
            }
            const auto results = detect_stream(windows, dc);
            if (det_out.empty()) {
                io::write_detections_csv(std::cout, results);
            } else {
                auto out = open_out(det_out);
                io::write_detections_csv(out, results);
            }
            log(LogLevel::info, "processed " + std::to_string(results.size()) + " days");
            return 0;
        }

        if (*ev) {
            if (ev_data.empty() == citybn_dir.empty()) throw ConfigError("give exactly one of --data-dir or --citybn-dir");
            const DetectorConfig dc = ev_det.resolve();
            const EvalConfig ec = ev_flags.resolve();
            const auto datasets = io::load_datasets(citybn_dir.empty() ? ev_data : citybn_dir, schema);
            const auto t0 = std::chrono::steady_clock::now();
            const EvaluationReport rep = evaluate(datasets, dc, ec, ev_flags.workers);
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            log(LogLevel::info, "evaluated " + std::to_string(datasets.size()) + " datasets in " +
                                    std::to_string(seconds) + " s");
            write_report(ev_out, rep, ec, dc, timing ? std::optional<double>(seconds) : std::nullopt);
            std::cout << "fp/month " << io::format_double(rep.summary.fp) << "  delay "
                      << io::format_double(rep.summary.delay) << "  auamoc " << io::format_double(rep.summary.area.value)
                      << '\n';
            if (!citybn_dir.empty()) {
                const ReferenceCheck c = check_reference(rep.summary);
                std::cout << "reference fp " << (c.fp_ok ? "PASS" : "FAIL") << ", delay " << (c.delay_ok ? "PASS" : "FAIL")
                          << ", auamoc " << (c.auamoc_ok ? "PASS" : "FAIL") << '\n';
            }
            return 0;
        }

        if (*cmp) {
            const DetectorConfig dc = cmp_det.resolve();
            const EvalConfig ec = cmp_flags.resolve();
            std::vector<BaselineMode> modes;
            std::istringstream in(cmp_modes);
            for (std::string m; std::getline(in, m, ',');) modes.push_back(parse_baseline_mode(m));
            const auto datasets = io::load_datasets(cmp_data, schema);
            const auto reports = compare_baselines(datasets, dc, ec, modes, cmp_flags.workers);

            const fs::path dir(cmp_out);
            nlohmann::json all;
            for (const auto& [mode, rep] : reports) {
                DetectorConfig mc = dc;
                mc.baseline_mode = mode;
                write_report(dir / to_string(mode), rep, ec, mc, std::nullopt);
                all[to_string(mode)] = summary_json(rep, ec, mc, std::nullopt);
            }
            {
                auto out = open_out(dir / "compare.json");
                out << all.dump(2) << '\n';
            }
            auto out = open_out(dir / "compare.csv");
            out << "dataset_id";
            for (const auto& [mode, rep] : reports) out << ',' << to_string(mode);
            out << '\n';
            for (std::size_t i = 0; i < datasets.size(); ++i) {
                out << datasets[i].id;
                for (const auto& [mode, rep] : reports) out << ',' << io::format_double(rep.runs[i].summary.area.value);
                out << '\n';
            }
            for (const auto& [mode, rep] : reports)
                std::cout << to_string(mode) << ": fp/month " << io::format_double(rep.summary.fp) << "  delay "
                          << io::format_double(rep.summary.delay) << "  auamoc "
                          << io::format_double(rep.summary.area.value) << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        log(LogLevel::error, e.what());
        return 2;
    } catch (const Error& e) {
        log(LogLevel::error, e.what());
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        log(LogLevel::error, e.what());
        return 1;
    }
    return 2;
}

}  // namespace eigenevent::cli
