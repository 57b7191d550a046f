#pragma once

// Alarm scoring against a known release day, threshold sweeps (AMOC curves)
// and the dataset-level harness used by the CLI.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "eigenevent/detector.hpp"
#include "eigenevent/error.hpp"

namespace eigenevent {

/// Days after a release during which an alarm counts as a detection.
inline constexpr int kReleaseWindow = 14;

/// 30-day months: the evaluation year spans 365 / 30 = 12.167 months.
inline constexpr double kDaysPerMonth = 30.0;

struct AlarmOutcome {
    std::size_t false_alarms = 0;
    double delay = kReleaseWindow;
    bool detected = false;

    bool operator==(const AlarmOutcome&) const = default;
};

/// Alarms on days release+1 .. release+window are true alarms, every other
/// alarm in [eval_start, eval_end] is false. The delay is the offset of the
/// first true alarm, or the full window when none was raised.
inline AlarmOutcome classify(std::span<const int> alarm_days, int release_day, int eval_start, int eval_end,
                             int window_len = kReleaseWindow) {
    AlarmOutcome out;
    out.delay = window_len;
    for (int day : alarm_days) {
        if (day < eval_start || day > eval_end) continue;
        if (day >= release_day + 1 && day <= release_day + window_len) {
            if (!out.detected) {
                out.detected = true;
                out.delay = day - release_day;
            }
        } else {
            ++out.false_alarms;
        }
    }
    return out;
}

struct AmocPoint {
    double threshold = 0.0;
    double fp_per_month = 0.0;
    double mean_delay = kReleaseWindow;
};

/// Thresholds lo, lo+step, ..., hi (inclusive, count rounded to the nearest
/// integer so 0.020:0.250:0.001 gives exactly 231 values).
inline std::vector<double> threshold_sweep(double lo, double hi, double step) {
    if (!(step > 0.0) || !(lo > 0.0) || !(hi < 1.0) || hi < lo)
        throw ConfigError("threshold sweep needs 0 < lo <= hi < 1 and step > 0");
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
    return out;
}

/// Parse "lo:hi:step".
inline std::vector<double> parse_threshold_sweep(const std::string& text) {
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
    if (b == std::string::npos) throw ConfigError("threshold sweep must look like lo:hi:step, got '" + text + "'");
    try {
        return threshold_sweep(std::stod(text.substr(0, a)), std::stod(text.substr(a + 1, b - a - 1)),
                               std::stod(text.substr(b + 1)));
    } catch (const std::logic_error&) {
        throw ConfigError("threshold sweep must look like lo:hi:step, got '" + text + "'");
    }
}

struct EvalConfig {
    int train_days = 365;
    int eval_days = 365;
    std::vector<double> thresholds = threshold_sweep(0.020, 0.250, 0.001);
    int window_len = kReleaseWindow;

    int eval_start() const { return train_days + 1; }
    int eval_end() const { return train_days + eval_days; }

    void validate() const {
        if (train_days < 0 || eval_days < 1) throw ConfigError("evaluation span must contain at least one day");
        if (thresholds.empty()) throw ConfigError("no thresholds");
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) throw ConfigError("thresholds must lie in (0,1)");
            if (i && !(thresholds[i] > thresholds[i - 1])) throw ConfigError("thresholds must be strictly increasing");
        }
        if (window_len != kReleaseWindow) throw ConfigError("the release window is fixed at 14 days");
    }
};

struct DayP {
    int day = 0;
    double p = 1.0;
};

inline std::vector<DayP> day_pvalues(std::span<const DetectionResult> results) {
    std::vector<DayP> out;
    out.reserve(results.size());
    for (const DetectionResult& r : results) out.push_back({r.day, r.p_value});
    return out;
}

/// One AMOC point per threshold: a day alarms when its p-value is strictly
/// below the threshold.
inline std::vector<AmocPoint> amoc(std::span<const DayP> p_per_day, int release_day, const EvalConfig& cfg) {
    std::vector<DayP> span_days;
    for (const DayP& d : p_per_day)
        if (d.day >= cfg.eval_start() && d.day <= cfg.eval_end()) span_days.push_back(d);
    std::sort(span_days.begin(), span_days.end(), [](const DayP& a, const DayP& b) { return a.day < b.day; });

    const double months = cfg.eval_days / kDaysPerMonth;
    std::vector<AmocPoint> out;
    out.reserve(cfg.thresholds.size());
    std::vector<int> alarms;
    for (double theta : cfg.thresholds) {
        alarms.clear();
        for (const DayP& d : span_days)
            if (d.p < theta) alarms.push_back(d.day);
        const AlarmOutcome o = classify(alarms, release_day, cfg.eval_start(), cfg.eval_end(), cfg.window_len);
        out.push_back({theta, static_cast<double>(o.false_alarms) / months, o.delay});
    }
    return out;
}

/// Pointwise mean of several curves over the same thresholds.
inline std::vector<AmocPoint> average_amoc(std::span<const std::vector<AmocPoint>> curves) {
    if (curves.empty()) return {};
    std::vector<AmocPoint> out(curves.front().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].threshold = curves.front()[i].threshold;
        double fp = 0.0, delay = 0.0;
        for (const auto& c : curves) {
            if (c.size() != out.size() || c[i].threshold != out[i].threshold)
                throw DataError("AMOC curves use different thresholds");
            fp += c[i].fp_per_month;
            delay += c[i].mean_delay;
        }
        out[i].fp_per_month = fp / static_cast<double>(curves.size());
        out[i].mean_delay = delay / static_cast<double>(curves.size());
    }
    return out;
}

struct AuamocResult {
    /// Trapezoidal area, or the mean delay when `degenerate`.
    double value = 0.0;
    double fp_min = 0.0;
    double fp_max = 0.0;
    /// Every point shares one false-alarm rate so no area exists.
    bool degenerate = false;
};

/// Area under mean_delay(fp_per_month) over the realized fp range. Points
/// sharing an fp value collapse to their mean delay first.
inline AuamocResult auamoc(std::span<const AmocPoint> points) {
    if (points.size() < 2) throw DataError("area under AMOC needs at least two points");
    std::map<double, std::pair<double, std::size_t>> by_fp;
    double delay_sum = 0.0;
    for (const AmocPoint& p : points) {
        auto& [sum, n] = by_fp[p.fp_per_month];
        sum += p.mean_delay;
        ++n;
        delay_sum += p.mean_delay;
    }
    AuamocResult out;
    out.fp_min = by_fp.begin()->first;
    out.fp_max = by_fp.rbegin()->first;
    if (by_fp.size() < 2) {
        out.degenerate = true;
        out.value = delay_sum / static_cast<double>(points.size());
        return out;
    }
    auto it = by_fp.begin();
    double x0 = it->first;
    double y0 = it->second.first / static_cast<double>(it->second.second);
    for (++it; it != by_fp.end(); ++it) {
        const double x1 = it->first;
        const double y1 = it->second.first / static_cast<double>(it->second.second);
        out.value += 0.5 * (y0 + y1) * (x1 - x0);
        x0 = x1;
        y0 = y1;
    }
    return out;
}

/// Mean false-alarm rate and delay over the sweep plus the area under the curve.
struct CurveSummary {
    double fp = 0.0;
    double delay = 0.0;
    AuamocResult area;
};

inline CurveSummary summarize_curve(std::span<const AmocPoint> points) {
    CurveSummary s;
    if (points.empty()) return s;
    for (const AmocPoint& p : points) {
        s.fp += p.fp_per_month;
        s.delay += p.mean_delay;
    }
    s.fp /= static_cast<double>(points.size());
    s.delay /= static_cast<double>(points.size());
    if (points.size() < 2) {
        s.area = {s.delay, s.fp, s.fp, true};
    } else {
        s.area = auamoc(points);
    }
    return s;
}

struct DatasetRun {
    std::string id;
    int release_day = 0;
    std::vector<DetectionResult> results;
    std::vector<AmocPoint> curve;
    CurveSummary summary;
};

inline DatasetRun evaluate_dataset(const Dataset& ds, const DetectorConfig& det_cfg, const EvalConfig& cfg) {
    if (!ds.release_day) throw ConfigError("dataset '" + ds.id + "' has no release day to score against");
    const int release = *ds.release_day;
    if (release < cfg.eval_start() || release > cfg.eval_end())
        throw ConfigError("dataset '" + ds.id + "' releases on day " + std::to_string(release) +
                          ", outside the evaluation span");
    DatasetRun run;
    run.id = ds.id;
    run.release_day = release;
    run.results = detect_stream(ds.windows, det_cfg);
    const auto days = day_pvalues(run.results);
    run.curve = amoc(days, release, cfg);
    run.summary = summarize_curve(run.curve);
    return run;
}

/// Run `fn(i)` for i in [0, n) on up to `workers` threads. The first
/// exception (lowest index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct EvaluationReport {
    std::vector<DatasetRun> runs;
    std::vector<AmocPoint> curve;
    CurveSummary summary;
};

/// Score every dataset independently and average the curves pointwise.
/// Aggregates do not depend on `workers`.
inline EvaluationReport evaluate(std::span<const Dataset> datasets, const DetectorConfig& det_cfg, const EvalConfig& cfg,
                                 std::size_t workers = 1) {
    cfg.validate();
    if (datasets.empty()) throw ConfigError("no datasets to evaluate");
    EvaluationReport rep;
    rep.runs.resize(datasets.size());
    parallel_for(datasets.size(), workers, [&](std::size_t i) { rep.runs[i] = evaluate_dataset(datasets[i], det_cfg, cfg); });
    std::vector<std::vector<AmocPoint>> curves;
    curves.reserve(rep.runs.size());
    for (const DatasetRun& r : rep.runs) curves.push_back(r.curve);
    rep.curve = average_amoc(curves);
    rep.summary = summarize_curve(rep.curve);
    return rep;
}

/// One evaluation per baseline strategy, all other settings shared.
inline std::map<BaselineMode, EvaluationReport> compare_baselines(std::span<const Dataset> datasets,
                                                                  const DetectorConfig& det_cfg, const EvalConfig& cfg,
                                                                  std::span<const BaselineMode> modes,
                                                                  std::size_t workers = 1) {
    if (modes.empty()) throw ConfigError("no baseline modes to compare");
    std::map<BaselineMode, EvaluationReport> out;
    for (BaselineMode m : modes) {
        DetectorConfig c = det_cfg;
        c.baseline_mode = m;
        out.emplace(m, evaluate(datasets, c, cfg, workers));
    }
    return out;
}

}  // namespace eigenevent
