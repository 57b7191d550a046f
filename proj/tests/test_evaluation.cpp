#include <gtest/gtest.h>

#include <random>

#include "eigenevent/evaluation.hpp"
#include "eigenevent/simulator.hpp"
#include "fixtures.hpp"

using namespace eigenevent;

namespace {

EvalConfig small_eval(int train, int eval) {
    EvalConfig c;
    c.train_days = train;
    c.eval_days = eval;
    return c;
}

std::vector<DayP> flat_days(int n, double p) {
    std::vector<DayP> out;
    for (int d = 1; d <= n; ++d) out.push_back({d, p});
    return out;
}

std::vector<Dataset> small_suite(int n, int days) {
    SuiteConfig s;
    s.base.n_days = days;
    s.n_datasets = n;
    s.release_from = days / 2 + 1;
    return simulate_suite(s);
}

}  // namespace

TEST(Classify, DetectedOnFirstDay) {
    const std::vector<int> a{101};
    const auto o = classify(a, 100, 1, 365);
    EXPECT_EQ(o.false_alarms, 0u);
    EXPECT_EQ(o.delay, 1.0);
    EXPECT_TRUE(o.detected);
}

TEST(Classify, FalseAlarmsThenDetection) {
    const std::vector<int> a{10, 50, 101};
    const auto o = classify(a, 100, 1, 365);
    EXPECT_EQ(o.false_alarms, 2u);
    EXPECT_EQ(o.delay, 1.0);
}

TEST(Classify, MissGivesFullWindow) {
    const std::vector<int> a{10, 100, 115};
    const auto o = classify(a, 100, 1, 365);
    EXPECT_FALSE(o.detected);
    EXPECT_EQ(o.delay, 14.0);
    EXPECT_EQ(o.false_alarms, 3u);
}

TEST(Classify, LaterTrueAlarmsAreNotFalse) {
    const std::vector<int> a{103, 104, 114};
    const auto o = classify(a, 100, 1, 365);
    EXPECT_EQ(o.false_alarms, 0u);
    EXPECT_EQ(o.delay, 3.0);
}

TEST(Classify, OutsideSpanIgnored) {
    const std::vector<int> a{5, 400};
    EXPECT_EQ(classify(a, 100, 10, 365).false_alarms, 0u);
}

TEST(Classify, CountingInvariant) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> a;
        for (int d = 1; d <= 60; ++d)
            if (rng() % 6 == 0) a.push_back(d);
        const auto o = classify(a, 30, 1, 60);
        const std::size_t in_window = static_cast<std::size_t>(std::count_if(a.begin(), a.end(), [](int d) { return d > 30 && d <= 44; }));
        EXPECT_EQ(o.false_alarms + in_window, a.size());
        EXPECT_EQ(o.detected, in_window > 0);
        EXPECT_GE(o.delay, 1.0);
        EXPECT_LE(o.delay, 14.0);
    }
}

TEST(Sweep, DefaultHas231Thresholds) {
    const auto t = threshold_sweep(0.020, 0.250, 0.001);
    ASSERT_EQ(t.size(), 231u);
    EXPECT_DOUBLE_EQ(t.front(), 0.020);
    EXPECT_NEAR(t.back(), 0.250, 1e-12);
    EXPECT_EQ(parse_threshold_sweep("0.020:0.250:0.001").size(), 231u);
    EXPECT_EQ(EvalConfig{}.thresholds.size(), 231u);
    EXPECT_THROW(parse_threshold_sweep("0.3:0.2:0.01"), ConfigError);
    EXPECT_THROW(parse_threshold_sweep("0.1:0.2"), ConfigError);
    EXPECT_THROW(parse_threshold_sweep("a:b:c"), ConfigError);
    EXPECT_THROW(threshold_sweep(0.0, 0.2, 0.01), ConfigError);
}

TEST(Amoc, NeverAlarming) {
    const auto cfg = small_eval(365, 365);
    const auto curve = amoc(flat_days(730, 1.0), 400, cfg);
    ASSERT_EQ(curve.size(), 231u);
    for (const auto& p : curve) {
        EXPECT_EQ(p.fp_per_month, 0.0);
        EXPECT_EQ(p.mean_delay, 14.0);
    }
    const auto s = summarize_curve(curve);
    EXPECT_TRUE(s.area.degenerate);
    EXPECT_EQ(s.area.value, 14.0);
}

TEST(Amoc, PerfectDetector) {
    auto days = flat_days(730, 0.9);
    days[400].p = 1e-9;  // day 401
    const auto curve = amoc(days, 400, small_eval(365, 365));
    for (const auto& p : curve) {
        EXPECT_EQ(p.fp_per_month, 0.0);
        EXPECT_EQ(p.mean_delay, 1.0);
    }
}

TEST(Amoc, FalseAlarmRateUsesThirtyDayMonths) {
    auto days = flat_days(730, 0.9);
    days[369].p = 0.01;
    days[379].p = 0.01;
    const auto curve = amoc(days, 600, small_eval(365, 365));
    EXPECT_DOUBLE_EQ(curve.front().fp_per_month, 2.0 / (365.0 / 30.0));
}

TEST(Amoc, MonotoneAndMatchesBruteForce) {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> u(0.0, 0.4);
    const auto cfg = small_eval(100, 200);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<DayP> days;
        for (int d = 1; d <= 300; ++d) days.push_back({d, u(rng)});
        const int release = 150 + trial;
        const auto curve = amoc(days, release, cfg);
        ASSERT_EQ(curve.size(), 231u);
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const double th = curve[i].threshold;
            int fp = 0;
            double delay = 14;
            for (const auto& d : days) {
                if (d.day < 101 || !(d.p < th)) continue;
                if (d.day > release && d.day <= release + 14) delay = std::min(delay, static_cast<double>(d.day - release));
                else ++fp;
            }
            EXPECT_DOUBLE_EQ(curve[i].fp_per_month, fp / (200.0 / 30.0));
            EXPECT_EQ(curve[i].mean_delay, delay);
            if (i) {
                EXPECT_GE(curve[i].fp_per_month, curve[i - 1].fp_per_month);
                EXPECT_LE(curve[i].mean_delay, curve[i - 1].mean_delay);
            }
        }
    }
}

TEST(Auamoc, Trapezoid) {
    const std::vector<AmocPoint> pts{{0.02, 0.0, 10.0}, {0.03, 1.0, 6.0}, {0.04, 3.0, 2.0}};
    const auto a = auamoc(pts);
    EXPECT_DOUBLE_EQ(a.value, 8.0 + 8.0);
    EXPECT_EQ(a.fp_min, 0.0);
    EXPECT_EQ(a.fp_max, 3.0);
    EXPECT_FALSE(a.degenerate);
}

TEST(Auamoc, DuplicateFpCollapsesToMean) {
    const std::vector<AmocPoint> a{{0.02, 0.0, 10.0}, {0.03, 2.0, 4.0}};
    const std::vector<AmocPoint> b{{0.02, 0.0, 12.0}, {0.021, 0.0, 8.0}, {0.03, 2.0, 4.0}};
    EXPECT_DOUBLE_EQ(auamoc(a).value, 14.0);
    EXPECT_DOUBLE_EQ(auamoc(b).value, 14.0);
}

TEST(Auamoc, SinglePointRejected) {
    const std::vector<AmocPoint> one{{0.02, 1.0, 3.0}};
    EXPECT_THROW(auamoc(one), DataError);
    EXPECT_TRUE(summarize_curve(one).area.degenerate);
}

TEST(Auamoc, AveragedCurves) {
    const std::vector<std::vector<AmocPoint>> curves{{{0.1, 0.0, 10.0}, {0.2, 2.0, 6.0}}, {{0.1, 2.0, 4.0}, {0.2, 4.0, 2.0}}};
    const auto avg = average_amoc(curves);
    EXPECT_EQ(avg[0].fp_per_month, 1.0);
    EXPECT_EQ(avg[0].mean_delay, 7.0);
    EXPECT_EQ(avg[1].fp_per_month, 3.0);
    EXPECT_EQ(avg[1].mean_delay, 4.0);
    const std::vector<std::vector<AmocPoint>> bad{{{0.1, 0.0, 1.0}}, {{0.2, 0.0, 1.0}}};
    EXPECT_THROW(average_amoc(bad), DataError);
}

TEST(Evaluate, WorkerCountDoesNotChangeResults) {
    const auto ds = small_suite(4, 200);
    const auto cfg = small_eval(100, 100);
    const auto a = evaluate(ds, {}, cfg, 1);
    const auto b = evaluate(ds, {}, cfg, 3);
    ASSERT_EQ(a.curve.size(), 231u);
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
        EXPECT_EQ(a.curve[i].fp_per_month, b.curve[i].fp_per_month);
        EXPECT_EQ(a.curve[i].mean_delay, b.curve[i].mean_delay);
    }
    EXPECT_EQ(a.summary.area.value, b.summary.area.value);
    for (std::size_t i = 0; i < a.runs.size(); ++i) EXPECT_EQ(a.runs[i].id, b.runs[i].id);
}

TEST(Evaluate, RejectsBadDatasets) {
    auto ds = small_suite(1, 200);
    const auto cfg = small_eval(100, 100);
    ds[0].release_day = 50;
    EXPECT_THROW(evaluate(ds, {}, cfg), ConfigError);
    ds[0].release_day.reset();
    EXPECT_THROW(evaluate(ds, {}, cfg), ConfigError);
    EXPECT_THROW(evaluate(std::vector<Dataset>{}, {}, cfg), ConfigError);
}

TEST(Evaluate, ErrorsFromWorkersPropagate) {
    std::vector<int> seen(8, 0);
    EXPECT_THROW(parallel_for(8, 3,
                              [&](std::size_t i) {
                                  seen[i] = 1;
                                  if (i == 5) throw DataError("boom");
                              }),
                 DataError);
    for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(CompareBaselines, SingleSettingDynamicEqualsEnvMatch) {
    auto stream = fixtures::quiet_stream();
    for (int d = 41; d <= 80; ++d) stream.push_back({d, stream[0].env, fixtures::base_window() * (1.0 + 0.02 * std::sin(d))});
    const std::vector<Dataset> ds{{"one", stream, 60}};
    EvalConfig cfg = small_eval(40, 40);
    const std::vector<BaselineMode> modes{BaselineMode::dynamic, BaselineMode::env_match_only, BaselineMode::fixed_history};
    const auto rep = compare_baselines(ds, {}, cfg, modes);
    ASSERT_EQ(rep.size(), 3u);
    const auto& dyn = rep.at(BaselineMode::dynamic);
    const auto& em = rep.at(BaselineMode::env_match_only);
    for (std::size_t i = 0; i < dyn.curve.size(); ++i) {
        EXPECT_EQ(dyn.curve[i].fp_per_month, em.curve[i].fp_per_month);
        EXPECT_EQ(dyn.curve[i].mean_delay, em.curve[i].mean_delay);
    }
    EXPECT_THROW(compare_baselines(ds, {}, cfg, std::vector<BaselineMode>{}), ConfigError);
}
