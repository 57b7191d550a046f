#include <gtest/gtest.h>

#include <random>

#include "eigenevent/detector.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace eigenevent;

namespace {

EigenSummary summary_of(double lambda, Vector s, Vector f) { return {lambda, std::move(s), std::move(f), std::nullopt, false}; }

Vector vec(std::initializer_list<double> x) {
    Vector v(static_cast<Eigen::Index>(x.size()));
    Eigen::Index i = 0;
    for (double d : x) v[i++] = d;
    return v;
}

std::size_t argmin_indicator(const DetectionResult& r) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 2; ++i)
        if (r.components[i].p < r.components[best].p) best = i;
    return best;
}

}  // namespace

TEST(Distances, IdenticalSummaries) {
    const auto s = summary_of(3.0, vec({0.6, 0.8}), vec({1, 0, 0}));
    const auto d = eigen_distances(s, s);
    EXPECT_EQ(d.d1, 1.0);
    EXPECT_EQ(d.d2, 0.0);
    EXPECT_EQ(d.d3, 0.0);
}

TEST(Distances, DoubledEigenvalue) {
    const auto b = summary_of(2.0, vec({1, 0}), vec({0, 1}));
    const auto w = summary_of(4.0, vec({1, 0}), vec({0, 1}));
    EXPECT_EQ(eigen_distances(w, b).d1, 2.0);
}

TEST(Distances, OrthogonalVectors) {
    const auto b = summary_of(1.0, vec({1, 0}), vec({1, 0}));
    const auto w = summary_of(1.0, vec({0, 1}), vec({1, 0}));
    EXPECT_NEAR(eigen_distances(w, b).d2, std::sqrt(2.0), 1e-15);
}

TEST(Distances, ZeroBaselineThrows) {
    const auto b = summary_of(0.0, vec({1, 0}), vec({1, 0}));
    EXPECT_THROW(eigen_distances(b, b), DegenerateBaseline);
}

TEST(ZScore, Examples) {
    const std::vector<double> h{1, 2, 3};
    EXPECT_DOUBLE_EQ(zscore(4, h), 2.0);
    EXPECT_DOUBLE_EQ(zscore(2, h), 0.0);
    const std::vector<double> flat{5, 5, 5};
    EXPECT_EQ(zscore(5, flat), 0.0);
    EXPECT_EQ(zscore(6, flat), std::numeric_limits<double>::infinity());
    EXPECT_EQ(zscore(4, flat), -std::numeric_limits<double>::infinity());
    EXPECT_THROW(zscore(1, std::vector<double>{1.0}), InsufficientHistory);
    EXPECT_THROW(zscore(1, h, 5), InsufficientHistory);
}

TEST(PValue, Examples) {
    EXPECT_NEAR(pvalue(0.0), 0.5, 1e-12);
    EXPECT_NEAR(pvalue(1.6448536269514722), 0.05, 1e-12);
    EXPECT_NEAR(pvalue(-1.6448536269514722), 0.95, 1e-12);
    EXPECT_EQ(pvalue(std::numeric_limits<double>::infinity()), 0.0);
    EXPECT_EQ(pvalue(-std::numeric_limits<double>::infinity()), 1.0);
}

TEST(PValue, MatchesQuadratureAndIsMonotone) {
    double prev = 1.0;
    for (int i = -60; i <= 60; ++i) {
        const double z = i * 0.1;
        const double p = pvalue(z);
        EXPECT_NEAR(p, oracle::upper_tail(z), 1e-10) << z;
        EXPECT_LE(p, prev);
        prev = p;
    }
}

TEST(Indicators, ParseAndValidate) {
    const auto c = IndicatorConfig::parse("spatial,feature");
    EXPECT_FALSE(c.eigenvalue);
    EXPECT_TRUE(c.spatial);
    EXPECT_TRUE(c.feature);
    EXPECT_EQ(c.str(), "spatial,feature");
    EXPECT_EQ(IndicatorConfig{}.str(), "eigenvalue,spatial");
    EXPECT_THROW(IndicatorConfig::parse("time"), ConfigError);
    EXPECT_THROW(Detector(DetectorConfig{IndicatorConfig{false, false, false}}), ConfigError);
}

TEST(Detector, FirstDayIsColdStart) {
    Detector det;
    const auto r = det.step(fixtures::quiet_stream().front());
    EXPECT_TRUE(r.cold_start);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.baseline_size, 1u);
    EXPECT_NEAR(r.component(Indicator::eigenvalue).distance, 1.0, 1e-12);
    EXPECT_FALSE(r.component(Indicator::eigenvalue).available);
}

TEST(Detector, ColdUntilMinHistory) {
    const auto res = detect_stream(fixtures::quiet_stream());
    // Distances are kept from day 2 on, so day 7 is the first with five past values.
    for (std::size_t i = 0; i < 6; ++i) EXPECT_TRUE(res[i].cold_start) << i;
    EXPECT_FALSE(res[6].cold_start);
}

TEST(Detector, RejectsOutOfOrderDays) {
    auto s = fixtures::quiet_stream();
    Detector det;
    det.step(s[1]);
    EXPECT_THROW(det.step(s[0]), DataError);
}

TEST(Detector, ScaleAnomalyIsAnEigenvalueEvent) {
    const auto res = detect_stream(fixtures::scale_anomaly_stream());
    const auto& last = res.back();
    EXPECT_LT(last.component(Indicator::spatial).distance, 1e-6);
    EXPECT_EQ(argmin_indicator(last), 0u);
    EXPECT_LT(last.component(Indicator::eigenvalue).p, 1e-6);
    for (std::size_t i = 0; i + 1 < res.size(); ++i) EXPECT_GT(res[i].p_value, last.p_value);
}

TEST(Detector, MassShiftIsASpatialEvent) {
    const auto res = detect_stream(fixtures::mass_shift_stream());
    const auto& last = res.back();
    EXPECT_EQ(argmin_indicator(last), 1u);
    EXPECT_GT(last.component(Indicator::eigenvalue).p, last.component(Indicator::spatial).p);
    for (std::size_t i = 0; i + 1 < res.size(); ++i) EXPECT_GT(res[i].p_value, last.p_value);
}

TEST(Detector, MatchesReferenceImplementation) {
    for (const auto& stream : {fixtures::scale_anomaly_stream(), fixtures::mass_shift_stream()}) {
        const auto got = detect_stream(stream);
        const auto want = oracle::ReferenceDetector{}.run(stream);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].cold_start, want[i].cold);
            EXPECT_NEAR(got[i].p_value, want[i].p, 1e-9) << "day " << got[i].day;
            EXPECT_NEAR(got[i].component(Indicator::eigenvalue).distance, want[i].d[0], 1e-9);
        }
    }
}

TEST(Detector, MatchesReferenceOnRandomSettings) {
    std::mt19937_64 rng(51);
    std::vector<DailyWindow> stream;
    for (int d = 1; d <= 45; ++d) {
        const EnvSetting e{{rng() % 3, 0, 0, 0}};
        stream.push_back({d, e, oracle::random_matrix(5, 6, rng, 5.0, 15.0)});
    }
    const auto got = detect_stream(stream);
    const auto want = oracle::ReferenceDetector{}.run(stream);
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].cold_start, want[i].cold) << i;
        EXPECT_NEAR(got[i].p_value, want[i].p, 1e-8) << i;
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(got[i].components[k].distance, want[i].d[k], 1e-7);
    }
}

TEST(Detector, ScaleCovariance) {
    auto stream = fixtures::mass_shift_stream();
    auto scaled = stream;
    for (auto& w : scaled) w.counts *= 3.0;
    const auto a = detect_stream(stream);
    const auto b = detect_stream(scaled);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a[i].p_value, b[i].p_value, 1e-9);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a[i].components[k].distance, b[i].components[k].distance, 1e-9);
    }
}

TEST(Detector, FusedIsMinimumOfEnabledComponents) {
    DetectorConfig cfg;
    cfg.indicators = IndicatorConfig{true, true, true};
    for (const auto& r : detect_stream(fixtures::mass_shift_stream(), cfg)) {
        if (r.cold_start) continue;
        double m = 1.0;
        for (const auto& c : r.components) {
            EXPECT_LE(r.p_value, c.p);
            m = std::min(m, c.p);
        }
        EXPECT_EQ(r.p_value, m);
    }
}

TEST(Detector, UnseenSettingsAreNotKept) {
    std::vector<DailyWindow> stream = fixtures::quiet_stream();
    for (std::size_t i = 0; i < stream.size(); ++i) stream[i].env.levels[0] = i % 2 == 0 ? 0 : 1;
    stream[20].env.levels[1] = 2;
    Detector det;
    for (const auto& w : stream) det.step(w);
    // Day 1 has no earlier window and days 2 and 21 are first sightings.
    EXPECT_EQ(det.distances(Indicator::eigenvalue).size(), stream.size() - 3);
}

TEST(Detector, EnvMatchOnlyColdOnUnseenSetting) {
    std::vector<DailyWindow> stream = fixtures::quiet_stream();
    stream.back().env.levels[2] = 1;
    DetectorConfig cfg;
    cfg.baseline_mode = BaselineMode::env_match_only;
    const auto em = detect_stream(stream, cfg);
    EXPECT_TRUE(em.back().cold_start);
    EXPECT_EQ(em.back().baseline_size, 0u);
    const auto dyn = detect_stream(stream);
    EXPECT_FALSE(dyn.back().cold_start);
}

TEST(Detector, SingleSettingDynamicEqualsEnvMatch) {
    const auto stream = fixtures::scale_anomaly_stream();
    DetectorConfig cfg;
    cfg.baseline_mode = BaselineMode::env_match_only;
    const auto a = detect_stream(stream);
    const auto b = detect_stream(stream, cfg);
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_NEAR(a[i].p_value, b[i].p_value, 1e-12) << i;
}

TEST(Detector, Deterministic) {
    const auto s = fixtures::mass_shift_stream();
    const auto a = detect_stream(s);
    const auto b = detect_stream(s);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].p_value, b[i].p_value);
}
