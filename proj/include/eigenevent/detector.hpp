#pragma once

// The per-day detection step: decompose baseline and window, match their
// eigenspaces, turn each distance into an upper-tail p-value against its
// own history and report the minimum.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "eigenevent/baseline.hpp"
#include "eigenevent/error.hpp"
#include "eigenevent/schema.hpp"
#include "eigenevent/tensor.hpp"

namespace eigenevent {

enum class Indicator : std::size_t { eigenvalue = 0, spatial = 1, feature = 2 };

inline constexpr std::array<Indicator, 3> all_indicators{Indicator::eigenvalue, Indicator::spatial, Indicator::feature};

inline std::string to_string(Indicator i) {
    switch (i) {
        case Indicator::eigenvalue: return "eigenvalue";
        case Indicator::spatial: return "spatial";
        case Indicator::feature: return "feature";
    }
    return "?";
}

/// Which eigenspace elements take part in min-p fusion.
struct IndicatorConfig {
    bool eigenvalue = true;
    bool spatial = true;
    bool feature = false;

    bool enabled(Indicator i) const {
        switch (i) {
            case Indicator::eigenvalue: return eigenvalue;
            case Indicator::spatial: return spatial;
            case Indicator::feature: return feature;
        }
        return false;
    }

    void validate() const {
        if (!eigenvalue && !spatial && !feature) throw ConfigError("at least one indicator must be enabled");
    }

    /// Comma-separated indicator names, e.g. "eigenvalue,spatial".
    static IndicatorConfig parse(const std::string& list) {
        IndicatorConfig c{false, false, false};
        std::istringstream in(list);
        std::string item;
        while (std::getline(in, item, ',')) {
            if (item == "eigenvalue") c.eigenvalue = true;
            else if (item == "spatial") c.spatial = true;
            else if (item == "feature") c.feature = true;
            else throw ConfigError("unknown indicator '" + item + "'");
        }
        c.validate();
        return c;
    }

    std::string str() const {
        std::string out;
        for (Indicator i : all_indicators)
            if (enabled(i)) out += (out.empty() ? "" : ",") + to_string(i);
        return out;
    }
};

struct Distances {
    double d1 = std::numeric_limits<double>::quiet_NaN();  ///< eigenvalue ratio, window over baseline
    double d2 = std::numeric_limits<double>::quiet_NaN();  ///< spatial eigenvector distance
    double d3 = std::numeric_limits<double>::quiet_NaN();  ///< feature eigenvector distance

    double operator[](Indicator i) const {
        switch (i) {
            case Indicator::eigenvalue: return d1;
            case Indicator::spatial: return d2;
            case Indicator::feature: return d3;
        }
        return d1;
    }
};

inline Distances eigen_distances(const EigenSummary& window, const EigenSummary& baseline) {
    if (window.vec_space.size() != baseline.vec_space.size() || window.vec_feature.size() != baseline.vec_feature.size())
        throw DataError("window and baseline summaries have different shapes");
    if (baseline.lambda == 0.0) throw DegenerateBaseline();
    return {window.lambda / baseline.lambda, (window.vec_space - baseline.vec_space).norm(),
            (window.vec_feature - baseline.vec_feature).norm()};
}

/// Standardize `d` against the sample mean and (n-1) standard deviation of
/// `history`. A numerically constant history (relative spread below 1e-12)
/// maps d equal to its mean to 0 and any other d to +/-infinity.
inline double zscore(double d, std::span<const double> history, std::size_t min_history = 2) {
    const std::size_t need = std::max<std::size_t>(min_history, 2);
    if (history.size() < need)
        throw InsufficientHistory("need " + std::to_string(need) + " past distances, have " +
                                  std::to_string(history.size()));
    double mean = 0.0;
    for (double x : history) mean += x;
    mean /= static_cast<double>(history.size());
    double ss = 0.0;
    for (double x : history) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(history.size() - 1));

    const double tiny = 1e-12 * std::max(1.0, std::abs(mean));
    if (sd <= tiny) {
        if (std::abs(d - mean) <= tiny) return 0.0;
        return d > mean ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return (d - mean) / sd;
}

/// Upper-tail standard normal probability 1 - Phi(z).
inline double pvalue(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

struct Component {
    double distance = std::numeric_limits<double>::quiet_NaN();
    double z = std::numeric_limits<double>::quiet_NaN();
    double p = std::numeric_limits<double>::quiet_NaN();
    bool available = false;
};

struct DetectionResult {
    int day = 0;
    double p_value = 1.0;
    std::array<Component, 3> components;
    bool cold_start = true;
    std::size_t baseline_size = 0;
    std::size_t matched = 0;

    const Component& component(Indicator i) const { return components[static_cast<std::size_t>(i)]; }
};

struct DetectorConfig {
    IndicatorConfig indicators;
    /// Past distances required before z-scores are emitted.
    std::size_t min_history = 5;
    BaselineMode baseline_mode = BaselineMode::dynamic;
    /// Window length of the fixed-history comparison mode.
    std::size_t fixed_history_days = 7;
    PowerOptions power;
};

/// Streaming detector state: historical windows, the current baseline and
/// the per-indicator distance histories. Days must arrive in increasing order.
class Detector {
  public:
    explicit Detector(DetectorConfig cfg = {}) : cfg_(std::move(cfg)) {
        cfg_.indicators.validate();
        if (cfg_.fixed_history_days == 0) throw ConfigError("fixed-history window must be at least one day");
    }

    DetectionResult step(DailyWindow window) {
        if (!history_.empty() && window.day <= history_.windows().back()->day)
            throw DataError("day " + std::to_string(window.day) + " does not follow day " +
                            std::to_string(history_.windows().back()->day));
        auto today = std::make_shared<const DailyWindow>(std::move(window));
        const EnvSetting& e = today->env;

        BaselineTensor next = select(today);

        DetectionResult r;
        r.day = today->day;
        r.baseline_size = next.size();
        r.matched = next.matched;

        bool have_distances = false;
        Distances d;
        if (!next.empty()) {
            EigenSummary base = hosvd_rank1(next.tensor(), cfg_.power);
            // Per-slice magnitude.
            base.lambda /= std::sqrt(static_cast<double>(next.size()));
            const EigenSummary win = summarize(today->counts, cfg_.power);
            try {
                d = eigen_distances(win, base);
                have_distances = true;
            } catch (const DegenerateBaseline&) {
                d.d2 = (win.vec_space - base.vec_space).norm();
                d.d3 = (win.vec_feature - base.vec_feature).norm();
            }
        }

        bool cold = !have_distances;
        double fused = 1.0;
        for (Indicator i : all_indicators) {
            Component& c = r.components[static_cast<std::size_t>(i)];
            c.distance = d[i];
            const auto& past = vd_[static_cast<std::size_t>(i)];
            if (have_distances && past.size() >= std::max<std::size_t>(cfg_.min_history, 2)) {
                c.z = zscore(c.distance, past, cfg_.min_history);
                c.p = pvalue(c.z);
                c.available = true;
            }
            if (cfg_.indicators.enabled(i)) {
                if (!c.available) cold = true;
                else fused = std::min(fused, c.p);
            }
        }
        r.cold_start = cold;
        r.p_value = cold ? 1.0 : fused;

        // Only distances for previously seen settings enter the history.
        if (have_distances && history_.seen(e) && std::isfinite(d.d1) && std::isfinite(d.d2) && std::isfinite(d.d3)) {
            for (Indicator i : all_indicators) vd_[static_cast<std::size_t>(i)].push_back(d[i]);
        }
        history_.append(std::move(today));
        baseline_ = std::move(next);
        return r;
    }

    const DetectorConfig& config() const { return cfg_; }
    const History& history() const { return history_; }
    const BaselineTensor& baseline() const { return baseline_; }
    const std::vector<double>& distances(Indicator i) const { return vd_[static_cast<std::size_t>(i)]; }

  private:
    BaselineTensor select(const WindowPtr& today) const {
        switch (cfg_.baseline_mode) {
            case BaselineMode::dynamic:
                return baseline_update(baseline_, history_, today->env, today);
            case BaselineMode::fixed_history:
                return fixed_history_baseline(history_, cfg_.fixed_history_days, today);
            case BaselineMode::env_match_only:
                if (history_.empty()) return baseline_update({}, history_, today->env, today);
                return env_match_baseline(history_, today->env);
        }
        return {};
    }

    DetectorConfig cfg_;
    History history_;
    BaselineTensor baseline_;
    std::array<std::vector<double>, 3> vd_;
};

/// Run a whole stream through a fresh detector.
inline std::vector<DetectionResult> detect_stream(std::span<const DailyWindow> windows, const DetectorConfig& cfg = {}) {
    Detector det(cfg);
    std::vector<DetectionResult> out;
    out.reserve(windows.size());
    for (const DailyWindow& w : windows) out.push_back(det.step(w));
    return out;
}

}  // namespace eigenevent
