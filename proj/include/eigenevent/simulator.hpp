#pragma once

// Synthetic surveillance streams: a seasonal environmental calendar drives
// per-region Poisson record volumes, each record's feature levels are drawn
// from setting-dependent categorical distributions, and an optional release
// adds outbreak records to a few regions for 14 days.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eigenevent/error.hpp"
#include "eigenevent/schema.hpp"

namespace eigenevent {

/// Outbreak shape: affected regions, the feature columns outbreak records
/// carry, and one multiplier per day after the release.
struct ReleaseProfile {
    std::vector<std::size_t> regions;
    std::vector<std::size_t> columns;
    std::vector<double> multipliers;

    /// 1 + (peak - 1) * j / len for j = 1..len.
    static std::vector<double> linear_ramp(double peak, int len = 14) {
        std::vector<double> m(static_cast<std::size_t>(len));
        for (int j = 1; j <= len; ++j) m[static_cast<std::size_t>(j - 1)] = 1.0 + (peak - 1.0) * j / len;
        return m;
    }
};

enum class Calendar {
    /// 91-day seasons, weather drawn per season, flu level lagging the season.
    seasonal,
    /// Every day carries the first level of each environmental attribute.
    constant,
};

struct SimConfig {
    Schema schema = Schema::citybn();
    int n_days = 730;
    std::uint64_t seed = 1;
    /// Seed of the rate model (region volumes, feature mixes, setting effects).
    /// Shared by every dataset of a suite so they describe the same city.
    std::uint64_t model_seed = 2013;
    std::optional<int> release_day;
    ReleaseProfile release;
    /// Coefficient of variation of a gamma day-by-region volume factor.
    double noise_level = 0.1;
    Calendar calendar = Calendar::seasonal;
    /// Mean records per region per day before region and setting effects.
    double base_volume = 40.0;
    /// Spread of the log volume across regions.
    double region_spread = 0.4;
    /// Spread of log setting effects on volume and on feature mixes.
    double env_effect = 0.25;

    void validate() const {
        if (n_days < 1) throw ConfigError("n_days must be >= 1");
        if (noise_level < 0.0) throw ConfigError("noise_level must be >= 0");
        if (!(base_volume > 0.0)) throw ConfigError("base_volume must be > 0");
        if (release_day) {
            const int len = static_cast<int>(release.multipliers.size());
            if (len != 14) throw ConfigError("release profile must cover 14 days");
            if (*release_day < 1 || *release_day > n_days - len)
                throw ConfigError("release day must lie in [1, n_days - 14]");
            for (double m : release.multipliers)
                if (m < 1.0) throw ConfigError("release multipliers must be >= 1");
            for (std::size_t r : release.regions)
                if (r >= schema.n_regions()) throw ConfigError("release region out of range");
            for (std::size_t c : release.columns)
                if (c >= schema.n_columns()) throw ConfigError("release column out of range");
        }
        if (calendar == Calendar::seasonal) {
            static const std::vector<std::pair<std::string, std::size_t>> need{
                {"flu", 4}, {"dayofweek", 3}, {"weather", 2}, {"season", 4}};
            for (const auto& [name, card] : need) {
                const std::size_t i = schema.env_index(name);
                if (schema.env_attrs()[i].cardinality() != card)
                    throw ConfigError("seasonal calendar needs '" + name + "' with " + std::to_string(card) + " levels");
            }
        }
    }
};

/// Deterministic expected-count model: volume(env, region) * P(level | env, region)
/// per feature attribute.
class RateModel {
  public:
    RateModel(const Schema& schema, std::uint64_t model_seed, double region_spread, double env_effect,
              double base_volume)
        : schema_(schema) {
        std::mt19937_64 rng(model_seed);
        std::normal_distribution<double> normal(0.0, 1.0);

        for (std::size_t r = 0; r < schema.n_regions(); ++r)
            region_volume_.push_back(base_volume * std::exp(region_spread * normal(rng)));

        for (const Attribute& a : schema.env_attrs()) {
            std::vector<double> f(a.cardinality(), 1.0);
            for (std::size_t l = 1; l < f.size(); ++l) f[l] = std::exp(env_effect * normal(rng));
            env_volume_.push_back(std::move(f));
        }

        // Feature mixes: a base preference per level, a per-region tilt and a
        // tilt per (environment attribute level, feature level).
        const std::size_t C = schema.n_columns();
        base_logit_.resize(C);
        for (double& x : base_logit_) x = 0.5 * normal(rng);
        region_logit_.assign(schema.n_regions(), std::vector<double>(C));
        for (auto& row : region_logit_)
            for (double& x : row) x = 0.15 * normal(rng);
        for (const Attribute& a : schema.env_attrs()) {
            std::vector<std::vector<double>> per_level(a.cardinality(), std::vector<double>(C));
            for (auto& row : per_level)
                for (double& x : row) x = env_effect * 1.2 * normal(rng);
            env_logit_.push_back(std::move(per_level));
        }
    }

    double volume(const EnvSetting& env, std::size_t region) const {
        double v = region_volume_[region];
        for (std::size_t a = 0; a < env.levels.size(); ++a) v *= env_volume_[a][env.levels[a]];
        return v;
    }

    /// Level probabilities of feature attribute `attr` in `region` under `env`.
    std::vector<double> level_probs(const EnvSetting& env, std::size_t region, std::size_t attr) const {
        const Attribute& a = schema_.feature_attrs()[attr];
        const std::size_t off = schema_.block_offset(attr);
        std::vector<double> p(a.cardinality());
        double total = 0.0;
        for (std::size_t l = 0; l < p.size(); ++l) {
            double logit = base_logit_[off + l] + region_logit_[region][off + l];
            for (std::size_t e = 0; e < env.levels.size(); ++e) logit += env_logit_[e][env.levels[e]][off + l];
            p[l] = std::exp(logit);
            total += p[l];
        }
        for (double& x : p) x /= total;
        return p;
    }

    /// Poisson mean of every window cell under `env`, without noise or release.
    Matrix expected_counts(const EnvSetting& env) const {
        Matrix m(static_cast<Eigen::Index>(schema_.n_regions()), static_cast<Eigen::Index>(schema_.n_columns()));
        for (std::size_t r = 0; r < schema_.n_regions(); ++r) {
            const double v = volume(env, r);
            for (std::size_t a = 0; a < schema_.feature_attrs().size(); ++a) {
                const auto p = level_probs(env, r, a);
                for (std::size_t l = 0; l < p.size(); ++l)
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(schema_.block_offset(a) + l)) = v * p[l];
            }
        }
        return m;
    }

  private:
    Schema schema_;
    std::vector<double> region_volume_;
    std::vector<std::vector<double>> env_volume_;
    std::vector<double> base_logit_;
    std::vector<std::vector<double>> region_logit_;
    std::vector<std::vector<std::vector<double>>> env_logit_;
};

namespace detail {

inline constexpr std::size_t kSeasonLevel[4] = {0, 1, 2, 3};  // winter spring summer fall
inline constexpr std::size_t kFluOfSeason[4] = {2, 3, 0, 1};  // high decline none low
inline constexpr double kColdProbability[4] = {0.9, 0.5, 0.1, 0.5};
inline constexpr int kSeasonLength = 91;
inline constexpr int kFluLag = 30;

inline int season_of(int day) { return ((day - 1) / kSeasonLength) % 4; }

}  // namespace detail

/// Environmental setting of every day 1..n_days. Season and day of week are
/// pure functions of the day number; weather is sampled per day.
inline std::vector<EnvSetting> env_calendar(const SimConfig& cfg, std::mt19937_64& rng) {
    const Schema& s = cfg.schema;
    std::vector<EnvSetting> out;
    out.reserve(static_cast<std::size_t>(cfg.n_days));
    if (cfg.calendar == Calendar::constant) {
        out.assign(static_cast<std::size_t>(cfg.n_days), EnvSetting{std::vector<std::size_t>(s.env_attrs().size(), 0)});
        return out;
    }
    const std::size_t i_flu = s.env_index("flu"), i_dow = s.env_index("dayofweek"), i_weather = s.env_index("weather"),
                      i_season = s.env_index("season");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int day = 1; day <= cfg.n_days; ++day) {
        EnvSetting e{std::vector<std::size_t>(s.env_attrs().size(), 0)};
        const int season = detail::season_of(day);
        e.levels[i_season] = detail::kSeasonLevel[season];
        const int dow = (day - 1) % 7;
        e.levels[i_dow] = dow < 5 ? 0 : dow == 5 ? 1 : 2;
        e.levels[i_weather] = unif(rng) < detail::kColdProbability[season] ? 0 : 1;
        const int lagged = day > detail::kFluLag ? detail::season_of(day - detail::kFluLag) : 3;
        e.levels[i_flu] = detail::kFluOfSeason[lagged];
        out.push_back(std::move(e));
    }
    return out;
}

struct SimDataset {
    std::vector<DailyWindow> windows;
    std::vector<EnvSetting> env_per_day;
    std::optional<int> release_day;
};

namespace detail {

inline long poisson(double mean, std::mt19937_64& rng) {
    return mean > 0.0 ? std::poisson_distribution<long>(mean)(rng) : 0;
}

/// Split `n` draws over `p` with sequential binomials.
inline void multinomial_add(long n, const std::vector<double>& p, std::mt19937_64& rng, double* out_row, Eigen::Index stride) {
    double rest = 1.0;
    for (std::size_t l = 0; l < p.size(); ++l) {
        long k = n;
        if (l + 1 < p.size() && n > 0) {
            const double q = std::clamp(p[l] / rest, 0.0, 1.0);
            k = std::binomial_distribution<long>(n, q)(rng);
        }
        out_row[static_cast<Eigen::Index>(l) * stride] += static_cast<double>(k);
        n -= k;
        rest -= p[l];
        if (n == 0) break;
    }
}

}  // namespace detail

/// Draw one dataset. Reproducible from `cfg.seed`.
inline SimDataset generate(const SimConfig& cfg) {
    cfg.validate();
    const Schema& s = cfg.schema;
    const RateModel model(s, cfg.model_seed, cfg.region_spread, cfg.env_effect, cfg.base_volume);

    std::mt19937_64 rng(cfg.seed);
    SimDataset ds;
    ds.release_day = cfg.release_day;
    ds.env_per_day = env_calendar(cfg, rng);

    const auto R = static_cast<Eigen::Index>(s.n_regions());
    const auto C = static_cast<Eigen::Index>(s.n_columns());
    const std::size_t n_attrs = s.feature_attrs().size();

    // Attribute -> forced level for outbreak records, if the profile names one.
    std::vector<std::optional<std::size_t>> forced(n_attrs);
    for (std::size_t c : cfg.release.columns)
        for (std::size_t a = 0; a < n_attrs; ++a) {
            const std::size_t off = s.block_offset(a);
            if (c >= off && c < off + s.feature_attrs()[a].cardinality()) forced[a] = c - off;
        }

    const double shape = cfg.noise_level > 0.0 ? 1.0 / (cfg.noise_level * cfg.noise_level) : 0.0;
    for (int day = 1; day <= cfg.n_days; ++day) {
        const EnvSetting& env = ds.env_per_day[static_cast<std::size_t>(day - 1)];
        DailyWindow w{day, env, Matrix::Zero(R, C)};

        double multiplier = 1.0;
        if (cfg.release_day && day > *cfg.release_day && day <= *cfg.release_day + 14)
            multiplier = cfg.release.multipliers[static_cast<std::size_t>(day - *cfg.release_day - 1)];

        for (std::size_t r = 0; r < s.n_regions(); ++r) {
            double rate = model.volume(env, r);
            if (shape > 0.0) rate *= std::gamma_distribution<double>(shape, 1.0 / shape)(rng);
            const long n = detail::poisson(rate, rng);

            const bool affected =
                multiplier > 1.0 && std::find(cfg.release.regions.begin(), cfg.release.regions.end(), r) != cfg.release.regions.end();
            const long extra = affected ? detail::poisson((multiplier - 1.0) * rate, rng) : 0;

            double* row = w.counts.data() + static_cast<Eigen::Index>(r);
            for (std::size_t a = 0; a < n_attrs; ++a) {
                const auto p = model.level_probs(env, r, a);
                double* block = row + static_cast<Eigen::Index>(s.block_offset(a)) * R;
                detail::multinomial_add(n, p, rng, block, R);
                if (extra > 0) {
                    if (forced[a]) block[static_cast<Eigen::Index>(*forced[a]) * R] += static_cast<double>(extra);
                    else detail::multinomial_add(extra, p, rng, block, R);
                }
            }
        }
        ds.windows.push_back(std::move(w));
    }
    return ds;
}

/// A batch of labelled datasets describing the same city: each draws its own
/// release day (uniform over [release_from, release_to]) and affected regions.
struct SuiteConfig {
    SimConfig base;
    int n_datasets = 20;
    int release_from = 366;
    /// Defaults to n_days - 14 when unset.
    std::optional<int> release_to;
    double peak = 5.0;
    std::size_t affected_regions = 2;
    /// Feature columns outbreak records carry; empty selects
    /// action.evisit, symptom.respiratory and drug.nyquil when present.
    std::vector<std::size_t> columns;
};

inline std::string dataset_id(int i) {
    std::string n = std::to_string(i + 1);
    return "ds" + std::string(n.size() < 3 ? 3 - n.size() : 0, '0') + n;
}

inline std::vector<std::size_t> default_release_columns(const Schema& s) {
    std::vector<std::size_t> out;
    const auto names = s.column_names();
    for (const char* want : {"action.evisit", "symptom.respiratory", "drug.nyquil"}) {
        auto it = std::find(names.begin(), names.end(), want);
        if (it != names.end()) out.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    return out;
}

/// Per-dataset simulator configuration for member `i` of a suite.
inline SimConfig suite_member(const SuiteConfig& suite, int i) {
    SimConfig cfg = suite.base;
    std::seed_seq seq{static_cast<std::uint32_t>(suite.base.seed), static_cast<std::uint32_t>(suite.base.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    const int hi = suite.release_to.value_or(cfg.n_days - 14);
    if (hi < suite.release_from) throw ConfigError("release window is empty");
    cfg.release_day = std::uniform_int_distribution<int>(suite.release_from, hi)(rng);

    const std::size_t R = cfg.schema.n_regions();
    if (suite.affected_regions == 0 || suite.affected_regions > R) throw ConfigError("bad number of affected regions");
    std::vector<std::size_t> regions(R);
    for (std::size_t r = 0; r < R; ++r) regions[r] = r;
    for (std::size_t k = 0; k < suite.affected_regions; ++k) {
        const auto j = std::uniform_int_distribution<std::size_t>(k, R - 1)(rng);
        std::swap(regions[k], regions[j]);
    }
    regions.resize(suite.affected_regions);
    std::sort(regions.begin(), regions.end());

    cfg.release.regions = std::move(regions);
    cfg.release.columns = suite.columns.empty() ? default_release_columns(cfg.schema) : suite.columns;
    cfg.release.multipliers = ReleaseProfile::linear_ramp(suite.peak);
    cfg.seed = rng();
    return cfg;
}

inline std::vector<Dataset> simulate_suite(const SuiteConfig& suite) {
    if (suite.n_datasets < 1) throw ConfigError("need at least one dataset");
    std::vector<Dataset> out;
    out.reserve(static_cast<std::size_t>(suite.n_datasets));
    for (int i = 0; i < suite.n_datasets; ++i) {
        SimDataset sim = generate(suite_member(suite, i));
        out.push_back({dataset_id(i), std::move(sim.windows), sim.release_day});
    }
    return out;
}

}  // namespace eigenevent
