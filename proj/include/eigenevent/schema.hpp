#pragma once

// Surveillance record schema, environmental settings and daily windows.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "eigenevent/error.hpp"
#include "eigenevent/tensor.hpp"

namespace eigenevent {

struct Attribute {
    std::string name;
    std::vector<std::string> levels;

    std::size_t cardinality() const { return levels.size(); }

    /// Index of `level`, or UnknownLevel.
    std::size_t index_of(const std::string& level) const {
        auto it = std::find(levels.begin(), levels.end(), level);
        if (it == levels.end()) throw UnknownLevel(name, level);
        return static_cast<std::size_t>(it - levels.begin());
    }
};

/// Spatial regions, one-hot feature attributes (flattened in declaration
/// order into window columns) and environmental attributes.
class Schema {
  public:
    Schema(std::vector<std::string> regions, std::vector<Attribute> feature_attrs, std::vector<Attribute> env_attrs)
        : regions_{"region", std::move(regions)},
          feature_attrs_(std::move(feature_attrs)),
          env_attrs_(std::move(env_attrs)) {
        validate(regions_);
        std::size_t offset = 0;
        for (const Attribute& a : feature_attrs_) {
            validate(a);
            block_offsets_.push_back(offset);
            offset += a.cardinality();
        }
        n_columns_ = offset;
        for (const Attribute& a : env_attrs_) validate(a);
        if (feature_attrs_.empty()) throw ConfigError("schema needs at least one feature attribute");
    }

    /// The 9-region CityBN layout: 16 feature columns (3+2+3+4+4) and
    /// 4x3x2x4 environmental settings.
    static Schema citybn() {
        return Schema({"NW", "N", "NE", "W", "C", "E", "SW", "S", "SE"},
                      {
                          {"age", {"child", "adult", "senior"}},
                          {"gender", {"female", "male"}},
                          {"action", {"purchase", "evisit", "absent"}},
                          {"symptom", {"nausea", "rash", "respiratory", "headache"}},
                          {"drug", {"none", "nyquil", "vomit-b-gone", "aspirin"}},
                      },
                      {
                          {"flu", {"none", "low", "high", "decline"}},
                          {"dayofweek", {"weekday", "sat", "sun"}},
                          {"weather", {"cold", "hot"}},
                          {"season", {"winter", "spring", "summer", "fall"}},
                      });
    }

    const Attribute& regions() const { return regions_; }
    const std::vector<Attribute>& feature_attrs() const { return feature_attrs_; }
    const std::vector<Attribute>& env_attrs() const { return env_attrs_; }

    std::size_t n_regions() const { return regions_.cardinality(); }
    std::size_t n_columns() const { return n_columns_; }

    /// First window column of feature attribute `a`.
    std::size_t block_offset(std::size_t a) const { return block_offsets_.at(a); }

    /// Window column names, `<attribute>.<level>` in canonical order.
    std::vector<std::string> column_names() const {
        std::vector<std::string> out;
        out.reserve(n_columns_);
        for (const Attribute& a : feature_attrs_)
            for (const std::string& l : a.levels) out.push_back(a.name + "." + l);
        return out;
    }

    std::size_t n_settings() const {
        std::size_t n = 1;
        for (const Attribute& a : env_attrs_) n *= a.cardinality();
        return n;
    }

    std::size_t feature_index(const std::string& name) const { return find_attr(feature_attrs_, name); }
    std::size_t env_index(const std::string& name) const { return find_attr(env_attrs_, name); }

  private:
    static void validate(const Attribute& a) {
        if (a.levels.empty()) throw ConfigError("attribute '" + a.name + "' has no levels");
        std::unordered_set<std::string> seen(a.levels.begin(), a.levels.end());
        if (seen.size() != a.levels.size()) throw ConfigError("attribute '" + a.name + "' has duplicate levels");
    }

    static std::size_t find_attr(const std::vector<Attribute>& attrs, const std::string& name) {
        for (std::size_t i = 0; i < attrs.size(); ++i)
            if (attrs[i].name == name) return i;
        throw ConfigError("schema has no attribute '" + name + "'");
    }

    Attribute regions_;
    std::vector<Attribute> feature_attrs_;
    std::vector<Attribute> env_attrs_;
    std::vector<std::size_t> block_offsets_;
    std::size_t n_columns_ = 0;
};

inline void to_json(nlohmann::json& j, const Attribute& a) { j = {{"name", a.name}, {"levels", a.levels}}; }
inline void from_json(const nlohmann::json& j, Attribute& a) {
    j.at("name").get_to(a.name);
    j.at("levels").get_to(a.levels);
}

inline nlohmann::json schema_to_json(const Schema& s) {
    return {{"regions", s.regions().levels}, {"features", s.feature_attrs()}, {"environment", s.env_attrs()}};
}

inline Schema schema_from_json(const nlohmann::json& j) {
    try {
        return Schema(j.at("regions").get<std::vector<std::string>>(), j.at("features").get<std::vector<Attribute>>(),
                      j.value("environment", std::vector<Attribute>{}));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad schema: ") + e.what());
    }
}

/// One level index per environmental attribute. Totally ordered and hashable
/// so settings can be matched exactly.
struct EnvSetting {
    std::vector<std::size_t> levels;

    auto operator<=>(const EnvSetting&) const = default;
    bool operator==(const EnvSetting&) const = default;

    /// 1-based level indices joined by '.', e.g. "3.2.1.1".
    std::string key() const {
        std::string out;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (i) out += '.';
            out += std::to_string(levels[i] + 1);
        }
        return out;
    }

    static EnvSetting parse_key(const std::string& key, const Schema& schema) {
        EnvSetting e;
        std::istringstream in(key);
        std::string part;
        while (std::getline(in, part, '.')) {
            std::size_t value = 0;
            try {
                std::size_t used = 0;
                value = std::stoul(part, &used);
                if (used != part.size() || value == 0) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw DataError("malformed environment key '" + key + "'");
            }
            e.levels.push_back(value - 1);
        }
        const auto& attrs = schema.env_attrs();
        if (e.levels.size() != attrs.size()) throw DataError("environment key '" + key + "' has wrong arity");
        for (std::size_t i = 0; i < attrs.size(); ++i)
            if (e.levels[i] >= attrs[i].cardinality()) throw UnknownLevel(attrs[i].name, "#" + std::to_string(e.levels[i] + 1));
        return e;
    }
};

struct EnvSettingHash {
    std::size_t operator()(const EnvSetting& e) const noexcept {
        std::size_t h = 0x9e3779b97f4a7c15ULL;
        for (std::size_t v : e.levels) h ^= std::hash<std::size_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

/// Environmental setting from attribute -> level names.
inline EnvSetting env_of_day(const std::map<std::string, std::string>& values, const Schema& schema) {
    EnvSetting e;
    for (const Attribute& a : schema.env_attrs()) {
        auto it = values.find(a.name);
        if (it == values.end()) throw DataError("missing environmental attribute '" + a.name + "'");
        e.levels.push_back(a.index_of(it->second));
    }
    return e;
}

/// Every setting the schema admits, in lexicographic index order.
inline std::vector<EnvSetting> enumerate_settings(const Schema& schema) {
    const auto& attrs = schema.env_attrs();
    std::vector<EnvSetting> out;
    EnvSetting cur{std::vector<std::size_t>(attrs.size(), 0)};
    while (true) {
        out.push_back(cur);
        std::size_t i = attrs.size();
        while (i > 0) {
            --i;
            if (++cur.levels[i] < attrs[i].cardinality()) break;
            cur.levels[i] = 0;
            if (i == 0) return out;
        }
        if (attrs.empty()) return out;
    }
}

/// One raw surveillance record; categorical fields hold level names.
struct Record {
    std::string region;
    int day = 0;
    /// Feature levels in schema order.
    std::vector<std::string> features;
};

/// A day's Space x Feature count matrix.
struct DailyWindow {
    int day = 0;
    EnvSetting env;
    Matrix counts;

    bool operator==(const DailyWindow& o) const { return day == o.day && env == o.env && counts == o.counts; }
};

/// Tally a day's records into a window: each record increments one column in
/// every feature attribute's block of its region's row.
inline DailyWindow aggregate_day(std::span<const Record> records, int day, const EnvSetting& env, const Schema& schema) {
    DailyWindow w{day, env, Matrix::Zero(static_cast<Eigen::Index>(schema.n_regions()),
                                         static_cast<Eigen::Index>(schema.n_columns()))};
    const auto& attrs = schema.feature_attrs();
    for (const Record& r : records) {
        if (r.day != day) throw DataError("record for day " + std::to_string(r.day) + " aggregated into day " + std::to_string(day));
        if (r.features.size() != attrs.size()) throw DataError("record has " + std::to_string(r.features.size()) + " feature values, schema has " + std::to_string(attrs.size()));
        const auto row = static_cast<Eigen::Index>(schema.regions().index_of(r.region));
        for (std::size_t a = 0; a < attrs.size(); ++a) {
            const std::size_t col = schema.block_offset(a) + attrs[a].index_of(r.features[a]);
            w.counts(row, static_cast<Eigen::Index>(col)) += 1.0;
        }
    }
    return w;
}

/// A labelled stream: daily windows plus the ground-truth release day.
struct Dataset {
    std::string id;
    std::vector<DailyWindow> windows;
    std::optional<int> release_day;
};

}  // namespace eigenevent
