#pragma once

// CSV readers and writers for records, environment calendars, pre-aggregated
// windows, detector output, AMOC curves and ground truth.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "eigenevent/detector.hpp"
#include "eigenevent/error.hpp"
#include "eigenevent/evaluation.hpp"
#include "eigenevent/schema.hpp"

namespace eigenevent::io {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Line-oriented CSV reader that remembers where it is for error messages.
class CsvReader {
  public:
    explicit CsvReader(const std::filesystem::path& path) : name_(path.string()), file_(path) {
        if (!file_) throw DataError("cannot open " + name_);
    }

    /// Read the header and check it against `expected`.
    void expect_header(const std::vector<std::string>& expected) {
        std::vector<std::string> header;
        if (!next(header)) fail("missing header");
        if (header != expected) {
            std::string want;
            for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
            fail("unexpected header, want '" + want + "'");
        }
    }

    /// Next non-empty line split into fields; false at end of file.
    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(file_, line)) {
            ++line_;
            if (line.empty() || line == "\r") continue;
            fields = split_csv_line(line);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(name_, line_, what); }

    int parse_int(const std::string& s) const {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) fail("not an integer: '" + s + "'");
        return v;
    }

    double parse_double(const std::string& s) const {
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) fail("not a number: '" + s + "'");
        return v;
    }

    const std::string& name() const { return name_; }
    std::size_t line() const { return line_; }

  private:
    std::string name_;
    std::ifstream file_;
    std::size_t line_ = 0;
};

inline std::vector<std::string> record_header(const Schema& s) {
    std::vector<std::string> h{"region", "day"};
    for (const Attribute& a : s.feature_attrs()) h.push_back(a.name);
    return h;
}

inline std::vector<std::string> env_header(const Schema& s) {
    std::vector<std::string> h{"day"};
    for (const Attribute& a : s.env_attrs()) h.push_back(a.name);
    return h;
}

inline std::vector<std::string> window_header(const Schema& s) {
    std::vector<std::string> h{"day", "env", "region"};
    for (auto& c : s.column_names()) h.push_back(std::move(c));
    return h;
}

/// Record CSV, header `region,day,<feature attributes>`. Days must not
/// decrease from one line to the next.
inline std::vector<Record> read_records_csv(const std::filesystem::path& path, const Schema& schema) {
    CsvReader in(path);
    const auto header = record_header(schema);
    in.expect_header(header);
    std::vector<Record> out;
    std::vector<std::string> f;
    int last_day = 0;
    while (in.next(f)) {
        if (f.size() != header.size()) in.fail("expected " + std::to_string(header.size()) + " fields");
        Record r{f[0], in.parse_int(f[1]), {f.begin() + 2, f.end()}};
        if (r.day < 1) in.fail("day must be >= 1");
        if (r.day < last_day) in.fail("days must be ascending");
        last_day = r.day;
        try {
            schema.regions().index_of(r.region);
            for (std::size_t a = 0; a < r.features.size(); ++a) schema.feature_attrs()[a].index_of(r.features[a]);
        } catch (const UnknownLevel& e) {
            in.fail(e.what());
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// Environment CSV, header `day,<env attributes>`, one line per day in
/// strictly increasing order.
inline std::vector<std::pair<int, EnvSetting>> read_env_csv(const std::filesystem::path& path, const Schema& schema) {
    CsvReader in(path);
    const auto header = env_header(schema);
    in.expect_header(header);
    std::vector<std::pair<int, EnvSetting>> out;
    std::vector<std::string> f;
    while (in.next(f)) {
        if (f.size() != header.size()) in.fail("expected " + std::to_string(header.size()) + " fields");
        const int day = in.parse_int(f[0]);
        if (!out.empty() && day <= out.back().first) in.fail("days must be strictly increasing");
        std::map<std::string, std::string> values;
        for (std::size_t i = 1; i < f.size(); ++i) values[header[i]] = f[i];
        try {
            out.emplace_back(day, env_of_day(values, schema));
        } catch (const DataError& e) {
            in.fail(e.what());
        }
    }
    return out;
}

inline void write_env_csv(std::ostream& out, const std::vector<DailyWindow>& windows, const Schema& schema) {
    const auto header = env_header(schema);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const DailyWindow& w : windows) {
        out << w.day;
        for (std::size_t a = 0; a < schema.env_attrs().size(); ++a) out << ',' << schema.env_attrs()[a].levels[w.env.levels[a]];
        out << '\n';
    }
}

/// One window per environment-calendar day, tallied from the records of that day.
inline std::vector<DailyWindow> windows_from_records(const std::vector<Record>& records,
                                                     const std::vector<std::pair<int, EnvSetting>>& env_days,
                                                     const Schema& schema) {
    std::map<int, std::vector<Record>> by_day;
    for (const Record& r : records) by_day[r.day].push_back(r);
    std::map<int, const EnvSetting*> env_by_day;
    for (const auto& [day, env] : env_days) env_by_day[day] = &env;
    for (const auto& [day, recs] : by_day)
        if (!env_by_day.contains(day)) throw DataError("records on day " + std::to_string(day) + " have no environment entry");

    std::vector<DailyWindow> out;
    out.reserve(env_days.size());
    static const std::vector<Record> none;
    for (const auto& [day, env] : env_days) {
        auto it = by_day.find(day);
        out.push_back(aggregate_day(it == by_day.end() ? none : it->second, day, env, schema));
    }
    return out;
}

/// Window CSV, header `day,env,region,<feature columns>`: one line per
/// (day, region), regions in schema order, env as EnvSetting::key().
inline void write_window_csv(std::ostream& out, const std::vector<DailyWindow>& windows, const Schema& schema) {
    const auto header = window_header(schema);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const DailyWindow& w : windows) {
        const std::string key = w.env.key();
        for (Eigen::Index r = 0; r < w.counts.rows(); ++r) {
            out << w.day << ',' << key << ',' << schema.regions().levels[static_cast<std::size_t>(r)];
            for (Eigen::Index c = 0; c < w.counts.cols(); ++c) out << ',' << format_double(w.counts(r, c));
            out << '\n';
        }
    }
}

inline std::vector<DailyWindow> read_window_csv(const std::filesystem::path& path, const Schema& schema) {
    CsvReader in(path);
    const auto header = window_header(schema);
    in.expect_header(header);
    const auto R = static_cast<Eigen::Index>(schema.n_regions());
    const auto C = static_cast<Eigen::Index>(schema.n_columns());

    std::vector<DailyWindow> out;
    std::vector<bool> filled;
    auto finish = [&] {
        if (out.empty()) return;
        for (Eigen::Index r = 0; r < R; ++r)
            if (!filled[static_cast<std::size_t>(r)])
                in.fail("day " + std::to_string(out.back().day) + " lacks region " +
                        schema.regions().levels[static_cast<std::size_t>(r)]);
    };

    std::vector<std::string> f;
    while (in.next(f)) {
        if (f.size() != header.size()) in.fail("expected " + std::to_string(header.size()) + " fields");
        const int day = in.parse_int(f[0]);
        EnvSetting env;
        try {
            env = EnvSetting::parse_key(f[1], schema);
        } catch (const DataError& e) {
            in.fail(e.what());
        }
        if (out.empty() || day != out.back().day) {
            if (!out.empty() && day < out.back().day) in.fail("days must be ascending");
            finish();
            out.push_back({day, env, Matrix::Zero(R, C)});
            filled.assign(static_cast<std::size_t>(R), false);
        } else if (env != out.back().env) {
            in.fail("environment changes within day " + std::to_string(day));
        }
        std::size_t r = 0;
        try {
            r = schema.regions().index_of(f[2]);
        } catch (const UnknownLevel& e) {
            in.fail(e.what());
        }
        if (filled[r]) in.fail("region " + f[2] + " repeated on day " + std::to_string(day));
        filled[r] = true;
        for (Eigen::Index c = 0; c < C; ++c) {
            const double v = in.parse_double(f[static_cast<std::size_t>(c) + 3]);
            if (!(v >= 0.0) || std::floor(v) != v) in.fail("counts must be nonnegative integers, got '" + f[static_cast<std::size_t>(c) + 3] + "'");
            out.back().counts(static_cast<Eigen::Index>(r), c) = v;
        }
    }
    finish();
    return out;
}

inline constexpr const char* kDetectionHeader = "day,p_value,p_eigenvalue,p_spatial,p_feature,d1,d2,d3,cold_start";

/// Unavailable component p-values are written as empty fields.
inline void write_detections_csv(std::ostream& out, const std::vector<DetectionResult>& results) {
    out << kDetectionHeader << '\n';
    for (const DetectionResult& r : results) {
        out << r.day << ',' << format_double(r.p_value);
        for (Indicator i : all_indicators) {
            out << ',';
            if (r.component(i).available) out << format_double(r.component(i).p);
        }
        for (Indicator i : all_indicators) out << ',' << format_double(r.component(i).distance);
        out << ',' << (r.cold_start ? 1 : 0) << '\n';
    }
}

inline void write_amoc_csv(std::ostream& out, const std::vector<AmocPoint>& points) {
    out << "threshold,fp_per_month,mean_delay\n";
    for (const AmocPoint& p : points)
        out << format_double(p.threshold) << ',' << format_double(p.fp_per_month) << ',' << format_double(p.mean_delay)
            << '\n';
}

inline void write_truth_csv(std::ostream& out, const std::vector<std::pair<std::string, int>>& truth) {
    out << "dataset_id,release_day\n";
    for (const auto& [id, day] : truth) out << id << ',' << day << '\n';
}

inline std::vector<std::pair<std::string, int>> read_truth_csv(const std::filesystem::path& path) {
    CsvReader in(path);
    in.expect_header({"dataset_id", "release_day"});
    std::vector<std::pair<std::string, int>> out;
    std::vector<std::string> f;
    while (in.next(f)) {
        if (f.size() != 2) in.fail("expected 2 fields");
        for (const auto& [id, day] : out)
            if (id == f[0]) in.fail("dataset '" + f[0] + "' has more than one release");
        out.emplace_back(f[0], in.parse_int(f[1]));
    }
    return out;
}

/// File names used for one dataset inside a data directory.
inline std::filesystem::path windows_path(const std::filesystem::path& dir, const std::string& id) {
    return dir / (id + "_windows.csv");
}
inline std::filesystem::path env_path(const std::filesystem::path& dir, const std::string& id) {
    return dir / (id + "_env.csv");
}
inline std::filesystem::path records_path(const std::filesystem::path& dir, const std::string& id) {
    return dir / (id + "_records.csv");
}

/// Load every dataset listed in `<dir>/truth.csv`. Each dataset is either a
/// window CSV or a record CSV plus environment CSV.
inline std::vector<Dataset> load_datasets(const std::filesystem::path& dir, const Schema& schema) {
    std::vector<Dataset> out;
    for (const auto& [id, release] : read_truth_csv(dir / "truth.csv")) {
        Dataset ds{id, {}, release};
        if (std::filesystem::exists(windows_path(dir, id))) {
            ds.windows = read_window_csv(windows_path(dir, id), schema);
        } else if (std::filesystem::exists(records_path(dir, id))) {
            ds.windows = windows_from_records(read_records_csv(records_path(dir, id), schema),
                                              read_env_csv(env_path(dir, id), schema), schema);
        } else {
            throw DataError("no data files for dataset '" + id + "' in " + dir.string());
        }
        out.push_back(std::move(ds));
    }
    if (out.empty()) throw DataError(dir.string() + "/truth.csv lists no datasets");
    return out;
}

}  // namespace eigenevent::io
