#pragma once

// Deterministic detector streams shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "eigenevent/eigenevent.hpp"

namespace fixtures {

using eigenevent::DailyWindow;
using eigenevent::Matrix;

inline constexpr int kStreamDays = 40;

/// 9 x 16 window with uneven positive counts.
inline Matrix base_window() {
    Matrix m(9, 16);
    for (Eigen::Index r = 0; r < 9; ++r)
        for (Eigen::Index c = 0; c < 16; ++c) m(r, c) = 10.0 + static_cast<double>((r * 7 + c * 3) % 11 + r);
    return m;
}

/// Days 1..kStreamDays of the base window under a small global volume
/// wobble, all in one environmental setting.
inline std::vector<DailyWindow> quiet_stream() {
    const auto schema = eigenevent::Schema::citybn();
    const eigenevent::EnvSetting env{std::vector<std::size_t>(schema.env_attrs().size(), 0)};
    std::vector<DailyWindow> out;
    for (int d = 1; d <= kStreamDays; ++d) out.push_back({d, env, base_window() * (1.0 + 0.02 * std::sin(d))});
    return out;
}

/// Last day carries twice the usual counts in every cell.
inline std::vector<DailyWindow> scale_anomaly_stream() {
    auto s = quiet_stream();
    s.back().counts *= 2.0;
    return s;
}

/// Last day exchanges the counts of regions 0 and 8; totals are unchanged.
inline std::vector<DailyWindow> mass_shift_stream() {
    auto s = quiet_stream();
    s.back().counts.row(0).swap(s.back().counts.row(8));
    return s;
}

/// Setting c<i> of the baseline walkthrough (1-based), distinguished by the
/// level of the first environmental attribute.
inline eigenevent::EnvSetting walkthrough_setting(std::size_t i) { return {{i - 1, 0, 0, 0}}; }

/// 53 days for the baseline walkthrough. Days 1-49 hold c1 x20, c2 x13,
/// c3 x7 and c4 x9 spread evenly; days 50-51 are a fresh setting c5, day 52
/// is c2 and day 53 is c1. Day d's window is a 2x2 matrix filled with d.
inline std::vector<eigenevent::WindowPtr> walkthrough_days() {
    const std::size_t counts[4] = {20, 13, 7, 9};
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t j = 0; j < counts[s]; ++j)
            order.push_back({(static_cast<double>(j) + 0.5) / static_cast<double>(counts[s]), s + 1});
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::size_t> seq;
    for (const auto& o : order) seq.push_back(o.second);
    seq.insert(seq.end(), {5, 5, 2, 1});

    std::vector<eigenevent::WindowPtr> out;
    for (std::size_t d = 1; d <= seq.size(); ++d)
        out.push_back(std::make_shared<const DailyWindow>(
            DailyWindow{static_cast<int>(d), walkthrough_setting(seq[d - 1]), Matrix::Constant(2, 2, static_cast<double>(d))}));
    return out;
}

}  // namespace fixtures
