#pragma once

// Historical tensor bookkeeping and baseline tensor selection.

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eigenevent/error.hpp"
#include "eigenevent/schema.hpp"

namespace eigenevent {

using WindowPtr = std::shared_ptr<const DailyWindow>;

/// Every past window in arrival order together with its setting and
/// per-setting occurrence bookkeeping.
class History {
  public:
    void append(WindowPtr w) {
        const std::size_t index = windows_.size();
        auto [it, inserted] = by_setting_.try_emplace(w->env);
        if (inserted) first_seen_.push_back(w->env);
        it->second.push_back(index);
        if (it->second.size() > dominant_count_) dominant_count_ = it->second.size();
        env_seq_.push_back(w->env);
        windows_.push_back(std::move(w));
    }

    std::size_t size() const { return windows_.size(); }
    bool empty() const { return windows_.empty(); }

    const std::vector<WindowPtr>& windows() const { return windows_; }
    const std::vector<EnvSetting>& env_seq() const { return env_seq_; }

    bool seen(const EnvSetting& e) const { return by_setting_.contains(e); }

    std::size_t count(const EnvSetting& e) const {
        auto it = by_setting_.find(e);
        return it == by_setting_.end() ? 0 : it->second.size();
    }

    /// History indices whose setting equals `e`, oldest first.
    const std::vector<std::size_t>& matches(const EnvSetting& e) const {
        static const std::vector<std::size_t> none;
        auto it = by_setting_.find(e);
        return it == by_setting_.end() ? none : it->second;
    }

    std::size_t distinct_settings() const { return first_seen_.size(); }

    /// Occurrence count of the most frequent setting.
    std::size_t dominant_count() const {
        if (empty()) throw EmptyHistory();
        return dominant_count_;
    }

    /// The most frequent setting; ties go to the setting seen first.
    const EnvSetting& dominant_setting() const {
        if (empty()) throw EmptyHistory();
        for (const EnvSetting& e : first_seen_)
            if (count(e) == dominant_count_) return e;
        return first_seen_.front();
    }

  private:
    std::vector<WindowPtr> windows_;
    std::vector<EnvSetting> env_seq_;
    std::map<EnvSetting, std::vector<std::size_t>> by_setting_;
    std::vector<EnvSetting> first_seen_;
    std::size_t dominant_count_ = 0;
};

inline std::size_t dominant_count(const History& h) { return h.dominant_count(); }

/// Ordered stack of historical windows used as the reference for one day.
struct BaselineTensor {
    std::vector<WindowPtr> slices;
    /// Size target: occurrence count of the dominant setting.
    std::size_t capacity = 0;
    /// Number of leading slices taken from windows sharing today's setting.
    std::size_t matched = 0;

    bool empty() const { return slices.empty(); }
    std::size_t size() const { return slices.size(); }

    Tensor3 tensor() const {
        std::vector<const Matrix*> ptrs;
        ptrs.reserve(slices.size());
        for (const WindowPtr& w : slices) ptrs.push_back(&w->counts);
        return Tensor3::from_slices(ptrs);
    }
};

/// Dynamic baseline update. An empty baseline receives today's window.
/// Otherwise the result holds the `capacity` most recent historical windows
/// (newest last), whose first k positions are then overwritten by the k most
/// recent windows sharing setting `e` (most recent first), where
/// k = min(#matches, capacity).
inline BaselineTensor baseline_update(const BaselineTensor& b, const History& history, const EnvSetting& e,
                                      const WindowPtr& today) {
    if (b.empty() || history.empty()) {
        BaselineTensor out;
        out.slices.push_back(today);
        out.capacity = 1;
        return out;
    }

    BaselineTensor out;
    out.capacity = history.dominant_count();
    const auto& windows = history.windows();
    const std::size_t n = std::min(out.capacity, windows.size());
    out.slices.assign(windows.end() - static_cast<std::ptrdiff_t>(n), windows.end());

    const auto& matches = history.matches(e);
    const std::size_t k = std::min(matches.size(), n);
    for (std::size_t j = 0; j < k; ++j) out.slices[j] = windows[matches[matches.size() - 1 - j]];
    out.matched = k;
    return out;
}

enum class BaselineMode { dynamic, fixed_history, env_match_only };

inline std::string to_string(BaselineMode m) {
    switch (m) {
        case BaselineMode::dynamic: return "dynamic";
        case BaselineMode::fixed_history: return "fixed-history";
        case BaselineMode::env_match_only: return "env-match-only";
    }
    return "?";
}

inline BaselineMode parse_baseline_mode(const std::string& s) {
    if (s == "dynamic") return BaselineMode::dynamic;
    if (s == "fixed-history") return BaselineMode::fixed_history;
    if (s == "env-match-only") return BaselineMode::env_match_only;
    throw ConfigError("unknown baseline mode '" + s + "'");
}

/// The last `days` windows regardless of setting, newest last.
inline BaselineTensor fixed_history_baseline(const History& history, std::size_t days, const WindowPtr& today) {
    BaselineTensor out;
    if (history.empty()) {
        out.slices.push_back(today);
        out.capacity = 1;
        return out;
    }
    const auto& windows = history.windows();
    const std::size_t n = std::min(days, windows.size());
    out.slices.assign(windows.end() - static_cast<std::ptrdiff_t>(n), windows.end());
    out.capacity = days;
    return out;
}

/// Every historical window sharing setting `e`, most recent first. Empty when
/// the setting has never been seen.
inline BaselineTensor env_match_baseline(const History& history, const EnvSetting& e) {
    BaselineTensor out;
    const auto& matches = history.matches(e);
    for (auto it = matches.rbegin(); it != matches.rend(); ++it) out.slices.push_back(history.windows()[*it]);
    out.capacity = out.matched = out.slices.size();
    return out;
}

}  // namespace eigenevent
