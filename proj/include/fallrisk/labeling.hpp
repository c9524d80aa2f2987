#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "fallrisk/types.hpp"

namespace fallrisk {

/// Exact fraction, used for the "stretch spanning at least half of the
/// encounter" rule so the required day count is computed without rounding.
struct Rational {
    long long num = 1;
    long long den = 2;
};

/// Rules that turn a daily targeted-intervention series into a risk label.
/// Defaults: at most 1 per 3-day window sustains Low, at least 6 sustains
/// High, the sustained run must cover at least half the encounter days,
/// and the first/last day count twice when forming windows.
struct LabelingPolicy {
    int low_max_per_window = 1;
    int high_min_per_window = 6;
    int window_days = 3;
    Rational stretch_fraction{1, 2};
    bool edge_doubling = true;

    void validate() const {
        if (low_max_per_window < 0 || low_max_per_window >= high_min_per_window)
            throw ValidationError("labeling policy requires 0 <= low_max_per_window < high_min_per_window");
        if (window_days < 1) throw ValidationError("window_days must be >= 1");
        if (stretch_fraction.num <= 0 || stretch_fraction.den <= 0 ||
            stretch_fraction.num > stretch_fraction.den)
            throw ValidationError("stretch_fraction must lie in (0, 1]");
    }

    /// ceil(stretch_fraction * length): minimum day-coverage of a qualifying run.
    int required_span(int length) const {
        return static_cast<int>((static_cast<long long>(length) * stretch_fraction.num +
                                 stretch_fraction.den - 1) /
                                stretch_fraction.den);
    }
};

/// One sliding window over the (possibly edge-doubled) day sequence:
/// the targeted-count sum plus the original days it covers.
struct WindowSum {
    long long sum = 0;
    int first_day = 1;  // 1-based original days, inclusive
    int last_day = 1;
};

/// Slides a window of policy.window_days entries over the day sequence.
/// With edge doubling the sequence [d1..dn] is padded to [d1,d1,d2..dn,dn]
/// before windowing, so for a 3-day window there are exactly n windows and
/// every original day is covered once n >= 2.
inline std::vector<WindowSum> padded_windows(const std::vector<int>& daily_targeted,
                                             const LabelingPolicy& policy) {
    policy.validate();
    const int n = static_cast<int>(daily_targeted.size());
    if (n < 1) throw ValidationError("padded_windows: day sequence is empty");

    // padded index -> (value, original 1-based day)
    std::vector<int> values;
    std::vector<int> days;
    if (policy.edge_doubling) {
        values.reserve(static_cast<std::size_t>(n) + 2);
        days.reserve(static_cast<std::size_t>(n) + 2);
        values.push_back(daily_targeted.front());
        days.push_back(1);
        for (int i = 0; i < n; ++i) {
            values.push_back(daily_targeted[static_cast<std::size_t>(i)]);
            days.push_back(i + 1);
        }
        values.push_back(daily_targeted.back());
        days.push_back(n);
    } else {
        for (int i = 0; i < n; ++i) {
            values.push_back(daily_targeted[static_cast<std::size_t>(i)]);
            days.push_back(i + 1);
        }
    }

    const int padded = static_cast<int>(values.size());
    if (padded < policy.window_days)
        throw ValidationError("padded_windows: sequence shorter than one full window");

    std::vector<WindowSum> out;
    out.reserve(static_cast<std::size_t>(padded - policy.window_days + 1));
    for (int start = 0; start + policy.window_days <= padded; ++start) {
        WindowSum w;
        w.sum = 0;
        w.first_day = days[static_cast<std::size_t>(start)];
        w.last_day = days[static_cast<std::size_t>(start + policy.window_days - 1)];
        for (int k = 0; k < policy.window_days; ++k)
            w.sum += values[static_cast<std::size_t>(start + k)];
        out.push_back(w);
    }
    return out;
}

enum class RiskLabelKind { low, indeterminate, high };

inline const char* to_string(RiskLabelKind k) {
    switch (k) {
        case RiskLabelKind::low: return "low";
        case RiskLabelKind::indeterminate: return "indeterminate";
        case RiskLabelKind::high: return "high";
    }
    return "indeterminate";
}

inline RiskLabelKind risk_label_from_string(std::string_view s) {
    if (s == "low") return RiskLabelKind::low;
    if (s == "indeterminate") return RiskLabelKind::indeterminate;
    if (s == "high") return RiskLabelKind::high;
    throw ValidationError("unknown risk label: " + std::string(s));
}

/// A maximal run of consecutive qualifying windows, reported as the
/// original-day interval it covers.
struct EvidenceRun {
    int start_day = 1;
    int end_day = 1;
    int span = 1;  // number of distinct covered days == end - start + 1
    bool high = false;  // true for a High-qualifying run, false for Low
};

struct RiskLabel {
    RiskLabelKind label = RiskLabelKind::indeterminate;
    std::vector<EvidenceRun> evidence;
};

namespace detail {

/// Collects maximal runs of consecutive windows satisfying `qualifies`,
/// keeping those whose covered-day union reaches `required_span`.
/// Coverage of consecutive windows is an interval, so the union size is
/// last_day - first_day + 1 of the run ends.
template <typename Pred>
std::vector<EvidenceRun> qualifying_runs(const std::vector<WindowSum>& windows,
                                         int required_span, bool high, Pred qualifies) {
    std::vector<EvidenceRun> runs;
    const int n = static_cast<int>(windows.size());
    int i = 0;
    while (i < n) {
        if (!qualifies(windows[static_cast<std::size_t>(i)].sum)) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < n && qualifies(windows[static_cast<std::size_t>(j + 1)].sum)) ++j;
        EvidenceRun run;
        run.start_day = windows[static_cast<std::size_t>(i)].first_day;
        run.end_day = windows[static_cast<std::size_t>(j)].last_day;
        run.span = run.end_day - run.start_day + 1;
        run.high = high;
        if (run.span >= required_span) runs.push_back(run);
        i = j + 1;
    }
    return runs;
}

}  // namespace detail

/// Labels one encounter from its targeted-intervention series. Low requires
/// a sustained run of windows with sum <= low_max covering at least the
/// required span of days; High analogously with sum >= high_min. When both
/// criteria produce a witness the evidence conflicts and the encounter is
/// reported indeterminate with both runs attached.
inline RiskLabel label_encounter(const Encounter& e, const LabelingPolicy& policy) {
    policy.validate();
    const auto windows = padded_windows(e.daily_targeted, policy);
    const int need = policy.required_span(e.admit_length_days);

    auto low_runs = detail::qualifying_runs(
        windows, need, false, [&](long long s) { return s <= policy.low_max_per_window; });
    auto high_runs = detail::qualifying_runs(
        windows, need, true, [&](long long s) { return s >= policy.high_min_per_window; });

    RiskLabel out;
    if (!low_runs.empty() && high_runs.empty()) {
        out.label = RiskLabelKind::low;
        out.evidence = std::move(low_runs);
    } else if (high_runs.empty() == false && low_runs.empty()) {
        out.label = RiskLabelKind::high;
        out.evidence = std::move(high_runs);
    } else if (!low_runs.empty() && !high_runs.empty()) {
        out.label = RiskLabelKind::indeterminate;
        out.evidence = std::move(low_runs);
        out.evidence.insert(out.evidence.end(), high_runs.begin(), high_runs.end());
    } else {
        out.label = RiskLabelKind::indeterminate;
    }
    return out;
}

}  // namespace fallrisk
