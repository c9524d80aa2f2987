#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fallrisk/labeling.hpp"
#include "fallrisk/types.hpp"

namespace fallrisk {

enum class ExclusionReason {
    too_short,
    too_long,
    early_fall,
    late_fall,
    too_few_assessments
};

inline const char* to_string(ExclusionReason r) {
    switch (r) {
        case ExclusionReason::too_short: return "too_short";
        case ExclusionReason::too_long: return "too_long";
        case ExclusionReason::early_fall: return "early_fall";
        case ExclusionReason::late_fall: return "late_fall";
        case ExclusionReason::too_few_assessments: return "too_few_assessments";
    }
    return "too_short";
}

struct ExclusionCriteria {
    int min_length_days = 2;
    int max_length_days = 21;
    int min_assessments = 3;
    int min_fall_day = 3;
    int max_fall_day = 21;
};

struct ExclusionResult {
    std::vector<Encounter> kept;
    std::map<std::string, std::size_t> tally;  // reason -> count
};

namespace detail {

/// Drops all days and assessments at or after the fall day. The retained
/// series ends the day before the fall; the fall itself is kept only as a
/// marker flag.
inline Encounter truncate_at_fall(Encounter e) {
    if (!e.fall_day) return e;
    const int keep_days = *e.fall_day - 1;
    e.admit_length_days = keep_days;
    e.daily_targeted.resize(static_cast<std::size_t>(keep_days));
    e.daily_nontargeted.resize(static_cast<std::size_t>(keep_days));
    std::vector<AssessmentRecord> kept;
    for (auto& a : e.assessments)
        if (a.day < *e.fall_day) kept.push_back(std::move(a));
    e.assessments = std::move(kept);
    e.truncated_at_fall = true;
    e.fall_day.reset();
    return e;
}

}  // namespace detail

/// Applies the inclusion rules. Fall-window bounds are checked before the
/// stay-length bounds and the encounter is truncated at the fall first, so
/// the length and assessment-count rules see the retained series; this also
/// keeps every tally reason reachable (a fall past day 21 would otherwise
/// always hide behind too_long). Each excluded encounter is tallied once,
/// under the first failing rule.
inline ExclusionResult apply_exclusions(const std::vector<Encounter>& encounters,
                                        const ExclusionCriteria& criteria = {}) {
    ExclusionResult out;
    for (const auto& e : encounters) {
        std::optional<ExclusionReason> reason;
        if (e.fall_day && *e.fall_day < criteria.min_fall_day)
            reason = ExclusionReason::early_fall;
        else if (e.fall_day && *e.fall_day > criteria.max_fall_day)
            reason = ExclusionReason::late_fall;

        if (!reason) {
            Encounter kept = e.fall_day ? detail::truncate_at_fall(e) : e;
            if (kept.admit_length_days < criteria.min_length_days)
                reason = ExclusionReason::too_short;
            else if (kept.admit_length_days > criteria.max_length_days)
                reason = ExclusionReason::too_long;
            else if (static_cast<int>(kept.assessments.size()) < criteria.min_assessments)
                reason = ExclusionReason::too_few_assessments;
            else
                out.kept.push_back(std::move(kept));
        }
        if (reason) ++out.tally[to_string(*reason)];
    }
    return out;
}

struct FallMatch {
    std::string fall_encounter_id;
    std::vector<std::string> matched_ids;  // up to 3, best shared-kind counts
};

struct MatchDiagnostics {
    std::vector<FallMatch> matches;
    std::vector<std::string> skipped_fall_ids;  // no full pre-fall window
};

namespace detail {

inline std::set<std::string> nontargeted_kinds_on(const Encounter& e, int first_day,
                                                  int last_day) {
    std::set<std::string> kinds;
    for (int d = first_day; d <= last_day; ++d)
        for (const auto& k : e.daily_nontargeted[static_cast<std::size_t>(d - 1)])
            kinds.insert(k);
    return kinds;
}

inline std::size_t shared_kind_count(const std::set<std::string>& a,
                                     const std::set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& k : a)
        if (b.count(k)) ++n;
    return n;
}

}  // namespace detail

/// For each high-risk fall encounter, finds indeterminate encounters
/// containing a consecutive-day window with the identical ordered targeted
/// pattern as the pre-fall window, then keeps the up-to-3 matches sharing
/// the most non-targeted intervention kinds with the pre-fall days (ties by
/// ascending id). Windows compare unpadded day triples; the pre-fall window
/// is the last window_days retained days of the truncated encounter.
inline MatchDiagnostics match_fall_encounters(const std::vector<Encounter>& high_fall,
                                              const std::vector<Encounter>& indeterminate,
                                              const LabelingPolicy& policy = {}) {
    policy.validate();
    const int w = policy.window_days;
    MatchDiagnostics out;

    for (const auto& fe : high_fall) {
        if (fe.admit_length_days < w) {
            out.skipped_fall_ids.push_back(fe.id);
            continue;
        }
        const int pf_first = fe.admit_length_days - w + 1;
        const int pf_last = fe.admit_length_days;
        std::vector<int> pattern(fe.daily_targeted.end() - w, fe.daily_targeted.end());
        const auto pf_kinds = detail::nontargeted_kinds_on(fe, pf_first, pf_last);

        struct Candidate {
            std::size_t shared = 0;
            std::string id;
        };
        std::vector<Candidate> candidates;
        for (const auto& ce : indeterminate) {
            std::size_t best_shared = 0;
            bool matched = false;
            for (int start = 0; start + w <= ce.admit_length_days; ++start) {
                if (!std::equal(pattern.begin(), pattern.end(),
                                ce.daily_targeted.begin() + start))
                    continue;
                matched = true;
                const auto kinds = detail::nontargeted_kinds_on(ce, start + 1, start + w);
                best_shared = std::max(best_shared, detail::shared_kind_count(kinds, pf_kinds));
            }
            if (matched) candidates.push_back({best_shared, ce.id});
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.shared != b.shared) return a.shared > b.shared;
            return a.id < b.id;
        });
        FallMatch m;
        m.fall_encounter_id = fe.id;
        for (std::size_t i = 0; i < candidates.size() && i < 3; ++i)
            m.matched_ids.push_back(candidates[i].id);
        out.matches.push_back(std::move(m));
    }
    return out;
}

struct LabeledEncounter {
    Encounter encounter;  // post-truncation
    RiskLabel risk;
    bool promoted = false;  // indeterminate promoted to high by fall matching
};

struct Cohort {
    std::vector<LabeledEncounter> encounters;
    std::map<std::string, std::size_t> exclusion_tally;
    std::size_t low_count = 0;            // final binary negatives
    std::size_t high_count = 0;           // high + promoted matches
    std::size_t indeterminate_count = 0;  // left unlabeled for training
    std::size_t native_high_count = 0;    // high before promotions
    std::size_t promoted_count = 0;
    MatchDiagnostics matching;

    /// Final binary training label; empty for indeterminate encounters.
    static std::optional<int> binary_label(const LabeledEncounter& le) {
        if (le.risk.label == RiskLabelKind::low && !le.promoted) return 0;
        if (le.risk.label == RiskLabelKind::high || le.promoted) return 1;
        return std::nullopt;
    }
};

/// Full cohort construction: exclusions, window labeling, fall-encounter
/// matching, and promotion of matched indeterminate encounters to high.
inline Cohort build_cohort(const std::vector<Encounter>& encounters,
                           const LabelingPolicy& policy = {},
                           const ExclusionCriteria& criteria = {}) {
    policy.validate();
    Cohort cohort;
    auto excl = apply_exclusions(encounters, criteria);
    cohort.exclusion_tally = std::move(excl.tally);

    std::vector<Encounter> high_fall;
    std::vector<Encounter> indeterminate;
    for (auto& e : excl.kept) {
        LabeledEncounter le;
        le.risk = label_encounter(e, policy);
        if (le.risk.label == RiskLabelKind::high && e.truncated_at_fall)
            high_fall.push_back(e);
        else if (le.risk.label == RiskLabelKind::indeterminate)
            indeterminate.push_back(e);
        le.encounter = std::move(e);
        cohort.encounters.push_back(std::move(le));
    }

    cohort.matching = match_fall_encounters(high_fall, indeterminate, policy);
    std::set<std::string> promoted_ids;
    for (const auto& m : cohort.matching.matches)
        promoted_ids.insert(m.matched_ids.begin(), m.matched_ids.end());
    for (auto& le : cohort.encounters)
        if (promoted_ids.count(le.encounter.id)) le.promoted = true;

    for (const auto& le : cohort.encounters) {
        if (le.risk.label == RiskLabelKind::high) ++cohort.native_high_count;
        if (le.promoted) ++cohort.promoted_count;
        auto y = Cohort::binary_label(le);
        if (!y)
            ++cohort.indeterminate_count;
        else if (*y == 0)
            ++cohort.low_count;
        else
            ++cohort.high_count;
    }
    if (cohort.low_count + cohort.high_count == 0)
        throw ValidationError("build_cohort: no binary-labeled encounters remain");
    return cohort;
}

}  // namespace fallrisk
