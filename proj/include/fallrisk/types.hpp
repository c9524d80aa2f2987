#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fallrisk {

/// Thrown when an input value or structure violates a documented schema
/// or precondition. CLI maps this to the validation exit code.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Hospital { site_a, site_b, site_c };
enum class Sex { female, male };
enum class Race { black, white, other };
enum class Service {
    medicine,
    surgery,
    oncology_hematology,
    neurosurgery,
    orthopedics,
    neurology,
    other
};

// The 18 binary assessment items, in canonical order. The first three
// categories listed per single-select group are Age, Medications and
// Patient Care Equipment; the rest are multi-select.
inline constexpr int kNumJhfratItems = 18;

enum class JhfratItem : int {
    age_60_69 = 0,
    age_70_79,
    age_80_plus,
    elim_incontinence,
    elim_urgency_frequency,
    cog_altered_awareness,
    cog_impulsive,
    cog_limited_understanding,
    equip_one,
    equip_two,
    equip_three_plus,
    fall_history_6mo,
    med_one_drug,
    med_two_plus_drugs,
    med_sedated_procedure,
    mob_requires_assistance,
    mob_unsteady_gait,
    mob_visual_auditory_impairment
};

inline constexpr std::array<std::string_view, kNumJhfratItems> kJhfratItemNames = {
    "age_60_69",
    "age_70_79",
    "age_80_plus",
    "elim_incontinence",
    "elim_urgency_frequency",
    "cog_altered_awareness",
    "cog_impulsive",
    "cog_limited_understanding",
    "equip_one",
    "equip_two",
    "equip_three_plus",
    "fall_history_6mo",
    "med_one_drug",
    "med_two_plus_drugs",
    "med_sedated_procedure",
    "mob_requires_assistance",
    "mob_unsteady_gait",
    "mob_visual_auditory_impairment",
};

/// Published additive weights of the assessment tool, one per item.
inline constexpr std::array<double, kNumJhfratItems> kJhfratPublishedCoefficients = {
    1, 2, 3,  // age
    2, 2,     // elimination
    1, 2, 4,  // cognition
    1, 2, 3,  // patient care equipment
    5,        // fall history
    3, 5, 7,  // medications
    2, 2, 2,  // mobility
};

// Item index ranges of the three single-select categories.
inline constexpr std::array<int, 3> kAgeItems = {0, 1, 2};
inline constexpr std::array<int, 3> kEquipmentItems = {8, 9, 10};
inline constexpr std::array<int, 3> kMedicationItems = {12, 13, 14};

struct Demographics {
    int age_years = 0;
    Sex sex = Sex::female;
    Race race = Race::other;
    Service service = Service::other;
    int comorbidity_count = 0;
};

struct AssessmentRecord {
    int day = 1;  // 1-based encounter day
    std::array<std::uint8_t, kNumJhfratItems> jhfrat_items{};
    std::optional<int> jhhlm;     // ordinal 1..8
    std::optional<double> ampac;  // non-negative, any consistent scale

    /// Published total score of this single record.
    double jhfrat_score() const {
        double s = 0.0;
        for (int j = 0; j < kNumJhfratItems; ++j)
            s += kJhfratPublishedCoefficients[static_cast<std::size_t>(j)] * jhfrat_items[static_cast<std::size_t>(j)];
        return s;
    }
};

/// One inpatient stay: the unit of labeling, featurization and scoring.
struct Encounter {
    std::string id;
    Hospital hospital = Hospital::site_a;
    int admit_length_days = 0;
    std::vector<int> daily_targeted;                            // length == admit_length_days
    std::vector<std::vector<std::string>> daily_nontargeted;    // kind identifiers per day
    std::vector<AssessmentRecord> assessments;                  // non-decreasing in day
    Demographics demographics;
    std::optional<int> fall_day;  // 1-based day of first documented fall
    bool truncated_at_fall = false;
};

inline const char* to_string(Hospital h) {
    switch (h) {
        case Hospital::site_a: return "site_a";
        case Hospital::site_b: return "site_b";
        case Hospital::site_c: return "site_c";
    }
    return "site_a";
}

inline const char* to_string(Sex s) {
    return s == Sex::female ? "female" : "male";
}

inline const char* to_string(Race r) {
    switch (r) {
        case Race::black: return "black";
        case Race::white: return "white";
        case Race::other: return "other";
    }
    return "other";
}

inline const char* to_string(Service s) {
    switch (s) {
        case Service::medicine: return "medicine";
        case Service::surgery: return "surgery";
        case Service::oncology_hematology: return "oncology_hematology";
        case Service::neurosurgery: return "neurosurgery";
        case Service::orthopedics: return "orthopedics";
        case Service::neurology: return "neurology";
        case Service::other: return "other";
    }
    return "other";
}

inline Hospital hospital_from_string(std::string_view s) {
    if (s == "site_a") return Hospital::site_a;
    if (s == "site_b") return Hospital::site_b;
    if (s == "site_c") return Hospital::site_c;
    throw ValidationError("unknown hospital tag: " + std::string(s));
}

inline Sex sex_from_string(std::string_view s) {
    if (s == "female") return Sex::female;
    if (s == "male") return Sex::male;
    throw ValidationError("unknown sex: " + std::string(s));
}

inline Race race_from_string(std::string_view s) {
    if (s == "black") return Race::black;
    if (s == "white") return Race::white;
    if (s == "other") return Race::other;
    throw ValidationError("unknown race: " + std::string(s));
}

inline Service service_from_string(std::string_view s) {
    if (s == "medicine") return Service::medicine;
    if (s == "surgery") return Service::surgery;
    if (s == "oncology_hematology") return Service::oncology_hematology;
    if (s == "neurosurgery") return Service::neurosurgery;
    if (s == "orthopedics") return Service::orthopedics;
    if (s == "neurology") return Service::neurology;
    if (s == "other") return Service::other;
    throw ValidationError("unknown service: " + std::string(s));
}

/// Structural checks on a single encounter. Throws ValidationError with a
/// message naming the offending field.
inline void validate_encounter(const Encounter& e) {
    if (e.admit_length_days < 1)
        throw ValidationError("encounter " + e.id + ": admit_length_days must be >= 1");
    if (static_cast<int>(e.daily_targeted.size()) != e.admit_length_days)
        throw ValidationError("encounter " + e.id + ": daily_targeted length != admit_length_days");
    if (static_cast<int>(e.daily_nontargeted.size()) != e.admit_length_days)
        throw ValidationError("encounter " + e.id + ": daily_nontargeted length != admit_length_days");
    for (int c : e.daily_targeted)
        if (c < 0) throw ValidationError("encounter " + e.id + ": negative daily targeted count");
    int prev_day = 0;
    for (const auto& a : e.assessments) {
        if (a.day < 1 || a.day > e.admit_length_days)
            throw ValidationError("encounter " + e.id + ": assessment day out of range");
        if (a.day < prev_day)
            throw ValidationError("encounter " + e.id + ": assessments not time-ordered");
        prev_day = a.day;
        for (auto v : a.jhfrat_items)
            if (v > 1) throw ValidationError("encounter " + e.id + ": jhfrat item flags must be 0/1");
        auto single_select_ok = [&](const std::array<int, 3>& group) {
            int set = 0;
            for (int j : group) set += a.jhfrat_items[static_cast<std::size_t>(j)];
            return set <= 1;
        };
        if (!single_select_ok(kAgeItems) || !single_select_ok(kMedicationItems) ||
            !single_select_ok(kEquipmentItems))
            throw ValidationError("encounter " + e.id + ": multiple flags in a single-select category");
        if (a.jhhlm && (*a.jhhlm < 1 || *a.jhhlm > 8))
            throw ValidationError("encounter " + e.id + ": jhhlm outside 1..8");
        if (a.ampac && *a.ampac < 0.0)
            throw ValidationError("encounter " + e.id + ": negative ampac");
    }
    if (e.demographics.comorbidity_count < 0)
        throw ValidationError("encounter " + e.id + ": negative comorbidity_count");
    if (e.fall_day && (*e.fall_day < 1 || *e.fall_day > e.admit_length_days))
        throw ValidationError("encounter " + e.id + ": fall_day outside encounter");
}

}  // namespace fallrisk
