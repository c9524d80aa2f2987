#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fallrisk/rng.hpp"
#include "fallrisk/types.hpp"

namespace fallrisk {

/// Logistic occurrence link for one binary assessment item: the intercept
/// is calibrated at generation time so the population marginal hits
/// `target` exactly under the latent-risk distribution.
struct BinaryItemLink {
    double target = 0.1;
    double slope = 0.0;  // log-odds increase from latent risk 0 to 1
};

/// Risk-correlated categorical draw with exact marginals: a uniform copula
/// variate follows the latent risk with probability `mix`, then picks the
/// category whose cumulative band it lands in, bands ordered by rising risk.
struct SingleSelectLink {
    std::array<double, 3> targets{};  // flag categories; remainder selects none
    double mix = 0.3;
};

struct SynthConfig {
    std::size_t n_encounters = 20000;
    std::uint64_t seed = 1;

    // latent risk r = u^latent_power for u ~ Uniform(0,1)
    double latent_power = 1.0;

    // expected daily targeted interventions: scale * r^power
    double targeted_scale = 4.0;
    double targeted_power = 2.0;

    // per-day fall hazard: base + slope * r^2
    double fall_hazard_base = 0.0002;
    double fall_hazard_slope = 0.003;

    // length of stay: los_min + geometric(p), capped at los_max
    int los_min = 2;
    int los_max = 21;
    double los_geometric_p = 0.15;
    double extra_assessment_prob = 0.4;  // chance of a second record per day

    // multi-select binary items; targets follow the published occurrence
    // rates, slopes encode how informative each item is about latent risk
    // (deliberately not proportional to the published weights)
    BinaryItemLink elim_incontinence{0.174, 2.5};
    BinaryItemLink elim_urgency_frequency{0.072, 2.5};
    BinaryItemLink cog_altered_awareness{0.095, 4.0};
    BinaryItemLink cog_impulsive{0.029, 4.0};
    BinaryItemLink cog_limited_understanding{0.047, 4.0};
    BinaryItemLink fall_history_6mo{0.119, 0.0};  // fixed per encounter
    BinaryItemLink mob_requires_assistance{0.511, 5.0};
    BinaryItemLink mob_unsteady_gait{0.080, 3.0};
    BinaryItemLink mob_visual_auditory_impairment{0.015, 2.0};

    SingleSelectLink age{{0.221, 0.197, 0.132}, 0.30};          // per encounter
    SingleSelectLink medications{{0.337, 0.407, 0.032}, 0.15};  // per record
    SingleSelectLink equipment{{0.403, 0.213, 0.129}, 0.35};    // per record

    // mobility scores: value = intercept + slope * r + noise
    double jhhlm_intercept = 7.0, jhhlm_slope = -4.5, jhhlm_noise_sd = 1.2;
    double jhhlm_present_prob = 0.8, jhhlm_encounter_missing_prob = 0.05;
    double ampac_intercept = 70.0, ampac_slope = -45.0, ampac_noise_sd = 10.0;
    double ampac_present_prob = 0.85, ampac_encounter_missing_prob = 0.05;

    double comorbidity_mean_base = 2.0, comorbidity_mean_slope = 4.0;

    double sex_female_prob = 0.502;
    std::array<double, 3> race_probs{0.334, 0.551, 0.115};  // black, white, other
    std::array<double, 3> hospital_probs{0.5, 0.3, 0.2};
    // service shares in rising-risk order:
    // surgery, other, oncology, medicine, orthopedics, neurology, neurosurgery
    std::array<double, 7> service_probs{0.179, 0.043, 0.071, 0.588, 0.036, 0.031, 0.053};
    double service_mix = 0.2;

    int nontargeted_kinds = 12;
    double nontargeted_base = 0.04;
    double nontargeted_slope = 0.20;

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (n_encounters == 0) throw ValidationError("synth: n_encounters must be positive");
        if (latent_power <= 0.0) throw ValidationError("synth: latent_power must be positive");
        if (targeted_scale < 0.0 || targeted_power < 0.0)
            throw ValidationError("synth: intensity link must be non-decreasing in risk");
        if (!prob(fall_hazard_base) || fall_hazard_slope < 0.0)
            throw ValidationError("synth: invalid fall hazard");
        if (los_min < 1 || los_max < los_min) throw ValidationError("synth: invalid stay bounds");
        if (!(los_geometric_p > 0.0 && los_geometric_p <= 1.0))
            throw ValidationError("synth: invalid length-of-stay parameter");
        for (const auto* link :
             {&elim_incontinence, &elim_urgency_frequency, &cog_altered_awareness,
              &cog_impulsive, &cog_limited_understanding, &fall_history_6mo,
              &mob_requires_assistance, &mob_unsteady_gait, &mob_visual_auditory_impairment})
            if (!prob(link->target)) throw ValidationError("synth: item target outside [0,1]");
        for (const auto* group : {&age, &medications, &equipment}) {
            double total = 0.0;
            for (double t : group->targets) {
                if (!prob(t)) throw ValidationError("synth: category target outside [0,1]");
                total += t;
            }
            if (total > 1.0 + 1e-12)
                throw ValidationError("synth: category targets exceed 1");
            if (!prob(group->mix)) throw ValidationError("synth: mix outside [0,1]");
        }
        if (!prob(sex_female_prob) || !prob(jhhlm_present_prob) || !prob(ampac_present_prob) ||
            !prob(jhhlm_encounter_missing_prob) || !prob(ampac_encounter_missing_prob) ||
            !prob(extra_assessment_prob) || !prob(nontargeted_base))
            throw ValidationError("synth: probability outside [0,1]");
        if (nontargeted_kinds < 0) throw ValidationError("synth: negative kind count");
    }
};

struct SynthResult {
    std::vector<Encounter> encounters;
    std::vector<double> latent_risk;  // aligned with encounters
};

namespace detail {

/// E[sigmoid(alpha + slope * r)] under r = u^latent_power, by Simpson rule.
inline double marginal_occurrence(double alpha, double slope, double latent_power) {
    constexpr int kSteps = 512;  // even
    double total = 0.0;
    for (int i = 0; i <= kSteps; ++i) {
        double u = static_cast<double>(i) / kSteps;
        double r = std::pow(u, latent_power);
        double v = 1.0 / (1.0 + std::exp(-(alpha + slope * r)));
        double weight = (i == 0 || i == kSteps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        total += weight * v;
    }
    return total / (3.0 * kSteps);
}

/// Intercept such that the marginal occurrence equals the target.
inline double calibrate_intercept(double target, double slope, double latent_power) {
    if (target <= 0.0) return -40.0;
    if (target >= 1.0) return 40.0;
    double lo = -40.0;
    double hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (marginal_occurrence(mid, slope, latent_power) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// 0 = none, 1..3 = flag categories in rising-risk order.
inline int copula_category(std::mt19937_64& rng, double r, const SingleSelectLink& link) {
    double v = unit_double(rng) < link.mix ? r : unit_double(rng);
    double none = 1.0 - link.targets[0] - link.targets[1] - link.targets[2];
    double c1 = none + link.targets[0];
    double c2 = c1 + link.targets[1];
    if (v < none) return 0;
    if (v < c1) return 1;
    if (v < c2) return 2;
    return 3;
}

inline int plain_category(std::mt19937_64& rng, const double* probs, int count) {
    double v = unit_double(rng);
    double cum = 0.0;
    for (int i = 0; i < count; ++i) {
        cum += probs[i];
        if (v < cum) return i;
    }
    return count - 1;
}

}  // namespace detail

/// Generates a cohort with known latent risk. All structure flows from the
/// scalar risk: assessment items through calibrated logistic links,
/// intervention counts through the intensity link, and falls through the
/// hazard link. Every encounter uses its own seed substream, so output is
/// byte-identical for a given config regardless of evaluation order.
inline SynthResult generate(const SynthConfig& config) {
    config.validate();
    SynthResult out;
    out.encounters.reserve(config.n_encounters);
    out.latent_risk.reserve(config.n_encounters);

    struct CalibratedItem {
        const BinaryItemLink* link;
        double alpha;
        int item_index;
    };
    // multi-select items drawn per assessment record
    std::vector<CalibratedItem> per_record = {
        {&config.elim_incontinence, 0.0, static_cast<int>(JhfratItem::elim_incontinence)},
        {&config.elim_urgency_frequency, 0.0,
         static_cast<int>(JhfratItem::elim_urgency_frequency)},
        {&config.cog_altered_awareness, 0.0,
         static_cast<int>(JhfratItem::cog_altered_awareness)},
        {&config.cog_impulsive, 0.0, static_cast<int>(JhfratItem::cog_impulsive)},
        {&config.cog_limited_understanding, 0.0,
         static_cast<int>(JhfratItem::cog_limited_understanding)},
        {&config.mob_requires_assistance, 0.0,
         static_cast<int>(JhfratItem::mob_requires_assistance)},
        {&config.mob_unsteady_gait, 0.0, static_cast<int>(JhfratItem::mob_unsteady_gait)},
        {&config.mob_visual_auditory_impairment, 0.0,
         static_cast<int>(JhfratItem::mob_visual_auditory_impairment)},
    };
    for (auto& item : per_record)
        item.alpha =
            detail::calibrate_intercept(item.link->target, item.link->slope, config.latent_power);
    double fall_hist_alpha = detail::calibrate_intercept(
        config.fall_history_6mo.target, config.fall_history_6mo.slope, config.latent_power);

    std::vector<std::string> kind_names;
    for (int k = 0; k < config.nontargeted_kinds; ++k)
        kind_names.push_back("nt_" + std::string(k < 9 ? "0" : "") + std::to_string(k + 1));

    char id_buf[24];
    for (std::size_t i = 0; i < config.n_encounters; ++i) {
        std::mt19937_64 rng(substream_seed(config.seed, i));
        Encounter e;
        std::snprintf(id_buf, sizeof(id_buf), "enc-%06zu", i + 1);
        e.id = id_buf;

        const double r = std::pow(unit_double(rng), config.latent_power);
        const int los = config.los_min +
                        std::min(geometric_draw(rng, config.los_geometric_p),
                                 config.los_max - config.los_min);
        e.admit_length_days = los;
        e.hospital = static_cast<Hospital>(
            detail::plain_category(rng, config.hospital_probs.data(), 3));

        const int age_cat = detail::copula_category(rng, r, config.age);
        switch (age_cat) {
            case 0: e.demographics.age_years = 18 + static_cast<int>(bounded_uint(rng, 42)); break;
            case 1: e.demographics.age_years = 60 + static_cast<int>(bounded_uint(rng, 10)); break;
            case 2: e.demographics.age_years = 70 + static_cast<int>(bounded_uint(rng, 10)); break;
            default: e.demographics.age_years = 80 + static_cast<int>(bounded_uint(rng, 15)); break;
        }
        e.demographics.sex = unit_double(rng) < config.sex_female_prob ? Sex::female : Sex::male;
        e.demographics.race =
            static_cast<Race>(detail::plain_category(rng, config.race_probs.data(), 3));
        {
            double v = unit_double(rng) < config.service_mix ? r : unit_double(rng);
            static constexpr std::array<Service, 7> rising_risk_order = {
                Service::surgery,      Service::other,       Service::oncology_hematology,
                Service::medicine,     Service::orthopedics, Service::neurology,
                Service::neurosurgery};
            double cum = 0.0;
            e.demographics.service = rising_risk_order.back();
            for (int s = 0; s < 7; ++s) {
                cum += config.service_probs[static_cast<std::size_t>(s)];
                if (v < cum) {
                    e.demographics.service = rising_risk_order[static_cast<std::size_t>(s)];
                    break;
                }
            }
        }
        e.demographics.comorbidity_count = poisson_draw(
            rng, config.comorbidity_mean_base + config.comorbidity_mean_slope * r);

        const bool has_fall_history =
            unit_double(rng) < detail::sigmoid(fall_hist_alpha + config.fall_history_6mo.slope * r);
        const bool jhhlm_missing = unit_double(rng) < config.jhhlm_encounter_missing_prob;
        const bool ampac_missing = unit_double(rng) < config.ampac_encounter_missing_prob;

        const double targeted_mean =
            config.targeted_scale * std::pow(r, config.targeted_power);
        const double kind_prob = std::clamp(
            config.nontargeted_base + config.nontargeted_slope * r, 0.0, 1.0);
        const double fall_hazard = std::clamp(
            config.fall_hazard_base + config.fall_hazard_slope * r * r, 0.0, 1.0);

        for (int day = 1; day <= los; ++day) {
            e.daily_targeted.push_back(poisson_draw(rng, targeted_mean));
            std::vector<std::string> kinds;
            for (int k = 0; k < config.nontargeted_kinds; ++k)
                if (unit_double(rng) < kind_prob)
                    kinds.push_back(kind_names[static_cast<std::size_t>(k)]);
            e.daily_nontargeted.push_back(std::move(kinds));

            const int records = 1 + (unit_double(rng) < config.extra_assessment_prob ? 1 : 0);
            for (int rec = 0; rec < records; ++rec) {
                AssessmentRecord a;
                a.day = day;
                if (age_cat > 0)
                    a.jhfrat_items[static_cast<std::size_t>(kAgeItems[0] + age_cat - 1)] = 1;
                if (has_fall_history)
                    a.jhfrat_items[static_cast<std::size_t>(JhfratItem::fall_history_6mo)] = 1;
                const int med_cat = detail::copula_category(rng, r, config.medications);
                if (med_cat > 0)
                    a.jhfrat_items[static_cast<std::size_t>(kMedicationItems[0] + med_cat - 1)] = 1;
                const int equip_cat = detail::copula_category(rng, r, config.equipment);
                if (equip_cat > 0)
                    a.jhfrat_items[static_cast<std::size_t>(kEquipmentItems[0] + equip_cat - 1)] = 1;
                for (const auto& item : per_record)
                    if (unit_double(rng) < detail::sigmoid(item.alpha + item.link->slope * r))
                        a.jhfrat_items[static_cast<std::size_t>(item.item_index)] = 1;
                if (!jhhlm_missing && unit_double(rng) < config.jhhlm_present_prob) {
                    double v = config.jhhlm_intercept + config.jhhlm_slope * r +
                               config.jhhlm_noise_sd * normal_draw(rng);
                    a.jhhlm = static_cast<int>(std::clamp(std::lround(v), 1L, 8L));
                }
                if (!ampac_missing && unit_double(rng) < config.ampac_present_prob) {
                    double v = config.ampac_intercept + config.ampac_slope * r +
                               config.ampac_noise_sd * normal_draw(rng);
                    a.ampac = std::clamp(v, 0.0, 100.0);
                }
                e.assessments.push_back(std::move(a));
            }

            if (!e.fall_day && unit_double(rng) < fall_hazard) e.fall_day = day;
        }

        out.encounters.push_back(std::move(e));
        out.latent_risk.push_back(r);
    }
    return out;
}

}  // namespace fallrisk
