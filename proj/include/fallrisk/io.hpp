#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fallrisk/cohort.hpp"
#include "fallrisk/evaluate.hpp"
#include "fallrisk/features.hpp"
#include "fallrisk/scoring.hpp"
#include "fallrisk/solver.hpp"
#include "fallrisk/version.hpp"

namespace fallrisk {

using json = nlohmann::json;

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Writes next to the destination, then renames into place, so consumers
/// never observe a partially written file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// encounters (JSON Lines)

inline json encounter_to_json(const Encounter& e) {
    json j;
    j["id"] = e.id;
    j["hospital"] = to_string(e.hospital);
    j["admit_length_days"] = e.admit_length_days;
    j["daily_targeted"] = e.daily_targeted;
    j["daily_nontargeted"] = e.daily_nontargeted;
    json recs = json::array();
    for (const auto& a : e.assessments) {
        json r;
        r["day"] = a.day;
        r["items"] = std::vector<int>(a.jhfrat_items.begin(), a.jhfrat_items.end());
        if (a.jhhlm) r["jhhlm"] = *a.jhhlm;
        if (a.ampac) r["ampac"] = *a.ampac;
        recs.push_back(std::move(r));
    }
    j["assessments"] = std::move(recs);
    j["demographics"] = {{"age_years", e.demographics.age_years},
                         {"sex", to_string(e.demographics.sex)},
                         {"race", to_string(e.demographics.race)},
                         {"service", to_string(e.demographics.service)},
                         {"comorbidity_count", e.demographics.comorbidity_count}};
    if (e.fall_day) j["fall_day"] = *e.fall_day;
    if (e.truncated_at_fall) j["truncated_at_fall"] = true;
    return j;
}

inline Encounter encounter_from_json(const json& j) {
    Encounter e;
    try {
        e.id = j.at("id").get<std::string>();
        e.hospital = hospital_from_string(j.at("hospital").get<std::string>());
        e.admit_length_days = j.at("admit_length_days").get<int>();
        e.daily_targeted = j.at("daily_targeted").get<std::vector<int>>();
        e.daily_nontargeted = j.at("daily_nontargeted").get<std::vector<std::vector<std::string>>>();
        for (const auto& r : j.at("assessments")) {
            AssessmentRecord a;
            a.day = r.at("day").get<int>();
            auto items = r.at("items").get<std::vector<int>>();
            if (items.size() != kNumJhfratItems)
                throw ValidationError("assessment items must have 18 entries");
            for (std::size_t k = 0; k < items.size(); ++k)
                a.jhfrat_items[k] = static_cast<std::uint8_t>(items[k]);
            if (r.contains("jhhlm")) a.jhhlm = r.at("jhhlm").get<int>();
            if (r.contains("ampac")) a.ampac = r.at("ampac").get<double>();
            e.assessments.push_back(std::move(a));
        }
        const auto& d = j.at("demographics");
        e.demographics.age_years = d.at("age_years").get<int>();
        e.demographics.sex = sex_from_string(d.at("sex").get<std::string>());
        e.demographics.race = race_from_string(d.at("race").get<std::string>());
        e.demographics.service = service_from_string(d.at("service").get<std::string>());
        e.demographics.comorbidity_count = d.at("comorbidity_count").get<int>();
        if (j.contains("fall_day")) e.fall_day = j.at("fall_day").get<int>();
        if (j.contains("truncated_at_fall"))
            e.truncated_at_fall = j.at("truncated_at_fall").get<bool>();
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("encounter schema violation: ") + ex.what());
    }
    validate_encounter(e);
    return e;
}

inline std::vector<Encounter> read_encounters_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<Encounter> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": invalid JSON: " + ex.what());
        }
        try {
            out.push_back(encounter_from_json(j));
        } catch (const ValidationError& ex) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return out;
}

inline void write_encounters_jsonl(const std::filesystem::path& path,
                                   const std::vector<Encounter>& encounters) {
    std::string buf;
    for (const auto& e : encounters) {
        buf += encounter_to_json(e).dump();
        buf += '\n';
    }
    atomic_write_file(path, buf);
}

// ---------------------------------------------------------------------------
// labeled cohort (JSON Lines)

inline json labeled_to_json(const LabeledEncounter& le) {
    json j;
    j["encounter"] = encounter_to_json(le.encounter);
    j["label"] = to_string(le.risk.label);
    j["promoted"] = le.promoted;
    json ev = json::array();
    for (const auto& run : le.risk.evidence)
        ev.push_back({{"start_day", run.start_day},
                      {"end_day", run.end_day},
                      {"span", run.span},
                      {"high", run.high}});
    j["evidence"] = std::move(ev);
    return j;
}

inline LabeledEncounter labeled_from_json(const json& j) {
    LabeledEncounter le;
    try {
        le.encounter = encounter_from_json(j.at("encounter"));
        le.risk.label = risk_label_from_string(j.at("label").get<std::string>());
        le.promoted = j.at("promoted").get<bool>();
        for (const auto& ev : j.at("evidence")) {
            EvidenceRun run;
            run.start_day = ev.at("start_day").get<int>();
            run.end_day = ev.at("end_day").get<int>();
            run.span = ev.at("span").get<int>();
            run.high = ev.at("high").get<bool>();
            le.risk.evidence.push_back(run);
        }
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("labeled-encounter schema violation: ") + ex.what());
    }
    return le;
}

inline std::vector<LabeledEncounter> read_labeled_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<LabeledEncounter> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(labeled_from_json(json::parse(line)));
        } catch (const json::exception& ex) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": invalid JSON: " + ex.what());
        } catch (const ValidationError& ex) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return out;
}

inline void write_labeled_jsonl(const std::filesystem::path& path,
                                const std::vector<LabeledEncounter>& labeled) {
    std::string buf;
    for (const auto& le : labeled) {
        buf += labeled_to_json(le).dump();
        buf += '\n';
    }
    atomic_write_file(path, buf);
}

// ---------------------------------------------------------------------------
// feature dictionary and matrix

inline json dictionary_to_json(const FeatureDictionary& dict) {
    json features = json::array();
    for (const auto& f : dict.features)
        features.push_back(
            {{"name", f.name},
             {"source", f.source == FeatureSource::jhfrat ? "jhfrat" : "ehr"},
             {"category", f.category},
             {"kind", f.kind == FeatureKind::averaged ? "averaged" : "indicator"},
             {"group", f.group}});
    json j;
    j["augmented"] = dict.augmented;
    j["features"] = std::move(features);
    return j;
}

inline std::string dictionary_hash(const FeatureDictionary& dict) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(dictionary_to_json(dict).dump())));
    return std::string("fnv1a:") + buf;
}

inline FeatureDictionary dictionary_from_json(const json& j) {
    FeatureDictionary dict;
    try {
        dict.augmented = j.at("augmented").get<bool>();
        for (const auto& f : j.at("features")) {
            FeatureInfo info;
            info.name = f.at("name").get<std::string>();
            info.source =
                f.at("source").get<std::string>() == "jhfrat" ? FeatureSource::jhfrat
                                                              : FeatureSource::ehr;
            info.category = f.at("category").get<std::string>();
            info.kind = f.at("kind").get<std::string>() == "averaged" ? FeatureKind::averaged
                                                                      : FeatureKind::indicator;
            info.group = f.at("group").get<std::string>();
            dict.features.push_back(std::move(info));
        }
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("dictionary schema violation: ") + ex.what());
    }
    // round-trip must reproduce the canonical dictionary bit-exactly
    auto canonical = FeatureDictionary::make(dict.augmented);
    if (dictionary_to_json(dict) != dictionary_to_json(canonical))
        throw ValidationError("dictionary does not match the canonical column schema");
    return dict;
}

inline void write_features_csv(const std::filesystem::path& path, const CohortFeatures& f) {
    std::string buf = "id,label,fall";
    for (const auto& info : f.dictionary.features) {
        buf += ',';
        buf += info.name;
    }
    buf += '\n';
    for (Eigen::Index i = 0; i < f.X.rows(); ++i) {
        buf += f.ids[static_cast<std::size_t>(i)];
        buf += ',';
        buf += to_string(f.labels[static_cast<std::size_t>(i)]);
        buf += ',';
        buf += f.fall[static_cast<std::size_t>(i)] ? '1' : '0';
        for (Eigen::Index j = 0; j < f.X.cols(); ++j) {
            buf += ',';
            buf += format_double(f.X(i, j));
        }
        buf += '\n';
    }
    atomic_write_file(path, buf);
}

inline CohortFeatures read_features_csv(const std::filesystem::path& path,
                                        const FeatureDictionary& dict) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("features csv is empty: " + path.string());

    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            auto pos = s.find(',', start);
            if (pos == std::string::npos) {
                parts.push_back(s.substr(start));
                break;
            }
            parts.push_back(s.substr(start, pos - start));
            start = pos + 1;
        }
        return parts;
    };

    auto header = split(line);
    if (header.size() != static_cast<std::size_t>(dict.size()) + 3)
        throw ValidationError("features csv header does not match the dictionary");
    for (int j = 0; j < dict.size(); ++j)
        if (header[static_cast<std::size_t>(j) + 3] !=
            dict.features[static_cast<std::size_t>(j)].name)
            throw ValidationError("features csv column order does not match the dictionary");

    std::vector<std::vector<double>> rows;
    CohortFeatures f;
    f.dictionary = dict;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = split(line);
        if (parts.size() != header.size())
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": wrong field count");
        f.ids.push_back(parts[0]);
        f.labels.push_back(risk_label_from_string(parts[1]));
        f.fall.push_back(parts[2] == "1" ? 1 : 0);
        std::vector<double> vals;
        for (std::size_t j = 3; j < parts.size(); ++j) {
            double v = 0.0;
            auto res = std::from_chars(parts[j].data(), parts[j].data() + parts[j].size(), v);
            if (res.ec != std::errc())
                throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                      ": bad number '" + parts[j] + "'");
            vals.push_back(v);
        }
        rows.push_back(std::move(vals));
    }
    f.X.resize(static_cast<Eigen::Index>(rows.size()), dict.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < dict.size(); ++j)
            f.X(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    return f;
}

// ---------------------------------------------------------------------------
// score model

inline json kkt_to_json(const KktReport& k) {
    return {{"stationarity", k.stationarity},
            {"primal_feasibility", k.primal_feasibility},
            {"complementary_slackness", k.complementary_slackness}};
}

inline json model_to_json(const ScoreModel& model) {
    json beta;
    for (Eigen::Index j = 0; j < model.beta.size(); ++j)
        beta[model.dictionary.features[static_cast<std::size_t>(j)].name] = model.beta(j);
    json j;
    j["dictionary_hash"] = dictionary_hash(model.dictionary);
    j["augmented"] = model.dictionary.augmented;
    j["thresholds"] = {model.t_low, model.t_high};
    j["beta"] = std::move(beta);
    j["fit"] = {{"lambda", model.fit.lambda},
                {"iterations", model.fit.iterations},
                {"objective", model.fit.objective},
                {"converged", model.fit.converged},
                {"stop_reason", model.fit.stop_reason},
                {"kkt", kkt_to_json(model.fit.kkt)},
                {"near_singular_warning", model.fit.near_singular_warning}};
    return j;
}

inline ScoreModel model_from_json(const json& j) {
    ScoreModel model;
    try {
        model.dictionary = FeatureDictionary::make(j.at("augmented").get<bool>());
        if (j.at("dictionary_hash").get<std::string>() != dictionary_hash(model.dictionary))
            throw ValidationError("model dictionary hash mismatch");
        model.t_low = j.at("thresholds").at(0).get<double>();
        model.t_high = j.at("thresholds").at(1).get<double>();
        model.beta = Eigen::VectorXd::Zero(model.dictionary.size());
        const auto& beta = j.at("beta");
        for (int col = 0; col < model.dictionary.size(); ++col) {
            const auto& name = model.dictionary.features[static_cast<std::size_t>(col)].name;
            model.beta(col) = beta.at(name).get<double>();
        }
        const auto& fit = j.at("fit");
        model.fit.lambda = fit.at("lambda").get<double>();
        model.fit.iterations = fit.at("iterations").get<long>();
        model.fit.objective = fit.at("objective").get<double>();
        model.fit.converged = fit.at("converged").get<bool>();
        model.fit.stop_reason = fit.at("stop_reason").get<std::string>();
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("model schema violation: ") + ex.what());
    }
    return model;
}

// ---------------------------------------------------------------------------
// tabular outputs

inline void write_tally_csv(const std::filesystem::path& path,
                            const std::map<std::string, std::size_t>& tally) {
    std::string buf = "reason,count\n";
    for (const auto& [reason, count] : tally) {
        buf += reason;
        buf += ',';
        buf += std::to_string(count);
        buf += '\n';
    }
    atomic_write_file(path, buf);
}

inline void write_truth_csv(const std::filesystem::path& path,
                            const std::vector<Encounter>& encounters,
                            const std::vector<double>& latent) {
    std::string buf = "id,latent_risk\n";
    for (std::size_t i = 0; i < encounters.size(); ++i) {
        buf += encounters[i].id;
        buf += ',';
        buf += format_double(latent[i]);
        buf += '\n';
    }
    atomic_write_file(path, buf);
}

inline void write_scored_csv(const std::filesystem::path& path,
                             const std::vector<ScoredEncounter>& scored) {
    std::string buf = "id,score,category,top_contributions\n";
    for (const auto& s : scored) {
        buf += s.id;
        buf += ',';
        buf += format_double(s.score);
        buf += ',';
        buf += to_string(s.category);
        buf += ',';
        auto top = top_contributions(s, 5);
        for (std::size_t i = 0; i < top.size(); ++i) {
            if (i) buf += ';';
            buf += top[i].first;
            buf += ':';
            buf += format_double(top[i].second);
        }
        buf += '\n';
    }
    atomic_write_file(path, buf);
}

// ---------------------------------------------------------------------------
// run manifest

/// Every command writes exactly one manifest into its output directory.
/// Timestamps live only here, so data outputs stay byte-reproducible.
inline void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                           const json& config, const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["config_hash"] = [&] {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(config.dump())));
        return std::string("fnv1a:") + buf;
    }();
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["tool_version"] = kVersion;
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    j["created_utc"] = stamp;
    atomic_write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace fallrisk
