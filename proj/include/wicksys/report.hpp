#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wicksys {

enum class Verdict { certified, refuted, inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::certified: return "certified";
        case Verdict::refuted: return "refuted";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

inline Verdict verdict_from_string(const std::string& s) {
    if (s == "certified") return Verdict::certified;
    if (s == "refuted") return Verdict::refuted;
    if (s == "inconclusive") return Verdict::inconclusive;
    throw std::invalid_argument("unknown verdict: " + s);
}

/// Outcome of one stability certifier.  A certified verdict is always backed
/// by a finite upper bound establishing the criterion, a refuted verdict by a
/// concrete witness achieving the lower bound; everything else stays
/// inconclusive.  Truncated computations only ever enter as lower bounds.
struct StabilityReport {
    std::string criterion;
    Verdict verdict = Verdict::inconclusive;
    std::optional<double> lower_bound;
    std::optional<double> upper_bound;
    nlohmann::json parameters = nlohmann::json::object();
    std::optional<nlohmann::json> witness;
    std::vector<std::string> notes;
    bool vacuous = false;  // empty system, nothing to certify
};

inline void to_json(nlohmann::json& j, const StabilityReport& r) {
    j = nlohmann::json::object();
    j["criterion"] = r.criterion;
    j["verdict"] = to_string(r.verdict);
    j["lower_bound"] = r.lower_bound ? nlohmann::json(*r.lower_bound) : nlohmann::json();
    j["upper_bound"] = r.upper_bound ? nlohmann::json(*r.upper_bound) : nlohmann::json();
    j["parameters"] = r.parameters;
    j["witness"] = r.witness ? *r.witness : nlohmann::json();
    j["notes"] = r.notes;
    j["vacuous"] = r.vacuous;
}

inline StabilityReport report_from_json(const nlohmann::json& j) {
    StabilityReport r;
    r.criterion = j.at("criterion").get<std::string>();
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    if (j.contains("lower_bound") && !j["lower_bound"].is_null())
        r.lower_bound = j["lower_bound"].get<double>();
    if (j.contains("upper_bound") && !j["upper_bound"].is_null())
        r.upper_bound = j["upper_bound"].get<double>();
    if (j.contains("parameters")) r.parameters = j["parameters"];
    if (j.contains("witness") && !j["witness"].is_null()) r.witness = j["witness"];
    if (j.contains("notes")) r.notes = j["notes"].get<std::vector<std::string>>();
    if (j.contains("vacuous")) r.vacuous = j["vacuous"].get<bool>();
    return r;
}

}  // namespace wicksys
