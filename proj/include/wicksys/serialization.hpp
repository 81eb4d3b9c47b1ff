#pragma once

#include <string>

#include <json.hpp>

#include "wicksys/chaos.hpp"

namespace wicksys {

/// JSON interchange for the core types.  Expansions serialize as
/// {"policy": {"J": int, "D": int},
///  "terms": [{"alpha": [[j, a], ...], "re": float, "im": float}, ...]}
/// with alpha pairs sorted by variable and terms in graded-lex order, so the
/// byte stream is a deterministic function of the value.

inline void to_json(nlohmann::json& j, const MultiIndex& alpha) {
    j = nlohmann::json::array();
    for (const auto& [var, exp] : alpha.entries()) j.push_back({var, exp});
}

inline MultiIndex multi_index_from_json(const nlohmann::json& j) {
    std::vector<MultiIndex::Entry> entries;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw std::invalid_argument("multi-index entries must be [variable, exponent] pairs");
        entries.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
    return MultiIndex(entries);
}

inline void to_json(nlohmann::json& j, const TruncationPolicy& p) {
    j = {{"J", p.max_var}, {"D", p.max_degree}};
}

inline TruncationPolicy policy_from_json(const nlohmann::json& j) {
    return {j.at("J").get<int>(), j.at("D").get<int>()};
}

inline void to_json(nlohmann::json& j, const ChaosExpansion& f) {
    j = nlohmann::json::object();
    j["policy"] = f.policy();
    auto terms = nlohmann::json::array();
    for (const auto& [alpha, c] : f.terms()) {
        nlohmann::json t;
        t["alpha"] = alpha;
        t["re"] = c.real();
        t["im"] = c.imag();
        terms.push_back(std::move(t));
    }
    j["terms"] = std::move(terms);
}

inline ChaosExpansion expansion_from_json(const nlohmann::json& j) {
    ChaosExpansion f(policy_from_json(j.at("policy")));
    for (const auto& t : j.at("terms")) {
        const cplx c(t.at("re").get<double>(), t.at("im").get<double>());
        f.add_coeff(multi_index_from_json(t.at("alpha")), c);
    }
    return f;
}

}  // namespace wicksys
