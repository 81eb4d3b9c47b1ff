#pragma once

#include <optional>
#include <string>
#include <variant>

#include "wicksys/continuous.hpp"

namespace wicksys {

inline constexpr const char* kVersionString = "wicksys 0.1.0";

/// Discrete system description file:
/// {"kind": "discrete", "k": int, "l": int, "policy": {...}, "causal": bool,
///  "impulse": {"<n>": expansion, ...}, "input": {...}}        (input optional)
struct DiscreteSystemDescription {
    WeightOrder k;
    WeightOrder l;
    TruncationPolicy policy;
    bool causal = true;
    DiscreteSignal impulse;
    std::optional<DiscreteSignal> input;
};

/// Continuous system description file:
/// {"kind": "continuous", "k": int, "l": int, "policy": {...},
///  "t0": float, "dt": float, "impulse": [expansion, ...],
///  "input": {"t0": float, "samples": [...]}}                  (input optional)
struct ContinuousSystemDescription {
    WeightOrder k;
    WeightOrder l;
    TruncationPolicy policy;
    GridSignal impulse;
    std::optional<GridSignal> input;
};

using SystemDescription = std::variant<DiscreteSystemDescription, ContinuousSystemDescription>;

inline SystemDescription parse_system(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const WeightOrder k(j.at("k").get<int>());
    const WeightOrder l(j.at("l").get<int>());
    const TruncationPolicy policy = policy_from_json(j.at("policy"));

    if (kind == "discrete") {
        std::map<int, ChaosExpansion> impulse;
        for (const auto& [key, value] : j.at("impulse").items())
            impulse.emplace(std::stoi(key), expansion_from_json(value).embedded(policy));
        DiscreteSystemDescription d{k, l, policy, j.value("causal", true),
                                    DiscreteSignal::from_map(policy, impulse), std::nullopt};
        if (d.causal && !d.impulse.causal())
            throw std::invalid_argument("discrete system declared causal but has taps at n < 0");
        if (j.contains("input")) {
            std::map<int, ChaosExpansion> input;
            for (const auto& [key, value] : j.at("input").items())
                input.emplace(std::stoi(key), expansion_from_json(value).embedded(policy));
            d.input = DiscreteSignal::from_map(policy, input);
        }
        return d;
    }
    if (kind == "continuous") {
        const double t0 = j.at("t0").get<double>();
        const double dt = j.at("dt").get<double>();
        std::vector<ChaosExpansion> impulse;
        for (const auto& f : j.at("impulse"))
            impulse.push_back(expansion_from_json(f).embedded(policy));
        ContinuousSystemDescription d{k, l, policy,
                                      GridSignal(policy, t0, dt, std::move(impulse)), std::nullopt};
        if (j.contains("input")) {
            const auto& in = j.at("input");
            std::vector<ChaosExpansion> samples;
            for (const auto& f : in.at("samples"))
                samples.push_back(expansion_from_json(f).embedded(policy));
            d.input = GridSignal(policy, in.at("t0").get<double>(), dt, std::move(samples));
        }
        return d;
    }
    throw std::invalid_argument("unknown system kind: " + kind);
}

}  // namespace wicksys
