#include "core/policy.hpp"

#include <charconv>
#include <stdexcept>

#include <json.hpp>

#include "core/errors.hpp"

namespace rmpc {

BackwardRatePolicy BackwardRatePolicy::equal() { return BackwardRatePolicy(); }

BackwardRatePolicy BackwardRatePolicy::multipliers(std::map<std::string, double> per_action,
                                                   double default_multiplier) {
    for (const auto& [action, m] : per_action)
        if (!(m > 0.0))
            throw std::invalid_argument("backward multiplier for '" + action +
                                        "' must be positive");
    if (!(default_multiplier > 0.0))
        throw std::invalid_argument("default backward multiplier must be positive");
    BackwardRatePolicy p;
    p.per_action_ = std::move(per_action);
    p.default_multiplier_ = default_multiplier;
    return p;
}

BackwardRatePolicy BackwardRatePolicy::from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ParseError("policy file must be a JSON object mapping actions to multipliers");
    std::map<std::string, double> table;
    double def = 1.0;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number())
            throw ParseError("policy entry '" + k + "' must be a number");
        double m = v.get<double>();
        if (k == "default")
            def = m;
        else
            table[k] = m;
    }
    return multipliers(std::move(table), def);
}

double BackwardRatePolicy::operator()(const std::string& action, double forward_rate) const {
    auto it = per_action_.find(action);
    double m = it == per_action_.end() ? default_multiplier_ : it->second;
    return m * forward_rate;
}

bool BackwardRatePolicy::is_equal_policy() const {
    if (default_multiplier_ != 1.0) return false;
    for (const auto& [action, m] : per_action_)
        if (m != 1.0) return false;
    return true;
}

std::string BackwardRatePolicy::describe() const {
    if (is_equal_policy()) return "equal";
    std::string out = "multipliers{default=" + std::to_string(default_multiplier_);
    for (const auto& [action, m] : per_action_)
        out += "," + action + "=" + std::to_string(m);
    out += "}";
    return out;
}

}  // namespace rmpc
