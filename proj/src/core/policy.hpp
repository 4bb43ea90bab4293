#pragma once

#include <map>
#include <string>

namespace rmpc {

// Assigns every undo step a positive rate from the action and the forward
// rate of the prefix being undone. Either the identity (backward rate equals
// forward rate) or a per-action multiplier table with a default multiplier.
class BackwardRatePolicy {
  public:
    // Backward rates equal forward rates.
    static BackwardRatePolicy equal();

    static BackwardRatePolicy multipliers(std::map<std::string, double> per_action,
                                          double default_multiplier);

    // Parses {"default": 1.0, "a": 2.0, ...}; the "default" entry is the
    // fallback multiplier (1.0 when absent), every other entry is per action.
    static BackwardRatePolicy from_json(const std::string& json_text);

    double operator()(const std::string& action, double forward_rate) const;

    bool is_equal_policy() const;
    std::string describe() const;

  private:
    BackwardRatePolicy() = default;
    std::map<std::string, double> per_action_;
    double default_multiplier_ = 1.0;
};

}  // namespace rmpc
