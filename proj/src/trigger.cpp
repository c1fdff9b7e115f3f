#include "rlbd/trigger.hpp"

#include <stdexcept>

namespace rlbd {

bool is_triggered(const State& s, const TriggerSpec& spec) {
    if (is_tabular_state(s)) {
        int idx = state_index(s);
        if (idx < 0 || idx >= static_cast<int>(spec.tabular_member.size())) return false;
        return spec.tabular_member[idx] != 0;
    }
    const auto& f = state_features(s);
    if (spec.coord < 0 || spec.coord >= static_cast<int>(f.size())) {
        throw std::out_of_range("TriggerSpec: coordinate out of range");
    }
    return f[spec.coord] > spec.threshold;  // strict: "exceeds"
}

nlohmann::json TriggerSpec::to_json() const {
    return nlohmann::json{{"coord", coord},
                          {"threshold", threshold},
                          {"tabular_member", tabular_member},
                          {"override_coord", override_coord},
                          {"override_value", override_value},
                          {"override_step", override_step}};
}

TriggerSpec TriggerSpec::from_json(const nlohmann::json& j) {
    TriggerSpec t;
    t.coord = j.value("coord", 0);
    t.threshold = j.value("threshold", 0.5);
    t.tabular_member = j.value("tabular_member", std::vector<std::uint8_t>{});
    t.override_coord = j.value("override_coord", 0);
    t.override_value = j.value("override_value", 0.6);
    t.override_step = j.value("override_step", 0);
    return t;
}

}  // namespace rlbd
