#include "dfstomo/scenarios.hpp"

#include <numbers>

namespace dfstomo {

namespace {

// Default sweep: the ramp covers one phase turn every 4000 samples, so runs
// of a few 10^5 samples span many periods.
constexpr double RAMP = 2.0 * std::numbers::pi / 4000.0;

std::vector<Scenario> make_scenarios() {
    return {
        {"fig3a", StateModel::vacuum(), 0.0, "vacuum state, free-running phase"},
        {"fig3b", StateModel::coherent({0.60, 0.0}), RAMP, "coherent state, alpha = 0.60"},
        {"fig3c", StateModel::displaced_mix({0.0, 0.0}, 0.62), 0.0,
         "undisplaced single-photon ensemble, eta = 0.62"},
        {"fig3d", StateModel::displaced_mix({0.60, 0.0}, 0.62), RAMP,
         "displaced Fock ensemble, alpha = 0.60, eta = 0.62"},
        {"fig4_a1.3", StateModel::displaced_mix({1.3, 0.0}, 0.60), RAMP,
         "displaced Fock ensemble, alpha = 1.3, effective eta = 0.60"},
        {"fig4_a2.4", StateModel::displaced_mix({2.4, 0.0}, 0.52), RAMP,
         "displaced Fock ensemble, alpha = 2.4, effective eta = 0.52"},
    };
}

} // namespace

const std::vector<Scenario>& all_scenarios() {
    static const std::vector<Scenario> scenarios = make_scenarios();
    return scenarios;
}

std::optional<Scenario> find_scenario(std::string_view name) {
    for (const auto& s : all_scenarios())
        if (s.name == name) return s;
    return std::nullopt;
}

} // namespace dfstomo
