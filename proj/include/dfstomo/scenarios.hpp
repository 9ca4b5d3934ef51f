#ifndef DFSTOMO_SCENARIOS_HPP
#define DFSTOMO_SCENARIOS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfstomo/states.hpp"

namespace dfstomo {

// Named measurement scenarios.  fig3a-fig3d reproduce the four panels of the
// homodyne data figure; fig4_a1.3 / fig4_a2.4 the photon-statistics runs with
// their effective-efficiency reductions of 0.02 and 0.10.
struct Scenario {
    std::string name;
    StateModel state;
    double theta_step; // 0 = free-running phase
    std::string description;
};

const std::vector<Scenario>& all_scenarios();
std::optional<Scenario> find_scenario(std::string_view name);

} // namespace dfstomo

#endif
