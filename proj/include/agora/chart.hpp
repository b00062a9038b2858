#pragma once

#include <string>
#include <vector>

#include "agora/analytics.hpp"
#include "agora/persona.hpp"

namespace agora {

struct ChartSeries {
    Trajectory trajectory;
    Leaning leaning = Leaning::Neutral;  // picks the line color
    std::string label;
};

/// Attitude-trajectory chart: one mean line per agent with whiskered boxes
/// per phase, fixed y axis 1..7 and a dashed neutral reference line at 4.
std::string render_trajectory_chart(const std::vector<ChartSeries>& series, int rounds,
                                    const std::string& title);

}  // namespace agora
