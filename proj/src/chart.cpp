#include "agora/chart.hpp"

#include <cstdio>
#include <sstream>

namespace agora {

namespace {

const char* leaning_color(Leaning leaning) {
    switch (leaning) {
        case Leaning::Neutral: return "#6b7f8c";
        case Leaning::Republican: return "#c0392b";
        case Leaning::Democrat: return "#2e6da4";
    }
    return "#6b7f8c";
}

std::string fmt(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f", value);
    return buffer;
}

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_trajectory_chart(const std::vector<ChartSeries>& series, int rounds,
                                    const std::string& title) {
    constexpr double kWidth = 920.0;
    constexpr double kHeight = 430.0;
    constexpr double kLeft = 56.0;
    constexpr double kRight = 170.0;
    constexpr double kTop = 44.0;
    constexpr double kBottom = 56.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const int positions = rounds + 2;  // opening, rounds, closing

    auto x_of = [&](double position) {
        return kLeft + (positions <= 1 ? 0.5 : position / (positions - 1)) * plot_w;
    };
    auto y_of = [&](double score) { return kTop + (7.0 - score) / 6.0 * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt(kLeft) << "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"15\" font-weight=\"bold\">"
        << escape_xml(title) << "</text>\n";

    // y grid: the full 1..7 Likert scale, neutral reference dashed at 4.
    for (int score = 1; score <= 7; ++score) {
        const double y = y_of(score);
        const bool neutral = score == 4;
        svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\""
            << fmt(kLeft + plot_w) << "\" y2=\"" << fmt(y) << "\" stroke=\""
            << (neutral ? "#888888" : "#dddddd") << "\" stroke-width=\"1\""
            << (neutral ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        svg << "<text x=\"" << fmt(kLeft - 10) << "\" y=\"" << fmt(y + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << score
            << "</text>\n";
    }

    // x labels
    for (int position = 0; position < positions; ++position) {
        std::string label = position == 0             ? "opening"
                            : position == positions - 1 ? "closing"
                                                        : std::to_string(position);
        svg << "<text x=\"" << fmt(x_of(position)) << "\" y=\"" << fmt(kTop + plot_h + 20)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
            << label << "</text>\n";
    }
    svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + plot_h) << "\" x2=\""
        << fmt(kLeft + plot_w) << "\" y2=\"" << fmt(kTop + plot_h)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    const double box_w = 9.0;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& entry = series[s];
        const char* color = leaning_color(entry.leaning);
        // Boxes of different agents at the same phase are nudged apart.
        const double nudge =
            (static_cast<double>(s) - (static_cast<double>(series.size()) - 1) / 2.0) *
            (box_w + 3.0);

        std::string points;
        for (const auto& phase : entry.trajectory.phases) {
            if (!points.empty()) points += " ";
            points += fmt(x_of(phase.position)) + "," + fmt(y_of(phase.mean));
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";

        for (const auto& phase : entry.trajectory.phases) {
            const double cx = x_of(phase.position) + nudge;
            // whiskers
            svg << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(y_of(phase.min)) << "\" x2=\""
                << fmt(cx) << "\" y2=\"" << fmt(y_of(phase.max)) << "\" stroke=\"" << color
                << "\" stroke-width=\"1\"/>\n";
            svg << "<line x1=\"" << fmt(cx - box_w / 2) << "\" y1=\"" << fmt(y_of(phase.min))
                << "\" x2=\"" << fmt(cx + box_w / 2) << "\" y2=\"" << fmt(y_of(phase.min))
                << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
            svg << "<line x1=\"" << fmt(cx - box_w / 2) << "\" y1=\"" << fmt(y_of(phase.max))
                << "\" x2=\"" << fmt(cx + box_w / 2) << "\" y2=\"" << fmt(y_of(phase.max))
                << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
            // interquartile box with median tick
            svg << "<rect x=\"" << fmt(cx - box_w / 2) << "\" y=\"" << fmt(y_of(phase.q3))
                << "\" width=\"" << fmt(box_w) << "\" height=\""
                << fmt(y_of(phase.q1) - y_of(phase.q3)) << "\" fill=\"" << color
                << "\" fill-opacity=\"0.25\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
            svg << "<line x1=\"" << fmt(cx - box_w / 2) << "\" y1=\"" << fmt(y_of(phase.median))
                << "\" x2=\"" << fmt(cx + box_w / 2) << "\" y2=\"" << fmt(y_of(phase.median))
                << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        }

        // legend
        const double ly = kTop + 16.0 * static_cast<double>(s);
        svg << "<rect x=\"" << fmt(kLeft + plot_w + 16) << "\" y=\"" << fmt(ly - 9)
            << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << fmt(kLeft + plot_w + 34) << "\" y=\"" << fmt(ly + 1)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(entry.label)
            << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace agora
