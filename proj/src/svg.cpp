#include "ilgaco/svg.hpp"

#include <cstdio>

#include "ilgaco/error.hpp"

namespace ilgaco {

namespace {

constexpr double kWidth = 680.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 180.0;  // legend space
constexpr double kTop = 48.0;
constexpr double kBottom = 56.0;

const char* kPalette[] = {"#3366cc", "#dc3912", "#109618", "#ff9900", "#990099",
                          "#0099c6", "#dd4477", "#66aa00", "#b82e2e", "#316395"};
constexpr size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

double plot_w() { return kWidth - kLeft - kRight; }
double plot_h() { return kHeight - kTop - kBottom; }

// y in [0, 100] -> pixel
double ypix(double v) { return kTop + plot_h() * (1.0 - v / 100.0); }

void open_svg(std::string& out, const std::string& title) {
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(kWidth) +
           "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    out += "<rect width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(kLeft) + "\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\" "
           "font-weight=\"bold\">" + escape(title) + "</text>\n";
}

void draw_axes(std::string& out, const std::string& y_label) {
    // gridlines and y ticks every 20 points
    for (int v = 0; v <= 100; v += 20) {
        const double y = ypix(v);
        out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kWidth - kRight) +
               "\" y2=\"" + num(y) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + std::to_string(v) +
               "</text>\n";
    }
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
           num(kHeight - kBottom) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" +
           num(kWidth - kRight) + "\" y2=\"" + num(kHeight - kBottom) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<text x=\"16\" y=\"" + num(kTop + plot_h() / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
           num(kTop + plot_h() / 2.0) + ")\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
}

void draw_legend(std::string& out, const std::vector<std::string>& names, bool dashes_for_ub,
                 std::optional<double> upper_bound) {
    const double lx = kWidth - kRight + 16.0;
    double ly = kTop + 8.0;
    for (size_t i = 0; i < names.size(); ++i) {
        const char* color = kPalette[i % kPaletteSize];
        out += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 22) + "\" y2=\"" +
               num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(lx + 28) + "\" y=\"" + num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(names[i]) + "</text>\n";
        ly += 20.0;
    }
    if (dashes_for_ub && upper_bound.has_value()) {
        out += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 22) + "\" y2=\"" +
               num(ly) + "\" stroke=\"#555555\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
        out += "<text x=\"" + num(lx + 28) + "\" y=\"" + num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">upper bound</text>\n";
    }
}

}  // namespace

std::string line_chart_svg(const std::string& title,
                           const std::vector<std::string>& step_names,
                           const std::vector<std::string>& series_names,
                           const std::vector<std::vector<double>>& series_values,
                           std::optional<double> upper_bound) {
    if (step_names.empty() || series_names.empty()) {
        throw_validation("line_chart_svg: nothing to plot");
    }
    if (series_values.size() != series_names.size()) {
        throw_dimension("line_chart_svg: series count mismatch");
    }
    for (const auto& vals : series_values) {
        if (vals.size() != step_names.size()) {
            throw_dimension("line_chart_svg: series length != step count");
        }
    }

    const size_t steps = step_names.size();
    auto xpix = [&](size_t i) {
        if (steps == 1) return kLeft + plot_w() / 2.0;
        return kLeft + plot_w() * static_cast<double>(i) / static_cast<double>(steps - 1);
    };

    std::string out;
    open_svg(out, title);
    draw_axes(out, "Rank-1 accuracy (%)");

    for (size_t i = 0; i < steps; ++i) {
        out += "<text x=\"" + num(xpix(i)) + "\" y=\"" + num(kHeight - kBottom + 18) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
               escape(step_names[i]) + "</text>\n";
    }
    out += "<text x=\"" + num(kLeft + plot_w() / 2.0) + "\" y=\"" + num(kHeight - 16) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">added factor</text>\n";

    if (upper_bound.has_value()) {
        const double y = ypix(*upper_bound);
        out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kWidth - kRight) +
               "\" y2=\"" + num(y) +
               "\" stroke=\"#555555\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    }

    for (size_t s = 0; s < series_values.size(); ++s) {
        const char* color = kPalette[s % kPaletteSize];
        std::string points;
        for (size_t i = 0; i < steps; ++i) {
            if (!points.empty()) points += " ";
            points += num(xpix(i)) + "," + num(ypix(series_values[s][i]));
        }
        out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        for (size_t i = 0; i < steps; ++i) {
            out += "<circle cx=\"" + num(xpix(i)) + "\" cy=\"" + num(ypix(series_values[s][i])) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
    }

    draw_legend(out, series_names, true, upper_bound);
    out += "</svg>\n";
    return out;
}

std::string grouped_bar_svg(const std::string& title,
                            const std::vector<std::string>& group_names,
                            const std::vector<std::string>& series_names,
                            const std::vector<std::vector<double>>& values) {
    if (group_names.empty() || series_names.empty()) {
        throw_validation("grouped_bar_svg: nothing to plot");
    }
    if (values.size() != group_names.size()) {
        throw_dimension("grouped_bar_svg: group count mismatch");
    }
    for (const auto& row : values) {
        if (row.size() != series_names.size()) {
            throw_dimension("grouped_bar_svg: series count mismatch in a group");
        }
    }

    std::string out;
    open_svg(out, title);
    draw_axes(out, "final average Rank-1 (%)");

    const size_t groups = group_names.size();
    const size_t series = series_names.size();
    const double group_w = plot_w() / static_cast<double>(groups);
    const double bar_w = group_w * 0.7 / static_cast<double>(series);

    for (size_t g = 0; g < groups; ++g) {
        const double gx = kLeft + group_w * (static_cast<double>(g) + 0.15);
        for (size_t s = 0; s < series; ++s) {
            const double x = gx + bar_w * static_cast<double>(s);
            const double y = ypix(values[g][s]);
            const char* color = kPalette[s % kPaletteSize];
            out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(bar_w * 0.9) +
                   "\" height=\"" + num(kHeight - kBottom - y) + "\" fill=\"" + color + "\"/>\n";
            char label[32];
            std::snprintf(label, sizeof label, "%.1f", values[g][s]);
            out += "<text x=\"" + num(x + bar_w * 0.45) + "\" y=\"" + num(y - 4) +
                   "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" + label +
                   "</text>\n";
        }
        out += "<text x=\"" + num(kLeft + group_w * (static_cast<double>(g) + 0.5)) + "\" y=\"" +
               num(kHeight - kBottom + 18) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
               escape(group_names[g]) + "</text>\n";
    }

    draw_legend(out, series_names, false, std::nullopt);
    out += "</svg>\n";
    return out;
}

}  // namespace ilgaco
