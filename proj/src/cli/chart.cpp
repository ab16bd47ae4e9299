#include <cstdio>
#include <sstream>

#include "qocr/cli.hpp"
#include "qocr/error.hpp"

namespace qocr::cli {

namespace {

constexpr double kGroupWidth = 90.0;
constexpr double kBarWidth = 30.0;
constexpr double kLeft = 60.0, kRight = 130.0, kTop = 50.0, kBottom = 60.0;
constexpr double kPlotHeight = 260.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
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

std::string bar_chart_svg(const std::vector<metrics::EvalReport>& reports) {
    if (reports.empty()) throw ArgumentError("a chart needs at least one report");
    const double plot_w = kGroupWidth * static_cast<double>(reports.size());
    const double width = kLeft + plot_w + kRight, height = kTop + kPlotHeight + kBottom;
    const double base = kTop + kPlotHeight;
    auto y_of = [&](double rate) { return base - rate * kPlotHeight; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"28\" font-size=\"15\" text-anchor=\"middle\">"
      << "Recognition rates per experiment</text>\n";

    for (int tick = 0; tick <= 5; ++tick) {
        const double rate = tick / 5.0, y = y_of(rate);
        s << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\""
          << num(y) << "\" stroke=\"#dddddd\"/>\n";
        s << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
          << num(rate) << "</text>\n";
    }
    s << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(base)
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(base) << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\""
      << num(base) << "\" stroke=\"black\"/>\n";

    const struct {
        const char* name;
        const char* color;
    } series[2] = {{"CRR", "#4c72b0"}, {"WRR", "#dd8452"}};
    for (std::size_t g = 0; g < reports.size(); ++g) {
        const double gx = kLeft + kGroupWidth * static_cast<double>(g) + (kGroupWidth - 2 * kBarWidth) / 2;
        const double rates[2] = {reports[g].crr, reports[g].wrr};
        for (int k = 0; k < 2; ++k) {
            const double x = gx + k * kBarWidth, y = y_of(rates[k]);
            s << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(kBarWidth - 2) << "\" height=\""
              << num(base - y) << "\" fill=\"" << series[k].color << "\"><title>" << escape(reports[g].dataset) << ' '
              << series[k].name << "</title></rect>\n";
            s << "<text x=\"" << num(x + (kBarWidth - 2) / 2) << "\" y=\"" << num(y - 4)
              << "\" font-size=\"10\" text-anchor=\"middle\">" << num(rates[k] * 100) << "</text>\n";
        }
        s << "<text x=\"" << num(gx + kBarWidth) << "\" y=\"" << num(base + 18)
          << "\" font-size=\"11\" text-anchor=\"middle\">" << escape(reports[g].dataset) << "</text>\n";
    }

    for (int k = 0; k < 2; ++k) {
        const double ly = kTop + 10 + 20 * k, lx = kLeft + plot_w + 20;
        s << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 10) << "\" width=\"12\" height=\"12\" fill=\""
          << series[k].color << "\"/>\n";
        s << "<text x=\"" << num(lx + 18) << "\" y=\"" << num(ly) << "\" font-size=\"12\">" << series[k].name
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace qocr::cli
