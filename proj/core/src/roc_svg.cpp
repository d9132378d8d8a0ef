#include "inspecta/roc_svg.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "inspecta/error.hpp"

namespace inspecta {

namespace {

constexpr double kPlotSize = 400.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

double px(double fpr) { return kMarginLeft + fpr * kPlotSize; }
double py(double tpr) { return kMarginTop + (1.0 - tpr) * kPlotSize; }

double curve_auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        area += (curve.points[i].fpr - curve.points[i - 1].fpr) *
                (curve.points[i].tpr + curve.points[i - 1].tpr) * 0.5;
    }
    return area;
}

std::string format3(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    return buf;
}

std::string escape_xml(const std::string& text) {
    std::string out;
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

std::string roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves) {
    if (curves.empty()) throw ConfigError("roc_svg: no curves to plot");

    const double width = kMarginLeft + kPlotSize + 200.0;
    const double height = kMarginTop + kPlotSize + kMarginBottom;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Frame and gridline ticks at 0, 0.25, ..., 1.
    svg << "  <rect x=\"" << px(0) << "\" y=\"" << py(1) << "\" width=\"" << kPlotSize
        << "\" height=\"" << kPlotSize << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        svg << "  <text x=\"" << px(f) << "\" y=\"" << py(0) + 18
            << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" << format3(f).substr(0, 4)
            << "</text>\n";
        svg << "  <text x=\"" << px(0) - 8 << "\" y=\"" << py(f) + 4
            << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" << format3(f).substr(0, 4)
            << "</text>\n";
    }
    svg << "  <text x=\"" << px(0.5) << "\" y=\"" << py(0) + 38
        << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">false positive rate</text>\n";
    svg << "  <text x=\"" << px(0) - 42 << "\" y=\"" << py(0.5)
        << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 "
        << px(0) - 42 << ' ' << py(0.5) << ")\">true positive rate</text>\n";

    // Chance diagonal.
    svg << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
        << "\" stroke=\"#aaaaaa\" stroke-dasharray=\"6,4\"/>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (const RocPoint& p : curves[c].second.points) {
            svg << px(p.fpr) << ',' << py(p.tpr) << ' ';
        }
        svg << "\"/>\n";

        const double ly = kMarginTop + 16.0 + 20.0 * static_cast<double>(c);
        svg << "  <line x1=\"" << px(1) + 16 << "\" y1=\"" << ly - 4 << "\" x2=\"" << px(1) + 40
            << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"1.8\"/>\n";
        svg << "  <text x=\"" << px(1) + 46 << "\" y=\"" << ly
            << "\" font-size=\"12\" font-family=\"sans-serif\">" << escape_xml(curves[c].first)
            << " (AUC=" << format3(curve_auc(curves[c].second)) << ")</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void render_roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves,
                    const std::filesystem::path& out_path) {
    const std::string content = roc_svg(curves);
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write SVG: " + out_path.string());
    out << content;
    if (!out) throw IoError("short write on SVG: " + out_path.string());
}

}  // namespace inspecta
