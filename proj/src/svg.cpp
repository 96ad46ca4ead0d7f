#include "mwtgc/svg.hpp"

#include "mwtgc/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mwtgc::svg {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 360;
constexpr int kPad = 48;

std::ofstream open(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write SVG file: " + path);
    }
    return out;
}

void header(std::ofstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
}

} // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<double>& ys) {
    auto out = open(path);
    header(out, title);
    if (ys.size() >= 2) {
        const double lo = *std::min_element(ys.begin(), ys.end());
        const double hi = *std::max_element(ys.begin(), ys.end());
        const double span = hi > lo ? hi - lo : 1.0;
        std::ostringstream points;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const double x = kPad + (kWidth - 2.0 * kPad) * static_cast<double>(i) /
                                        static_cast<double>(ys.size() - 1);
            const double y = kHeight - kPad - (kHeight - 2.0 * kPad) * (ys[i] - lo) / span;
            points << x << ',' << y << ' ';
        }
        out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\""
            << points.str() << "\"/>\n";
        out << "<text x=\"" << kPad << "\" y=\"" << kHeight - kPad + 16
            << "\" font-family=\"sans-serif\" font-size=\"10\">min " << lo << " / max " << hi
            << "</text>\n";
    }
    out << "</svg>\n";
}

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::vector<std::string>& labels, const std::vector<double>& values) {
    auto out = open(path);
    header(out, title);
    if (!values.empty() && labels.size() == values.size()) {
        const double hi = std::max(1e-12, *std::max_element(values.begin(), values.end()));
        const double slot = (kWidth - 2.0 * kPad) / static_cast<double>(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double bar_height = (kHeight - 2.0 * kPad) * values[i] / hi;
            const double x = kPad + slot * static_cast<double>(i) + slot * 0.15;
            const double y = kHeight - kPad - bar_height;
            out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << slot * 0.7
                << "\" height=\"" << bar_height << "\" fill=\"steelblue\"/>\n";
            out << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << kHeight - kPad + 14
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
                << labels[i] << "</text>\n";
            out << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << y - 4
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
                << values[i] << "</text>\n";
        }
    }
    out << "</svg>\n";
}

} // namespace mwtgc::svg
