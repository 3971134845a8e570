#include "sleepssl/cli/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sleepssl {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

bool to_double(const std::string& s, double& v) {
    try {
        std::size_t pos = 0;
        v = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

}  // namespace

void plot_csv(const std::string& csv_path, const std::string& svg_path,
              const std::string& title) {
    std::ifstream is(csv_path);
    if (!is) throw std::runtime_error("cannot open csv " + csv_path);

    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("empty csv " + csv_path);
    const auto header = split_csv(line);
    if (header.size() < 2)
        throw std::invalid_argument("csv needs an x column and one series");

    std::vector<double> xs;
    std::vector<std::vector<double>> cols(header.size() - 1);
    std::vector<bool> numeric(header.size() - 1, true);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("ragged csv row in " + csv_path);
        double x = 0;
        if (!to_double(cells[0], x)) continue;  // non-numeric x rows skipped
        xs.push_back(x);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0;
            if (to_double(cells[c], v))
                cols[c - 1].push_back(v);
            else {
                numeric[c - 1] = false;
                cols[c - 1].push_back(0);
            }
        }
    }
    if (xs.empty()) throw std::invalid_argument("no data rows in " + csv_path);

    double xmin = xs[0], xmax = xs[0];
    for (double x : xs) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    double ymin = 0, ymax = 0;
    bool first = true;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (!numeric[c]) continue;
        for (double v : cols[c]) {
            if (first) {
                ymin = ymax = v;
                first = false;
            }
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (first) throw std::invalid_argument("no numeric series in " + csv_path);
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;

    const double W = 800, H = 500, ml = 70, mr = 130, mt = 40, mb = 50;
    auto px = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
    };
    auto py = [&](double y) {
        return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
    };
    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                    "#d62728", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f"};

    std::ofstream os(svg_path);
    if (!os) throw std::runtime_error("cannot write svg " + svg_path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
       << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
       << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
              "font-family=\"sans-serif\" font-size=\"16\">"
           << title << "</text>\n";

    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
       << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
       << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = xmin + (xmax - xmin) * t / 4.0;
        const double yv = ymin + (ymax - ymin) * t / 4.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
              "font-size=\"11\">"
           << xv << "</text>\n"
           << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
              "font-size=\"11\">"
           << yv << "</text>\n";
    }
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"13\">"
       << header[0] << "</text>\n";

    int color = 0;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (!numeric[c]) continue;
        const char* stroke = kColors[color % 8];
        os << "<polyline fill=\"none\" stroke=\"" << stroke
           << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i)
            os << px(xs[i]) << "," << py(cols[c][i]) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 * color + 12
           << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
           << stroke << "\">" << header[c + 1] << "</text>\n";
        ++color;
    }
    os << "</svg>\n";
}

}  // namespace sleepssl
