#include "jmlmc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "jmlmc/error.hpp"

namespace jmlmc {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const char* spec, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) {
            return v;
        }
    } catch (const std::logic_error&) {
    }
    throw IoError("study.csv line " + std::to_string(line) + ": '" + s + "' is not a number");
}

int parse_int(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos == s.size()) {
            return v;
        }
    } catch (const std::logic_error&) {
    }
    throw IoError("study.csv line " + std::to_string(line) + ": '" + s + "' is not an integer");
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct LogAxis {
    double lo = 0.0;  // decades
    double hi = 1.0;

    static LogAxis covering(const std::vector<double>& values) {
        double mn = std::numeric_limits<double>::infinity();
        double mx = -mn;
        for (double v : values) {
            if (v > 0.0 && std::isfinite(v)) {
                mn = std::min(mn, std::log10(v));
                mx = std::max(mx, std::log10(v));
            }
        }
        LogAxis a;
        if (!std::isfinite(mn)) {
            return a;
        }
        a.lo = std::floor(mn);
        a.hi = std::ceil(mx);
        if (a.hi <= a.lo) {
            a.hi = a.lo + 1.0;
        }
        return a;
    }

    double frac(double v) const { return (std::log10(v) - lo) / (hi - lo); }
};

struct Panel {
    double left;
    double top;
    double width;
    double height;
    LogAxis x;
    LogAxis y;

    double px(double v) const { return left + x.frac(v) * width; }
    double py(double v) const { return top + (1.0 - y.frac(v)) * height; }
};

struct Series {
    std::string method;
    std::vector<double> x;
    std::vector<double> y;
    double slope = std::numeric_limits<double>::quiet_NaN();
};

void draw_frame(std::ostream& os, const Panel& p, const std::string& xlabel, const std::string& title) {
    os << "<rect x=\"" << p.left << "\" y=\"" << p.top << "\" width=\"" << p.width << "\" height=\"" << p.height
       << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int d = static_cast<int>(p.x.lo); d <= static_cast<int>(p.x.hi); ++d) {
        const double xx = p.px(std::pow(10.0, d));
        os << "<line x1=\"" << fmt("%.2f", xx) << "\" y1=\"" << p.top << "\" x2=\"" << fmt("%.2f", xx) << "\" y2=\""
           << p.top + p.height << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << fmt("%.2f", xx) << "\" y=\"" << p.top + p.height + 16
           << "\" text-anchor=\"middle\" font-size=\"11\">1e" << d << "</text>\n";
    }
    for (int d = static_cast<int>(p.y.lo); d <= static_cast<int>(p.y.hi); ++d) {
        const double yy = p.py(std::pow(10.0, d));
        os << "<line x1=\"" << p.left << "\" y1=\"" << fmt("%.2f", yy) << "\" x2=\"" << p.left + p.width << "\" y2=\""
           << fmt("%.2f", yy) << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << p.left - 6 << "\" y=\"" << fmt("%.2f", yy + 4)
           << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
    }
    os << "<text x=\"" << p.left + p.width / 2 << "\" y=\"" << p.top + p.height + 34
       << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
    os << "<text x=\"" << p.left + p.width / 2 << "\" y=\"" << p.top - 10
       << "\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
    os << "<text transform=\"translate(" << p.left - 44 << "," << p.top + p.height / 2
       << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">relative RMSE</text>\n";
}

void draw_series(std::ostream& os, const Panel& p, const Series& s, const char* color) {
    if (s.x.size() > 1) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            os << (i ? " " : "") << fmt("%.2f", p.px(s.x[i])) << ',' << fmt("%.2f", p.py(s.y[i]));
        }
        os << "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << "<circle class=\"marker\" cx=\"" << fmt("%.2f", p.px(s.x[i])) << "\" cy=\"" << fmt("%.2f", p.py(s.y[i]))
           << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    }
}

}  // namespace

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows) {
    os << "method,L,h_L,rep,estimate,reference,rel_error\n";
    for (const StudyRow& r : rows) {
        os << r.method << ',' << r.L << ',' << fmt17(r.h_L) << ',' << r.rep << ',' << fmt17(r.estimate) << ','
           << fmt17(r.reference) << ',' << fmt17(r.rel_error) << '\n';
    }
}

std::vector<StudyRow> read_study_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "method,L,h_L,rep,estimate,reference,rel_error") {
        throw IoError("study.csv: missing or unexpected header");
    }
    std::vector<StudyRow> rows;
    int n = 1;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != 7) {
            throw IoError("study.csv line " + std::to_string(n) + ": expected 7 columns");
        }
        StudyRow r;
        r.method = cells[0];
        r.L = parse_int(cells[1], n);
        r.h_L = parse_double(cells[2], n);
        r.rep = parse_int(cells[3], n);
        r.estimate = parse_double(cells[4], n);
        r.reference = parse_double(cells[5], n);
        r.rel_error = parse_double(cells[6], n);
        rows.push_back(r);
    }
    return rows;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "method,L,h_L,reps,rel_rmse,fitted_slope\n";
    for (const SummaryRow& r : rows) {
        os << r.method << ',' << r.L << ',' << fmt17(r.h_L) << ',' << r.reps << ',' << fmt17(r.rel_rmse) << ','
           << fmt17(r.fitted_slope) << '\n';
    }
}

std::string render_rmse_svg(const std::vector<SummaryRow>& rows) {
    std::vector<Series> by_h;
    std::vector<Series> by_time;
    std::map<std::string, std::size_t> index;
    for (const SummaryRow& r : rows) {
        if (!index.contains(r.method)) {
            index[r.method] = by_h.size();
            by_h.push_back({r.method, {}, {}, r.fitted_slope});
            by_time.push_back({r.method, {}, {}, r.fitted_slope});
        }
        const std::size_t k = index[r.method];
        if (r.rel_rmse > 0.0 && std::isfinite(r.rel_rmse)) {
            by_h[k].x.push_back(r.h_L);
            by_h[k].y.push_back(r.rel_rmse);
            if (r.mean_seconds > 0.0) {
                by_time[k].x.push_back(r.mean_seconds);
                by_time[k].y.push_back(r.rel_rmse);
            }
        }
    }
    std::vector<double> hs;
    std::vector<double> ts;
    std::vector<double> es;
    for (std::size_t k = 0; k < by_h.size(); ++k) {
        hs.insert(hs.end(), by_h[k].x.begin(), by_h[k].x.end());
        es.insert(es.end(), by_h[k].y.begin(), by_h[k].y.end());
        ts.insert(ts.end(), by_time[k].x.begin(), by_time[k].x.end());
    }
    const LogAxis err_axis = LogAxis::covering(es);
    const Panel left{70, 40, 340, 280, LogAxis::covering(hs), err_axis};
    const Panel right{520, 40, 340, 280, LogAxis::covering(ts), err_axis};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\""
       << 380 + 18 * static_cast<int>(by_h.size()) << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    draw_frame(os, left, "h_L", "error vs mesh threshold");
    draw_frame(os, right, "mean wall time per estimate [s]", "error vs cost");

    // Guides of order 1 and 2 through the coarsest point of the first series.
    if (!by_h.empty() && !by_h[0].x.empty()) {
        const auto it = std::max_element(by_h[0].x.begin(), by_h[0].x.end());
        const double h0 = *it;
        const double e0 = by_h[0].y[static_cast<std::size_t>(it - by_h[0].x.begin())];
        const double h1 = std::pow(10.0, left.x.lo);
        for (int order : {1, 2}) {
            double hend = h1;
            // Clip to the panel so the guide does not leave the frame.
            const double floor_e = std::pow(10.0, left.y.lo);
            if (e0 * std::pow(hend / h0, order) < floor_e) {
                hend = h0 * std::pow(floor_e / e0, 1.0 / order);
            }
            os << "<line class=\"guide\" x1=\"" << fmt("%.2f", left.px(h0)) << "\" y1=\"" << fmt("%.2f", left.py(e0))
               << "\" x2=\"" << fmt("%.2f", left.px(hend)) << "\" y2=\""
               << fmt("%.2f", left.py(e0 * std::pow(hend / h0, order)))
               << "\" stroke=\"#777\" stroke-dasharray=\"5,4\"/>\n";
            os << "<text x=\"" << fmt("%.2f", left.px(hend) + 4) << "\" y=\""
               << fmt("%.2f", left.py(e0 * std::pow(hend / h0, order)) - 4) << "\" font-size=\"11\" fill=\"#555\">order "
               << order << "</text>\n";
        }
    }
    for (std::size_t k = 0; k < by_h.size(); ++k) {
        const char* color = kPalette[k % std::size(kPalette)];
        draw_series(os, left, by_h[k], color);
        draw_series(os, right, by_time[k], color);
    }
    if (ts.empty()) {
        os << "<text x=\"" << right.left + right.width / 2 << "\" y=\"" << right.top + right.height / 2
           << "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#777\">no timing data</text>\n";
    }
    for (std::size_t k = 0; k < by_h.size(); ++k) {
        const char* color = kPalette[k % std::size(kPalette)];
        const double y = 380 + 18 * static_cast<double>(k);
        const std::string slope =
            std::isfinite(by_h[k].slope) ? "fitted slope " + fmt("%.2f", by_h[k].slope) : "fitted slope n/a";
        os << "<g class=\"legend\"><circle cx=\"80\" cy=\"" << y - 4 << "\" r=\"4\" fill=\"" << color
           << "\"/><text x=\"92\" y=\"" << y << "\" font-size=\"12\">" << by_h[k].method << " (" << slope
           << ")</text></g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace jmlmc
