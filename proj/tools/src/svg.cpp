#include "pnplab/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pnplab/errors.hpp"

namespace pnp::cli {

namespace {

constexpr double kWidth = 640, kHeight = 480, kMargin = 56;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
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

std::string header(double w, double h, const std::string& title) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n<title>" +
           escape(title) + "</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"" +
           num(w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           escape(title) + "</text>\n";
}

struct Box {
    double x0, x1, y0, y1;

    void include(double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    void pad() {
        if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
        if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
        const double dx = 0.05 * (x1 - x0), dy = 0.05 * (y1 - y0);
        x0 -= dx, x1 += dx, y0 -= dy, y1 += dy;
    }
    double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
    double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

Box empty_box() {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, -inf, inf, -inf};
}

std::string axes(const Box& b, const std::string& x_label, const std::string& y_label) {
    std::string s = "<g stroke=\"#444\" stroke-width=\"1\">\n<line x1=\"" + num(kMargin) + "\" y1=\"" +
                    num(kHeight - kMargin) + "\" x2=\"" + num(kWidth - kMargin) + "\" y2=\"" + num(kHeight - kMargin) +
                    "\"/>\n<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) +
                    "\" y2=\"" + num(kHeight - kMargin) + "\"/>\n</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = b.x0 + (b.x1 - b.x0) * i / 4.0, fy = b.y0 + (b.y1 - b.y0) * i / 4.0;
        s += "<text x=\"" + num(b.px(fx)) + "\" y=\"" + num(kHeight - kMargin + 16) + "\" text-anchor=\"middle\">" +
             num(fx) + "</text>\n";
        s += "<text x=\"" + num(kMargin - 6) + "\" y=\"" + num(b.py(fy) + 4) + "\" text-anchor=\"end\">" + num(fy) +
             "</text>\n";
    }
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">" +
         escape(x_label) + "</text>\n";
    s += "<text x=\"16\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kHeight / 2) + ")\">" + escape(y_label) + "</text>\n</g>\n";
    return s;
}

}  // namespace

std::vector<Point2> batch_points(const Batch& b) {
    if (b.sample_shape().size() != 2) throw UsageError("scatter plots need 2D point samples");
    std::vector<Point2> pts(b.count());
    for (std::size_t j = 0; j < b.count(); ++j) {
        const auto col = b.matrix().col(static_cast<Eigen::Index>(j));
        pts[j] = {col(0), col(1)};
    }
    return pts;
}

std::string scatter_svg(const std::string& title, const std::vector<Point2>& points, const ManifoldOracle& oracle) {
    Box box = empty_box();
    for (const auto& p : points) box.include(p[0], p[1]);
    for (const auto& p : oracle.centers()) box.include(p[0], p[1]);
    const auto& poly = oracle.polyline();
    for (const auto& p : poly) box.include(p[0], p[1]);
    box.pad();

    std::string s = header(kWidth, kHeight, title) + axes(box, "x", "y");
    if (!poly.empty()) {
        s += "<polyline fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\" points=\"";
        const std::size_t stride = std::max<std::size_t>(1, poly.size() / 400);
        for (std::size_t i = 0; i < poly.size(); i += stride) s += num(box.px(poly[i][0])) + "," + num(box.py(poly[i][1])) + " ";
        s += num(box.px(poly.back()[0])) + "," + num(box.py(poly.back()[1])) + "\"/>\n";
    }
    s += "<g fill=\"#1f77b4\" fill-opacity=\"0.5\">\n";
    for (const auto& p : points) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
        s += "<circle cx=\"" + num(box.px(p[0])) + "\" cy=\"" + num(box.py(p[1])) + "\" r=\"1.5\"/>\n";
    }
    s += "</g>\n";
    if (!oracle.centers().empty()) {
        s += "<g fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"2\">\n";
        for (const auto& c : oracle.centers())
            s += "<circle cx=\"" + num(box.px(c[0])) + "\" cy=\"" + num(box.py(c[1])) + "\" r=\"5\"/>\n";
        s += "</g>\n";
    }
    return s + "</svg>\n";
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
    Box box = empty_box();
    for (const auto& sr : series)
        for (std::size_t i = 0; i < std::min(sr.x.size(), sr.y.size()); ++i) box.include(sr.x[i], sr.y[i]);
    if (!std::isfinite(box.x0)) box = {0, 1, 0, 1};
    box.pad();

    std::string s = header(kWidth, kHeight, title) + axes(box, x_label, y_label);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& sr = series[k];
        const std::string color = kPalette[k % std::size(kPalette)];
        s += "<g stroke=\"" + color + "\" fill=\"" + color + "\">\n<polyline fill=\"none\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < std::min(sr.x.size(), sr.y.size()); ++i)
            if (std::isfinite(sr.y[i])) s += num(box.px(sr.x[i])) + "," + num(box.py(sr.y[i])) + " ";
        s += "\"/>\n";
        for (std::size_t i = 0; i < std::min(sr.x.size(), sr.y.size()); ++i)
            if (std::isfinite(sr.y[i]))
                s += "<circle cx=\"" + num(box.px(sr.x[i])) + "\" cy=\"" + num(box.py(sr.y[i])) + "\" r=\"3\"/>\n";
        s += "</g>\n<text x=\"" + num(kWidth - kMargin) + "\" y=\"" + num(kMargin + 16.0 * static_cast<double>(k)) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color + "\">" +
             escape(sr.name) + "</text>\n";
    }
    return s + "</svg>\n";
}

std::string frame_strip_svg(const std::string& title, const Grid& clip, const Grid* mask) {
    const Shape& s = clip.shape();
    if (s.channels != 1) throw UsageError("frame strips need single-channel clips, got " + s.str());
    if (mask != nullptr && !(mask->shape() == s)) throw UsageError("mask shape does not match the clip");
    const double cell = 8, gap = 8, top = 40;
    const double fw = cell * static_cast<double>(s.width), fh = cell * static_cast<double>(s.height);
    const double w = gap + static_cast<double>(s.frames) * (fw + gap);
    const double h = top + (mask ? 2 : 1) * (fh + gap);

    std::string out = header(std::max(w, 240.0), h, title);
    for (std::size_t f = 0; f < s.frames; ++f) {
        const double ox = gap + static_cast<double>(f) * (fw + gap);
        for (int row = 0; row < (mask ? 2 : 1); ++row) {
            const double oy = top + row * (fh + gap);
            for (std::size_t i = 0; i < s.height; ++i)
                for (std::size_t j = 0; j < s.width; ++j) {
                    const double v = std::clamp(clip.at(f, i, j), 0.0, 1.0);
                    const int g = static_cast<int>(std::lround(255 * v));
                    char fill[8];
                    std::snprintf(fill, sizeof fill, "#%02x%02x%02x", g, g, g);
                    out += "<rect x=\"" + num(ox + cell * static_cast<double>(j)) + "\" y=\"" +
                           num(oy + cell * static_cast<double>(i)) + "\" width=\"" + num(cell) + "\" height=\"" +
                           num(cell) + "\" fill=\"" + fill + "\"/>\n";
                    if (row == 1 && mask->at(f, i, j) > 0.0)
                        out += "<rect x=\"" + num(ox + cell * static_cast<double>(j)) + "\" y=\"" +
                               num(oy + cell * static_cast<double>(i)) + "\" width=\"" + num(cell) + "\" height=\"" +
                               num(cell) + "\" fill=\"#d62728\" fill-opacity=\"" + num(0.6 * std::min(1.0, mask->at(f, i, j))) +
                               "\"/>\n";
                }
        }
    }
    return out + "</svg>\n";
}

}  // namespace pnp::cli
