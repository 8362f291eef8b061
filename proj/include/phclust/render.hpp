#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clustering.hpp"
#include "error.hpp"
#include "persistence.hpp"

namespace phclust {

struct ValueRange {
    double min = 0.0;
    double max = 1.0;
};

struct FigureSpec {
    double width = 720.0;
    double height = 480.0;
    double margin = 48.0;
    /// Value axis (heights or filtration values); chosen from the data when empty.
    std::optional<ValueRange> value_range;
    double font_size = 10.0;

    void validate() const {
        if (!(width > 0.0) || !(height > 0.0)) throw ValidationError("figure dimensions must be positive");
        if (!(margin >= 0.0) || 2.0 * margin >= std::min(width, height)) {
            throw ValidationError("figure margins leave no drawing area");
        }
        if (!(font_size > 0.0)) throw ValidationError("font size must be positive");
        if (value_range && !(value_range->min < value_range->max)) throw ValidationError("axis min must be below axis max");
    }
};

/// Affine map from data values to pixels.
struct Axis {
    double value0 = 0.0, value1 = 1.0;
    double pixel0 = 0.0, pixel1 = 1.0;

    double to_pixel(double v) const { return pixel0 + (v - value0) / (value1 - value0) * (pixel1 - pixel0); }
    double to_value(double p) const { return value0 + (p - pixel0) / (pixel1 - pixel0) * (value1 - value0); }
};

namespace svg {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

inline std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

class Writer {
public:
    Writer(const FigureSpec& spec) : spec_(spec) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(spec.width)
             << "\" height=\"" << num(spec.height) << "\" viewBox=\"0 0 " << num(spec.width) << ' '
             << num(spec.height) << "\">\n"
             << "<defs>\n"
             << "<marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" "
                "markerHeight=\"6\" orient=\"auto\"><path d=\"M 0 0 L 10 5 L 0 10 z\"/></marker>\n"
             << "</defs>\n"
             << "<style>"
             << "line{stroke:#222;stroke-width:1.2}"
             << ".axis{stroke:#555;stroke-width:1}"
             << ".junction,.stem{stroke:#1f4e79;stroke-width:1.5}"
             << ".dim0{stroke:#c0392b}.dim1{stroke:#2471a3}.dim2{stroke:#229954}.dim3{stroke:#7d3c98}"
             << ".bar{stroke-width:2}.bin{fill:#5d8aa8;stroke:#1b2631;stroke-width:0.5}"
             << "text{font-family:sans-serif;font-size:" << num(spec.font_size) << "px}"
             << "</style>\n";
    }

    void line(double x1, double y1, double x2, double y2, std::string_view cls, bool arrow = false) {
        out_ << "<line class=\"" << cls << "\" x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
             << "\" y2=\"" << num(y2) << '"';
        if (arrow) out_ << " marker-end=\"url(#arrow)\"";
        out_ << "/>\n";
    }

    void rect(double x, double y, double w, double h, std::string_view cls) {
        out_ << "<rect class=\"" << cls << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
             << "\" height=\"" << num(h) << "\"/>\n";
    }

    void text(double x, double y, std::string_view content, std::string_view anchor = "middle",
              std::string_view cls = "label") {
        out_ << "<text class=\"" << cls << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor
             << "\">" << escape(content) << "</text>\n";
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    const FigureSpec& spec_;
    std::ostringstream out_;
};

inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

/// Five evenly spaced tick labels along an axis.
inline void ticks(Writer& w, const Axis& axis, bool horizontal, double cross) {
    for (int t = 0; t <= 4; ++t) {
        const double v = axis.value0 + (axis.value1 - axis.value0) * t / 4.0;
        const double p = axis.to_pixel(v);
        if (horizontal) {
            w.line(p, cross, p, cross + 4, "axis");
            w.text(p, cross + 16, short_number(v), "middle", "tick");
        } else {
            w.line(cross - 4, p, cross, p, "axis");
            w.text(cross - 6, p + 3, short_number(v), "end", "tick");
        }
    }
}

} // namespace svg

namespace detail {

inline double max_height(const Dendrogram& d) {
    double h = 0.0;
    for (const auto& m : d.merges()) h = std::max(h, m.height);
    return h;
}

inline ValueRange pick_range(const std::optional<ValueRange>& requested, double data_max) {
    if (requested) return *requested;
    return {0.0, data_max > 0.0 ? data_max : 1.0};
}

/// Largest finite birth or death, times 1.05, so infinite bars have somewhere to go.
inline double barcode_extent(std::span<const PersistencePair> bars) {
    double m = 0.0;
    for (const auto& p : bars) {
        m = std::max(m, p.birth);
        if (!p.infinite()) m = std::max(m, p.death);
    }
    return 1.05 * m;
}

} // namespace detail

/// Height axis of render_dendrogram: values grow upwards from the bottom margin.
inline Axis dendrogram_axis(const Dendrogram& d, const FigureSpec& spec) {
    const auto r = detail::pick_range(spec.value_range, detail::max_height(d));
    return {r.min, r.max, spec.height - spec.margin, spec.margin};
}

/// Leaves along the bottom in traversal order, merge heights upwards.
inline std::string render_dendrogram(const Dendrogram& d, const FigureSpec& spec = {}) {
    spec.validate();
    const Axis axis = dendrogram_axis(d, spec);
    const std::size_t n = d.leaf_count();
    const auto order = d.leaf_order();
    const double plot_w = spec.width - 2 * spec.margin;
    std::vector<double> x(2 * n - 1, 0.0);
    for (std::size_t slot = 0; slot < n; ++slot) x[order[slot]] = spec.margin + (slot + 0.5) * plot_w / n;

    svg::Writer w(spec);
    w.line(spec.margin, spec.height - spec.margin, spec.margin, spec.margin, "axis");
    svg::ticks(w, axis, false, spec.margin);
    for (std::size_t k = 0; k < d.merges().size(); ++k) {
        const auto& m = d.merges()[k];
        const double y = axis.to_pixel(m.height);
        for (std::size_t c : {m.left, m.right}) w.line(x[c], axis.to_pixel(d.height_of(c)), x[c], y, "stem");
        w.line(x[m.left], y, x[m.right], y, "junction");
        x[n + k] = 0.5 * (x[m.left] + x[m.right]);
    }
    for (std::size_t i = 0; i < n; ++i) w.text(x[i], spec.height - spec.margin + 14, d.leaf_labels()[i]);
    return w.finish();
}

/// Filtration axis of render_barcode.
inline Axis barcode_axis(const Barcode& b, const FigureSpec& spec) {
    const auto r = detail::pick_range(spec.value_range, detail::barcode_extent(b.pairs));
    return {r.min, r.max, spec.margin, spec.width - spec.margin};
}

/// One horizontal segment per bar, grouped by dimension; infinite bars end in an arrow at the right margin.
inline std::string render_barcode(const Barcode& b, const FigureSpec& spec = {}) {
    spec.validate();
    const Axis axis = barcode_axis(b, spec);
    std::vector<const PersistencePair*> bars;
    for (const auto& p : b.pairs) bars.push_back(&p);
    std::stable_sort(bars.begin(), bars.end(), [](const auto* l, const auto* r) { return bar_less(*l, *r); });

    svg::Writer w(spec);
    const double base = spec.height - spec.margin;
    w.line(spec.margin, base, spec.width - spec.margin, base, "axis");
    svg::ticks(w, axis, true, base);
    const double row_h = bars.empty() ? 0.0 : (spec.height - 2 * spec.margin) / static_cast<double>(bars.size());
    int last_dim = -1;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto& p = *bars[i];
        const double y = spec.margin + (i + 0.5) * row_h;
        const std::string cls = "bar dim" + std::to_string(p.dimension);
        const double x1 = axis.to_pixel(p.birth);
        if (p.infinite()) {
            w.line(x1, y, spec.width - spec.margin, y, cls, true);
        } else {
            w.line(x1, y, axis.to_pixel(p.death), y, cls);
        }
        if (p.dimension != last_dim) {
            w.text(spec.margin - 6, y + 3, "H" + std::to_string(p.dimension), "end", "dimension");
            last_dim = p.dimension;
        }
    }
    return w.finish();
}

/**
 * Dendrogram of the dimension-0 classes (left, root towards the left edge)
 * beside their ordinary barcode (right). Rows follow the dendrogram's leaf
 * order, so each leaf sits level with its own bar.
 */
inline std::string render_enriched(const Dendrogram& d, const Barcode& b, const FigureSpec& spec = {}) {
    spec.validate();
    const std::size_t n = d.leaf_count();
    auto bars = b.in_dimension(0);
    if (bars.size() != n) {
        throw ValidationError("enriched barcode: " + std::to_string(n) + " leaves but " + std::to_string(bars.size()) +
                              " dimension-0 bars");
    }
    std::stable_sort(bars.begin(), bars.end(),
                     [](const auto& l, const auto& r) { return l.birth_simplex < r.birth_simplex; });
    for (std::size_t i = 0; i < n; ++i) {
        if (bars[i].birth_simplex != Simplex{static_cast<Vertex>(i)}) {
            throw ValidationError("enriched barcode: dimension-0 bars do not cover vertices 0..N-1");
        }
        if (!bars[i].label.empty() && bars[i].label != d.leaf_labels()[i]) {
            throw ValidationError("enriched barcode: bar of vertex " + std::to_string(i) + " is labelled '" +
                                  bars[i].label + "' but leaf " + std::to_string(i) + " is '" + d.leaf_labels()[i] + "'");
        }
    }

    const double split = spec.margin + 0.42 * (spec.width - 2 * spec.margin);
    const double gap = 60.0;
    const double top = spec.margin, bottom = spec.height - spec.margin;
    const auto left_range = detail::pick_range(std::nullopt, detail::max_height(d));
    const Axis left{left_range.min, left_range.max, split, spec.margin};
    const auto right_range = detail::pick_range(spec.value_range, detail::barcode_extent(bars));
    const Axis right{right_range.min, right_range.max, split + gap, spec.width - spec.margin};

    const auto order = d.leaf_order();
    const double row_h = (bottom - top) / static_cast<double>(n);
    std::vector<double> y(2 * n - 1, 0.0);
    for (std::size_t slot = 0; slot < n; ++slot) y[order[slot]] = top + (slot + 0.5) * row_h;

    svg::Writer w(spec);
    w.line(spec.margin, bottom, split, bottom, "axis");
    svg::ticks(w, left, true, bottom);
    w.line(split + gap, bottom, spec.width - spec.margin, bottom, "axis");
    svg::ticks(w, right, true, bottom);
    for (std::size_t k = 0; k < d.merges().size(); ++k) {
        const auto& m = d.merges()[k];
        const double x = left.to_pixel(m.height);
        for (std::size_t c : {m.left, m.right}) w.line(left.to_pixel(d.height_of(c)), y[c], x, y[c], "stem");
        w.line(x, y[m.left], x, y[m.right], "junction");
        y[n + k] = 0.5 * (y[m.left] + y[m.right]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        w.text(split + gap / 2, y[i] + 3, d.leaf_labels()[i]);
        const auto& p = bars[i];
        const double x1 = right.to_pixel(p.birth);
        if (p.infinite()) {
            w.line(x1, y[i], spec.width - spec.margin, y[i], "bar dim0", true);
        } else {
            w.line(x1, y[i], right.to_pixel(p.death), y[i], "bar dim0");
        }
    }
    return w.finish();
}

/// Equal-width bins over [min, max]; each bin is [lo, hi) except the last, which is closed.
inline std::vector<std::size_t> histogram_counts(std::span<const double> values, int bins) {
    if (values.empty()) throw ValidationError("histogram needs at least one value");
    if (bins < 1) throw ValidationError("histogram needs at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        std::size_t k = 0;
        if (hi > lo) {
            k = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * bins));
            k = std::min(k, counts.size() - 1);
        }
        ++counts[k];
    }
    return counts;
}

inline std::string render_histogram(std::span<const double> values, int bins, const FigureSpec& spec = {}) {
    spec.validate();
    const auto counts = histogram_counts(values, bins);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const ValueRange data{*lo_it, *hi_it > *lo_it ? *hi_it : *lo_it + 1.0};
    const auto r = spec.value_range.value_or(data);
    const Axis xaxis{r.min, r.max, spec.margin, spec.width - spec.margin};
    const double top_count = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
    const Axis yaxis{0.0, top_count, spec.height - spec.margin, spec.margin};

    svg::Writer w(spec);
    w.line(spec.margin, spec.height - spec.margin, spec.width - spec.margin, spec.height - spec.margin, "axis");
    w.line(spec.margin, spec.height - spec.margin, spec.margin, spec.margin, "axis");
    svg::ticks(w, xaxis, true, spec.height - spec.margin);
    svg::ticks(w, yaxis, false, spec.margin);
    const double width = (data.max - data.min) / bins;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double x0 = xaxis.to_pixel(data.min + k * width);
        const double x1 = xaxis.to_pixel(data.min + (k + 1) * width);
        const double y = yaxis.to_pixel(static_cast<double>(counts[k]));
        w.rect(x0, y, x1 - x0, spec.height - spec.margin - y, "bin");
    }
    return w.finish();
}

} // namespace phclust
