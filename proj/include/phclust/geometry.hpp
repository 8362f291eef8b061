#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "csv.hpp"
#include "error.hpp"

namespace phclust {

inline std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
    return labels;
}

/**
 * @brief Labeled points in R^d, stored row-major.
 *
 * Every point has the same dimension, labels are unique and there is at least
 * one point. Construction throws ValidationError otherwise.
 */
class PointCloud {
public:
    PointCloud(std::vector<std::vector<double>> points, std::vector<std::string> labels)
        : labels_(std::move(labels)) {
        if (points.empty()) throw ValidationError("point cloud must contain at least one point");
        if (labels_.size() != points.size()) {
            throw ValidationError("point cloud has " + std::to_string(points.size()) + " points but " +
                                  std::to_string(labels_.size()) + " labels");
        }
        dim_ = points.front().size();
        if (dim_ == 0) throw ValidationError("points must have dimension >= 1");
        coords_.reserve(points.size() * dim_);
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].size() != dim_) {
                throw ValidationError("point " + std::to_string(i) + " has dimension " +
                                      std::to_string(points[i].size()) + ", expected " + std::to_string(dim_));
            }
            for (double x : points[i]) {
                if (!std::isfinite(x)) throw ValidationError("point " + std::to_string(i) + " has a non-finite coordinate");
                coords_.push_back(x);
            }
        }
        std::unordered_set<std::string> seen;
        for (const auto& l : labels_) {
            if (!seen.insert(l).second) throw ValidationError("duplicate label '" + l + "'");
        }
    }

    explicit PointCloud(std::vector<std::vector<double>> points)
        : PointCloud(points, default_labels(points.size())) {}
    PointCloud(std::initializer_list<std::vector<double>> points)
        : PointCloud(std::vector<std::vector<double>>(points)) {}

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t dimension() const noexcept { return dim_; }
    std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

private:
    std::vector<double> coords_;
    std::vector<std::string> labels_;
    std::size_t dim_ = 0;
};

/**
 * @brief Symmetric, nonnegative, zero-diagonal N x N matrix with labels.
 *
 * This is the interchange type of the whole library: Euclidean distance
 * matrices, classical cophenetic matrices and homological cophenetic matrices
 * all use it.
 */
class DistanceMatrix {
public:
    DistanceMatrix() = default;

    /// Exact validation: entries must be symmetric bit for bit.
    DistanceMatrix(std::size_t n, std::vector<double> entries, std::vector<std::string> labels)
        : n_(n), entries_(std::move(entries)), labels_(std::move(labels)) {
        validate(0.0);
    }

    DistanceMatrix(std::size_t n, std::vector<double> entries)
        : DistanceMatrix(n, std::move(entries), default_labels(n)) {}

    /// All-zero matrix, to be filled with set().
    static DistanceMatrix zeros(std::vector<std::string> labels) {
        DistanceMatrix m;
        m.n_ = labels.size();
        m.entries_.assign(m.n_ * m.n_, 0.0);
        m.labels_ = std::move(labels);
        return m;
    }

    /// Validates to `tol`, then symmetrizes as (M + M^T) / 2 with an exact zero diagonal.
    static DistanceMatrix from_approximate(std::size_t n, std::vector<double> entries,
                                           std::vector<std::string> labels, double tol) {
        DistanceMatrix m;
        m.n_ = n;
        m.entries_ = std::move(entries);
        m.labels_ = std::move(labels);
        m.validate(tol);
        for (std::size_t i = 0; i < n; ++i) {
            m.entries_[i * n + i] = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double avg = 0.5 * (m.entries_[i * n + j] + m.entries_[j * n + i]);
                m.entries_[i * n + j] = m.entries_[j * n + i] = avg;
            }
        }
        return m;
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::span<const double> row(std::size_t i) const { return {entries_.data() + i * n_, n_}; }
    const std::vector<double>& entries() const noexcept { return entries_; }

    /// Writes entry (i,j) and (j,i).
    void set(std::size_t i, std::size_t j, double v) {
        entries_[i * n_ + j] = v;
        entries_[j * n_ + i] = v;
    }

    double max_entry() const {
        return entries_.empty() ? 0.0 : *std::max_element(entries_.begin(), entries_.end());
    }

    /// Simultaneous row/column permutation: result(i,j) = this(perm[i], perm[j]).
    DistanceMatrix permuted(std::span<const std::size_t> perm) const {
        DistanceMatrix m;
        m.n_ = n_;
        m.entries_.resize(entries_.size());
        m.labels_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            m.labels_[i] = labels_[perm[i]];
            for (std::size_t j = 0; j < n_; ++j) m.entries_[i * n_ + j] = entries_[perm[i] * n_ + perm[j]];
        }
        return m;
    }

    /// Upper triangle (i < j) in row-major order.
    std::vector<double> upper_triangle() const {
        std::vector<double> out;
        out.reserve(n_ * (n_ - (n_ > 0)) / 2);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) out.push_back(entries_[i * n_ + j]);
        return out;
    }

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    void validate(double tol) const {
        if (entries_.size() != n_ * n_) {
            throw ValidationError("matrix of size " + std::to_string(n_) + " needs " + std::to_string(n_ * n_) +
                                  " entries, got " + std::to_string(entries_.size()));
        }
        if (labels_.size() != n_) throw ValidationError("matrix label count does not match its size");
        const auto at = [&](std::size_t i, std::size_t j) {
            return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        };
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                const double v = entries_[i * n_ + j];
                if (!std::isfinite(v)) throw ValidationError("non-finite entry at " + at(i, j));
                if (v < 0.0) throw ValidationError("negative entry at " + at(i, j));
            }
            if (std::abs(entries_[i * n_ + i]) > tol) throw ValidationError("nonzero diagonal entry at " + at(i, i));
            for (std::size_t j = i + 1; j < n_; ++j) {
                if (std::abs(entries_[i * n_ + j] - entries_[j * n_ + i]) > tol) {
                    throw ValidationError("asymmetric entries at " + at(i, j) + "/" + at(j, i));
                }
            }
        }
    }

    std::size_t n_ = 0;
    std::vector<double> entries_;
    std::vector<std::string> labels_;
};

/// Cophenetic matrices share the distance-matrix representation and CSV format.
using CopheneticMatrix = DistanceMatrix;

enum class Metric { euclidean, manhattan, chebyshev };

inline Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "manhattan") return Metric::manhattan;
    if (name == "chebyshev") return Metric::chebyshev;
    throw ValidationError("unknown metric '" + std::string(name) + "'");
}

inline double point_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = std::abs(a[k] - b[k]);
        switch (metric) {
        case Metric::euclidean: acc += d * d; break;
        case Metric::manhattan: acc += d; break;
        case Metric::chebyshev: acc = std::max(acc, d); break;
        }
    }
    return metric == Metric::euclidean ? std::sqrt(acc) : acc;
}

/// Each unordered pair is evaluated once, so the result is exactly symmetric.
inline DistanceMatrix pairwise_distances(const PointCloud& cloud, Metric metric = Metric::euclidean) {
    auto m = DistanceMatrix::zeros(cloud.labels());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        for (std::size_t j = i + 1; j < cloud.size(); ++j) m.set(i, j, point_distance(cloud.point(i), cloud.point(j), metric));
    return m;
}

struct PointCsvOptions {
    bool has_header = false;
    bool label_column = false;
};

inline PointCloud load_point_cloud(std::istream& in, PointCsvOptions opts = {}) {
    auto rows = csv::read_rows(in);
    std::size_t first = opts.has_header ? 1 : 0;
    if (rows.size() <= first) throw ValidationError("point CSV contains no data rows");
    const std::size_t width = rows[first].fields.size();
    const std::size_t offset = opts.label_column ? 1 : 0;
    if (width <= offset) throw ValidationError("row " + std::to_string(rows[first].line) + ": no coordinate columns");

    std::vector<std::vector<double>> points;
    std::vector<std::string> labels;
    std::unordered_set<std::string> seen;
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = "row " + std::to_string(row.line);
        if (row.fields.size() != width) {
            throw ValidationError(where + ": expected " + std::to_string(width) + " fields, got " +
                                  std::to_string(row.fields.size()));
        }
        std::vector<double> pt;
        for (std::size_t c = offset; c < width; ++c) {
            auto v = csv::parse_double(row.fields[c]);
            if (!v || !std::isfinite(*v)) {
                throw ValidationError(where + ": non-numeric coordinate '" + row.fields[c] + "'");
            }
            pt.push_back(*v);
        }
        if (opts.label_column) {
            if (!seen.insert(row.fields[0]).second) {
                throw ValidationError(where + ": duplicate label '" + row.fields[0] + "'");
            }
            labels.push_back(row.fields[0]);
        }
        points.push_back(std::move(pt));
    }
    if (!opts.label_column) labels = default_labels(points.size());
    return PointCloud(std::move(points), std::move(labels));
}

inline PointCloud load_point_cloud(std::string_view text, PointCsvOptions opts = {}) {
    std::istringstream in{std::string(text)};
    return load_point_cloud(in, opts);
}

inline constexpr double kSymmetryTolerance = 1e-9;

/**
 * Square numeric CSV. A header row is recognized when the first row holds a
 * non-numeric field; a label column when data rows are one field wider than
 * the number of data rows. When both are present their labels must agree.
 */
inline DistanceMatrix load_distance_matrix(std::istream& in) {
    auto rows = csv::read_rows(in);
    if (rows.empty()) throw ValidationError("distance matrix CSV is empty");

    // A non-numeric first field alone means a label column, not a header.
    const auto& top = rows.front().fields;
    bool header = top.size() == 1 && !csv::parse_double(top[0]);
    for (std::size_t c = 1; c < top.size(); ++c) header = header || !csv::parse_double(top[c]);
    const std::size_t n = rows.size() - (header ? 1 : 0);
    if (n == 0) throw ValidationError("distance matrix CSV has no data rows");
    const std::size_t first = header ? 1 : 0;
    const bool label_col = rows[first].fields.size() == n + 1;

    std::vector<double> entries;
    entries.reserve(n * n);
    std::vector<std::string> row_labels;
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = "row " + std::to_string(row.line);
        if (row.fields.size() != n + (label_col ? 1 : 0)) {
            throw ValidationError(where + ": expected " + std::to_string(n + (label_col ? 1 : 0)) + " fields, got " +
                                  std::to_string(row.fields.size()));
        }
        if (label_col) row_labels.push_back(row.fields[0]);
        for (std::size_t c = label_col ? 1 : 0; c < row.fields.size(); ++c) {
            auto v = csv::parse_double(row.fields[c]);
            if (!v) throw ValidationError(where + ": non-numeric entry '" + row.fields[c] + "'");
            entries.push_back(*v);
        }
    }

    std::vector<std::string> labels;
    if (header) {
        const auto& h = rows.front().fields;
        if (h.size() == n + 1) {
            labels.assign(h.begin() + 1, h.end());
        } else if (h.size() == n) {
            labels = h;
        } else {
            throw ValidationError("row " + std::to_string(rows.front().line) + ": header has " +
                                  std::to_string(h.size()) + " fields for a " + std::to_string(n) + "x" +
                                  std::to_string(n) + " matrix");
        }
        if (label_col && labels != row_labels) throw ValidationError("header labels do not match the label column");
    } else if (label_col) {
        labels = row_labels;
    } else {
        labels = default_labels(n);
    }
    return DistanceMatrix::from_approximate(n, std::move(entries), std::move(labels), kSymmetryTolerance);
}

inline DistanceMatrix load_distance_matrix(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_distance_matrix(in);
}

/// Header row ",l0,l1,..." followed by "li,v,v,..." rows; values use 17 significant digits.
inline void write_matrix_csv(std::ostream& out, const DistanceMatrix& m) {
    for (const auto& l : m.labels()) out << ',' << csv::quote(l);
    out << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << csv::quote(m.labels()[i]);
        for (std::size_t j = 0; j < m.size(); ++j) out << ',' << csv::format_double(m(i, j));
        out << '\n';
    }
}

inline std::string matrix_csv(const DistanceMatrix& m) {
    std::ostringstream out;
    write_matrix_csv(out, m);
    return out.str();
}

inline void write_point_cloud_csv(std::ostream& out, const PointCloud& cloud) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << csv::quote(cloud.labels()[i]);
        for (double x : cloud.point(i)) out << ',' << csv::format_double(x);
        out << '\n';
    }
}

} // namespace phclust
