#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "geometry.hpp"

namespace phclust {

enum class LinkageMethod { single, complete, average, ward };

inline LinkageMethod parse_linkage_method(std::string_view name) {
    if (name == "single") return LinkageMethod::single;
    if (name == "complete") return LinkageMethod::complete;
    if (name == "average") return LinkageMethod::average;
    if (name == "ward") return LinkageMethod::ward;
    throw ValidationError("unknown linkage method '" + std::string(name) + "'");
}

inline std::string_view to_string(LinkageMethod m) {
    switch (m) {
    case LinkageMethod::single: return "single";
    case LinkageMethod::complete: return "complete";
    case LinkageMethod::average: return "average";
    case LinkageMethod::ward: return "ward";
    }
    return "?";
}

/// Coefficients of d_(ij)k = a_ij d_ik + a_ji d_jk + beta d_ij + gamma |d_ik - d_jk|.
struct LanceWilliams {
    double alpha_i = 0.0;
    double alpha_j = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    double update(double d_ik, double d_jk, double d_ij) const {
        return alpha_i * d_ik + alpha_j * d_jk + beta * d_ij + gamma * std::abs(d_ik - d_jk);
    }
};

inline LanceWilliams lance_williams(LinkageMethod m, double n_i, double n_j, double n_k) {
    switch (m) {
    case LinkageMethod::single: return {0.5, 0.5, 0.0, -0.5};
    case LinkageMethod::complete: return {0.5, 0.5, 0.0, 0.5};
    case LinkageMethod::average: return {n_i / (n_i + n_j), n_j / (n_i + n_j), 0.0, 0.0};
    case LinkageMethod::ward: {
        const double t = n_i + n_j + n_k;
        return {(n_i + n_k) / t, (n_j + n_k) / t, -n_k / t, 0.0};
    }
    }
    return {};
}

/// Ids 0..N-1 are leaves; the m-th merge creates cluster N+m.
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;

    friend bool operator==(const Merge&, const Merge&) = default;
};

class Dendrogram {
public:
    Dendrogram() = default;

    Dendrogram(std::vector<std::string> leaf_labels, std::vector<Merge> merges)
        : labels_(std::move(leaf_labels)), merges_(std::move(merges)) {
        const std::size_t n = labels_.size();
        if (n == 0) throw ValidationError("dendrogram needs at least one leaf");
        if (merges_.size() != n - 1) throw ValidationError("dendrogram on N leaves needs N-1 merges");
        std::vector<bool> used(2 * n - 1, false);
        for (std::size_t m = 0; m < merges_.size(); ++m) {
            const auto& mg = merges_[m];
            for (std::size_t c : {mg.left, mg.right}) {
                if (c >= n + m) throw ValidationError("merge " + std::to_string(m) + " uses a cluster that does not exist yet");
                if (used[c]) throw ValidationError("cluster " + std::to_string(c) + " merged twice");
                used[c] = true;
            }
            if (mg.left == mg.right) throw ValidationError("merge of a cluster with itself");
            if (mg.size != size_of(mg.left) + size_of(mg.right)) throw ValidationError("merge size mismatch");
        }
    }

    std::size_t leaf_count() const noexcept { return labels_.size(); }
    const std::vector<std::string>& leaf_labels() const noexcept { return labels_; }
    const std::vector<Merge>& merges() const noexcept { return merges_; }

    std::size_t size_of(std::size_t id) const {
        return id < labels_.size() ? 1 : merges_[id - labels_.size()].size;
    }
    double height_of(std::size_t id) const {
        return id < labels_.size() ? 0.0 : merges_[id - labels_.size()].height;
    }
    std::size_t root() const noexcept { return 2 * labels_.size() - 2; }

    /// True when some merge sits below one of its children (possible for Ward).
    bool has_inversions() const {
        for (const auto& m : merges_)
            if (m.height < height_of(m.left) || m.height < height_of(m.right)) return true;
        return false;
    }

    /// Leaves in left-to-right traversal order, smaller child id first.
    std::vector<std::size_t> leaf_order() const {
        std::vector<std::size_t> order;
        std::vector<std::size_t> stack{root()};
        while (!stack.empty()) {
            const std::size_t id = stack.back();
            stack.pop_back();
            if (id < labels_.size()) {
                order.push_back(id);
                continue;
            }
            const auto& m = merges_[id - labels_.size()];
            stack.push_back(std::max(m.left, m.right));
            stack.push_back(std::min(m.left, m.right));
        }
        return order;
    }

    friend bool operator==(const Dendrogram&, const Dendrogram&) = default;

private:
    std::vector<std::string> labels_;
    std::vector<Merge> merges_;
};

/**
 * Agglomerative clustering with the Lance-Williams update. Every step merges
 * the closest active pair; ties go to the smallest (min id, max id). Heights
 * are the merge-time distances, unmodified.
 */
inline Dendrogram linkage(const DistanceMatrix& dist, LinkageMethod method) {
    const std::size_t n = dist.size();
    if (n == 0) throw ValidationError("linkage needs at least one point");

    std::vector<double> d(dist.entries());
    std::vector<std::size_t> id(n), size(n, 1);
    for (std::size_t i = 0; i < n; ++i) id[i] = i;
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;

    std::vector<Merge> merges;
    merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t best_a = 0, best_b = 0;
        auto best = std::make_tuple(std::numeric_limits<double>::infinity(), std::size_t(-1), std::size_t(-1));
        for (std::size_t x = 0; x < active.size(); ++x) {
            const std::size_t a = active[x];
            for (std::size_t y = x + 1; y < active.size(); ++y) {
                const std::size_t b = active[y];
                auto key = std::make_tuple(d[a * n + b], std::min(id[a], id[b]), std::max(id[a], id[b]));
                if (key < best) {
                    best = key;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (id[best_a] > id[best_b]) std::swap(best_a, best_b);
        const std::size_t i = best_a, j = best_b;
        const double d_ij = d[i * n + j];

        for (std::size_t k : active) {
            if (k == i || k == j) continue;
            const auto lw = lance_williams(method, double(size[i]), double(size[j]), double(size[k]));
            const double v = lw.update(d[i * n + k], d[j * n + k], d_ij);
            d[i * n + k] = d[k * n + i] = v;
        }
        merges.push_back({id[i], id[j], d_ij, size[i] + size[j]});
        id[i] = n + step;
        size[i] += size[j];
        active.erase(std::find(active.begin(), active.end(), j));
    }
    return Dendrogram(dist.labels(), std::move(merges));
}

/// Entry (x,y) is the height of the merge that first joins leaves x and y.
inline CopheneticMatrix cophenetic(const Dendrogram& dendro) {
    const std::size_t n = dendro.leaf_count();
    auto m = CopheneticMatrix::zeros(dendro.leaf_labels());
    std::vector<std::vector<std::size_t>> leaves(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) leaves[i] = {i};
    for (std::size_t k = 0; k < dendro.merges().size(); ++k) {
        const auto& mg = dendro.merges()[k];
        auto& l = leaves[mg.left];
        auto& r = leaves[mg.right];
        for (std::size_t x : l)
            for (std::size_t y : r) m.set(x, y, mg.height);
        auto& merged = leaves[n + k];
        merged.reserve(l.size() + r.size());
        merged.insert(merged.end(), l.begin(), l.end());
        merged.insert(merged.end(), r.begin(), r.end());
        l.clear();
        l.shrink_to_fit();
        r.clear();
        r.shrink_to_fit();
    }
    return m;
}

/// Clustering of persistence classes from a homological cophenetic matrix.
inline Dendrogram hcd_dendrogram(const CopheneticMatrix& matrix, LinkageMethod method = LinkageMethod::single) {
    return linkage(matrix, method);
}

// ---- export -------------------------------------------------------------

inline void write_merge_table(std::ostream& out, const Dendrogram& d) {
    out << "left_id,right_id,height,new_size\n";
    for (const auto& m : d.merges()) {
        out << m.left << ',' << m.right << ',' << csv::format_double(m.height) << ',' << m.size << '\n';
    }
}

namespace detail {

inline std::string newick_label(std::string_view label) {
    if (label.empty()) return "''";
    if (label.find_first_of("()[]':;, \t\r\n") == std::string_view::npos) return std::string(label);
    std::string out = "'";
    for (char c : label) {
        if (c == '\'') out += '\'';
        out += c;
    }
    out += '\'';
    return out;
}

} // namespace detail

/// Rooted binary Newick; branch length = parent height - child height, leaves at 0.
inline std::string to_newick(const Dendrogram& d) {
    const std::size_t n = d.leaf_count();
    std::string out;
    // Iterative post-order so that deep chains do not exhaust the stack.
    struct Frame {
        std::size_t id;
        double parent_height;
        int state;
    };
    std::vector<Frame> stack{{d.root(), d.height_of(d.root()), 0}};
    while (!stack.empty()) {
        auto& f = stack.back();
        if (f.id < n) {
            out += detail::newick_label(d.leaf_labels()[f.id]);
        } else if (f.state == 0) {
            out += '(';
            f.state = 1;
            const auto& m = d.merges()[f.id - n];
            stack.push_back({std::min(m.left, m.right), m.height, 0});
            continue;
        } else if (f.state == 1) {
            out += ',';
            f.state = 2;
            const auto& m = d.merges()[f.id - n];
            stack.push_back({std::max(m.left, m.right), m.height, 0});
            continue;
        } else {
            out += ')';
        }
        const bool is_root = stack.size() == 1;
        if (!is_root) out += ':' + csv::format_double(f.parent_height - d.height_of(f.id));
        stack.pop_back();
    }
    out += ';';
    return out;
}

} // namespace phclust
