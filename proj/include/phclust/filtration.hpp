#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "geometry.hpp"

namespace phclust {

using Vertex = std::int32_t;

/// Strictly increasing list of vertex indices.
class Simplex {
public:
    Simplex() = default;

    explicit Simplex(std::vector<Vertex> vertices) : vertices_(std::move(vertices)) {
        if (vertices_.empty()) throw ValidationError("a simplex needs at least one vertex");
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            if (vertices_[i] < 0) throw ValidationError("negative vertex index in simplex");
            if (i > 0 && vertices_[i - 1] >= vertices_[i]) {
                throw ValidationError("simplex vertices must be strictly increasing");
            }
        }
    }

    Simplex(std::initializer_list<Vertex> vertices) : Simplex(std::vector<Vertex>(vertices)) {}

    int dimension() const noexcept { return static_cast<int>(vertices_.size()) - 1; }
    const std::vector<Vertex>& vertices() const noexcept { return vertices_; }

    /// Codimension-one faces, the i-th omitting vertex i.
    std::vector<Simplex> facets() const {
        std::vector<Simplex> out;
        if (vertices_.size() < 2) return out;
        out.reserve(vertices_.size());
        for (std::size_t skip = 0; skip < vertices_.size(); ++skip) {
            Simplex f;
            f.vertices_.reserve(vertices_.size() - 1);
            for (std::size_t i = 0; i < vertices_.size(); ++i)
                if (i != skip) f.vertices_.push_back(vertices_[i]);
            out.push_back(std::move(f));
        }
        return out;
    }

    friend auto operator<=>(const Simplex&, const Simplex&) = default;
    friend bool operator==(const Simplex&, const Simplex&) = default;

private:
    std::vector<Vertex> vertices_;
};

struct SimplexHash {
    std::size_t operator()(const Simplex& s) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (Vertex v : s.vertices()) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }
};

struct FilteredSimplex {
    Simplex simplex;
    double value = 0.0;
};

/// Reduction order: filtration value, then dimension, then lexicographic vertices.
inline bool filtration_less(const FilteredSimplex& a, const FilteredSimplex& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.simplex.dimension() != b.simplex.dimension()) return a.simplex.dimension() < b.simplex.dimension();
    return a.simplex < b.simplex;
}

/**
 * @brief A finite simplicial complex with a filtration value per simplex,
 *        stored in reduction order.
 *
 * Construction sorts the simplices and indexes them. Structural properties
 * (face closure, monotone values, vertices at 0) are checked by validate(),
 * which the persistence reduction calls before doing any work.
 */
class FilteredComplex {
public:
    FilteredComplex() = default;

    FilteredComplex(std::vector<FilteredSimplex> simplices, std::size_t vertex_count, int max_dimension,
                    std::vector<std::string> labels = {})
        : simplices_(std::move(simplices)), vertex_count_(vertex_count), max_dimension_(max_dimension),
          labels_(labels.empty() ? default_labels(vertex_count) : std::move(labels)) {
        if (labels_.size() != vertex_count_) throw ValidationError("complex label count does not match vertex count");
        std::sort(simplices_.begin(), simplices_.end(), filtration_less);
        index_.reserve(simplices_.size());
        for (std::size_t i = 0; i < simplices_.size(); ++i) {
            const auto& s = simplices_[i];
            if (s.simplex.vertices().empty()) throw ValidationError("empty simplex in complex");
            if (s.simplex.dimension() > max_dimension_) {
                throw ValidationError("simplex of dimension " + std::to_string(s.simplex.dimension()) +
                                      " exceeds complex max dimension " + std::to_string(max_dimension_));
            }
            if (static_cast<std::size_t>(s.simplex.vertices().back()) >= vertex_count_) {
                throw ValidationError("simplex vertex out of range");
            }
            if (!(s.value >= 0.0) || std::isnan(s.value)) throw ValidationError("filtration values must be >= 0");
            if (!index_.emplace(s.simplex, i).second) throw ValidationError("duplicate simplex in complex");
        }
    }

    std::size_t size() const noexcept { return simplices_.size(); }
    std::size_t vertex_count() const noexcept { return vertex_count_; }
    int max_dimension() const noexcept { return max_dimension_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::vector<FilteredSimplex>& simplices() const noexcept { return simplices_; }
    const FilteredSimplex& operator[](std::size_t i) const { return simplices_[i]; }

    std::optional<std::size_t> index_of(const Simplex& s) const {
        auto it = index_.find(s);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Sorted indices of the facets of simplex i. Requires face closure.
    std::vector<std::size_t> boundary(std::size_t i) const {
        std::vector<std::size_t> out;
        for (const auto& f : simplices_[i].simplex.facets()) out.push_back(index_.at(f));
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Throws ValidationError on a missing face, a face ordered after its coface,
    /// a decreasing value, or a vertex with nonzero value.
    void validate() const {
        for (std::size_t i = 0; i < simplices_.size(); ++i) {
            const auto& s = simplices_[i];
            if (s.simplex.dimension() == 0 && s.value != 0.0) {
                throw ValidationError("vertex " + std::to_string(s.simplex.vertices()[0]) + " has nonzero filtration value");
            }
            for (const auto& f : s.simplex.facets()) {
                auto j = index_of(f);
                if (!j) throw ValidationError("complex is not closed under faces: missing face of simplex " + std::to_string(i));
                if (simplices_[*j].value > s.value) throw ValidationError("filtration is not monotone at simplex " + std::to_string(i));
                if (*j >= i) throw ValidationError("face ordered after coface at simplex " + std::to_string(i));
            }
        }
    }

    /// Debug dump, one "v0 v1 ... vk : value" line per simplex in reduction order.
    void dump(std::ostream& out) const {
        for (const auto& s : simplices_) {
            for (std::size_t k = 0; k < s.simplex.vertices().size(); ++k) {
                if (k) out << ' ';
                out << s.simplex.vertices()[k];
            }
            out << " : " << csv::format_double(s.value) << '\n';
        }
    }

private:
    std::vector<FilteredSimplex> simplices_;
    std::size_t vertex_count_ = 0;
    int max_dimension_ = 0;
    std::vector<std::string> labels_;
    std::unordered_map<Simplex, std::size_t, SimplexHash> index_;
};

struct ComplexLimits {
    /// 0 means unlimited.
    std::size_t max_simplices = 0;
};

namespace detail {

inline int clamp_dimension(int max_dim, std::size_t n) {
    if (max_dim < 0) throw ValidationError("max_dim must be >= 0");
    const int cap = static_cast<int>(n) - 1;
    if (max_dim > cap) {
        warn("max_dim " + std::to_string(max_dim) + " exceeds " + std::to_string(cap) +
             " (number of points - 1); clamping");
        return cap;
    }
    return max_dim;
}

inline void check_budget(std::size_t count, const ComplexLimits& limits) {
    if (limits.max_simplices != 0 && count > limits.max_simplices) {
        throw ValidationError("complex exceeds the budget of " + std::to_string(limits.max_simplices) + " simplices");
    }
}

} // namespace detail

/**
 * Vietoris-Rips filtration: every vertex set of at most max_dim+1 points whose
 * pairwise distances are all <= max_eps, valued at its largest pairwise
 * distance. An empty max_eps means the largest matrix entry, so the complex
 * ends as the full max_dim-skeleton.
 */
inline FilteredComplex build_rips(const DistanceMatrix& dist, int max_dim, std::optional<double> max_eps = std::nullopt,
                                  ComplexLimits limits = {}) {
    const std::size_t n = dist.size();
    if (n == 0) throw ValidationError("cannot build a complex on zero points");
    for (double v : dist.entries())
        if (!std::isfinite(v)) throw ValidationError("distance matrix has non-finite entries");
    if (max_eps && !(*max_eps > 0.0)) throw ValidationError("max_eps must be > 0");
    max_dim = detail::clamp_dimension(max_dim, n);
    const double eps = max_eps.value_or(dist.max_entry());

    // lower[v] = neighbours u < v within eps, ascending.
    std::vector<std::vector<Vertex>> lower(n);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t u = 0; u < v; ++u)
            if (dist(u, v) <= eps) lower[v].push_back(static_cast<Vertex>(u));

    std::vector<FilteredSimplex> out;
    std::vector<Vertex> current; // descending while expanding
    std::function<void(double, const std::vector<Vertex>&)> expand = [&](double value,
                                                                        const std::vector<Vertex>& candidates) {
        std::vector<Vertex> sorted(current.rbegin(), current.rend());
        out.push_back({Simplex(std::move(sorted)), value});
        detail::check_budget(out.size(), limits);
        if (static_cast<int>(current.size()) > max_dim) return;
        for (Vertex u : candidates) {
            double next_value = value;
            for (Vertex w : current) next_value = std::max(next_value, dist(u, w));
            std::vector<Vertex> next;
            std::set_intersection(candidates.begin(), candidates.end(), lower[u].begin(), lower[u].end(),
                                  std::back_inserter(next));
            current.push_back(u);
            expand(next_value, next);
            current.pop_back();
        }
    };
    for (std::size_t v = 0; v < n; ++v) {
        current.assign(1, static_cast<Vertex>(v));
        expand(0.0, lower[v]);
    }
    return FilteredComplex(std::move(out), n, max_dim, dist.labels());
}

/**
 * Radius of the smallest ball enclosing the simplex's points: 0 for a vertex,
 * half the length for an edge, and for a triangle the circumradius when it is
 * acute, else half its longest side.
 */
inline double cech_value(const Simplex& simplex, const PointCloud& cloud) {
    if (simplex.dimension() > 2) {
        throw ValidationError("Cech values are only supported up to dimension 2, got " +
                              std::to_string(simplex.dimension()));
    }
    const auto& v = simplex.vertices();
    for (Vertex x : v)
        if (static_cast<std::size_t>(x) >= cloud.size()) throw ValidationError("simplex vertex out of range");
    const auto d = [&](Vertex a, Vertex b) { return point_distance(cloud.point(a), cloud.point(b), Metric::euclidean); };
    if (v.size() == 1) return 0.0;
    if (v.size() == 2) return 0.5 * d(v[0], v[1]);

    std::array<double, 3> s{d(v[0], v[1]), d(v[0], v[2]), d(v[1], v[2])};
    std::sort(s.begin(), s.end(), std::greater<>());
    const double a = s[0], b = s[1], c = s[2];
    if (b * b + c * c <= a * a) return 0.5 * a;
    // Kahan's stable Heron formula, a >= b >= c.
    const double area = 0.25 * std::sqrt((a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c)));
    if (!(area > 0.0)) return 0.5 * a;
    return std::max(0.5 * a, a * b * c / (4.0 * area));
}

/// Cech filtration by enclosing-ball radius, dimension <= 2. An empty max_eps includes everything.
inline FilteredComplex build_cech(const PointCloud& cloud, int max_dim, std::optional<double> max_eps = std::nullopt,
                                  ComplexLimits limits = {}) {
    if (max_dim > 2) throw ValidationError("Cech complexes are only supported up to dimension 2");
    if (max_eps && !(*max_eps > 0.0)) throw ValidationError("max_eps must be > 0");
    const std::size_t n = cloud.size();
    max_dim = detail::clamp_dimension(max_dim, n);
    const double eps = max_eps.value_or(std::numeric_limits<double>::infinity());

    std::vector<FilteredSimplex> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({Simplex{static_cast<Vertex>(i)}, 0.0});
    std::vector<double> edge(n * n, std::numeric_limits<double>::infinity());
    if (max_dim >= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const Simplex s{static_cast<Vertex>(i), static_cast<Vertex>(j)};
                const double val = cech_value(s, cloud);
                if (val <= eps) {
                    edge[i * n + j] = val;
                    out.push_back({s, val});
                    detail::check_budget(out.size(), limits);
                }
            }
        }
    }
    if (max_dim >= 2) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!std::isfinite(edge[i * n + j])) continue;
                for (std::size_t k = j + 1; k < n; ++k) {
                    if (!std::isfinite(edge[i * n + k]) || !std::isfinite(edge[j * n + k])) continue;
                    const Simplex s{static_cast<Vertex>(i), static_cast<Vertex>(j), static_cast<Vertex>(k)};
                    double val = cech_value(s, cloud);
                    val = std::max({val, edge[i * n + j], edge[i * n + k], edge[j * n + k]});
                    if (val <= eps) {
                        out.push_back({s, val});
                        detail::check_budget(out.size(), limits);
                    }
                }
            }
    }
    return FilteredComplex(std::move(out), n, max_dim, cloud.labels());
}

} // namespace phclust
