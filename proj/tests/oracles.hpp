#pragma once

// Brute-force reference computations used only by the tests. None of these
// call into the algorithms they check: Rips complexes come from subset
// enumeration, homology ranks from dense Gaussian elimination over Z/2,
// single-linkage heights from minimum-spanning-tree path maxima, and linkage
// heights from direct set-to-set distances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include <phclust/geometry.hpp>
#include <phclust/random.hpp>

namespace oracle {

struct Cell {
    std::vector<int> vertices;
    double value = 0.0;
};

/// Every vertex subset of size <= max_dim+1 with all pairwise distances <= eps.
inline std::vector<Cell> rips_by_subsets(const phclust::DistanceMatrix& d, int max_dim, double eps) {
    const int n = static_cast<int>(d.size());
    std::vector<Cell> out;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> v;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) v.push_back(i);
        if (static_cast<int>(v.size()) > max_dim + 1) continue;
        double value = 0.0;
        for (std::size_t a = 0; a < v.size(); ++a)
            for (std::size_t b = a + 1; b < v.size(); ++b) value = std::max(value, d(v[a], v[b]));
        if (value <= eps) out.push_back({v, value});
    }
    return out;
}

/// Rank over Z/2 of a dense 0/1 matrix (rows x cols).
inline int z2_rank(std::vector<std::vector<std::uint8_t>> m) {
    int rank = 0;
    const std::size_t rows = m.size();
    const std::size_t cols = rows ? m[0].size() : 0;
    for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows); ++c) {
        std::size_t pivot = rank;
        while (pivot < rows && !m[pivot][c]) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[pivot], m[rank]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r != static_cast<std::size_t>(rank) && m[r][c]) {
                for (std::size_t k = 0; k < cols; ++k) m[r][k] ^= m[rank][k];
            }
        }
        ++rank;
    }
    return rank;
}

/// Betti numbers 0..max_dim of the subcomplex of cells with value <= eps.
inline std::vector<int> betti_dense(const std::vector<Cell>& cells, int max_dim, double eps) {
    std::vector<std::vector<std::vector<int>>> by_dim(max_dim + 2);
    for (const auto& c : cells) {
        const int k = static_cast<int>(c.vertices.size()) - 1;
        if (c.value <= eps && k <= max_dim) by_dim[k].push_back(c.vertices);
    }
    // rank of boundary map C_k -> C_{k-1}
    const auto boundary_rank = [&](int k) {
        if (k <= 0 || k > max_dim || by_dim[k].empty() || by_dim[k - 1].empty()) return 0;
        std::map<std::vector<int>, std::size_t> row;
        for (std::size_t i = 0; i < by_dim[k - 1].size(); ++i) row[by_dim[k - 1][i]] = i;
        std::vector<std::vector<std::uint8_t>> m(by_dim[k - 1].size(), std::vector<std::uint8_t>(by_dim[k].size(), 0));
        for (std::size_t j = 0; j < by_dim[k].size(); ++j) {
            const auto& s = by_dim[k][j];
            for (std::size_t skip = 0; skip < s.size(); ++skip) {
                std::vector<int> f;
                for (std::size_t i = 0; i < s.size(); ++i)
                    if (i != skip) f.push_back(s[i]);
                m[row.at(f)][j] ^= 1;
            }
        }
        return z2_rank(std::move(m));
    };
    std::vector<int> betti(max_dim + 1);
    for (int k = 0; k <= max_dim; ++k) {
        betti[k] = static_cast<int>(by_dim[k].size()) - boundary_rank(k) - boundary_rank(k + 1);
    }
    return betti;
}

/// Prim's MST, then the largest edge on the tree path between every pair.
inline phclust::DistanceMatrix mst_path_max(const phclust::DistanceMatrix& d) {
    const std::size_t n = d.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> tree(n);
    std::vector<bool> in(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> from(n, 0);
    best[0] = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!in[v] && (u == n || best[v] < best[u])) u = v;
        in[u] = true;
        if (step > 0) {
            tree[u].push_back({from[u], best[u]});
            tree[from[u]].push_back({u, best[u]});
        }
        for (std::size_t v = 0; v < n; ++v)
            if (!in[v] && d(u, v) < best[v]) {
                best[v] = d(u, v);
                from[v] = u;
            }
    }
    auto out = phclust::DistanceMatrix::zeros(d.labels());
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> maxe(n, -1.0);
        std::vector<std::size_t> stack{s};
        maxe[s] = 0.0;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (auto [v, w] : tree[u])
                if (maxe[v] < 0) {
                    maxe[v] = std::max(maxe[u], w);
                    stack.push_back(v);
                }
        }
        for (std::size_t t = s + 1; t < n; ++t) out.set(s, t, maxe[t]);
    }
    return out;
}

/// Symmetric matrix with i.i.d. uniform (0.1, 10.1) off-diagonal entries.
inline phclust::DistanceMatrix random_matrix(std::size_t n, std::uint64_t seed) {
    phclust::Xoshiro256 rng(seed);
    auto m = phclust::DistanceMatrix::zeros(phclust::default_labels(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, 0.1 + 10.0 * rng.unit());
    return m;
}

inline phclust::PointCloud random_cloud(std::size_t n, std::uint64_t seed, std::size_t dim = 2) {
    phclust::Xoshiro256 rng(seed);
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts)
        for (auto& x : p) x = rng.unit();
    return phclust::PointCloud(pts);
}

inline double max_abs_diff(const phclust::DistanceMatrix& a, const phclust::DistanceMatrix& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.entries().size(); ++k) m = std::max(m, std::abs(a.entries()[k] - b.entries()[k]));
    return m;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

/// All leaves under each cluster id of a dendrogram merge list.
template <typename Dendrogram>
std::vector<std::vector<std::size_t>> members(const Dendrogram& d) {
    const std::size_t n = d.leaf_count();
    std::vector<std::vector<std::size_t>> out(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = {i};
    for (std::size_t k = 0; k < d.merges().size(); ++k) {
        out[n + k] = out[d.merges()[k].left];
        out[n + k].insert(out[n + k].end(), out[d.merges()[k].right].begin(), out[d.merges()[k].right].end());
    }
    return out;
}

/// Unit square corners (0,0),(1,0),(1,1),(0,1).
inline phclust::PointCloud unit_square() { return phclust::PointCloud({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

/// Two unit squares with centres 10 apart along the diagonal.
inline phclust::PointCloud two_squares() {
    const double off = 10.0 / std::sqrt(2.0);
    std::vector<std::vector<double>> pts;
    for (double c : {0.0, off})
        for (auto [dx, dy] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}) pts.push_back({c + dx, c + dy});
    return phclust::PointCloud(pts);
}

} // namespace oracle
