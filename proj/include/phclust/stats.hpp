#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace phclust {

struct MantelResult {
    double r = 0.0;
    double p_value = 1.0;
    int permutations = 0;
    std::uint64_t seed = 0;
    std::vector<double> permuted_stats;
};

namespace detail {

// Upper-triangle entries standardized by their mean and sample (m-1) deviation,
// stored as a full symmetric matrix so a permuted lookup stays O(1).
class StandardizedMatrix {
public:
    StandardizedMatrix(const DistanceMatrix& a, const char* name) : n_(a.size()), z_(n_ * n_, 0.0) {
        const auto upper = a.upper_triangle();
        const double m = static_cast<double>(upper.size());
        const double mean = std::accumulate(upper.begin(), upper.end(), 0.0) / m;
        double ss = 0.0;
        for (double x : upper) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / (m - 1.0));
        if (!(sd > 0.0)) throw NumericError(std::string("correlation undefined: ") + name + " has zero variance");
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) z_[i * n_ + j] = z_[j * n_ + i] = (a(i, j) - mean) / sd;
    }

    double operator()(std::size_t i, std::size_t j) const { return z_[i * n_ + j]; }

    /// sum_{i<j} this(i,j) * other(perm[i], perm[j]) / (m-1)
    double correlate(const StandardizedMatrix& other, std::span<const std::size_t> perm) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double* zi = z_.data() + i * n_;
            const double* oi = other.z_.data() + perm[i] * n_;
            for (std::size_t j = i + 1; j < n_; ++j) acc += zi[j] * oi[perm[j]];
        }
        const double m = static_cast<double>(n_ * (n_ - 1) / 2);
        return acc / (m - 1.0);
    }

private:
    std::size_t n_;
    std::vector<double> z_;
};

inline void check_mantel_inputs(const DistanceMatrix& a, const DistanceMatrix& b) {
    if (a.size() != b.size()) {
        throw ValidationError("Mantel test needs matrices of equal size, got " + std::to_string(a.size()) + " and " +
                              std::to_string(b.size()));
    }
    if (a.size() < 3) throw NumericError("Mantel test needs n >= 3, got n = " + std::to_string(a.size()));
}

} // namespace detail

/**
 * Normalized Mantel statistic: Pearson correlation of the upper-triangle
 * entries, r = 1/(m-1) * sum z(x_ij) z(y_ij) with m = n(n-1)/2. Note that
 * 1/(m-1) = 2/((n-2)(n+1)).
 */
inline double mantel_r(const DistanceMatrix& a, const DistanceMatrix& b) {
    detail::check_mantel_inputs(a, b);
    const detail::StandardizedMatrix za(a, "first matrix"), zb(b, "second matrix");
    std::vector<std::size_t> identity(a.size());
    std::iota(identity.begin(), identity.end(), 0);
    return za.correlate(zb, identity);
}

/**
 * One-tailed (greater) permutation test. Replicate i shuffles the rows and
 * columns of `b` with a generator seeded by derive_seed(seed, i), so the
 * result depends only on the arguments. p = (1 + #{r_perm >= r}) / (1 + permutations).
 */
inline MantelResult mantel_test(const DistanceMatrix& a, const DistanceMatrix& b, int permutations, std::uint64_t seed) {
    detail::check_mantel_inputs(a, b);
    if (permutations < 1) throw ValidationError("permutations must be >= 1");
    const detail::StandardizedMatrix za(a, "first matrix"), zb(b, "second matrix");
    const std::size_t n = a.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    MantelResult out;
    out.r = za.correlate(zb, perm);
    out.permutations = permutations;
    out.seed = seed;
    out.permuted_stats.reserve(static_cast<std::size_t>(permutations));
    // Absorbs summation-order noise when a permutation reproduces the observed pairing.
    constexpr double tie_tolerance = 1e-12;
    int at_least = 0;
    for (int i = 0; i < permutations; ++i) {
        std::iota(perm.begin(), perm.end(), 0);
        Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        shuffle(std::span<std::size_t>(perm), rng);
        const double r = za.correlate(zb, perm);
        out.permuted_stats.push_back(r);
        if (r >= out.r - tie_tolerance) ++at_least;
    }
    out.p_value = (1.0 + at_least) / (1.0 + permutations);
    return out;
}

inline nlohmann::ordered_json mantel_to_json(const MantelResult& m) {
    nlohmann::ordered_json j;
    j["r"] = m.r;
    j["p"] = m.p_value;
    j["permutations"] = m.permutations;
    j["seed"] = m.seed;
    return j;
}

} // namespace phclust
