#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <iterator>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "filtration.hpp"
#include "geometry.hpp"

namespace phclust {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A Z/2 chain as sorted simplex indices into a FilteredComplex.
using Column = std::vector<std::size_t>;

/// target += source over Z/2.
inline void add_column(Column& target, const Column& source) {
    Column out;
    out.reserve(target.size() + source.size());
    std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(), std::back_inserter(out));
    target.swap(out);
}

struct PersistencePair {
    int dimension = 0;
    double birth = 0.0;
    double death = kInfinity;
    Simplex birth_simplex;
    std::optional<Simplex> death_simplex;
    /// Z/2 cycle witnessing the class, as k-simplices in reduction order.
    std::vector<Simplex> representative;
    /// Point label of the birth vertex for dimension 0; empty otherwise.
    std::string label;

    std::size_t birth_index = 0;
    std::optional<std::size_t> death_index;
    Column representative_indices;

    bool infinite() const noexcept { return std::isinf(death); }
    bool zero_length() const noexcept { return death == birth; }
    double persistence() const noexcept { return death - birth; }
};

/// Sort key for barcodes: (dimension, birth, death), then birth simplex position.
inline bool bar_less(const PersistencePair& a, const PersistencePair& b) {
    return std::tie(a.dimension, a.birth, a.death, a.birth_index) <
           std::tie(b.dimension, b.birth, b.death, b.birth_index);
}

struct Barcode {
    std::vector<PersistencePair> pairs;
    std::size_t complex_size = 0;
    int max_dimension = 0;

    std::vector<PersistencePair> in_dimension(int k) const {
        std::vector<PersistencePair> out;
        std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out),
                     [k](const PersistencePair& p) { return p.dimension == k; });
        return out;
    }

    /// Bars of dimension <= k. The top dimension of a truncated complex carries
    /// classes that no higher simplex can ever kill, so exports usually drop it.
    Barcode up_to_dimension(int k) const {
        Barcode out{{}, complex_size, max_dimension};
        std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out.pairs),
                     [k](const PersistencePair& p) { return p.dimension <= k; });
        return out;
    }

    /// Highest dimension whose bars agree with the untruncated filtration.
    int complete_dimension() const noexcept { return std::max(0, max_dimension - 1); }
};

/**
 * @brief Fully reduced boundary matrix of a filtered complex over Z/2.
 *
 * Nonzero columns have pairwise distinct lowest rows. Columns are indexed by
 * simplex position, so column j carries the filtration value of simplex j.
 */
class ReducedBoundary {
public:
    ReducedBoundary() = default;
    ReducedBoundary(std::shared_ptr<const FilteredComplex> complex, std::vector<Column> columns)
        : complex_(std::move(complex)), columns_(std::move(columns)), column_with_low_(columns_.size(), npos) {
        for (std::size_t j = 0; j < columns_.size(); ++j) {
            if (columns_[j].empty()) continue;
            auto& slot = column_with_low_[columns_[j].back()];
            if (slot != npos) throw ValidationError("reduced boundary has two columns with the same low");
            slot = j;
        }
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    const FilteredComplex& complex() const { return *complex_; }
    std::size_t size() const noexcept { return columns_.size(); }
    const Column& column(std::size_t j) const { return columns_[j]; }
    double value(std::size_t j) const { return (*complex_)[j].value; }

    std::optional<std::size_t> column_with_low(std::size_t row) const {
        if (column_with_low_[row] == npos) return std::nullopt;
        return column_with_low_[row];
    }

    /// Converts simplices to a chain. Repeated simplices cancel (Z/2).
    Column to_chain(const std::vector<Simplex>& simplices) const {
        Column out;
        for (const auto& s : simplices) {
            auto idx = complex_->index_of(s);
            if (!idx) throw ValidationError("simplex is not part of the complex");
            out.push_back(*idx);
        }
        std::sort(out.begin(), out.end());
        Column dedup;
        for (std::size_t i = 0; i < out.size();) {
            std::size_t j = i;
            while (j < out.size() && out[j] == out[i]) ++j;
            if ((j - i) % 2 == 1) dedup.push_back(out[i]);
            i = j;
        }
        return dedup;
    }

    /// Throws unless the chain is a cycle of a single dimension.
    void require_cycle(const Column& chain) const {
        if (chain.empty()) return;
        const int k = (*complex_)[chain.front()].simplex.dimension();
        Column bd;
        for (std::size_t i : chain) {
            if ((*complex_)[i].simplex.dimension() != k) throw ValidationError("chain mixes simplex dimensions");
            if (k > 0) add_column(bd, complex_->boundary(i));
        }
        if (!bd.empty()) throw ValidationError("chain is not a cycle: its boundary is nonempty");
    }

    /**
     * Least filtration value at which the cycle is a boundary: cancel its
     * lowest simplex with the reduced column owning that low until nothing is
     * left, tracking the largest column value used. +inf when a low has no
     * owner. The chain is taken as already validated.
     */
    double boundary_level(Column z) const {
        double level = 0.0;
        while (!z.empty()) {
            const std::size_t owner = column_with_low_[z.back()];
            if (owner == npos) return kInfinity;
            level = std::max(level, value(owner));
            add_column(z, columns_[owner]);
        }
        return level;
    }

private:
    std::shared_ptr<const FilteredComplex> complex_;
    std::vector<Column> columns_;
    std::vector<std::size_t> column_with_low_;
};

struct PersistenceResult {
    Barcode barcode;
    ReducedBoundary reduced;
};

/**
 * Standard left-to-right column reduction over Z/2, run per dimension from the
 * top down so that columns of paired births can be cleared (twist). Clearing
 * leaves every pair and every stored column identical to the plain algorithm.
 *
 * Finite bars take the reduced death column as representative; infinite bars
 * take the accumulated cycle of their birth column.
 */
inline PersistenceResult reduce(const FilteredComplex& input) {
    input.validate();
    auto complex = std::make_shared<const FilteredComplex>(input);
    const std::size_t total = complex->size();
    const int top = complex->max_dimension();

    std::vector<std::vector<std::size_t>> by_dim(static_cast<std::size_t>(top) + 1);
    for (std::size_t j = 0; j < total; ++j) by_dim[(*complex)[j].simplex.dimension()].push_back(j);

    std::vector<Column> reduced(total);
    std::vector<std::size_t> low_owner(total, ReducedBoundary::npos);
    std::vector<bool> cleared(total, false);
    std::vector<Column> cycles(total); // accumulated cycles of zero columns

    for (int d = top; d >= 1; --d) {
        std::vector<Column> combos(total); // V columns of this dimension's pivots
        for (std::size_t j : by_dim[d]) {
            if (cleared[j]) continue;
            Column r = complex->boundary(j);
            Column v{j};
            while (!r.empty()) {
                const std::size_t p = low_owner[r.back()];
                if (p == ReducedBoundary::npos) break;
                add_column(r, reduced[p]);
                add_column(v, combos[p]);
            }
            if (r.empty()) {
                cycles[j] = std::move(v);
            } else {
                low_owner[r.back()] = j;
                cleared[r.back()] = true;
                reduced[j] = std::move(r);
                combos[j] = std::move(v);
            }
        }
    }
    for (std::size_t j : by_dim[0])
        if (!cleared[j]) cycles[j] = Column{j};

    const auto to_simplices = [&](const Column& c) {
        std::vector<Simplex> out;
        out.reserve(c.size());
        for (std::size_t i : c) out.push_back((*complex)[i].simplex);
        return out;
    };

    Barcode barcode{{}, total, top};
    for (std::size_t j = 0; j < total; ++j) {
        const auto& s = (*complex)[j];
        PersistencePair pair;
        if (!reduced[j].empty()) {
            const std::size_t birth = reduced[j].back();
            pair.birth_index = birth;
            pair.death_index = j;
            pair.death = s.value;
            pair.death_simplex = s.simplex;
            pair.representative_indices = reduced[j];
        } else if (!cleared[j] && !cycles[j].empty()) {
            pair.birth_index = j;
            pair.representative_indices = std::move(cycles[j]);
        } else {
            continue;
        }
        const auto& b = (*complex)[pair.birth_index];
        pair.dimension = b.simplex.dimension();
        pair.birth = b.value;
        pair.birth_simplex = b.simplex;
        pair.representative = to_simplices(pair.representative_indices);
        if (pair.dimension == 0) pair.label = complex->labels()[b.simplex.vertices()[0]];
        barcode.pairs.push_back(std::move(pair));
    }
    std::sort(barcode.pairs.begin(), barcode.pairs.end(), bar_less);
    return {std::move(barcode), ReducedBoundary(complex, std::move(reduced))};
}

/// Bars alive at eps (birth <= eps < death), per dimension 0..max_dimension.
inline std::vector<int> betti_numbers(const Barcode& barcode, double eps) {
    std::vector<int> betti(static_cast<std::size_t>(barcode.max_dimension) + 1, 0);
    for (const auto& p : barcode.pairs) {
        if (p.birth <= eps && eps < p.death) ++betti[p.dimension];
    }
    return betti;
}

/// Least filtration value at which `cycle` becomes a boundary; throws if it is not a cycle.
inline double boundary_membership(const std::vector<Simplex>& cycle, const ReducedBoundary& reduced) {
    Column z = reduced.to_chain(cycle);
    reduced.require_cycle(z);
    return reduced.boundary_level(std::move(z));
}

namespace detail {

// Dimension-0 classes are vertex classes: in unreduced H0 they never vanish,
// they only become equal. Higher classes vanish at their death.
inline Column class_cycle(const PersistencePair& p) {
    return p.dimension == 0 ? Column{p.birth_index} : p.representative_indices;
}

inline double vanishing_level(const PersistencePair& p) { return p.dimension == 0 ? kInfinity : p.death; }

} // namespace detail

/**
 * Homological cophenetic distance between two bars of the same dimension:
 * with eps the later birth, the least eta - eps >= 0 at which the images of
 * both classes are linearly dependent over Z/2, i.e. one of them is zero or
 * they coincide. Bars that never coexist are at distance 0.
 */
inline double hcd(const PersistencePair& alpha, const PersistencePair& beta, const ReducedBoundary& reduced) {
    if (alpha.dimension != beta.dimension) {
        throw ValidationError("hcd needs bars of equal dimension, got " + std::to_string(alpha.dimension) + " and " +
                              std::to_string(beta.dimension));
    }
    const double eps = std::max(alpha.birth, beta.birth);
    const double vanish = std::min(detail::vanishing_level(alpha), detail::vanishing_level(beta));
    if (vanish <= eps) return 0.0;
    Column sum = detail::class_cycle(alpha);
    add_column(sum, detail::class_cycle(beta));
    const double merged = std::min(vanish, reduced.boundary_level(std::move(sum)));
    return std::max(0.0, merged - eps);
}

/**
 * D_k over all dimension-k bars. For k = 0 rows are the points in vertex order
 * with their labels; for k >= 1 rows are the positive-length bars in barcode
 * order, labelled "k:i".
 */
inline CopheneticMatrix hcd_matrix(const Barcode& barcode, const ReducedBoundary& reduced, int k) {
    if (k < 0 || (k > 0 && k > barcode.max_dimension - 1)) {
        throw ValidationError("hcd_matrix: dimension " + std::to_string(k) + " needs a complex of dimension >= " +
                              std::to_string(k + 1) + ", have " + std::to_string(barcode.max_dimension));
    }
    std::vector<PersistencePair> bars;
    std::vector<std::string> labels;
    if (k == 0) {
        bars = barcode.in_dimension(0);
        std::sort(bars.begin(), bars.end(),
                  [](const auto& a, const auto& b) { return a.birth_simplex < b.birth_simplex; });
        for (const auto& b : bars) labels.push_back(b.label);
    } else {
        for (const auto& b : barcode.in_dimension(k)) {
            if (b.zero_length()) continue;
            labels.push_back(std::to_string(k) + ":" + std::to_string(bars.size()));
            bars.push_back(b);
        }
    }
    auto m = CopheneticMatrix::zeros(labels);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        for (std::size_t j = i + 1; j < bars.size(); ++j) {
            const double v = hcd(bars[i], bars[j], reduced);
            if (!std::isfinite(v)) {
                throw NumericError("D_" + std::to_string(k) + " between " + labels[i] + " and " + labels[j] +
                                   " is infinite; build the complex with max_eps=auto and max_dim >= k+1");
            }
            m.set(i, j, v);
        }
    }
    return m;
}

/**
 * Union-find sweep over edges in ascending order: when two components first
 * meet at value eps, every pair straddling them gets eps. Equal to
 * hcd_matrix(..., 0) on the full Rips filtration.
 */
inline CopheneticMatrix h0_cophenetic(const DistanceMatrix& dist) {
    const std::size_t n = dist.size();
    struct Edge {
        double value;
        std::size_t i, j;
    };
    std::vector<Edge> edges;
    edges.reserve(n * (n - (n > 0)) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({dist(i, j), i, j});
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.value, a.i, a.j) < std::tie(b.value, b.i, b.j); });

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};
    const auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    auto m = CopheneticMatrix::zeros(dist.labels());
    std::size_t merges = 0;
    for (const auto& e : edges) {
        if (merges + 1 >= n) break;
        std::size_t a = find(e.i), b = find(e.j);
        if (a == b) continue;
        if (members[a].size() < members[b].size()) std::swap(a, b);
        for (std::size_t x : members[a])
            for (std::size_t y : members[b]) m.set(x, y, e.value);
        members[a].insert(members[a].end(), members[b].begin(), members[b].end());
        members[b].clear();
        parent[b] = a;
        ++merges;
    }
    return m;
}

// ---- JSON ---------------------------------------------------------------

/// {"complex_size": n, "bars": [{"dim", "birth", "death" (null if infinite), "representative", "label"?}]}
inline nlohmann::ordered_json barcode_to_json(const Barcode& barcode) {
    std::vector<const PersistencePair*> sorted;
    for (const auto& p : barcode.pairs) sorted.push_back(&p);
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        return std::tie(a->dimension, a->birth, a->death) < std::tie(b->dimension, b->birth, b->death);
    });
    nlohmann::ordered_json bars = nlohmann::ordered_json::array();
    for (const auto* p : sorted) {
        nlohmann::ordered_json bar;
        bar["dim"] = p->dimension;
        bar["birth"] = p->birth;
        bar["death"] = p->infinite() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(p->death);
        auto rep = nlohmann::ordered_json::array();
        for (const auto& s : p->representative) rep.push_back(s.vertices());
        bar["representative"] = std::move(rep);
        if (!p->label.empty()) bar["label"] = p->label;
        bars.push_back(std::move(bar));
    }
    nlohmann::ordered_json out;
    out["complex_size"] = barcode.complex_size;
    out["bars"] = std::move(bars);
    return out;
}

inline Barcode barcode_from_json(const nlohmann::json& j) {
    try {
        Barcode b;
        b.complex_size = j.at("complex_size").get<std::size_t>();
        for (const auto& bar : j.at("bars")) {
            PersistencePair p;
            p.dimension = bar.at("dim").get<int>();
            p.birth = bar.at("birth").get<double>();
            p.death = bar.at("death").is_null() ? kInfinity : bar.at("death").get<double>();
            if (p.birth > p.death) throw ValidationError("bar with birth after death");
            if (bar.contains("representative")) {
                for (const auto& s : bar.at("representative")) p.representative.emplace_back(s.get<std::vector<Vertex>>());
            }
            if (bar.contains("label")) p.label = bar.at("label").get<std::string>();
            // A dimension-0 representative is {v} or {u, v} with v the birth vertex.
            if (p.dimension == 0 && !p.representative.empty()) {
                Vertex v = 0;
                for (const auto& s : p.representative) v = std::max(v, s.vertices().back());
                p.birth_simplex = Simplex{v};
            }
            b.max_dimension = std::max(b.max_dimension, p.dimension);
            b.pairs.push_back(std::move(p));
        }
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed barcode JSON: ") + e.what());
    }
}

inline Barcode load_barcode_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed barcode JSON: ") + e.what());
    }
    return barcode_from_json(j);
}

} // namespace phclust
