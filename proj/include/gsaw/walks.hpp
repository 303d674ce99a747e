#ifndef GSAW_WALKS_HPP
#define GSAW_WALKS_HPP

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gsaw/model.hpp"

namespace gsaw {

/// Subset of the site set as a bitmask (M <= 64).
class SiteSet {
public:
    SiteSet() = default;
    SiteSet(std::initializer_list<Site> sites) {
        for (Site s : sites) insert(s);
    }
    static SiteSet from_mask(std::uint64_t mask) {
        SiteSet s;
        s.mask_ = mask;
        return s;
    }
    static SiteSet all(std::size_t m) { return from_mask(m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1); }

    void insert(Site s) { mask_ |= std::uint64_t{1} << s; }
    void erase(Site s) { mask_ &= ~(std::uint64_t{1} << s); }
    bool contains(Site s) const { return (mask_ >> s) & 1U; }
    bool empty() const { return mask_ == 0; }
    std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
    std::uint64_t mask() const { return mask_; }
    std::vector<Site> sites() const;

    SiteSet operator-(SiteSet o) const { return from_mask(mask_ & ~o.mask_); }
    SiteSet operator|(SiteSet o) const { return from_mask(mask_ | o.mask_); }
    SiteSet operator&(SiteSet o) const { return from_mask(mask_ & o.mask_); }
    friend bool operator==(SiteSet a, SiteSet b) { return a.mask_ == b.mask_; }

private:
    std::uint64_t mask_ = 0;
};

using Edge = std::pair<Site, Site>;

/// Vertex sequence x_0, ..., x_n; |w| = n.
struct Walk {
    std::vector<Site> vertices;

    std::size_t length() const { return vertices.size() - 1; }
    std::vector<Edge> edges() const;
    /// Number of visits n_x(w) to each site of a model of size m.
    std::vector<std::size_t> visits(std::size_t m) const;
    SiteSet vertex_set() const;

    friend auto operator<=>(const Walk&, const Walk&) = default;
};

/// A walk of length >= 1 whose interior vertices are distinct and avoid both endpoints.
struct SelfAvoidingWalk : Walk {
    /// Throws PreconditionError when the sequence violates the invariant.
    explicit SelfAvoidingWalk(std::vector<Site> v);
    static bool satisfies_invariant(std::span<const Site> v);
};

/// Unrooted directed cycle of distinct vertices, stored rotated so that the minimal
/// vertex comes first. A single vertex is the self-loop x -> x.
class Loop {
public:
    /// Accepts any rotation; throws PreconditionError on repeated vertices.
    explicit Loop(std::vector<Site> cyclic);

    const std::vector<Site>& vertices() const { return vertices_; }
    std::size_t length() const { return vertices_.size(); }
    bool is_self_loop() const { return vertices_.size() == 1; }
    std::vector<Edge> edges() const;

    friend auto operator<=>(const Loop&, const Loop&) = default;

private:
    std::vector<Site> vertices_;
};

/// Pairwise vertex-disjoint loops, ordered by their minimal vertex.
class LoopConfig {
public:
    LoopConfig() = default;
    explicit LoopConfig(std::vector<Loop> loops);

    const std::vector<Loop>& loops() const { return loops_; }
    bool empty() const { return loops_.empty(); }
    SiteSet vertex_set() const;
    std::size_t total_length() const;
    bool has_self_loop() const;

    friend bool operator==(const LoopConfig&, const LoopConfig&) = default;
    /// Canonical order: covered vertex count, then loops lexicographically.
    friend bool operator<(const LoopConfig& a, const LoopConfig& b);

private:
    std::vector<Loop> loops_;
};

/// All vertex sequences from a to b with length <= maxlen over m sites, ordered by
/// length and then lexicographically. Zero-weight steps are included.
std::vector<Walk> enumerate_walks_upto(std::size_t m, Site a, Site b, std::size_t maxlen);

/// S_{a,b}(X): self-avoiding walks from a to b with interior drawn from X, ordered by
/// length then lexicographically. The one-step walk (a, b) is always present, also for a == b.
std::vector<SelfAvoidingWalk> enumerate_saws(Site a, Site b, SiteSet interior);

/// Every collection of vertex-disjoint loops supported in X, including the empty one.
/// Equivalently one configuration per permutation of each subset of X.
std::vector<LoopConfig> enumerate_loop_configs(SiteSet x);

/// J^w prod_i d_{w(i)}^{-1}.
ExactComplex srw_walk_weight(const CouplingModel& model, const Walk& w);

template <class T>
T edge_weight(const Matrix<T>& c, std::span<const Edge> edges) {
    T w(1);
    for (const auto& [x, y] : edges) w *= c(x, y);
    return w;
}

template <class T>
struct SeriesResult {
    T partial;
    /// Guaranteed bound on |partial - (D-J)^{-1}_{ab}|.
    double tail_bound;
    /// The same bound as an exact rational when the model is real.
    std::optional<Rational> tail_bound_exact;
};

/// Partial sum of the simple random walk two-point function over |w| <= maxlen,
/// computed as sum_{n<=maxlen} (D^{-1} (J D^{-1})^n)_{ab}. Tail bound is
/// max_x |d_x|^{-1} rho^{maxlen+1} / (1 - rho). Rejects rho >= 1 with PreconditionError.
template <class T>
SeriesResult<T> srw_two_point_series(const CouplingModel& model, Site a, Site b, std::size_t maxlen);

/// G^saw_{a,b} = sum over S_{a,b} of C^w.
template <class T>
T saw_two_point(const Covariance<T>& c, Site a, Site b) {
    const std::size_t m = c.size();
    SiteSet interior = SiteSet::all(m);
    interior.erase(a);
    interior.erase(b);
    T sum(0);
    for (const auto& w : enumerate_saws(a, b, interior)) sum += edge_weight(c.entries(), w.edges());
    return sum;
}

/// sum over loop configurations in X of C^Gamma; self-loops excluded when wick_ordered.
template <class T>
T loop_config_sum(const Matrix<T>& c, SiteSet x, bool wick_ordered) {
    T sum(0);
    for (const auto& cfg : enumerate_loop_configs(x)) {
        if (wick_ordered && cfg.has_self_loop()) continue;
        T w(1);
        for (const auto& loop : cfg.loops()) w *= edge_weight(c, loop.edges());
        sum += w;
    }
    return sum;
}

/// G^loop_{a,b}: self-avoiding walks in a background of disjoint loops on the
/// complement of the walk. With wick_ordered the configurations exclude self-loops.
template <class T>
T loop_two_point(const Covariance<T>& c, Site a, Site b, bool wick_ordered) {
    const std::size_t m = c.size();
    SiteSet interior = SiteSet::all(m);
    interior.erase(a);
    interior.erase(b);
    std::map<std::uint64_t, T> background;
    T sum(0);
    for (const auto& w : enumerate_saws(a, b, interior)) {
        SiteSet rest = SiteSet::all(m) - w.vertex_set();
        auto it = background.find(rest.mask());
        if (it == background.end()) it = background.emplace(rest.mask(), loop_config_sum(c.entries(), rest, wick_ordered)).first;
        sum += edge_weight(c.entries(), w.edges()) * it->second;
    }
    return sum;
}

extern template SeriesResult<ExactComplex> srw_two_point_series(const CouplingModel&, Site, Site, std::size_t);
extern template SeriesResult<FloatComplex> srw_two_point_series(const CouplingModel&, Site, Site, std::size_t);

}  // namespace gsaw

#endif
