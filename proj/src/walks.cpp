#include "gsaw/walks.hpp"

#include <algorithm>
#include <cmath>

namespace gsaw {

std::vector<Site> SiteSet::sites() const {
    std::vector<Site> out;
    for (std::uint64_t m = mask_; m != 0; m &= m - 1) out.push_back(static_cast<Site>(std::countr_zero(m)));
    return out;
}

std::vector<Edge> Walk::edges() const {
    std::vector<Edge> e;
    for (std::size_t i = 1; i < vertices.size(); ++i) e.emplace_back(vertices[i - 1], vertices[i]);
    return e;
}

std::vector<std::size_t> Walk::visits(std::size_t m) const {
    std::vector<std::size_t> n(m, 0);
    for (Site x : vertices) ++n[x];
    return n;
}

SiteSet Walk::vertex_set() const {
    SiteSet s;
    for (Site x : vertices) s.insert(x);
    return s;
}

bool SelfAvoidingWalk::satisfies_invariant(std::span<const Site> v) {
    if (v.size() < 2) return false;
    SiteSet seen{v.front(), v.back()};
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (seen.contains(v[i])) return false;
        seen.insert(v[i]);
    }
    return true;
}

SelfAvoidingWalk::SelfAvoidingWalk(std::vector<Site> v) : Walk{std::move(v)} {
    if (!satisfies_invariant(vertices)) throw PreconditionError("sequence is not a self-avoiding walk");
}

Loop::Loop(std::vector<Site> cyclic) : vertices_(std::move(cyclic)) {
    if (vertices_.empty()) throw PreconditionError("loop needs at least one vertex");
    std::vector<Site> sorted = vertices_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw PreconditionError("loop vertices must be distinct");
    std::rotate(vertices_.begin(), std::min_element(vertices_.begin(), vertices_.end()), vertices_.end());
}

std::vector<Edge> Loop::edges() const {
    std::vector<Edge> e;
    for (std::size_t i = 0; i < vertices_.size(); ++i) e.emplace_back(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
    return e;
}

LoopConfig::LoopConfig(std::vector<Loop> loops) : loops_(std::move(loops)) {
    std::sort(loops_.begin(), loops_.end(), [](const Loop& a, const Loop& b) { return a.vertices()[0] < b.vertices()[0]; });
    SiteSet seen;
    for (const auto& l : loops_)
        for (Site v : l.vertices()) {
            if (seen.contains(v)) throw PreconditionError("loops in a configuration must be vertex-disjoint");
            seen.insert(v);
        }
}

SiteSet LoopConfig::vertex_set() const {
    SiteSet s;
    for (const auto& l : loops_)
        for (Site v : l.vertices()) s.insert(v);
    return s;
}

std::size_t LoopConfig::total_length() const {
    std::size_t n = 0;
    for (const auto& l : loops_) n += l.length();
    return n;
}

bool LoopConfig::has_self_loop() const {
    return std::any_of(loops_.begin(), loops_.end(), [](const Loop& l) { return l.is_self_loop(); });
}

bool operator<(const LoopConfig& a, const LoopConfig& b) {
    if (a.total_length() != b.total_length()) return a.total_length() < b.total_length();
    return a.loops_ < b.loops_;
}

std::vector<Walk> enumerate_walks_upto(std::size_t m, Site a, Site b, std::size_t maxlen) {
    std::vector<Walk> out;
    if (a == b) out.push_back(Walk{{a}});
    for (std::size_t n = 1; n <= maxlen; ++n) {
        // Interior x_1..x_{n-1} runs over all m^(n-1) sequences in lexicographic order.
        std::vector<Site> interior(n - 1, 0);
        while (true) {
            Walk w;
            w.vertices.reserve(n + 1);
            w.vertices.push_back(a);
            w.vertices.insert(w.vertices.end(), interior.begin(), interior.end());
            w.vertices.push_back(b);
            out.push_back(std::move(w));
            std::size_t k = interior.size();
            while (k > 0 && interior[k - 1] + 1 == m) interior[--k] = 0;
            if (k == 0) break;
            ++interior[k - 1];
        }
    }
    return out;
}

namespace {

void extend_saws(Site b, SiteSet available, std::vector<Site>& prefix, std::vector<SelfAvoidingWalk>& out) {
    prefix.push_back(b);
    out.emplace_back(prefix);
    prefix.pop_back();
    for (Site x : available.sites()) {
        prefix.push_back(x);
        SiteSet rest = available;
        rest.erase(x);
        extend_saws(b, rest, prefix, out);
        prefix.pop_back();
    }
}

void extend_loop_configs(SiteSet remaining, std::vector<Loop>& chosen, std::vector<LoopConfig>& out);

// Every loop starting with `cycle` (its minimal vertex first), drawing its other vertices from `pool`.
void extend_loop(std::vector<Site>& cycle, SiteSet pool, std::vector<Loop>& chosen, std::vector<LoopConfig>& out) {
    chosen.emplace_back(cycle);
    extend_loop_configs(pool, chosen, out);
    chosen.pop_back();
    for (Site x : pool.sites()) {
        cycle.push_back(x);
        SiteSet rest = pool;
        rest.erase(x);
        extend_loop(cycle, rest, chosen, out);
        cycle.pop_back();
    }
}

void extend_loop_configs(SiteSet remaining, std::vector<Loop>& chosen, std::vector<LoopConfig>& out) {
    if (remaining.empty()) {
        out.emplace_back(chosen);
        return;
    }
    Site v = remaining.sites().front();
    SiteSet rest = remaining;
    rest.erase(v);
    // v left uncovered.
    extend_loop_configs(rest, chosen, out);
    // v is the minimal vertex of a loop.
    std::vector<Site> cycle{v};
    extend_loop(cycle, rest, chosen, out);
}

}  // namespace

std::vector<SelfAvoidingWalk> enumerate_saws(Site a, Site b, SiteSet interior) {
    interior.erase(a);
    interior.erase(b);
    std::vector<SelfAvoidingWalk> out;
    std::vector<Site> prefix{a};
    extend_saws(b, interior, prefix, out);
    std::stable_sort(out.begin(), out.end(), [](const Walk& x, const Walk& y) { return x.length() < y.length(); });
    return out;
}

std::vector<LoopConfig> enumerate_loop_configs(SiteSet x) {
    std::vector<LoopConfig> out;
    std::vector<Loop> chosen;
    extend_loop_configs(x, chosen, out);
    std::sort(out.begin(), out.end());
    return out;
}

ExactComplex srw_walk_weight(const CouplingModel& model, const Walk& w) {
    ExactComplex weight(1);
    for (const auto& [x, y] : w.edges()) weight *= model.offdiag()(x, y);
    for (Site x : w.vertices) weight /= model.diag()[x];
    return weight;
}

template <class T>
SeriesResult<T> srw_two_point_series(const CouplingModel& model, Site a, Site b, std::size_t maxlen) {
    const std::size_t m = model.size();
    ValidationReport report = validate_model(model);
    if (!report.passed(hypothesis::dominance))
        throw PreconditionError("walk series needs diagonal dominance (rho = " + std::to_string(report.rho) + ")");

    std::vector<T> dinv(m);
    for (std::size_t x = 0; x < m; ++x) dinv[x] = scalar_cast<T>(ExactComplex(1) / model.diag()[x]);
    Matrix<T> j = model.offdiag().cast<T>();

    // row = e_a^T D^{-1} (J D^{-1})^n
    std::vector<T> row(m, T(0));
    row[a] = dinv[a];
    T partial = row[b];
    std::vector<T> next(m);
    for (std::size_t n = 1; n <= maxlen; ++n) {
        std::fill(next.begin(), next.end(), T(0));
        for (std::size_t x = 0; x < m; ++x) {
            if (ScalarTraits<T>::exact && ScalarTraits<T>::is_zero(row[x])) continue;
            for (std::size_t y = 0; y < m; ++y) next[y] += row[x] * j(x, y);
        }
        for (std::size_t y = 0; y < m; ++y) next[y] *= dinv[y];
        row.swap(next);
        partial += row[b];
    }

    double max_dinv = 0.0;
    for (const auto& d : model.diag()) max_dinv = std::max(max_dinv, 1.0 / d.abs());
    SeriesResult<T> result{partial, max_dinv * std::pow(report.rho, static_cast<double>(maxlen + 1)) / (1.0 - report.rho),
                           std::nullopt};
    if (report.rho_exact) {
        Rational max_exact(0);
        for (const auto& d : model.diag()) {
            Rational inv = Rational(1) / Rational(abs(d.real()));
            if (inv > max_exact) max_exact = inv;
        }
        Rational power(1);
        for (std::size_t n = 0; n <= maxlen; ++n) power *= *report.rho_exact;
        result.tail_bound_exact = max_exact * power / (Rational(1) - *report.rho_exact);
        result.tail_bound = result.tail_bound_exact->get_d();
    }
    return result;
}

template SeriesResult<ExactComplex> srw_two_point_series(const CouplingModel&, Site, Site, std::size_t);
template SeriesResult<FloatComplex> srw_two_point_series(const CouplingModel&, Site, Site, std::size_t);

}  // namespace gsaw
