#include "gsaw/gaussian.hpp"

namespace gsaw {

template ExactComplex mixed_expectation(const Covariance<ExactComplex>&, const Form&);
template FloatComplex mixed_expectation(const Covariance<FloatComplex>&, const Form&);

namespace {

ExactComplex wick_recurse(const ExactMatrix& c, std::span<const Site> bars, std::vector<Site>& plain,
                          std::vector<bool>& used) {
    if (bars.empty()) return ExactComplex(1);
    ExactComplex sum(0);
    for (std::size_t k = 0; k < plain.size(); ++k) {
        if (used[k]) continue;
        const ExactComplex& w = c(bars.front(), plain[k]);
        if (w.is_zero()) continue;
        used[k] = true;
        sum += w * wick_recurse(c, bars.subspan(1), plain, used);
        used[k] = false;
    }
    return sum;
}

}  // namespace

ExactComplex wick_pairing(const ExactMatrix& c, std::span<const Site> phibar_sites, std::span<const Site> phi_sites) {
    if (phibar_sites.size() != phi_sites.size()) return ExactComplex(0);
    std::vector<Site> plain(phi_sites.begin(), phi_sites.end());
    std::vector<bool> used(plain.size(), false);
    return wick_recurse(c, phibar_sites, plain, used);
}

MixedOracle::MixedOracle(const ExactMatrix& a) : m_(a.rows()) {
    if (m_ > max_sites)
        throw PreconditionError("brute-force oracle supports at most " + std::to_string(max_sites) + " sites");
    cov_ = inverse(a);
    expansion_ = exp_action_expansion(a).total();
    kappa_ = expansion_.coefficient(FermionWord::top(m_)).constant_term();
    if (kappa_.is_zero()) throw SingularMatrixError("top-word calibration vanished");
}

ExactComplex MixedOracle::top_expectation(const Form& f) const {
    const FermionWord top = FermionWord::top(m_);
    Polynomial coef;
    // Only pairs of words that fill the top word contribute.
    for (const auto& [wf, pf] : f.terms()) {
        if ((wf.mask & ~top.mask) != 0) throw PreconditionError("form uses sites outside the model");
        FermionWord need{top.mask & ~wf.mask};
        auto pe = expansion_.coefficient(need);
        if (pe.is_zero()) continue;
        int s = wedge_sign(need, wf);
        Polynomial term = pe * pf;
        coef += s > 0 ? term : -term;
    }
    ExactComplex sum(0);
    std::vector<Site> bars, plain;
    for (const auto& [mono, c] : coef.terms()) {
        bars.clear();
        plain.clear();
        for (std::size_t var = 0; var < mono.size(); ++var)
            for (unsigned k = 0; k < mono[var]; ++k) (var % 2 == 0 ? plain : bars).push_back(var / 2);
        if (bars.size() != plain.size()) continue;
        sum += c * wick_pairing(cov_, bars, plain);
    }
    return sum;
}

ExactComplex MixedOracle::operator()(const Form& f) const { return top_expectation(f) / kappa_; }

ExactComplex mixed_expectation_oracle(const CouplingModel& model, const Form& f) { return MixedOracle(model)(f); }

ExactComplex gaussian_normalization(const ExactMatrix& a) {
    const std::size_t m = a.rows();
    ExactComplex top = exp_action_expansion(a).total().coefficient(FermionWord::top(m)).constant_term();
    if (m % 2 == 1) top = -top;
    return top / determinant(a);
}

int front_permutation_sign(std::span<const Site> idx, std::size_t n) {
    std::vector<std::size_t> perm(idx.begin(), idx.end());
    std::vector<bool> taken(n, false);
    for (Site i : idx) {
        if (i >= n || taken[i]) throw PreconditionError("index sequence must be duplicate-free and in range");
        taken[i] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!taken[i]) perm.push_back(i);
    return permutation_sign(perm);
}

CramerSides generalized_cramer_check(const ExactMatrix& a, std::span<const Site> rows, std::span<const Site> cols) {
    const std::size_t n = a.rows();
    if (rows.size() != cols.size()) throw PreconditionError("row and column sequences must have equal length");
    int eps = front_permutation_sign(rows, n) * front_permutation_sign(cols, n);
    ExactMatrix c = inverse(a);
    ExactComplex lhs = determinant(c.select(rows, cols));

    auto complement = [n](std::span<const Site> idx) {
        std::vector<Site> out;
        for (Site x = 0; x < n; ++x)
            if (std::find(idx.begin(), idx.end(), x) == idx.end()) out.push_back(x);
        return out;
    };
    ExactMatrix hat = a.select(complement(cols), complement(rows));
    ExactComplex minor = hat.rows() == 0 ? ExactComplex(1) : determinant_cofactor(hat);
    ExactComplex rhs = minor / determinant_cofactor(a);
    if (eps < 0) rhs = -rhs;
    return {lhs, rhs};
}

LoopLedger loop_cancellation_ledger(const Covariance<ExactComplex>& c, SiteSet x) {
    LoopLedger ledger{{}, ExactComplex(0)};
    for (const auto& cfg : enumerate_loop_configs(x)) {
        if (cfg.empty()) continue;
        LoopLedgerEntry e{cfg.vertex_set(), cfg, {}, ExactComplex(1), ExactComplex(1), ExactComplex(0)};
        for (const auto& loop : cfg.loops()) {
            e.cycle_weights.push_back(edge_weight(c.entries(), loop.edges()));
            e.boson_total *= e.cycle_weights.back();
            e.fermion_total *= -e.cycle_weights.back();
        }
        const std::size_t k = e.cycle_weights.size();
        for (std::uint32_t s = 0; s < (std::uint32_t{1} << k); ++s) {
            ExactComplex term(1);
            for (std::size_t i = 0; i < k; ++i) term *= (s >> i) & 1U ? -e.cycle_weights[i] : e.cycle_weights[i];
            e.assignment_sum += term;
        }
        ledger.entries.push_back(std::move(e));
    }

    const auto sites = x.sites();
    for (std::uint64_t s1 = 0; s1 < (std::uint64_t{1} << sites.size()); ++s1) {
        std::vector<Site> x1;
        for (std::size_t i = 0; i < sites.size(); ++i)
            if ((s1 >> i) & 1U) x1.push_back(sites[i]);
        ExactComplex boson = boson_moment(c.entries(), x1, x1);
        for (std::uint64_t s2 = 0; s2 < (std::uint64_t{1} << sites.size()); ++s2) {
            if (s1 & s2) continue;
            std::vector<Site> x2;
            for (std::size_t i = 0; i < sites.size(); ++i)
                if ((s2 >> i) & 1U) x2.push_back(sites[i]);
            ledger.expansion_total += boson * fermion_moment(c.entries(), FermionWord::pairs(x2));
        }
    }
    return ledger;
}

WsawTaylor wsaw_g_taylor(const CouplingModel& model, Site a, Site b, const ExactComplex& lambda, unsigned order) {
    if (order > max_taylor_order)
        throw PreconditionError("Taylor order " + std::to_string(order) + " exceeds " + std::to_string(max_taylor_order));
    const CouplingModel shifted = model.with_diagonal_shift(lambda);
    if (!validate_model(shifted).passed(hypothesis::dominance))
        throw PreconditionError("shifted model is not diagonally dominant");
    const std::size_t m = model.size();
    const auto cov = model_covariance<ExactComplex>(shifted);

    Polynomial sum_sq;
    for (Site x = 0; x < m; ++x) sum_sq += Polynomial::variable(x, 2);

    WsawTaylor out;
    Rational factorial(1);
    for (unsigned k = 0; k <= order; ++k) {
        if (k > 0) factorial *= static_cast<long>(k);
        const Rational sign = k % 2 == 0 ? Rational(1) : Rational(-1);

        // (sum_x L_x^2)^k = sum_{|n| = k} k!/n! prod L_x^{2 n_x}
        ExactComplex local(0);
        std::vector<unsigned> n(m, 0);
        auto visit = [&](auto&& self, Site x, unsigned left) -> void {
            if (x + 1 == m) {
                n[x] = left;
                MomentRequest req{a, b, {}};
                Rational inv_fact(1);
                for (Site y = 0; y < m; ++y) {
                    req.powers.push_back(2 * n[y]);
                    for (unsigned i = 2; i <= n[y]; ++i) inv_fact /= static_cast<long>(i);
                }
                local += local_time_moment_oracle(cov.entries(), req) * ExactComplex(inv_fact);
                return;
            }
            for (unsigned v = 0; v <= left; ++v) {
                n[x] = v;
                self(self, x + 1, left - v);
            }
        };
        visit(visit, 0, k);
        out.local_time_side.push_back(local * ExactComplex(sign));

        ExactComplex grassmann = tau_weighted_two_point(cov, sum_sq.pow(k), a, b);
        out.grassmann_side.push_back(grassmann * ExactComplex(sign / factorial));
    }
    return out;
}

}  // namespace gsaw
