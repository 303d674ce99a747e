#include "gsaw/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "gsaw/gaussian.hpp"
#include "gsaw/markov.hpp"
#include "gsaw/model_io.hpp"
#include "gsaw/sampling.hpp"
#include "gsaw/walks.hpp"

namespace gsaw::cli {

using nlohmann::json;

json IdentityResult::to_json() const {
    json j{{"name", name}, {"lhs", lhs}, {"rhs", rhs}, {"status", status}};
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

json SuiteSection::to_json() const {
    json ids = json::array();
    for (const auto& r : identities) ids.push_back(r.to_json());
    return {{"model", label},
            {"hypotheses", hypotheses},
            {"identities", ids},
            {"summary", {{"pass", count("pass")}, {"fail", count("fail")}, {"skipped", count("skipped")}}}};
}

std::size_t SuiteSection::count(const std::string& status) const {
    return static_cast<std::size_t>(
        std::count_if(identities.begin(), identities.end(), [&](const auto& r) { return r.status == status; }));
}

namespace {

json estimate_json(const Estimate& e) {
    return {{"mean", e.mean}, {"std_error", e.std_error}, {"n_samples", e.n_samples}, {"seed", e.seed}};
}

json hypotheses_json(const ValidationReport& report) {
    json h = json::array();
    for (const auto& c : report.checks) h.push_back({{"name", c.name}, {"verdict", to_string(c.verdict)}, {"detail", c.detail}});
    json out{{"checks", h}, {"rho", report.rho}};
    if (report.rho_exact) out["rho_exact"] = to_string(*report.rho_exact);
    return out;
}

template <class T>
IdentityResult compare(std::string name, const T& lhs, const T& rhs, std::string detail = {}) {
    bool ok = ScalarTraits<T>::near(lhs, rhs);
    return {std::move(name), scalar_to_json(lhs), scalar_to_json(rhs), ok ? "pass" : "fail", std::move(detail)};
}

IdentityResult skipped(std::string name, std::string reason) {
    return {std::move(name), nullptr, nullptr, "skipped", std::move(reason)};
}

/// Passes when |mean - target| <= 3 sigma + slack, where slack covers deterministic error.
IdentityResult statistical(std::string name, const Estimate& e, double target, double slack = 0.0) {
    double dev = std::abs(e.mean - target);
    bool ok = dev <= 3 * e.std_error + slack + 1e-12;
    std::ostringstream d;
    d << "std_error=" << e.std_error << " deviation=" << dev << " allowed=" << 3 * e.std_error + slack;
    return {std::move(name), estimate_json(e), target, ok ? "pass" : "fail", d.str()};
}

IdentityResult two_sample(std::string name, const Estimate& x, const Estimate& y) {
    double dev = std::abs(x.mean - y.mean);
    double sigma = std::hypot(x.std_error, y.std_error);
    std::ostringstream d;
    d << "combined_std_error=" << sigma << " deviation=" << dev;
    return {std::move(name), estimate_json(x), estimate_json(y), dev <= 3 * sigma ? "pass" : "fail", d.str()};
}

std::string site_label(Site x) { return std::to_string(x + 1); }

std::pair<Site, Site> pick_sites(const CouplingModel& model, const RunConfig& config) {
    const std::size_t m = model.size();
    Site a = config.a && *config.a < m ? *config.a : 0;
    Site b = config.b && *config.b < m ? *config.b : m - 1;
    return {a, b};
}

/// Every multiset of total order <= max over m sites.
std::vector<std::vector<unsigned>> multisets(std::size_t m, unsigned max) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> k(m, 0);
    auto rec = [&](auto&& self, Site x, unsigned left) -> void {
        if (x == m) {
            out.push_back(k);
            return;
        }
        for (unsigned v = 0; v <= left; ++v) {
            k[x] = v;
            self(self, x + 1, left - v);
        }
        k[x] = 0;
    };
    rec(rec, 0, max);
    std::stable_sort(out.begin(), out.end(), [](const auto& p, const auto& q) {
        return std::accumulate(p.begin(), p.end(), 0U) < std::accumulate(q.begin(), q.end(), 0U);
    });
    return out;
}

Polynomial monomial_in_t(const std::vector<unsigned>& k) {
    Monomial mono(k.begin(), k.end());
    return Polynomial::term(mono, ExactComplex(1));
}

std::string multiset_label(const std::vector<unsigned>& k) {
    std::string s = "{";
    for (std::size_t x = 0; x < k.size(); ++x) {
        if (x) s += ",";
        s += std::to_string(k[x]);
    }
    return s + "}";
}

double to_double(const Rational& q) { return q.get_d(); }

constexpr std::size_t max_enumeration_sites = 8;

template <class T>
std::vector<IdentityResult> gaussian_identities(const CouplingModel& model, const ValidationReport& report,
                                                const RunConfig& config) {
    std::vector<IdentityResult> out;
    const std::size_t m = model.size();
    const auto [a, b] = pick_sites(model, config);
    const std::string ab = "(" + site_label(a) + "," + site_label(b) + ")";

    const bool herm = report.at(hypothesis::hermitian).verdict == Verdict::pass;
    const std::string herm_reason = "needs positive Hermitian part: " + report.at(hypothesis::hermitian).detail;
    const bool dominant = report.passed(hypothesis::dominance);
    const std::string dominance_reason = "needs diagonal dominance (rho = " + std::to_string(report.rho) + ")";

    std::optional<Covariance<T>> cov;
    try {
        cov = model_covariance<T>(model);
    } catch (const SingularMatrixError&) {
    }

    const std::vector<std::string> gaussian_names{
        "self-normalization", "factorization vs brute-force expansion", "loop representation " + ab,
        "Wick-ordered loop representation " + ab, "self-avoiding walk representation " + ab, "loop cancellation",
        "tau functional equals its value at zero", "tau isomorphism " + ab};
    if (!herm || !cov) {
        for (const auto& n : gaussian_names) out.push_back(skipped(n, cov ? herm_reason : "singular matrix"));
    } else {
        const Covariance<T>& c = *cov;
        out.push_back(compare("self-normalization", scalar_cast<T>(gaussian_normalization(model.quadratic_matrix())), T(1),
                              "fermionic top coefficient against bosonic determinant"));

        if (m <= MixedOracle::max_sites) {
            MixedOracle oracle(model);
            std::vector<Form> forms{Form::psibar(a) * Form::psi(b), Form::phibar(a) * Form::phi(b) * tau(a),
                                    tau(a) * tau(b)};
            RandomInputs rnd(config.seed);
            for (int i = 0; i < 3; ++i) forms.push_back(rnd.form(m, 4, 2, 3));
            for (std::size_t i = 0; i < forms.size(); ++i)
                out.push_back(compare("factorization vs brute-force expansion #" + std::to_string(i + 1),
                                      mixed_expectation(c, forms[i]), scalar_cast<T>(oracle(forms[i])),
                                      to_string(forms[i])));
        } else {
            out.push_back(skipped("factorization vs brute-force expansion", "brute-force oracle limited to 6 sites"));
        }

        if (m <= max_enumeration_sites) {
            out.push_back(compare("loop representation " + ab, loop_two_point(c, a, b, false), loop_integral(c, a, b, false),
                                  "enumeration vs bosonic integral"));
            out.push_back(compare("Wick-ordered loop representation " + ab, loop_two_point(c, a, b, true),
                                  loop_integral(c, a, b, true), "enumeration vs bosonic integral"));
            out.push_back(compare("self-avoiding walk representation " + ab, saw_two_point(c, a, b), saw_integral(c, a, b),
                                  "enumeration vs mixed integral"));
            auto exact_cov = model_covariance<ExactComplex>(model);
            auto ledger = loop_cancellation_ledger(exact_cov, SiteSet::all(m));
            bool cycles_cancel = std::all_of(ledger.entries.begin(), ledger.entries.end(),
                                             [](const auto& e) { return e.assignment_sum.is_zero(); });
            auto r = compare("loop cancellation", ledger.expansion_total, ExactComplex(1),
                             std::to_string(ledger.entries.size()) + " permutations, every cycle assignment sum " +
                                 (cycles_cancel ? "zero" : "NONZERO"));
            if (!cycles_cancel) r.status = "fail";
            out.push_back(r);
        } else {
            for (int i = 2; i < 6; ++i) out.push_back(skipped(gaussian_names[i], "enumeration limited to 8 sites"));
        }

        Polynomial f = Polynomial(3) - Polynomial::variable(0, 2) * ExactComplex(5);
        if (m >= 2) f += Polynomial::variable(0) * Polynomial::variable(1);
        out.push_back(compare("tau functional equals its value at zero", tau_expectation(c, f), T(3),
                              to_string(f, VariableNames::local_times)));

        for (const auto& k : multisets(m, std::min(config.order, default_moment_cap))) {
            out.push_back(compare("tau isomorphism " + ab + " k=" + multiset_label(k),
                                  tau_weighted_two_point(c, monomial_in_t(k), a, b),
                                  local_time_moment_oracle(c.entries(), MomentRequest{a, b, k})));
        }
    }

    if (!dominant || !cov) {
        out.push_back(skipped("walk series " + ab, dominance_reason));
    } else {
        auto series = srw_two_point_series<T>(model, a, b, config.maxlen);
        T c_ab = (*cov)(a, b);
        double dev = ScalarTraits<T>::abs(series.partial - c_ab);
        bool ok = dev <= series.tail_bound + 1e-12;
        if constexpr (ScalarTraits<T>::exact) {
            if (series.tail_bound_exact) ok = (series.partial - c_ab).norm() <= *series.tail_bound_exact * *series.tail_bound_exact;
        }
        std::ostringstream d;
        d << "maxlen=" << config.maxlen << " tail_bound=" << series.tail_bound << " deviation=" << dev;
        out.push_back({"walk series " + ab, scalar_to_json(series.partial), scalar_to_json(c_ab), ok ? "pass" : "fail", d.str()});
    }

    const std::string taylor_name = "weakly self-avoiding Taylor coefficients " + ab;
    try {
        unsigned order = std::min(config.order, 2U);
        auto t = wsaw_g_taylor(model, a, b, ExactComplex(config.lambda), order);
        for (unsigned k = 0; k <= order; ++k)
            out.push_back(compare(taylor_name + " k=" + std::to_string(k), t.local_time_side[k], t.grassmann_side[k],
                                  "local-time moments vs Grassmann integral"));
    } catch (const PreconditionError& e) {
        out.push_back(skipped(taylor_name, e.what()));
    } catch (const SingularMatrixError& e) {
        out.push_back(skipped(taylor_name, e.what()));
    }

    try {
        ExactMatrix q = model.quadratic_matrix();
        std::vector<Site> r1{a}, c1{b};
        auto s1 = generalized_cramer_check(q, r1, c1);
        out.push_back(compare("generalized Cramer rule p=1", s1.lhs, s1.rhs));
        if (m >= 2) {
            std::vector<Site> r2{0, m - 1}, c2{m - 1, 0};
            auto s2 = generalized_cramer_check(q, r2, c2);
            out.push_back(compare("generalized Cramer rule p=2", s2.lhs, s2.rhs));
        }
    } catch (const SingularMatrixError& e) {
        out.push_back(skipped("generalized Cramer rule", e.what()));
    }
    return out;
}

std::vector<IdentityResult> statistical_identities(const CouplingModel& model, const ValidationReport& report,
                                                   const RunConfig& config) {
    std::vector<IdentityResult> out;
    const auto [a, b] = pick_sites(model, config);
    const std::string ab = "(" + site_label(a) + "," + site_label(b) + ")";
    const std::vector<std::string> names{"killed chain representation " + ab, "horizon integral representation " + ab,
                                         "indicator functional agreement " + ab};
    if (!report.markov_ok() || !model.is_real()) {
        std::string reason = "needs d_x > 0, J_xy >= 0 and diagonal dominance";
        for (const auto& n : names) out.push_back(skipped(n, reason));
        return out;
    }
    const std::size_t m = model.size();
    std::vector<double> v(m, 0.0);
    std::vector<ExactComplex> pot(m, ExactComplex(0));
    if (config.v.size() == m)
        for (Site x = 0; x < m; ++x) {
            v[x] = to_double(config.v[x]);
            pot[x] = ExactComplex(config.v[x]);
        }
    CtmcParams params(model, ChainVariant::killed);
    const double target = model_covariance<ExactComplex>(model.with_potential(pot))(a, b).real().get_d();
    const std::uint64_t n = config.samples;
    try {
        out.push_back(statistical(names[0], estimate_dynkin(params, a, b, v, n, config.seed), target));
        out.push_back(statistical(names[1], estimate_fk(params, a, b, v, n, config.seed + 1), target));
    } catch (const PreconditionError& e) {
        out.push_back(skipped(names[0], e.what()));
    }
    try {
        auto indicator = [a](std::span<const double> l) { return l[a] <= 1.0 ? 1.0 : 0.0; };
        auto lhs = estimate_killed_functional(params, a, b, [&](std::span<const double> l, double) { return indicator(l); },
                                              n, config.seed + 2);
        auto rhs = estimate_fk_functional(params, a, b, indicator, n, config.seed + 3);
        out.push_back(two_sample(names[2], lhs, rhs));
    } catch (const PreconditionError& e) {
        out.push_back(skipped(names[2], e.what()));
    }
    if (config.g) {
        const std::string name = "weakly self-avoiding walk sum vs simulation " + ab;
        try {
            double g = to_double(*config.g), lambda = to_double(config.lambda);
            auto sum = wsaw_walk_sum(model, a, b, g, lambda, std::max<std::size_t>(config.maxlen, 60));
            auto est = estimate_wsaw(params, a, b, g, lambda, n, config.seed + 4);
            out.push_back(statistical(name, est, sum.value, sum.tail_bound));
        } catch (const PreconditionError& e) {
            out.push_back(skipped(name, e.what()));
        }
    }
    return out;
}

}  // namespace

SuiteSection verify_model(const std::string& label, const CouplingModel& model, const RunConfig& config) {
    SuiteSection s;
    s.label = label;
    ValidationReport report = validate_model(model);
    s.hypotheses = hypotheses_json(report);
    s.identities = model.arithmetic() == Arithmetic::exact ? gaussian_identities<ExactComplex>(model, report, config)
                                                               : gaussian_identities<FloatComplex>(model, report, config);
    for (auto& r : statistical_identities(model, report, config)) s.identities.push_back(std::move(r));
    return s;
}

CommandResult cmd_verify(const CouplingModel& model, const RunConfig& config) {
    std::vector<std::pair<std::string, CouplingModel>> models{{"input", model}};
    const Arithmetic mode = model.arithmetic();
    models.emplace_back("fixture I1", fixtures::i1().with_arithmetic(mode));
    models.emplace_back("fixture I2", fixtures::i2().with_arithmetic(mode));
    models.emplace_back("fixture I3", fixtures::i3().with_arithmetic(mode));

    json sections = json::array();
    std::size_t pass = 0, fail = 0, skip = 0;
    for (const auto& [label, mdl] : models) {
        SuiteSection s = verify_model(label, mdl, config);
        pass += s.count("pass");
        fail += s.count("fail");
        skip += s.count("skipped");
        sections.push_back(s.to_json());
    }
    CommandResult r;
    r.report = {{"command", "verify"},
                {"seed", config.seed},
                {"samples", config.samples},
                {"sections", sections},
                {"summary", {{"pass", pass}, {"fail", fail}, {"skipped", skip}}}};
    r.exit_code = fail == 0 ? success : identity_failure;
    return r;
}

namespace {

struct Cell {
    std::string representation;
    std::string method;
    json value;
    double error = 0.0;
    std::string status = "ok";
    std::optional<FloatComplex> numeric;
};

template <class T>
Cell value_cell(std::string rep, std::string method, const T& v, double error = 0.0) {
    return {std::move(rep), std::move(method), scalar_to_json(v), error, "ok", ScalarTraits<T>::to_float(v)};
}

Cell na_cell(std::string rep, std::string method, const std::string& reason) {
    return {std::move(rep), std::move(method), nullptr, 0.0, "n/a(" + reason + ")", std::nullopt};
}

template <class T>
std::vector<Cell> twopoint_cells(const CouplingModel& model, Site a, Site b, const RunConfig& config) {
    std::vector<Cell> cells;
    ValidationReport report = validate_model(model);
    const bool herm = report.at(hypothesis::hermitian).verdict == Verdict::pass;
    std::optional<Covariance<T>> cov;
    try {
        cov = model_covariance<T>(model);
    } catch (const SingularMatrixError&) {
    }
    const std::size_t m = model.size();

    if (cov) cells.push_back(value_cell("srw", "matrix inverse", (*cov)(a, b)));
    else cells.push_back(na_cell("srw", "matrix inverse", "singular matrix"));
    if (report.passed(hypothesis::dominance)) {
        auto s = srw_two_point_series<T>(model, a, b, config.maxlen);
        cells.push_back(value_cell("srw", "walk series", s.partial, s.tail_bound));
    } else {
        cells.push_back(na_cell("srw", "walk series", "not diagonally dominant"));
    }

    auto gaussian = [&](const std::string& rep, const std::string& enum_method, auto enumerate, const std::string& int_method,
                        auto integrate) {
        if (!cov) {
            cells.push_back(na_cell(rep, enum_method, "singular matrix"));
            cells.push_back(na_cell(rep, int_method, "singular matrix"));
            return;
        }
        if (m > max_enumeration_sites) cells.push_back(na_cell(rep, enum_method, "more than 8 sites"));
        else cells.push_back(value_cell(rep, enum_method, enumerate(*cov)));
        if (!herm) cells.push_back(na_cell(rep, int_method, "Hermitian part not positive"));
        else if (m > max_enumeration_sites) cells.push_back(na_cell(rep, int_method, "more than 8 sites"));
        else cells.push_back(value_cell(rep, int_method, integrate(*cov)));
    };
    gaussian(
        "loop", "enumeration", [&](const Covariance<T>& c) { return loop_two_point(c, a, b, false); }, "bosonic integral",
        [&](const Covariance<T>& c) { return loop_integral(c, a, b, false); });
    gaussian(
        "loop (Wick-ordered)", "enumeration", [&](const Covariance<T>& c) { return loop_two_point(c, a, b, true); },
        "bosonic integral", [&](const Covariance<T>& c) { return loop_integral(c, a, b, true); });
    gaussian(
        "saw", "enumeration", [&](const Covariance<T>& c) { return saw_two_point(c, a, b); }, "Grassmann integral",
        [&](const Covariance<T>& c) { return saw_integral(c, a, b); });

    if (!config.g) {
        cells.push_back(na_cell("wsaw", "walk sum", "no --g given"));
        cells.push_back(na_cell("wsaw", "monte carlo", "no --g given"));
        return cells;
    }
    const double g = to_double(*config.g), lambda = to_double(config.lambda);
    try {
        auto s = wsaw_walk_sum(model, a, b, g, lambda, std::max<std::size_t>(config.maxlen, 60));
        cells.push_back(value_cell("wsaw", "walk sum", FloatComplex(s.value), s.tail_bound));
    } catch (const PreconditionError& e) {
        cells.push_back(na_cell("wsaw", "walk sum", e.what()));
    }
    try {
        CtmcParams params(model, ChainVariant::killed);
        auto e = estimate_wsaw(params, a, b, g, lambda, config.samples, config.seed);
        Cell c = value_cell("wsaw", "monte carlo", FloatComplex(e.mean), e.std_error);
        c.value = estimate_json(e);
        cells.push_back(c);
    } catch (const PreconditionError& e) {
        cells.push_back(na_cell("wsaw", "monte carlo", e.what()));
    }
    return cells;
}

}  // namespace

CommandResult cmd_twopoint(const CouplingModel& model, const RunConfig& config) {
    const Site a = config.a.value_or(0), b = config.b.value_or(model.size() - 1);
    std::vector<Cell> cells = model.arithmetic() == Arithmetic::exact ? twopoint_cells<ExactComplex>(model, a, b, config)
                                                                      : twopoint_cells<FloatComplex>(model, a, b, config);
    json table = json::array();
    for (const auto& c : cells)
        table.push_back({{"representation", c.representation}, {"method", c.method}, {"value", c.value},
                         {"error", c.error}, {"status", c.status}});

    // Methods of one representation must agree within their combined error (3 sigma for MC).
    json agreement = json::array();
    bool all_agree = true;
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            const Cell &x = cells[i], &y = cells[j];
            if (x.representation != y.representation || !x.numeric || !y.numeric) continue;
            bool mc = x.method == "monte carlo" || y.method == "monte carlo";
            double allowed = (mc ? 3.0 : 1.0) * (x.error + y.error) + float_tolerance() * std::max(1.0, std::abs(*y.numeric));
            bool exact_pair = x.error == 0 && y.error == 0 && x.value.is_string() && y.value.is_string();
            bool ok = exact_pair ? x.value == y.value : std::abs(*x.numeric - *y.numeric) <= allowed;
            all_agree = all_agree && ok;
            agreement.push_back({{"representation", x.representation}, {"methods", {x.method, y.method}}, {"agree", ok}});
        }
    CommandResult r;
    r.report = {{"command", "twopoint"}, {"a", a + 1}, {"b", b + 1}, {"table", table}, {"agreement", agreement}};
    if (config.g) r.report["g"] = to_string(*config.g);
    r.report["lambda"] = to_string(config.lambda);
    r.exit_code = all_agree ? success : identity_failure;
    return r;
}

CommandResult cmd_simulate(const CouplingModel& model, const RunConfig& config) {
    const std::size_t m = model.size();
    const Site a = config.a.value_or(0);
    CtmcParams params(model, ChainVariant::killed);
    const auto cov = model_covariance<ExactComplex>(model, false);
    const std::uint64_t n = config.samples, seed = config.seed;

    // Every quantity reuses the same per-sample streams, so all refer to the same paths.
    auto killed_stat = [&](auto stat) {
        return monte_carlo(n, seed, [&](Rng& rng) {
            PathSample p = simulate_path(params, a, std::nullopt, rng);
            return stat(p);
        });
    };
    json sites = json::array();
    double max_mean = 0.0;
    for (Site x = 0; x < m; ++x) {
        Estimate mean = killed_stat([x](const PathSample& p) { return p.local_times[x]; });
        double var = mean.std_error * mean.std_error * static_cast<double>(n);
        // E_a[L_x] = C_ax and E_a[L_x^2] = 2 C_ax C_xx for C = (D - J)^{-1}.
        ExactComplex target_mean = cov(a, x);
        ExactComplex target_var = ExactComplex(2) * cov(a, x) * cov(x, x) - cov(a, x) * cov(a, x);
        double t = target_mean.real().get_d();
        max_mean = std::max(max_mean, t);
        sites.push_back({{"site", x + 1},
                         {"local_time_mean", estimate_json(mean)},
                         {"local_time_variance", var},
                         {"target_mean", scalar_to_json(target_mean)},
                         {"target_variance", scalar_to_json(target_var)},
                         {"mean_within_3sigma", std::abs(mean.mean - t) <= 3 * mean.std_error + 1e-12}});
    }
    json kills = json::array();
    for (Site b = 0; b < m; ++b) {
        Estimate f = killed_stat([b](const PathSample& p) { return p.last_site == b ? 1.0 : 0.0; });
        // P_a(X(zeta-) = b) = C_ab (d_b - dbar_b).
        ExactComplex kill_rate = model.diag()[b];
        for (Site y = 0; y < m; ++y) kill_rate -= model.offdiag()(b, y);
        ExactComplex target = cov(a, b) * kill_rate;
        double t = target.real().get_d();
        kills.push_back({{"site", b + 1},
                         {"frequency", estimate_json(f)},
                         {"target", scalar_to_json(target)},
                         {"within_3sigma", std::abs(f.mean - t) <= 3 * f.std_error + 1e-12}});
    }
    Estimate zeta = killed_stat([](const PathSample& p) { return p.zeta; });
    ExactComplex zeta_target(0);
    for (Site x = 0; x < m; ++x) zeta_target += cov(a, x);

    // Histogram of each local time on [0, 6 max_x E L_x) with 24 bins plus overflow.
    constexpr std::size_t bins = 24;
    const double upper = 6 * (max_mean > 0 ? max_mean : 1.0);
    std::vector<std::vector<std::uint64_t>> hist(m, std::vector<std::uint64_t>(bins + 1, 0));
    for (std::uint64_t i = 0; i < n; ++i) {
        Rng rng = Rng::stream(seed, i);
        PathSample p = simulate_path(params, a, std::nullopt, rng);
        for (Site x = 0; x < m; ++x) {
            auto k = static_cast<std::size_t>(p.local_times[x] / upper * bins);
            ++hist[x][std::min(k, bins)];
        }
    }
    json histograms = json::array();
    for (Site x = 0; x < m; ++x)
        histograms.push_back({{"site", x + 1}, {"bin_width", upper / bins}, {"counts", std::vector<std::uint64_t>(hist[x].begin(), hist[x].end() - 1)},
                              {"overflow", hist[x].back()}});

    CommandResult r;
    r.report = {{"command", "simulate"},
                {"start", a + 1},
                {"samples", n},
                {"seed", seed},
                {"sites", sites},
                {"kill_sites", kills},
                {"killing_time", {{"estimate", estimate_json(zeta)}, {"target", scalar_to_json(zeta_target)}}},
                {"histograms", histograms}};
    return r;
}

CommandResult cmd_moments(const CouplingModel& model, const RunConfig& config) {
    const Site a = config.a.value_or(0), b = config.b.value_or(model.size() - 1);
    if (config.order > default_moment_cap)
        throw InputError("--order must be at most " + std::to_string(default_moment_cap));
    const auto cov = model_covariance<ExactComplex>(model);
    std::optional<CtmcParams> params;
    const bool markov = validate_model(model).markov_ok() && model.is_real() && !model.has_potential();
    if (markov) params.emplace(model, ChainVariant::killed);

    json rows = json::array();
    bool ok = true;
    std::uint64_t stream = 0;
    for (const auto& k : multisets(model.size(), config.order)) {
        ExactComplex oracle = local_time_moment_oracle(cov.entries(), MomentRequest{a, b, k});
        ExactComplex grassmann = tau_weighted_two_point(cov, monomial_in_t(k), a, b);
        bool agree = oracle == grassmann;
        ok = ok && agree;
        json row{{"powers", k}, {"moment", scalar_to_json(oracle)}, {"tau_weighted_two_point", scalar_to_json(grassmann)},
                 {"agree", agree}};
        if (params) {
            auto est = estimate_killed_functional(
                *params, a, b,
                [k](std::span<const double> l, double) {
                    double p = 1.0;
                    for (std::size_t x = 0; x < k.size(); ++x) p *= std::pow(l[x], k[x]);
                    return p;
                },
                config.samples, config.seed + stream++);
            row["monte_carlo"] = estimate_json(est);
            row["within_3sigma"] = std::abs(est.mean - oracle.real().get_d()) <= 3 * est.std_error + 1e-12;
        }
        rows.push_back(row);
    }
    CommandResult r;
    r.report = {{"command", "moments"}, {"a", a + 1}, {"b", b + 1}, {"max_order", config.order}, {"moments", rows}};
    r.exit_code = ok ? success : identity_failure;
    return r;
}

CommandResult cmd_susy(const CouplingModel& model, const RunConfig& config) {
    const std::size_t m = model.size();
    std::vector<IdentityResult> ids;
    auto form_check = [&](std::string name, const Form& lhs, const Form& rhs) {
        bool ok = lhs == rhs;
        ids.push_back({std::move(name), to_string(lhs), to_string(rhs), ok ? "pass" : "fail", ""});
    };
    for (Site x = 0; x < m; ++x) {
        form_check("Q v_xx = tau_x at x=" + site_label(x), supersymmetry_Q(invariant_v(x, x)), tau(x));
        form_check("Q tau_x = 0 at x=" + site_label(x), supersymmetry_Q(tau(x)), Form());
    }
    const ExactMatrix q = model.quadratic_matrix();
    form_check("Q S_A = 0", supersymmetry_Q(action_form(q)), Form());
    form_check("S_A = Q of its potential", supersymmetry_Q(action_potential(q)), action_form(q));

    RandomInputs rnd(config.seed);
    const std::size_t sites = std::min<std::size_t>(m, 3);
    for (int i = 0; i < 5; ++i) {
        Form f = rnd.form(sites, 3, 2, 3);
        Form qq = supersymmetry_Q(supersymmetry_Q(f));
        form_check("Q^2 = Lie derivative #" + std::to_string(i + 1), qq, lie_derivative(f));
        form_check("Q^2 = d iota + iota d #" + std::to_string(i + 1), qq,
                   exterior_derivative(interior_product(f)) + interior_product(exterior_derivative(f)));
    }
    for (int i = 0; i < 3; ++i) {
        // Chain rule for two random even forms.
        std::vector<Form> k;
        for (int j = 0; j < 2; ++j) {
            Form e = rnd.form(sites, 2, 1, 3);
            Form even;
            for (const auto& [w, p] : e.terms())
                if (w.degree() % 2 == 0) even.add_term(w, p);
            k.push_back(even + Form::phi(0) * Form::phibar(sites - 1));
        }
        Polynomial f = rnd.tau_polynomial(2, 3, 3);
        Form rhs;
        for (std::size_t j = 0; j < k.size(); ++j) rhs += compose(f.derivative(j), k) * supersymmetry_Q(k[j]);
        form_check("chain rule #" + std::to_string(i + 1), supersymmetry_Q(compose(f, k)), rhs);
    }
    ValidationReport report = validate_model(model);
    if (report.at(hypothesis::hermitian).verdict == Verdict::pass) {
        const auto cov = model_covariance<ExactComplex>(model);
        for (int i = 0; i < 5; ++i) {
            Site x = static_cast<Site>(rnd.integer(0, static_cast<long>(m) - 1));
            Form eta = form_of_tau_function(rnd.tau_polynomial(m, 2, 3), m) * invariant_v(x, x);
            ExactComplex v = mixed_expectation(cov, supersymmetry_Q(eta));
            ids.push_back({"integral of Q-exact form #" + std::to_string(i + 1), scalar_to_json(v), "0",
                           v.is_zero() ? "pass" : "fail", to_string(eta)});
        }
    } else {
        ids.push_back(skipped("integral of Q-exact form", "needs positive Hermitian part"));
    }
    json list = json::array();
    std::size_t fail = 0;
    for (const auto& r : ids) {
        list.push_back(r.to_json());
        fail += r.status == "fail";
    }
    CommandResult r;
    r.report = {{"command", "susy"}, {"seed", config.seed}, {"identities", list}, {"failures", fail}};
    r.exit_code = fail == 0 ? success : identity_failure;
    return r;
}

namespace {

Rational parse_rational_flag(const std::string& flag, const std::string& text) {
    try {
        return parse_rational(text);
    } catch (const std::exception& e) {
        throw InputError(flag + ": " + e.what());
    }
}

std::uint64_t parse_count(const std::string& flag, const std::string& text) {
    // Accepts plain integers and scientific notation such as 1e6.
    Rational q;
    try {
        q = parse_rational(text);
    } catch (const std::exception&) {
        double d = 0;
        std::size_t pos = 0;
        try {
            d = std::stod(text, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != text.size() || d != std::floor(d) || d < 1 || d > 1e15) throw InputError(flag + ": expected a positive integer, got '" + text + "'");
        return static_cast<std::uint64_t>(d);
    }
    if (q.get_den() != 1 || q < 1) throw InputError(flag + ": expected a positive integer, got '" + text + "'");
    return q.get_num().get_ui();
}

Site parse_site(const std::string& flag, long v, std::size_t m) {
    if (v < 1 || static_cast<std::size_t>(v) > m)
        throw InputError(flag + " must lie in 1.." + std::to_string(m) + ", got " + std::to_string(v));
    return static_cast<Site>(v - 1);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact and Monte Carlo evaluation of random walk two-point functions and their Gaussian integral representations"};
    app.require_subcommand(1);

    struct Raw {
        std::string model, g, lambda = "0", v, samples, mode, out;
        std::optional<long> a, b;
        std::uint64_t seed = default_seed;
        std::size_t maxlen = default_maxlen;
        unsigned order = 2;
    } raw;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"verify", "Run the identity suite on the model and the shipped fixtures"},
        {"twopoint", "Two-point functions by every applicable method"},
        {"simulate", "Sample the killed chain: local times, kill sites, killing time"},
        {"moments", "Local-time moments against tau-weighted Gaussian integrals"},
        {"susy", "Supersymmetry identities of the form algebra"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--model", raw.model, "Model file (JSON)")->required();
        sub->add_option("--a", raw.a, "Start site, 1..M");
        sub->add_option("--b", raw.b, "End site, 1..M");
        sub->add_option("--g", raw.g, "Self-interaction strength g >= 0 (rational)");
        sub->add_option("--lambda", raw.lambda, "Mass term lambda (rational)")->capture_default_str();
        sub->add_option("--v", raw.v, "Potential v_1,...,v_M (comma-separated rationals)");
        sub->add_option("--samples", raw.samples, "Monte Carlo sample count (default " + std::to_string(default_samples) + ")");
        sub->add_option("--seed", raw.seed, "Random seed")->capture_default_str();
        sub->add_option("--maxlen", raw.maxlen, "Maximum walk length for series")->capture_default_str();
        sub->add_option("--order", raw.order, "Maximum total moment order")->capture_default_str();
        sub->add_option("--mode", raw.mode, "Arithmetic: exact or float")->check(CLI::IsMember({"exact", "float"}));
        sub->add_option("--out", raw.out, "Write the JSON report here instead of stdout");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return success;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }

    try {
        RunConfig config;
        config.command = app.get_subcommands().front()->get_name();
        config.model_path = raw.model;
        CouplingModel model = [&] {
            try {
                return load_model(raw.model);
            } catch (const std::exception& e) {
                throw InputError(e.what());
            }
        }();
        const std::size_t m = model.size();
        if (raw.a) config.a = parse_site("--a", *raw.a, m);
        if (raw.b) config.b = parse_site("--b", *raw.b, m);
        if (!raw.g.empty()) {
            config.g = parse_rational_flag("--g", raw.g);
            if (*config.g < 0) throw InputError("--g must be nonnegative");
        }
        config.lambda = parse_rational_flag("--lambda", raw.lambda);
        if (!raw.v.empty()) {
            std::stringstream ss(raw.v);
            for (std::string item; std::getline(ss, item, ',');) config.v.push_back(parse_rational_flag("--v", item));
            if (config.v.size() != m) throw InputError("--v needs " + std::to_string(m) + " entries");
        }
        if (!raw.samples.empty()) config.samples = parse_count("--samples", raw.samples);
        config.seed = raw.seed;
        config.maxlen = raw.maxlen;
        config.order = raw.order;
        if (!raw.mode.empty()) {
            config.mode = raw.mode == "float" ? Arithmetic::floating : Arithmetic::exact;
            model = model.with_arithmetic(config.mode);
        } else {
            config.mode = model.arithmetic();
        }
        config.out_path = raw.out;

        CommandResult result;
        if (config.command == "verify") result = cmd_verify(model, config);
        else if (config.command == "twopoint") result = cmd_twopoint(model, config);
        else if (config.command == "simulate") result = cmd_simulate(model, config);
        else if (config.command == "moments") result = cmd_moments(model, config);
        else result = cmd_susy(model, config);
        result.report["model"] = model_to_json(model);
        result.report["exit_code"] = result.exit_code;

        const std::string text = result.report.dump(2);
        if (config.out_path.empty()) {
            out << text << "\n";
        } else {
            std::ofstream f(config.out_path);
            if (!f) throw InputError("cannot write " + config.out_path);
            f << text << "\n";
        }
        return result.exit_code;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }
}

}  // namespace gsaw::cli
