#include "gsaw/markov.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gsaw {

namespace {

constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) { return Rng(mix64(seed + mix64(index + golden))); }

std::uint64_t Rng::next() {
    state_ += golden;
    return mix64(state_);
}

double Rng::uniform() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

CtmcParams::CtmcParams(const CouplingModel& model, ChainVariant variant)
    : model_(model), variant_(variant), d_(model.size()), dbar_(model.size(), 0.0) {
    const std::size_t m = model.size();
    ValidationReport report = validate_model(model);
    if (!report.passed(hypothesis::markov))
        throw PreconditionError("Markov chain needs real d_x > 0 and J_xy >= 0: " + report.at(hypothesis::markov).detail);
    if (variant == ChainVariant::killed && !report.passed(hypothesis::dominance))
        throw PreconditionError("killed chain needs diagonal dominance (rho = " + std::to_string(report.rho) + ")");
    for (Site x = 0; x < m; ++x) {
        d_[x] = model.diag()[x].real().get_d();
        for (Site y = 0; y < m; ++y) dbar_[x] += model.offdiag()(x, y).real().get_d();
    }
    cumulative_.assign(m, std::vector<double>(m, 0.0));
    for (Site x = 0; x < m; ++x) {
        double acc = 0.0;
        Site last_positive = m;
        for (Site y = 0; y < m; ++y) {
            acc += jump_probability(x, y);
            cumulative_[x][y] = acc;
            if (jump_probability(x, y) > 0) last_positive = y;
        }
        // The unkilled chain must always jump somewhere.
        if (variant == ChainVariant::unkilled && last_positive < m)
            for (Site y = last_positive; y < m; ++y) cumulative_[x][y] = 1.0;
    }
}

double CtmcParams::jump_probability(Site x, Site y) const {
    double j = model_.offdiag()(x, y).real().get_d();
    if (variant_ == ChainVariant::killed) return j / d_[x];
    return dbar_[x] > 0 ? j / dbar_[x] : 0.0;
}

double CtmcParams::kill_probability(Site x) const {
    return variant_ == ChainVariant::killed ? kill_rate(x) / d_[x] : 0.0;
}

double CtmcParams::min_kill_rate() const {
    double mu = std::numeric_limits<double>::infinity();
    for (Site x = 0; x < size(); ++x) mu = std::min(mu, kill_rate(x));
    return mu;
}

class PathSimulator {
public:
    explicit PathSimulator(const CtmcParams& p) : p_(p) {}

    // Killed chain from `start`; returns X(zeta-) and adds holds into `local`.
    Site killed(Site start, Rng& rng, std::vector<double>& local, PathSample* record) const {
        Site x = start;
        while (true) {
            double hold = rng.exponential(p_.d_[x]);
            local[x] += hold;
            if (record) {
                record->skeleton.push_back(x);
                record->holds.push_back(hold);
            }
            std::optional<Site> y = jump(x, rng.uniform());
            if (!y) return x;
            x = *y;
        }
    }

    // Unkilled chain from `start` up to `horizon`; returns X(horizon).
    Site unkilled(Site start, double horizon, Rng& rng, std::vector<double>& local, PathSample* record) const {
        Site x = start;
        double t = 0.0;
        while (true) {
            double rate = p_.dbar_[x];
            double hold = rate > 0 ? rng.exponential(rate) : std::numeric_limits<double>::infinity();
            bool done = t + hold >= horizon;
            if (done) hold = horizon - t;
            local[x] += hold;
            t += hold;
            if (record) {
                record->skeleton.push_back(x);
                record->holds.push_back(hold);
            }
            if (done) return x;
            x = *jump(x, rng.uniform());
        }
    }

private:
    std::optional<Site> jump(Site x, double u) const {
        const auto& row = p_.cumulative_[x];
        for (Site y = 0; y < row.size(); ++y)
            if (u <= row[y]) return y;
        return std::nullopt;
    }

    const CtmcParams& p_;
};

PathSample simulate_path(const CtmcParams& params, Site start, std::optional<double> horizon, Rng& rng) {
    if (start >= params.size()) throw PreconditionError("start site out of range");
    PathSample s;
    s.local_times.assign(params.size(), 0.0);
    PathSimulator sim(params);
    if (params.variant() == ChainVariant::killed) {
        if (horizon) throw PreconditionError("killed chain runs until it dies; no horizon allowed");
        s.last_site = sim.killed(start, rng, s.local_times, &s);
    } else {
        if (!horizon || *horizon < 0) throw PreconditionError("unkilled chain needs a nonnegative horizon");
        s.last_site = sim.unkilled(start, *horizon, rng, s.local_times, &s);
    }
    for (double h : s.holds) s.zeta += h;
    if (horizon) s.zeta = *horizon;
    return s;
}

unsigned worker_threads() {
    unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GSAW_THREADS")) {
        try {
            long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
        } catch (const std::exception&) {
        }
    }
    return hw;
}

namespace {

constexpr std::uint64_t block_size = 1024;

struct Moments {
    double n = 0, mean = 0, m2 = 0;

    void add(double x) {
        n += 1;
        double delta = x - mean;
        mean += delta / n;
        m2 += delta * (x - mean);
    }

    void merge(const Moments& o) {
        if (o.n == 0) return;
        double total = n + o.n;
        double delta = o.mean - mean;
        mean += delta * o.n / total;
        m2 += o.m2 + delta * delta * n * o.n / total;
        n = total;
    }
};

}  // namespace

Estimate monte_carlo(std::uint64_t n, std::uint64_t seed, const std::function<double(Rng&)>& sample) {
    if (n == 0) throw PreconditionError("sample count must be at least 1");
    const std::uint64_t blocks = (n + block_size - 1) / block_size;
    std::vector<Moments> partial(blocks);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        try {
            for (std::uint64_t b; (b = next.fetch_add(1)) < blocks;) {
                Moments acc;
                for (std::uint64_t i = b * block_size; i < std::min(n, (b + 1) * block_size); ++i) {
                    Rng rng = Rng::stream(seed, i);
                    acc.add(sample(rng));
                }
                partial[b] = acc;
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = blocks;
        }
    };
    const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(worker_threads(), blocks));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    Moments total;
    for (const auto& p : partial) total.merge(p);
    double var = total.n > 1 ? total.m2 / (total.n - 1) : 0.0;
    return Estimate{total.mean, std::sqrt(var / total.n), n, seed};
}

namespace {

void check_sites(const CtmcParams& p, Site a, Site b) {
    if (a >= p.size() || b >= p.size()) throw PreconditionError("site out of range");
}

CtmcParams as_variant(const CtmcParams& p, ChainVariant v) {
    return p.variant() == v ? p : CtmcParams(p.model(), v);
}

double default_rate(double mu, std::optional<double> t_rate) {
    double r = t_rate.value_or(mu / 2);
    if (!(r > 0 && r < mu))
        throw PreconditionError("horizon rate must lie in (0, mu) with mu = " + std::to_string(mu));
    return r;
}

}  // namespace

Estimate estimate_killed_functional(const CtmcParams& params, Site a, Site b, const KilledFunctional& f,
                                    std::uint64_t n, std::uint64_t seed) {
    check_sites(params, a, b);
    const CtmcParams killed = as_variant(params, ChainVariant::killed);
    const double norm = killed.kill_rate(b);
    PathSimulator sim(killed);
    return monte_carlo(n, seed, [&](Rng& rng) {
        std::vector<double> local(killed.size(), 0.0);
        Site last = sim.killed(a, rng, local, nullptr);
        if (last != b) return 0.0;
        double zeta = 0.0;
        for (double l : local) zeta += l;
        return f(local, zeta) / norm;
    });
}

Estimate estimate_dynkin(const CtmcParams& params, Site a, Site b, std::span<const double> v, std::uint64_t n,
                         std::uint64_t seed) {
    if (v.size() != params.size()) throw PreconditionError("potential must have one entry per site");
    for (Site x = 0; x < params.size(); ++x)
        if (!(params.dbar(x) < params.d(x) + v[x]))
            throw PreconditionError("need dbar_x < d_x + v_x at site " + std::to_string(x + 1));
    std::vector<double> pot(v.begin(), v.end());
    return estimate_killed_functional(
        params, a, b,
        [pot](std::span<const double> local, double) {
            double e = 0.0;
            for (std::size_t x = 0; x < local.size(); ++x) e += pot[x] * local[x];
            return std::exp(-e);
        },
        n, seed);
}

namespace {

Estimate fk_integral(const CtmcParams& params, Site a, Site b, std::span<const double> extra_rate,
                     const std::function<double(std::span<const double>)>& f, double mu, std::uint64_t n,
                     std::uint64_t seed, std::optional<double> t_rate) {
    check_sites(params, a, b);
    const double r = default_rate(mu, t_rate);
    const CtmcParams unkilled = as_variant(params, ChainVariant::unkilled);
    PathSimulator sim(unkilled);
    std::vector<double> rate(extra_rate.begin(), extra_rate.end());
    return monte_carlo(n, seed, [&](Rng& rng) {
        double horizon = rng.exponential(r);
        std::vector<double> local(unkilled.size(), 0.0);
        Site end = sim.unkilled(a, horizon, rng, local, nullptr);
        if (end != b) return 0.0;
        double e = 0.0;
        for (std::size_t x = 0; x < local.size(); ++x) e += rate[x] * local[x];
        return std::exp(r * horizon - e) / r * f(local);
    });
}

}  // namespace

Estimate estimate_fk(const CtmcParams& params, Site a, Site b, std::span<const double> v, std::uint64_t n,
                     std::uint64_t seed, std::optional<double> t_rate) {
    if (v.size() != params.size()) throw PreconditionError("potential must have one entry per site");
    std::vector<double> rate(params.size());
    double mu = std::numeric_limits<double>::infinity();
    for (Site x = 0; x < params.size(); ++x) {
        rate[x] = v[x] + params.kill_rate(x);
        if (!(rate[x] > 0)) throw PreconditionError("need dbar_x < d_x + v_x at site " + std::to_string(x + 1));
        mu = std::min(mu, rate[x]);
    }
    return fk_integral(params, a, b, rate, [](std::span<const double>) { return 1.0; }, mu, n, seed, t_rate);
}

Estimate estimate_fk_functional(const CtmcParams& params, Site a, Site b,
                                const std::function<double(std::span<const double>)>& f, std::uint64_t n,
                                std::uint64_t seed, std::optional<double> t_rate) {
    std::vector<double> rate(params.size());
    for (Site x = 0; x < params.size(); ++x) rate[x] = params.kill_rate(x);
    double mu = params.min_kill_rate();
    if (!(mu > 0)) throw PreconditionError("need dbar_x < d_x at every site");
    return fk_integral(params, a, b, rate, f, mu, n, seed, t_rate);
}

Estimate estimate_wsaw(const CtmcParams& params, Site a, Site b, double g, double lambda, std::uint64_t n,
                       std::uint64_t seed) {
    if (g < 0) throw PreconditionError("g must be nonnegative");
    double guard = -params.min_kill_rate();
    if (!(lambda > guard)) throw PreconditionError("lambda must exceed " + std::to_string(guard));
    return estimate_killed_functional(
        params, a, b,
        [g, lambda](std::span<const double> local, double zeta) {
            double sq = 0.0;
            for (double l : local) sq += l * l;
            return std::exp(-g * sq - lambda * zeta);
        },
        n, seed);
}

double gamma_weight_integral(unsigned n, double g, double beta) {
    if (n == 0) return 1.0;
    if (g < 0) throw PreconditionError("gamma weight needs g >= 0");
    if (g == 0) {
        if (!(beta > 0)) throw PreconditionError("gamma weight with g = 0 needs beta > 0");
        return std::pow(beta, -static_cast<double>(n));
    }
    const double k = n - 1.0;
    const double log_norm = std::lgamma(static_cast<double>(n));
    auto log_f = [&](double t) { return (k > 0 ? k * std::log(t) : 0.0) - log_norm - g * t * t - beta * t; };
    auto f = [&](double t) { return t <= 0 ? (k > 0 ? 0.0 : std::exp(-log_norm)) : std::exp(log_f(t)); };

    // Mode of the integrand, where k/t = 2 g t + beta.
    const double mode = k > 0 ? (-beta + std::sqrt(beta * beta + 8 * g * k)) / (4 * g) : std::max(0.0, -beta / (2 * g));
    // Past the mode f is log-concave, so the tail beyond T is at most f(T) / kappa(T).
    auto kappa = [&](double t) { return 2 * g * t + beta - k / t; };
    double cut = std::max({mode, 1.0 / std::sqrt(g), 1.0});
    while (!(kappa(cut) > 0) || std::exp(log_f(cut)) / kappa(cut) > 1e-18) cut *= 1.5;

    constexpr double rel_tol = 1e-13;
    using boost::math::quadrature::gauss_kronrod;
    double value = 0.0;
    if (mode > 0 && mode < cut) value += gauss_kronrod<double, 61>::integrate(f, 0.0, mode, 15, rel_tol);
    value += gauss_kronrod<double, 61>::integrate(f, mode > 0 && mode < cut ? mode : 0.0, cut, 15, rel_tol);
    return value;
}

WalkSum wsaw_walk_sum(const CouplingModel& model, Site a, Site b, double g, double lambda, std::size_t maxlen) {
    const std::size_t m = model.size();
    if (a >= m || b >= m) throw PreconditionError("site out of range");
    if (!model.is_real()) throw PreconditionError("walk sum needs a real model");
    const Rational d0 = model.diag()[0].real();
    for (const auto& d : model.diag())
        if (d.real() != d0) throw PreconditionError("walk sum needs a constant diagonal d_x = d");
    const double beta = lambda + d0.get_d();
    if (g < 0) throw PreconditionError("g must be nonnegative");

    std::vector<double> j(m * m);
    double row_max = 0.0;
    for (Site x = 0; x < m; ++x) {
        double row = 0.0;
        for (Site y = 0; y < m; ++y) {
            j[x * m + y] = model.offdiag()(x, y).real().get_d();
            row += std::abs(j[x * m + y]);
        }
        row_max = std::max(row_max, row);
    }
    if (g == 0 && !(beta > row_max)) throw PreconditionError("g = 0 walk sum needs lambda + d > max_x sum_y J_xy");

    std::vector<double> gamma_cache;
    auto gamma = [&](unsigned n) {
        while (gamma_cache.size() <= n) gamma_cache.push_back(gamma_weight_integral(static_cast<unsigned>(gamma_cache.size()), g, beta));
        return gamma_cache[n];
    };

    // Walks grouped by current site and visit counts, carrying the summed J^w.
    using Counts = std::vector<std::uint16_t>;
    std::vector<std::map<Counts, double>> layer(m);
    Counts start(m, 0);
    start[a] = 1;
    layer[a][start] = 1.0;
    WalkSum out;
    out.maxlen = maxlen;
    for (std::size_t len = 0;; ++len) {
        for (const auto& [counts, w] : layer[b]) {
            double term = w;
            for (Site x = 0; x < m; ++x) term *= gamma(counts[x]);
            out.value += term;
        }
        if (len == maxlen) break;
        std::vector<std::map<Counts, double>> next(m);
        for (Site x = 0; x < m; ++x)
            for (const auto& [counts, w] : layer[x])
                for (Site y = 0; y < m; ++y) {
                    double jxy = j[x * m + y];
                    if (jxy == 0) continue;
                    Counts c = counts;
                    ++c[y];
                    next[y][c] += w * jxy;
                }
        layer.swap(next);
    }
    // Each weight is at most the g = 0 weight, a walk series with ratio rho' = row_max / beta.
    if (beta > 0) {
        double rho = row_max / beta;
        if (rho < 1) out.tail_bound = std::pow(rho, static_cast<double>(maxlen + 1)) / (beta * (1 - rho));
    }
    return out;
}

}  // namespace gsaw
