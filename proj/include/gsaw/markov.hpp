#ifndef GSAW_MARKOV_HPP
#define GSAW_MARKOV_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gsaw/model.hpp"

namespace gsaw {

/// SplitMix64 stream. Sample i of a run seeded with s owns the stream stream(s, i),
/// so results do not depend on how samples are spread over threads.
class Rng {
public:
    explicit Rng(std::uint64_t state) : state_(state) {}
    static Rng stream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next();
    /// Uniform on (0, 1].
    double uniform();
    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::uint64_t state_;
};

enum class ChainVariant { killed, unkilled };

/// Jump rates and probabilities of the chain built from D and J.
/// Killed: holding rate d_x, jumps pi_xy = J_xy / d_x, death with pi_x,cemetery.
/// Unkilled: holding rate dbar_x = sum_y J_xy, jumps J_xy / dbar_x, no cemetery.
class CtmcParams {
public:
    /// Throws PreconditionError unless D, J are real with d_x > 0, J_xy >= 0 and (for
    /// the killed variant) diagonal dominance.
    CtmcParams(const CouplingModel& model, ChainVariant variant);

    std::size_t size() const { return d_.size(); }
    ChainVariant variant() const { return variant_; }
    double rate(Site x) const { return variant_ == ChainVariant::killed ? d_[x] : dbar_[x]; }
    double d(Site x) const { return d_[x]; }
    double dbar(Site x) const { return dbar_[x]; }
    double jump_probability(Site x, Site y) const;
    /// pi_{x,cemetery}; zero for the unkilled chain.
    double kill_probability(Site x) const;
    /// d_x pi_{x,cemetery} = d_x - dbar_x.
    double kill_rate(Site x) const { return d_[x] - dbar_[x]; }
    /// min_x (d_x - dbar_x).
    double min_kill_rate() const;

    const CouplingModel& model() const { return model_; }

private:
    friend class PathSimulator;
    CouplingModel model_;
    ChainVariant variant_;
    std::vector<double> d_;
    std::vector<double> dbar_;
    std::vector<std::vector<double>> cumulative_;  // row CDFs of the jump distribution
};

struct PathSample {
    std::vector<Site> skeleton;
    std::vector<double> holds;
    /// Killing time (killed) or the horizon (unkilled).
    double zeta = 0.0;
    /// X(zeta-) for the killed chain, X(T) for the unkilled one.
    Site last_site = 0;
    std::vector<double> local_times;
};

/// One path from `start`. The unkilled chain needs a horizon; the killed one rejects it.
PathSample simulate_path(const CtmcParams& params, Site start, std::optional<double> horizon, Rng& rng);

struct Estimate {
    double mean = 0.0;
    /// Sample standard deviation over sqrt(n).
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// Number of worker threads: GSAW_THREADS if set, otherwise the hardware concurrency.
unsigned worker_threads();

/// Mean and standard error of sample(i) for i < n, accumulated in fixed blocks and
/// merged in block order. Identical output for every thread count.
Estimate monte_carlo(std::uint64_t n, std::uint64_t seed, const std::function<double(Rng&)>& sample);

/// Statistic of a killed path: local times L, killing time zeta and X(zeta-).
using KilledFunctional = std::function<double(std::span<const double> local_times, double zeta)>;

/// (d_b pi_{b,cemetery})^{-1} E_a[F(L, zeta) 1_{X(zeta-)=b}].
Estimate estimate_killed_functional(const CtmcParams& params, Site a, Site b, const KilledFunctional& f,
                                    std::uint64_t n, std::uint64_t seed);

/// (d_b pi_{b,cemetery})^{-1} E_a[e^{-v.L} 1_{X(zeta-)=b}]. Requires dbar_x < d_x + v_x.
Estimate estimate_dynkin(const CtmcParams& params, Site a, Site b, std::span<const double> v, std::uint64_t n,
                         std::uint64_t seed);

/// integral_0^infinity Ebar_a[e^{-sum (v + d - dbar) L_T} 1_{X(T)=b}] dT with T drawn
/// from Exp(t_rate) and weighted by e^{t_rate T} / t_rate. Requires 0 < t_rate < mu with
/// mu = min_x (v_x + d_x - dbar_x); the default is mu / 2.
Estimate estimate_fk(const CtmcParams& params, Site a, Site b, std::span<const double> v, std::uint64_t n,
                     std::uint64_t seed, std::optional<double> t_rate = std::nullopt);

/// The same horizon integral with F(L_T) in place of e^{-v.L_T}.
Estimate estimate_fk_functional(const CtmcParams& params, Site a, Site b,
                                const std::function<double(std::span<const double>)>& f, std::uint64_t n,
                                std::uint64_t seed, std::optional<double> t_rate = std::nullopt);

/// (d_b pi_{b,cemetery})^{-1} E_a[e^{-g sum L_x^2 - lambda zeta} 1_{X(zeta-)=b}].
/// Requires g >= 0 and lambda > -min_x (d_x - dbar_x).
Estimate estimate_wsaw(const CtmcParams& params, Site a, Site b, double g, double lambda, std::uint64_t n,
                       std::uint64_t seed);

/// integral_0^infinity t^{n-1}/(n-1)! e^{-g t^2 - beta t} dt, and 1 for n = 0.
/// g = 0 gives beta^{-n}. Otherwise adaptive Gauss-Kronrod with a log-concave tail cut.
double gamma_weight_integral(unsigned n, double g, double beta);

struct WalkSum {
    double value = 0.0;
    /// Bound on the omitted walks |w| > maxlen (infinite when no bound is available).
    double tail_bound = std::numeric_limits<double>::infinity();
    std::size_t maxlen = 0;
};

/// sum_{|w| <= maxlen} J^w prod_x gamma_weight_integral(n_x(w), g, lambda + d) for a
/// model with constant d_x = d.
WalkSum wsaw_walk_sum(const CouplingModel& model, Site a, Site b, double g, double lambda, std::size_t maxlen);

}  // namespace gsaw

#endif
