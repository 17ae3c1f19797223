/*
 * Event-driven Monte Carlo of the exact Poisson information dynamics.
 * Competing exponential clocks, discounting at event times, no time grid.
 * Per-path RNG streams are derived from (seed, path index) so estimates are
 * reproducible independently of execution order and worker count.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "analytic.hpp"
#include "model.hpp"

namespace adbid::mc {

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    std::uint64_t paths;
    std::uint64_t seed;
    std::uint64_t max_events_per_path = 10'000'000;
};

struct EventRecord {
    std::uint64_t path;
    double time;
    const char* kind; // info-site | targeted-view | nontargeted-view | danger | social
    int individual;
    bool won;
    double payment;
};

using EventSink = std::function<void(const EventRecord&)>;

struct SimOptions {
    bool variance_reduced_accrual = false; // SocialDiscount: integrate danger cost in closed form
    bool literal_danger_jumps = false;     // population: simulate danger events instead of accruing
    int threads = 1;
    EventSink sink; // forces single-threaded execution when set
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

/** Counter-based stream: draw i of path j under seed s is a pure hash of
 *  (s, j, i), so any path can be regenerated in isolation. */
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path)
        : key_(detail::mix64(seed ^ (path * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL))) {}

    std::uint64_t next_u64() { return detail::mix64(key_ + (++ctr_) * 0x9E3779B97F4A7C15ULL); }

    /** Uniform on [0,1). */
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /** Exponential with the given rate; strictly positive. */
    double exponential(double rate) {
        const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
        return -std::log(u) / rate;
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

inline double sample_bid(const BidDistribution& dist, double u) {
    if (const auto* c = std::get_if<ConstantBid>(&dist.law())) return c->value;
    if (const auto* un = std::get_if<UniformBid>(&dist.law()))
        return un->lower + u * (un->upper - un->lower);
    const auto& d = std::get<DiscreteBid>(dist.law());
    double cum = 0.0;
    for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        cum += d.weights[i];
        if (u < cum) return d.atoms[i];
    }
    return d.atoms.back();
}

namespace detail {

inline double pairwise_sum(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 128) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += x[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(x, lo, mid) + pairwise_sum(x, mid, hi);
}

inline SimEstimate summarize(const std::vector<double>& values) {
    const std::size_t n = values.size();
    const double mean = pairwise_sum(values, 0, n) / static_cast<double>(n);
    double se = 0.0;
    if (n > 1) {
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
        const double var = pairwise_sum(sq, 0, n) / static_cast<double>(n - 1);
        se = std::sqrt(var / static_cast<double>(n));
    }
    return SimEstimate{mean, se, static_cast<std::uint64_t>(n)};
}

/** Run one closure per path index, in parallel, reducing in index order. */
template <class PathFn>
SimEstimate run_paths(const SimConfig& cfg, int threads, PathFn&& path_fn) {
    require(cfg.paths >= 1, "paths", "must be >= 1");
    const std::size_t n = static_cast<std::size_t>(cfg.paths);
    std::vector<double> values(n);
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) values[i] = path_fn(static_cast<std::uint64_t>(i));
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mu;
        const std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t lo = static_cast<std::size_t>(w) * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                try {
                    for (std::size_t i = lo; i < hi; ++i)
                        values[i] = path_fn(static_cast<std::uint64_t>(i));
                } catch (...) {
                    std::lock_guard<std::mutex> hold(error_mu);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }
    return summarize(values);
}

enum class IndividualKind { Gain, Cost };

struct IndividualParams {
    IndividualKind kind;
    double lump; // K for purchase, K/(1-e^{-rho}) for subscription, danger size for cost
    double rho;
};

/** One path of the single-individual dynamics; returns the discounted gain
 *  (purchase/subscription) or discounted cost (danger model). */
inline double individual_path(const IndividualParams& par, const IntensityProfile& eta,
                              const Channel& ch, double bid, const SimConfig& cfg,
                              const SimOptions& opt, std::uint64_t path, PathRng& rng) {
    const double rate_I = eta.eta_I;
    const double rate_T = eta.eta_T;
    const bool cost_model = par.kind == IndividualKind::Cost;
    const bool literal = cost_model && !opt.variance_reduced_accrual;
    const double rate_D = literal ? 1.0 : 0.0;
    const double total = rate_I + rate_T + rate_D;
    // discounted contributions past this horizon are below double precision
    const double horizon = par.rho > 0.0 ? 42.0 / par.rho : std::numeric_limits<double>::infinity();
    double t = 0.0;
    double tau = std::numeric_limits<double>::infinity();
    double paid = 0.0;   // discounted payments
    double danger = 0.0; // discounted danger cost (literal mode)
    std::uint64_t events = 0;
    while (total > 0.0) {
        if (++events > cfg.max_events_per_path)
            throw SimError("max_events_per_path exceeded (runaway parameters)");
        t += rng.exponential(total);
        if (t > horizon) break;
        const double u = rng.uniform01() * total;
        if (u < rate_I) {
            tau = t;
            if (opt.sink) opt.sink(EventRecord{path, t, "info-site", 0, false, 0.0});
            break;
        }
        if (u < rate_I + rate_T) {
            const double B = sample_bid(ch.dist, rng.uniform01());
            const bool won = bid >= B;
            const double pay = won ? payment_on_win(ch.rule, bid, B) : 0.0;
            if (opt.sink) opt.sink(EventRecord{path, t, "targeted-view", 0, won, pay});
            if (won) {
                paid += pay * std::exp(-par.rho * t);
                tau = t;
                break;
            }
        } else {
            danger += par.lump * std::exp(-par.rho * t);
            if (opt.sink) opt.sink(EventRecord{path, t, "danger", 0, false, 0.0});
        }
    }
    if (!cost_model) {
        const double gain =
            std::isfinite(tau) ? par.lump * std::exp(-par.rho * tau) : 0.0;
        return gain - paid;
    }
    if (!literal) {
        danger = par.rho > 0.0
                     ? par.lump * (-std::expm1(-par.rho * std::fmin(tau, horizon))) / par.rho
                     : par.lump * tau;
    }
    return danger + paid;
}

inline IndividualParams individual_params(const Purchase& spec) {
    return {IndividualKind::Gain, spec.K, spec.rho};
}
inline IndividualParams individual_params(const Subscription& spec) {
    return {IndividualKind::Gain, analytic::subscription_k_eff(spec.K, spec.rho), spec.rho};
}
inline IndividualParams individual_params(const SocialDiscount& spec) {
    return {IndividualKind::Cost, spec.K, spec.rho};
}

inline void check_individual_feasible(const IndividualParams& par, const IntensityProfile& eta,
                                      const Channel& ch, double bid) {
    if (par.kind == IndividualKind::Cost && par.rho == 0.0) {
        const bool can_inform =
            eta.eta_I > 0.0 || (eta.eta_T > 0.0 && analytic::win_prob(ch.dist, bid) > 0.0);
        if (!can_inform)
            throw SimError("infinite undiscounted cost: no informing channel can fire");
    }
}

} // namespace detail

/** Unbiased estimate of the model value under the constant bid. */
template <class Spec>
SimEstimate simulate_individual(const Spec& spec, const IntensityProfile& eta, const Channel& ch,
                                double bid, const SimConfig& cfg, const SimOptions& opt = {}) {
    require(std::isfinite(bid) && bid >= 0.0, "bid", "must be finite and >= 0");
    const detail::IndividualParams par = detail::individual_params(spec);
    detail::check_individual_feasible(par, eta, ch, bid);
    const int threads = opt.sink ? 1 : opt.threads;
    return detail::run_paths(cfg, threads, [&](std::uint64_t path) {
        PathRng rng(cfg.seed, path);
        return detail::individual_path(par, eta, ch, bid, cfg, opt, path, rng);
    });
}

/** Total undiscounted cost of informing all M individuals under the
 *  proportion-indexed policy, by exact continuous-time Markov simulation. */
inline SimEstimate simulate_population(const SocialPopulation& spec, const IntensityProfile& eta,
                                       const Channel& chT, const Channel& chNT,
                                       const PolicyTable& policy, const SimConfig& cfg,
                                       const SimOptions& opt = {}) {
    require(policy.M() == spec.M, "policy", "must have M rows matching the model");
    const int M = spec.M;
    const double K = spec.K;
    const int threads = opt.sink ? 1 : opt.threads;
    return detail::run_paths(cfg, threads, [&](std::uint64_t path) {
        PathRng rng(cfg.seed, path);
        std::vector<char> informed(static_cast<std::size_t>(M), 0);
        int k = 0;
        double t = 0.0;
        double cost = 0.0;
        std::uint64_t events = 0;
        auto pick_uninformed = [&](double u) {
            int want = static_cast<int>(u * (M - k));
            if (want >= M - k) want = M - k - 1;
            for (int i = 0, seen = 0; i < M; ++i)
                if (!informed[static_cast<std::size_t>(i)] && seen++ == want) return i;
            return M - 1;
        };
        while (k < M) {
            const int uninf = M - k;
            const double p = static_cast<double>(k) / M;
            const double rate_I = uninf * eta.eta_I;
            const double rate_S = uninf * p * eta.eta_S;
            const double rate_T = uninf * eta.eta_T;
            const double rate_NT = M * eta.eta_NT;
            const double rate_D = opt.literal_danger_jumps ? uninf * 1.0 : 0.0;
            const double total = rate_I + rate_S + rate_T + rate_NT + rate_D;
            if (!(total > 0.0))
                throw SimError("population chain is stuck: all event rates are zero");
            if (++events > cfg.max_events_per_path)
                throw SimError("max_events_per_path exceeded (runaway parameters)");
            const double dt = rng.exponential(total);
            if (!opt.literal_danger_jumps) cost += K * uninf * dt;
            t += dt;
            double u = rng.uniform01() * total;
            if (u < rate_I) {
                const int i = pick_uninformed(rng.uniform01());
                informed[static_cast<std::size_t>(i)] = 1;
                ++k;
                if (opt.sink) opt.sink(EventRecord{path, t, "info-site", i, false, 0.0});
            } else if (u < rate_I + rate_S) {
                const int i = pick_uninformed(rng.uniform01());
                informed[static_cast<std::size_t>(i)] = 1;
                ++k;
                if (opt.sink) opt.sink(EventRecord{path, t, "social", i, false, 0.0});
            } else if (u < rate_I + rate_S + rate_T) {
                const int i = pick_uninformed(rng.uniform01());
                const double bid = policy.row(k).bid_T;
                const double B = sample_bid(chT.dist, rng.uniform01());
                const bool won = bid >= B;
                const double pay = won ? payment_on_win(chT.rule, bid, B) : 0.0;
                if (won) {
                    cost += pay;
                    informed[static_cast<std::size_t>(i)] = 1;
                    ++k;
                }
                if (opt.sink) opt.sink(EventRecord{path, t, "targeted-view", i, won, pay});
            } else if (u < rate_I + rate_S + rate_T + rate_NT) {
                int i = static_cast<int>(rng.uniform01() * M);
                if (i >= M) i = M - 1;
                const double bid = policy.row(k).bid_NT;
                const double B = sample_bid(chNT.dist, rng.uniform01());
                const bool won = bid >= B;
                const double pay = won ? payment_on_win(chNT.rule, bid, B) : 0.0;
                if (won) {
                    cost += pay;
                    if (!informed[static_cast<std::size_t>(i)]) {
                        informed[static_cast<std::size_t>(i)] = 1;
                        ++k;
                    }
                }
                if (opt.sink) opt.sink(EventRecord{path, t, "nontargeted-view", i, won, pay});
            } else {
                const int i = pick_uninformed(rng.uniform01());
                cost += K;
                if (opt.sink) opt.sink(EventRecord{path, t, "danger", i, false, 0.0});
            }
        }
        return cost;
    });
}

/** One estimate per bid under common random numbers: path i re-derives the
 *  same stream for every bid, so curve comparisons share their noise. */
template <class Spec>
std::vector<SimEstimate> estimate_value_curve(const Spec& spec, const IntensityProfile& eta,
                                              const Channel& ch, const std::vector<double>& bids,
                                              const SimConfig& cfg, const SimOptions& opt = {}) {
    require(!bids.empty(), "bids", "must be nonempty");
    std::vector<SimEstimate> out;
    out.reserve(bids.size());
    for (double b : bids) out.push_back(simulate_individual(spec, eta, ch, b, cfg, opt));
    return out;
}

} // namespace adbid::mc
