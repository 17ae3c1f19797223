/*
 * Optimal-bid search. Single-individual models reduce to bounded 1-d
 * optimization; the population model solves one value per informed
 * proportion, by scalar fixed point when both channels are second price
 * and by bounded 2-d grid refinement otherwise, with a dichotomy schedule
 * that shrinks per-proportion search boxes using the monotonicity of the
 * smallest optimal bids.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "analytic.hpp"
#include "model.hpp"

namespace adbid::solver {

enum class SolveMethod { GridRefine, ClosedForm, FixedPoint, Dichotomy };

inline const char* to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::GridRefine: return "grid_refine";
        case SolveMethod::ClosedForm: return "closed_form";
        case SolveMethod::FixedPoint: return "fixed_point";
        case SolveMethod::Dichotomy: return "dichotomy";
    }
    return "unknown";
}

struct SolveReport {
    double optimal_value;
    double bid_min;                   // single-individual models
    std::optional<PolicyTable> policy; // population model
    std::uint64_t evaluations;
    SolveMethod method;
};

namespace detail {

/** Bids where a channel's functionals jump or kink; optima sit there. */
inline void append_kink_nodes(const BidDistribution& dist, std::vector<double>& out) {
    if (const auto* c = std::get_if<ConstantBid>(&dist.law())) {
        out.push_back(c->value);
    } else if (const auto* u = std::get_if<UniformBid>(&dist.law())) {
        out.push_back(u->lower);
        out.push_back(u->upper);
    } else {
        const auto& d = std::get<DiscreteBid>(dist.law());
        out.insert(out.end(), d.atoms.begin(), d.atoms.end());
    }
}

inline std::vector<double> grid_nodes(double lo, double hi, double step,
                                      const std::vector<double>& kinks) {
    std::vector<double> nodes;
    if (!(hi > lo) || !(step > 0.0)) {
        nodes.push_back(lo);
        return nodes;
    }
    const long n = static_cast<long>(std::ceil((hi - lo) / step * (1.0 - 1e-12)));
    nodes.reserve(static_cast<std::size_t>(n) + kinks.size() + 2);
    for (long i = 0; i < n; ++i) nodes.push_back(lo + static_cast<double>(i) * step);
    nodes.push_back(hi);
    for (double k : kinks)
        if (k >= lo && k <= hi) nodes.push_back(k);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

struct GridBest {
    double arg;
    double value;
};

/** Leftmost maximizer: later nodes must beat the incumbent by more than a
 *  relative 1e-12 to displace it, so ties resolve to the smallest bid. */
template <class F>
GridBest scan_max(F&& f, const std::vector<double>& nodes) {
    GridBest best{nodes.front(), f(nodes.front())};
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double v = f(nodes[i]);
        if (v > best.value + 1e-12 * std::fmax(1.0, std::fabs(best.value)))
            best = {nodes[i], v};
    }
    return best;
}

/** Coarse pass at the given step, then two 10x local refinements around the
 *  incumbent. The incumbent is kept as a candidate node in refinements. */
template <class F>
GridBest grid_max_1d(F&& f, double lo, double hi, double step, std::vector<double> kinks) {
    GridBest best = scan_max(f, grid_nodes(lo, hi, step, kinks));
    for (int round = 0; round < 2; ++round) {
        const double wlo = std::fmax(lo, best.arg - step);
        const double whi = std::fmin(hi, best.arg + step);
        step *= 0.1;
        kinks.push_back(best.arg);
        best = scan_max(f, grid_nodes(wlo, whi, step, kinks));
        kinks.pop_back();
    }
    return best;
}

struct GridBest2 {
    double arg_T;
    double arg_N;
    double value;
};

template <class F>
GridBest2 scan_min2(F&& f, const std::vector<double>& nodes_T, const std::vector<double>& nodes_N) {
    GridBest2 best{nodes_T.front(), nodes_N.front(), f(nodes_T.front(), nodes_N.front())};
    bool first = true;
    for (double t : nodes_T) {
        for (double n : nodes_N) {
            if (first) {
                first = false;
                continue;
            }
            const double v = f(t, n);
            if (v < best.value - 1e-12 * std::fmax(1.0, std::fabs(best.value)))
                best = {t, n, v};
        }
    }
    return best;
}

template <class F>
GridBest2 grid_min_2d(F&& f, double lo_T, double hi_T, double lo_N, double hi_N,
                      double step_T, double step_N,
                      std::vector<double> kinks_T, std::vector<double> kinks_N) {
    GridBest2 best = scan_min2(f, grid_nodes(lo_T, hi_T, step_T, kinks_T),
                               grid_nodes(lo_N, hi_N, step_N, kinks_N));
    for (int round = 0; round < 2; ++round) {
        const double wlo_T = std::fmax(lo_T, best.arg_T - step_T);
        const double whi_T = std::fmin(hi_T, best.arg_T + step_T);
        const double wlo_N = std::fmax(lo_N, best.arg_N - step_N);
        const double whi_N = std::fmin(hi_N, best.arg_N + step_N);
        step_T *= 0.1;
        step_N *= 0.1;
        kinks_T.push_back(best.arg_T);
        kinks_N.push_back(best.arg_N);
        best = scan_min2(f, grid_nodes(wlo_T, whi_T, step_T, kinks_T),
                         grid_nodes(wlo_N, whi_N, step_N, kinks_N));
        kinks_T.pop_back();
        kinks_N.pop_back();
    }
    return best;
}

} // namespace detail

/**
 * Smallest maximizer of the one-auction surplus b -> E[(target - c(b,B)) 1{b>=B}].
 * Exact per distribution: under second price the objective depends only on
 * which competitor bids are beaten, so the smallest maximizer beats exactly
 * the mass at or below the target; under first price the trade-off between
 * win probability and price paid has elementary solutions.
 */
inline double smallest_argopt(const Channel& ch, double target_value) {
    require(std::isfinite(target_value) && target_value >= 0.0, "target_value",
            "must be finite and >= 0");
    const auto& law = ch.dist.law();
    if (ch.rule == AuctionRule::SecondPrice) {
        if (const auto* c = std::get_if<ConstantBid>(&law))
            return c->value <= target_value ? c->value : 0.0;
        if (const auto* u = std::get_if<UniformBid>(&law))
            return target_value >= u->lower ? std::fmin(target_value, u->upper) : 0.0;
        const auto& d = std::get<DiscreteBid>(law);
        double best = 0.0;
        for (double a : d.atoms) {
            if (a > target_value) break;
            best = a;
        }
        return best;
    }
    // first price: maximize (target - b) P[B <= b]
    if (const auto* c = std::get_if<ConstantBid>(&law))
        return target_value > c->value ? c->value : 0.0;
    if (const auto* u = std::get_if<UniformBid>(&law)) {
        if (target_value <= u->lower) return 0.0;
        return std::fmin(0.5 * (target_value + u->lower), u->upper);
    }
    const auto& d = std::get<DiscreteBid>(law);
    double best_b = 0.0, best_v = 0.0;
    for (double a : d.atoms) {
        if (a > target_value) break;
        const double v = (target_value - a) * ch.dist.cdf(a);
        if (v > best_v) {
            best_v = v;
            best_b = a;
        }
    }
    return best_b;
}

namespace detail {

/** Shared 1-d solve for the two single-individual shapes. `maximize` flips
 *  the objective; `target(vstar)` gives the static-auction target value the
 *  smallest optimal bid is read from. */
template <class Value>
SolveReport solve_single(const Channel& ch, double eta_T, double interval_hi,
                         bool maximize, Value&& value,
                         double closed_form_candidate, bool has_closed_form) {
    std::uint64_t evals = 0;
    auto f = [&](double b) {
        ++evals;
        return value(b);
    };
    const double sign = maximize ? 1.0 : -1.0;
    double vstar;
    SolveMethod method;
    if (eta_T == 0.0) {
        vstar = f(0.0); // bid-independent value, never pay
        method = SolveMethod::ClosedForm;
    } else if (const auto* c = std::get_if<ConstantBid>(&ch.dist.law())) {
        // two-point comparison: either never win or win at the atom
        const double lose = f(0.0);
        const double win = f(c->value);
        vstar = maximize ? std::fmax(win, lose) : std::fmin(win, lose);
        method = SolveMethod::ClosedForm;
    } else if (has_closed_form) {
        const double lose = f(0.0);
        const double win = f(closed_form_candidate);
        vstar = maximize ? std::fmax(win, lose) : std::fmin(win, lose);
        method = SolveMethod::ClosedForm;
    } else {
        std::vector<double> kinks;
        append_kink_nodes(ch.dist, kinks);
        auto signed_f = [&](double b) { return sign * f(b); };
        const GridBest best =
            grid_max_1d(signed_f, 0.0, interval_hi, interval_hi * 1e-3, std::move(kinks));
        vstar = sign * best.value;
        method = SolveMethod::GridRefine;
    }
    return SolveReport{vstar, 0.0, std::nullopt, evals, method};
}

} // namespace detail

/**
 * Optimal constant bid for the purchase model. The optimal bid never
 * exceeds rho*K/(eta_I+rho): paying more than the value of being informed
 * early is never worthwhile. The smallest optimal bid is the smallest
 * maximizer of the static surplus at target K - V*.
 */
inline SolveReport solve_purchase(const Purchase& spec, const IntensityProfile& eta,
                                  const Channel& ch) {
    const double hi = spec.rho * spec.K / (eta.eta_I + spec.rho);
    const auto* u = std::get_if<UniformBid>(&ch.dist.law());
    const bool closed = (u != nullptr) && ch.rule == AuctionRule::FirstPrice && eta.eta_T > 0.0;
    const double candidate =
        closed ? analytic::uniform_firstprice_bid(spec.K, spec.rho, eta.eta_I, eta.eta_T,
                                                  u->lower, u->upper)
                     .b_star
               : 0.0;
    SolveReport r = detail::solve_single(
        ch, eta.eta_T, hi, /*maximize=*/true,
        [&](double b) { return analytic::value_purchase(spec, eta, ch, b); }, candidate, closed);
    r.bid_min = eta.eta_T > 0.0 ? smallest_argopt(ch, spec.K - r.optimal_value) : 0.0;
    return r;
}

/** Subscription model: purchase with the perpetuity lump sum K/(1-e^{-rho}). */
inline SolveReport solve_subscription(const Subscription& spec, const IntensityProfile& eta,
                                      const Channel& ch) {
    return solve_purchase(Purchase(analytic::subscription_k_eff(spec.K, spec.rho), spec.rho),
                          eta, ch);
}

/**
 * Minimal discounted cost of protecting one individual. The optimal bid
 * never exceeds the never-bid cost K/(eta_I+rho); the smallest optimal bid
 * is the smallest maximizer of the static saving at target V*.
 */
inline SolveReport solve_social_discount(const SocialDiscount& spec, const IntensityProfile& eta,
                                         const Channel& ch) {
    require(eta.eta_I + spec.rho > 0.0, "rho", "eta_I + rho must be positive");
    const double hi = spec.K / (eta.eta_I + spec.rho);
    bool closed = false;
    double candidate = 0.0;
    if (const auto* u = std::get_if<UniformBid>(&ch.dist.law());
        u != nullptr && ch.rule == AuctionRule::FirstPrice && eta.eta_T > 0.0) {
        // same change of variable as the purchase closed form: with
        // b' = eta_I + rho + eta_T F(b), cost = c0/b' + c1 + c2 b' where
        // c0 = K - lambda1 (eta_I+rho), c2 = lambda2 > 0
        const double lambda2 = (u->upper - u->lower) / eta.eta_T;
        const double lambda1 = u->lower - lambda2 * (eta.eta_I + spec.rho);
        const double c0 = spec.K - lambda1 * (eta.eta_I + spec.rho);
        const double bp_lo = eta.eta_I + spec.rho;
        const double bp_hi = eta.eta_I + spec.rho + eta.eta_T;
        const double bp = c0 > 0.0 ? std::clamp(std::sqrt(c0 / lambda2), bp_lo, bp_hi) : bp_lo;
        candidate = std::clamp(lambda1 + lambda2 * bp, u->lower, u->upper);
        closed = true;
    }
    SolveReport r = detail::solve_single(
        ch, eta.eta_T, hi, /*maximize=*/false,
        [&](double b) { return analytic::value_social_discount(spec, eta, ch, b); }, candidate,
        closed);
    r.bid_min = eta.eta_T > 0.0 ? smallest_argopt(ch, r.optimal_value) : 0.0;
    return r;
}

namespace detail {

inline double population_upper_bound(double K, const IntensityProfile& eta, double p) {
    return K / (eta.eta_I + p * eta.eta_S);
}

template <class Counter>
double fixed_point_value(double p, const IntensityProfile& eta, const Channel& chT,
                         const Channel& chNT, double K, Counter&& count) {
    const double v0 = population_upper_bound(K, eta, p);
    double v = v0;
    for (int iter = 0; iter < 10000; ++iter) {
        count();
        const double next =
            analytic::value_social_pair(p, eta, chT, chNT, K, v, (1.0 - p) * v);
        if (std::fabs(next - v) <= 1e-12 * std::fmax(1.0, std::fabs(v))) return next;
        v = next;
    }
    // fall back to a bid grid over the truthful parametrization b -> (b,(1-p)b)
    std::vector<double> kinks;
    append_kink_nodes(chT.dist, kinks);
    {
        std::vector<double> kn;
        append_kink_nodes(chNT.dist, kn);
        for (double a : kn) kinks.push_back(a / (1.0 - p));
    }
    auto f = [&](double b) {
        count();
        return -analytic::value_social_pair(p, eta, chT, chNT, K, b, (1.0 - p) * b);
    };
    return -grid_max_1d(f, 0.0, v0, v0 * 1e-3, std::move(kinks)).value;
}

struct SearchBox {
    double lo_T, hi_T;
    double lo_N, hi_N;
};

/** v(p) for one proportion, searched inside `box`; step sizes are tied to
 *  the full bound K/(eta_I+p eta_S) so a shrunken box costs fewer nodes at
 *  unchanged resolution. */
template <class Counter>
double boxed_value(double p, const IntensityProfile& eta, const Channel& chT,
                   const Channel& chNT, double K, const SearchBox& box, Counter&& count) {
    const double v0 = population_upper_bound(K, eta, p);
    const double step = v0 * 1e-3;
    if (eta.eta_T == 0.0 && eta.eta_NT == 0.0) {
        count();
        return analytic::value_social_pair(p, eta, chT, chNT, K, 0.0, 0.0);
    }
    if (eta.eta_NT == 0.0) {
        std::vector<double> kinks;
        append_kink_nodes(chT.dist, kinks);
        auto f = [&](double b) {
            count();
            return -analytic::value_social_pair(p, eta, chT, chNT, K, b, 0.0);
        };
        // never above the zero-bid cost, which any grid quantization must respect
        return std::min(v0, -grid_max_1d(f, box.lo_T, box.hi_T, step, std::move(kinks)).value);
    }
    if (eta.eta_T == 0.0) {
        std::vector<double> kinks;
        append_kink_nodes(chNT.dist, kinks);
        auto f = [&](double b) {
            count();
            return -analytic::value_social_pair(p, eta, chT, chNT, K, 0.0, b);
        };
        return std::min(v0, -grid_max_1d(f, box.lo_N, box.hi_N, step, std::move(kinks)).value);
    }
    std::vector<double> kinks_T, kinks_N;
    append_kink_nodes(chT.dist, kinks_T);
    append_kink_nodes(chNT.dist, kinks_N);
    auto f = [&](double bT, double bN) {
        count();
        return analytic::value_social_pair(p, eta, chT, chNT, K, bT, bN);
    };
    return std::min(v0, grid_min_2d(f, box.lo_T, box.hi_T, box.lo_N, box.hi_N, step, step,
                                    std::move(kinks_T), std::move(kinks_N))
                            .value);
}

} // namespace detail

/**
 * v(p) when both channels are second price: iterate the Bellman evaluation
 * Phi(v) = value at the truthful bids (v, (1-p)v) from the never-bid upper
 * bound. Phi is monotone and contracts onto the unique fixed point, with
 * finite termination on purely atomic distributions.
 */
inline double second_price_fixed_point(double p, const IntensityProfile& eta, const Channel& chT,
                                       const Channel& chNT, double K) {
    require(chT.rule == AuctionRule::SecondPrice && chNT.rule == AuctionRule::SecondPrice,
            "rule", "both channels must be second price");
    return detail::fixed_point_value(p, eta, chT, chNT, K, [] {});
}

/** v(p) for arbitrary rules: fixed point when fully second price, bounded
 *  grid refinement over [0, K/(eta_I+p eta_S)] per active dimension otherwise. */
inline double value_at_p(double p, const IntensityProfile& eta, const Channel& chT,
                         const Channel& chNT, double K) {
    if (chT.rule == AuctionRule::SecondPrice && chNT.rule == AuctionRule::SecondPrice)
        return detail::fixed_point_value(p, eta, chT, chNT, K, [] {});
    const double v0 = detail::population_upper_bound(K, eta, p);
    return detail::boxed_value(p, eta, chT, chNT, K, {0.0, v0, 0.0, v0}, [] {});
}

/** Mean-field per-capita cost: midpoint quadrature of p -> v(p). */
inline double meanfield_value(const IntensityProfile& eta, const Channel& chT,
                              const Channel& chNT, double K, long quad_n) {
    return analytic::meanfield_value(eta, chT, chNT, K, quad_n,
                                     [](double p, const IntensityProfile& e, const Channel& a,
                                        const Channel& b, double k) {
                                         return value_at_p(p, e, a, b, k);
                                     });
}

struct PopulationOptions {
    bool naive_schedule = false;
};

/**
 * Optimal proportion-based policy for the population model. Each p = k/M
 * gets its value v(p) and the smallest optimal bids, read from the static
 * surpluses at targets v(p) (targeted) and (1-p)v(p) (non-targeted); the
 * total cost is the sum of v over the grid.
 *
 * The default schedule visits proportions by dichotomy (endpoints, then
 * midpoints), shrinking each grid-search box between the bids of already
 * solved neighbors: the smallest non-targeted bid decreases in p, and the
 * smallest targeted bid is monotone in p when eta_NT = 0 (decreasing) or
 * eta_S = 0 (increasing). The naive schedule searches full boxes.
 */
inline SolveReport solve_social_population(const SocialPopulation& spec,
                                           const IntensityProfile& eta, const Channel& chT,
                                           const Channel& chNT,
                                           const PopulationOptions& opt = {}) {
    require(eta.eta_I > 0.0, "eta_I", "must be positive for the population model");
    const int M = spec.M;
    const double K = spec.K;
    const bool fully_sp =
        chT.rule == AuctionRule::SecondPrice && chNT.rule == AuctionRule::SecondPrice;
    std::uint64_t evals = 0;
    auto count = [&evals] { ++evals; };

    std::vector<PolicyRow> rows(static_cast<std::size_t>(M));
    std::vector<bool> done(static_cast<std::size_t>(M), false);
    const double pad = 1e-6 * std::fmax(1.0, K / eta.eta_I);

    auto solve_row = [&](int k, int left, int right) {
        const double p = static_cast<double>(k) / M;
        const double v0 = detail::population_upper_bound(K, eta, p);
        double v;
        if (fully_sp) {
            v = detail::fixed_point_value(p, eta, chT, chNT, K, count);
        } else {
            detail::SearchBox box{0.0, v0, 0.0, v0};
            if (!opt.naive_schedule) {
                // non-targeted smallest bid decreases in p
                if (right >= 0) box.lo_N = std::fmax(0.0, rows[right].bid_NT - pad);
                if (left >= 0) box.hi_N = std::fmin(v0, rows[left].bid_NT + pad);
                box.lo_N = std::fmin(box.lo_N, box.hi_N);
                if (eta.eta_NT == 0.0) { // targeted smallest bid decreases in p
                    if (right >= 0) box.lo_T = std::fmax(0.0, rows[right].bid_T - pad);
                    if (left >= 0) box.hi_T = std::fmin(v0, rows[left].bid_T + pad);
                } else if (eta.eta_S == 0.0) { // and increases when eta_S = 0
                    if (left >= 0) box.lo_T = std::fmax(0.0, rows[left].bid_T - pad);
                    if (right >= 0) box.hi_T = std::fmin(v0, rows[right].bid_T + pad);
                }
                box.lo_T = std::fmin(box.lo_T, box.hi_T);
            }
            v = detail::boxed_value(p, eta, chT, chNT, K, box, count);
        }
        rows[static_cast<std::size_t>(k)] = PolicyRow{
            eta.eta_T > 0.0 ? smallest_argopt(chT, v) : 0.0,
            eta.eta_NT > 0.0 ? smallest_argopt(chNT, (1.0 - p) * v) : 0.0,
            v,
        };
        done[static_cast<std::size_t>(k)] = true;
    };

    if (opt.naive_schedule) {
        for (int k = 0; k < M; ++k) solve_row(k, -1, -1);
    } else {
        solve_row(0, -1, -1);
        if (M > 1) solve_row(M - 1, 0, -1);
        // midpoint recursion; lo and hi rows are always solved first
        const std::function<void(int, int)> recurse = [&](int lo, int hi) {
            if (hi - lo < 2) return;
            const int mid = lo + (hi - lo) / 2;
            solve_row(mid, lo, hi);
            recurse(lo, mid);
            recurse(mid, hi);
        };
        recurse(0, M - 1);
    }

    double total = 0.0;
    for (int k = 0; k < M; ++k) total += rows[static_cast<std::size_t>(k)].v;

    SolveMethod method = SolveMethod::Dichotomy;
    if (opt.naive_schedule)
        method = fully_sp ? SolveMethod::FixedPoint : SolveMethod::GridRefine;
    return SolveReport{total, 0.0, PolicyTable(M, std::move(rows)), evals, method};
}

} // namespace adbid::solver
