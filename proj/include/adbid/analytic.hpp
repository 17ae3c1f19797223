/*
 * Closed-form value functions, optimal-bid formulas and thresholds for the
 * four advertising models. Everything here is an exact expression in the
 * channel functionals P[b >= B] and E[c(b,B) 1{b >= B}]; no sampling.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "model.hpp"

namespace adbid::analytic {

/** The pair (P[b >= B], E[c(b,B) 1{b >= B}]) at one bid. */
struct ChannelFunctionals {
    double win_prob;
    double expected_payment;
};

/** P[b >= B]: probability the bid b wins against the maximal competitor
 *  bid B, winning on ties. Equals the cdf of B at b. */
inline double win_prob(const BidDistribution& dist, double b) {
    require(std::isfinite(b) && b >= 0.0, "b", "must be finite and >= 0");
    return dist.cdf(b);
}

/** E[c(b,B) 1{b >= B}]: expected payment per auction at bid b.
 *  First price pays the bid itself, second price pays the beaten
 *  competitor bid, i.e. the truncated first moment of B. */
inline double expected_payment(const Channel& ch, double b) {
    require(std::isfinite(b) && b >= 0.0, "b", "must be finite and >= 0");
    if (ch.rule == AuctionRule::FirstPrice) return b * ch.dist.cdf(b);
    return ch.dist.truncated_mean(b);
}

inline ChannelFunctionals channel_functionals(const Channel& ch, double b) {
    return ChannelFunctionals{win_prob(ch.dist, b), expected_payment(ch, b)};
}

/**
 * Discounted gain of the purchase model under the constant bid b:
 *
 *   (eta_I K + eta_T E[(K - c(b,B)) 1{b>=B}]) / (eta_I + rho + eta_T P[b>=B])
 */
inline double value_purchase(double K, double rho, double eta_I, double eta_T,
                             const Channel& ch, double b) {
    require(eta_I + rho > 0.0, "rho", "eta_I + rho must be positive");
    const ChannelFunctionals f = channel_functionals(ch, b);
    return (eta_I * K + eta_T * (K * f.win_prob - f.expected_payment))
         / (eta_I + rho + eta_T * f.win_prob);
}

inline double value_purchase(const Purchase& spec, const IntensityProfile& eta,
                             const Channel& ch, double b) {
    return value_purchase(spec.K, spec.rho, eta.eta_I, eta.eta_T, ch, b);
}

/** A unit-rate perpetuity of K discounted at rho is worth K/(1 - e^{-rho})
 *  at the moment it starts; the subscription model is the purchase model
 *  with that lump sum. */
inline double subscription_k_eff(double K, double rho) {
    require(rho > 0.0, "rho", "must be positive");
    return K / (-std::expm1(-rho));
}

inline double value_subscription(double K, double rho, double eta_I, double eta_T,
                                 const Channel& ch, double b) {
    return value_purchase(subscription_k_eff(K, rho), rho, eta_I, eta_T, ch, b);
}

inline double value_subscription(const Subscription& spec, const IntensityProfile& eta,
                                 const Channel& ch, double b) {
    return value_subscription(spec.K, spec.rho, eta.eta_I, eta.eta_T, ch, b);
}

/**
 * Discounted cost of keeping one individual exposed to unit-rate dangers of
 * size K until informed, while bidding b on targeted views:
 *
 *   (K + eta_T E[c(b,B) 1{b>=B}]) / (eta_I + rho + eta_T P[b>=B])
 */
inline double value_social_discount(double K, double rho, double eta_I, double eta_T,
                                    const Channel& ch, double b) {
    require(eta_I + rho > 0.0, "rho", "eta_I + rho must be positive");
    const ChannelFunctionals f = channel_functionals(ch, b);
    return (K + eta_T * f.expected_payment) / (eta_I + rho + eta_T * f.win_prob);
}

inline double value_social_discount(const SocialDiscount& spec, const IntensityProfile& eta,
                                    const Channel& ch, double b) {
    return value_social_discount(spec.K, spec.rho, eta.eta_I, eta.eta_T, ch, b);
}

/**
 * Per-capita cost of the population model in the state with informed
 * proportion p, under stationary bids (bT, bNT). Non-targeted impressions
 * reach an uninformed viewer only a fraction (1-p) of the time, hence the
 * 1/(1-p) payment scaling:
 *
 *   [K + eta_T E[c^T 1{bT>=B^T}] + eta_NT E[c^NT 1{bNT>=B^NT}]/(1-p)]
 *   / [eta_I + eta_T P[bT>=B^T] + eta_NT P[bNT>=B^NT] + p eta_S]
 */
inline double value_social_pair(double p, const IntensityProfile& eta,
                                const Channel& chT, const Channel& chNT,
                                double K, double bT, double bNT) {
    require(p >= 0.0 && p < 1.0, "p", "must lie in [0,1)");
    require(eta.eta_I + p * eta.eta_S > 0.0, "eta_I",
            "eta_I + p*eta_S must be positive");
    const ChannelFunctionals fT = channel_functionals(chT, bT);
    const ChannelFunctionals fN = channel_functionals(chNT, bNT);
    const double num = K + eta.eta_T * fT.expected_payment
                     + eta.eta_NT * fN.expected_payment / (1.0 - p);
    const double den = eta.eta_I + eta.eta_T * fT.win_prob
                     + eta.eta_NT * fN.win_prob + p * eta.eta_S;
    return num / den;
}

/** Against a constant competitor bid, rho*K/(eta_I+rho) is optimal for
 *  every atom position in the purchase model: it wins exactly when winning
 *  is worthwhile. */
inline double dominant_bid_constant(double K, double rho, double eta_I) {
    require(rho > 0.0, "rho", "must be positive");
    require(eta_I >= 0.0, "eta_I", "must be >= 0");
    return rho * K / (eta_I + rho);
}

/**
 * Informed proportion above which winning targeted auctions at constant
 * price B_T stops being worthwhile: p* = (K/B_T - eta_I)/eta_S.
 * With eta_S = 0 the comparison is p-independent, so the threshold is +inf
 * when winning is worthwhile at all and -inf when it never is.
 */
inline double threshold_constant_targeted(double K, double eta_I, double eta_S, double B_T) {
    require(B_T > 0.0, "B_T", "must be positive");
    const double num = K / B_T - eta_I;
    if (eta_S == 0.0)
        return num >= 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    return num / eta_S;
}

/** Same threshold for non-targeted auctions at constant price B_NT:
 *  pbar* = (K - eta_I B_NT)/(K + eta_S B_NT), always < 1. */
inline double threshold_constant_nontargeted(double K, double eta_I, double eta_S, double B_NT) {
    require(B_NT > 0.0, "B_NT", "must be positive");
    return (K - eta_I * B_NT) / (K + eta_S * B_NT);
}

/**
 * Composite midpoint quadrature of p -> v(p) over [0,1) with quad_n nodes;
 * the mean-field limit of the per-capita population cost. The inner solver
 * is injected to keep this layer independent of the search code.
 */
template <class InnerSolver>
inline double meanfield_value(const IntensityProfile& eta, const Channel& chT,
                              const Channel& chNT, double K, long quad_n,
                              InnerSolver&& value_at_p) {
    require(quad_n >= 2, "quad_n", "must be >= 2");
    const double h = 1.0 / static_cast<double>(quad_n);
    double sum = 0.0, carry = 0.0;
    for (long k = 0; k < quad_n; ++k) {
        const double p = (static_cast<double>(k) + 0.5) * h;
        const double term = value_at_p(p, eta, chT, chNT, K) - carry;
        const double next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    return sum * h;
}

/**
 * Exact mean-field value for the targeted-only model against a constant
 * competitor bid B_T, where v(p) is the cheaper of winning always and never:
 *
 *   v(p) = min( (K + eta_T B_T)/(eta_I + eta_T + p eta_S),
 *               K/(eta_I + p eta_S) ),
 *
 * switching at p* from threshold_constant_targeted. Integrating each branch
 * gives logarithms; q = clamp(p*, 0, 1) selects how much of [0,1] wins.
 */
inline double meanfield_closed_form_targeted(const IntensityProfile& eta, double K, double B_T) {
    require(eta.eta_S > 0.0, "eta_S", "must be positive");
    require(eta.eta_NT == 0.0, "eta_NT", "must be 0 for the targeted-only form");
    require(eta.eta_I > 0.0, "eta_I", "must be positive");
    const double pstar = threshold_constant_targeted(K, eta.eta_I, eta.eta_S, B_T);
    const double q = std::clamp(pstar, 0.0, 1.0);
    const double win_part = (K + eta.eta_T * B_T) / eta.eta_S
        * std::log((eta.eta_I + eta.eta_T + q * eta.eta_S) / (eta.eta_I + eta.eta_T));
    const double lose_part = K / eta.eta_S
        * std::log((eta.eta_I + q * eta.eta_S) / (eta.eta_I + eta.eta_S));
    return win_part - lose_part;
}

/** Intermediates of the uniform-competitor first-price optimization after
 *  the change of variable b' = eta_I + rho + eta_T F(b), plus the result. */
struct UniformClosedForm {
    double lambda1;
    double lambda2;
    double a0;
    double a1;
    double a2;
    double b_prime_star;
    double b_bar;
    double b_star;
};

/**
 * Optimal first-price bid against B ~ Uniform(lower, upper) in the purchase
 * model. With b = lambda1 + lambda2 b' the objective becomes
 * (a0 + a1 b' + a2 b'^2)/b', maximal at b'* = sqrt((a0/a2)_+); b_star clamps
 * the corresponding bid b_bar back to the support.
 */
inline UniformClosedForm uniform_firstprice_bid(double K, double rho, double eta_I,
                                                double eta_T, double lower, double upper) {
    require(K >= 0.0, "K", "must be >= 0");
    require(rho > 0.0, "rho", "must be positive");
    require(eta_T > 0.0, "eta_T", "must be positive");
    require(lower >= 0.0 && upper > lower, "upper", "need 0 <= lower < upper");
    UniformClosedForm r{};
    r.lambda2 = (upper - lower) / eta_T;
    r.lambda1 = lower - r.lambda2 * (eta_I + rho);
    r.a0 = r.lambda1 * (eta_I + rho) - K * rho;
    r.a1 = K - r.lambda1 + r.lambda2 * (eta_I + rho);
    r.a2 = -r.lambda2;
    r.b_prime_star = std::sqrt(std::fmax(r.a0 / r.a2, 0.0));
    r.b_bar = r.lambda1 + r.lambda2 * r.b_prime_star;
    r.b_star = std::clamp(r.b_bar, lower, upper);
    return r;
}

inline UniformClosedForm uniform_firstprice_bid(const Purchase& spec, const IntensityProfile& eta,
                                                const UniformBid& dist) {
    return uniform_firstprice_bid(spec.K, spec.rho, eta.eta_I, eta.eta_T,
                                  dist.lower, dist.upper);
}

} // namespace adbid::analytic
