/*
 * Core value types for the bidding model: bid distributions, auction rules,
 * event intensities, model parameters, policies and simulation estimates.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace adbid {

/** Invalid input, carrying the name of the offending field. */
class FieldError : public std::invalid_argument {
public:
    FieldError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline void require(bool cond, const char* field, const char* what) {
    if (!cond) throw FieldError(field, what);
}

/** Payment rule of the auction hosting the ad slot. */
enum class AuctionRule { FirstPrice, SecondPrice };

/** Price paid on a win: the bid itself under first price, the best
 *  competing bid under second price. */
inline double payment_on_win(AuctionRule rule, double bid, double best_other) {
    return rule == AuctionRule::FirstPrice ? bid : best_other;
}

struct ConstantBid {
    double value;
};

struct UniformBid {
    double lower;
    double upper;
};

struct DiscreteBid {
    std::vector<double> atoms;   // strictly increasing, nonnegative
    std::vector<double> weights; // positive, sum to 1
};

/**
 * Distribution of the highest competing bid B. All three variants support
 * exact evaluation of the cdf P[B <= b] and the truncated mean E[B 1{B<=b}],
 * which is everything the closed-form layer needs.
 */
class BidDistribution {
public:
    using Law = std::variant<ConstantBid, UniformBid, DiscreteBid>;

    static BidDistribution constant(double value) {
        require(std::isfinite(value) && value >= 0.0, "value", "must be finite and >= 0");
        return BidDistribution(ConstantBid{value});
    }

    static BidDistribution uniform(double lower, double upper) {
        require(std::isfinite(lower) && lower >= 0.0, "lower", "must be finite and >= 0");
        require(std::isfinite(upper) && upper > lower, "upper", "must be finite and > lower");
        return BidDistribution(UniformBid{lower, upper});
    }

    static BidDistribution discrete(std::vector<double> atoms, std::vector<double> weights) {
        require(!atoms.empty(), "atoms", "must be nonempty");
        require(atoms.size() == weights.size(), "weights", "must match atoms in length");
        double prev = -1.0;
        for (double a : atoms) {
            require(std::isfinite(a) && a >= 0.0, "atoms", "must be finite and >= 0");
            require(a > prev, "atoms", "must be strictly increasing");
            prev = a;
        }
        double total = 0.0;
        for (double w : weights) {
            require(std::isfinite(w) && w > 0.0, "weights", "must be positive");
            total += w;
        }
        require(std::fabs(total - 1.0) <= 1e-12, "weights", "must sum to 1");
        return BidDistribution(DiscreteBid{std::move(atoms), std::move(weights)});
    }

    const Law& law() const noexcept { return law_; }

    /** P[B <= b]. */
    double cdf(double b) const {
        if (const auto* c = std::get_if<ConstantBid>(&law_)) return b >= c->value ? 1.0 : 0.0;
        if (const auto* u = std::get_if<UniformBid>(&law_)) {
            if (b <= u->lower) return 0.0;
            if (b >= u->upper) return 1.0;
            return (b - u->lower) / (u->upper - u->lower);
        }
        const auto& d = std::get<DiscreteBid>(law_);
        double p = 0.0;
        for (std::size_t i = 0; i < d.atoms.size() && d.atoms[i] <= b; ++i) p += d.weights[i];
        return p;
    }

    /** E[B 1{B <= b}]. */
    double truncated_mean(double b) const {
        if (const auto* c = std::get_if<ConstantBid>(&law_)) return b >= c->value ? c->value : 0.0;
        if (const auto* u = std::get_if<UniformBid>(&law_)) {
            if (b <= u->lower) return 0.0;
            double t = std::fmin(b, u->upper);
            return (t * t - u->lower * u->lower) / (2.0 * (u->upper - u->lower));
        }
        const auto& d = std::get<DiscreteBid>(law_);
        double m = 0.0;
        for (std::size_t i = 0; i < d.atoms.size() && d.atoms[i] <= b; ++i)
            m += d.atoms[i] * d.weights[i];
        return m;
    }

    double mean() const { return truncated_mean(support_max()); }

    double support_min() const {
        if (const auto* c = std::get_if<ConstantBid>(&law_)) return c->value;
        if (const auto* u = std::get_if<UniformBid>(&law_)) return u->lower;
        return std::get<DiscreteBid>(law_).atoms.front();
    }

    double support_max() const {
        if (const auto* c = std::get_if<ConstantBid>(&law_)) return c->value;
        if (const auto* u = std::get_if<UniformBid>(&law_)) return u->upper;
        return std::get<DiscreteBid>(law_).atoms.back();
    }

private:
    explicit BidDistribution(Law law) : law_(std::move(law)) {}
    Law law_;
};

/** An auction channel: who we bid against and how the winner pays. */
struct Channel {
    BidDistribution dist;
    AuctionRule rule;
};

/**
 * Exponential event intensities per individual. eta_I: spontaneous informing
 * (search, word of mouth), eta_T: targeted ad auctions, eta_NT: non-targeted
 * ad auctions, eta_S: social informing by an already-informed contact.
 * The danger intensity of the social models is normalised to 1.
 */
struct IntensityProfile {
    double eta_I;
    double eta_T;
    double eta_NT;
    double eta_S;

    IntensityProfile(double eta_I_, double eta_T_, double eta_NT_, double eta_S_)
        : eta_I(eta_I_), eta_T(eta_T_), eta_NT(eta_NT_), eta_S(eta_S_) {
        require(std::isfinite(eta_I) && eta_I >= 0.0, "eta_I", "must be finite and >= 0");
        require(std::isfinite(eta_T) && eta_T >= 0.0, "eta_T", "must be finite and >= 0");
        require(std::isfinite(eta_NT) && eta_NT >= 0.0, "eta_NT", "must be finite and >= 0");
        require(std::isfinite(eta_S) && eta_S >= 0.0, "eta_S", "must be finite and >= 0");
    }
};

/** One-shot conversion worth K once informed, future discounted at rate rho. */
struct Purchase {
    double K;
    double rho;

    Purchase(double K_, double rho_) : K(K_), rho(rho_) {
        require(std::isfinite(K) && K > 0.0, "K", "must be finite and > 0");
        require(std::isfinite(rho) && rho > 0.0, "rho", "must be finite and > 0");
    }
};

/** Recurring conversion: K at each unit time after informing, discounted at rho. */
struct Subscription {
    double K;
    double rho;

    Subscription(double K_, double rho_) : K(K_), rho(rho_) {
        require(std::isfinite(K) && K > 0.0, "K", "must be finite and > 0");
        require(std::isfinite(rho) && rho > 0.0, "rho", "must be finite and > 0");
    }
};

/** Single individual exposed to unit-rate dangers costing K until informed. */
struct SocialDiscount {
    double K;
    double rho;

    SocialDiscount(double K_, double rho_) : K(K_), rho(rho_) {
        require(std::isfinite(K) && K > 0.0, "K", "must be finite and > 0");
        require(std::isfinite(rho) && rho >= 0.0, "rho", "must be finite and >= 0");
    }
};

/** Population of M individuals, undiscounted cost, social informing allowed. */
struct SocialPopulation {
    double K;
    int M;

    SocialPopulation(double K_, int M_) : K(K_), M(M_) {
        require(std::isfinite(K) && K > 0.0, "K", "must be finite and > 0");
        require(M >= 1, "M", "must be >= 1");
    }
};

using ModelSpec = std::variant<Purchase, Subscription, SocialDiscount, SocialPopulation>;

struct PolicyRow {
    double bid_T;
    double bid_NT;
    double v;
};

/**
 * Stationary population policy: one row per informed fraction p = k/M,
 * k = 0..M-1, holding the bids used in that state and the per-capita value.
 */
class PolicyTable {
public:
    PolicyTable(int M, std::vector<PolicyRow> rows) : M_(M), rows_(std::move(rows)) {
        require(M_ >= 1, "M", "must be >= 1");
        require(static_cast<int>(rows_.size()) == M_, "rows", "must have exactly M entries");
        for (const auto& r : rows_) {
            require(std::isfinite(r.bid_T) && r.bid_T >= 0.0, "bid_T", "must be finite and >= 0");
            require(std::isfinite(r.bid_NT) && r.bid_NT >= 0.0, "bid_NT", "must be finite and >= 0");
            require(std::isfinite(r.v) && r.v >= 0.0, "v", "must be finite and >= 0");
        }
    }

    int M() const noexcept { return M_; }
    double p(int k) const { return static_cast<double>(k) / M_; }
    const PolicyRow& row(int k) const { return rows_.at(static_cast<std::size_t>(k)); }
    const std::vector<PolicyRow>& rows() const noexcept { return rows_; }

private:
    int M_;
    std::vector<PolicyRow> rows_;
};

/** Monte Carlo estimate: sample mean, standard error s/sqrt(n), path count. */
struct SimEstimate {
    double mean;
    double std_error;
    std::uint64_t paths;
};

} // namespace adbid
