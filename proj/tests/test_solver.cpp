#include <catch2/catch_amalgamated.hpp>

#include <adbid/solver.hpp>

#include <cmath>
#include <random>

using namespace adbid;
using namespace adbid::solver;
using Catch::Approx;

namespace {

// static per-auction surplus maximized by smallest_argopt
double auction_surplus(const Channel& ch, double target, double b) {
    return target * analytic::win_prob(ch.dist, b) - analytic::expected_payment(ch, b);
}

// brute scan over a fine grid plus all kink points, leftmost maximizer
double scan_argopt(const Channel& ch, double target, double hi) {
    std::vector<double> nodes;
    for (double b = 0.0; b <= hi; b += 1e-4 * std::fmax(1.0, hi)) nodes.push_back(b);
    if (const auto* u = std::get_if<UniformBid>(&ch.dist.law())) {
        nodes.push_back(u->lower);
        nodes.push_back(u->upper);
    } else if (const auto* c = std::get_if<ConstantBid>(&ch.dist.law())) {
        nodes.push_back(c->value);
    } else {
        for (double a : std::get<DiscreteBid>(ch.dist.law()).atoms) nodes.push_back(a);
    }
    std::sort(nodes.begin(), nodes.end());
    double best_b = 0.0, best_v = auction_surplus(ch, target, 0.0);
    for (double b : nodes) {
        const double v = auction_surplus(ch, target, b);
        if (v > best_v + 1e-12 * std::fmax(1.0, std::fabs(best_v))) {
            best_v = v;
            best_b = b;
        }
    }
    return best_b;
}

BidDistribution random_dist(std::minstd_rand& gen, int kind) {
    std::uniform_real_distribution<double> u01(0.05, 1.5);
    if (kind == 0) return BidDistribution::constant(u01(gen));
    if (kind == 1) {
        const double l = u01(gen);
        return BidDistribution::uniform(l, l + 0.1 + u01(gen));
    }
    std::vector<double> atoms{u01(gen)};
    atoms.push_back(atoms.back() + 0.2 + u01(gen) / 2);
    atoms.push_back(atoms.back() + 0.2 + u01(gen) / 2);
    std::vector<double> w{0.2, 0.5, 0.3};
    return BidDistribution::discrete(atoms, w);
}

} // namespace

TEST_CASE("smallest optimal auction bid, frozen cases") {
    using AR = AuctionRule;
    auto c04 = Channel{BidDistribution::constant(0.4), AR::SecondPrice};
    CHECK(smallest_argopt(c04, 1.4 / 1.5) == 0.4);
    CHECK(smallest_argopt(Channel{BidDistribution::constant(2.0), AR::SecondPrice}, 1.0) == 0.0);
    CHECK(smallest_argopt(Channel{BidDistribution::constant(1.0), AR::SecondPrice}, 1.0) == 1.0);

    auto uni = BidDistribution::uniform(0.2, 1.0);
    CHECK(smallest_argopt(Channel{uni, AR::SecondPrice}, 0.5) == 0.5);
    CHECK(smallest_argopt(Channel{uni, AR::SecondPrice}, 0.1) == 0.0);
    CHECK(smallest_argopt(Channel{uni, AR::SecondPrice}, 2.0) == 1.0);
    CHECK(smallest_argopt(Channel{uni, AR::FirstPrice}, 0.8) == Approx(0.5).epsilon(1e-14));
    CHECK(smallest_argopt(Channel{uni, AR::FirstPrice}, 0.1) == 0.0);
    CHECK(smallest_argopt(Channel{uni, AR::FirstPrice}, 3.0) == 1.0);

    // winning at the atom with zero surplus is not worth a positive bid
    CHECK(smallest_argopt(Channel{BidDistribution::constant(0.5), AR::FirstPrice}, 0.5) == 0.0);
    CHECK(smallest_argopt(Channel{BidDistribution::constant(0.5), AR::FirstPrice}, 0.8) == 0.5);

    auto disc = BidDistribution::discrete({0.2, 0.5, 0.9}, {0.3, 0.3, 0.4});
    CHECK(smallest_argopt(Channel{disc, AR::FirstPrice}, 0.6) == 0.2);
    CHECK(smallest_argopt(Channel{disc, AR::FirstPrice}, 1.2) == 0.5);
    CHECK(smallest_argopt(Channel{disc, AR::SecondPrice}, 0.6) == 0.5);
    CHECK(smallest_argopt(Channel{disc, AR::SecondPrice}, 0.1) == 0.0);
}

TEST_CASE("smallest optimal auction bid against the exhaustive scan") {
    std::minstd_rand gen(99);
    std::uniform_real_distribution<double> t01(0.0, 2.5);
    for (int i = 0; i < 120; ++i) {
        Channel ch{random_dist(gen, i % 3),
                   (i / 3) % 2 ? AuctionRule::FirstPrice : AuctionRule::SecondPrice};
        const double target = t01(gen);
        const double b = smallest_argopt(ch, target);
        const double hi = ch.dist.support_max() + 0.5;
        const double s = scan_argopt(ch, target, hi);
        // attains the scan's value and sits at most one grid step to its right
        CHECK(auction_surplus(ch, target, b) >=
              auction_surplus(ch, target, s) - 1e-9);
        CHECK(b <= s + 1.5e-4 * std::fmax(1.0, hi));
        CHECK(b <= std::fmax(target, 0.0) + 1e-15);
    }
}

TEST_CASE("purchase solve, frozen instances") {
    {
        Purchase spec(2.0, 1.0);
        IntensityProfile eta(1.0, 1.0, 0.0, 0.0);
        Channel ch{BidDistribution::constant(0.5), AuctionRule::SecondPrice};
        const auto r = solve_purchase(spec, eta, ch);
        CHECK(r.optimal_value == Approx(3.5 / 3.0).epsilon(1e-12));
        CHECK(r.bid_min == 0.5);
        CHECK(r.method == SolveMethod::ClosedForm);
        CHECK(!r.policy);
    }
    {
        Purchase spec(3.0, 1.0);
        IntensityProfile eta(1.0, 2.0, 0.0, 0.0);
        Channel ch{BidDistribution::uniform(0.0, 1.0), AuctionRule::FirstPrice};
        const auto r = solve_purchase(spec, eta, ch);
        CHECK(r.bid_min == Approx(-1.0 + std::sqrt(2.5)).epsilon(1e-12));
        CHECK(r.optimal_value ==
              Approx(analytic::value_purchase(spec, eta, ch, r.bid_min)).epsilon(1e-12));
        CHECK(r.method == SolveMethod::ClosedForm);
    }
    {
        // no targeted channel traffic: value is bid-independent
        Purchase spec(2.0, 1.0);
        IntensityProfile eta(1.0, 0.0, 0.0, 0.0);
        Channel ch{BidDistribution::constant(0.5), AuctionRule::SecondPrice};
        const auto r = solve_purchase(spec, eta, ch);
        CHECK(r.optimal_value == Approx(1.0).epsilon(1e-12));
        CHECK(r.bid_min == 0.0);
    }
}

TEST_CASE("purchase solve report invariants on random instances") {
    std::minstd_rand gen(17);
    std::uniform_real_distribution<double> u01(0.1, 1.5);
    for (int i = 0; i < 60; ++i) {
        Purchase spec(u01(gen), u01(gen));
        IntensityProfile eta(u01(gen), u01(gen), 0.0, 0.0);
        Channel ch{random_dist(gen, i % 3),
                   (i / 3) % 2 ? AuctionRule::FirstPrice : AuctionRule::SecondPrice};
        const auto r = solve_purchase(spec, eta, ch);
        const double lo = eta.eta_I * spec.K / (eta.eta_I + spec.rho);
        const double hi_bid = spec.rho * spec.K / (eta.eta_I + spec.rho);
        CHECK(r.optimal_value >= lo - 1e-12);
        CHECK(r.optimal_value <= spec.K + 1e-12);
        CHECK(r.bid_min <= spec.K - r.optimal_value + 1e-12);
        CHECK(spec.K - r.optimal_value <= hi_bid + 1e-9);
        // the reported bid attains the reported value
        CHECK(analytic::value_purchase(spec, eta, ch, r.bid_min) ==
              Approx(r.optimal_value).margin(1e-9));
        CHECK(r.evaluations > 0);
    }
}

TEST_CASE("subscription solve equals purchase solve on the lumped payment") {
    std::minstd_rand gen(31);
    std::uniform_real_distribution<double> u01(0.1, 1.5);
    for (int i = 0; i < 30; ++i) {
        Subscription sub(u01(gen), u01(gen));
        IntensityProfile eta(u01(gen), u01(gen), 0.0, 0.0);
        Channel ch{random_dist(gen, i % 3),
                   i % 2 ? AuctionRule::FirstPrice : AuctionRule::SecondPrice};
        const auto rs = solve_subscription(sub, eta, ch);
        const auto rp = solve_purchase(
            Purchase(analytic::subscription_k_eff(sub.K, sub.rho), sub.rho), eta, ch);
        CHECK(rs.optimal_value == rp.optimal_value);
        CHECK(rs.bid_min == rp.bid_min);
    }
}

TEST_CASE("social discount solve, frozen instances") {
    {
        SocialDiscount spec(1.0, 0.0);
        IntensityProfile eta(0.5, 1.0, 0.0, 0.0);
        Channel ch{BidDistribution::constant(0.4), AuctionRule::SecondPrice};
        const auto r = solve_social_discount(spec, eta, ch);
        CHECK(r.optimal_value == Approx(1.4 / 1.5).epsilon(1e-12));
        CHECK(r.bid_min == 0.4);
    }
    {
        // competitor too expensive: stay out and absorb the danger cost
        SocialDiscount spec(1.0, 0.5);
        IntensityProfile eta(0.5, 1.0, 0.0, 0.0);
        Channel ch{BidDistribution::constant(5.0), AuctionRule::SecondPrice};
        const auto r = solve_social_discount(spec, eta, ch);
        CHECK(r.optimal_value == Approx(1.0).epsilon(1e-12));
        CHECK(r.bid_min == 0.0);
    }
    CHECK_THROWS_AS(solve_social_discount(SocialDiscount(1.0, 0.0),
                                          IntensityProfile(0.0, 1.0, 0.0, 0.0),
                                          Channel{BidDistribution::constant(0.4),
                                                  AuctionRule::SecondPrice}),
                    FieldError);
}

TEST_CASE("social discount solve against a brute scan") {
    std::minstd_rand gen(57);
    std::uniform_real_distribution<double> u01(0.1, 1.2);
    for (int i = 0; i < 24; ++i) {
        SocialDiscount spec(u01(gen), u01(gen));
        IntensityProfile eta(u01(gen), u01(gen), 0.0, 0.0);
        Channel ch{random_dist(gen, i % 3),
                   (i / 3) % 2 ? AuctionRule::FirstPrice : AuctionRule::SecondPrice};
        const auto r = solve_social_discount(spec, eta, ch);
        const double hi = spec.K / (eta.eta_I + spec.rho);
        double best = analytic::value_social_discount(spec, eta, ch, 0.0);
        for (double b = 0.0; b <= hi; b += 1e-5 * std::fmax(1.0, hi))
            best = std::min(best, analytic::value_social_discount(spec, eta, ch, b));
        if (const auto* c = std::get_if<ConstantBid>(&ch.dist.law()))
            best = std::min(best, analytic::value_social_discount(spec, eta, ch, c->value));
        if (const auto* d = std::get_if<DiscreteBid>(&ch.dist.law()))
            for (double a : d->atoms)
                best = std::min(best, analytic::value_social_discount(spec, eta, ch, a));
        CHECK(r.optimal_value == Approx(best).margin(1e-7));
        CHECK(r.optimal_value <= hi + 1e-12);
        CHECK(r.bid_min <= r.optimal_value + 1e-15);
        CHECK(analytic::value_social_discount(spec, eta, ch, r.bid_min) ==
              Approx(r.optimal_value).margin(1e-9));
    }
}

namespace {

// for constant-atom channels the per-state cost is the best of four win/lose mixes
double four_combo_cost(double p, const IntensityProfile& eta, const Channel& chT,
                       const Channel& chNT, double K) {
    const double aT = std::get<ConstantBid>(chT.dist.law()).value;
    const double aN = std::get<ConstantBid>(chNT.dist.law()).value;
    double best = std::numeric_limits<double>::infinity();
    for (int wT = 0; wT < 2; ++wT)
        for (int wN = 0; wN < 2; ++wN) {
            const double v = analytic::value_social_pair(p, eta, chT, chNT, K,
                                                         wT ? aT : 0.0, wN ? aN : 0.0);
            best = std::min(best, v);
        }
    return best;
}

} // namespace

TEST_CASE("second-price fixed point matches the four-combo oracle") {
    std::minstd_rand gen(73);
    std::uniform_real_distribution<double> u01(0.1, 1.2);
    for (int i = 0; i < 40; ++i) {
        IntensityProfile eta(u01(gen), u01(gen), u01(gen), u01(gen));
        Channel chT{BidDistribution::constant(u01(gen)), AuctionRule::SecondPrice};
        Channel chNT{BidDistribution::constant(u01(gen)), AuctionRule::SecondPrice};
        const double K = u01(gen);
        const double p = (i % 4) / 4.0;
        const double v = second_price_fixed_point(p, eta, chT, chNT, K);
        CHECK(v == Approx(four_combo_cost(p, eta, chT, chNT, K)).epsilon(1e-10));
        CHECK(v <= K / (eta.eta_I + p * eta.eta_S) + 1e-12);
    }
}

TEST_CASE("second-price fixed point is self-consistent and matches a 2-d scan") {
    std::minstd_rand gen(113);
    std::uniform_real_distribution<double> u01(0.1, 1.0);
    for (int i = 0; i < 8; ++i) {
        IntensityProfile eta(0.2 + u01(gen), u01(gen), u01(gen), u01(gen));
        Channel chT{i % 2 ? BidDistribution::uniform(0.1, 0.8)
                          : BidDistribution::constant(0.4),
                    AuctionRule::SecondPrice};
        Channel chNT{i % 2 ? BidDistribution::constant(0.3)
                           : BidDistribution::uniform(0.05, 0.6),
                     AuctionRule::SecondPrice};
        const double K = u01(gen);
        const double p = (i % 4) / 4.0;
        const double v = second_price_fixed_point(p, eta, chT, chNT, K);
        // self-consistency: truthful bids derived from v reproduce v
        const double bT = smallest_argopt(chT, v);
        const double bN = smallest_argopt(chNT, (1.0 - p) * v);
        CHECK(analytic::value_social_pair(p, eta, chT, chNT, K, bT, bN) ==
              Approx(v).margin(1e-9));
        // independent 2-d scan
        const double v0 = K / (eta.eta_I + p * eta.eta_S);
        double best = std::numeric_limits<double>::infinity();
        const double step = 1e-3 * v0;
        for (double x = 0.0; x <= v0 + step / 2; x += step)
            for (double y = 0.0; y <= v0 + step / 2; y += step)
                best = std::min(best,
                                analytic::value_social_pair(p, eta, chT, chNT, K, x, y));
        CHECK(v == Approx(best).margin(1e-3));
        CHECK(v <= best + 1e-9);
    }
}

TEST_CASE("population solve, frozen M=4 instance") {
    SocialPopulation spec(1.0, 4);
    IntensityProfile eta(0.5, 1.0, 0.0, 1.0);
    Channel chT{BidDistribution::constant(0.4), AuctionRule::SecondPrice};
    Channel chNT{BidDistribution::constant(0.0), AuctionRule::SecondPrice};
    const auto r = solve_social_population(spec, eta, chT, chNT);
    REQUIRE(r.policy.has_value());
    REQUIRE(r.policy->M() == 4);
    const double expected[4] = {1.4 / 1.5, 0.8, 0.7, 1.4 / 2.25};
    for (int k = 0; k < 4; ++k) {
        CHECK(r.policy->row(k).v == Approx(expected[k]).epsilon(1e-10));
        CHECK(r.policy->row(k).bid_T == 0.4);
        CHECK(r.policy->row(k).bid_NT == 0.0);
    }
    CHECK(r.optimal_value == Approx(1.4 / 1.5 + 0.8 + 0.7 + 1.4 / 2.25).epsilon(1e-10));
    CHECK(r.method == SolveMethod::Dichotomy);

    const auto rn = solve_social_population(spec, eta, chT, chNT, PopulationOptions{true});
    for (int k = 0; k < 4; ++k) CHECK(rn.policy->row(k).v == r.policy->row(k).v);
}

TEST_CASE("population solve, M=1 and degenerate guards") {
    SocialPopulation spec(1.0, 1);
    IntensityProfile eta(0.5, 1.0, 0.0, 1.0);
    Channel chT{BidDistribution::constant(0.4), AuctionRule::SecondPrice};
    Channel chNT{BidDistribution::constant(0.0), AuctionRule::SecondPrice};
    const auto r = solve_social_population(spec, eta, chT, chNT);
    CHECK(r.optimal_value == Approx(1.4 / 1.5).epsilon(1e-10));
    CHECK(r.policy->row(0).bid_T == 0.4);

    CHECK_THROWS_AS(solve_social_population(spec, IntensityProfile(0.0, 1.0, 0.0, 1.0), chT,
                                            chNT),
                    FieldError);
}

TEST_CASE("population solve without any auction channel is the pure death chain") {
    SocialPopulation spec(1.0, 2);
    IntensityProfile eta(1.0, 0.0, 0.0, 0.0);
    Channel chT{BidDistribution::constant(0.4), AuctionRule::SecondPrice};
    Channel chNT{BidDistribution::constant(0.0), AuctionRule::SecondPrice};
    const auto r = solve_social_population(spec, eta, chT, chNT);
    CHECK(r.optimal_value == Approx(2.0).epsilon(1e-12));
    CHECK(r.policy->row(0).v == Approx(1.0).epsilon(1e-12));
    CHECK(r.policy->row(1).v == Approx(1.0).epsilon(1e-12));
    CHECK(r.policy->row(0).bid_T == 0.0);
}

TEST_CASE("dichotomy schedule reproduces the naive schedule with fewer evaluations") {
    SocialPopulation spec(0.8, 32);
    IntensityProfile eta(0.4, 0.9, 0.5, 0.7);
    Channel chT{BidDistribution::uniform(0.05, 0.7), AuctionRule::FirstPrice};
    Channel chNT{BidDistribution::constant(0.25), AuctionRule::SecondPrice};
    const auto fast = solve_social_population(spec, eta, chT, chNT);
    const auto slow = solve_social_population(spec, eta, chT, chNT, PopulationOptions{true});
    REQUIRE(fast.policy.has_value());
    REQUIRE(slow.policy.has_value());
    for (int k = 0; k < 32; ++k) {
        CHECK(fast.policy->row(k).v == Approx(slow.policy->row(k).v).margin(1e-9));
        CHECK(fast.policy->row(k).bid_T == Approx(slow.policy->row(k).bid_T).margin(1e-6));
        CHECK(fast.policy->row(k).bid_NT == Approx(slow.policy->row(k).bid_NT).margin(1e-6));
    }
    CHECK(fast.evaluations < slow.evaluations);
    CHECK(fast.method == SolveMethod::Dichotomy);
    CHECK(slow.method == SolveMethod::GridRefine);
}

TEST_CASE("population policy bounds and monotone bids") {
    std::minstd_rand gen(7);
    std::uniform_real_distribution<double> u01(0.1, 1.0);
    for (int i = 0; i < 6; ++i) {
        SocialPopulation spec(u01(gen) + 0.2, 8);
        IntensityProfile eta(0.2 + u01(gen), u01(gen), u01(gen), u01(gen));
        Channel chT{random_dist(gen, i % 3), AuctionRule::SecondPrice};
        Channel chNT{random_dist(gen, (i + 1) % 3), AuctionRule::SecondPrice};
        const auto r = solve_social_population(spec, eta, chT, chNT);
        double prev_nt = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 8; ++k) {
            const double p = k / 8.0;
            const auto& row = r.policy->row(k);
            CHECK(row.v <= spec.K / (eta.eta_I + p * eta.eta_S) + 1e-12);
            CHECK(row.bid_T <= row.v + 1e-12);
            CHECK(row.bid_NT <= row.v + 1e-12);
            CHECK(row.bid_NT <= prev_nt + 1e-12);
            prev_nt = row.bid_NT;
        }
    }
}

TEST_CASE("mean-field integral matches the closed form on the canonical instance") {
    IntensityProfile eta(0.5, 1.0, 0.0, 1.0);
    Channel chT{BidDistribution::constant(0.4), AuctionRule::SecondPrice};
    Channel chNT{BidDistribution::constant(0.0), AuctionRule::SecondPrice};
    const double quad = meanfield_value(eta, chT, chNT, 1.0, 100000);
    const double closed = analytic::meanfield_closed_form_targeted(eta, 1.0, 0.4);
    CHECK(quad == Approx(closed).margin(1e-7));
    CHECK(closed == Approx(1.4 * std::log(5.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("solve method names") {
    CHECK(std::string(to_string(SolveMethod::GridRefine)) == "grid_refine");
    CHECK(std::string(to_string(SolveMethod::ClosedForm)) == "closed_form");
    CHECK(std::string(to_string(SolveMethod::FixedPoint)) == "fixed_point");
    CHECK(std::string(to_string(SolveMethod::Dichotomy)) == "dichotomy");
}
