/*
 * JSON (de)serialization for the domain types, nlohmann::json based.
 * Validation stays in the type constructors; parsing funnels through them
 * so malformed documents fail with the offending field named.
 */
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "model.hpp"
#include "montecarlo.hpp"
#include "solver.hpp"

namespace adbid {

inline std::string to_string(AuctionRule rule) {
    return rule == AuctionRule::FirstPrice ? "first_price" : "second_price";
}

inline AuctionRule auction_rule_from_string(const std::string& s) {
    if (s == "first_price") return AuctionRule::FirstPrice;
    if (s == "second_price") return AuctionRule::SecondPrice;
    throw FieldError("rule", "must be \"first_price\" or \"second_price\"");
}

} // namespace adbid

namespace nlohmann {

template <>
struct adl_serializer<adbid::BidDistribution> {
    static void to_json(json& j, const adbid::BidDistribution& d) {
        if (const auto* c = std::get_if<adbid::ConstantBid>(&d.law())) {
            j = json{{"type", "constant"}, {"value", c->value}};
        } else if (const auto* u = std::get_if<adbid::UniformBid>(&d.law())) {
            j = json{{"type", "uniform"}, {"lower", u->lower}, {"upper", u->upper}};
        } else {
            const auto& disc = std::get<adbid::DiscreteBid>(d.law());
            j = json{{"type", "discrete"}, {"atoms", disc.atoms}, {"weights", disc.weights}};
        }
    }

    static adbid::BidDistribution from_json(const json& j) {
        const std::string type = j.at("type").get<std::string>();
        if (type == "constant")
            return adbid::BidDistribution::constant(j.at("value").get<double>());
        if (type == "uniform")
            return adbid::BidDistribution::uniform(j.at("lower").get<double>(),
                                                   j.at("upper").get<double>());
        if (type == "discrete")
            return adbid::BidDistribution::discrete(j.at("atoms").get<std::vector<double>>(),
                                                    j.at("weights").get<std::vector<double>>());
        throw adbid::FieldError("type", "must be \"constant\", \"uniform\" or \"discrete\"");
    }
};

template <>
struct adl_serializer<adbid::Channel> {
    static void to_json(json& j, const adbid::Channel& ch) {
        j = json{{"dist", ch.dist}, {"rule", adbid::to_string(ch.rule)}};
    }

    static adbid::Channel from_json(const json& j) {
        return adbid::Channel{j.at("dist").get<adbid::BidDistribution>(),
                              adbid::auction_rule_from_string(j.at("rule").get<std::string>())};
    }
};

template <>
struct adl_serializer<adbid::IntensityProfile> {
    static void to_json(json& j, const adbid::IntensityProfile& eta) {
        j = json{{"eta_I", eta.eta_I},
                 {"eta_T", eta.eta_T},
                 {"eta_NT", eta.eta_NT},
                 {"eta_S", eta.eta_S}};
    }

    static adbid::IntensityProfile from_json(const json& j) {
        return adbid::IntensityProfile(j.at("eta_I").get<double>(), j.at("eta_T").get<double>(),
                                       j.at("eta_NT").get<double>(), j.at("eta_S").get<double>());
    }
};

template <>
struct adl_serializer<adbid::ModelSpec> {
    static void to_json(json& j, const adbid::ModelSpec& m) {
        if (const auto* p = std::get_if<adbid::Purchase>(&m)) {
            j = json{{"type", "purchase"}, {"K", p->K}, {"rho", p->rho}};
        } else if (const auto* s = std::get_if<adbid::Subscription>(&m)) {
            j = json{{"type", "subscription"}, {"K", s->K}, {"rho", s->rho}};
        } else if (const auto* d = std::get_if<adbid::SocialDiscount>(&m)) {
            j = json{{"type", "social_discount"}, {"K", d->K}, {"rho", d->rho}};
        } else {
            const auto& pop = std::get<adbid::SocialPopulation>(m);
            j = json{{"type", "social_population"}, {"K", pop.K}, {"M", pop.M}};
        }
    }

    static adbid::ModelSpec from_json(const json& j) {
        const std::string type = j.at("type").get<std::string>();
        if (type == "purchase")
            return adbid::Purchase(j.at("K").get<double>(), j.at("rho").get<double>());
        if (type == "subscription")
            return adbid::Subscription(j.at("K").get<double>(), j.at("rho").get<double>());
        if (type == "social_discount")
            return adbid::SocialDiscount(j.at("K").get<double>(), j.at("rho").get<double>());
        if (type == "social_population")
            return adbid::SocialPopulation(j.at("K").get<double>(), j.at("M").get<int>());
        throw adbid::FieldError("type",
                                "must be \"purchase\", \"subscription\", \"social_discount\" or "
                                "\"social_population\"");
    }
};

template <>
struct adl_serializer<adbid::PolicyTable> {
    static void to_json(json& j, const adbid::PolicyTable& t) {
        json rows = json::array();
        for (int k = 0; k < t.M(); ++k) {
            const auto& r = t.row(k);
            rows.push_back(json{
                {"p", t.p(k)}, {"bid_T", r.bid_T}, {"bid_NT", r.bid_NT}, {"v", r.v}});
        }
        j = json{{"M", t.M()}, {"rows", std::move(rows)}};
    }

    static adbid::PolicyTable from_json(const json& j) {
        std::vector<adbid::PolicyRow> rows;
        for (const auto& r : j.at("rows")) {
            rows.push_back(adbid::PolicyRow{r.at("bid_T").get<double>(),
                                            r.at("bid_NT").get<double>(),
                                            r.at("v").get<double>()});
        }
        return adbid::PolicyTable(j.at("M").get<int>(), std::move(rows));
    }
};

} // namespace nlohmann

namespace adbid {

inline void to_json(nlohmann::json& j, const SimEstimate& e) {
    j = nlohmann::json{{"mean", e.mean}, {"std_error", e.std_error}, {"paths", e.paths}};
}

inline void from_json(const nlohmann::json& j, SimEstimate& e) {
    e.mean = j.at("mean").get<double>();
    e.std_error = j.at("std_error").get<double>();
    e.paths = j.at("paths").get<std::uint64_t>();
}

namespace mc {

inline void to_json(nlohmann::json& j, const SimConfig& c) {
    j = nlohmann::json{
        {"paths", c.paths}, {"seed", c.seed}, {"max_events_per_path", c.max_events_per_path}};
}

inline void from_json(const nlohmann::json& j, SimConfig& c) {
    c.paths = j.at("paths").get<std::uint64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.max_events_per_path =
        j.value("max_events_per_path", static_cast<std::uint64_t>(10'000'000));
}

} // namespace mc

namespace solver {

inline void to_json(nlohmann::json& j, const SolveReport& r) {
    j = nlohmann::json{{"optimal_value", r.optimal_value},
                       {"bid_min", r.bid_min},
                       {"evaluations", r.evaluations},
                       {"method", to_string(r.method)}};
    if (r.policy) j["policy"] = *r.policy;
}

} // namespace solver

} // namespace adbid
