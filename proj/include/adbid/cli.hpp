/*
 * Command implementations behind the command-line front end: config loading,
 * solve/simulate/sweep/meanfield drivers, CSV/JSON/table artifact writers.
 * Kept header-only and stream-based so tests can drive commands directly.
 *
 * Exit codes: 0 success, 2 configuration or validation failure, 3 solver or
 * simulation failure, 4 Monte Carlo drift (|z| above threshold), 5 a
 * monotonicity verdict line reports a violation.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "serialization.hpp"

namespace adbid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRun = 3;
inline constexpr int kExitDrift = 4;
inline constexpr int kExitVerdict = 5;

struct SweepSpec {
    std::string param;
    std::vector<double> values;
};

struct OutputSpec {
    std::string path; // empty means stdout
    std::string format;
};

struct RunConfig {
    ModelSpec model;
    IntensityProfile eta;
    Channel channel_T;
    std::optional<Channel> channel_NT;
    std::optional<mc::SimConfig> sim;
    std::optional<double> bid;
    std::optional<std::string> policy_file;
    std::optional<SweepSpec> sweep;
    std::optional<OutputSpec> output;
    long quad_n = 100000;
    std::vector<int> m_list;
    double z_threshold = 5.0;
};

/** Flag overrides applied on top of the JSON document. */
struct Overrides {
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> paths;
    int threads = 1;
    bool naive_schedule = false;
    bool literal_danger_jumps = false;
    bool variance_reduced_accrual = false;
    std::optional<std::string> log_events;
};

inline std::string fmt17(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig cfg{
        j.at("model").get<ModelSpec>(),
        j.at("eta").get<IntensityProfile>(),
        j.at("channel_T").get<Channel>(),
        std::nullopt,
        std::nullopt,
        std::nullopt,
        std::nullopt,
        std::nullopt,
        std::nullopt,
        100000,
        {},
        5.0,
    };
    if (j.contains("channel_NT")) cfg.channel_NT = j.at("channel_NT").get<Channel>();
    if (j.contains("sim")) cfg.sim = j.at("sim").get<mc::SimConfig>();
    if (j.contains("bid")) cfg.bid = j.at("bid").get<double>();
    if (j.contains("policy_file")) cfg.policy_file = j.at("policy_file").get<std::string>();
    if (j.contains("sweep"))
        cfg.sweep = SweepSpec{j.at("sweep").at("param").get<std::string>(),
                              j.at("sweep").at("values").get<std::vector<double>>()};
    if (j.contains("output"))
        cfg.output = OutputSpec{j.at("output").value("path", std::string{}),
                                j.at("output").at("format").get<std::string>()};
    if (j.contains("quad_n")) cfg.quad_n = j.at("quad_n").get<long>();
    if (j.contains("m_list")) cfg.m_list = j.at("m_list").get<std::vector<int>>();
    if (j.contains("z_threshold")) cfg.z_threshold = j.at("z_threshold").get<double>();
    if (std::holds_alternative<SocialPopulation>(cfg.model) && cfg.eta.eta_NT > 0.0 &&
        !cfg.channel_NT)
        throw FieldError("channel_NT", "required for population models with eta_NT > 0");
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FieldError("config", "cannot open " + path);
    return parse_run_config(nlohmann::json::parse(in));
}

namespace detail {

inline Channel nt_channel(const RunConfig& cfg) {
    if (cfg.channel_NT) return *cfg.channel_NT;
    return Channel{BidDistribution::constant(0.0), AuctionRule::SecondPrice};
}

inline std::string chosen_format(const RunConfig& cfg, const Overrides& ov) {
    std::string f = "table";
    if (cfg.output && !cfg.output->format.empty()) f = cfg.output->format;
    if (ov.format) f = *ov.format;
    if (f != "csv" && f != "json" && f != "table")
        throw FieldError("format", "must be \"csv\", \"json\" or \"table\"");
    return f;
}

inline std::optional<std::string> chosen_out(const RunConfig& cfg, const Overrides& ov) {
    if (ov.out) return ov.out;
    if (cfg.output && !cfg.output->path.empty()) return cfg.output->path;
    return std::nullopt;
}

inline int write_artifact(const std::optional<std::string>& path, const std::string& content,
                          std::ostream& diag) {
    if (!path) {
        std::cout << content;
        return kExitOk;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) {
        diag << "error: cannot write " << *path << "\n";
        return kExitRun;
    }
    out << content;
    return kExitOk;
}

inline const char* model_name(const ModelSpec& m) {
    if (std::holds_alternative<Purchase>(m)) return "purchase";
    if (std::holds_alternative<Subscription>(m)) return "subscription";
    if (std::holds_alternative<SocialDiscount>(m)) return "social_discount";
    return "social_population";
}

inline solver::SolveReport run_solver(const RunConfig& cfg, bool naive) {
    if (const auto* p = std::get_if<Purchase>(&cfg.model))
        return solver::solve_purchase(*p, cfg.eta, cfg.channel_T);
    if (const auto* s = std::get_if<Subscription>(&cfg.model))
        return solver::solve_subscription(*s, cfg.eta, cfg.channel_T);
    if (const auto* d = std::get_if<SocialDiscount>(&cfg.model))
        return solver::solve_social_discount(*d, cfg.eta, cfg.channel_T);
    const auto& pop = std::get<SocialPopulation>(cfg.model);
    return solver::solve_social_population(pop, cfg.eta, cfg.channel_T, nt_channel(cfg),
                                           solver::PopulationOptions{naive});
}

inline std::string policy_csv(const PolicyTable& t) {
    std::string s = "p,bid_T,bid_NT,v\n";
    for (int k = 0; k < t.M(); ++k) {
        const auto& r = t.row(k);
        s += fmt17(t.p(k)) + "," + fmt17(r.bid_T) + "," + fmt17(r.bid_NT) + "," + fmt17(r.v) +
             "\n";
    }
    return s;
}

inline PolicyTable parse_policy_csv(std::istream& in) {
    std::string line;
    bool header_seen = false;
    std::vector<PolicyRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "p,bid_T,bid_NT,v")
                throw FieldError("policy", "header must be p,bid_T,bid_NT,v");
            header_seen = true;
            continue;
        }
        std::istringstream ls(line);
        double p, bT, bNT, v;
        char c1, c2, c3;
        if (!(ls >> p >> c1 >> bT >> c2 >> bNT >> c3 >> v) || c1 != ',' || c2 != ',' || c3 != ',')
            throw FieldError("policy", "bad row: " + line);
        rows.push_back(PolicyRow{bT, bNT, v});
    }
    if (rows.empty()) throw FieldError("policy", "no rows");
    const int M = static_cast<int>(rows.size());
    return PolicyTable(M, std::move(rows));
}

inline PolicyTable load_policy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FieldError("policy_file", "cannot open " + path);
    return parse_policy_csv(in);
}

inline std::string solve_artifact(const RunConfig& cfg, const solver::SolveReport& r,
                                  const std::string& format) {
    if (format == "json") {
        nlohmann::json j{{"model", cfg.model}, {"eta", cfg.eta}, {"report", r}};
        return j.dump(2) + "\n";
    }
    if (format == "csv") {
        if (r.policy) return policy_csv(*r.policy);
        return "value,bid_min,evaluations,method\n" + fmt17(r.optimal_value) + "," +
               fmt17(r.bid_min) + "," + std::to_string(r.evaluations) + "," +
               to_string(r.method) + "\n";
    }
    std::ostringstream os;
    os << "model: " << model_name(cfg.model) << "\n";
    os << "optimal_value: " << fmt17(r.optimal_value) << "\n";
    if (!r.policy) os << "bid_min: " << fmt17(r.bid_min) << "\n";
    os << "method: " << to_string(r.method) << "\n";
    os << "evaluations: " << r.evaluations << "\n";
    if (r.policy) {
        os << "policy:\n  p bid_T bid_NT v\n";
        for (int k = 0; k < r.policy->M(); ++k) {
            const auto& row = r.policy->row(k);
            os << "  " << r.policy->p(k) << " " << row.bid_T << " " << row.bid_NT << " " << row.v
               << "\n";
        }
    }
    return os.str();
}

struct GuardedResult {
    int code;
};

template <class Fn>
int guarded(std::ostream& diag, Fn&& fn) {
    try {
        return fn();
    } catch (const FieldError& e) {
        diag << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        diag << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const mc::SimError& e) {
        diag << "simulation error: " << e.what() << "\n";
        return kExitRun;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitRun;
    }
}

/** Non-increasing within a 1e-12 relative tie tolerance. */
inline bool non_increasing(const std::vector<double>& xs) {
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] > xs[i - 1] + 1e-12 * std::fmax(1.0, std::fabs(xs[i - 1]))) return false;
    return true;
}

inline bool non_decreasing(std::vector<double> xs) {
    std::reverse(xs.begin(), xs.end());
    return non_increasing(xs);
}

} // namespace detail

inline int cmd_solve(const RunConfig& cfg, const Overrides& ov, std::ostream& diag) {
    return detail::guarded(diag, [&] {
        const std::string format = detail::chosen_format(cfg, ov);
        const solver::SolveReport r = detail::run_solver(cfg, ov.naive_schedule);
        return detail::write_artifact(detail::chosen_out(cfg, ov),
                                      detail::solve_artifact(cfg, r, format), diag);
    });
}

inline int cmd_simulate(const RunConfig& cfg, const Overrides& ov, std::ostream& diag) {
    return detail::guarded(diag, [&] {
        const std::string format = detail::chosen_format(cfg, ov);
        if (!cfg.sim) throw FieldError("sim", "required for simulate");
        mc::SimConfig sim = *cfg.sim;
        if (ov.seed) sim.seed = *ov.seed;
        if (ov.paths) sim.paths = *ov.paths;
        mc::SimOptions opt;
        opt.threads = ov.threads;
        opt.literal_danger_jumps = ov.literal_danger_jumps;
        opt.variance_reduced_accrual = ov.variance_reduced_accrual;
        std::ofstream log;
        if (ov.log_events) {
            log.open(*ov.log_events, std::ios::binary);
            if (!log) throw FieldError("log_events", "cannot write " + *ov.log_events);
            log << "path\ttime\tkind\tindividual\twon\tpayment\n";
            opt.sink = [&log](const mc::EventRecord& e) {
                log << e.path << "\t" << fmt17(e.time) << "\t" << e.kind << "\t" << e.individual
                    << "\t" << (e.won ? 1 : 0) << "\t" << fmt17(e.payment) << "\n";
            };
        }

        double analytic_ref = 0.0;
        SimEstimate est{0.0, 0.0, 0};
        std::optional<double> bid_used;
        if (const auto* pop = std::get_if<SocialPopulation>(&cfg.model)) {
            const Channel chNT = detail::nt_channel(cfg);
            const solver::SolveReport r =
                solver::solve_social_population(*pop, cfg.eta, cfg.channel_T, chNT);
            analytic_ref = r.optimal_value;
            const PolicyTable policy = cfg.policy_file
                                           ? detail::load_policy_csv(*cfg.policy_file)
                                           : *r.policy;
            est = mc::simulate_population(*pop, cfg.eta, cfg.channel_T, chNT, policy, sim, opt);
        } else {
            double b;
            if (cfg.bid) {
                b = *cfg.bid;
            } else {
                b = detail::run_solver(cfg, false).bid_min;
            }
            bid_used = b;
            if (const auto* p = std::get_if<Purchase>(&cfg.model)) {
                analytic_ref = analytic::value_purchase(*p, cfg.eta, cfg.channel_T, b);
                est = mc::simulate_individual(*p, cfg.eta, cfg.channel_T, b, sim, opt);
            } else if (const auto* s = std::get_if<Subscription>(&cfg.model)) {
                analytic_ref = analytic::value_subscription(*s, cfg.eta, cfg.channel_T, b);
                est = mc::simulate_individual(*s, cfg.eta, cfg.channel_T, b, sim, opt);
            } else {
                const auto& d = std::get<SocialDiscount>(cfg.model);
                analytic_ref = analytic::value_social_discount(d, cfg.eta, cfg.channel_T, b);
                est = mc::simulate_individual(d, cfg.eta, cfg.channel_T, b, sim, opt);
            }
        }
        const double z = est.std_error > 0.0
                             ? (est.mean - analytic_ref) / est.std_error
                             : (est.mean == analytic_ref ? 0.0 : est.mean - analytic_ref);

        std::string content;
        if (format == "json") {
            nlohmann::json j{{"model", cfg.model},
                             {"estimate", est},
                             {"analytic", analytic_ref},
                             {"z", z}};
            if (bid_used) j["bid"] = *bid_used;
            content = j.dump(2) + "\n";
        } else if (format == "csv") {
            content = "mean,std_error,paths,analytic,z\n" + fmt17(est.mean) + "," +
                      fmt17(est.std_error) + "," + std::to_string(est.paths) + "," +
                      fmt17(analytic_ref) + "," + fmt17(z) + "\n";
        } else {
            std::ostringstream os;
            os << "model: " << detail::model_name(cfg.model) << "\n";
            if (bid_used) os << "bid: " << fmt17(*bid_used) << "\n";
            os << "mean: " << fmt17(est.mean) << "\nstd_error: " << fmt17(est.std_error)
               << "\npaths: " << est.paths << "\nanalytic: " << fmt17(analytic_ref)
               << "\nz: " << fmt17(z) << "\n";
            content = os.str();
        }
        const int code = detail::write_artifact(detail::chosen_out(cfg, ov), content, diag);
        if (code != kExitOk) return code;
        if (std::fabs(z) > cfg.z_threshold) {
            diag << "drift: |z| = " << std::fabs(z) << " exceeds " << cfg.z_threshold << "\n";
            return kExitDrift;
        }
        return kExitOk;
    });
}

namespace detail {

inline RunConfig with_param(const RunConfig& base, const std::string& param, double value) {
    RunConfig cfg = base;
    if (param == "eta_I" || param == "eta_T" || param == "eta_NT" || param == "eta_S") {
        double eI = base.eta.eta_I, eT = base.eta.eta_T, eN = base.eta.eta_NT,
               eS = base.eta.eta_S;
        (param == "eta_I" ? eI : param == "eta_T" ? eT : param == "eta_NT" ? eN : eS) = value;
        cfg.eta = IntensityProfile(eI, eT, eN, eS);
        return cfg;
    }
    if (param == "K" || param == "rho" || param == "M") {
        if (const auto* p = std::get_if<Purchase>(&base.model)) {
            if (param == "M") throw FieldError("sweep.param", "model has no field M");
            cfg.model = param == "K" ? Purchase(value, p->rho) : Purchase(p->K, value);
        } else if (const auto* s = std::get_if<Subscription>(&base.model)) {
            if (param == "M") throw FieldError("sweep.param", "model has no field M");
            cfg.model = param == "K" ? Subscription(value, s->rho) : Subscription(s->K, value);
        } else if (const auto* d = std::get_if<SocialDiscount>(&base.model)) {
            if (param == "M") throw FieldError("sweep.param", "model has no field M");
            cfg.model =
                param == "K" ? SocialDiscount(value, d->rho) : SocialDiscount(d->K, value);
        } else {
            const auto& pop = std::get<SocialPopulation>(base.model);
            if (param == "rho") throw FieldError("sweep.param", "model has no field rho");
            if (param == "M") {
                const int m = static_cast<int>(value);
                if (static_cast<double>(m) != value)
                    throw FieldError("sweep.param", "M values must be integers");
                cfg.model = SocialPopulation(pop.K, m);
            } else {
                cfg.model = SocialPopulation(value, pop.M);
            }
        }
        return cfg;
    }
    throw FieldError("sweep.param", "unknown parameter " + param);
}

struct SweepRow {
    double value;
    bool ok;
    std::string error;
    solver::SolveReport report{0.0, 0.0, std::nullopt, 0, solver::SolveMethod::GridRefine};
};

inline void append_verdict(std::string& out, bool& all_pass, const std::string& claim,
                           bool pass) {
    out += std::string("# verdict,") + claim + "," + (pass ? "PASS" : "FAIL") + "\n";
    if (!pass) all_pass = false;
}

} // namespace detail

inline int cmd_sweep(const RunConfig& cfg, const Overrides& ov, std::ostream& diag) {
    return detail::guarded(diag, [&] {
        const std::string format = detail::chosen_format(cfg, ov);
        if (!cfg.sweep || cfg.sweep->values.empty())
            throw FieldError("sweep", "nonempty sweep required");
        const std::string& param = cfg.sweep->param;
        const bool population = std::holds_alternative<SocialPopulation>(cfg.model);
        const bool cost_model = std::holds_alternative<SocialDiscount>(cfg.model);

        std::vector<detail::SweepRow> rows;
        bool any_failed = false;
        for (double value : cfg.sweep->values) {
            detail::SweepRow row;
            row.value = value;
            try {
                const RunConfig sub = detail::with_param(cfg, param, value);
                row.report = detail::run_solver(sub, ov.naive_schedule);
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
                any_failed = true;
            }
            rows.push_back(std::move(row));
        }

        // verdict claims for the swept parameter, checked on solved rows only
        std::string verdicts;
        bool all_pass = true;
        std::vector<double> vs, bids;
        for (const auto& r : rows)
            if (r.ok) {
                vs.push_back(r.report.optimal_value);
                bids.push_back(r.report.bid_min);
            }
        if (vs.size() >= 2) {
            if (!population && !cost_model) {
                if (param == "eta_I" || param == "eta_T") {
                    detail::append_verdict(verdicts, all_pass, "V non-decreasing in " + param,
                                           detail::non_decreasing(vs));
                    detail::append_verdict(verdicts, all_pass,
                                           "bid_min non-increasing in " + param,
                                           detail::non_increasing(bids));
                } else if (param == "rho") {
                    detail::append_verdict(verdicts, all_pass, "V non-increasing in rho",
                                           detail::non_increasing(vs));
                    if (std::holds_alternative<Purchase>(cfg.model))
                        detail::append_verdict(verdicts, all_pass,
                                               "bid_min non-decreasing in rho",
                                               detail::non_decreasing(bids));
                }
            } else if (cost_model) {
                if (param == "eta_I" || param == "eta_T" || param == "rho") {
                    detail::append_verdict(verdicts, all_pass, "V non-increasing in " + param,
                                           detail::non_increasing(vs));
                    detail::append_verdict(verdicts, all_pass,
                                           "bid_min non-increasing in " + param,
                                           detail::non_increasing(bids));
                }
            } else if (param == "eta_I" || param == "eta_T" || param == "eta_NT" ||
                       param == "eta_S") {
                bool vp_monotone = true;
                const int M = std::get<SocialPopulation>(cfg.model).M;
                if (param != "M") {
                    for (int k = 0; k < M && vp_monotone; ++k) {
                        std::vector<double> col;
                        for (const auto& r : rows)
                            if (r.ok) col.push_back(r.report.policy->row(k).v);
                        vp_monotone = detail::non_increasing(col);
                    }
                    detail::append_verdict(verdicts, all_pass, "v(p) non-increasing in " + param,
                                           vp_monotone);
                }
            }
        }
        if (population) {
            bool nt_rows = true, t_rows_dec = true, t_rows_inc = true;
            bool check_t_dec = false, check_t_inc = false;
            for (const auto& r : rows) {
                if (!r.ok) continue;
                const RunConfig sub = detail::with_param(cfg, param, r.value);
                std::vector<double> bT, bNT;
                for (int k = 0; k < r.report.policy->M(); ++k) {
                    bT.push_back(r.report.policy->row(k).bid_T);
                    bNT.push_back(r.report.policy->row(k).bid_NT);
                }
                nt_rows = nt_rows && detail::non_increasing(bNT);
                if (sub.eta.eta_NT == 0.0) {
                    check_t_dec = true;
                    t_rows_dec = t_rows_dec && detail::non_increasing(bT);
                }
                if (sub.eta.eta_S == 0.0) {
                    check_t_inc = true;
                    t_rows_inc = t_rows_inc && detail::non_decreasing(bT);
                }
            }
            detail::append_verdict(verdicts, all_pass, "bid_NT(p) non-increasing in p", nt_rows);
            if (check_t_dec)
                detail::append_verdict(verdicts, all_pass,
                                       "bid_T(p) non-increasing in p (eta_NT=0)", t_rows_dec);
            if (check_t_inc)
                detail::append_verdict(verdicts, all_pass,
                                       "bid_T(p) non-decreasing in p (eta_S=0)", t_rows_inc);
        }

        std::string content;
        if (format == "json") {
            nlohmann::json jrows = nlohmann::json::array();
            for (const auto& r : rows) {
                nlohmann::json jr{{"param", param}, {"value", r.value}};
                if (r.ok) {
                    jr["V"] = r.report.optimal_value;
                    if (r.report.policy)
                        jr["policy"] = *r.report.policy;
                    else
                        jr["bid_min"] = r.report.bid_min;
                } else {
                    jr["error"] = r.error;
                }
                jrows.push_back(std::move(jr));
            }
            nlohmann::json j{{"sweep", jrows}};
            nlohmann::json jv = nlohmann::json::array();
            std::istringstream vs_in(verdicts);
            for (std::string line; std::getline(vs_in, line);) jv.push_back(line);
            j["verdicts"] = jv;
            content = j.dump(2) + "\n";
        } else { // csv and table share the tabular layout
            std::string header = "param,value,V,bid_min";
            int M = 0;
            if (population) {
                M = std::get<SocialPopulation>(cfg.model).M;
                if (param == "M") {
                    header = "param,value,V";
                } else {
                    header = "param,value,V";
                    for (int k = 0; k < M; ++k) header += ",bid_T_" + std::to_string(k);
                    for (int k = 0; k < M; ++k) header += ",bid_NT_" + std::to_string(k);
                }
            }
            content = header + "\n";
            for (const auto& r : rows) {
                if (!r.ok) {
                    content += param + "," + fmt17(r.value) + ",ERROR," + r.error + "\n";
                    continue;
                }
                content += param + "," + fmt17(r.value) + "," + fmt17(r.report.optimal_value);
                if (!population) {
                    content += "," + fmt17(r.report.bid_min);
                } else if (param != "M") {
                    for (int k = 0; k < M; ++k)
                        content += "," + fmt17(r.report.policy->row(k).bid_T);
                    for (int k = 0; k < M; ++k)
                        content += "," + fmt17(r.report.policy->row(k).bid_NT);
                }
                content += "\n";
            }
            content += verdicts;
        }

        const int code = detail::write_artifact(detail::chosen_out(cfg, ov), content, diag);
        if (code != kExitOk) return code;
        if (any_failed) {
            diag << "sweep: some rows failed\n";
            return kExitRun;
        }
        if (!all_pass) {
            diag << "sweep: monotonicity verdict violated\n";
            return kExitVerdict;
        }
        return kExitOk;
    });
}

inline int cmd_meanfield(const RunConfig& cfg, const Overrides& ov, std::ostream& diag) {
    return detail::guarded(diag, [&] {
        const std::string format = detail::chosen_format(cfg, ov);
        const auto* pop = std::get_if<SocialPopulation>(&cfg.model);
        if (!pop) throw FieldError("model", "meanfield requires a social_population model");
        if (cfg.m_list.empty()) throw FieldError("m_list", "must be nonempty");
        const Channel chNT = detail::nt_channel(cfg);
        const double integral =
            solver::meanfield_value(cfg.eta, cfg.channel_T, chNT, pop->K, cfg.quad_n);

        struct Row {
            int M;
            double per_capita;
            double gap;
        };
        std::vector<Row> rows;
        for (int M : cfg.m_list) {
            const SocialPopulation sub(pop->K, M);
            const solver::SolveReport r = solver::solve_social_population(
                sub, cfg.eta, cfg.channel_T, chNT, solver::PopulationOptions{ov.naive_schedule});
            const double per = r.optimal_value / M;
            rows.push_back(Row{M, per, std::fabs(per - integral)});
        }

        std::optional<double> closed;
        if (cfg.eta.eta_NT == 0.0 && cfg.eta.eta_S > 0.0 && cfg.eta.eta_I > 0.0 &&
            cfg.channel_T.rule == AuctionRule::SecondPrice) {
            if (const auto* c = std::get_if<ConstantBid>(&cfg.channel_T.dist.law());
                c != nullptr && c->value > 0.0)
                closed = analytic::meanfield_closed_form_targeted(cfg.eta, pop->K, c->value);
        }

        std::string content;
        if (format == "json") {
            nlohmann::json jrows = nlohmann::json::array();
            for (const auto& r : rows)
                jrows.push_back(nlohmann::json{
                    {"M", r.M}, {"V_per_M", r.per_capita}, {"integral", integral},
                    {"gap", r.gap}});
            nlohmann::json j{{"rows", jrows}, {"quad_n", cfg.quad_n}};
            if (closed) {
                j["closed_form"] = *closed;
                j["closed_form_deviation"] = std::fabs(*closed - integral);
            }
            content = j.dump(2) + "\n";
        } else {
            content = "M,V_per_M,integral,gap\n";
            for (const auto& r : rows)
                content += std::to_string(r.M) + "," + fmt17(r.per_capita) + "," +
                           fmt17(integral) + "," + fmt17(r.gap) + "\n";
            if (closed)
                content += "# closed_form," + fmt17(*closed) + ",deviation," +
                           fmt17(std::fabs(*closed - integral)) + "\n";
        }
        return detail::write_artifact(detail::chosen_out(cfg, ov), content, diag);
    });
}

/** Convenience wrappers loading the config file first. */
inline int cmd_solve_file(const std::string& path, const Overrides& ov, std::ostream& diag) {
    return detail::guarded(diag, [&] { return cmd_solve(load_run_config(path), ov, diag); });
}
inline int cmd_simulate_file(const std::string& path, const Overrides& ov, std::ostream& diag) {
    return detail::guarded(diag, [&] { return cmd_simulate(load_run_config(path), ov, diag); });
}
inline int cmd_sweep_file(const std::string& path, const Overrides& ov, std::ostream& diag) {
    return detail::guarded(diag, [&] { return cmd_sweep(load_run_config(path), ov, diag); });
}
inline int cmd_meanfield_file(const std::string& path, const Overrides& ov, std::ostream& diag) {
    return detail::guarded(diag, [&] { return cmd_meanfield(load_run_config(path), ov, diag); });
}

} // namespace adbid::cli
