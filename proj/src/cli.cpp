#include "reliance/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "reliance/attack_planner.hpp"
#include "reliance/config.hpp"
#include "reliance/errors.hpp"
#include "reliance/io.hpp"
#include "reliance/montecarlo.hpp"
#include "reliance/rng.hpp"

namespace reliance::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kSeedEnv = "RELIANCE_SIM_SEED";

std::uint64_t parse_seed_text(const std::string& text, const char* source) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (text.empty() || text[0] == '-') throw std::invalid_argument(text);
        v = std::stoull(text, &used, 0);
    } catch (const std::exception&) {
        throw DomainError(std::string(source) + ": '" + text + "' is not a 64-bit unsigned seed");
    }
    if (used != text.size())
        throw DomainError(std::string(source) + ": '" + text + "' is not a 64-bit unsigned seed");
    return v;
}

/// --seed, then RELIANCE_SIM_SEED, then the config's base_seed.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const RunConfig& cfg) {
    if (flag) return *flag;
    if (const char* env = std::getenv(kSeedEnv); env && *env) return parse_seed_text(env, kSeedEnv);
    return cfg.stochastic.base_seed;
}

json stats_json(const DistributionStats& s) {
    return {{"mean", s.mean},       {"std", s.std},     {"min", s.min},
            {"q25", s.q25},         {"median", s.median}, {"q75", s.q75},
            {"max", s.max},         {"argmax_strategy_id", s.argmax_strategy_id},
            {"count", s.count}};
}

json trace_json(std::size_t episode_id, const DecisionTrace& trace) {
    json tasks = json::array();
    for (const auto& t : trace.tasks) {
        tasks.push_back({{"task_index", t.task_index},
                         {"attacked", t.attacked},
                         {"reliance_before", t.reliance_before},
                         {"trusted", t.trusted},
                         {"assessment_passed", t.assessment_passed},
                         {"executed", to_string(t.executed)},
                         {"executed_correct", t.executed_correct},
                         {"as_i", t.attack_score},
                         {"d_i", t.feedback},
                         {"reliance_after", t.reliance_after}});
    }
    return {{"episode_id", episode_id}, {"attack_score", trace.attack_score}, {"tasks", tasks}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Runs a command body and maps exceptions onto the exit-code contract.
template <typename Body>
CommandOutcome guarded(const char* name, Body&& body) {
    CommandOutcome outcome;
    try {
        body(outcome);
    } catch (const DomainError& e) {
        std::cerr << name << ": " << e.what() << "\n";
        outcome.status = kValidation;
    } catch (const ConfigError& e) {
        std::cerr << name << ": config error: " << e.what() << "\n";
        outcome.status = kValidation;
    } catch (const EnumerationCapError& e) {
        std::cerr << name << ": " << e.what() << "\n";
        outcome.status = kValidation;
    } catch (const UnsupportedFamilyError& e) {
        std::cerr << name << ": " << e.what() << "\n";
        outcome.status = kValidation;
    } catch (const std::exception& e) {
        std::cerr << name << ": error: " << e.what() << "\n";
        outcome.status = kRuntime;
    }
    if (outcome.status != kOk) outcome.written.clear();
    return outcome;
}

json metadata(const RunConfig& cfg, std::uint64_t seed, std::size_t replications, bool deterministic) {
    return {{"seed", seed},
            {"replications", replications},
            {"config_hash", config_hash(cfg)},
            {"n", cfg.n()},
            {"deterministic", deterministic}};
}

}  // namespace

CommandOutcome cmd_simulate(const SimulateOptions& opts) {
    return guarded("simulate", [&](CommandOutcome& outcome) {
        const RunConfig cfg = load_run_config(opts.config);
        const AttackVector mask = AttackVector::parse(opts.mask);
        if (mask.size() != cfg.n())
            throw DomainError(fmt::format("attack mask: length {} does not match n={}", mask.size(),
                                          cfg.n()));
        if (opts.replications < 1) throw DomainError("replications: must be >= 1");
        const std::uint64_t seed = resolve_seed(opts.seed, cfg);
        Scenario sc = cfg.scenario(opts.deterministic);
        sc.stochastic.base_seed = seed;

        std::string csv(kTraceHeader);
        csv += "\n";
        json episodes = json::array();
        double total = 0.0;
        for (std::size_t ep = 0; ep < opts.replications; ++ep) {
            const std::uint64_t world_seed = derive_seed(seed, mask.code(), ep);
            const WorldSample world =
                sc.fixed_scores ? sample_world(sc.stochastic, world_seed, *sc.fixed_scores)
                                : sample_world(sc.stochastic, world_seed);
            const DecisionTrace trace = run_episode(sc.reliance, sc.profiles, mask, world, sc.loss);
            total += trace.attack_score;
            if (opts.format == Format::Csv)
                append_trace_rows(csv, ep, trace);
            else
                episodes.push_back(trace_json(ep, trace));
        }
        if (opts.format == Format::Csv) {
            atomic_write(opts.out, csv);
        } else {
            json doc{{"metadata", metadata(cfg, seed, opts.replications, opts.deterministic)},
                     {"mask", mask.to_string()},
                     {"episodes", episodes}};
            atomic_write(opts.out, dump(doc));
        }
        outcome.written.push_back(opts.out);
        std::cout << fmt::format("mask {} mean AS {:.6f} over {} episode(s)\n", mask.to_string(),
                                 total / static_cast<double>(opts.replications), opts.replications);
    });
}

CommandOutcome cmd_enumerate(const EnumerateOptions& opts) {
    return guarded("enumerate", [&](CommandOutcome& outcome) {
        const RunConfig cfg = load_run_config(opts.config);
        const std::uint64_t seed = resolve_seed(opts.seed, cfg);
        Scenario sc = cfg.scenario(opts.deterministic);
        sc.stochastic.base_seed = seed;
        if (opts.replications) {
            if (*opts.replications < 1) throw DomainError("replications: must be >= 1");
            sc.stochastic.replications = *opts.replications;
        }
        std::vector<std::size_t> budgets = opts.budgets;
        if (budgets.empty())
            for (std::size_t k = 0; k <= cfg.n(); ++k) budgets.push_back(k);
        for (auto k : budgets)
            if (k > cfg.n()) throw DomainError(fmt::format("--k {} exceeds n={}", k, cfg.n()));

        std::string csv(kStrategyHeader);
        csv += "\n";
        json rows = json::array();
        json per_k = json::array();
        const std::size_t reported_reps = opts.deterministic ? 0 : sc.stochastic.replications;

        auto add_row = [&](const AttackVector& mask, const DistributionStats& s) {
            append_strategy_row(csv, mask, s, reported_reps);
            rows.push_back({{"strategy_id", mask.code()},
                            {"mask", mask.to_string()},
                            {"n_attacks", mask.budget()},
                            {"as_mean", s.mean},
                            {"as_std", s.std},
                            {"as_max", s.max},
                            {"as_min", s.min},
                            {"n_replications", reported_reps}});
        };

        for (std::size_t k : budgets) {
            AttackCountResult r;
            if (opts.deterministic) {
                const ErrorRates rates = sc.stochastic.error_rates();
                const auto scores = evaluate_strategies(
                    cfg.n(), k,
                    [&](const AttackVector& m, std::uint64_t) {
                        return expected_attack_score(sc.reliance, sc.profiles, m, rates,
                                                     *sc.fixed_scores, sc.loss);
                    },
                    opts.jobs);
                std::vector<double> values;
                for (const auto& s : scores) {
                    DistributionStats st;
                    st.mean = st.min = st.max = st.q25 = st.median = st.q75 = s.score;
                    st.count = 1;
                    st.argmax_strategy_id = s.mask.code();
                    r.placements.push_back({s.mask, st});
                    values.push_back(s.score);
                }
                const StrategyScore best = pick_best(scores);
                const StrategyScore worst = pick_worst(scores);
                r.k = k;
                r.pooled = compute_stats(values);
                r.pooled.argmax_strategy_id = best.mask.code();
                r.best_mask = best.mask;
                r.best_mean = best.score;
                r.worst_mask = worst.mask;
                r.worst_mean = worst.score;
            } else {
                r = evaluate_attack_count(sc, k, opts.jobs);
            }
            for (const auto& p : r.placements) add_row(p.mask, p.stats);
            per_k.push_back({{"k", k},
                             {"pooled", stats_json(r.pooled)},
                             {"best_mask", r.best_mask.to_string()},
                             {"best_as", r.best_mean},
                             {"worst_mask", r.worst_mask.to_string()},
                             {"worst_as", r.worst_mean}});
            std::cout << fmt::format("k={} best {} AS={:.6f}  worst {} AS={:.6f}\n", k,
                                     r.best_mask.to_string(), r.best_mean,
                                     r.worst_mask.to_string(), r.worst_mean);
        }
        if (opts.format == Format::Csv) {
            atomic_write(opts.out, csv);
        } else {
            json doc{{"metadata", metadata(cfg, seed, reported_reps, opts.deterministic)},
                     {"strategies", rows},
                     {"by_attack_count", per_k}};
            atomic_write(opts.out, dump(doc));
        }
        outcome.written.push_back(opts.out);
    });
}

CommandOutcome cmd_analytic(const AnalyticOptions& opts) {
    return guarded("analytic", [&](CommandOutcome& outcome) {
        const ErrorRates rates{opts.e_h, opts.e_m, opts.e_a};
        validate(rates);
        const RunConfig cfg = opts.config ? load_run_config(*opts.config) : parse_run_config("{}");

        std::vector<FamilyKind> families;
        if (opts.family == "all") {
            families = {FamilyKind::FirstTask, FamilyKind::LastTask, FamilyKind::FirstTwo,
                        FamilyKind::LastTwo, FamilyKind::FirstAndLast};
        } else if (auto f = parse_family(opts.family)) {
            families = {*f};
        } else {
            throw UnsupportedFamilyError("unsupported family '" + opts.family +
                                         "' (first, last, first_two, last_two, first_and_last, all)");
        }

        // Recovery index of the configured deterministic regime after an attack on task 1.
        const RelianceConfig& rc = cfg.reliance;
        std::optional<int> k = opts.recovery_k;
        if (!k) {
            const double irrelevant = model_irrelevant_factor(cfg.profiles.front(), rc.weights);
            const double r_new = instantaneous_reliance(rc.c * cfg.deterministic.d_low, irrelevant,
                                                        rc.gamma, rc.clamp_reliance);
            const double r_after =
                smoothed_reliance({rc.r_init, 1}, r_new, rc.alpha, rc.clamp_reliance).smoothed;
            k = recovery_index(r_after, rc.alpha, rc.c, cfg.deterministic.d_high, rc.r_hat, opts.n,
                               rc.tie_break);
        }

        std::string csv = "family,mask,n,attack_score,recovery_k\n";
        json rows = json::array();
        for (FamilyKind fam : families) {
            const AttackVector mask = StrategyFamily{fam, opts.n, {}}.expand();
            std::optional<double> as;
            switch (fam) {
                case FamilyKind::FirstTask:
                    as = closed_form_one_time(opts.n, OneTimePosition::First, rates);
                    break;
                case FamilyKind::LastTask:
                    as = closed_form_one_time(opts.n, OneTimePosition::Last, rates);
                    break;
                case FamilyKind::FirstAndLast:
                    if (opts.n < 3) throw DomainError("first_and_last: n must be >= 3");
                    if (k && *k >= 2 && static_cast<std::size_t>(*k) <= opts.n - 2)
                        as = closed_form_two_time(opts.n, fam, rates, *k);
                    else if (families.size() == 1)
                        throw DomainError(
                            k ? fmt::format("first_and_last: recovery index {} outside [2, {}]", *k,
                                            opts.n - 2)
                              : std::string("first_and_last: trust is never regained"));
                    break;
                default:
                    as = closed_form_two_time(opts.n, fam, rates);
            }
            const std::string k_text = k ? std::to_string(*k) : std::string("none");
            fmt::format_to(std::back_inserter(csv), "{},{},{},{},{}\n", to_string(fam),
                           mask.to_string(), opts.n, as ? format_double(*as) : std::string(),
                           fam == FamilyKind::FirstAndLast ? k_text : std::string());
            json row{{"family", to_string(fam)}, {"mask", mask.to_string()}, {"n", opts.n}};
            row["attack_score"] = as ? json(*as) : json(nullptr);
            if (fam == FamilyKind::FirstAndLast) row["recovery_k"] = k ? json(*k) : json(nullptr);
            rows.push_back(row);
            std::cout << fmt::format("{:<15} {}  AS={}\n", to_string(fam), mask.to_string(),
                                     as ? fmt::format("{:.6f}", *as) : std::string("n/a"));
        }
        std::cout << "recovery index k: " << (k ? std::to_string(*k) : std::string("none")) << "\n";

        if (opts.out) {
            if (opts.format == Format::Csv)
                atomic_write(*opts.out, csv);
            else
                atomic_write(*opts.out,
                             dump({{"rates", {{"e_H", rates.human}, {"e_M", rates.model},
                                              {"e_A", rates.attacked}}},
                                   {"recovery_k", k ? json(*k) : json(nullptr)},
                                   {"families", rows}}));
            outcome.written.push_back(*opts.out);
        }
    });
}

CommandOutcome cmd_sweep(const SweepOptions& opts) {
    return guarded("sweep", [&](CommandOutcome& outcome) {
        const RunConfig cfg = load_run_config(opts.config);
        const std::uint64_t seed = resolve_seed(opts.seed, cfg);
        Scenario base = cfg.scenario(false);
        base.stochastic.base_seed = seed;
        if (opts.replications) {
            if (*opts.replications < 1) throw DomainError("replications: must be >= 1");
            base.stochastic.replications = *opts.replications;
        }

        std::vector<SweepParameter> params;
        if (opts.param == "all") {
            if (opts.values) throw DomainError("--values cannot be combined with --param all");
            params = {SweepParameter::ModelAccuracy, SweepParameter::HumanAccuracy,
                      SweepParameter::CombinedAccuracy, SweepParameter::RelianceThreshold};
        } else if (auto p = parse_sweep_parameter(opts.param)) {
            params = {*p};
        } else {
            throw DomainError("--param: unknown parameter '" + opts.param +
                              "' (model_acc, human_acc, combined_acc, reliance_threshold, all)");
        }

        std::vector<SweepGrid> grids;
        for (auto p : params) {
            SweepGrid g = default_grid(p, cfg.n());
            if (opts.values) {
                g.values.clear();
                for (const auto& token : *opts.values) {
                    if (token.empty()) continue;
                    SweepValue v;
                    try {
                        std::size_t used = 0;
                        if (p == SweepParameter::CombinedAccuracy) {
                            const auto colon = token.find(':');
                            if (colon == std::string::npos) throw std::invalid_argument(token);
                            v.value = std::stod(token.substr(0, colon), &used);
                            v.secondary = std::stod(token.substr(colon + 1));
                        } else {
                            v.value = std::stod(token, &used);
                            if (used != token.size()) throw std::invalid_argument(token);
                        }
                    } catch (const std::exception&) {
                        throw DomainError("--values: cannot parse '" + token + "'" +
                                          (p == SweepParameter::CombinedAccuracy
                                               ? " (expected p_m:p_h)"
                                               : ""));
                    }
                    g.values.push_back(v);
                }
            }
            if (!opts.budgets.empty()) g.attack_counts = opts.budgets;
            validate(g, cfg.n());
            grids.push_back(std::move(g));
        }

        fs::create_directories(opts.out_dir);
        json sweeps = json::array();
        std::vector<std::pair<fs::path, std::string>> files;
        for (const auto& g : grids) {
            const auto rows = sensitivity_sweep(g, base, opts.jobs);
            std::string csv(kSweepHeader);
            csv += "\n";
            json jrows = json::array();
            json optimal = json::array();
            for (const auto& row : rows) {
                append_sweep_row(csv, row);
                jrows.push_back({{"parameter", to_string(row.parameter)},
                                 {"value", row.value.label(row.parameter)},
                                 {"n_attacks", row.n_attacks},
                                 {"mean_as", row.mean_as},
                                 {"std_as", row.std_as},
                                 {"max_as", row.max_as},
                                 {"best_mask", row.best_mask.to_string()},
                                 {"n_samples", row.n_samples}});
                if (row.optimal)
                    optimal.push_back({{"value", row.value.label(row.parameter)},
                                       {"n_attacks", row.n_attacks},
                                       {"max_as", row.max_as}});
            }
            sweeps.push_back(
                {{"parameter", to_string(g.parameter)}, {"rows", jrows}, {"optimal", optimal}});
            files.emplace_back(opts.out_dir / fmt::format("sweep_{}.csv", to_string(g.parameter)),
                               std::move(csv));
        }
        json summary{{"metadata", metadata(cfg, seed, base.stochastic.replications, false)},
                     {"sweeps", sweeps}};
        files.emplace_back(opts.out_dir / "summary.json", dump(summary));
        for (const auto& [path, text] : files) {
            atomic_write(path, text);
            outcome.written.push_back(path);
        }
        for (const auto& p : outcome.written) std::cout << "wrote " << p.string() << "\n";
    });
}

int run(int argc, char** argv) {
    CLI::App app{"Human-AI reliance dynamics under timing-based attacks"};
    app.require_subcommand(1);

    const std::map<std::string, Format> formats{{"csv", Format::Csv}, {"json", Format::Json}};

    SimulateOptions sim;
    std::optional<std::uint64_t> sim_seed;
    auto* simulate = app.add_subcommand("simulate", "Run episodes for one attack mask; write the trace");
    simulate->add_option("--config", sim.config, "Run configuration file")->required();
    simulate->add_option("--mask", sim.mask, "Attack mask, e.g. 1000000001")->required();
    simulate->add_option("--seed", sim_seed, "Base seed (default: $RELIANCE_SIM_SEED, then config)");
    simulate->add_option("--out", sim.out, "Output file")->required();
    simulate->add_option("--replications", sim.replications, "Episodes to run")->capture_default_str();
    simulate->add_flag("--deterministic", sim.deterministic, "Use the fixed evaluation scores");
    simulate->add_option("--format", sim.format)->transform(CLI::CheckedTransformer(formats));
    simulate->add_option("--jobs", "Ignored: traces are written sequentially");

    EnumerateOptions en;
    auto* enumerate = app.add_subcommand("enumerate", "Score every mask with k attacks");
    enumerate->add_option("--config", en.config)->required();
    enumerate->add_option("--k", en.budgets, "Attack budget(s), comma separated (default 0..n)")
        ->delimiter(',');
    enumerate->add_option("--seed", en.seed);
    enumerate->add_option("--out", en.out)->required();
    enumerate->add_option("--replications", en.replications);
    enumerate->add_flag("--deterministic", en.deterministic,
                        "Fixed evaluation scores, exact expected-loss evaluation");
    enumerate->add_option("--jobs", en.jobs, "Worker threads (0 = all cores)");
    enumerate->add_option("--format", en.format)->transform(CLI::CheckedTransformer(formats));

    AnalyticOptions an;
    std::optional<std::string> an_config, an_out;
    auto* analytic = app.add_subcommand("analytic", "Closed-form attack scores");
    analytic->add_option("--n", an.n)->capture_default_str();
    analytic->add_option("--e-h", an.e_h, "Human per-task loss")->capture_default_str();
    analytic->add_option("--e-m", an.e_m, "Clean model per-task loss")->capture_default_str();
    analytic->add_option("--e-a", an.e_a, "Attacked model per-task loss")->capture_default_str();
    analytic->add_option("--family", an.family)->capture_default_str();
    analytic->add_option("--recovery-k", an.recovery_k, "Override the recovery index");
    analytic->add_option("--config", an_config, "Regime used to compute the recovery index");
    analytic->add_option("--out", an_out);
    analytic->add_option("--format", an.format)->transform(CLI::CheckedTransformer(formats));

    SweepOptions sw;
    std::vector<std::string> sw_values;
    auto* sweep = app.add_subcommand("sweep", "Sensitivity sweep over one parameter");
    sweep->add_option("--config", sw.config)->required();
    sweep->add_option("--param", sw.param,
                      "model_acc | human_acc | combined_acc | reliance_threshold | all")
        ->required();
    auto* values_opt = sweep->add_option("--values", sw_values, "Comma separated grid values")
                           ->delimiter(',')
                           ->allow_extra_args(false)
                           ->expected(0, 1000);
    sweep->add_option("--k", sw.budgets, "Attack counts (default 0..n)")->delimiter(',');
    sweep->add_option("--seed", sw.seed);
    sweep->add_option("--out", sw.out_dir, "Output directory")->required();
    sweep->add_option("--replications", sw.replications);
    sweep->add_option("--jobs", sw.jobs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    CommandOutcome out;
    if (*simulate) {
        sim.seed = sim_seed;
        out = cmd_simulate(sim);
    } else if (*enumerate) {
        out = cmd_enumerate(en);
    } else if (*analytic) {
        if (an_config) an.config = *an_config;
        if (an_out) an.out = *an_out;
        out = cmd_analytic(an);
    } else if (*sweep) {
        if (values_opt->count() > 0) sw.values = sw_values;
        out = cmd_sweep(sw);
    }
    return out.status;
}

}  // namespace reliance::cli
