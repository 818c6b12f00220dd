#include "reliance/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "reliance/errors.hpp"

namespace reliance {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError(path + ": " + message);
}

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Cursor over one JSON object that rejects keys nobody asked about.
class Section {
public:
    Section(const json& node, std::string path, std::initializer_list<std::string_view> allowed)
        : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
        for (const auto& [key, _] : node_.items()) {
            bool known = false;
            for (auto a : allowed) known = known || key == a;
            if (!known) fail(join(path_, key), "unknown key");
        }
    }

    const json* find(std::string_view key) const {
        auto it = node_.find(std::string(key));
        return it == node_.end() ? nullptr : &*it;
    }

    std::string path(std::string_view key) const { return join(path_, key); }

    void number(std::string_view key, double& out, double lo, double hi) const {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_number()) fail(path(key), "expected a number");
        const double d = v->get<double>();
        if (!std::isfinite(d) || d < lo || d > hi)
            fail(path(key), fmt::format("value {} outside [{}, {}]", d, lo, hi));
        out = d;
    }

    void nonnegative(std::string_view key, double& out) const {
        number(key, out, 0.0, std::numeric_limits<double>::max());
    }

    void unit(std::string_view key, double& out) const { number(key, out, 0.0, 1.0); }

    void boolean(std::string_view key, bool& out) const {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_boolean()) fail(path(key), "expected true/false");
        out = v->get<bool>();
    }

    void count(std::string_view key, std::size_t& out, std::size_t lo, std::size_t hi) const {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() &&
                                        v->get<std::int64_t>() < 0))
            fail(path(key), "expected a non-negative integer");
        const auto u = v->get<std::uint64_t>();
        if (u < lo || u > hi) fail(path(key), fmt::format("value {} outside [{}, {}]", u, lo, hi));
        out = static_cast<std::size_t>(u);
    }

    void seed(std::string_view key, std::uint64_t& out) const {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_number_unsigned()) fail(path(key), "expected a non-negative integer");
        out = v->get<std::uint64_t>();
    }

    void range(std::string_view key, Range& out) const {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
            fail(path(key), "expected [lo, hi]");
        Range r{(*v)[0].get<double>(), (*v)[1].get<double>()};
        if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi))
            fail(path(key), "need 0 <= lo <= hi <= 1");
        out = r;
    }

    template <typename Enum>
    void choice(std::string_view key, Enum& out,
                std::initializer_list<std::pair<std::string_view, Enum>> options) const {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_string()) fail(path(key), "expected a string");
        const auto s = v->get<std::string>();
        std::string names;
        for (const auto& [name, value] : options) {
            if (s == name) {
                out = value;
                return;
            }
            names += names.empty() ? std::string(name) : ", " + std::string(name);
        }
        fail(path(key), "'" + s + "' is not one of: " + names);
    }

private:
    const json& node_;
    std::string path_;
};

TaskProfile parse_profile(const json& node, const std::string& path) {
    Section s(node, path, {"self_confidence", "risk", "complexity", "time_sensitivity"});
    TaskProfile p;
    s.unit("self_confidence", p.self_confidence);
    s.nonnegative("risk", p.risk);
    s.nonnegative("complexity", p.complexity);
    s.nonnegative("time_sensitivity", p.time_sensitivity);
    return p;
}

json profile_json(const TaskProfile& p) {
    return {{"self_confidence", p.self_confidence},
            {"risk", p.risk},
            {"complexity", p.complexity},
            {"time_sensitivity", p.time_sensitivity}};
}

}  // namespace

Scenario RunConfig::scenario(bool deterministic) const {
    Scenario s;
    s.reliance = reliance;
    s.profiles = profiles;
    s.stochastic = stochastic;
    s.loss = loss;
    if (deterministic) s.fixed_scores = this->deterministic;
    return s;
}

RunConfig parse_run_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("<root>: malformed document: ") + e.what());
    }

    RunConfig cfg;
    Section top(root, "", {"episode", "reliance", "stochastic", "deterministic", "loss", "tasks"});

    if (const json* node = top.find("episode")) {
        Section s(*node, "episode", {"n"});
        s.count("n", cfg.stochastic.n, 1, 64);
    }

    if (const json* node = top.find("reliance")) {
        Section s(*node, "reliance",
                  {"gamma", "alpha", "c", "r_hat", "r_init", "theta_m", "theta_h", "tie_break",
                   "clamp_reliance", "feedback_policy", "fallback_policy", "assessment_mode",
                   "weights"});
        RelianceConfig& r = cfg.reliance;
        s.unit("gamma", r.gamma);
        s.unit("alpha", r.alpha);
        s.nonnegative("c", r.c);
        s.unit("r_hat", r.r_hat);
        s.unit("r_init", r.r_init);
        s.unit("theta_m", r.theta_m);
        s.unit("theta_h", r.theta_h);
        s.boolean("clamp_reliance", r.clamp_reliance);
        s.choice("tie_break", r.tie_break,
                 {{"trust_on_equal", TieBreak::TrustOnEqual},
                  {"distrust_on_equal", TieBreak::DistrustOnEqual}});
        s.choice("feedback_policy", r.feedback_policy,
                 {{"attack_conditioned", FeedbackPolicy::AttackConditioned},
                  {"correctness_conditioned", FeedbackPolicy::CorrectnessConditioned},
                  {"trust_conditioned", FeedbackPolicy::TrustConditioned}});
        s.choice("fallback_policy", r.fallback_policy,
                 {{"equals_executed_model", FallbackPolicy::EqualsExecutedModel},
                  {"fixed_correct", FallbackPolicy::FixedCorrect},
                  {"fixed_wrong", FallbackPolicy::FixedWrong}});
        s.choice("assessment_mode", r.assessment_mode,
                 {{"follows_trust", AssessmentMode::FollowsTrust},
                  {"thresholded", AssessmentMode::Thresholded}});
        if (const json* w = s.find("weights")) {
            Section ws(*w, "reliance.weights", {"w_c", "w_k", "w_o", "w_s"});
            ws.nonnegative("w_c", r.weights.self_confidence);
            ws.nonnegative("w_k", r.weights.risk);
            ws.nonnegative("w_o", r.weights.complexity);
            ws.nonnegative("w_s", r.weights.time_sensitivity);
        }
    }

    if (const json* node = top.find("stochastic")) {
        Section s(*node, "stochastic",
                  {"p_m", "p_h", "p_a", "d_low_range", "d_high_range", "replications", "base_seed"});
        StochasticSpec& st = cfg.stochastic;
        s.unit("p_m", st.p_m);
        s.unit("p_h", st.p_h);
        s.unit("p_a", st.p_a);
        s.range("d_low_range", st.d_low);
        s.range("d_high_range", st.d_high);
        s.count("replications", st.replications, 1, 100'000'000);
        s.seed("base_seed", st.base_seed);
    }

    if (const json* node = top.find("deterministic")) {
        Section s(*node, "deterministic", {"d_low", "d_high"});
        s.unit("d_low", cfg.deterministic.d_low);
        s.unit("d_high", cfg.deterministic.d_high);
    }

    if (const json* node = top.find("loss")) {
        Section s(*node, "loss", {"kind", "aggregation"});
        s.choice("kind", cfg.loss.kind,
                 {{"zero_one", LossKind::ZeroOne}, {"absolute", LossKind::Absolute}});
        s.choice("aggregation", cfg.loss.aggregation,
                 {{"mean", Aggregation::Mean}, {"product", Aggregation::Product}});
    }

    const std::size_t n = cfg.stochastic.n;
    TaskProfile fallback_profile;
    cfg.profiles.clear();
    if (const json* node = top.find("tasks")) {
        Section s(*node, "tasks", {"default", "per_task"});
        if (const json* d = s.find("default")) fallback_profile = parse_profile(*d, "tasks.default");
        if (const json* per = s.find("per_task")) {
            if (!per->is_array()) fail("tasks.per_task", "expected an array");
            if (per->size() != n)
                fail("tasks.per_task", fmt::format("has {} entries, episode.n is {}", per->size(), n));
            for (std::size_t i = 0; i < per->size(); ++i)
                cfg.profiles.push_back(parse_profile((*per)[i], fmt::format("tasks.per_task[{}]", i)));
        }
    }
    if (cfg.profiles.empty()) cfg.profiles.assign(n, fallback_profile);

    try {
        validate(cfg.reliance);
        validate(cfg.stochastic);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

json to_json(const RunConfig& c) {
    const auto& r = c.reliance;
    const auto& st = c.stochastic;
    json per_task = json::array();
    for (const auto& p : c.profiles) per_task.push_back(profile_json(p));
    return {
        {"episode", {{"n", st.n}}},
        {"reliance",
         {{"gamma", r.gamma},
          {"alpha", r.alpha},
          {"c", r.c},
          {"r_hat", r.r_hat},
          {"r_init", r.r_init},
          {"theta_m", r.theta_m},
          {"theta_h", r.theta_h},
          {"tie_break", to_string(r.tie_break)},
          {"clamp_reliance", r.clamp_reliance},
          {"feedback_policy", to_string(r.feedback_policy)},
          {"fallback_policy", to_string(r.fallback_policy)},
          {"assessment_mode", to_string(r.assessment_mode)},
          {"weights",
           {{"w_c", r.weights.self_confidence},
            {"w_k", r.weights.risk},
            {"w_o", r.weights.complexity},
            {"w_s", r.weights.time_sensitivity}}}}},
        {"stochastic",
         {{"p_m", st.p_m},
          {"p_h", st.p_h},
          {"p_a", st.p_a},
          {"d_low_range", {st.d_low.lo, st.d_low.hi}},
          {"d_high_range", {st.d_high.lo, st.d_high.hi}},
          {"replications", st.replications},
          {"base_seed", st.base_seed}}},
        {"deterministic", {{"d_low", c.deterministic.d_low}, {"d_high", c.deterministic.d_high}}},
        {"loss", {{"kind", to_string(c.loss.kind)}, {"aggregation", to_string(c.loss.aggregation)}}},
        {"tasks", {{"per_task", per_task}}},
    };
}

std::string config_hash(const RunConfig& config) {
    const std::string text = to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace reliance
