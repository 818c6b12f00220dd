#include <doctest.h>

#include <cmath>
#include <numeric>

#include "reliance/errors.hpp"
#include "reliance/montecarlo.hpp"
#include "reliance/rng.hpp"

using namespace reliance;
using doctest::Approx;

namespace {

Scenario base_scenario(std::size_t replications = 200) {
    Scenario sc;
    sc.profiles = {TaskProfile{}};
    sc.stochastic.replications = replications;
    sc.stochastic.base_seed = 99;
    return sc;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("rng: reference values and range") {
    // first outputs of SplitMix64 seeded with 0
    SplitMix64 g(0);
    CHECK(g.next() == 0xE220A8397B1DCDAFULL);
    CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
    SplitMix64 u(12345);
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
    }
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}

TEST_CASE("sample_world examples") {
    StochasticSpec spec;
    spec.p_m = 1.0;
    spec.p_h = 1.0;
    for (const auto& t : sample_world(spec, 5).tasks) {
        CHECK(t.model_correct);
        CHECK(t.human_correct);
        CHECK_FALSE(t.attacked_correct);  // p_a = 1
    }

    spec = StochasticSpec{};
    spec.n = 64;
    const auto a = sample_world(spec, 77), b = sample_world(spec, 77);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.tasks[i].model_correct == b.tasks[i].model_correct);
        CHECK(a.tasks[i].d_low == b.tasks[i].d_low);
        CHECK(a.tasks[i].d_high == b.tasks[i].d_high);
        CHECK(a.tasks[i].d_low >= 0.0);
        CHECK(a.tasks[i].d_low < 0.3);
        CHECK(a.tasks[i].d_high >= 0.7);
        CHECK(a.tasks[i].d_high < 1.0);
    }
    const auto fixed = sample_world(spec, 77, FixedScores{0.3, 0.7});
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(fixed.tasks[i].model_correct == a.tasks[i].model_correct);
        CHECK(fixed.tasks[i].d_low == 0.3);
        CHECK(fixed.tasks[i].d_high == 0.7);
    }
}

TEST_CASE("sample_world: law of large numbers over 1e5 draws") {
    // n is bounded by the mask width, so pool many independent worlds
    StochasticSpec spec;
    spec.n = 50;
    spec.p_a = 0.25;
    double model = 0, human = 0, attacked = 0, dl = 0, dh = 0;
    const int worlds = 2000;
    for (int w = 0; w < worlds; ++w) {
        for (const auto& t : sample_world(spec, derive_seed(3, 0, w)).tasks) {
            model += t.model_correct;
            human += t.human_correct;
            attacked += t.attacked_correct;
            dl += t.d_low;
            dh += t.d_high;
        }
    }
    const double total = 50.0 * worlds;
    CHECK(std::abs(model / total - 0.8) < 0.01);
    CHECK(std::abs(human / total - 0.9) < 0.01);
    CHECK(std::abs(attacked / total - 0.75) < 0.01);
    CHECK(std::abs(dl / total - 0.15) < 0.01);
    CHECK(std::abs(dh / total - 0.85) < 0.01);
}

TEST_CASE("replicate: single run and seed determinism") {
    auto sc = base_scenario(1);
    const auto mask = AttackVector::parse("0100000010");
    const auto one = replicate(sc, mask);
    REQUIRE(one.size() == 1);
    const auto world = sample_world(sc.stochastic, derive_seed(99, mask.code(), 0));
    CHECK(one[0] == run_episode(sc.reliance, sc.profiles, mask, world, sc.loss).attack_score);

    sc.stochastic.replications = 300;
    CHECK(replicate(sc, mask) == replicate(sc, mask));
    auto other = sc;
    other.stochastic.base_seed = 100;
    CHECK(replicate(sc, mask) != replicate(other, mask));
}

TEST_CASE("baseline calibration: always trust gives 1-p_m, never trust gives 1-p_h") {
    const std::size_t R = 10000;
    const double n = 10;
    auto sc = base_scenario(R);
    sc.reliance.r_hat = 0.0;
    sc.reliance.tie_break = TieBreak::TrustOnEqual;
    const double m = mean(replicate(sc, AttackVector(10)));
    const double se_m = std::sqrt(0.2 * 0.8 / n / R);
    CHECK(std::abs(m - 0.2) < 0.01);
    CHECK(std::abs(m - 0.2) < 3 * se_m);

    sc = base_scenario(R);
    sc.reliance.r_hat = 1.0;
    sc.reliance.tie_break = TieBreak::DistrustOnEqual;
    const double h = mean(replicate(sc, AttackVector(10)));
    const double se_h = std::sqrt(0.1 * 0.9 / n / R);
    CHECK(std::abs(h - 0.1) < 0.01);
    CHECK(std::abs(h - 0.1) < 3 * se_h);
}

TEST_CASE("compute_stats") {
    std::vector<double> v{0.4, 0.1, 0.3, 0.2};
    const auto s = compute_stats(v);
    CHECK(s.mean == Approx(0.25));
    CHECK(s.std == Approx(std::sqrt(0.0125)));
    CHECK(s.min == 0.1);
    CHECK(s.max == 0.4);
    CHECK(s.median == Approx(0.25));
    CHECK(s.q25 == Approx(0.175));
    CHECK(s.q75 == Approx(0.325));
    CHECK(s.count == 4);
    CHECK_THROWS(compute_stats(std::vector<double>{}));
}

TEST_CASE("property: distribution ordering holds for every cell") {
    auto sc = base_scenario(100);
    const std::vector<std::size_t> budgets{0, 1, 2, 3, 9, 10};
    for (const auto& r : distribution_by_attack_count(sc, budgets)) {
        auto ordered = [](const DistributionStats& s) {
            return s.min <= s.q25 && s.q25 <= s.median && s.median <= s.q75 && s.q75 <= s.max;
        };
        CHECK(ordered(r.pooled));
        CHECK(r.pooled.count == r.placements.size() * 100);
        CHECK(r.best_mean >= r.worst_mean);
        CHECK(r.pooled.argmax_strategy_id == r.best_mask.code());
        for (const auto& p : r.placements) {
            CHECK(ordered(p.stats));
            CHECK(p.stats.mean <= r.best_mean);
            CHECK(p.stats.mean >= r.worst_mean);
        }
    }
    // k=0 is a single placement at the no-attack baseline
    const auto k0 = evaluate_attack_count(sc, 0);
    CHECK(k0.placements.size() == 1);
    CHECK(k0.best_mask.to_string() == "0000000000");
}

TEST_CASE("property: parallel equals sequential") {
    auto sc = base_scenario(150);
    const auto mask = AttackVector::parse("1001000000");
    CHECK(replicate(sc, mask, 1) == replicate(sc, mask, 4));
    const auto a = evaluate_attack_count(sc, 2, 1);
    const auto b = evaluate_attack_count(sc, 2, 3);
    REQUIRE(a.placements.size() == b.placements.size());
    for (std::size_t i = 0; i < a.placements.size(); ++i) {
        CHECK(a.placements[i].mask == b.placements[i].mask);
        CHECK(a.placements[i].stats.mean == b.placements[i].stats.mean);
        CHECK(a.placements[i].stats.std == b.placements[i].stats.std);
    }
    CHECK(a.pooled.mean == b.pooled.mean);
    CHECK(a.pooled.q75 == b.pooled.q75);

    SweepGrid g = default_grid(SweepParameter::HumanAccuracy, 10);
    g.attack_counts = {0, 1, 2};
    sc.stochastic.replications = 50;
    const auto s1 = sensitivity_sweep(g, sc, 1);
    const auto s2 = sensitivity_sweep(g, sc, 4);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].mean_as == s2[i].mean_as);
        CHECK(s1[i].max_as == s2[i].max_as);
        CHECK(s1[i].best_mask == s2[i].best_mask);
        CHECK(s1[i].optimal == s2[i].optimal);
    }
}

TEST_CASE("sweep grids") {
    const auto pm = default_grid(SweepParameter::ModelAccuracy, 10);
    CHECK(pm.values.size() == 4);
    CHECK(pm.attack_counts.size() == 11);
    CHECK(default_grid(SweepParameter::RelianceThreshold, 10).values.size() == 9);
    CHECK(default_grid(SweepParameter::CombinedAccuracy, 10).values[1].label(
              SweepParameter::CombinedAccuracy) == "0.2:0.8");
    CHECK(parse_sweep_parameter("reliance_threshold") == SweepParameter::RelianceThreshold);
    CHECK_FALSE(parse_sweep_parameter("alpha").has_value());

    SweepGrid bad{SweepParameter::ModelAccuracy, {}, {0}};
    CHECK_THROWS_AS(validate(bad, 10), DomainError);
    bad.values = {{1.5, 0}};
    CHECK_THROWS_AS(validate(bad, 10), DomainError);
    bad.values = {{0.5, 0}};
    bad.attack_counts = {11};
    CHECK_THROWS_AS(validate(bad, 10), DomainError);

    const auto sc = base_scenario();
    CHECK(apply_sweep_value(sc, SweepParameter::ModelAccuracy, {0.4, 0}).stochastic.p_m == 0.4);
    CHECK(apply_sweep_value(sc, SweepParameter::HumanAccuracy, {0.4, 0}).stochastic.p_h == 0.4);
    const auto both = apply_sweep_value(sc, SweepParameter::CombinedAccuracy, {0.2, 0.8});
    CHECK(both.stochastic.p_m == 0.2);
    CHECK(both.stochastic.p_h == 0.8);
    CHECK(apply_sweep_value(sc, SweepParameter::RelianceThreshold, {0.3, 0}).reliance.r_hat == 0.3);
}

TEST_CASE("sweep marks exactly one optimal k per value") {
    auto sc = base_scenario(40);
    SweepGrid g = default_grid(SweepParameter::ModelAccuracy, 10);
    g.attack_counts = {0, 1, 2, 3};
    const auto rows = sensitivity_sweep(g, sc);
    CHECK(rows.size() == 16);
    for (std::size_t v = 0; v < 4; ++v) {
        int optimal = 0;
        double best = -1;
        for (std::size_t k = 0; k < 4; ++k) best = std::max(best, rows[v * 4 + k].max_as);
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& r = rows[v * 4 + k];
            CHECK(r.value.value == g.values[v].value);
            CHECK(r.n_attacks == k);
            if (r.optimal) {
                ++optimal;
                CHECK(r.max_as == best);
            }
        }
        CHECK(optimal == 1);
    }
}
