#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pw/inference.hpp"

namespace {

pw::ZoomedRegion empty_region(int h, int w) {
    pw::ZoomedRegion region;
    region.maps.joints = pw::Tensor3(h, w, pw::kNumJoints);
    region.maps.neighbors = pw::Tensor3(h, w, pw::kNeighborChannels);
    region.maps.parts = pw::Tensor3(h, w, pw::kNumParts);
    return region;
}

pw::JointProposal prop(float x, float y, int type, float score) {
    return {{x, y}, type, score};
}

// random fully-connected instance with mixed attraction/repulsion
pw::AssemblyProblem random_problem(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    std::uniform_int_distribution<int> type(0, pw::kNumJoints - 1);
    std::uniform_real_distribution<double> cost(-2.0, 2.0);
    pw::AssemblyProblem p;
    for (int i = 0; i < n; ++i)
        p.nodes.push_back({{u(rng) * 50.f, u(rng) * 50.f}, type(rng), 0.5f + 0.5f * u(rng)});
    p.unary.resize(n);
    p.pair_cost.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) p.unary[i] = cost(rng);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double c = cost(rng);
            p.pair_ref(i, j) = c;
            p.pair_ref(j, i) = c;
        }
    return p;
}

}  // namespace

TEST_CASE("problem construction: log-odds unaries and pair costs") {
    const auto region = empty_region(32, 32);
    const pw::PartLabelMap labels(32, 32);
    const auto& assoc = pw::JointPartAssociation::standard();
    pw::LogisticModel model;
    model.pooled.b = std::log(0.3 / 0.7);  // P(same person) = 0.3 for typed pairs

    const std::vector<pw::JointProposal> props = {prop(5.f, 5.f, pw::kForehead, 0.5f),
                                                  prop(9.f, 8.f, pw::kNeck, 0.9f)};
    const pw::AssemblyProblem p = pw::build_problem(region, props, model, assoc, labels);
    CHECK(p.unary[0] == doctest::Approx(0.0));
    CHECK(p.unary[1] == doctest::Approx(std::log(1.0 / 9.0)));  // ~ -2.197
    CHECK(p.pair(0, 1) == doctest::Approx(std::log(0.7 / 0.3)));  // ~ +0.847
    CHECK(p.pair(0, 1) == p.pair(1, 0));
}

TEST_CASE("problem construction clamps saturated scores") {
    const auto region = empty_region(16, 16);
    const pw::PartLabelMap labels(16, 16);
    const auto& assoc = pw::JointPartAssociation::standard();
    const pw::LogisticModel model;
    const pw::AssemblyProblem p =
        pw::build_problem(region, {prop(1.f, 1.f, 0, 1.0f)}, model, assoc, labels);
    CHECK(std::isfinite(p.unary[0]));
    CHECK(p.unary[0] == doctest::Approx(std::log(1e-6 / (1.0 - 1e-6))));
}

TEST_CASE("disabling segment features zeroes their half of the pair cost") {
    const auto region = empty_region(32, 32);
    pw::PartLabelMap labels(32, 32);
    for (auto& l : labels.labels) l = pw::kHead;
    const auto& assoc = pw::JointPartAssociation::standard();
    pw::LogisticModel model;
    model.pooled.w[4] = 2.0;  // weight on a segment-consistency slot

    const std::vector<pw::JointProposal> props = {prop(5.f, 5.f, pw::kForehead, 0.9f),
                                                  prop(9.f, 8.f, pw::kNeck, 0.9f)};
    const auto with = pw::build_problem(region, props, model, assoc, labels, true);
    const auto without = pw::build_problem(region, props, model, assoc, labels, false);
    CHECK(with.pair(0, 1) != without.pair(0, 1));
    CHECK(without.pair(0, 1) == doctest::Approx(0.0));  // logit collapses to b = 0
}

TEST_CASE("objective: empty, singleton clusters, and merged pair") {
    pw::AssemblyProblem p = random_problem(2, 1);
    p.nodes[0].joint_type = pw::kForehead;
    p.nodes[1].joint_type = pw::kNeck;
    p.unary = {-1.386, -0.405};
    p.pair_ref(0, 1) = p.pair_ref(1, 0) = 0.847;

    CHECK(pw::objective(p, {{-1, -1}}) == doctest::Approx(0.0));
    CHECK(pw::objective(p, {{0, 1}}) == doctest::Approx(-1.791));
    CHECK(pw::objective(p, {{0, 0}}) == doctest::Approx(-0.944));
}

TEST_CASE("objective rejects infeasible labelings") {
    pw::AssemblyProblem p = random_problem(2, 2);
    p.nodes[0].joint_type = 3;
    p.nodes[1].joint_type = 3;
    CHECK(!pw::is_feasible(p, {{0, 0}}));  // duplicate type in one cluster
    CHECK_THROWS_AS(pw::objective(p, {{0, 0}}), std::invalid_argument);
}

TEST_CASE("same-type exclusion steers the optimum to separate clusters") {
    // joining would give -0.944, but both nodes share a joint type
    pw::AssemblyProblem p;
    p.nodes = {prop(1.f, 1.f, pw::kForehead, 0.8f), prop(20.f, 1.f, pw::kForehead, 0.6f)};
    p.unary = {-1.386, -0.405};
    p.pair_cost = {0.0, 0.847, 0.847, 0.0};
    for (auto mode : {pw::SolverMode::kOracle, pw::SolverMode::kExact,
                      pw::SolverMode::kHeuristic}) {
        pw::SolverConfig cfg;
        cfg.mode = mode;
        const pw::Labeling l = pw::solve(p, cfg);
        CHECK(pw::objective(p, l) == doctest::Approx(-1.791));
        CHECK(l.selected(0));
        CHECK(l.selected(1));
        CHECK(l.cluster[0] != l.cluster[1]);
    }
}

TEST_CASE("a lone positive-cost node stays unselected") {
    pw::AssemblyProblem p;
    p.nodes = {prop(1.f, 1.f, 0, 0.4f)};
    p.unary = {0.3};
    p.pair_cost = {0.0};
    for (auto mode : {pw::SolverMode::kOracle, pw::SolverMode::kExact,
                      pw::SolverMode::kHeuristic}) {
        pw::SolverConfig cfg;
        cfg.mode = mode;
        const pw::Labeling l = pw::solve(p, cfg);
        CHECK(!l.selected(0));
        CHECK(pw::objective(p, l) == doctest::Approx(0.0));
    }
}

TEST_CASE("exact solver matches the enumeration oracle") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> size(1, 7);
    for (int trial = 0; trial < 60; ++trial) {
        const pw::AssemblyProblem p = random_problem(size(rng), 1000 + trial);
        const double oracle = pw::objective(p, pw::solve_oracle(p));
        const double exact = pw::objective(p, pw::solve_exact(p));
        CHECK(exact == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("exact solutions lower-bound random feasible labelings") {
    const pw::AssemblyProblem p = random_problem(8, 31);
    const double best = pw::objective(p, pw::solve_exact(p));
    std::mt19937_64 rng(32);
    std::uniform_int_distribution<int> pick(-1, 3);
    int checked = 0;
    while (checked < 50) {
        pw::Labeling l;
        for (int i = 0; i < p.size(); ++i) l.cluster.push_back(pick(rng));
        if (!pw::is_feasible(p, l)) continue;
        CHECK(best <= pw::objective(p, l) + 1e-9);
        ++checked;
    }
}

TEST_CASE("heuristic output is feasible and deterministic") {
    for (int trial = 0; trial < 10; ++trial) {
        const pw::AssemblyProblem p = random_problem(20, 500 + trial);
        const pw::Labeling a = pw::solve_heuristic(p, 3, 10000, 42);
        const pw::Labeling b = pw::solve_heuristic(p, 3, 10000, 42);
        CHECK(pw::is_feasible(p, a));
        CHECK(a == b);
    }
}

TEST_CASE("heuristic is a local optimum under single-node moves") {
    const pw::AssemblyProblem p = random_problem(12, 9);
    pw::Labeling l = pw::solve_heuristic(p, 2, 10000, 7);
    const double base = pw::objective(p, l);
    // no single reassignment (unselect / move to any cluster id) improves
    for (int v = 0; v < p.size(); ++v) {
        const int orig = l.cluster[v];
        for (int c = -1; c <= p.size(); ++c) {
            l.cluster[v] = c;
            if (pw::is_feasible(p, l)) CHECK(pw::objective(p, l) >= base - 1e-9);
        }
        l.cluster[v] = orig;
    }
}

TEST_CASE("capacity limits raise errors") {
    const pw::AssemblyProblem p = random_problem(13, 4);
    CHECK_THROWS_AS(pw::solve_oracle(p), pw::CapacityError);
    CHECK_THROWS_AS(pw::solve_exact(p, 12), pw::CapacityError);
    pw::SolverConfig cfg;
    cfg.mode = pw::SolverMode::kHeuristic;
    CHECK_NOTHROW(pw::solve(p, cfg));
}

TEST_CASE("solver mode names parse") {
    CHECK(pw::solver_mode_from_name("exact") == pw::SolverMode::kExact);
    CHECK(pw::solver_mode_from_name("heuristic") == pw::SolverMode::kHeuristic);
    CHECK(pw::solver_mode_from_name("oracle") == pw::SolverMode::kOracle);
    CHECK_THROWS_AS(pw::solver_mode_from_name("annealing"), pw::InputError);
}
