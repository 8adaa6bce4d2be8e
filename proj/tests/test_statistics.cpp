#include <doctest.h>

#include <algorithm>

#include "oomcraft/statistics.hpp"
#include "oracles.hpp"

using namespace oomcraft;

namespace {

TrajectoryDataset discrete_dataset(std::vector<std::vector<int>> trajs, int k) {
    TrajectoryDataset d;
    d.kind = ObsKind::Discrete;
    d.dim = 1;
    d.alphabet_size = k;
    d.discrete = std::move(trajs);
    return d;
}

TrajectoryDataset continuous_dataset(std::vector<Matrix> trajs) {
    TrajectoryDataset d;
    d.kind = ObsKind::Continuous;
    d.dim = static_cast<int>(trajs.front().cols());
    d.continuous = std::move(trajs);
    return d;
}

Matrix random_walk(Rng& rng, long steps, int dim) {
    Matrix m(steps, dim);
    double x = 0.0;
    for (long t = 0; t < steps; ++t)
        for (int j = 0; j < dim; ++j) m(t, j) = (x += 0.3 * rng.normal());
    return m;
}

} // namespace

TEST_CASE("window counts follow T - 2L per trajectory") {
    ExtractionCounts counts;
    auto d1 = discrete_dataset({{0, 1, 0, 1, 0, 1, 0}}, 2);
    auto triples = extract_windows(d1, 3, &counts);
    CHECK(triples.size() == 1);
    CHECK(counts.windows == 1);

    auto d2 = discrete_dataset({std::vector<int>(10, 0), std::vector<int>(10, 1)}, 2);
    triples = extract_windows(d2, 3, &counts);
    CHECK(triples.size() == 8);

    // short trajectories are skipped with a counter, not fatal
    auto d3 = discrete_dataset({{0, 1}, {0, 1, 0, 1, 0, 1, 0}}, 2);
    triples = extract_windows(d3, 3, &counts);
    CHECK(triples.size() == 1);
    CHECK(counts.skipped_trajectories == 1);
}

TEST_CASE("window pieces enumerate by hand for (0,1,0,1,0) at L=1") {
    auto d = discrete_dataset({{0, 1, 0, 1, 0}}, 2);
    auto triples = extract_windows(d, 1);
    REQUIRE(triples.size() == 3);
    int expect[3][3] = {{0, 1, 0}, {1, 0, 1}, {0, 1, 0}};
    for (int n = 0; n < 3; ++n) {
        CHECK(triples[n].prefix_d[0] == expect[n][0]);
        CHECK(triples[n].mid_d[0] == expect[n][1]);
        CHECK(triples[n].suffix_d[0] == expect[n][2]);
        // midblock starts at the mid observation
        CHECK(triples[n].midblock_d[0] == expect[n][1]);
    }
}

TEST_CASE("single-window hand count: trajectory (0,0,1) at L=1") {
    auto d = discrete_dataset({{0, 0, 1}}, 2);
    DiscreteIndicatorMap phi(2, 1);
    SufficientStats stats = accumulate_discrete(d, phi, phi);
    CHECK(stats.n == 1);
    // triple: prefix=(0), mid=0, midblock=(0), suffix=(1)
    CHECK(stats.phi1_bar(0) == 1.0);
    CHECK(stats.phi2_bar(0) == 1.0);
    CHECK(stats.c12(0, 0) == 1.0);
    CHECK(stats.c13[0](0, 1) == 1.0);  // e_0 e_1^T
    CHECK(stats.c13[0].sum() == 1.0);
    CHECK(stats.c13[1].sum() == 0.0);
}

TEST_CASE("one-symbol alphabet gives constant features") {
    auto d = discrete_dataset({{0, 0, 0, 0, 0, 0}}, 1);
    DiscreteIndicatorMap phi(1, 1);
    SufficientStats stats = accumulate_discrete(d, phi, phi);
    CHECK(stats.phi1_bar(0) == 1.0);
    CHECK(stats.c12(0, 0) == 1.0);
}

TEST_CASE("iid uniform binary data gives quarter cross moments") {
    Rng rng(2024);
    std::vector<int> traj(100002);
    for (auto& s : traj) s = static_cast<int>(rng.below(2));
    auto d = discrete_dataset({std::move(traj)}, 2);
    DiscreteIndicatorMap phi(2, 1);
    SufficientStats stats = accumulate_discrete(d, phi, phi);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(stats.c12(i, j) == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("c13 partitions the prefix-suffix moment over mid symbols") {
    Rng rng(17);
    Matrix p(2, 2);
    p << 0.7, 0.3, 0.4, 0.6;
    oracles::MarkovChain chain(p);
    auto traj = chain.simulate(0, 500, rng);
    auto d = discrete_dataset({traj}, 2);
    DiscreteIndicatorMap phi(2, 2);
    SufficientStats stats = accumulate_discrete(d, phi, phi);

    // direct mean of phi1(prefix) phi2(suffix)^T
    Matrix direct = Matrix::Zero(4, 4);
    auto triples = extract_windows(d, 2);
    for (const auto& t : triples)
        direct(phi.window_index(t.prefix_d), phi.window_index(t.suffix_d)) += 1.0;
    direct /= static_cast<double>(triples.size());

    Matrix summed = stats.c13[0] + stats.c13[1];
    CHECK((summed - direct).cwiseAbs().maxCoeff() < 1e-15);

    // with indicator features, N * c12 holds integer counts summing to N
    Matrix counts = stats.c12 * static_cast<double>(stats.n);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(counts(i, j) == doctest::Approx(std::round(counts(i, j))).epsilon(1e-12));
    CHECK(counts.sum() == doctest::Approx(static_cast<double>(stats.n)));
}

TEST_CASE("zero usable windows is an input error") {
    auto d = discrete_dataset({{0, 1}}, 2);
    DiscreteIndicatorMap phi(2, 1);
    CHECK_THROWS_AS(accumulate_discrete(d, phi, phi), InvalidInputError);
}

TEST_CASE("binless accumulation matches the materialized window definition") {
    Rng rng(3);
    auto data = continuous_dataset({random_walk(rng, 40, 1), random_walk(rng, 25, 1)});
    Matrix pool = collect_feature_windows(data, 2, 0, 0);
    GaussianRandomMap phi = make_gaussian_map(pool, 6, BandwidthRule{}, 11, 2, 1);
    auto [stats, cache] = accumulate_binless(data, phi, phi);

    auto triples = extract_windows(data, 2);
    REQUIRE(stats.n == static_cast<long>(triples.size()));
    Vector phi1 = Vector::Zero(6);
    Matrix c12 = Matrix::Zero(6, 6);
    for (const auto& t : triples) {
        Vector a = phi.evaluate(t.prefix_c);
        Vector b = phi.evaluate(t.midblock_c);
        phi1 += a;
        c12 += a * b.transpose();
    }
    phi1 /= static_cast<double>(stats.n);
    c12 /= static_cast<double>(stats.n);
    CHECK((stats.phi1_bar - phi1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((stats.c12 - c12).cwiseAbs().maxCoeff() < 1e-12);

    for (std::size_t n = 0; n < triples.size(); ++n) {
        CHECK((cache.prefix_windows.row(static_cast<long>(n)).transpose() - triples[n].prefix_c)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        CHECK((cache.suffix_windows.row(static_cast<long>(n)).transpose() - triples[n].suffix_c)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        CHECK(cache.mids(static_cast<long>(n), 0) == triples[n].mid_c(0));
    }
}

TEST_CASE("window stride keeps every stride-th window") {
    Rng rng(4);
    auto data = continuous_dataset({random_walk(rng, 50, 1)});
    Matrix pool = collect_feature_windows(data, 1, 0, 0);
    GaussianRandomMap phi = make_gaussian_map(pool, 4, BandwidthRule{}, 1, 1, 1);
    auto [stats_all, cache_all] = accumulate_binless(data, phi, phi, 1);
    auto [stats_s, cache_s] = accumulate_binless(data, phi, phi, 3);
    CHECK(stats_s.n == (stats_all.n + 2) / 3);
    for (long k = 0; k < stats_s.n; ++k)
        CHECK(cache_s.mids(k, 0) == cache_all.mids(3 * k, 0));
}

TEST_CASE("accumulation is order independent and merges by count weighting") {
    Rng rng(29);
    std::vector<Matrix> trajs;
    for (int i = 0; i < 6; ++i) trajs.push_back(random_walk(rng, 30 + 7 * i, 1));
    auto data = continuous_dataset({trajs.begin(), trajs.end()});
    Matrix pool = collect_feature_windows(data, 2, 0, 0);
    GaussianRandomMap phi = make_gaussian_map(pool, 5, BandwidthRule{}, 2, 2, 1);

    auto [stats, cache] = accumulate_binless(data, phi, phi);

    std::vector<Matrix> reversed(trajs.rbegin(), trajs.rend());
    auto data_rev = continuous_dataset({reversed.begin(), reversed.end()});
    auto [stats_rev, cache_rev] = accumulate_binless(data_rev, phi, phi);
    CHECK((stats.c12 - stats_rev.c12).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((stats.phi1_bar - stats_rev.phi1_bar).cwiseAbs().maxCoeff() < 1e-12);

    // shard into two halves and merge
    auto front = continuous_dataset({trajs.begin(), trajs.begin() + 3});
    auto back = continuous_dataset({trajs.begin() + 3, trajs.end()});
    auto [stats_a, ca] = accumulate_binless(front, phi, phi);
    auto [stats_b, cb] = accumulate_binless(back, phi, phi);
    SufficientStats merged = merge_stats(stats_a, stats_b);
    CHECK(merged.n == stats.n);
    CHECK((merged.c12 - stats.c12).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((merged.phi1_bar - stats.phi1_bar).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((merged.phi2_bar - stats.phi2_bar).cwiseAbs().maxCoeff() < 1e-10);
}
