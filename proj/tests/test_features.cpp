#include <doctest.h>

#include "oomcraft/features.hpp"

using namespace oomcraft;

TEST_CASE("indicator map uses lexicographic one-hot order") {
    DiscreteIndicatorMap map(2, 2);
    CHECK(map.dimension() == 4);
    std::vector<int> w = {1, 0};  // 00, 01, 10, 11 -> index 2
    CHECK(map.window_index(w) == 2);
    Vector v = map.evaluate(w);
    CHECK(v.sum() == 1.0);
    CHECK(v(2) == 1.0);

    std::vector<int> bad = {1};
    CHECK_THROWS_AS(map.window_index(bad), InvalidInputError);
    std::vector<int> outside = {2, 0};
    CHECK_THROWS_AS(map.window_index(outside), InvalidInputError);
}

TEST_CASE("indicator outputs sum to one for every window") {
    DiscreteIndicatorMap map(3, 3);
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> w(3);
        for (auto& s : w) s = static_cast<int>(rng.below(3));
        Vector v = map.evaluate(w);
        CHECK(v.sum() == 1.0);
        CHECK(v.maxCoeff() == 1.0);
    }
}

TEST_CASE("gaussian map is exactly one at a center") {
    Matrix centers(2, 3);
    centers << 0.0, 1.0, 2.0, -1.0, 0.5, 0.25;
    Vector bw = Vector::Constant(2, 0.7);
    GaussianRandomMap map(centers, bw, 3, 1, 9);
    Vector at_center = map.evaluate(centers.row(1).transpose());
    CHECK(at_center(1) == 1.0);
    CHECK(at_center(0) < 1.0);
    CHECK(at_center(0) > 0.0);
}

TEST_CASE("gaussian map outputs are bounded in (0, 1] and deterministic") {
    Rng rng(12);
    Matrix samples(40, 2);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 2; ++j) samples(i, j) = rng.normal();
    GaussianRandomMap map = make_gaussian_map(samples, 3, BandwidthRule{}, 7, 2, 1);

    Vector w(2);
    w << 0.3, -0.8;
    Vector a = map.evaluate(w);
    Vector b = map.evaluate(w);
    for (int j = 0; j < 3; ++j) {
        CHECK(a(j) == b(j));  // bit identical
        CHECK(a(j) > 0.0);
        CHECK(a(j) <= 1.0);
    }

    // batch evaluation agrees with pointwise to rounding
    Matrix batch = map.evaluate_rows(samples);
    for (int i = 0; i < 10; ++i) {
        Vector one = map.evaluate(samples.row(i).transpose());
        CHECK((batch.row(i).transpose() - one).cwiseAbs().maxCoeff() < 1e-12);
    }

    GaussianRandomMap again = make_gaussian_map(samples, 3, BandwidthRule{}, 7, 2, 1);
    CHECK((again.centers() - map.centers()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((again.inverse_bandwidths() - map.inverse_bandwidths()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("median pairwise distance of three collinear points") {
    Matrix rows(3, 1);
    rows << 0.0, 1.0, 2.0;
    // pairwise distances {1, 1, 2}, median 1
    CHECK(median_pairwise_distance(rows, 1000, 3) == doctest::Approx(1.0));
}

TEST_CASE("gaussian map construction edge cases") {
    Matrix one(1, 2);
    one << 4.0, -4.0;
    GaussianRandomMap map = make_gaussian_map(one, 1, BandwidthRule{}, 0, 2, 1);
    CHECK((map.centers().row(0).transpose() - one.row(0).transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(map.evaluate(one.row(0).transpose())(0) == 1.0);

    Matrix empty(0, 2);
    CHECK_THROWS_AS(make_gaussian_map(empty, 2, BandwidthRule{}, 0, 2, 1), InvalidInputError);
    CHECK_THROWS_AS(make_gaussian_map(one, 0, BandwidthRule{}, 0, 2, 1), InvalidInputError);

    Vector wrong(3);
    wrong << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(map.evaluate(wrong), InvalidInputError);
}

TEST_CASE("hundred centers are drawn from the sample windows") {
    Rng rng(77);
    Matrix samples(500, 3);
    for (int i = 0; i < 500; ++i)
        for (int j = 0; j < 3; ++j) samples(i, j) = rng.normal();
    GaussianRandomMap map = make_gaussian_map(samples, 100, BandwidthRule{}, 7, 3, 1);
    CHECK(map.dimension() == 100);
    for (int c = 0; c < 100; ++c) {
        bool found = false;
        for (int i = 0; i < 500 && !found; ++i)
            found = (map.centers().row(c) - samples.row(i)).cwiseAbs().maxCoeff() == 0.0;
        CHECK(found);
    }
}
