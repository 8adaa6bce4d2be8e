#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oomcraft/io_formats.hpp"

using namespace oomcraft;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("oomcraft_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Oom random_oom(Rng& rng, int m, int k, OomFlavor flavor) {
    Oom model;
    model.omega = RowVector::Zero(m);
    model.sigma = Vector::Zero(m);
    for (int i = 0; i < m; ++i) {
        model.omega(i) = rng.normal();
        model.sigma(i) = rng.normal() + 2.0;
    }
    if (flavor == OomFlavor::Equilibrium) model.omega /= model.omega * model.sigma;
    model.flavor = flavor;
    for (int x = 0; x < k; ++x) {
        Matrix xi(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) xi(i, j) = rng.normal() * std::pow(10.0, rng.normal());
        model.xi.push_back(std::move(xi));
    }
    return model;
}

} // namespace

TEST_CASE("reals round trip bit exactly through 17 significant digits") {
    Rng rng(1);
    std::vector<double> tricky = {0.0,  -0.0, 0.1, 1.0 / 3.0, 1e-308, 1e308, -2.5e-17,
                                  M_PI, 2.0,  1e17};
    for (int i = 0; i < 200; ++i) tricky.push_back(rng.normal() * std::pow(10.0, rng.normal() * 30));
    for (double v : tricky) {
        double back = parse_real(format_real(v), "test");
        CHECK(std::memcmp(&back, &v, sizeof v) == 0);
    }
    CHECK_THROWS_AS(parse_real("nan", "test"), IoError);
    CHECK_THROWS_AS(parse_real("inf", "test"), IoError);
    CHECK_THROWS_AS(parse_real("1.5x", "test"), IoError);
    CHECK_THROWS_AS(parse_real("", "test"), IoError);
}

TEST_CASE("discrete dataset round trips") {
    TempDir tmp;
    TrajectoryDataset data;
    data.kind = ObsKind::Discrete;
    data.dim = 1;
    data.alphabet_size = 3;
    data.discrete = {{0, 1, 2, 1, 0}, {2, 2, 2}};
    data.meta["seed"] = "77";

    fs::path manifest = write_dataset(data, tmp.path, "run");
    TrajectoryDataset back = read_dataset(manifest);
    CHECK(back.kind == ObsKind::Discrete);
    CHECK(back.alphabet_size == 3);
    CHECK(back.discrete == data.discrete);
    CHECK(back.meta.at("seed") == "77");
}

TEST_CASE("continuous dataset round trips bit exactly") {
    TempDir tmp;
    Rng rng(9);
    TrajectoryDataset data;
    data.kind = ObsKind::Continuous;
    data.dim = 2;
    for (int i = 0; i < 3; ++i) {
        Matrix t(4 + i, 2);
        for (long r = 0; r < t.rows(); ++r)
            for (int c = 0; c < 2; ++c) t(r, c) = rng.normal() * std::pow(10.0, rng.normal() * 5);
        data.continuous.push_back(std::move(t));
    }
    fs::path manifest = write_dataset(data, tmp.path);
    TrajectoryDataset back = read_dataset(manifest);
    REQUIRE(back.continuous.size() == 3);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(back.continuous[i].rows() == data.continuous[i].rows());
        CHECK((back.continuous[i] - data.continuous[i]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("manifest referencing a missing file names the path") {
    TempDir tmp;
    std::ofstream out(tmp.path / "bad.manifest");
    out << "#oomcraft-manifest v1\nghost.txt\n";
    out.close();
    try {
        read_dataset(tmp.path / "bad.manifest");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("ghost.txt") != std::string::npos);
    }
}

TEST_CASE("wrong-arity record is a parse error carrying the line number") {
    TempDir tmp;
    {
        std::ofstream t(tmp.path / "t.txt");
        t << "#oomcraft-traj v1 kind=continuous dim=2\n0.5,1.5\n1.0,2.0,3.0\n";
        std::ofstream m(tmp.path / "m.manifest");
        m << "#oomcraft-manifest v1\nt.txt\n";
    }
    try {
        read_dataset(tmp.path / "m.manifest");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        std::string msg = e.what();
        CHECK(msg.find(":3") != std::string::npos);  // offending line
        CHECK(msg.find("arity") != std::string::npos);
    }
}

TEST_CASE("manifests reject trajectories of mixed kind or dimension") {
    TempDir tmp;
    {
        std::ofstream a(tmp.path / "a.txt");
        a << "#oomcraft-traj v1 kind=continuous dim=1\n0.5\n";
        std::ofstream b(tmp.path / "b.txt");
        b << "#oomcraft-traj v1 kind=continuous dim=2\n0.5,1.0\n";
        std::ofstream m(tmp.path / "m.manifest");
        m << "#oomcraft-manifest v1\na.txt\nb.txt\n";
    }
    try {
        read_dataset(tmp.path / "m.manifest");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("b.txt") != std::string::npos);
    }
}

TEST_CASE("version and literal errors are rejected") {
    TempDir tmp;
    {
        std::ofstream t(tmp.path / "t.txt");
        t << "#oomcraft-traj v2 kind=continuous dim=1\n0.5\n";
        std::ofstream m(tmp.path / "m.manifest");
        m << "#oomcraft-manifest v1\nt.txt\n";
    }
    CHECK_THROWS_AS(read_dataset(tmp.path / "m.manifest"), IoError);
    {
        std::ofstream t(tmp.path / "t.txt");
        t << "#oomcraft-traj v1 kind=continuous dim=1\ninf\n";
    }
    CHECK_THROWS_AS(read_dataset(tmp.path / "m.manifest"), IoError);
}

TEST_CASE("two-symbol model file round trips byte for byte") {
    TempDir tmp;
    Rng rng(21);
    SavedModel model;
    model.oom = random_oom(rng, 1, 2, OomFlavor::Plain);
    model.indicator_map = DiscreteIndicatorMap(2, 1);

    fs::path p1 = tmp.path / "a.model", p2 = tmp.path / "b.model";
    write_model(model, p1);
    SavedModel back = read_model(p1);
    REQUIRE(back.oom.has_value());
    CHECK((back.oom->omega - model.oom->omega).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.oom->xi[0] - model.oom->xi[0]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.oom->xi[1] - model.oom->xi[1]).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(back.indicator_map.has_value());
    CHECK(back.indicator_map->dimension() == 2);

    write_model(back, p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("randomized models round trip bit exactly") {
    TempDir tmp;
    Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        SavedModel model;
        if (trial % 2 == 0) {
            int m = 1 + static_cast<int>(rng.below(4));
            int k = 1 + static_cast<int>(rng.below(3));
            model.oom = random_oom(rng, m, k,
                                   trial % 4 == 0 ? OomFlavor::Plain : OomFlavor::Equilibrium);
            model.indicator_map = DiscreteIndicatorMap(k, 2);
            if (trial == 2) {
                model.bins = BinSpec::uniform_1d(0.0, 2.0, k);
                model.oom->xi.resize(static_cast<std::size_t>(k), model.oom->xi[0]);
            }
        } else {
            int m = 1 + static_cast<int>(rng.below(3));
            int d = 1 + static_cast<int>(rng.below(2));
            long n = 1 + static_cast<long>(rng.below(20));
            BinlessOom b;
            b.sample_points.resize(n, d);
            b.left_factors.resize(n, m);
            b.right_factors.resize(n, m);
            for (long i = 0; i < n; ++i) {
                for (int j = 0; j < d; ++j) b.sample_points(i, j) = rng.normal();
                for (int j = 0; j < m; ++j) {
                    b.left_factors(i, j) = rng.normal();
                    b.right_factors(i, j) = rng.normal();
                }
            }
            b.sigma = Vector::Ones(m);
            b.omega_eq = RowVector::Zero(m);
            for (int j = 0; j < m; ++j) b.omega_eq(j) = rng.normal() + 1.5;
            b.omega_eq /= b.omega_eq * b.sigma;
            model.binless = std::move(b);

            Matrix centers(3, 2 * d);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 2 * d; ++j) centers(i, j) = rng.normal();
            model.gaussian_map =
                GaussianRandomMap(centers, Vector::Constant(3, 0.37), 2, d, 123);
        }
        fs::path path = tmp.path / ("m" + std::to_string(trial) + ".model");
        write_model(model, path);
        SavedModel back = read_model(path);
        fs::path path2 = tmp.path / ("m" + std::to_string(trial) + "_again.model");
        write_model(back, path2);
        std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
        std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
        std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
        CHECK(s1 == s2);
    }
}

TEST_CASE("summary csv carries mean and std per estimator") {
    TempDir tmp;
    ResultsTable table;
    for (int rep = 0; rep < 3; ++rep) {
        CellResult c;
        c.T = 50;
        c.estimator = EstimatorKind::Empirical;
        c.repeat = rep;
        c.value = 0.1 * rep;
        c.error = 0.1 * rep;
        c.ok = true;
        table.cells.push_back(c);
    }
    write_results_csv(table, tmp.path / "r.csv");
    write_summary_csv(table, tmp.path / "s.csv");
    std::ifstream s(tmp.path / "s.csv");
    std::string header, row;
    std::getline(s, header);
    std::getline(s, row);
    CHECK(header == "T,estimator,mean_error,std_error");
    CHECK(row.find("50,empirical,") == 0);
}
