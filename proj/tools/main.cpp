#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>

#include "oomcraft/io_formats.hpp"
#include "oomcraft/run_config.hpp"

namespace fs = std::filesystem;
using namespace oomcraft;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const RunConfig& cfg,
                           const std::string& section) {
    if (flag) return *flag;
    if (cfg.has(section, "seed"))
        return static_cast<std::uint64_t>(cfg.get_long(section, "seed", 0));
    std::uint64_t fresh = std::random_device{}();
    std::cerr << "seed=" << fresh << " (auto-generated; pass --seed to reproduce)\n";
    return fresh;
}

RunConfig load_config(const std::string& path) {
    return path.empty() ? RunConfig{} : RunConfig::from_file(path);
}

int cmd_simulate(const std::string& system_name, const std::string& config_path,
                 const std::string& out_dir, std::optional<std::uint64_t> seed, int threads) {
    RunConfig cfg = load_config(config_path);
    SystemId system = system_from_name(
        system_name.empty() ? cfg.get_string("sim", "system", "1d") : system_name);
    SimConfig sim = build_sim_config(cfg, system);
    sim.seed = resolve_seed(seed, cfg, "sim");

    TrajectoryDataset data;
    if (system == SystemId::Wells1D) {
        MultiWellPotential1D pot = MultiWellPotential1D::benchmark();
        data = simulate_trajectories(pot, sim, ObservationMap{}, threads);
    } else {
        GaussianMixturePotential pot = GaussianMixturePotential::benchmark2d();
        data = simulate_trajectories(pot, sim, ObservationMap{}, threads);
    }
    fs::path manifest = write_dataset(data, out_dir);
    std::cout << "wrote " << data.num_trajectories() << " trajectories ("
              << (data.aborted ? std::to_string(data.aborted) + " aborted, " : "")
              << "manifest " << manifest.string() << ")\n";
    return kExitOk;
}

int cmd_learn(const std::string& mode, const std::string& data_path,
              const std::string& config_path, const std::string& out_path,
              std::optional<std::uint64_t> seed) {
    RunConfig cfg = load_config(config_path);
    std::string the_mode = mode.empty() ? cfg.get_string("learner", "mode", "discrete") : mode;
    LearnerConfig learner = build_learner_config(cfg);
    if (seed) learner.seed = *seed;

    TrajectoryDataset data = read_dataset(data_path);
    SavedModel saved;
    if (the_mode == "discrete" || the_mode == "eq") {
        if (data.kind != ObsKind::Discrete)
            throw InvalidInputError("learn --mode " + the_mode + " needs a discrete dataset");
        OomFlavor flavor = the_mode == "eq" ? OomFlavor::Equilibrium : OomFlavor::Plain;
        saved.oom = fit_discrete(data, learner, flavor);
        saved.indicator_map = DiscreteIndicatorMap(data.alphabet_size, learner.order);
    } else if (the_mode == "binless") {
        if (data.kind != ObsKind::Continuous)
            throw InvalidInputError("learn --mode binless needs a continuous dataset");
        BinlessFit fit = fit_binless(data, learner);
        saved.binless = std::move(fit.model);
        saved.gaussian_map = std::move(fit.phi1);
    } else if (the_mode == "coarse") {
        if (data.kind != ObsKind::Continuous)
            throw InvalidInputError("learn --mode coarse needs a continuous dataset");
        int cells = static_cast<int>(cfg.get_long("learner", "bins", 100));
        double lo = cfg.get_real("learner", "box_lo", 0.0);
        double hi = cfg.get_real("learner", "box_hi", 2.0);
        if (data.dim != 1)
            throw InvalidInputError("learn --mode coarse currently supports 1-D observations");
        CoarseGrainedOom coarse = fit_coarse_grained(data, BinSpec::uniform_1d(lo, hi, cells), learner);
        saved.oom = std::move(coarse.oom);
        saved.bins = std::move(coarse.bins);
    } else {
        throw InvalidInputError("unknown learn mode '" + the_mode + "'");
    }
    write_model(saved, out_path);
    std::cout << "wrote model " << out_path << "\n";
    // fixed-point diagnostic of the equilibrium state (small when the
    // learned total operator actually has the limit the constraint assumes)
    if (saved.binless) {
        std::cerr << "equilibrium residual |w Xi(O) - w| = "
                  << equilibrium_residual(saved.binless->omega_eq, saved.binless->total_operator())
                  << "\n";
    } else if (saved.oom && saved.oom->flavor == OomFlavor::Equilibrium) {
        std::cerr << "equilibrium residual |w Xi(O) - w| = "
                  << equilibrium_residual(saved.oom->omega, total_operator(*saved.oom)) << "\n";
    }
    return kExitOk;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

int cmd_eval(const std::string& model_path, const std::string& query) {
    SavedModel saved = read_model(model_path);
    std::vector<std::string> q = tokenize(query);
    if (q.empty()) throw InvalidInputError("empty --query");

    if (q[0] == "prob") {
        if (!saved.oom) throw InvalidInputError("query 'prob' needs a discrete model");
        std::vector<int> seq;
        for (std::size_t i = 1; i < q.size(); ++i) seq.push_back(std::stoi(q[i]));
        std::cout << "sequence,probability\n";
        std::string joined;
        for (std::size_t i = 0; i < seq.size(); ++i)
            joined += (i ? " " : "") + std::to_string(seq[i]);
        std::cout << '"' << joined << '"' << ',' << format_real(sequence_probability(*saved.oom, seq))
                  << '\n';
        return kExitOk;
    }
    if (q[0] == "mean") {
        if (!saved.binless) throw InvalidInputError("query 'mean' needs a binless model");
        std::cout << "component,value\n";
        for (int j = 0; j < saved.binless->obs_dim(); ++j) {
            double v = binless_expectation_r1(
                *saved.binless, [j](const Eigen::Ref<const Vector>& x) { return x(j); });
            std::cout << j << ',' << format_real(v) << '\n';
        }
        return kExitOk;
    }
    if (q[0] == "hist") {
        int bins = 100;
        double lo = 0.0, hi = 2.0;
        for (std::size_t i = 1; i < q.size(); ++i) {
            if (q[i] == "--bins" && i + 1 < q.size()) {
                bins = std::stoi(q[++i]);
            } else if (q[i] == "--range" && i + 1 < q.size()) {
                std::string r = q[++i];
                auto comma = r.find(',');
                if (comma == std::string::npos)
                    throw InvalidInputError("hist --range expects lo,hi");
                lo = parse_real(r.substr(0, comma), "hist range");
                hi = parse_real(r.substr(comma + 1), "hist range");
            } else {
                throw InvalidInputError("unknown hist option '" + q[i] + "'");
            }
        }
        std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
        for (int b = 0; b <= bins; ++b)
            edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * static_cast<double>(b) / bins;
        Vector weights;
        if (saved.binless) {
            weights = binless_histogram(*saved.binless, edges);
        } else if (saved.oom && saved.bins) {
            if (saved.oom->flavor != OomFlavor::Equilibrium)
                throw InvalidInputError("query 'hist' needs an equilibrium model");
            // stationary bin masses of the coarse model, re-binned to the query grid
            weights = Vector::Zero(bins);
            const auto& src = saved.bins->boundaries()[0];
            for (int j = 0; j + 1 < static_cast<int>(src.size()); ++j) {
                auto gj = [&](std::span<const int> z) { return z[0] == j ? 1.0 : 0.0; };
                double mass = equilibrium_expectation_discrete(*saved.oom, gj, 1);
                double center = 0.5 * (src[static_cast<std::size_t>(j)] +
                                       src[static_cast<std::size_t>(j) + 1]);
                if (center < lo || center > hi) continue;
                int b = std::min(bins - 1, static_cast<int>((center - lo) / (hi - lo) * bins));
                weights(b) += mass;
            }
        } else {
            throw InvalidInputError("query 'hist' needs a binless or coarse-grained model");
        }
        std::cout << "bin_left,bin_right,weight\n";
        for (int b = 0; b < bins; ++b)
            std::cout << format_real(edges[static_cast<std::size_t>(b)]) << ','
                      << format_real(edges[static_cast<std::size_t>(b) + 1]) << ','
                      << format_real(weights(b)) << '\n';
        return kExitOk;
    }
    if (q[0] == "tica") {
        if (!saved.binless) throw InvalidInputError("query 'tica' needs a binless model");
        long lag = 100;
        for (std::size_t i = 1; i < q.size(); ++i) {
            if (q[i] == "--lag" && i + 1 < q.size())
                lag = std::stol(q[++i]);
            else
                throw InvalidInputError("unknown tica option '" + q[i] + "'");
        }
        TicaResult r = tica_from_binless(*saved.binless, lag);
        std::cout << "lag,lambda";
        for (int j = 0; j < r.w.size(); ++j) std::cout << ",w" << j;
        std::cout << '\n' << lag << ',' << format_real(r.lambda);
        for (int j = 0; j < r.w.size(); ++j) std::cout << ',' << format_real(r.w(j));
        std::cout << '\n';
        return kExitOk;
    }
    throw InvalidInputError("unknown query '" + q[0] +
                            "' (expected prob, mean, hist or tica)");
}

int cmd_reproduce(const std::string& figure, const std::string& config_path, long budget,
                  int repeats, const std::string& out_dir, std::optional<std::uint64_t> seed,
                  int threads) {
    RunConfig cfg = load_config(config_path);
    ExperimentPlan plan = build_plan(cfg, figure);
    if (budget > 0) plan.budget = budget;
    if (repeats > 0) plan.repeats = repeats;
    if (threads >= 0) plan.threads = threads;
    plan.seed = resolve_seed(seed, cfg, "plan");

    fs::create_directories(out_dir);
    fs::path dir(out_dir);

    if (figure == "2d") {
        // histogram figure: one T, binless + empirical + oracle histograms
        Wells1DOracle oracle = make_wells_oracle(0.3);
        long T = plan.t_grid.empty() ? 50 : plan.t_grid[0];
        SimConfig sim;
        sim.beta = 0.3;
        sim.dt = 0.002;
        sim.n_steps = T;
        sim.n_traj = static_cast<int>(std::max<long>(1, plan.budget / T));
        sim.init_lo = Vector::Constant(1, 0.0);
        sim.init_hi = Vector::Constant(1, 0.2);
        sim.seed = substream_seed(plan.seed, 1);
        MultiWellPotential1D pot = MultiWellPotential1D::benchmark();
        TrajectoryDataset data = simulate_trajectories(pot, sim, ObservationMap{}, plan.threads);

        const int bins = 100;
        std::vector<double> edges(bins + 1);
        for (int b = 0; b <= bins; ++b) edges[static_cast<std::size_t>(b)] = 2.0 * b / bins;

        LearnerConfig lc = plan.learner;
        lc.seed = substream_seed(plan.seed, 2);
        BinlessFit fit = fit_binless(data, lc);
        write_histogram_csv(edges, binless_histogram(fit.model, edges), dir / "hist_binless.csv");

        Vector emp = Vector::Zero(bins);
        long n_emp = 0;
        for (const Matrix& traj : data.continuous)
            for (long t = 0; t < traj.rows(); ++t) {
                double v = traj(t, 0);
                ++n_emp;
                if (v < 0.0 || v > 2.0) continue;
                emp(std::min(bins - 1, static_cast<int>(v / 2.0 * bins))) += 1.0;
            }
        if (n_emp > 0) emp /= static_cast<double>(n_emp);
        write_histogram_csv(edges, emp, dir / "hist_empirical.csv");
        write_histogram_csv(edges, oracle.reference.bin_masses(edges), dir / "hist_oracle.csv");
        std::cout << "wrote histogram CSVs to " << out_dir << "\n";
        return kExitOk;
    }

    ResultsTable table = run_experiment(plan);
    write_results_csv(table, dir / ("results_" + figure + ".csv"));
    write_summary_csv(table, dir / ("summary_" + figure + ".csv"));
    std::cout << "wrote results to " << out_dir << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral learning of observable operator models from trajectory data"};
    app.require_subcommand(1);

    std::string system, config_path, out_path, mode, data_path, model_path, query, figure;
    long budget = -1;
    int repeats = -1;
    int threads = 0;
    std::optional<std::uint64_t> seed;

    auto* sim = app.add_subcommand("simulate", "generate benchmark trajectory data");
    sim->add_option("--system", system, "benchmark system: 1d or 2d");
    sim->add_option("--config", config_path, "run configuration file");
    sim->add_option("--out", out_path, "output directory")->required();
    sim->add_option("--seed", seed, "master RNG seed");
    sim->add_option("--threads", threads, "worker thread cap (0 = hardware)");

    auto* learn = app.add_subcommand("learn", "fit a model to a dataset manifest");
    learn->add_option("--mode", mode, "discrete, eq, binless or coarse");
    learn->add_option("--data", data_path, "dataset manifest path")->required();
    learn->add_option("--config", config_path, "run configuration file");
    learn->add_option("--out", out_path, "output model file")->required();
    learn->add_option("--seed", seed, "feature-map seed");

    auto* eval = app.add_subcommand("eval", "query a saved model, CSV to stdout");
    eval->add_option("--model", model_path, "model file")->required();
    eval->add_option("--query", query, "prob <syms> | mean | hist [--bins J --range lo,hi] | tica [--lag T]")
        ->required();

    auto* rep = app.add_subcommand("reproduce", "run a benchmark figure experiment");
    rep->add_option("--figure", figure, "2b, 2c, 2d or 3b")->required();
    rep->add_option("--config", config_path, "run configuration file");
    rep->add_option("--budget", budget, "total samples per grid cell");
    rep->add_option("--repeats", repeats, "independent repeats");
    rep->add_option("--out", out_path, "output directory")->required();
    rep->add_option("--seed", seed, "master RNG seed");
    rep->add_option("--threads", threads, "worker thread cap (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(system, config_path, out_path, seed, threads);
        if (learn->parsed()) return cmd_learn(mode, data_path, config_path, out_path, seed);
        if (eval->parsed()) return cmd_eval(model_path, query);
        if (rep->parsed())
            return cmd_reproduce(figure, config_path, budget, repeats, out_path, seed, threads);
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
