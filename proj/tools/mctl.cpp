// mctl: run, ablate and compare manifold-criterion transfer experiments.

#include "mctl/error.hpp"
#include "mctl/experiment.hpp"
#include "mctl/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

namespace {

using namespace mctl;

/// Raw flag values; only flags that were given override the config file.
struct Flags {
    std::string config;
    std::string source, target_train, target_test, synthetic, label_col;
    std::string mode, kernel, variant, drop;
    double sigma = 0, tau = 0, lambda1 = 0, alpha = 0, rotation = 0, noise = 0, ridge = 0;
    int k = 0, dim = 0, iters = 0, seeds = 0, n_per_class = 0, classes = 0;
    std::uint64_t seed = 0;
    std::string out;
    bool recompute_affinity = false;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void add_common_options(CLI::App& cmd, Flags& f) {
    cmd.add_option("--config", f.config, "JSON config or manifest.json; flags override it");
    cmd.add_option("--source", f.source, "labeled source CSV");
    cmd.add_option("--target-train", f.target_train, "target training CSV (labels optional)");
    cmd.add_option("--target-test", f.target_test, "labeled target test CSV");
    cmd.add_option("--synthetic", f.synthetic, "rotated-gaussians | two-moons | locality-shift");
    cmd.add_option("--label-col", f.label_col, "name of the integer label column");
    cmd.add_option("--mode", f.mode, "augmented | source-only");
    cmd.add_option("--kernel", f.kernel, "linear | gaussian");
    cmd.add_option("--sigma", f.sigma, "gaussian kernel bandwidth");
    cmd.add_option("--tau", f.tau, "GGDM weight");
    cmd.add_option("--lambda1", f.lambda1, "nuclear norm weight");
    cmd.add_option("--k", f.k, "neighbors in the target affinity graph");
    cmd.add_option("--dim", f.dim, "subspace dimension (default: n)");
    cmd.add_option("--alpha", f.alpha, "Z gradient step size");
    cmd.add_option("--iters", f.iters, "maximum outer iterations");
    cmd.add_option("--seeds", f.seeds, "number of consecutive seeds");
    cmd.add_option("--seed", f.seed, "first seed");
    cmd.add_option("--variant", f.variant, "mctl | mctl-s");
    cmd.add_option("--drop", f.drop, "lgdm | ggdm | lrc (comma-separated)");
    cmd.add_flag("--recompute-affinity", f.recompute_affinity, "rebuild W from generated samples each iteration");
    cmd.add_option("--rotation", f.rotation, "synthetic rotation in degrees");
    cmd.add_option("--noise", f.noise, "synthetic noise sigma");
    cmd.add_option("--n-per-class", f.n_per_class, "synthetic samples per class");
    cmd.add_option("--classes", f.classes, "synthetic class count");
    cmd.add_option("--ridge", f.ridge, "classifier ridge");
    cmd.add_option("--out", f.out, "output directory");
}

bool given(const CLI::App& cmd, const char* name) {
    return cmd.get_option(name)->count() > 0;
}

ExperimentConfig resolve(const CLI::App& cmd, const Flags& f) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in)
            throw InputError("cannot open config '" + f.config + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw InputError("config '" + f.config + "' is not valid JSON: " + e.what());
        }
        cfg = from_json(j, cfg);
    }

    if (given(cmd, "--synthetic")) {
        const auto kind = parse_synthetic_kind(f.synthetic);
        if (!kind)
            throw UsageError("unknown --synthetic '" + f.synthetic + "'");
        SyntheticSpec spec = cfg.data.synthetic.value_or(SyntheticSpec{});
        spec.kind = *kind;
        cfg.data.synthetic = spec;
    }
    if (given(cmd, "--source")) {
        cfg.data.source = f.source;
        if (!given(cmd, "--synthetic"))
            cfg.data.synthetic.reset();
    }
    if (given(cmd, "--target-train"))
        cfg.data.target_train = f.target_train;
    if (given(cmd, "--target-test"))
        cfg.data.target_test = f.target_test;
    if (given(cmd, "--label-col"))
        cfg.data.label_col = f.label_col;
    if (cfg.data.synthetic) {
        auto& syn = *cfg.data.synthetic;
        if (given(cmd, "--rotation"))
            syn.rotation_deg = f.rotation;
        if (given(cmd, "--noise"))
            syn.noise_sigma = f.noise;
        if (given(cmd, "--n-per-class"))
            syn.n_per_class = f.n_per_class;
        if (given(cmd, "--classes"))
            syn.classes = f.classes;
    }
    if (given(cmd, "--mode")) {
        const auto mode = parse_mode(f.mode);
        if (!mode)
            throw UsageError("unknown --mode '" + f.mode + "'");
        cfg.mode = *mode;
    }
    auto& s = cfg.solver;
    if (given(cmd, "--kernel")) {
        const auto kind = parse_kernel_kind(f.kernel);
        if (!kind)
            throw UsageError("unknown --kernel '" + f.kernel + "'");
        s.kernel.kind = *kind;
    }
    if (given(cmd, "--sigma"))
        s.kernel.sigma = f.sigma;
    if (given(cmd, "--tau"))
        s.tau = f.tau;
    if (given(cmd, "--lambda1"))
        s.lambda1 = f.lambda1;
    if (given(cmd, "--k"))
        s.k_neighbors = f.k;
    if (given(cmd, "--dim"))
        s.subspace_dim = f.dim;
    if (given(cmd, "--alpha"))
        s.step_alpha = f.alpha;
    if (given(cmd, "--iters"))
        s.max_outer_iters = f.iters;
    if (given(cmd, "--variant")) {
        const auto variant = parse_variant(f.variant);
        if (!variant)
            throw UsageError("unknown --variant '" + f.variant + "'");
        s.variant = *variant;
    }
    if (given(cmd, "--drop")) {
        const auto drop = parse_ablation(f.drop);
        if (!drop)
            throw UsageError("unknown --drop '" + f.drop + "'");
        s.ablation = *drop;
    }
    if (given(cmd, "--recompute-affinity"))
        s.recompute_affinity = f.recompute_affinity;
    if (given(cmd, "--ridge"))
        cfg.classifier_ridge = f.ridge;
    if (given(cmd, "--seed"))
        cfg.seed = f.seed;
    if (given(cmd, "--seeds"))
        cfg.seeds = f.seeds;
    if (given(cmd, "--out"))
        cfg.out_dir = f.out;

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

void print_warnings(const RunResult& r) {
    for (const auto& w : r.warnings)
        std::cerr << "warning [" << r.variant << ", seed " << r.seed << "]: " << w << '\n';
}

std::vector<RunResult> run_variant_over_seeds(const ExperimentConfig& cfg, const MctlConfig& solver, int threads) {
    const auto seeds = cfg.seed_list();
    return parallel_map<RunResult>(seeds.size(), threads, [&](std::size_t i) {
        const Task task = load_task(cfg, seeds[i]);
        return run_adaptation(task, cfg, seeds[i], solver);
    });
}

int cmd_run(const ExperimentConfig& cfg, int threads) {
    const auto seeds = cfg.seed_list();
    struct Outcome {
        RunResult run;
        double baseline;
    };
    auto outcomes = parallel_map<Outcome>(seeds.size(), threads, [&](std::size_t i) {
        const Task task = load_task(cfg, seeds[i]);
        return Outcome{run_adaptation(task, cfg, seeds[i], cfg.solver), run_baseline(task, cfg)};
    });

    std::vector<RunResult> rows;
    for (const auto& o : outcomes) {
        print_warnings(o.run);
        std::cout << "seed " << o.run.seed << "  " << o.run.variant << "  accuracy " << std::fixed
                  << std::setprecision(4) << o.run.accuracy << "  (no adaptation " << o.baseline << ", "
                  << o.run.iterations << " iterations)\n";
        rows.push_back(o.run);
    }
    if (rows.size() > 1) {
        std::vector<double> acc;
        for (const auto& r : rows)
            acc.push_back(r.accuracy);
        const auto s = summarize(rows.front().variant, acc);
        std::cout << "mean accuracy " << std::fixed << std::setprecision(4) << s.mean << " +- " << s.stddev << '\n';
    }

    write_results_csv(cfg.out_dir / "results.csv", rows);
    write_convergence_csv(cfg.out_dir / "convergence.csv", rows.front().history);
    write_convergence_svg(cfg.out_dir / "convergence.svg", rows.front().history,
                          rows.front().task + " / " + rows.front().variant + " / seed " +
                              std::to_string(rows.front().seed));
    write_manifest(cfg.out_dir / "manifest.json", "run", cfg, threads);
    return 0;
}

int cmd_ablate(const ExperimentConfig& cfg, int threads) {
    std::vector<RunResult> rows;
    std::vector<AccuracySummary> summary;
    for (const auto& solver : ablation_variants(cfg.solver)) {
        auto runs = run_variant_over_seeds(cfg, solver, threads);
        std::vector<double> acc;
        for (const auto& r : runs) {
            print_warnings(r);
            acc.push_back(r.accuracy);
            rows.push_back(r);
        }
        summary.push_back(summarize(solver.ablation.label(), acc));
    }
    for (const auto& s : summary)
        std::cout << std::left << std::setw(10) << s.variant << " mean accuracy " << std::fixed
                  << std::setprecision(4) << s.mean << " +- " << s.stddev << "  drop "
                  << summary.front().mean - s.mean << '\n';
    write_ablation_csv(cfg.out_dir / "ablation.csv", summary);
    write_results_csv(cfg.out_dir / "results.csv", rows);
    write_manifest(cfg.out_dir / "manifest.json", "ablate", cfg, threads);
    return 0;
}

int cmd_compare_s(const ExperimentConfig& cfg, int threads) {
    MctlConfig full = cfg.solver;
    full.variant = Variant::Mctl;
    MctlConfig simple = cfg.solver;
    simple.variant = Variant::MctlS;
    const auto a = run_variant_over_seeds(cfg, full, threads);
    const auto b = run_variant_over_seeds(cfg, simple, threads);

    std::vector<PairedAccuracy> pairs;
    std::vector<RunResult> rows;
    double gap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        print_warnings(a[i]);
        print_warnings(b[i]);
        pairs.push_back({a[i].seed, a[i].accuracy, b[i].accuracy});
        rows.push_back(a[i]);
        rows.push_back(b[i]);
        gap += a[i].accuracy - b[i].accuracy;
        std::cout << "seed " << a[i].seed << "  mctl " << std::fixed << std::setprecision(4) << a[i].accuracy
                  << "  mctl-s " << b[i].accuracy << "  gap " << a[i].accuracy - b[i].accuracy << '\n';
    }
    std::cout << "mean gap (mctl - mctl-s) " << std::fixed << std::setprecision(4)
              << gap / static_cast<double>(a.size()) << '\n';
    write_compare_csv(cfg.out_dir / "compare_s.csv", pairs);
    write_results_csv(cfg.out_dir / "results.csv", rows);
    write_manifest(cfg.out_dir / "manifest.json", "compare-s", cfg, threads);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Manifold-criterion guided transfer learning (MCTL / MCTL-S)"};
    app.require_subcommand(1);
    Flags run_flags, ablate_flags, compare_flags;
    auto* run = app.add_subcommand("run", "fit, classify and report one configuration");
    auto* ablate = app.add_subcommand("ablate", "full model vs. dropping LGDM, GGDM or the low-rank term");
    auto* compare = app.add_subcommand("compare-s", "paired MCTL vs. MCTL-S runs");
    add_common_options(*run, run_flags);
    add_common_options(*ablate, ablate_flags);
    add_common_options(*compare, compare_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const int threads = thread_count();
        if (run->parsed())
            return cmd_run(resolve(*run, run_flags), threads);
        if (ablate->parsed())
            return cmd_ablate(resolve(*ablate, ablate_flags), threads);
        return cmd_compare_s(resolve(*compare, compare_flags), threads);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << to_string(e.kind()) << ": " << e.what() << '\n';
        return e.kind() == ErrorKind::Config ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
