// Acceptance suite: one [PASS]/[FAIL]/[SKIP] line per criterion, exit code 1
// if anything failed.
//
// Synthetic experiments share one protocol: Gaussian kernel (sigma 1), d = n,
// tau = lambda1 = 1, k = 5, 15 outer iterations, default step, classifier
// trained on the projected source only. Seeds start at 0.

#include "helpers.hpp"
#include "mctl/error.hpp"
#include "mctl/experiment.hpp"
#include "mctl/oracle.hpp"
#include "mctl/report.hpp"
#include "mctl/solver.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

using namespace mctl;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Fail;
    std::string detail;
};

int failures = 0;
fs::path golden_dir;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.status == Status::Pass && limit_s > 0.0 && secs > limit_s) {
        out.status = Status::Fail;
        out.detail += "; over the " + std::to_string(limit_s) + " s budget";
    }
    const char* tag = out.status == Status::Pass ? "[PASS]" : out.status == Status::Fail ? "[FAIL]" : "[SKIP]";
    if (out.status == Status::Fail)
        ++failures;
    std::printf("%s %2d %s: %s (%.2f s)\n", tag, id, name.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
}

void info(const std::string& text) {
    std::printf("       %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

ExperimentConfig protocol(SyntheticKind kind, int seeds, double rotation = 30.0) {
    ExperimentConfig cfg;
    SyntheticSpec spec;
    spec.kind = kind;
    spec.rotation_deg = rotation;
    cfg.data.synthetic = spec;
    cfg.mode = ClassifierMode::SourceOnly;
    cfg.solver.kernel = KernelSpec{KernelKind::Gaussian, 1.0};
    cfg.seed = 0;
    cfg.seeds = seeds;
    return cfg;
}

std::vector<RunResult> run_seeds(const ExperimentConfig& cfg, const MctlConfig& solver, int threads) {
    const auto seeds = cfg.seed_list();
    return parallel_map<RunResult>(seeds.size(), threads, [&](std::size_t i) {
        return run_adaptation(load_task(cfg, seeds[i]), cfg, seeds[i], solver);
    });
}

double mean_accuracy(const std::vector<RunResult>& rows) {
    double s = 0.0;
    for (const auto& r : rows)
        s += r.accuracy;
    return s / static_cast<double>(rows.size());
}

// --- 1 -------------------------------------------------------------------

Outcome gradient_exactness() {
    double worst = 0.0;
    int checks = 0;
    const double mus[] = {0.1, 1.0, 10.0};
    for (std::uint64_t inst = 0; inst < 25; ++inst) {
        const auto p = testing::random_problem(8, 6, 4, 1000 + 17 * inst, mus[inst % 3]);
        for (auto variant : {Variant::Mctl, Variant::MctlS})
            for (int bits = 0; bits < 8; ++bits) {
                MctlConfig cfg;
                cfg.variant = variant;
                cfg.ablation = {(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0};
                const Matrix g = grad_z(p.state, p.grams, p.graph, cfg);
                const Matrix fd = oracle::fd_gradient(
                    [&](const Matrix& Z) {
                        SolverState s = p.state;
                        s.Z = Z;
                        return augmented_lagrangian(s, p.grams, p.graph, cfg).total;
                    },
                    p.state.Z);
                worst = std::max(worst, testing::max_rel_error(g, fd));
                ++checks;
            }
    }
    return {worst <= 1e-5 ? Status::Pass : Status::Fail,
            "max relative error " + fmt("%.2e", worst) + " over " + std::to_string(checks) +
                " instance/variant/gating combinations (limit 1e-5)"};
}

// --- 2 -------------------------------------------------------------------

Outcome k_orthogonality() {
    const ExperimentConfig cfg = protocol(SyntheticKind::RotatedGaussians, 1);
    const Task task = load_task(cfg, 0);
    double worst = 0.0, worst_raw = 0.0;
    int solves = 0;
    fit(task.source, task.target_train, cfg.solver, [&](const IterationReport& r) {
        worst = std::max(worst, r.ortho_ridged);
        worst_raw = std::max(worst_raw, r.ortho_raw);
        ++solves;
    });
    return {worst <= 1e-6 && solves == 15 ? Status::Pass : Status::Fail,
            "max |Phi^T (K+eps I) Phi - I| = " + fmt("%.2e", worst) + " over " + std::to_string(solves) +
                " Phi updates (limit 1e-6); raw-K deviation " + fmt("%.2e", worst_raw)};
}

// --- 3 -------------------------------------------------------------------

Outcome svt_certificate() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst_gap = -1e300, worst_ref = 0.0;
    int violations = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const Matrix S = testing::random_matrix(5, 5, 500 + i);
        for (double t : {0.1, 1.0, 10.0}) {
            SolverState st;
            st.Z = S;
            st.R1 = Matrix::Zero(5, 5);
            st.mu = 1.0;
            MctlConfig cfg;
            cfg.lambda1 = t;
            const Matrix J = update_j(st, cfg);
            auto objective = [&](const Matrix& X) { return t * nuclear_norm(X) + 0.5 * (X - S).squaredNorm(); };
            const double at = objective(J);
            for (int k = 0; k < 100; ++k) {
                Matrix dir(5, 5);
                for (Index e = 0; e < dir.size(); ++e)
                    dir.data()[e] = nd(rng);
                const double gap = at - objective(J + 1e-3 * dir / dir.norm());
                worst_gap = std::max(worst_gap, gap);
                if (gap > 1e-12)
                    ++violations;
            }
            worst_ref = std::max(worst_ref, (J - oracle::svt_reference(S, t)).norm());
        }
    }
    const bool ok = violations == 0 && worst_ref <= 1e-9;
    return {ok ? Status::Pass : Status::Fail,
            std::to_string(violations) + " of 6000 perturbations beat the update (worst f(J) - f(J+dJ) = " +
                fmt("%.2e", worst_gap) + "); |J - reference|_F <= " + fmt("%.2e", worst_ref) + " (limit 1e-9)"};
}

// --- 4 -------------------------------------------------------------------

Outcome lgdm_degeneracy() {
    double worst_identity = 0.0, worst_pairwise = 0.0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        // d = 4 < n_S = 8, so A has full row rank and Phi^T K_S Z = Phi^T K_T is solvable.
        const auto p = testing::random_problem(8, 6, 4, 3000 + i, 1.0, 2, 4);
        const ProjectedGrams pg = ProjectedGrams::from(p.state.Phi, p.grams);
        const Matrix Z = pg.A.completeOrthogonalDecomposition().solve(pg.B);
        if ((pg.A * Z - pg.B).norm() > 1e-10 * pg.B.norm())
            return {Status::Fail, "could not construct an exact generating Z for instance " + std::to_string(i)};
        const double nt2 = 36.0;
        const double expected = 2.0 * (pg.B * p.graph.L * pg.B.transpose()).trace() / nt2;
        const double got = lgdm_loss(pg, Z, p.graph);
        worst_identity = std::max(worst_identity, testing::rel_diff(got, expected));
        for (const Matrix* z : {&Z, &p.state.Z}) {
            const double pair = oracle::lgdm_pairwise(pg.A * *z, pg.B, p.graph.W);
            worst_pairwise = std::max(worst_pairwise, testing::rel_diff(lgdm_loss(pg, *z, p.graph), pair));
        }
    }
    const bool ok = worst_identity <= 1e-9 && worst_pairwise <= 1e-9;
    return {ok ? Status::Pass : Status::Fail, "identity rel err " + fmt("%.2e", worst_identity) +
                                                  ", trace vs pairwise rel err " + fmt("%.2e", worst_pairwise) +
                                                  " (limit 1e-9, 10 instances)"};
}

// --- 5 -------------------------------------------------------------------

Outcome convergence() {
    const ExperimentConfig cfg = protocol(SyntheticKind::RotatedGaussians, 5);
    int good = 0;
    std::ostringstream per_seed;
    for (std::uint64_t seed : cfg.seed_list()) {
        const Task task = load_task(cfg, seed);
        if (task.source.size() != 60 || task.target_train.size() != 40)
            return {Status::Fail, "unexpected task size"};
        const AdaptationModel m = fit(task.source, task.target_train, cfg.solver);
        const auto& h = m.history;
        // a run that met tol_rel early has, by definition, a smaller final change
        const double last = h.back().total;
        const double prev = h.size() >= 2 ? h[h.size() - 2].total : last;
        const double change = std::abs(last - prev) / std::max(std::abs(prev), 1e-300);
        const bool ok = change < 0.01 && last <= h.front().total;
        good += ok ? 1 : 0;
        per_seed << " seed " << seed << ": " << h.size() << " it, last change " << fmt("%.3f%%", 100 * change)
                 << (last <= h.front().total ? ", final<=first" : ", final>first") << ";";
    }
    return {good >= 4 ? Status::Pass : Status::Fail, std::to_string(good) + "/5 seeds converge;" + per_seed.str()};
}

// --- 6 -------------------------------------------------------------------

Outcome transfer_gain() {
    const ExperimentConfig cfg = protocol(SyntheticKind::RotatedGaussians, 5, 30.0);
    const auto rows = run_seeds(cfg, cfg.solver, thread_count());
    double base = 0.0;
    std::ostringstream golden;
    golden << "seed,mctl_accuracy,baseline_accuracy\n";
    for (const auto& r : rows) {
        const double b = run_baseline(load_task(cfg, r.seed), cfg);
        base += b;
        golden << r.seed << ',' << fmt("%.6f", r.accuracy) << ',' << fmt("%.6f", b) << '\n';
    }
    base /= static_cast<double>(rows.size());
    const double mctl = mean_accuracy(rows);
    const double gain = mctl - base;

    // the same kernel machine without any adaptation (no Z iterations)
    MctlConfig frozen = cfg.solver;
    frozen.max_outer_iters = 0;
    const double no_z = mean_accuracy(run_seeds(cfg, frozen, thread_count()));

    // accuracies are multiples of 1/n_test; anything below 1e-9 is summation noise
    const bool ok = gain > 1e-9;
    if (ok && !golden_dir.empty()) {
        const fs::path file = golden_dir / "rotated_gaussians_30.csv";
        if (!fs::exists(file)) {
            fs::create_directories(golden_dir);
            std::ofstream(file) << golden.str();
            info("golden accuracies written to " + file.string());
        } else {
            std::ifstream in(file);
            std::stringstream s;
            s << in.rdbuf();
            info(s.str() == golden.str() ? "golden accuracies reproduced exactly"
                                         : "note: accuracies differ from " + file.string());
        }
    }
    info("same classifier on the kernel projection with Z fixed at 0: " + fmt("%.4f", no_z) +
         " (gain attributable to Z: " + fmt("%+.4f", mctl - no_z) + ")");
    return {ok ? Status::Pass : Status::Fail, "mean accuracy MCTL " + fmt("%.4f", mctl) + " vs no adaptation " +
                                                  fmt("%.4f", base) + ", gain " + fmt("%+.4f", gain) + " over 5 seeds"};
}

// --- 7 -------------------------------------------------------------------

Outcome ablation_order() {
    const ExperimentConfig cfg = protocol(SyntheticKind::LocalityShift, 10);
    const auto variants = ablation_variants(cfg.solver);
    std::vector<std::vector<RunResult>> runs;
    for (const auto& v : variants)
        runs.push_back(run_seeds(cfg, v, thread_count()));
    const double full = mean_accuracy(runs[0]);
    const double drop_lgdm = full - mean_accuracy(runs[1]);
    const double drop_ggdm = full - mean_accuracy(runs[2]);
    bool identical = true;
    for (std::size_t s = 0; s < runs[0].size(); ++s)
        identical = identical && runs[1][s].accuracy == runs[0][s].accuracy && runs[2][s].accuracy == runs[0][s].accuracy;
    if (identical)
        info("tie: every seed scores the same with and without either term (the source-only classifier "
             "at d = n does not depend on Z)");

    ExperimentConfig aug = cfg;
    aug.mode = ClassifierMode::Augmented;
    const double afull = mean_accuracy(run_seeds(aug, variants[0], thread_count()));
    info("augmented-mode drops for reference: DropLGDM " +
         fmt("%+.4f", afull - mean_accuracy(run_seeds(aug, variants[1], thread_count()))) + ", DropGGDM " +
         fmt("%+.4f", afull - mean_accuracy(run_seeds(aug, variants[2], thread_count()))));
    return {drop_lgdm >= drop_ggdm ? Status::Pass : Status::Fail,
            "full " + fmt("%.4f", full) + "; drop from DropLGDM " + fmt("%+.4f", drop_lgdm) + " vs DropGGDM " +
                fmt("%+.4f", drop_ggdm) + " over 10 seeds"};
}

// --- 8 -------------------------------------------------------------------

Outcome mctl_vs_simplified() {
    std::ostringstream detail;
    bool ok = true;
    for (auto kind : {SyntheticKind::RotatedGaussians, SyntheticKind::LocalityShift}) {
        const ExperimentConfig cfg = protocol(kind, 10);
        MctlConfig s = cfg.solver;
        s.variant = Variant::MctlS;
        const double a = mean_accuracy(run_seeds(cfg, cfg.solver, thread_count()));
        const double b = mean_accuracy(run_seeds(cfg, s, thread_count()));
        const double gap = 100.0 * (a - b);
        ok = ok && std::abs(gap) <= 2.0;
        detail << to_string(kind) << ": " << fmt("%.2f", 100 * a) << " vs " << fmt("%.2f", 100 * b) << " (gap "
               << fmt("%+.2f", gap) << " pts); ";
    }
    return {ok ? Status::Pass : Status::Fail, detail.str() + "limit 2.0 pts over 10 seeds"};
}

// --- 9 -------------------------------------------------------------------

Outcome coil20() {
    const char* dir = std::getenv("MCTL_COIL_DIR");
    if (!dir)
        return {Status::Skip, "set MCTL_COIL_DIR to a directory holding C1.csv and C2.csv (label column 'y')"};
    const fs::path c1 = fs::path(dir) / "C1.csv", c2 = fs::path(dir) / "C2.csv";
    if (!fs::exists(c1) || !fs::exists(c2))
        return {Status::Skip, "C1.csv or C2.csv missing under " + std::string(dir)};
    ExperimentConfig cfg;
    cfg.data.source = c1;
    cfg.data.target_train = c2;
    cfg.data.target_test = c2;
    cfg.data.label_col = "y";
    cfg.mode = ClassifierMode::SourceOnly;
    cfg.solver.kernel = KernelSpec{KernelKind::Gaussian, 0.8};
    const Task task = load_task(cfg, 0);
    const RunResult r = run_adaptation(task, cfg, 0, cfg.solver);
    const double delta = 100.0 * r.accuracy - 84.8;
    return {std::abs(delta) <= 5.0 ? Status::Pass : Status::Fail,
            "C1 -> C2 accuracy " + fmt("%.2f%%", 100 * r.accuracy) + " vs 84.8% reference (" + fmt("%+.2f", delta) +
                " pts, limit 5.0)"};
}

// --- 10 ------------------------------------------------------------------

std::string results_without_time(const fs::path& file) {
    std::ifstream in(file);
    std::string line, out;
    while (std::getline(in, line))
        out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / ("mctl-acceptance-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    ExperimentConfig cfg = protocol(SyntheticKind::LocalityShift, 4);
    cfg.out_dir = dir;
    const int recorded = std::max(2, thread_count());
    write_manifest(dir / "manifest.json", "run", cfg, recorded);

    std::ifstream in(dir / "manifest.json");
    const auto manifest = nlohmann::json::parse(in);
    const ExperimentConfig again = from_json(manifest);
    const int threads = manifest.at("threads").get<int>();

    write_results_csv(dir / "a.csv", run_seeds(again, again.solver, threads));
    write_results_csv(dir / "b.csv", run_seeds(again, again.solver, threads));
    write_results_csv(dir / "c.csv", run_seeds(again, again.solver, 1));
    const std::string a = results_without_time(dir / "a.csv");
    const bool same = a == results_without_time(dir / "b.csv") && a == results_without_time(dir / "c.csv");
    fs::remove_all(dir);
    return {same ? Status::Pass : Status::Fail,
            std::string(same ? "identical" : "different") + " results.csv rows (excluding wall_ms) across two runs at " +
                std::to_string(threads) + " threads and one at 1 thread"};
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--golden")
            golden_dir = argv[i + 1];

    report(1, "gradient exactness", 5.0, gradient_exactness);
    report(2, "K-orthogonality", 2.0, k_orthogonality);
    report(3, "SVT optimality", 0.0, svt_certificate);
    report(4, "LGDM degeneracy", 0.0, lgdm_degeneracy);
    report(5, "convergence", 10.0, convergence);
    report(6, "transfer gain", 0.0, transfer_gain);
    report(7, "ablation ordering", 0.0, ablation_order);
    report(8, "MCTL vs MCTL-S", 0.0, mctl_vs_simplified);
    report(9, "COIL-20 reproduction", 300.0, coil20);
    report(10, "determinism", 0.0, determinism);
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
