#include "mctl/solver.hpp"

#include "mctl/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mctl {

namespace {

double max_abs_deviation_from_identity(const Matrix& C) {
    return (C - Matrix::Identity(C.rows(), C.cols())).cwiseAbs().maxCoeff();
}

std::string condition_report(const Matrix& M, const Matrix& Kr) {
    Eigen::SelfAdjointEigenSolver<Matrix> k_eig(Kr, Eigen::EigenvaluesOnly);
    std::ostringstream out;
    out << "n = " << Kr.rows();
    if (k_eig.info() == Eigen::Success) {
        const double lo = k_eig.eigenvalues().minCoeff();
        const double hi = k_eig.eigenvalues().maxCoeff();
        out << ", eig(K + eps I) in [" << lo << ", " << hi << "], condition ~ "
            << (lo > 0 ? hi / lo : std::numeric_limits<double>::infinity());
    } else {
        out << ", eigenvalues of K + eps I unavailable";
    }
    out << ", |M|_max = " << M.cwiseAbs().maxCoeff() << ", M finite = " << (M.allFinite() ? "yes" : "no");
    return out.str();
}

void check_state_shapes(const SolverState& state, const GramSet& grams) {
    auto expect = [&](const Matrix& m, const char* name) {
        if (m.rows() != grams.n_S || m.cols() != grams.n_T)
            throw InputError(std::string(name) + " must be n_S x n_T (" + std::to_string(grams.n_S) + " x " +
                             std::to_string(grams.n_T) + ")");
    };
    expect(state.Z, "Z");
    expect(state.J, "J");
    expect(state.R1, "R1");
}

} // namespace

Matrix phi_system(const Matrix& Z, const GramSet& grams, const AffinityGraph& graph, const MctlConfig& cfg) {
    if (Z.rows() != grams.n_S || Z.cols() != grams.n_T)
        throw InputError("phi_system: Z must be n_S x n_T");
    if (graph.size() != grams.n_T)
        throw InputError("phi_system: affinity graph size does not match n_T");
    const double nt = static_cast<double>(grams.n_T);
    const double scale = 1.0 / (nt * nt);
    const Matrix GS = grams.K_S * Z; // n x n_T, generated targets in kernel coordinates
    Matrix M = Matrix::Zero(grams.n(), grams.n());

    if (cfg.uses_lgdm()) {
        if (cfg.variant == Variant::Mctl) {
            const auto deg = graph.D.diagonal().asDiagonal();
            const Matrix GW = GS * graph.W;
            M.noalias() += scale * (GS * deg * GS.transpose());
            M.noalias() += scale * (grams.K_T * deg * grams.K_T.transpose());
            M.noalias() -= scale * (GW * grams.K_T.transpose());
            M.noalias() -= scale * (grams.K_T * GW.transpose());
        } else {
            M.noalias() += 2.0 * scale * (GS * graph.L * GS.transpose());
        }
    }
    const double tau = cfg.effective_tau();
    if (tau != 0.0) {
        const Vector u = GS.rowwise().sum() - grams.K_T.rowwise().sum();
        M.noalias() += tau * scale * (u * u.transpose());
    }
    return 0.5 * (M + M.transpose());
}

PhiUpdate solve_phi(const Matrix& M, const Matrix& K, double ridge, Index d) {
    const Index n = K.rows();
    if (K.cols() != n || M.rows() != n || M.cols() != n)
        throw InputError("solve_phi: M and K must be square of the same size");
    if (d < 1 || d > n)
        throw ConfigError("solve_phi: dimension " + std::to_string(d) + " outside [1, " + std::to_string(n) + "]");
    if (!(ridge >= 0.0))
        throw ConfigError("solve_phi: ridge must be non-negative");
    PhiUpdate out;
    out.ridge = ridge;
    const Matrix Kr = K + ridge * Matrix::Identity(n, n);

    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(M, Kr, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success)
        throw NumericError("generalized eigensolver failed in the Phi update: " + condition_report(M, Kr));

    const Matrix& vecs = ges.eigenvectors();
    const Vector& vals = ges.eigenvalues();
    if (!vecs.allFinite() || !vals.allFinite())
        throw NumericError("generalized eigensolver returned non-finite values: " + condition_report(M, Kr));

    // Feasible directions first (eigenvalues already ascending), then the
    // ridge-supported ones.
    const Vector energy = (vecs.transpose() * K).cwiseProduct(vecs.transpose()).rowwise().sum();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_partition(order.begin(), order.end(), [&](Index i) { return energy(i) >= 0.5; });

    out.Phi.resize(n, d);
    out.eigenvalues.resize(d);
    for (Index j = 0; j < d; ++j) {
        const Index src = order[static_cast<std::size_t>(j)];
        Eigen::Index pivot = 0;
        vecs.col(src).cwiseAbs().maxCoeff(&pivot);
        const double sign = vecs(pivot, src) < 0.0 ? -1.0 : 1.0;
        out.Phi.col(j) = sign * vecs.col(src);
        out.eigenvalues(j) = vals(src);
    }

    Matrix C = out.Phi.transpose() * Kr * out.Phi;
    out.ortho_ridged = max_abs_deviation_from_identity(C);
    if (out.ortho_ridged > 1e-10) {
        // One Cholesky re-orthonormalization pass in the (K + eps I) metric.
        Eigen::LLT<Matrix> llt(0.5 * (C + C.transpose()));
        if (llt.info() == Eigen::Success) {
            Matrix Linv_t = llt.matrixL().solve(Matrix::Identity(d, d)).transpose();
            out.Phi = (out.Phi * Linv_t).eval();
            C = out.Phi.transpose() * Kr * out.Phi;
            out.ortho_ridged = max_abs_deviation_from_identity(C);
        }
    }
    out.ortho_raw = max_abs_deviation_from_identity(out.Phi.transpose() * K * out.Phi);
    return out;
}

PhiUpdate update_phi(const SolverState& state, const GramSet& grams, const AffinityGraph& graph,
                     const MctlConfig& cfg) {
    const Index d = cfg.resolve_dim(grams.n());
    return solve_phi(phi_system(state.Z, grams, graph, cfg), grams.K, cfg.resolve_ridge(grams.K), d);
}

Matrix svt(const Matrix& S, double threshold) {
    if (threshold <= 0.0 || S.size() == 0)
        return S;
    Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector shrunk = (svd.singularValues().array() - threshold).cwiseMax(0.0).matrix();
    return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

Matrix update_j(const SolverState& state, const MctlConfig& cfg) {
    if (!(state.mu > 0.0))
        throw ConfigError("update_j requires mu > 0");
    const Matrix S = state.Z + state.R1 / state.mu;
    return svt(S, cfg.effective_lambda1() / state.mu);
}

Matrix grad_z(const ProjectedGrams& pg, const SolverState& state, const AffinityGraph& graph,
              const MctlConfig& cfg) {
    const Matrix& Z = state.Z;
    if (Z.rows() != pg.A.cols() || Z.cols() != pg.B.cols())
        throw InputError("grad_z: Z must be n_S x n_T");
    if (graph.size() != pg.B.cols())
        throw InputError("grad_z: affinity graph size does not match n_T");
    const double nt = static_cast<double>(pg.B.cols());
    const double scale = 1.0 / (nt * nt);

    Matrix g = Matrix::Zero(Z.rows(), Z.cols());
    if (cfg.uses_lgdm()) {
        const Matrix ssZ = pg.ss * Z;
        if (cfg.variant == Variant::Mctl)
            g.noalias() += 2.0 * scale * (ssZ * graph.D.diagonal().asDiagonal() - pg.st * graph.W);
        else
            g.noalias() += 4.0 * scale * (ssZ * graph.L);
    }
    const double tau = cfg.effective_tau();
    if (tau != 0.0) {
        const Vector v = pg.ss * Z.rowwise().sum() - pg.st.rowwise().sum();
        g.colwise() += (2.0 * tau * scale) * v;
    }
    if (cfg.uses_lrc())
        g += state.R1 + state.mu * (Z - state.J);
    return g;
}

Matrix grad_z(const SolverState& state, const GramSet& grams, const AffinityGraph& graph, const MctlConfig& cfg) {
    check_state_shapes(state, grams);
    return grad_z(ProjectedGrams::from(state.Phi, grams), state, graph, cfg);
}

ZUpdate update_z(const SolverState& state, const GramSet& grams, const AffinityGraph& graph,
                 const MctlConfig& cfg) {
    constexpr int kMaxHalvings = 20;
    check_state_shapes(state, grams);
    const auto pg = ProjectedGrams::from(state.Phi, grams);

    ZUpdate out;
    out.Z = state.Z;
    out.alpha = cfg.step_alpha;
    SolverState probe = state; // J, R1, mu fixed; Z moves
    for (int step = 0; step < cfg.inner_z_steps; ++step) {
        probe.Z = out.Z;
        const Matrix g = grad_z(pg, probe, graph, cfg);
        if (g.cwiseAbs().maxCoeff() == 0.0)
            break;
        const double before = smooth_objective(pg, out.Z, probe, graph, cfg);
        bool accepted = false;
        while (true) {
            Matrix candidate = out.Z - out.alpha * g;
            if (smooth_objective(pg, candidate, probe, graph, cfg) <= before) {
                out.Z = std::move(candidate);
                accepted = true;
                break;
            }
            if (out.halvings == kMaxHalvings)
                break;
            out.alpha *= 0.5;
            ++out.halvings;
        }
        if (!accepted) {
            out.stalled = true;
            break;
        }
    }
    return out;
}

AdaptationModel fit(const Dataset& source, const Dataset& target, const MctlConfig& cfg, const IterationSink& sink) {
    cfg.validate();
    source.validate();
    target.validate();
    if (source.size() == 0 || target.size() == 0)
        throw InputError("fit: source and target domains must be non-empty");
    if (source.dim() != target.dim())
        throw InputError("fit: source has dimension " + std::to_string(source.dim()) + ", target has " +
                         std::to_string(target.dim()));

    const GramSet grams = build_gram_set(source, target, cfg.kernel);
    AffinityGraph graph = knn_graph(target, cfg.k_neighbors);
    cfg.resolve_dim(grams.n());

    SolverState state;
    state.Z = Matrix::Zero(grams.n_S, grams.n_T);
    state.J = state.Z;
    state.R1 = state.Z;
    state.mu = cfg.mu0;

    auto report = [&](const PhiUpdate& phi, const ZUpdate* z) {
        if (!sink)
            return;
        IterationReport r;
        r.iter = state.iter;
        r.loss = state.history.back();
        r.ortho_ridged = phi.ortho_ridged;
        r.ortho_raw = phi.ortho_raw;
        r.mu = state.mu;
        r.alpha = z ? z->alpha : 0.0;
        r.stalled = z && z->stalled;
        sink(r);
    };

    if (cfg.max_outer_iters == 0) {
        const PhiUpdate phi = update_phi(state, grams, graph, cfg);
        state.Phi = phi.Phi;
        state.history.push_back(augmented_lagrangian(state, grams, graph, cfg));
        report(phi, nullptr);
    }

    for (int it = 1; it <= cfg.max_outer_iters; ++it) {
        state.iter = it;
        const PhiUpdate phi = update_phi(state, grams, graph, cfg);
        state.Phi = phi.Phi;
        if (cfg.uses_lrc())
            state.J = update_j(state, cfg);
        const ZUpdate z = update_z(state, grams, graph, cfg);
        state.Z = z.Z;
        if (z.stalled)
            state.warnings.push_back("iteration " + std::to_string(it) +
                                     ": Z step stalled after 20 step-size halvings");
        if (cfg.uses_lrc()) {
            state.R1 += state.mu * (state.Z - state.J);
            state.mu = std::min(state.mu * cfg.mu_growth, cfg.mu_max);
        }
        state.history.push_back(augmented_lagrangian(state, grams, graph, cfg));
        report(phi, &z);

        if (cfg.recompute_affinity) {
            const Matrix generated = state.Phi.transpose() * grams.K_S * state.Z;
            const Matrix projected_target = state.Phi.transpose() * grams.K_T;
            graph = cross_knn_graph(generated, projected_target, cfg.k_neighbors);
        }

        if (state.history.size() >= 2) {
            const double prev = state.history[state.history.size() - 2].total;
            const double curr = state.history.back().total;
            const double denom = std::max(std::abs(prev), std::numeric_limits<double>::min());
            if (std::abs(curr - prev) / denom < cfg.tol_rel)
                break;
        }
    }

    if (cfg.uses_lrc() && cfg.max_outer_iters > 0) {
        const double gap = (state.Z - state.J).norm();
        if (gap > 1e-3 * std::max(1.0, state.Z.norm())) {
            std::ostringstream msg;
            msg << "constraint Z = J not met at exit: |Z - J|_F = " << gap;
            state.warnings.push_back(msg.str());
        }
    }

    AdaptationModel model;
    model.Phi = std::move(state.Phi);
    model.Z = std::move(state.Z);
    model.kernel = cfg.kernel;
    model.training_pool = concat(source, target, "pool");
    model.n_S = grams.n_S;
    model.n_T = grams.n_T;
    model.iterations = state.iter;
    model.history = std::move(state.history);
    model.warnings = std::move(state.warnings);
    return model;
}

Matrix project(const AdaptationModel& model, const Dataset& samples, Projection which) {
    const Matrix& pool = model.training_pool.features;
    switch (which) {
    case Projection::Source:
        return model.Phi.transpose() * gram(pool, pool.leftCols(model.n_S), model.kernel);
    case Projection::GeneratedTarget:
        return model.Phi.transpose() * gram(pool, pool.leftCols(model.n_S), model.kernel) * model.Z;
    case Projection::NewTarget:
        if (samples.dim() != pool.rows())
            throw InputError("project: samples have dimension " + std::to_string(samples.dim()) +
                             ", model expects " + std::to_string(pool.rows()));
        return model.Phi.transpose() * gram(pool, samples.features, model.kernel);
    }
    throw InputError("project: unknown projection");
}

} // namespace mctl
