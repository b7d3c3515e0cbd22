#include "mctl/losses.hpp"

#include "mctl/error.hpp"

#include <Eigen/SVD>

namespace mctl {

namespace {

void check_shapes(const ProjectedGrams& pg, const Matrix& Z) {
    if (Z.rows() != pg.A.cols() || Z.cols() != pg.B.cols())
        throw InputError("Z must be n_S x n_T (" + std::to_string(pg.A.cols()) + " x " +
                         std::to_string(pg.B.cols()) + "), got " + std::to_string(Z.rows()) + " x " +
                         std::to_string(Z.cols()));
}

void check_graph(const ProjectedGrams& pg, const AffinityGraph& graph) {
    if (graph.size() != pg.B.cols())
        throw InputError("affinity graph size does not match n_T");
}

double inv_nt2(const ProjectedGrams& pg) {
    const double nt = static_cast<double>(pg.B.cols());
    return 1.0 / (nt * nt);
}

} // namespace

ProjectedGrams ProjectedGrams::from(const Matrix& Phi, const GramSet& grams) {
    if (Phi.rows() != grams.n())
        throw InputError("Phi must have n = " + std::to_string(grams.n()) + " rows, got " +
                         std::to_string(Phi.rows()));
    ProjectedGrams pg;
    pg.A = Phi.transpose() * grams.K_S;
    pg.B = Phi.transpose() * grams.K_T;
    pg.ss = pg.A.transpose() * pg.A;
    pg.st = pg.A.transpose() * pg.B;
    return pg;
}

double lgdm_loss(const ProjectedGrams& pg, const Matrix& Z, const AffinityGraph& graph) {
    check_shapes(pg, Z);
    check_graph(pg, graph);
    const Matrix G = pg.A * Z;
    const Vector deg = graph.D.diagonal();
    const double gen = deg.dot(G.colwise().squaredNorm().transpose());
    const double tgt = deg.dot(pg.B.colwise().squaredNorm().transpose());
    const double cross = graph.W.cwiseProduct(G.transpose() * pg.B).sum();
    return inv_nt2(pg) * (gen + tgt - 2.0 * cross);
}

double lgdm_loss(const Matrix& Phi, const Matrix& Z, const GramSet& grams, const AffinityGraph& graph) {
    return lgdm_loss(ProjectedGrams::from(Phi, grams), Z, graph);
}

double lgdm_s_loss(const ProjectedGrams& pg, const Matrix& Z, const AffinityGraph& graph) {
    check_shapes(pg, Z);
    check_graph(pg, graph);
    const Matrix G = pg.A * Z;
    return 2.0 * inv_nt2(pg) * (G * graph.L).cwiseProduct(G).sum();
}

double lgdm_s_loss(const Matrix& Phi, const Matrix& Z, const GramSet& grams, const AffinityGraph& graph) {
    return lgdm_s_loss(ProjectedGrams::from(Phi, grams), Z, graph);
}

double ggdm_loss(const ProjectedGrams& pg, const Matrix& Z) {
    check_shapes(pg, Z);
    const Vector diff = pg.A * Z.rowwise().sum() - pg.B.rowwise().sum();
    return inv_nt2(pg) * diff.squaredNorm();
}

double ggdm_loss(const Matrix& Phi, const Matrix& Z, const GramSet& grams) {
    return ggdm_loss(ProjectedGrams::from(Phi, grams), Z);
}

double nuclear_norm(const Matrix& Z) {
    if (Z.size() == 0)
        return 0.0;
    Eigen::BDCSVD<Matrix> svd(Z);
    return svd.singularValues().sum();
}

namespace {

double manifold_term(const ProjectedGrams& pg, const Matrix& Z, const AffinityGraph& graph,
                     const MctlConfig& cfg) {
    if (!cfg.uses_lgdm())
        return 0.0;
    return cfg.variant == Variant::Mctl ? lgdm_loss(pg, Z, graph) : lgdm_s_loss(pg, Z, graph);
}

double penalty_term(const Matrix& Z, const SolverState& state, const MctlConfig& cfg) {
    if (!cfg.uses_lrc())
        return 0.0;
    const Matrix gap = Z - state.J;
    return state.R1.cwiseProduct(gap).sum() + 0.5 * state.mu * gap.squaredNorm();
}

} // namespace

double smooth_objective(const ProjectedGrams& pg, const Matrix& Z, const SolverState& state,
                        const AffinityGraph& graph, const MctlConfig& cfg) {
    const double tau = cfg.effective_tau();
    double value = manifold_term(pg, Z, graph, cfg) + penalty_term(Z, state, cfg);
    if (tau != 0.0)
        value += tau * ggdm_loss(pg, Z);
    return value;
}

LossBreakdown augmented_lagrangian(const SolverState& state, const GramSet& grams,
                                   const AffinityGraph& graph, const MctlConfig& cfg) {
    const auto pg = ProjectedGrams::from(state.Phi, grams);
    LossBreakdown out;
    out.lgdm = manifold_term(pg, state.Z, graph, cfg);
    out.ggdm = cfg.ablation.drop_ggdm ? 0.0 : ggdm_loss(pg, state.Z);
    out.nuclear = cfg.uses_lrc() ? nuclear_norm(state.J) : 0.0;
    out.penalty = penalty_term(state.Z, state, cfg);
    out.total = out.lgdm + cfg.tau * out.ggdm + cfg.lambda1 * out.nuclear + out.penalty;
    return out;
}

} // namespace mctl
