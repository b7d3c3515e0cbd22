#include "mctl/kernel_graph.hpp"

#include "mctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mctl {

namespace {

// Direct differences rather than the ‖a‖² + ‖b‖² − 2aᵀb expansion, which
// cancels badly for near neighbors and breaks the exact unit diagonal.
Matrix squared_distances(const Matrix& a, const Matrix& b) {
    Matrix d(a.cols(), b.cols());
    for (Index j = 0; j < b.cols(); ++j)
        for (Index i = 0; i < a.cols(); ++i)
            d(i, j) = (a.col(i) - b.col(j)).squaredNorm();
    return d;
}

// Indices of the k smallest entries of `dist` excluding `self`, ties to lower index.
std::vector<Index> nearest(const Vector& dist, int k, Index self) {
    std::vector<Index> order(static_cast<std::size_t>(dist.size()));
    std::iota(order.begin(), order.end(), Index{0});
    if (self >= 0)
        order.erase(order.begin() + self);
    std::stable_sort(order.begin(), order.end(),
                     [&](Index x, Index y) { return dist(x) < dist(y); });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

} // namespace

void KernelSpec::validate() const {
    if (kind == KernelKind::Gaussian && !(sigma > 0.0 && std::isfinite(sigma)))
        throw ConfigError("gaussian kernel requires sigma > 0");
}

std::optional<KernelKind> parse_kernel_kind(const std::string& text) {
    if (text == "linear")
        return KernelKind::Linear;
    if (text == "gaussian" || text == "rbf")
        return KernelKind::Gaussian;
    return std::nullopt;
}

std::string to_string(KernelKind kind) {
    return kind == KernelKind::Linear ? "linear" : "gaussian";
}

Matrix gram(const Matrix& pool, const Matrix& part, const KernelSpec& spec) {
    spec.validate();
    if (pool.rows() != part.rows())
        throw InputError("gram: feature dimensions differ (" + std::to_string(pool.rows()) + " vs " +
                         std::to_string(part.rows()) + ")");
    if (spec.kind == KernelKind::Linear)
        return pool.transpose() * part;
    const double scale = -1.0 / (2.0 * spec.sigma * spec.sigma);
    return (squared_distances(pool, part) * scale).array().exp().matrix();
}

Matrix gram(const Dataset& pool, const Dataset& part, const KernelSpec& spec) {
    return gram(pool.features, part.features, spec);
}

GramSet build_gram_set(const Dataset& source, const Dataset& target, const KernelSpec& spec) {
    if (source.size() == 0 || target.size() == 0)
        throw InputError("build_gram_set: source and target must both be non-empty");
    if (source.dim() != target.dim())
        throw InputError("build_gram_set: source has dimension " + std::to_string(source.dim()) +
                         ", target has " + std::to_string(target.dim()));
    Matrix pool(source.dim(), source.size() + target.size());
    pool << source.features, target.features;

    GramSet g;
    g.n_S = source.size();
    g.n_T = target.size();
    g.K = gram(pool, pool, spec);
    // Kernel evaluations are symmetric in exact arithmetic; enforce it bitwise.
    g.K = (0.5 * (g.K + g.K.transpose())).eval();
    g.K_S = g.K.leftCols(g.n_S);
    g.K_T = g.K.rightCols(g.n_T);
    return g;
}

AffinityGraph graph_from_affinity(Matrix W, int k) {
    AffinityGraph g;
    g.k = k;
    g.D = W.rowwise().sum().asDiagonal();
    g.L = g.D - W;
    g.W = std::move(W);
    return g;
}

AffinityGraph knn_graph(const Matrix& samples, int k) {
    const Index n = samples.cols();
    if (k < 1 || k >= n)
        throw ConfigError("knn_graph: need 1 <= k < n_T (k = " + std::to_string(k) +
                          ", n_T = " + std::to_string(n) + ")");
    const Matrix dist = squared_distances(samples, samples);
    Matrix W = Matrix::Zero(n, n);
    for (Index q = 0; q < n; ++q)
        for (Index p : nearest(dist.col(q), k, q)) {
            W(p, q) = 1.0;
            W(q, p) = 1.0;
        }
    return graph_from_affinity(std::move(W), k);
}

AffinityGraph knn_graph(const Dataset& target, int k) {
    return knn_graph(target.features, k);
}

AffinityGraph cross_knn_graph(const Matrix& generated, const Matrix& target, int k) {
    const Index n = target.cols();
    if (generated.cols() != n || generated.rows() != target.rows())
        throw InputError("cross_knn_graph: generated and target sets differ in shape");
    if (k < 1 || k >= n)
        throw ConfigError("cross_knn_graph: need 1 <= k < n_T");
    const Matrix dist = squared_distances(generated, target); // (p, q)
    Matrix W = Matrix::Zero(n, n);
    for (Index q = 0; q < n; ++q)
        for (Index p : nearest(dist.col(q), k, -1))
            W(p, q) = 1.0;
    for (Index p = 0; p < n; ++p)
        for (Index q : nearest(dist.row(p).transpose(), k, -1))
            W(p, q) = 1.0;
    W = W.cwiseMax(W.transpose()).eval();
    W.diagonal().setZero();
    return graph_from_affinity(std::move(W), k);
}

} // namespace mctl
