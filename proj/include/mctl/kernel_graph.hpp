#pragma once

#include "mctl/dataset.hpp"

namespace mctl {

enum class KernelKind { Linear, Gaussian };

struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    double sigma = 1.0; // Gaussian bandwidth in feature units; unused for Linear

    void validate() const;
};

std::optional<KernelKind> parse_kernel_kind(const std::string& text);
std::string to_string(KernelKind kind);

/// Kernel matrices over the pooled training set X = [X_S, X_T].
struct GramSet {
    Matrix K;   // n x n
    Matrix K_S; // n x n_S, columns 0..n_S of K
    Matrix K_T; // n x n_T, columns n_S..n of K
    Index n_S = 0;
    Index n_T = 0;

    Index n() const { return n_S + n_T; }
};

/// Binary kNN affinity over target samples with its degree and Laplacian.
struct AffinityGraph {
    Matrix W;
    Matrix D;
    Matrix L;
    int k = 0;

    Index size() const { return W.rows(); }
};

/// result(i, j) = k(pool_i, part_j) for sample matrices with one sample per column.
Matrix gram(const Matrix& pool, const Matrix& part, const KernelSpec& spec);
Matrix gram(const Dataset& pool, const Dataset& part, const KernelSpec& spec);

GramSet build_gram_set(const Dataset& source, const Dataset& target, const KernelSpec& spec);

/// Symmetric OR-rule kNN graph under Euclidean distance; self excluded and
/// distance ties broken by the lower sample index.
AffinityGraph knn_graph(const Matrix& samples, int k);
AffinityGraph knn_graph(const Dataset& target, int k);

/// W_pq = 1 when generated sample p is among the k nearest generated points of
/// true sample q, or q among the k nearest true points of p; symmetrized and
/// with a zero diagonal. Used when the affinity follows the generated domain.
AffinityGraph cross_knn_graph(const Matrix& generated, const Matrix& target, int k);

/// Fills D and L from W.
AffinityGraph graph_from_affinity(Matrix W, int k);

} // namespace mctl
