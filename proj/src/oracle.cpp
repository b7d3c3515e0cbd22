#include "mctl/oracle.hpp"

#include "mctl/error.hpp"

#include <Eigen/Eigenvalues>

namespace mctl::oracle {

Matrix fd_gradient(const LossFn& loss, const Matrix& Z, double base_h) {
    if (!(base_h > 0.0))
        throw ConfigError("fd_gradient: step must be > 0");
    Matrix grad(Z.rows(), Z.cols());
    Matrix probe = Z;
    for (Index j = 0; j < Z.cols(); ++j)
        for (Index i = 0; i < Z.rows(); ++i) {
            const double h = base_h * (1.0 + std::abs(Z(i, j)));
            probe(i, j) = Z(i, j) + h;
            const double up = loss(probe);
            probe(i, j) = Z(i, j) - h;
            const double down = loss(probe);
            probe(i, j) = Z(i, j);
            grad(i, j) = (up - down) / (2.0 * h);
        }
    return grad;
}

double lgdm_pairwise(const Matrix& generated, const Matrix& target, const Matrix& W) {
    const Index nt = target.cols();
    if (generated.cols() != nt || W.rows() != nt || W.cols() != nt || generated.rows() != target.rows())
        throw InputError("lgdm_pairwise: shapes do not agree");
    double sum = 0.0;
    for (Index p = 0; p < nt; ++p)
        for (Index q = 0; q < nt; ++q) {
            if (W(p, q) == 0.0)
                continue;
            double dist = 0.0;
            for (Index r = 0; r < target.rows(); ++r) {
                const double diff = generated(r, p) - target(r, q);
                dist += diff * diff;
            }
            sum += W(p, q) * dist;
        }
    return sum / (static_cast<double>(nt) * static_cast<double>(nt));
}

Matrix svt_reference(const Matrix& S, double threshold) {
    if (threshold < 0.0)
        throw ConfigError("svt_reference: threshold must be >= 0");
    if (threshold == 0.0 || S.size() == 0)
        return S;
    // For S = U diag(s) V^T:  U diag((s - t)_+) V^T = S V diag((1 - t/s)_+) V^T,
    // with V and s^2 from the eigen-decomposition of S^T S.
    const bool tall = S.rows() >= S.cols();
    const Matrix gram = tall ? Matrix(S.transpose() * S) : Matrix(S * S.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    Vector weight(gram.rows());
    for (Index i = 0; i < gram.rows(); ++i) {
        const double s = std::sqrt(std::max(eig.eigenvalues()(i), 0.0));
        weight(i) = s > threshold ? 1.0 - threshold / s : 0.0;
    }
    const Matrix& V = eig.eigenvectors();
    const Matrix P = V * weight.asDiagonal() * V.transpose();
    return tall ? Matrix(S * P) : Matrix(P * S);
}

double generalized_eigen_residual(const Matrix& M, const Matrix& B, const Matrix& V, const Vector& lambda) {
    double worst = 0.0;
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    for (Index i = 0; i < V.cols(); ++i)
        worst = std::max(worst, (M * V.col(i) - lambda(i) * B * V.col(i)).norm() / scale);
    return worst;
}

} // namespace mctl::oracle
