#include "mctl/classifier.hpp"

#include "mctl/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>

namespace mctl {

ClassifierModel train_classifier(const Matrix& features, const std::vector<int>& labels, double ridge) {
    if (!(ridge >= 0.0) || !std::isfinite(ridge))
        throw ConfigError("classifier ridge must be finite and >= 0");
    if (static_cast<Index>(labels.size()) != features.cols())
        throw InputError("train_classifier: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(features.cols()) + " samples");
    if (features.cols() == 0)
        throw InputError("train_classifier: empty training set");
    if (!features.allFinite())
        throw InputError("train_classifier: features contain NaN or Inf");

    ClassifierModel model;
    model.ridge = ridge;
    model.classes = labels;
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    if (model.classes.size() < 2)
        throw InputError("train_classifier: need at least two classes");

    const Index n = features.cols();
    const Index d = features.rows();
    const Index C = static_cast<Index>(model.classes.size());
    Matrix Y = Matrix::Zero(C, n);
    for (Index j = 0; j < n; ++j) {
        auto it = std::lower_bound(model.classes.begin(), model.classes.end(), labels[static_cast<std::size_t>(j)]);
        Y(it - model.classes.begin(), j) = 1.0;
    }

    const Vector f_mean = features.rowwise().mean();
    const Vector y_mean = Y.rowwise().mean();
    const Matrix Fc = features.colwise() - f_mean;
    const Matrix Yc = Y.colwise() - y_mean;

    Matrix lhs = Fc * Fc.transpose();
    lhs.diagonal().array() += ridge;
    const Matrix rhs = Fc * Yc.transpose();
    if (ridge > 0.0) {
        Eigen::LLT<Matrix> llt(lhs);
        if (llt.info() != Eigen::Success)
            throw NumericError("train_classifier: normal equations are not positive definite");
        model.weights = llt.solve(rhs);
    } else {
        Eigen::FullPivLU<Matrix> lu(lhs);
        if (lu.rank() < d)
            throw NumericError("train_classifier: singular normal equations with ridge = 0 "
                               "(rank " + std::to_string(lu.rank()) + " < " + std::to_string(d) +
                               "); use ridge > 0");
        model.weights = lu.solve(rhs);
    }
    model.bias = y_mean - model.weights.transpose() * f_mean;
    return model;
}

Matrix decision_scores(const ClassifierModel& model, const Matrix& features) {
    if (features.rows() != model.dim())
        throw InputError("predict: features have dimension " + std::to_string(features.rows()) +
                         ", model expects " + std::to_string(model.dim()));
    return (model.weights.transpose() * features).colwise() + model.bias;
}

std::vector<int> predict(const ClassifierModel& model, const Matrix& features) {
    const Matrix scores = decision_scores(model, features);
    std::vector<int> out(static_cast<std::size_t>(scores.cols()));
    for (Index j = 0; j < scores.cols(); ++j) {
        Index best = 0;
        for (Index c = 1; c < scores.rows(); ++c)
            if (scores(c, j) > scores(best, j))
                best = c;
        out[static_cast<std::size_t>(j)] = model.classes[static_cast<std::size_t>(best)];
    }
    return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (truth.empty())
        throw InputError("evaluate: empty test set");
    if (predicted.size() != truth.size())
        throw InputError("evaluate: prediction and label counts differ");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double evaluate(const ClassifierModel& model, const Matrix& features, const std::vector<int>& labels) {
    if (labels.empty())
        throw InputError("evaluate: empty test set");
    if (static_cast<Index>(labels.size()) != features.cols())
        throw InputError("evaluate: label count does not match sample count");
    return accuracy(predict(model, features), labels);
}

} // namespace mctl
