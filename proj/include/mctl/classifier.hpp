#pragma once

#include "mctl/dataset.hpp"

#include <vector>

namespace mctl {

/// Ridge least-squares regression onto one-hot class indicators.
struct ClassifierModel {
    Matrix weights; // d x C
    Vector bias;    // C
    std::vector<int> classes; // ascending, distinct, C >= 2
    double ridge = 0.0;

    Index dim() const { return weights.rows(); }
};

/// Fits (F_c F_c^T + ridge I) W = F_c Y_c^T on centered features and
/// one-hot targets; `features` holds one sample per column.
ClassifierModel train_classifier(const Matrix& features, const std::vector<int>& labels, double ridge);

/// Class scores, C x batch.
Matrix decision_scores(const ClassifierModel& model, const Matrix& features);

/// Argmax of the class scores; ties go to the earlier class in `classes`.
std::vector<int> predict(const ClassifierModel& model, const Matrix& features);

/// Fraction of predictions equal to `labels`.
double evaluate(const ClassifierModel& model, const Matrix& features, const std::vector<int>& labels);

/// Fraction of exact matches between two label lists of equal, non-zero length.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

} // namespace mctl
