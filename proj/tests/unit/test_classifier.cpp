#include "helpers.hpp"
#include "mctl/classifier.hpp"
#include "mctl/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

using namespace mctl;
using namespace mctl::testing;

namespace {

struct Blobs {
    Matrix X;
    std::vector<int> y;
};

Blobs blobs(int per_class, double spread, std::uint64_t seed, int classes = 3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, spread);
    Blobs b;
    b.X.resize(2, per_class * classes);
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            const Index j = c * per_class + i;
            b.X(0, j) = 4.0 * std::cos(2.0 * 3.14159265358979 * c / classes) + nd(rng);
            b.X(1, j) = 4.0 * std::sin(2.0 * 3.14159265358979 * c / classes) + nd(rng);
            b.y.push_back(c);
        }
    return b;
}

std::vector<int> nearest_neighbor(const Matrix& train, const std::vector<int>& labels, const Matrix& test) {
    std::vector<int> out;
    for (Index j = 0; j < test.cols(); ++j) {
        Index best = 0;
        (train.colwise() - test.col(j)).colwise().squaredNorm().minCoeff(&best);
        out.push_back(labels[static_cast<std::size_t>(best)]);
    }
    return out;
}

} // namespace

TEST_CASE("two classes on a line") {
    Matrix X(1, 2);
    X << -1.0, 1.0;
    const ClassifierModel m = train_classifier(X, {0, 1}, 1e-3);
    CHECK(predict(m, X) == std::vector<int>{0, 1});
    CHECK(m.classes == std::vector<int>{0, 1});
}

TEST_CASE("duplicating the training set leaves the unregularized model unchanged") {
    const Blobs b = blobs(5, 0.5, 1);
    Matrix twice(2, b.X.cols() * 2);
    twice << b.X, b.X;
    std::vector<int> y2 = b.y;
    y2.insert(y2.end(), b.y.begin(), b.y.end());
    const ClassifierModel a = train_classifier(b.X, b.y, 0.0);
    const ClassifierModel c = train_classifier(twice, y2, 0.0);
    CHECK(max_rel_error(a.weights, c.weights) <= 1e-10);
    CHECK(max_rel_error(a.bias, c.bias) <= 1e-10);
}

TEST_CASE("separable blobs are fit perfectly") {
    const Blobs b = blobs(30, 0.3, 2);
    const ClassifierModel m = train_classifier(b.X, b.y, 1e-3);
    CHECK(evaluate(m, b.X, b.y) == 1.0);
}

TEST_CASE("agrees with a nearest-neighbor oracle on separated blobs") {
    const Blobs train = blobs(20, 0.6, 3), test = blobs(30, 0.6, 4);
    const ClassifierModel m = train_classifier(train.X, train.y, 1e-3);
    const std::vector<int> nn = nearest_neighbor(train.X, train.y, test.X);
    CHECK(accuracy(predict(m, test.X), nn) >= 0.9);
}

TEST_CASE("score ties go to the first class") {
    Matrix X(1, 2);
    X << -1.0, 1.0;
    const ClassifierModel m = train_classifier(X, {3, 7}, 1e-3);
    // the midpoint scores both classes equally
    CHECK(predict(m, Matrix::Zero(1, 1)) == std::vector<int>{3});
}

TEST_CASE("prediction ignores training order") {
    const Blobs b = blobs(10, 1.0, 5);
    const Blobs test = blobs(10, 1.5, 6);
    std::vector<Index> perm(static_cast<std::size_t>(b.X.cols()));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(9);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix Xp(2, b.X.cols());
    std::vector<int> yp;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        Xp.col(static_cast<Index>(i)) = b.X.col(perm[i]);
        yp.push_back(b.y[static_cast<std::size_t>(perm[i])]);
    }
    CHECK(predict(train_classifier(b.X, b.y, 1e-3), test.X) == predict(train_classifier(Xp, yp, 1e-3), test.X));
}

TEST_CASE("accuracy is invariant to consistent relabeling") {
    const Blobs b = blobs(10, 1.2, 7), test = blobs(10, 1.5, 8);
    const std::map<int, int> bijection{{0, 42}, {1, -5}, {2, 9}};
    auto relabel = [&](std::vector<int> y) {
        for (int& v : y)
            v = bijection.at(v);
        return y;
    };
    const double plain = evaluate(train_classifier(b.X, b.y, 1e-3), test.X, test.y);
    const double mapped = evaluate(train_classifier(b.X, relabel(b.y), 1e-3), test.X, relabel(test.y));
    CHECK(plain == mapped);
}

TEST_CASE("a huge ridge collapses predictions to one class") {
    const Blobs b = blobs(10, 0.5, 9);
    std::vector<int> y = b.y;
    y.back() = 0; // make class 0 the prior majority
    const ClassifierModel m = train_classifier(b.X, y, 1e12);
    const std::vector<int> pred = predict(m, b.X);
    CHECK(std::all_of(pred.begin(), pred.end(), [&](int v) { return v == pred.front(); }));
    CHECK(pred.front() == 0);
}

TEST_CASE("one class listed under two labels still predicts a known label") {
    Matrix X(1, 4);
    X << 1.0, 1.0, 1.0, 1.0;
    const ClassifierModel m = train_classifier(X, {4, 4, 8, 8}, 1e6);
    const int p = predict(m, X).front();
    CHECK((p == 4 || p == 8));
}

TEST_CASE("accuracy counting") {
    CHECK(accuracy({1, 2, 3, 4}, {1, 2, 3, 0}) == 0.75);
    CHECK(accuracy({1, 1}, {1, 1}) == 1.0);
    CHECK(accuracy({0, 0}, {1, 1}) == 0.0);
}

TEST_CASE("classifier errors") {
    Matrix X = random_matrix(2, 3, 1);
    CHECK_THROWS_AS(train_classifier(X, {1, 1, 1}, 1e-3), InputError);
    CHECK_THROWS_AS(train_classifier(X, {0, 1}, 1e-3), InputError);
    // two samples in three dimensions: the centered scatter has rank one
    Matrix Y(3, 2);
    Y << 1, 2, 1, 2, 1, 2;
    CHECK_THROWS_AS(train_classifier(Y, {0, 1}, 0.0), NumericError);
    const ClassifierModel m = train_classifier(X, {0, 1, 1}, 1e-3);
    CHECK_THROWS_AS(predict(m, random_matrix(3, 2, 2)), InputError);
    CHECK_THROWS_AS(evaluate(m, Matrix(2, 0), {}), InputError);
    CHECK_THROWS_AS(accuracy({}, {}), InputError);
}
