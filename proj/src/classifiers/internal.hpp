#pragma once

// Per-family fit/predict entry points used by the ClassifierModel dispatcher.

#include <cmath>
#include <cstdint>
#include <span>

#include "crowncount/classifiers.hpp"

namespace crowncount::detail {

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + e^z) without overflow.
inline double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

/// Population standard deviation; 1 when the spread is zero.
double margin_scale(std::span<const double> margins);

GaussianNbModel fit_gaussian_nb(const TrainingSet& data);
void update_gaussian_nb(GaussianNbModel& model, std::span<const double> x, int label);
double predict_p1(const GaussianNbModel& model, std::span<const double> x);

MultinomialNbModel fit_multinomial_nb(const TrainingSet& data, double alpha);
double predict_p1(const MultinomialNbModel& model, std::span<const double> x);

LogisticModel fit_logistic(const TrainingSet& data, double learning_rate, int epochs);
double predict_p1(const LogisticModel& model, std::span<const double> x);

VotedPerceptronModel fit_voted_perceptron(const TrainingSet& data, int epochs, std::uint64_t seed);
double predict_p1(const VotedPerceptronModel& model, std::span<const double> x);

MlpModel fit_mlp(const TrainingSet& data, std::size_t hidden, double learning_rate, int epochs,
                 std::uint64_t seed);
double predict_p1(const MlpModel& model, std::span<const double> x);

RbfModel fit_rbf(const TrainingSet& data, std::size_t centers, double ridge, std::uint64_t seed);
double predict_p1(const RbfModel& model, std::span<const double> x);

FldaModel fit_flda(const TrainingSet& data, double ridge);
double predict_p1(const FldaModel& model, std::span<const double> x);

NearestNeighborModel fit_one_nn(const TrainingSet& data);
double predict_p1(const NearestNeighborModel& model, std::span<const double> x);

struct TreeParams {
    int max_depth = 0;  ///< 0 = unlimited
    int min_leaf = 1;
    /// Features drawn per split; >= m means every feature, no randomness.
    std::size_t features_per_split = 0;
};

/// Information-gain tree over the rows listed in `rows` (duplicates allowed).
/// With features_per_split < m, features are visited in random order and the
/// search continues past features_per_split until a positive gain appears.
DecisionTree build_tree(const Matrix& x, std::span<const int> labels, std::span<const std::size_t> rows,
                        const TreeParams& params, std::uint64_t seed);

TreeEnsembleModel fit_random_forest(const TrainingSet& data, int trees, const TreeParams& params, bool bootstrap,
                                    std::uint64_t seed, bool parallel);
TreeEnsembleModel fit_random_committee(const TrainingSet& data, int trees, const TreeParams& params,
                                       std::uint64_t seed);
TreeEnsembleModel fit_random_subspace(const TrainingSet& data, int trees, const TreeParams& params,
                                      double fraction, std::uint64_t seed);
double predict_p1(const TreeEnsembleModel& model, std::span<const double> x);

DecisionStumpModel fit_decision_stump(const TrainingSet& data);
double predict_p1(const DecisionStumpModel& model, std::span<const double> x);

double predict_p1(const DecisionTree& model, std::span<const double> x);

}  // namespace crowncount::detail
