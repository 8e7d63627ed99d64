#include <cmath>
#include <numbers>

#include "internal.hpp"

namespace crowncount {

namespace {

constexpr double kVarianceFloor = 1e-9;

}  // namespace

double GaussianNbModel::variance(int label, std::size_t feature) const {
    const auto c = static_cast<std::size_t>(label);
    const double v = count[c] > 0.0 ? m2[c][feature] / count[c] : 0.0;
    return v > kVarianceFloor ? v : kVarianceFloor;
}

namespace detail {

namespace {

double posterior_p1(double log_joint0, double log_joint1) { return sigmoid(log_joint1 - log_joint0); }

}  // namespace

GaussianNbModel fit_gaussian_nb(const TrainingSet& data) {
    const std::size_t m = data.feature_count();
    GaussianNbModel model;
    for (std::size_t c = 0; c < 2; ++c) {
        model.mean[c].assign(m, 0.0);
        model.m2[c].assign(m, 0.0);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        model.count[static_cast<std::size_t>(data.labels[i])] += 1.0;
    }
    // two-pass statistics; incremental updates reproduce them up to rounding
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto c = static_cast<std::size_t>(data.labels[i]);
        for (std::size_t j = 0; j < m; ++j) {
            model.mean[c][j] += data.features(i, j);
        }
    }
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < m; ++j) {
            model.mean[c][j] /= model.count[c];
        }
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto c = static_cast<std::size_t>(data.labels[i]);
        for (std::size_t j = 0; j < m; ++j) {
            const double d = data.features(i, j) - model.mean[c][j];
            model.m2[c][j] += d * d;
        }
    }
    return model;
}

void update_gaussian_nb(GaussianNbModel& model, std::span<const double> x, int label) {
    const auto c = static_cast<std::size_t>(label);
    model.count[c] += 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double delta = x[j] - model.mean[c][j];
        model.mean[c][j] += delta / model.count[c];
        model.m2[c][j] += delta * (x[j] - model.mean[c][j]);
    }
}

double predict_p1(const GaussianNbModel& model, std::span<const double> x) {
    const double total = model.count[0] + model.count[1];
    std::array<double, 2> log_joint{};
    for (std::size_t c = 0; c < 2; ++c) {
        double acc = std::log(model.count[c] / total);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double var = model.variance(static_cast<int>(c), j);
            const double d = x[j] - model.mean[c][j];
            acc += -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
        }
        log_joint[c] = acc;
    }
    return posterior_p1(log_joint[0], log_joint[1]);
}

MultinomialNbModel fit_multinomial_nb(const TrainingSet& data, double alpha) {
    const std::size_t m = data.feature_count();
    for (const double v : data.features.values()) {
        if (v < 0.0) {
            throw DataError("multinomial naive Bayes requires non-negative features");
        }
    }
    std::array<std::vector<double>, 2> totals{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    std::array<double, 2> counts{};
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto c = static_cast<std::size_t>(data.labels[i]);
        counts[c] += 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            totals[c][j] += data.features(i, j);
        }
    }
    MultinomialNbModel model;
    const double n = counts[0] + counts[1];
    for (std::size_t c = 0; c < 2; ++c) {
        model.log_prior[c] = std::log(counts[c] / n);
        double grand = 0.0;
        for (const double t : totals[c]) {
            grand += t;
        }
        model.log_theta[c].resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            model.log_theta[c][j] = std::log((totals[c][j] + alpha) / (grand + alpha * static_cast<double>(m)));
        }
    }
    return model;
}

double predict_p1(const MultinomialNbModel& model, std::span<const double> x) {
    std::array<double, 2> log_joint{};
    for (std::size_t c = 0; c < 2; ++c) {
        log_joint[c] = model.log_prior[c] + dot(x, model.log_theta[c]);
    }
    return posterior_p1(log_joint[0], log_joint[1]);
}

}  // namespace detail

}  // namespace crowncount
