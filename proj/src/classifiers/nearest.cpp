#include <algorithm>
#include <limits>

#include "internal.hpp"

namespace crowncount::detail {

NearestNeighborModel fit_one_nn(const TrainingSet& data) {
    const std::size_t n = data.size();
    const std::size_t m = data.feature_count();
    NearestNeighborModel model;
    model.lo.assign(m, std::numeric_limits<double>::infinity());
    std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            model.lo[j] = std::min(model.lo[j], data.features(i, j));
            hi[j] = std::max(hi[j], data.features(i, j));
        }
    }
    model.range.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double r = hi[j] - model.lo[j];
        model.range[j] = r > 0.0 ? r : 1.0;
    }
    model.points = Matrix(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            model.points(i, j) = (data.features(i, j) - model.lo[j]) / model.range[j];
        }
    }
    model.labels = data.labels;
    return model;
}

double predict_p1(const NearestNeighborModel& model, std::span<const double> x) {
    const std::size_t m = x.size();
    std::vector<double> q(m);
    for (std::size_t j = 0; j < m; ++j) {
        q[j] = (x[j] - model.lo[j]) / model.range[j];
    }
    double best = std::numeric_limits<double>::infinity();
    int label = 0;
    for (std::size_t i = 0; i < model.points.rows(); ++i) {
        const auto p = model.points.row(i);
        double d = 0.0;
        for (std::size_t j = 0; j < m && d < best; ++j) {
            const double diff = p[j] - q[j];
            d += diff * diff;
        }
        // strict comparison keeps the earliest instance on ties
        if (d < best) {
            best = d;
            label = model.labels[i];
        }
    }
    return static_cast<double>(label);
}

}  // namespace crowncount::detail
