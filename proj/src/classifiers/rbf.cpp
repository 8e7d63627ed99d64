#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <random>

#include "internal.hpp"

namespace crowncount {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return acc;
}

std::size_t nearest_center(const Matrix& centers, std::span<const double> p, double* best_out = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.rows(); ++c) {
        const double d = squared_distance(centers.row(c), p);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    if (best_out != nullptr) {
        *best_out = best_d;
    }
    return best;
}

}  // namespace

Matrix kmeans(const Matrix& points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = points.rows();
    const std::size_t m = points.cols();
    require(k >= 1, "k must be at least 1");
    require(n >= k, "k-means needs at least k points");

    std::mt19937_64 rng(seed);
    Matrix centers(k, m);
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    // k-means++ seeding
    std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    std::copy_n(points.row(first).begin(), m, centers.row(0).begin());
    chosen[first] = true;
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points.row(i), centers.row(c - 1)));
            total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            double cumulative = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cumulative += d2[i];
                if (d2[i] > 0.0 && cumulative > u) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {  // rounding left u at the very top of the range
                for (std::size_t i = n; i-- > 0;) {
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
        chosen[pick] = true;
        std::copy_n(points.row(pick).begin(), m, centers.row(c).begin());
    }

    // Lloyd iterations
    std::vector<std::size_t> assignment(n, k);
    std::vector<double> assigned_d2(n, 0.0);
    for (int iteration = 0; iteration < 100; ++iteration) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = nearest_center(centers, points.row(i), &assigned_d2[i]);
            if (c != assignment[i]) {
                assignment[i] = c;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        Matrix sums(k, m);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = points.row(i);
            auto target = sums.row(assignment[i]);
            for (std::size_t j = 0; j < m; ++j) {
                target[j] += row[j];
            }
            ++counts[assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                const auto far = static_cast<std::size_t>(
                    std::max_element(assigned_d2.begin(), assigned_d2.end()) - assigned_d2.begin());
                std::copy_n(points.row(far).begin(), m, centers.row(c).begin());
                assigned_d2[far] = 0.0;
                continue;
            }
            for (std::size_t j = 0; j < m; ++j) {
                centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
            }
        }
    }
    return centers;
}

namespace detail {

namespace {

void basis(const RbfModel& model, std::span<const double> z, std::span<double> out) {
    const double denom = 2.0 * model.width * model.width;
    for (std::size_t c = 0; c < model.centers.rows(); ++c) {
        out[c] = std::exp(-squared_distance(model.centers.row(c), z) / denom);
    }
}

}  // namespace

RbfModel fit_rbf(const TrainingSet& data, std::size_t centers, double ridge, std::uint64_t seed) {
    const std::size_t n = data.size();
    RbfModel model;
    model.scaler = Standardizer::fit(data.features);
    const Matrix z = model.scaler.apply(data.features);
    const std::size_t k = std::min(centers, n);
    model.centers = kmeans(z, k, seed);

    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            total += std::sqrt(squared_distance(model.centers.row(a), model.centers.row(b)));
            ++pairs;
        }
    }
    model.width = pairs > 0 && total > 0.0 ? total / static_cast<double>(pairs) : 1.0;

    const auto cols = static_cast<Eigen::Index>(k + 1);
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), cols);
    Eigen::VectorXd target(static_cast<Eigen::Index>(n));
    std::vector<double> phi(k);
    for (std::size_t i = 0; i < n; ++i) {
        basis(model, z.row(i), phi);
        for (std::size_t c = 0; c < k; ++c) {
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = phi[c];
        }
        design(static_cast<Eigen::Index>(i), cols - 1) = 1.0;
        target(static_cast<Eigen::Index>(i)) = data.labels[i];
    }
    Eigen::MatrixXd normal = design.transpose() * design;
    normal.diagonal().array() += ridge;
    const Eigen::VectorXd weights = normal.ldlt().solve(design.transpose() * target);
    model.output.assign(weights.data(), weights.data() + cols);
    return model;
}

double predict_p1(const RbfModel& model, std::span<const double> x) {
    std::vector<double> z(x.size());
    model.scaler.apply(x, z);
    const std::size_t k = model.centers.rows();
    std::vector<double> phi(k);
    basis(model, z, phi);
    double out = model.output[k];
    for (std::size_t c = 0; c < k; ++c) {
        out += model.output[c] * phi[c];
    }
    return std::clamp(out, 0.0, 1.0);
}

}  // namespace detail
}  // namespace crowncount
