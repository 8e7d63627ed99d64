// Gradient-trained and linear-discriminant learners: logistic regression,
// the one-hidden-layer perceptron, the voted perceptron and Fisher LDA.

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <random>

#include "internal.hpp"

namespace crowncount {

using detail::sigmoid;
using detail::softplus;

double logistic_loss(std::span<const double> params, const Matrix& x, std::span<const int> labels) {
    const std::size_t m = x.cols();
    require(params.size() == m + 1, "logistic parameter vector must have m+1 entries");
    const std::span<const double> w = params.first(m);
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double z = detail::dot(w, x.row(i)) + params[m];
        loss += softplus(z) - labels[i] * z;
    }
    return loss / static_cast<double>(x.rows());
}

std::vector<double> logistic_loss_gradient(std::span<const double> params, const Matrix& x,
                                           std::span<const int> labels) {
    const std::size_t m = x.cols();
    require(params.size() == m + 1, "logistic parameter vector must have m+1 entries");
    const std::span<const double> w = params.first(m);
    std::vector<double> grad(m + 1, 0.0);
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        const double residual = (sigmoid(detail::dot(w, row) + params[m]) - labels[i]) * inv_n;
        for (std::size_t j = 0; j < m; ++j) {
            grad[j] += residual * row[j];
        }
        grad[m] += residual;
    }
    return grad;
}

namespace {

struct MlpView {
    std::span<const double> w1;  // hidden x m
    std::span<const double> b1;
    std::span<const double> w2;
    double b2;
};

MlpView view_mlp(std::span<const double> params, std::size_t inputs, std::size_t hidden) {
    require(params.size() == mlp_parameter_count(inputs, hidden), "mlp parameter vector has the wrong length");
    return MlpView{params.subspan(0, hidden * inputs), params.subspan(hidden * inputs, hidden),
                   params.subspan(hidden * inputs + hidden, hidden), params[hidden * inputs + 2 * hidden]};
}

// Returns the output pre-activation and fills the hidden activations.
double mlp_forward(const MlpView& net, std::span<const double> x, std::span<double> hidden_out) {
    const std::size_t m = x.size();
    double z = net.b2;
    for (std::size_t k = 0; k < hidden_out.size(); ++k) {
        const double a = sigmoid(detail::dot(net.w1.subspan(k * m, m), x) + net.b1[k]);
        hidden_out[k] = a;
        z += net.w2[k] * a;
    }
    return z;
}

}  // namespace

double mlp_loss(std::span<const double> params, std::size_t hidden, const Matrix& x, std::span<const int> labels) {
    const MlpView net = view_mlp(params, x.cols(), hidden);
    std::vector<double> act(hidden);
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double z = mlp_forward(net, x.row(i), act);
        loss += softplus(z) - labels[i] * z;
    }
    return loss / static_cast<double>(x.rows());
}

std::vector<double> mlp_loss_gradient(std::span<const double> params, std::size_t hidden, const Matrix& x,
                                      std::span<const int> labels) {
    const std::size_t m = x.cols();
    const MlpView net = view_mlp(params, m, hidden);
    std::vector<double> grad(params.size(), 0.0);
    const std::span<double> g_w1(grad.data(), hidden * m);
    const std::span<double> g_b1(grad.data() + hidden * m, hidden);
    const std::span<double> g_w2(grad.data() + hidden * m + hidden, hidden);
    double& g_b2 = grad[hidden * m + 2 * hidden];
    std::vector<double> act(hidden);
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        const double z = mlp_forward(net, row, act);
        const double dz = (sigmoid(z) - labels[i]) * inv_n;
        g_b2 += dz;
        for (std::size_t k = 0; k < hidden; ++k) {
            g_w2[k] += dz * act[k];
            const double dh = dz * net.w2[k] * act[k] * (1.0 - act[k]);
            g_b1[k] += dh;
            for (std::size_t j = 0; j < m; ++j) {
                g_w1[k * m + j] += dh * row[j];
            }
        }
    }
    return grad;
}

namespace detail {

LogisticModel fit_logistic(const TrainingSet& data, double learning_rate, int epochs) {
    LogisticModel model;
    model.scaler = Standardizer::fit(data.features);
    const Matrix z = model.scaler.apply(data.features);
    model.params.assign(data.feature_count() + 1, 0.0);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const std::vector<double> grad = logistic_loss_gradient(model.params, z, data.labels);
        for (std::size_t j = 0; j < grad.size(); ++j) {
            model.params[j] -= learning_rate * grad[j];
        }
    }
    return model;
}

double predict_p1(const LogisticModel& model, std::span<const double> x) {
    const std::size_t m = x.size();
    double z = model.params[m];
    for (std::size_t j = 0; j < m; ++j) {
        z += model.params[j] * (x[j] - model.scaler.mean[j]) / model.scaler.scale[j];
    }
    return sigmoid(z);
}

MlpModel fit_mlp(const TrainingSet& data, std::size_t hidden, double learning_rate, int epochs, std::uint64_t seed) {
    const std::size_t m = data.feature_count();
    MlpModel model;
    model.scaler = Standardizer::fit(data.features);
    model.hidden = hidden;
    const Matrix z = model.scaler.apply(data.features);

    // Glorot-uniform initialization, zero biases.
    std::mt19937_64 rng(seed);
    const double limit1 = std::sqrt(6.0 / static_cast<double>(m + hidden));
    const double limit2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    std::uniform_real_distribution<double> init1(-limit1, limit1);
    std::uniform_real_distribution<double> init2(-limit2, limit2);
    model.params.assign(mlp_parameter_count(m, hidden), 0.0);
    for (std::size_t i = 0; i < hidden * m; ++i) {
        model.params[i] = init1(rng);
    }
    for (std::size_t k = 0; k < hidden; ++k) {
        model.params[hidden * m + hidden + k] = init2(rng);
    }
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const std::vector<double> grad = mlp_loss_gradient(model.params, hidden, z, data.labels);
        for (std::size_t j = 0; j < grad.size(); ++j) {
            model.params[j] -= learning_rate * grad[j];
        }
    }
    return model;
}

double predict_p1(const MlpModel& model, std::span<const double> x) {
    std::vector<double> standardized(x.size());
    model.scaler.apply(x, standardized);
    std::vector<double> act(model.hidden);
    const MlpView net = view_mlp(model.params, x.size(), model.hidden);
    return sigmoid(mlp_forward(net, standardized, act));
}

namespace {

double voted_score(const VotedPerceptronModel& model, std::span<const double> z) {
    const std::size_t m = z.size();
    double score = 0.0;
    for (std::size_t k = 0; k < model.votes.size(); ++k) {
        const auto w = model.weights.row(k);
        const double activation = dot(w.first(m), z) + w[m];
        score += model.votes[k] * (activation > 0.0 ? 1.0 : (activation < 0.0 ? -1.0 : 0.0));
    }
    return score;
}

}  // namespace

VotedPerceptronModel fit_voted_perceptron(const TrainingSet& data, int epochs, std::uint64_t seed) {
    const std::size_t n = data.size();
    const std::size_t m = data.feature_count();
    VotedPerceptronModel model;
    model.scaler = Standardizer::fit(data.features);
    const Matrix z = model.scaler.apply(data.features);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> w(m + 1, 0.0);
    double votes = 0.0;
    model.weights = Matrix(0, m + 1);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (const std::size_t i : order) {
            const double y = data.labels[i] == 1 ? 1.0 : -1.0;
            const auto row = z.row(i);
            const double activation = dot(std::span<const double>(w).first(m), row) + w[m];
            if (y * activation <= 0.0) {
                if (votes > 0.0) {
                    model.weights.append_row(w);
                    model.votes.push_back(votes);
                }
                for (std::size_t j = 0; j < m; ++j) {
                    w[j] += y * row[j];
                }
                w[m] += y;
                votes = 1.0;
            } else {
                votes += 1.0;
            }
        }
    }
    if (votes > 0.0) {
        model.weights.append_row(w);
        model.votes.push_back(votes);
    }

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = voted_score(model, z.row(i));
    }
    model.margin_scale = margin_scale(scores);
    return model;
}

double predict_p1(const VotedPerceptronModel& model, std::span<const double> x) {
    std::vector<double> z(x.size());
    model.scaler.apply(x, z);
    return sigmoid(voted_score(model, z) / model.margin_scale);
}

FldaModel fit_flda(const TrainingSet& data, double ridge) {
    const std::size_t n = data.size();
    const auto m = static_cast<Eigen::Index>(data.feature_count());
    std::array<Eigen::VectorXd, 2> mean{Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};
    std::array<double, 2> count{};
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(data.labels[i]);
        mean[c] += Eigen::Map<const Eigen::VectorXd>(data.features.row(i).data(), m);
        count[c] += 1.0;
    }
    mean[0] /= count[0];
    mean[1] /= count[1];

    Eigen::MatrixXd within = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(data.labels[i]);
        const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(data.features.row(i).data(), m) - mean[c];
        within.noalias() += d * d.transpose();
    }
    within /= std::max(1.0, static_cast<double>(n) - 2.0);
    within.diagonal().array() += ridge;

    const Eigen::VectorXd direction = within.ldlt().solve(mean[1] - mean[0]);
    FldaModel model;
    model.direction.assign(direction.data(), direction.data() + m);
    model.offset = direction.dot(0.5 * (mean[0] + mean[1]));

    std::vector<double> margins(n);
    for (std::size_t i = 0; i < n; ++i) {
        margins[i] = dot(model.direction, data.features.row(i)) - model.offset;
    }
    model.margin_scale = margin_scale(margins);
    return model;
}

double predict_p1(const FldaModel& model, std::span<const double> x) {
    return sigmoid((dot(model.direction, x) - model.offset) / model.margin_scale);
}

}  // namespace detail
}  // namespace crowncount
