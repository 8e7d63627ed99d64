#pragma once

// Two-class pixel classifiers behind a single fit / predict_proba contract.
//
// Labels are 0 (non-tree) and 1 (tree). Every model exposes a probability pair
// that sums to one; kinds without native probabilities document their scoring
// next to their learner struct below.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crowncount/error.hpp"

namespace crowncount {

enum class ClassifierKind {
    gaussian_nb,
    multinomial_nb,
    logistic,
    voted_perceptron,
    mlp,
    rbf,
    flda,
    one_nn,
    random_committee,
    random_subspace,
    random_forest,
    decision_stump,
    info_gain_tree,
};

std::string_view to_string(ClassifierKind kind);
/// Throws PreconditionError on an unknown name.
ClassifierKind parse_classifier_kind(std::string_view name);
std::span<const ClassifierKind> all_classifier_kinds();

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> values() const { return data_; }

    void append_row(std::span<const double> values);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct TrainingSet {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::size_t size() const { return labels.size(); }
    std::size_t feature_count() const { return features.cols(); }

    /// Throws DataError unless n >= 2, both classes present, m >= 1 and every
    /// entry finite.
    void validate() const;
};

using Hyperparameters = std::map<std::string, double>;

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::random_forest;
    Hyperparameters hyperparameters;
    std::uint64_t seed = 0;
    /// random_forest only: train and predict trees on worker threads.
    bool parallel = false;
};

/// Defaults merged with the spec's overrides. Throws PreconditionError for
/// unknown keys or values outside their documented range.
///
/// Defaults:
///   multinomial_nb     alpha=1
///   logistic           learning_rate=0.1 epochs=500
///   voted_perceptron   epochs=10
///   mlp                hidden=0 (means m) learning_rate=0.1 epochs=500
///   rbf                centers=10 ridge=1e-6
///   flda               ridge=1e-6
///   random_forest      trees=100 max_depth=0 (unlimited) min_leaf=1
///                      features_per_split=0 (means ceil(sqrt m)) bootstrap=1
///   random_committee   trees=100 max_depth=0 min_leaf=1 features_per_split=0
///                      (means floor(log2 m) + 1)
///   random_subspace    trees=100 max_depth=0 min_leaf=1 subspace_fraction=0.5
///   info_gain_tree     max_depth=0 min_leaf=1
Hyperparameters resolve_hyperparameters(const ClassifierSpec& spec);

struct Probability {
    double p0 = 0.5;
    double p1 = 0.5;
};

// Learned parameters ---------------------------------------------------------

/// Per-feature z-scoring learned from training data; zero spread maps to scale 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& features);
    void apply(std::span<const double> in, std::span<double> out) const;
    Matrix apply(const Matrix& features) const;
};

/// Welford accumulators per class and feature; variance = max(m2/count, 1e-9).
struct GaussianNbModel {
    std::array<double, 2> count{};
    std::array<std::vector<double>, 2> mean;
    std::array<std::vector<double>, 2> m2;

    double variance(int label, std::size_t feature) const;
};

/// Laplace-smoothed feature frequencies.
struct MultinomialNbModel {
    std::array<double, 2> log_prior{};
    std::array<std::vector<double>, 2> log_theta;
};

/// Sigmoid of w.x+b on standardized inputs; params = [w..., b].
struct LogisticModel {
    Standardizer scaler;
    std::vector<double> params;
};

/// Voted perceptron. Score = sum_k votes_k * sign(w_k.x); p1 = sigmoid(score / margin_scale).
struct VotedPerceptronModel {
    Standardizer scaler;
    Matrix weights;  ///< one row per stored perceptron, bias in the last column
    std::vector<double> votes;
    double margin_scale = 1.0;
};

/// One sigmoid hidden layer, sigmoid output.
/// params = [W1 (hidden x m, row-major), b1 (hidden), w2 (hidden), b2].
struct MlpModel {
    Standardizer scaler;
    std::size_t hidden = 0;
    std::vector<double> params;
};

/// Gaussian basis functions at k-means centers, linear output fitted by ridge
/// least squares on 0/1 targets. p1 = clamp(output, 0, 1).
struct RbfModel {
    Standardizer scaler;
    Matrix centers;
    double width = 1.0;
    std::vector<double> output;  ///< k weights then bias
};

/// Fisher discriminant; the decision boundary sits halfway between the
/// projected class centroids. p1 = sigmoid(margin / margin_scale).
struct FldaModel {
    std::vector<double> direction;
    double offset = 0.0;
    double margin_scale = 1.0;
};

/// IB1: Euclidean distance on min-max normalized features; p is 0 or 1.
/// Ties go to the earliest training instance.
struct NearestNeighborModel {
    std::vector<double> lo;
    std::vector<double> range;
    Matrix points;
    std::vector<int> labels;
};

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;  ///< taken when x[feature] <= threshold
    int right = -1;
    double p1 = 0.0;  ///< leaf class-1 frequency
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    double predict_p1(std::span<const double> x) const;
    std::size_t depth() const;
};

/// Averaged tree probabilities. A non-empty subset for tree t means tree t
/// was trained on those feature columns only (random subspace).
struct TreeEnsembleModel {
    std::vector<DecisionTree> trees;
    std::vector<std::vector<int>> feature_subsets;
};

/// p1 is the class-1 frequency on the chosen side of the split.
struct DecisionStumpModel {
    int feature = 0;
    double threshold = 0.0;
    double p1_left = 0.0;
    double p1_right = 0.0;
};

using Learner = std::variant<GaussianNbModel, MultinomialNbModel, LogisticModel, VotedPerceptronModel,
                             MlpModel, RbfModel, FldaModel, NearestNeighborModel, TreeEnsembleModel,
                             DecisionStumpModel, DecisionTree>;

/// A trained classifier. Immutable and cheap to copy; predictions are pure
/// and may be issued from any number of threads.
class ClassifierModel {
public:
    ClassifierModel(ClassifierSpec spec, std::size_t feature_count, std::array<double, 2> class_prior,
                    Learner learner);

    const ClassifierSpec& spec() const { return state_->spec; }
    ClassifierKind kind() const { return state_->spec.kind; }
    std::size_t feature_count() const { return state_->feature_count; }
    std::array<double, 2> class_prior() const { return state_->class_prior; }
    const Learner& learner() const { return state_->learner; }

    template <class T>
    const T& as() const {
        return std::get<T>(state_->learner);
    }

    /// Throws PreconditionError on a length mismatch or non-finite input.
    Probability predict_proba(std::span<const double> x) const;
    /// predict_proba without argument checks; x must have feature_count() entries.
    double predict_p1(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return predict_proba(x).p1 >= 0.5 ? 1 : 0; }

private:
    struct State {
        ClassifierSpec spec;
        std::size_t feature_count;
        std::array<double, 2> class_prior;
        Learner learner;
    };
    std::shared_ptr<const State> state_;
};

/// Deterministic given spec.seed, including parallel random forests.
/// Throws DataError on invalid data (single class, non-finite values, negative
/// values for multinomial_nb) and PreconditionError on bad hyperparameters.
ClassifierModel fit(const ClassifierSpec& spec, const TrainingSet& data);

/// Adds one labeled vector to a gaussian_nb model.
ClassifierModel incremental_update(const ClassifierModel& model, std::span<const double> x, int label);

/// Lloyd's algorithm with k-means++ seeding; stops at an assignment fixpoint
/// or after 100 iterations. Empty clusters are re-seeded at the point
/// farthest from its center.
Matrix kmeans(const Matrix& points, std::size_t k, std::uint64_t seed);

// Loss gradients (mean binary cross-entropy) ---------------------------------

enum class GradientKind { logistic, mlp };

double logistic_loss(std::span<const double> params, const Matrix& x, std::span<const int> labels);
std::vector<double> logistic_loss_gradient(std::span<const double> params, const Matrix& x,
                                           std::span<const int> labels);

double mlp_loss(std::span<const double> params, std::size_t hidden, const Matrix& x,
                std::span<const int> labels);
std::vector<double> mlp_loss_gradient(std::span<const double> params, std::size_t hidden, const Matrix& x,
                                      std::span<const int> labels);

inline std::size_t mlp_parameter_count(std::size_t inputs, std::size_t hidden) {
    return hidden * inputs + 2 * hidden + 1;
}

/// Dispatches on kind; `hidden` is ignored for logistic.
std::vector<double> gradient_of_loss(GradientKind kind, std::span<const double> params,
                                     const TrainingSet& batch, std::size_t hidden = 0);

}  // namespace crowncount
