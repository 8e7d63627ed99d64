#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "crowncount/classifiers.hpp"
#include "internal.hpp"

namespace crowncount {

namespace {

constexpr std::array<ClassifierKind, 13> kAllKinds{
    ClassifierKind::gaussian_nb,     ClassifierKind::multinomial_nb,   ClassifierKind::logistic,
    ClassifierKind::voted_perceptron, ClassifierKind::mlp,             ClassifierKind::rbf,
    ClassifierKind::flda,            ClassifierKind::one_nn,           ClassifierKind::random_committee,
    ClassifierKind::random_subspace, ClassifierKind::random_forest,    ClassifierKind::decision_stump,
    ClassifierKind::info_gain_tree,
};

struct HyperDef {
    const char* name;
    double fallback;
    double min;
    double max;
    bool integer;
};

std::vector<HyperDef> hyper_defs(ClassifierKind kind) {
    constexpr double inf = 1e300;
    const HyperDef trees{"trees", 100, 1, 100000, true};
    const HyperDef max_depth{"max_depth", 0, 0, 10000, true};
    const HyperDef min_leaf{"min_leaf", 1, 1, 1e9, true};
    switch (kind) {
        case ClassifierKind::gaussian_nb:
            return {};
        case ClassifierKind::multinomial_nb:
            return {{"alpha", 1.0, 1e-12, inf, false}};
        case ClassifierKind::logistic:
            return {{"learning_rate", 0.1, 1e-12, 1e6, false}, {"epochs", 500, 1, 1e7, true}};
        case ClassifierKind::voted_perceptron:
            return {{"epochs", 10, 1, 1e6, true}};
        case ClassifierKind::mlp:
            return {{"hidden", 0, 0, 1e5, true},
                    {"learning_rate", 0.1, 1e-12, 1e6, false},
                    {"epochs", 500, 1, 1e7, true}};
        case ClassifierKind::rbf:
            return {{"centers", 10, 1, 1e6, true}, {"ridge", 1e-6, 0, inf, false}};
        case ClassifierKind::flda:
            return {{"ridge", 1e-6, 0, inf, false}};
        case ClassifierKind::one_nn:
            return {};
        case ClassifierKind::random_forest:
            return {trees, max_depth, min_leaf, {"features_per_split", 0, 0, 1e6, true}, {"bootstrap", 1, 0, 1, true}};
        case ClassifierKind::random_committee:
            return {trees, max_depth, min_leaf, {"features_per_split", 0, 0, 1e6, true}};
        case ClassifierKind::random_subspace:
            return {trees, max_depth, min_leaf, {"subspace_fraction", 0.5, 1e-9, 1.0, false}};
        case ClassifierKind::decision_stump:
            return {};
        case ClassifierKind::info_gain_tree:
            return {max_depth, min_leaf};
    }
    return {};
}

}  // namespace

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::gaussian_nb: return "gaussian_nb";
        case ClassifierKind::multinomial_nb: return "multinomial_nb";
        case ClassifierKind::logistic: return "logistic";
        case ClassifierKind::voted_perceptron: return "voted_perceptron";
        case ClassifierKind::mlp: return "mlp";
        case ClassifierKind::rbf: return "rbf";
        case ClassifierKind::flda: return "flda";
        case ClassifierKind::one_nn: return "one_nn";
        case ClassifierKind::random_committee: return "random_committee";
        case ClassifierKind::random_subspace: return "random_subspace";
        case ClassifierKind::random_forest: return "random_forest";
        case ClassifierKind::decision_stump: return "decision_stump";
        case ClassifierKind::info_gain_tree: return "info_gain_tree";
    }
    return "unknown";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
    for (const ClassifierKind kind : kAllKinds) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw PreconditionError("unknown classifier kind '" + std::string(name) + "'");
}

std::span<const ClassifierKind> all_classifier_kinds() { return kAllKinds; }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    require(data_.size() == rows * cols, "matrix data length must equal rows*cols");
}

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) {
        cols_ = values.size();
    }
    require(values.size() == cols_, "row length mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

void TrainingSet::validate() const {
    if (features.rows() != labels.size()) {
        throw DataError("training set has " + std::to_string(features.rows()) + " rows but " +
                        std::to_string(labels.size()) + " labels");
    }
    if (features.cols() < 1) {
        throw DataError("training set needs at least one feature");
    }
    if (!feature_names.empty() && feature_names.size() != features.cols()) {
        throw DataError("feature name count does not match feature count");
    }
    if (labels.size() < 2) {
        throw DataError("training set needs at least two rows");
    }
    std::array<std::size_t, 2> counts{};
    for (const int y : labels) {
        if (y != 0 && y != 1) {
            throw DataError("labels must be 0 or 1");
        }
        ++counts[static_cast<std::size_t>(y)];
    }
    if (counts[0] == 0 || counts[1] == 0) {
        throw DataError("training set contains a single class");
    }
    for (const double v : features.values()) {
        if (!std::isfinite(v)) {
            throw DataError("training set contains a non-finite feature value");
        }
    }
}

Hyperparameters resolve_hyperparameters(const ClassifierSpec& spec) {
    const std::vector<HyperDef> defs = hyper_defs(spec.kind);
    Hyperparameters out;
    for (const HyperDef& d : defs) {
        out[d.name] = d.fallback;
    }
    for (const auto& [key, value] : spec.hyperparameters) {
        const auto it = std::find_if(defs.begin(), defs.end(), [&](const HyperDef& d) { return key == d.name; });
        if (it == defs.end()) {
            throw PreconditionError("unknown hyperparameter '" + key + "' for " + std::string(to_string(spec.kind)));
        }
        if (!std::isfinite(value) || value < it->min || value > it->max ||
            (it->integer && value != std::floor(value))) {
            throw PreconditionError("hyperparameter '" + key + "' out of range for " +
                                    std::string(to_string(spec.kind)));
        }
        out[key] = value;
    }
    return out;
}

Standardizer Standardizer::fit(const Matrix& features) {
    const std::size_t n = features.rows();
    const std::size_t m = features.cols();
    Standardizer s;
    s.mean.assign(m, 0.0);
    s.scale.assign(m, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += features(i, j);
        }
        const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = features(i, j) - mean;
            ss += d * d;
        }
        const double sd = n > 0 ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
        s.mean[j] = mean;
        s.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

void Standardizer::apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < in.size(); ++j) {
        out[j] = (in[j] - mean[j]) / scale[j];
    }
}

Matrix Standardizer::apply(const Matrix& features) const {
    Matrix out(features.rows(), features.cols());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        apply(features.row(i), out.row(i));
    }
    return out;
}

double detail::margin_scale(std::span<const double> margins) {
    if (margins.empty()) {
        return 1.0;
    }
    double mean = 0.0;
    for (const double v : margins) {
        mean += v;
    }
    mean /= static_cast<double>(margins.size());
    double ss = 0.0;
    for (const double v : margins) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(margins.size()));
    return sd > 1e-12 ? sd : 1.0;
}

ClassifierModel::ClassifierModel(ClassifierSpec spec, std::size_t feature_count, std::array<double, 2> class_prior,
                                 Learner learner)
    : state_(std::make_shared<const State>(
          State{std::move(spec), feature_count, class_prior, std::move(learner)})) {}

double ClassifierModel::predict_p1(std::span<const double> x) const {
    const double p1 = std::visit([&](const auto& learner) { return detail::predict_p1(learner, x); }, state_->learner);
    if (std::isnan(p1)) {
        return 0.5;
    }
    return std::clamp(p1, 0.0, 1.0);
}

Probability ClassifierModel::predict_proba(std::span<const double> x) const {
    require(x.size() == feature_count(), "feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                                             std::to_string(feature_count()));
    for (const double v : x) {
        require(std::isfinite(v), "feature vector contains a non-finite value");
    }
    const double p1 = predict_p1(x);
    return Probability{1.0 - p1, p1};
}

namespace {

int as_int(const Hyperparameters& h, const char* key) { return static_cast<int>(h.at(key)); }

}  // namespace

ClassifierModel fit(const ClassifierSpec& spec, const TrainingSet& data) {
    const Hyperparameters h = resolve_hyperparameters(spec);
    data.validate();
    const std::size_t n = data.size();
    const std::size_t m = data.feature_count();
    std::array<double, 2> prior{};
    for (const int y : data.labels) {
        prior[static_cast<std::size_t>(y)] += 1.0;
    }
    prior[0] /= static_cast<double>(n);
    prior[1] = 1.0 - prior[0];

    const auto tree_params = [&](std::size_t default_features) {
        detail::TreeParams p;
        p.max_depth = as_int(h, "max_depth");
        p.min_leaf = as_int(h, "min_leaf");
        const auto it = h.find("features_per_split");
        const std::size_t requested = it == h.end() ? 0 : static_cast<std::size_t>(it->second);
        p.features_per_split = requested == 0 ? default_features : std::min(requested, m);
        return p;
    };

    Learner learner = [&]() -> Learner {
        switch (spec.kind) {
            case ClassifierKind::gaussian_nb:
                return detail::fit_gaussian_nb(data);
            case ClassifierKind::multinomial_nb:
                return detail::fit_multinomial_nb(data, h.at("alpha"));
            case ClassifierKind::logistic:
                return detail::fit_logistic(data, h.at("learning_rate"), as_int(h, "epochs"));
            case ClassifierKind::voted_perceptron:
                return detail::fit_voted_perceptron(data, as_int(h, "epochs"), spec.seed);
            case ClassifierKind::mlp: {
                const std::size_t hidden = as_int(h, "hidden") == 0 ? m : static_cast<std::size_t>(as_int(h, "hidden"));
                return detail::fit_mlp(data, hidden, h.at("learning_rate"), as_int(h, "epochs"), spec.seed);
            }
            case ClassifierKind::rbf:
                return detail::fit_rbf(data, static_cast<std::size_t>(as_int(h, "centers")), h.at("ridge"), spec.seed);
            case ClassifierKind::flda:
                return detail::fit_flda(data, h.at("ridge"));
            case ClassifierKind::one_nn:
                return detail::fit_one_nn(data);
            case ClassifierKind::random_forest: {
                const auto sqrt_m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))));
                return detail::fit_random_forest(data, as_int(h, "trees"), tree_params(sqrt_m),
                                                 h.at("bootstrap") != 0.0, spec.seed, spec.parallel);
            }
            case ClassifierKind::random_committee: {
                const auto log_m = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(m)))) + 1;
                return detail::fit_random_committee(data, as_int(h, "trees"), tree_params(std::min(log_m, m)),
                                                    spec.seed);
            }
            case ClassifierKind::random_subspace:
                return detail::fit_random_subspace(data, as_int(h, "trees"), tree_params(m),
                                                   h.at("subspace_fraction"), spec.seed);
            case ClassifierKind::decision_stump:
                return detail::fit_decision_stump(data);
            case ClassifierKind::info_gain_tree: {
                std::vector<std::size_t> rows(n);
                for (std::size_t i = 0; i < n; ++i) {
                    rows[i] = i;
                }
                return detail::build_tree(data.features, data.labels, rows, tree_params(m), spec.seed);
            }
        }
        throw PreconditionError("unsupported classifier kind");
    }();
    return ClassifierModel(spec, m, prior, std::move(learner));
}

ClassifierModel incremental_update(const ClassifierModel& model, std::span<const double> x, int label) {
    require(model.kind() == ClassifierKind::gaussian_nb, "incremental updates require a gaussian_nb model, got " +
                                                             std::string(to_string(model.kind())));
    require(x.size() == model.feature_count(), "feature vector length mismatch");
    require(label == 0 || label == 1, "label must be 0 or 1");
    for (const double v : x) {
        if (!std::isfinite(v)) {
            throw DataError("non-finite feature value");
        }
    }
    GaussianNbModel updated = model.as<GaussianNbModel>();
    detail::update_gaussian_nb(updated, x, label);
    const double total = updated.count[0] + updated.count[1];
    const std::array<double, 2> prior{updated.count[0] / total, 1.0 - updated.count[0] / total};
    return ClassifierModel(model.spec(), model.feature_count(), prior, std::move(updated));
}

std::vector<double> gradient_of_loss(GradientKind kind, std::span<const double> params, const TrainingSet& batch,
                                     std::size_t hidden) {
    switch (kind) {
        case GradientKind::logistic:
            return logistic_loss_gradient(params, batch.features, batch.labels);
        case GradientKind::mlp:
            return mlp_loss_gradient(params, hidden, batch.features, batch.labels);
    }
    return {};
}

}  // namespace crowncount
