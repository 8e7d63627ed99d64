#include "crowncount/model_io.hpp"

#include <fstream>

namespace crowncount {

using nlohmann::json;

namespace {

constexpr const char* kModelFormat = "crowncount-model";

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from_json(const json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(), j.at("data").get<std::vector<double>>());
}

json scaler_to_json(const Standardizer& s) { return json{{"mean", s.mean}, {"scale", s.scale}}; }

Standardizer scaler_from_json(const json& j) {
    return Standardizer{j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
}

json tree_to_json(const DecisionTree& tree) {
    json feature = json::array();
    json threshold = json::array();
    json left = json::array();
    json right = json::array();
    json p1 = json::array();
    for (const TreeNode& n : tree.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        p1.push_back(n.p1);
    }
    return json{{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"p1", p1}};
}

DecisionTree tree_from_json(const json& j) {
    const auto feature = j.at("feature").get<std::vector<int>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<int>>();
    const auto right = j.at("right").get<std::vector<int>>();
    const auto p1 = j.at("p1").get<std::vector<double>>();
    const std::size_t n = feature.size();
    if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || p1.size() != n) {
        throw FormatError("inconsistent tree arrays");
    }
    DecisionTree tree;
    for (std::size_t i = 0; i < n; ++i) {
        if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                                left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n))) {
            throw FormatError("tree child index out of range");
        }
        tree.nodes.push_back(TreeNode{feature[i], threshold[i], left[i], right[i], p1[i]});
    }
    return tree;
}

template <class T>
std::array<T, 2> pair_from_json(const json& j) {
    const auto v = j.get<std::vector<T>>();
    if (v.size() != 2) {
        throw FormatError("expected a two-element array");
    }
    return {v[0], v[1]};
}

struct LearnerWriter {
    json operator()(const GaussianNbModel& m) const {
        return json{{"count", m.count}, {"mean", m.mean}, {"m2", m.m2}};
    }
    json operator()(const MultinomialNbModel& m) const {
        return json{{"log_prior", m.log_prior}, {"log_theta", m.log_theta}};
    }
    json operator()(const LogisticModel& m) const {
        return json{{"scaler", scaler_to_json(m.scaler)}, {"params", m.params}};
    }
    json operator()(const VotedPerceptronModel& m) const {
        return json{{"scaler", scaler_to_json(m.scaler)},
                    {"weights", matrix_to_json(m.weights)},
                    {"votes", m.votes},
                    {"margin_scale", m.margin_scale}};
    }
    json operator()(const MlpModel& m) const {
        return json{{"scaler", scaler_to_json(m.scaler)}, {"hidden", m.hidden}, {"params", m.params}};
    }
    json operator()(const RbfModel& m) const {
        return json{{"scaler", scaler_to_json(m.scaler)},
                    {"centers", matrix_to_json(m.centers)},
                    {"width", m.width},
                    {"output", m.output}};
    }
    json operator()(const FldaModel& m) const {
        return json{{"direction", m.direction}, {"offset", m.offset}, {"margin_scale", m.margin_scale}};
    }
    json operator()(const NearestNeighborModel& m) const {
        return json{{"lo", m.lo}, {"range", m.range}, {"points", matrix_to_json(m.points)}, {"labels", m.labels}};
    }
    json operator()(const TreeEnsembleModel& m) const {
        json trees = json::array();
        for (const DecisionTree& t : m.trees) {
            trees.push_back(tree_to_json(t));
        }
        return json{{"trees", trees}, {"feature_subsets", m.feature_subsets}};
    }
    json operator()(const DecisionStumpModel& m) const {
        return json{{"feature", m.feature}, {"threshold", m.threshold}, {"p1_left", m.p1_left}, {"p1_right", m.p1_right}};
    }
    json operator()(const DecisionTree& m) const { return json{{"tree", tree_to_json(m)}}; }
};

Learner learner_from_json(ClassifierKind kind, const json& p) {
    switch (kind) {
        case ClassifierKind::gaussian_nb: {
            GaussianNbModel m;
            m.count = pair_from_json<double>(p.at("count"));
            m.mean = pair_from_json<std::vector<double>>(p.at("mean"));
            m.m2 = pair_from_json<std::vector<double>>(p.at("m2"));
            return m;
        }
        case ClassifierKind::multinomial_nb: {
            MultinomialNbModel m;
            m.log_prior = pair_from_json<double>(p.at("log_prior"));
            m.log_theta = pair_from_json<std::vector<double>>(p.at("log_theta"));
            return m;
        }
        case ClassifierKind::logistic:
            return LogisticModel{scaler_from_json(p.at("scaler")), p.at("params").get<std::vector<double>>()};
        case ClassifierKind::voted_perceptron:
            return VotedPerceptronModel{scaler_from_json(p.at("scaler")), matrix_from_json(p.at("weights")),
                                        p.at("votes").get<std::vector<double>>(), p.at("margin_scale").get<double>()};
        case ClassifierKind::mlp:
            return MlpModel{scaler_from_json(p.at("scaler")), p.at("hidden").get<std::size_t>(),
                            p.at("params").get<std::vector<double>>()};
        case ClassifierKind::rbf:
            return RbfModel{scaler_from_json(p.at("scaler")), matrix_from_json(p.at("centers")),
                            p.at("width").get<double>(), p.at("output").get<std::vector<double>>()};
        case ClassifierKind::flda:
            return FldaModel{p.at("direction").get<std::vector<double>>(), p.at("offset").get<double>(),
                             p.at("margin_scale").get<double>()};
        case ClassifierKind::one_nn:
            return NearestNeighborModel{p.at("lo").get<std::vector<double>>(), p.at("range").get<std::vector<double>>(),
                                        matrix_from_json(p.at("points")), p.at("labels").get<std::vector<int>>()};
        case ClassifierKind::random_committee:
        case ClassifierKind::random_subspace:
        case ClassifierKind::random_forest: {
            TreeEnsembleModel m;
            for (const json& t : p.at("trees")) {
                m.trees.push_back(tree_from_json(t));
            }
            if (m.trees.empty()) {
                throw FormatError("ensemble without trees");
            }
            m.feature_subsets = p.at("feature_subsets").get<std::vector<std::vector<int>>>();
            return m;
        }
        case ClassifierKind::decision_stump:
            return DecisionStumpModel{p.at("feature").get<int>(), p.at("threshold").get<double>(),
                                      p.at("p1_left").get<double>(), p.at("p1_right").get<double>()};
        case ClassifierKind::info_gain_tree:
            return tree_from_json(p.at("tree"));
    }
    throw FormatError("unsupported classifier kind");
}

}  // namespace

json spec_to_json(const ClassifierSpec& spec) {
    return json{{"kind", std::string(to_string(spec.kind))},
                {"hyperparameters", spec.hyperparameters},
                {"seed", spec.seed},
                {"parallel", spec.parallel}};
}

ClassifierSpec spec_from_json(const json& document) {
    if (!document.is_object()) {
        throw FormatError("classifier spec must be a JSON object");
    }
    ClassifierSpec spec;
    try {
        for (const auto& [key, value] : document.items()) {
            if (key == "kind") {
                spec.kind = parse_classifier_kind(value.get<std::string>());
            } else if (key == "hyperparameters") {
                spec.hyperparameters = value.get<Hyperparameters>();
            } else if (key == "seed") {
                spec.seed = value.get<std::uint64_t>();
            } else if (key == "parallel") {
                spec.parallel = value.get<bool>();
            } else {
                throw FormatError("unknown classifier spec key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed classifier spec: ") + e.what());
    } catch (const PreconditionError& e) {
        throw FormatError(e.what());
    }
    if (!document.contains("kind")) {
        throw FormatError("classifier spec needs a 'kind'");
    }
    return spec;
}

json model_to_json(const ClassifierModel& model) {
    return json{{"format", kModelFormat},
                {"version", kModelFormatVersion},
                {"spec", spec_to_json(model.spec())},
                {"feature_count", model.feature_count()},
                {"class_prior", model.class_prior()},
                {"params", std::visit(LearnerWriter{}, model.learner())}};
}

ClassifierModel model_from_json(const json& document) {
    try {
        if (document.at("format").get<std::string>() != kModelFormat) {
            throw FormatError("not a crowncount model document");
        }
        const int version = document.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw FormatError("unsupported model version " + std::to_string(version));
        }
        ClassifierSpec spec = spec_from_json(document.at("spec"));
        const auto feature_count = document.at("feature_count").get<std::size_t>();
        const auto prior = pair_from_json<double>(document.at("class_prior"));
        Learner learner = learner_from_json(spec.kind, document.at("params"));
        return ClassifierModel(std::move(spec), feature_count, prior, std::move(learner));
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed model document: ") + e.what());
    } catch (const PreconditionError& e) {
        throw FormatError(std::string("malformed model document: ") + e.what());
    }
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << model_to_json(model).dump() << '\n';
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

ClassifierModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    json document;
    try {
        document = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return model_from_json(document);
}

}  // namespace crowncount
