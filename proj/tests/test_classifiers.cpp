#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "crowncount/classifiers.hpp"
#include "crowncount/model_io.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace crowncount;

namespace {

TrainingSet make_set(std::size_t m, const std::vector<std::vector<double>>& rows, std::vector<int> labels) {
    TrainingSet set;
    set.features = Matrix(0, m);
    for (const auto& r : rows) {
        set.features.append_row(r);
    }
    set.labels = std::move(labels);
    for (std::size_t f = 0; f < m; ++f) {
        set.feature_names.push_back("f" + std::to_string(f));
    }
    return set;
}

TrainingSet one_d_example() {
    return make_set(1, {{0.0}, {0.1}, {1.0}, {1.1}}, {0, 0, 1, 1});
}

// 200 points in the unit square, label set by x0 with a gap around 0.5.
TrainingSet axis_separable(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        const int label = i % 2;
        const double x0 = label == 1 ? 0.6 + 0.4 * u(rng) : 0.4 * u(rng);
        rows.push_back({x0, u(rng)});
        labels.push_back(label);
    }
    return make_set(2, rows, labels);
}

// Non-negative counts: class 0 is rich in the first term, class 1 in the second.
TrainingSet count_like(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> hi(6, 12);
    std::uniform_int_distribution<int> lo(0, 2);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        const int label = i % 2;
        const double a = label == 0 ? hi(rng) : lo(rng);
        const double b = label == 0 ? lo(rng) : hi(rng);
        rows.push_back({a, b});
        labels.push_back(label);
    }
    return make_set(2, rows, labels);
}

double accuracy(const ClassifierModel& model, const TrainingSet& data) {
    std::size_t right = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        right += model.predict(data.features.row(i)) == data.labels[i];
    }
    return static_cast<double>(right) / static_cast<double>(data.size());
}

ClassifierSpec spec_of(ClassifierKind kind, std::uint64_t seed = 17, Hyperparameters h = {}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.seed = seed;
    spec.hyperparameters = std::move(h);
    return spec;
}

// Smaller ensembles keep the exhaustive per-kind loops quick.
ClassifierSpec quick_spec(ClassifierKind kind, std::uint64_t seed = 17) {
    switch (kind) {
        case ClassifierKind::random_forest:
        case ClassifierKind::random_committee:
        case ClassifierKind::random_subspace:
            return spec_of(kind, seed, {{"trees", 15}});
        case ClassifierKind::logistic:
        case ClassifierKind::mlp:
            return spec_of(kind, seed, {{"epochs", 200}});
        default:
            return spec_of(kind, seed);
    }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("kind names round trip") {
    CHECK(all_classifier_kinds().size() == 13);
    for (const ClassifierKind kind : all_classifier_kinds()) {
        CHECK(parse_classifier_kind(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(parse_classifier_kind("smo"), PreconditionError);
}

TEST_CASE("training set validation") {
    CHECK_THROWS_AS(fit(spec_of(ClassifierKind::gaussian_nb), make_set(1, {{0.0}, {1.0}}, {1, 1})), DataError);
    CHECK_THROWS_AS(fit(spec_of(ClassifierKind::gaussian_nb), make_set(1, {{0.0}}, {1})), DataError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit(spec_of(ClassifierKind::logistic), make_set(1, {{0.0}, {nan}}, {0, 1})), DataError);
    CHECK_THROWS_AS(fit(spec_of(ClassifierKind::multinomial_nb), make_set(1, {{0.0}, {-1.0}}, {0, 1})), DataError);
}

TEST_CASE("hyperparameter resolution applies defaults and ranges") {
    const Hyperparameters forest = resolve_hyperparameters(spec_of(ClassifierKind::random_forest));
    CHECK(forest.at("trees") == 100);
    CHECK(forest.at("max_depth") == 0);
    CHECK(forest.at("min_leaf") == 1);
    CHECK(resolve_hyperparameters(spec_of(ClassifierKind::random_subspace)).at("subspace_fraction") == 0.5);
    CHECK(resolve_hyperparameters(spec_of(ClassifierKind::logistic)).at("epochs") == 500);
    CHECK(resolve_hyperparameters(spec_of(ClassifierKind::rbf)).at("centers") == 10);
    CHECK(resolve_hyperparameters(spec_of(ClassifierKind::voted_perceptron)).at("epochs") == 10);
    CHECK(resolve_hyperparameters(spec_of(ClassifierKind::multinomial_nb)).at("alpha") == 1.0);

    CHECK_THROWS_AS(resolve_hyperparameters(spec_of(ClassifierKind::random_forest, 1, {{"trees", 0}})),
                    PreconditionError);
    CHECK_THROWS_AS(resolve_hyperparameters(spec_of(ClassifierKind::logistic, 1, {{"epochs", 1.5}})),
                    PreconditionError);
    CHECK_THROWS_AS(resolve_hyperparameters(spec_of(ClassifierKind::gaussian_nb, 1, {{"alpha", 1}})),
                    PreconditionError);
    CHECK_THROWS_AS(resolve_hyperparameters(spec_of(ClassifierKind::random_subspace, 1, {{"subspace_fraction", 1.5}})),
                    PreconditionError);
}

TEST_CASE("gaussian NB matches the closed-form posterior") {
    const ClassifierModel model = fit(spec_of(ClassifierKind::gaussian_nb), one_d_example());
    const std::vector<double> q{0.05};
    CHECK(model.predict(q) == 0);

    // Both classes: variance 0.0025, means 0.05 and 1.05, equal priors.
    for (const double x : {0.3, 0.5, 0.55, 0.6, 0.8}) {
        const double var = 0.0025;
        const double l0 = -(x - 0.05) * (x - 0.05) / (2 * var);
        const double l1 = -(x - 1.05) * (x - 1.05) / (2 * var);
        const double p1 = 1.0 / (1.0 + std::exp(l0 - l1));
        const std::vector<double> v{x};
        CHECK(model.predict_proba(v).p1 == doctest::Approx(p1).epsilon(1e-9).scale(0.0));
    }
    CHECK(model.as<GaussianNbModel>().variance(0, 0) == doctest::Approx(0.0025));
}

TEST_CASE("gaussian NB variance floor avoids division by zero") {
    const ClassifierModel model = fit(spec_of(ClassifierKind::gaussian_nb), make_set(1, {{1.0}, {1.0}, {2.0}, {2.0}}, {0, 0, 1, 1}));
    CHECK(model.as<GaussianNbModel>().variance(0, 0) == 1e-9);
    const std::vector<double> q{1.2};
    const Probability p = model.predict_proba(q);
    CHECK(std::isfinite(p.p1));
    CHECK(p.p1 < 0.5);
}

TEST_CASE("decision stump splits the 1-D example") {
    const TrainingSet data = one_d_example();
    const ClassifierModel model = fit(spec_of(ClassifierKind::decision_stump), data);
    const auto& stump = model.as<DecisionStumpModel>();
    CHECK(stump.threshold > 0.1);
    CHECK(stump.threshold < 1.0);
    CHECK(accuracy(model, data) == 1.0);
}

TEST_CASE("1-NN returns the label of an exact training vector") {
    const TrainingSet data = axis_separable(4);
    const ClassifierModel model = fit(spec_of(ClassifierKind::one_nn), data);
    for (std::size_t i = 0; i < data.size(); i += 7) {
        const Probability p = model.predict_proba(data.features.row(i));
        CHECK((data.labels[i] == 1 ? p.p1 : p.p0) == 1.0);
    }
    // ties go to the first stored instance
    const ClassifierModel tie = fit(spec_of(ClassifierKind::one_nn), make_set(1, {{0.0}, {2.0}, {1.0}, {3.0}}, {1, 0, 0, 1}));
    const std::vector<double> mid{0.5};
    CHECK(tie.predict(mid) == 1);
}

TEST_CASE("FLDA is undecided at the midpoint of symmetric clouds") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    const std::vector<std::pair<double, double>> offsets{{0.3, 0.1}, {-0.2, 0.4}, {0.1, -0.5}, {-0.4, -0.2}, {0.0, 0.2}};
    for (const auto& [dx, dy] : offsets) {
        rows.push_back({-2.0 + dx, 1.0 + dy});
        labels.push_back(0);
        rows.push_back({2.0 - dx, -1.0 - dy});
        labels.push_back(1);
    }
    const ClassifierModel model = fit(spec_of(ClassifierKind::flda), make_set(2, rows, labels));
    const std::vector<double> mid{0.0, 0.0};
    CHECK(model.predict_proba(mid).p1 == doctest::Approx(0.5).epsilon(1e-6));
    const std::vector<double> far{3.0, -1.0};
    CHECK(model.predict_proba(far).p1 > 0.5);
}

TEST_CASE("logistic regression separates the 1-D example") {
    const ClassifierModel model = fit(spec_of(ClassifierKind::logistic), one_d_example());
    const std::vector<double> q{1.05};
    CHECK(model.predict_proba(q).p1 > 0.9);
    const std::vector<double> low{0.05};
    CHECK(model.predict_proba(low).p1 < 0.1);
}

TEST_CASE("kmeans with k=1 and k=n") {
    const Matrix points(5, 2, std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 9, 11});
    const Matrix one = kmeans(points, 1, 3);
    CHECK(one(0, 0) == doctest::Approx(4.2));
    CHECK(one(0, 1) == doctest::Approx(5.4));

    const Matrix all = kmeans(points, 5, 3);
    std::vector<std::pair<double, double>> got, want;
    for (std::size_t i = 0; i < 5; ++i) {
        got.emplace_back(all(i, 0), all(i, 1));
        want.emplace_back(points(i, 0), points(i, 1));
    }
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);

    CHECK_THROWS_AS(kmeans(points, 6, 3), PreconditionError);
}

TEST_CASE("kmeans with k=2 finds the optimal two-partition") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> noise(0.0, 0.3);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 10 + trial % 3;
        Matrix points(0, 2);
        for (int i = 0; i < n; ++i) {
            const double cx = i % 2 == 0 ? 0.0 : 5.0;
            const std::vector<double> p{cx + noise(rng), cx / 2 + noise(rng)};
            points.append_row(p);
        }
        // exhaustive search over all non-trivial 2-partitions
        double best = std::numeric_limits<double>::infinity();
        std::array<std::array<double, 2>, 2> best_centers{};
        for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
            std::array<std::array<double, 2>, 2> sum{};
            std::array<int, 2> count{};
            for (int i = 0; i < n; ++i) {
                const int g = (mask >> i) & 1u;
                sum[g][0] += points(i, 0);
                sum[g][1] += points(i, 1);
                ++count[g];
            }
            double sse = 0.0;
            for (int i = 0; i < n; ++i) {
                const int g = (mask >> i) & 1u;
                const double dx = points(i, 0) - sum[g][0] / count[g];
                const double dy = points(i, 1) - sum[g][1] / count[g];
                sse += dx * dx + dy * dy;
            }
            if (sse < best) {
                best = sse;
                for (int g = 0; g < 2; ++g) {
                    best_centers[g] = {sum[g][0] / count[g], sum[g][1] / count[g]};
                }
            }
        }
        const Matrix centers = kmeans(points, 2, 100 + trial);
        std::vector<std::array<double, 2>> got{{centers(0, 0), centers(0, 1)}, {centers(1, 0), centers(1, 1)}};
        std::vector<std::array<double, 2>> want{best_centers[0], best_centers[1]};
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        for (int g = 0; g < 2; ++g) {
            CHECK(got[g][0] == doctest::Approx(want[g][0]).epsilon(1e-9));
            CHECK(got[g][1] == doctest::Approx(want[g][1]).epsilon(1e-9));
        }
    }
}

TEST_CASE("zero-weight logistic on a symmetric balanced batch has zero bias gradient") {
    const TrainingSet batch = make_set(2, {{1.0, -2.0}, {-1.0, 2.0}, {3.0, 0.5}, {-3.0, -0.5}}, {0, 1, 1, 0});
    const std::vector<double> params(3, 0.0);
    const std::vector<double> g = gradient_of_loss(GradientKind::logistic, params, batch);
    CHECK(g.size() == 3);
    CHECK(g[2] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double h = 1e-5;
    for (int trial = 0; trial < 4; ++trial) {
        const std::size_t m = 3;
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (int i = 0; i < 8; ++i) {
            rows.push_back({normal(rng), normal(rng), normal(rng)});
            labels.push_back(i % 2);
        }
        const TrainingSet batch = make_set(m, rows, labels);

        std::vector<double> lp(m + 1);
        for (double& v : lp) v = 0.5 * normal(rng);
        const std::vector<double> lg = gradient_of_loss(GradientKind::logistic, lp, batch);
        for (std::size_t k = 0; k < lp.size(); ++k) {
            std::vector<double> a = lp, b = lp;
            a[k] += h;
            b[k] -= h;
            const double fd = (logistic_loss(a, batch.features, batch.labels) -
                               logistic_loss(b, batch.features, batch.labels)) / (2 * h);
            CHECK(lg[k] == doctest::Approx(fd).epsilon(1e-4));
        }

        const std::size_t hidden = 4;
        std::vector<double> mp(mlp_parameter_count(m, hidden));
        for (double& v : mp) v = 0.5 * normal(rng);
        const std::vector<double> mg = gradient_of_loss(GradientKind::mlp, mp, batch, hidden);
        REQUIRE(mg.size() == mp.size());
        for (std::size_t k = 0; k < mp.size(); ++k) {
            std::vector<double> a = mp, b = mp;
            a[k] += h;
            b[k] -= h;
            const double fd = (mlp_loss(a, hidden, batch.features, batch.labels) -
                               mlp_loss(b, hidden, batch.features, batch.labels)) / (2 * h);
            CHECK(mg[k] == doctest::Approx(fd).epsilon(1e-4).scale(1e-6));
        }
    }
}

TEST_CASE("mlp with zero input weights reduces to logistic on constant activations") {
    const std::size_t m = 2;
    const std::size_t hidden = 3;
    const TrainingSet batch = make_set(m, {{0.5, -1.0}, {2.0, 0.3}, {-0.7, 0.9}, {1.1, 1.4}, {-1.5, -0.2}}, {1, 0, 1, 0, 1});
    std::vector<double> params(mlp_parameter_count(m, hidden), 0.0);
    const std::vector<double> b1{0.4, -0.8, 1.3};
    const std::vector<double> w2{0.7, -0.2, 0.5};
    const double b2 = -0.1;
    for (std::size_t j = 0; j < hidden; ++j) {
        params[hidden * m + j] = b1[j];
        params[hidden * m + hidden + j] = w2[j];
    }
    params.back() = b2;
    const std::vector<double> g = gradient_of_loss(GradientKind::mlp, params, batch, hidden);

    // the same output layer seen as a logistic model over the hidden activations
    std::vector<std::vector<double>> act_rows(batch.size(), std::vector<double>(hidden));
    for (auto& r : act_rows) {
        for (std::size_t j = 0; j < hidden; ++j) {
            r[j] = sigmoid(b1[j]);
        }
    }
    const TrainingSet acts = make_set(hidden, act_rows, batch.labels);
    std::vector<double> lp(w2);
    lp.push_back(b2);
    const std::vector<double> lg = gradient_of_loss(GradientKind::logistic, lp, acts);
    for (std::size_t j = 0; j < hidden; ++j) {
        CHECK(g[hidden * m + hidden + j] == doctest::Approx(lg[j]).epsilon(1e-12));
    }
    CHECK(g.back() == doctest::Approx(lg.back()).epsilon(1e-12));

    // input weights still get a gradient
    double input_norm = 0.0;
    for (std::size_t k = 0; k < hidden * m; ++k) {
        input_norm += std::abs(g[k]);
    }
    CHECK(input_norm > 0.0);
}

TEST_CASE("incremental gaussian NB updates equal the batch fit") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2;
        rows.push_back({normal(rng) + 3 * label, 2 * normal(rng)});
        labels.push_back(label);
    }
    const ClassifierModel batch = fit(spec_of(ClassifierKind::gaussian_nb), make_set(2, rows, labels));

    ClassifierModel running = fit(spec_of(ClassifierKind::gaussian_nb),
                                  make_set(2, {rows[0], rows[1]}, {labels[0], labels[1]}));
    for (std::size_t i = 2; i < rows.size(); ++i) {
        running = incremental_update(running, rows[i], labels[i]);
    }
    const auto& a = batch.as<GaussianNbModel>();
    const auto& b = running.as<GaussianNbModel>();
    for (int c = 0; c < 2; ++c) {
        CHECK(a.count[c] == b.count[c]);
        for (std::size_t f = 0; f < 2; ++f) {
            CHECK(a.mean[c][f] == doctest::Approx(b.mean[c][f]).epsilon(1e-9));
            CHECK(a.variance(c, f) == doctest::Approx(b.variance(c, f)).epsilon(1e-9));
        }
    }
    CHECK(batch.class_prior()[1] == doctest::Approx(running.class_prior()[1]).epsilon(1e-12));
}

TEST_CASE("duplicating a point near the class mean does not raise its variance") {
    const std::vector<std::vector<double>> rows{{0.0}, {1.0}, {2.0}, {10.0}, {12.0}};
    const std::vector<int> labels{0, 0, 0, 1, 1};
    const ClassifierModel model = fit(spec_of(ClassifierKind::gaussian_nb), make_set(1, rows, labels));
    const ClassifierModel updated = incremental_update(model, rows[1], 0);

    // recompute the batch statistics with the duplicate included
    const std::vector<double> class0{0.0, 1.0, 2.0, 1.0};
    double mean = 0.0;
    for (const double v : class0) mean += v / 4.0;
    double var = 0.0;
    for (const double v : class0) var += (v - mean) * (v - mean) / 4.0;
    CHECK(updated.as<GaussianNbModel>().variance(0, 0) == doctest::Approx(var));
    CHECK(updated.as<GaussianNbModel>().variance(0, 0) <= model.as<GaussianNbModel>().variance(0, 0));
    CHECK(updated.as<GaussianNbModel>().variance(1, 0) == model.as<GaussianNbModel>().variance(1, 0));
}

TEST_CASE("incremental update rejects other kinds") {
    const ClassifierModel forest = fit(quick_spec(ClassifierKind::random_forest), one_d_example());
    const std::vector<double> x{0.5};
    CHECK_THROWS_AS(incremental_update(forest, x, 1), PreconditionError);
}

TEST_CASE("every kind separates an axis-aligned 2-D set") {
    const TrainingSet data = axis_separable(31);
    const TrainingSet counts = count_like(32);
    for (const ClassifierKind kind : all_classifier_kinds()) {
        CAPTURE(to_string(kind));
        const TrainingSet& set = kind == ClassifierKind::multinomial_nb ? counts : data;
        const ClassifierModel model = fit(spec_of(kind), set);
        CHECK(accuracy(model, set) >= 0.95);
    }
}

TEST_CASE("predictions are points of the probability simplex") {
    const TrainingSet data = axis_separable(41);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> wide(-50.0, 50.0);
    for (const ClassifierKind kind : all_classifier_kinds()) {
        CAPTURE(to_string(kind));
        const ClassifierModel model = fit(quick_spec(kind), kind == ClassifierKind::multinomial_nb ? count_like(3) : data);
        for (int i = 0; i < 200; ++i) {
            std::vector<double> x{wide(rng), wide(rng)};
            if (kind == ClassifierKind::multinomial_nb) {
                x = {std::abs(x[0]), std::abs(x[1])};
            }
            const Probability p = model.predict_proba(x);
            CHECK(p.p0 >= 0.0);
            CHECK(p.p1 >= 0.0);
            CHECK(p.p0 + p.p1 == doctest::Approx(1.0).epsilon(1e-9));
        }
        const std::vector<double> short_vec{1.0};
        CHECK_THROWS_AS(model.predict_proba(short_vec), PreconditionError);
    }
}

TEST_CASE("fitting is deterministic for a fixed seed") {
    const TrainingSet data = axis_separable(51);
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const ClassifierKind kind : all_classifier_kinds()) {
        CAPTURE(to_string(kind));
        const TrainingSet& set = kind == ClassifierKind::multinomial_nb ? count_like(5) : data;
        const ClassifierModel a = fit(quick_spec(kind, 9), set);
        const ClassifierModel b = fit(quick_spec(kind, 9), set);
        for (int i = 0; i < 50; ++i) {
            const std::vector<double> x{u(rng) * 10, u(rng) * 10};
            CHECK(a.predict_p1(x) == b.predict_p1(x));
        }
    }
}

TEST_CASE("parallel random forest is bit-identical to the sequential one") {
    const TrainingSet data = axis_separable(61);
    ClassifierSpec seq = spec_of(ClassifierKind::random_forest, 77, {{"trees", 40}});
    ClassifierSpec par = seq;
    par.parallel = true;
    const ClassifierModel a = fit(seq, data);
    const ClassifierModel b = fit(par, data);
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (int i = 0; i < 500; ++i) {
        const std::vector<double> x{u(rng), u(rng)};
        CHECK(a.predict_p1(x) == b.predict_p1(x));
    }
}

TEST_CASE("a one-tree forest without sampling is the information-gain tree") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 120; ++i) {
        const std::vector<double> x{normal(rng), normal(rng), normal(rng)};
        rows.push_back(x);
        labels.push_back(x[0] + 0.5 * x[1] * x[2] + 0.3 * normal(rng) > 0 ? 1 : 0);
    }
    const TrainingSet data = make_set(3, rows, labels);
    const ClassifierModel forest = fit(
        spec_of(ClassifierKind::random_forest, 5, {{"trees", 1}, {"bootstrap", 0}, {"features_per_split", 3}}), data);
    const ClassifierModel tree = fit(spec_of(ClassifierKind::info_gain_tree, 5), data);
    for (int i = 0; i < 300; ++i) {
        const std::vector<double> x{normal(rng), normal(rng), normal(rng)};
        CHECK(forest.predict_p1(x) == tree.predict_p1(x));
    }
}

TEST_CASE("tree depth limits are honored") {
    const TrainingSet data = axis_separable(81);
    const ClassifierModel tree = fit(spec_of(ClassifierKind::info_gain_tree, 1, {{"max_depth", 1}}), data);
    CHECK(tree.as<DecisionTree>().depth() <= 1);
}

TEST_CASE("models survive a JSON round trip") {
    testing::TempDir dir;
    const TrainingSet data = axis_separable(91);
    std::mt19937_64 rng(92);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (const ClassifierKind kind : all_classifier_kinds()) {
        CAPTURE(to_string(kind));
        const TrainingSet set = kind == ClassifierKind::multinomial_nb ? count_like(7) : data;
        const ClassifierModel model = fit(quick_spec(kind), set);
        save_model(model, dir / "m.json");
        const ClassifierModel back = load_model(dir / "m.json");
        CHECK(back.kind() == kind);
        CHECK(back.feature_count() == 2);
        for (int i = 0; i < 50; ++i) {
            const std::vector<double> x{std::abs(u(rng)) * 5, std::abs(u(rng)) * 5};
            CHECK(back.predict_p1(x) == model.predict_p1(x));
        }
    }
}

TEST_CASE("model documents with an unknown version are rejected") {
    const ClassifierModel model = fit(spec_of(ClassifierKind::gaussian_nb), one_d_example());
    nlohmann::json doc = model_to_json(model);
    doc["version"] = kModelFormatVersion + 1;
    CHECK_THROWS_AS(model_from_json(doc), FormatError);
    nlohmann::json broken = model_to_json(model);
    broken.erase("params");
    CHECK_THROWS_AS(model_from_json(broken), FormatError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), IoError);
}
