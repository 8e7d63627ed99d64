#include <algorithm>
#include <cmath>
#include <sstream>

#include "crowncount/bench.hpp"
#include "doctest.h"

using namespace crowncount;

namespace {

struct PublishedRow {
    const char* name;
    long error;
    double pct;
};

// Counting errors against a reference of 412 seedlings, as published.
constexpr PublishedRow kPublished[] = {
    {"Decision Stump", -12, 2.9},
    {"RBFClassifier", 15, 3.6},
    {"FastRandomForest", 21, 5.1},
    {"RandomCommittee", 57, 13.8},
    {"LibLINEAR", 63, 15.3},
    {"RandomForest", 66, 16.0},
    {"RandomSubSpace", 107, 26.0},
    {"Naive Bayes", 135, 32.8},
    {"Naive Bayes Updatable", 135, 32.8},
    {"SMO", 143, 34.7},
    {"MultilayerPerceptron", 151, 36.7},
    {"FLDA", 156, 37.9},
    {"IB1", 166, 40.3},
    {"PART", 170, 41.3},
    {"SimpleLogistic", 177, 43.0},
    {"LMT", 178, 43.2},
    {"VotedPerceptron", 188, 45.6},
    {"Logistic", 200, 48.5},
    {"J48", 294, 71.4},
    {"Naive Bayes Multinomial", 430, 104.4},
};

PipelineConfig scene_config() {
    PipelineConfig config;
    config.seed = 21;
    config.min_radius = 10.0;
    config.max_per_class = 800;
    config.synth.rows = 5;
    config.synth.cols = 5;
    config.synth.failure_prob = 0.0;
    config.synth.seed = 4;
    config.constraints.radius_min = 8;
    config.constraints.radius_max = 30;
    config.constraints.min_spacing = 20;
    config.constraints.row_tolerance = 6;
    config.constraints.neighbor_k = 6;
    return config;
}

ClassifierSpec forest(int trees) {
    ClassifierSpec spec;
    spec.kind = ClassifierKind::random_forest;
    spec.seed = 3;
    spec.hyperparameters = {{"trees", trees}};
    return spec;
}

}  // namespace

TEST_CASE("signed error metrics reproduce every published row") {
    for (const PublishedRow& row : kPublished) {
        CAPTURE(row.name);
        const ErrorMetrics m = signed_error_metrics(412 + row.error, 412);
        CHECK(m.signed_error == row.error);
        CHECK(std::abs(m.error_pct - row.pct) <= 0.15);
    }
}

TEST_CASE("signed error metric examples") {
    const ErrorMetrics under = signed_error_metrics(400, 412);
    CHECK(under.signed_error == -12);
    CHECK(under.error_pct == doctest::Approx(2.9).epsilon(0.01));
    const ErrorMetrics over = signed_error_metrics(427, 412);
    CHECK(over.signed_error == 15);
    CHECK(over.error_pct == doctest::Approx(3.6).epsilon(0.01));
    const ErrorMetrics exact = signed_error_metrics(412, 412);
    CHECK(exact.signed_error == 0);
    CHECK(exact.error_pct == 0.0);
    CHECK_THROWS_AS(signed_error_metrics(3, 0), PreconditionError);
}

TEST_CASE("format_signed") {
    CHECK(format_signed(21) == "+21");
    CHECK(format_signed(-12) == "-12");
    CHECK(format_signed(0) == "0");
}

TEST_CASE("classifier labels") {
    ClassifierSpec spec = forest(3);
    CHECK(classifier_label(spec) == "random_forest");
    spec.parallel = true;
    CHECK(classifier_label(spec) == "random_forest[parallel]");
}

TEST_CASE("rows sort by error, then name, failures last") {
    std::vector<BenchRow> rows(4);
    rows[0].classifier = "b";
    rows[0].error_pct = 3.0;
    rows[1].classifier = "z";
    rows[1].failed = true;
    rows[2].classifier = "c";
    rows[2].error_pct = 1.0;
    rows[3].classifier = "a";
    rows[3].error_pct = 3.0;
    sort_rows(rows);
    CHECK(rows[0].classifier == "c");
    CHECK(rows[1].classifier == "a");
    CHECK(rows[2].classifier == "b");
    CHECK(rows[3].classifier == "z");
}

TEST_CASE("end to end on a 5x5 grid") {
    const PipelineConfig config = scene_config();
    const SyntheticScene scene = generate(config.synth);
    REQUIRE(scene.truth.count() == 25);

    ClassifierSpec nb;
    nb.kind = ClassifierKind::gaussian_nb;
    const std::vector<ClassifierSpec> specs{forest(20), nb};
    const BenchReport report = run_bench(scene.image, scene.annotation, scene.truth, specs, config);
    CHECK(report.truth == 25);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].error_pct <= report.rows[1].error_pct);
    CHECK(report.fingerprint.size() == 16);

    for (const BenchRow& row : report.rows) {
        CAPTURE(row.classifier);
        CHECK_FALSE(row.failed);
        CHECK(row.train_s >= 0.0);
        CHECK(row.segment_s >= 0.0);
        CHECK(std::abs(row.total_s - (row.train_s + row.segment_s)) <= 1e-3);
        REQUIRE(row.filtered_count.has_value());
        CHECK(*row.filtered_count <= row.count);
    }
    const auto it = std::find_if(report.rows.begin(), report.rows.end(),
                                 [](const BenchRow& r) { return r.classifier == "random_forest"; });
    REQUIRE(it != report.rows.end());
    CHECK(it->error_pct <= 4.0);

    // reproducible apart from timings
    const BenchReport again = run_bench(scene.image, scene.annotation, scene.truth, specs, config);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(again.rows[i].classifier == report.rows[i].classifier);
        CHECK(again.rows[i].count == report.rows[i].count);
        CHECK(again.rows[i].filtered_count == report.rows[i].filtered_count);
    }
}

TEST_CASE("a failing spec becomes a failed row") {
    PipelineConfig config = scene_config();
    config.apply_filter = false;
    const SyntheticScene scene = generate(config.synth);
    ClassifierSpec broken = forest(5);
    broken.hyperparameters["trees"] = -3;
    const std::vector<ClassifierSpec> specs{broken, forest(5)};
    const BenchReport report = run_bench(scene.image, scene.annotation, scene.truth, specs, config);
    REQUIRE(report.rows.size() == 2);
    CHECK_FALSE(report.rows[0].failed);
    CHECK(report.rows[0].count > 0);
    CHECK_FALSE(report.rows[0].filtered_count.has_value());
    CHECK(report.rows[1].failed);
    CHECK(report.rows[1].count == -1);
    CHECK_FALSE(report.rows[1].failure.empty());

    std::ostringstream csv;
    write_report_csv(csv, report);
    std::istringstream lines(csv.str());
    std::string header, first, second;
    std::getline(lines, header);
    std::getline(lines, first);
    std::getline(lines, second);
    CHECK(header ==
          "classifier,train_s,segment_s,total_s,count,signed_error,error_pct,filtered_count,"
          "filtered_signed_error,filtered_error_pct,truth,failure");
    CHECK(first.rfind("random_forest,", 0) == 0);
    CHECK(second.rfind("random_forest,,,,-1,", 0) == 0);

    const std::string table = format_report_table(report);
    CHECK(table.find("Ground truth: " + std::to_string(report.truth) + " trees") != std::string::npos);
    CHECK(table.find("Classifier") != std::string::npos);
    CHECK(table.find("Error(%)") != std::string::npos);
    CHECK(table.find("failed") != std::string::npos);
    CHECK(table.find("Filtered") == std::string::npos);

    CHECK_THROWS_AS(run_bench(scene.image, scene.annotation, scene.truth, {}, config), PreconditionError);
    CHECK_THROWS_AS(run_bench(scene.image, scene.annotation, GroundTruth{}, specs, config), PreconditionError);
}

TEST_CASE("parallel sweeps match the sequential counts without timings") {
    PipelineConfig config = scene_config();
    const SyntheticScene scene = generate(config.synth);
    ClassifierSpec stump;
    stump.kind = ClassifierKind::decision_stump;
    const std::vector<ClassifierSpec> specs{forest(10), stump};
    const BenchReport seq = run_bench(scene.image, scene.annotation, scene.truth, specs, config);
    config.parallel_sweep = true;
    const BenchReport par = run_bench(scene.image, scene.annotation, scene.truth, specs, config);
    REQUIRE(par.rows.size() == seq.rows.size());
    for (std::size_t i = 0; i < par.rows.size(); ++i) {
        CHECK(par.rows[i].classifier == seq.rows[i].classifier);
        CHECK(par.rows[i].count == seq.rows[i].count);
        CHECK_FALSE(par.rows[i].timed);
        CHECK(par.rows[i].total_s == 0.0);
    }
    CHECK(format_report_table(par).find(" - ") != std::string::npos);
}
