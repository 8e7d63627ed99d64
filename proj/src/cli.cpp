#include "crowncount/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include "CLI11.hpp"
#include "crowncount/bench.hpp"
#include "crowncount/model_io.hpp"
#include "crowncount/pipeline.hpp"
#include "crowncount/util.hpp"

namespace crowncount {

using nlohmann::json;

namespace {

/// A JSON patch applied to the config document when its flag was given.
struct Override {
    CLI::Option* option;
    std::function<void(json&)> apply;
};

class Overrides {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& pointer, T& storage,
                     const std::string& help) {
        CLI::Option* opt = app->add_option(flag, storage, help);
        list_.push_back({opt, [pointer, &storage](json& doc) { doc[json::json_pointer(pointer)] = storage; }});
        return opt;
    }

    CLI::Option* add_flag(CLI::App* app, const std::string& flag, const std::string& pointer, bool value,
                          const std::string& help) {
        CLI::Option* opt = app->add_flag(flag, help);
        list_.push_back({opt, [pointer, value](json& doc) { doc[json::json_pointer(pointer)] = value; }});
        return opt;
    }

    void add_custom(CLI::Option* opt, std::function<void(json&)> apply) { list_.push_back({opt, std::move(apply)}); }

    void apply(json& doc) const {
        for (const Override& o : list_) {
            if (o.option->count() > 0) {
                o.apply(doc);
            }
        }
    }

private:
    std::vector<Override> list_;
};

struct Options {
    std::string config;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::string image, annotation, truth, model, probability, mask, detections, removed, overlay, report;
    std::string classifier;
    std::vector<std::string> bench_classifiers;
    std::string filter_input, filter_output;
    int rows = 0, cols = 0, clutter = 0, max_per_class = 0, neighbor_k = 0;
    double spacing = 0, jitter = 0, failure_prob = 0, noise_sigma = 0, threshold = 0, min_radius = 0;
    double radius_min = 0, radius_max = 0, min_spacing = 0, row_tolerance = 0;
};

void add_common(CLI::App* app, Options& o, Overrides& ov) {
    app->add_option("--config", o.config, "JSON configuration file");
    ov.add(app, "--seed", "/seed", o.seed, "Pipeline seed");
    ov.add(app, "--output-dir", "/paths/output_dir", o.output_dir, "Directory for all outputs");
}

void add_constraints(CLI::App* app, Options& o, Overrides& ov) {
    ov.add(app, "--radius-min", "/constraints/radius_min", o.radius_min, "Smallest accepted crown radius (px)");
    ov.add(app, "--radius-max", "/constraints/radius_max", o.radius_max, "Largest accepted crown radius (px)");
    ov.add(app, "--min-spacing", "/constraints/min_spacing", o.min_spacing, "Minimum center distance (px)");
    ov.add(app, "--row-tolerance", "/constraints/row_tolerance", o.row_tolerance, "Max distance from a row line (px)");
    ov.add(app, "--neighbor-k", "/constraints/neighbor_k", o.neighbor_k, "Neighbors examined by the row rule");
    ov.add_flag(app, "--no-row-rule", "/constraints/enable_row_rule", false, "Disable the planting-row rule");
}

PipelineConfig effective_config(const Options& o, const Overrides& ov) {
    json doc = json::object();
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) {
            throw IoError("cannot open config " + o.config);
        }
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw FormatError(o.config + ": " + e.what());
        }
        if (!doc.is_object()) {
            throw FormatError(o.config + ": config must be a JSON object");
        }
    }
    ov.apply(doc);
    PipelineConfig config = config_from_json(doc);
    config.validate();
    std::filesystem::create_directories(config.paths.output_dir);
    std::ofstream echo(std::filesystem::path(config.paths.output_dir) / "effective-config.json");
    echo << config_to_json(config).dump(2) << '\n';
    return config;
}

void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
}

BinaryMask load_mask(const std::string& path) {
    const Grid<std::uint8_t> gray = load_index_image(path);
    BinaryMask mask(gray.width(), gray.height());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        mask[i] = gray[i] != 0 ? 1 : 0;
    }
    return mask;
}

ProbabilityMap load_probability(const std::string& path) {
    const Grid<std::uint8_t> gray = load_index_image(path);
    ProbabilityMap map(gray.width(), gray.height());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        map[i] = gray[i] / 255.0;
    }
    return map;
}

int run_synth(const PipelineConfig& config, std::ostream& out) {
    const SyntheticScene scene = generate(config.synth);
    for (const std::string* p : {&config.paths.image, &config.paths.annotation, &config.paths.truth}) {
        ensure_parent(*p);
    }
    save_image(scene.image, config.paths.image);
    save_annotation(scene.annotation, config.paths.annotation);
    save_truth_csv(config.paths.truth, scene.truth);
    out << "synth: " << scene.truth.count() << " trees, " << scene.image.width() << "x" << scene.image.height()
        << " px -> " << config.paths.image << '\n';
    return kExitOk;
}

int run_train(const PipelineConfig& config, std::ostream& out) {
    const RasterImage image = load_image(config.paths.image);
    const AnnotationMask annotation = load_annotation(config.paths.annotation);
    const FeatureStack stack = build_stack(image, config.features);
    const TrainingSet training =
        extract_training(stack, annotation, config.max_per_class, derive_seed(config.seed, "training"));
    const ClassifierModel model = fit(config.classifier, training);
    ensure_parent(config.paths.model);
    save_model(model, config.paths.model);
    out << "train: " << classifier_label(config.classifier) << " on " << training.labels.size() << " samples x "
        << stack.feature_count() << " features -> " << config.paths.model << '\n';
    return kExitOk;
}

int run_segment(const PipelineConfig& config, std::ostream& out) {
    const RasterImage image = load_image(config.paths.image);
    const ClassifierModel model = load_model(config.paths.model);
    const FeatureStack stack = build_stack(image, config.features);
    const ClassifiedImage classified = classify_image(model, stack);
    const BinaryMask mask = binarize(classified.probability, config.binarize_threshold);
    ensure_parent(config.paths.probability);
    ensure_parent(config.paths.mask);
    save_probability(classified.probability, config.paths.probability);
    save_mask(mask, config.paths.mask);
    out << "segment: " << classified.seconds << " s -> " << config.paths.mask << '\n';
    return kExitOk;
}

void write_filtered(const PipelineConfig& config, const std::vector<Detection>& detections, std::ostream& out,
                    const std::string& destination) {
    ensure_parent(destination);
    if (!config.apply_filter) {
        save_detections_csv(destination, detections);
        out << "count: " << detections.size() << " detections\n";
        return;
    }
    const FilterReport report = apply_constraints(detections, config.constraints);
    save_detections_csv(destination, report.kept);
    ensure_parent(config.paths.removed);
    save_removals_csv(config.paths.removed, report.removed);
    out << "count: " << detections.size() << " detections, " << report.removed_count << " removed, "
        << count_after_filter(report) << " kept\n";
}

int run_count(const PipelineConfig& config, std::ostream& out) {
    const BinaryMask mask = load_mask(config.paths.mask);
    std::optional<ProbabilityMap> probability;
    if (std::filesystem::exists(config.paths.probability)) {
        probability = load_probability(config.paths.probability);
    }
    const CountResult counted =
        count_crowns(mask, config.min_radius, probability ? &probability.value() : nullptr);
    write_filtered(config, counted.detections, out, config.paths.detections);
    if (std::filesystem::exists(config.paths.image)) {
        const RasterImage image = load_image(config.paths.image);
        if (image.same_shape(mask)) {
            const std::vector<Detection> shown =
                config.apply_filter ? load_detections_csv(config.paths.detections) : counted.detections;
            ensure_parent(config.paths.overlay);
            save_overlay(image, shown, config.paths.overlay);
        }
    }
    return kExitOk;
}

int run_bench_command(const PipelineConfig& config, std::ostream& out) {
    const RasterImage image = load_image(config.paths.image);
    const AnnotationMask annotation = load_annotation(config.paths.annotation);
    const GroundTruth truth = load_truth_csv(config.paths.truth);
    const BenchReport report = run_bench(image, annotation, truth, config.bench_classifiers, config);
    ensure_parent(config.paths.report);
    ensure_parent(config.paths.report_table);
    {
        std::ofstream csv(config.paths.report);
        if (!csv) {
            throw IoError("cannot write " + config.paths.report);
        }
        write_report_csv(csv, report);
    }
    const std::string table = format_report_table(report);
    std::ofstream(config.paths.report_table) << table;
    out << table << "config " << report.fingerprint << '\n';
    return kExitOk;
}

int run_filter(const PipelineConfig& config, const Options& o, std::ostream& out) {
    const std::string input = o.filter_input.empty() ? config.paths.detections : o.filter_input;
    const std::string output = o.filter_output.empty()
                                   ? (std::filesystem::path(config.paths.output_dir) / "filtered.csv").string()
                                   : o.filter_output;
    const std::vector<Detection> detections = load_detections_csv(input);
    PipelineConfig forced = config;
    forced.apply_filter = true;
    write_filtered(forced, detections, out, output);
    return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Count tree crowns in plantation imagery", argv.empty() ? "crowncount" : argv.front()};
    app.require_subcommand(1);
    Options o;
    Overrides ov;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic plantation scene with ground truth");
    add_common(synth, o, ov);
    ov.add(synth, "--rows", "/synth/rows", o.rows, "Planting rows");
    ov.add(synth, "--cols", "/synth/cols", o.cols, "Trees per row");
    ov.add(synth, "--spacing", "/synth/spacing", o.spacing, "Grid spacing (px)");
    ov.add(synth, "--jitter", "/synth/jitter", o.jitter, "Max center offset (px)");
    ov.add(synth, "--failure-prob", "/synth/failure_prob", o.failure_prob, "Probability a plant is missing");
    ov.add(synth, "--noise-sigma", "/synth/noise_sigma", o.noise_sigma, "Gaussian pixel noise");
    ov.add(synth, "--clutter", "/synth/clutter_count", o.clutter, "Number of distractor blobs");

    CLI::App* train = app.add_subcommand("train", "Fit a pixel classifier and save it as JSON");
    add_common(train, o, ov);
    ov.add(train, "--image", "/paths/image", o.image, "Input RGB image");
    ov.add(train, "--annotation", "/paths/annotation", o.annotation, "Annotation PNG (0 none, 1 tree, 2 other)");
    ov.add(train, "--model", "/paths/model", o.model, "Output model file");
    ov.add(train, "--max-per-class", "/max_per_class", o.max_per_class, "Training samples per class");
    CLI::Option* kind = train->add_option("--classifier", o.classifier, "Classifier kind");
    ov.add_custom(kind, [&o](json& doc) { doc["classifier"] = json{{"kind", o.classifier}}; });

    CLI::App* segment = app.add_subcommand("segment", "Produce a probability map and binary mask");
    add_common(segment, o, ov);
    ov.add(segment, "--image", "/paths/image", o.image, "Input RGB image");
    ov.add(segment, "--model", "/paths/model", o.model, "Model file");
    ov.add(segment, "--probability", "/paths/probability", o.probability, "Output probability PNG");
    ov.add(segment, "--mask", "/paths/mask", o.mask, "Output mask PNG");
    ov.add(segment, "--threshold", "/binarize_threshold", o.threshold, "Tree probability threshold");

    CLI::App* count = app.add_subcommand("count", "Split, measure and filter crowns in a binary mask");
    add_common(count, o, ov);
    ov.add(count, "--mask", "/paths/mask", o.mask, "Input mask PNG");
    ov.add(count, "--probability", "/paths/probability", o.probability, "Probability PNG used for scores");
    ov.add(count, "--image", "/paths/image", o.image, "Image for the overlay");
    ov.add(count, "--detections", "/paths/detections", o.detections, "Output detections CSV");
    ov.add(count, "--removed", "/paths/removed", o.removed, "Output removals CSV");
    ov.add(count, "--overlay", "/paths/overlay", o.overlay, "Output overlay PNG");
    ov.add(count, "--min-radius", "/min_radius", o.min_radius, "Smallest equivalent radius kept (px)");
    ov.add_flag(count, "--no-filter", "/apply_filter", false, "Skip the domain-constraint filter");
    add_constraints(count, o, ov);

    CLI::App* bench = app.add_subcommand("bench", "Compare classifiers on counting error");
    add_common(bench, o, ov);
    ov.add(bench, "--image", "/paths/image", o.image, "Input RGB image");
    ov.add(bench, "--annotation", "/paths/annotation", o.annotation, "Annotation PNG");
    ov.add(bench, "--truth", "/paths/truth", o.truth, "Ground-truth CSV");
    ov.add(bench, "--report", "/paths/report", o.report, "Output report CSV");
    ov.add(bench, "--min-radius", "/min_radius", o.min_radius, "Smallest equivalent radius kept (px)");
    ov.add_flag(bench, "--no-filter", "/apply_filter", false, "Skip the domain-constraint filter");
    ov.add_flag(bench, "--parallel-sweep", "/parallel_sweep", true, "Run classifiers concurrently (no timings)");
    CLI::Option* kinds = bench->add_option("--classifier", o.bench_classifiers, "Classifier kinds to compare");
    ov.add_custom(kinds, [&o](json& doc) {
        json list = json::array();
        for (const std::string& k : o.bench_classifiers) {
            list.push_back(json{{"kind", k}});
        }
        doc["bench_classifiers"] = list;
    });
    add_constraints(bench, o, ov);

    CLI::App* filter = app.add_subcommand("filter", "Apply domain constraints to a detections CSV");
    add_common(filter, o, ov);
    filter->add_option("--input", o.filter_input, "Detections CSV (default: paths.detections)");
    filter->add_option("--output", o.filter_output, "Filtered CSV (default: <output_dir>/filtered.csv)");
    ov.add(filter, "--removed", "/paths/removed", o.removed, "Output removals CSV");
    add_constraints(filter, o, ov);

    try {
        std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        const auto used = app.get_subcommands();
        err << (used.empty() ? app.help() : used.front()->help());
        return kExitUsage;
    }

    try {
        const PipelineConfig config = effective_config(o, ov);
        if (synth->parsed()) {
            return run_synth(config, out);
        }
        if (train->parsed()) {
            return run_train(config, out);
        }
        if (segment->parsed()) {
            return run_segment(config, out);
        }
        if (count->parsed()) {
            return run_count(config, out);
        }
        if (bench->parsed()) {
            return run_bench_command(config, out);
        }
        return run_filter(config, o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

}  // namespace crowncount
