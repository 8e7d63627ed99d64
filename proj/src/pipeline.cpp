#include "crowncount/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>

#include "crowncount/model_io.hpp"
#include "crowncount/util.hpp"

namespace crowncount {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw FormatError(where + " must be a JSON object");
    }
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            known = known || item.key() == key;
        }
        if (!known) {
            throw FormatError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

void read(const json& obj, const char* key, double& out) {
    if (!obj.contains(key)) {
        return;
    }
    if (!obj.at(key).is_number()) {
        throw FormatError(std::string("'") + key + "' must be a number");
    }
    out = obj.at(key).get<double>();
}

void read(const json& obj, const char* key, int& out) {
    if (!obj.contains(key)) {
        return;
    }
    if (!obj.at(key).is_number_integer()) {
        throw FormatError(std::string("'") + key + "' must be an integer");
    }
    out = obj.at(key).get<int>();
}

void read(const json& obj, const char* key, std::uint64_t& out) {
    if (!obj.contains(key)) {
        return;
    }
    const json& value = obj.at(key);
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
        throw FormatError(std::string("'") + key + "' must be a non-negative integer");
    }
    out = obj.at(key).get<std::uint64_t>();
}

void read(const json& obj, const char* key, bool& out) {
    if (!obj.contains(key)) {
        return;
    }
    if (!obj.at(key).is_boolean()) {
        throw FormatError(std::string("'") + key + "' must be true or false");
    }
    out = obj.at(key).get<bool>();
}

void read(const json& obj, const char* key, std::string& out) {
    if (!obj.contains(key)) {
        return;
    }
    if (!obj.at(key).is_string()) {
        throw FormatError(std::string("'") + key + "' must be a string");
    }
    out = obj.at(key).get<std::string>();
}

template <class T>
void read_list(const json& obj, const char* key, std::vector<T>& out) {
    if (!obj.contains(key)) {
        return;
    }
    const json& value = obj.at(key);
    if (!value.is_array()) {
        throw FormatError(std::string("'") + key + "' must be an array");
    }
    out.clear();
    for (const json& v : value) {
        if (std::is_integral_v<T> ? !v.is_number_integer() : !v.is_number()) {
            throw FormatError(std::string("'") + key + "' has a non-numeric entry");
        }
        out.push_back(v.get<T>());
    }
}

ClassifierSpec classifier_from_json(const json& obj, std::uint64_t pipeline_seed) {
    ClassifierSpec spec = spec_from_json(obj);
    if (!obj.contains("seed")) {
        spec.seed = seeded_spec(spec.kind, pipeline_seed).seed;
    }
    return spec;
}

std::vector<ClassifierSpec> default_bench(std::uint64_t seed) {
    std::vector<ClassifierSpec> specs;
    for (const ClassifierKind kind : all_classifier_kinds()) {
        specs.push_back(seeded_spec(kind, seed));
    }
    ClassifierSpec fast = seeded_spec(ClassifierKind::random_forest, seed);
    fast.parallel = true;
    specs.push_back(fast);
    return specs;
}

struct PathField {
    const char* key;
    const char* file_name;
    std::string PipelinePaths::*member;
};

const PathField kPathFields[] = {
    {"image", "image.png", &PipelinePaths::image},
    {"annotation", "annotation.png", &PipelinePaths::annotation},
    {"truth", "truth.csv", &PipelinePaths::truth},
    {"model", "model.json", &PipelinePaths::model},
    {"probability", "probability.png", &PipelinePaths::probability},
    {"mask", "mask.png", &PipelinePaths::mask},
    {"detections", "detections.csv", &PipelinePaths::detections},
    {"removed", "removed.csv", &PipelinePaths::removed},
    {"overlay", "overlay.png", &PipelinePaths::overlay},
    {"report", "report.csv", &PipelinePaths::report},
    {"report_table", "report.txt", &PipelinePaths::report_table},
};

}  // namespace

void PipelineConfig::validate() const {
    features.validate();
    resolve_hyperparameters(classifier);
    constraints.validate();
    synth.validate();
    require(max_per_class >= 1, "max_per_class must be at least 1");
    require(binarize_threshold > 0.0 && binarize_threshold < 1.0, "binarize_threshold must lie in (0, 1)");
    require(min_radius >= 0.0, "min_radius must be non-negative");
    require(!paths.output_dir.empty(), "paths.output_dir must not be empty");
}

ClassifierSpec seeded_spec(ClassifierKind kind, std::uint64_t pipeline_seed) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.seed = derive_seed(pipeline_seed, "classifier/" + std::string(to_string(kind)));
    return spec;
}

PipelineConfig config_from_json(const json& document) {
    check_keys(document,
               {"seed", "features", "classifier", "bench_classifiers", "max_per_class", "binarize_threshold",
                "min_radius", "apply_filter", "constraints", "synth", "parallel_sweep", "paths"},
               "config");
    PipelineConfig config;
    try {
        read(document, "seed", config.seed);
        read(document, "max_per_class", config.max_per_class);
        read(document, "binarize_threshold", config.binarize_threshold);
        read(document, "min_radius", config.min_radius);
        read(document, "apply_filter", config.apply_filter);
        read(document, "parallel_sweep", config.parallel_sweep);

        if (document.contains("features")) {
            const json& f = document.at("features");
            check_keys(f, {"gaussian_sigmas", "stat_windows", "include_hsi", "include_gradient"}, "features");
            read_list(f, "gaussian_sigmas", config.features.gaussian_sigmas);
            read_list(f, "stat_windows", config.features.stat_windows);
            read(f, "include_hsi", config.features.include_hsi);
            read(f, "include_gradient", config.features.include_gradient);
        }

        config.classifier = document.contains("classifier")
                                ? classifier_from_json(document.at("classifier"), config.seed)
                                : seeded_spec(ClassifierKind::random_forest, config.seed);

        if (document.contains("bench_classifiers")) {
            const json& list = document.at("bench_classifiers");
            if (!list.is_array()) {
                throw FormatError("'bench_classifiers' must be an array");
            }
            for (const json& item : list) {
                config.bench_classifiers.push_back(classifier_from_json(item, config.seed));
            }
        } else {
            config.bench_classifiers = default_bench(config.seed);
        }

        if (document.contains("constraints")) {
            const json& c = document.at("constraints");
            check_keys(c, {"radius_min", "radius_max", "min_spacing", "row_tolerance", "neighbor_k", "enable_row_rule"},
                       "constraints");
            read(c, "radius_min", config.constraints.radius_min);
            read(c, "radius_max", config.constraints.radius_max);
            read(c, "min_spacing", config.constraints.min_spacing);
            read(c, "row_tolerance", config.constraints.row_tolerance);
            read(c, "neighbor_k", config.constraints.neighbor_k);
            read(c, "enable_row_rule", config.constraints.enable_row_rule);
        }

        PlantationSpec& s = config.synth;
        s.seed = derive_seed(config.seed, "synth");
        if (document.contains("synth")) {
            const json& j = document.at("synth");
            check_keys(j,
                       {"rows", "cols", "spacing", "crown_radius_min", "crown_radius_max", "jitter", "failure_prob",
                        "noise_sigma", "clutter_count", "seed"},
                       "synth");
            read(j, "rows", s.rows);
            read(j, "cols", s.cols);
            read(j, "spacing", s.spacing);
            read(j, "crown_radius_min", s.crown_radius_min);
            read(j, "crown_radius_max", s.crown_radius_max);
            read(j, "jitter", s.jitter);
            read(j, "failure_prob", s.failure_prob);
            read(j, "noise_sigma", s.noise_sigma);
            read(j, "clutter_count", s.clutter_count);
            read(j, "seed", s.seed);
        }

        // File paths default to <output_dir>/<standard name>.
        if (document.contains("paths")) {
            const json& p = document.at("paths");
            check_keys(p,
                       {"output_dir", "image", "annotation", "truth", "model", "probability", "mask", "detections",
                        "removed", "overlay", "report", "report_table"},
                       "paths");
            read(p, "output_dir", config.paths.output_dir);
            for (const PathField& f : kPathFields) {
                config.paths.*f.member = (std::filesystem::path(config.paths.output_dir) / f.file_name).string();
                read(p, f.key, config.paths.*f.member);
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed config: ") + e.what());
    }
    return config;
}

json config_to_json(const PipelineConfig& config) {
    json bench = json::array();
    for (const ClassifierSpec& spec : config.bench_classifiers) {
        bench.push_back(spec_to_json(spec));
    }
    json paths{{"output_dir", config.paths.output_dir}};
    for (const PathField& f : kPathFields) {
        paths[f.key] = config.paths.*f.member;
    }
    const PlantationSpec& s = config.synth;
    const ConstraintConfig& c = config.constraints;
    return json{
        {"seed", config.seed},
        {"features",
         {{"gaussian_sigmas", config.features.gaussian_sigmas},
          {"stat_windows", config.features.stat_windows},
          {"include_hsi", config.features.include_hsi},
          {"include_gradient", config.features.include_gradient}}},
        {"classifier", spec_to_json(config.classifier)},
        {"bench_classifiers", bench},
        {"max_per_class", config.max_per_class},
        {"binarize_threshold", config.binarize_threshold},
        {"min_radius", config.min_radius},
        {"apply_filter", config.apply_filter},
        {"constraints",
         {{"radius_min", c.radius_min},
          {"radius_max", c.radius_max},
          {"min_spacing", c.min_spacing},
          {"row_tolerance", c.row_tolerance},
          {"neighbor_k", c.neighbor_k},
          {"enable_row_rule", c.enable_row_rule}}},
        {"synth",
         {{"rows", s.rows},
          {"cols", s.cols},
          {"spacing", s.spacing},
          {"crown_radius_min", s.crown_radius_min},
          {"crown_radius_max", s.crown_radius_max},
          {"jitter", s.jitter},
          {"failure_prob", s.failure_prob},
          {"noise_sigma", s.noise_sigma},
          {"clutter_count", s.clutter_count},
          {"seed", s.seed}}},
        {"parallel_sweep", config.parallel_sweep},
        {"paths", paths},
    };
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    json document;
    try {
        document = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return config_from_json(document);
}

CountResult count_crowns(const BinaryMask& mask, double min_radius, const ProbabilityMap* probability) {
    CountResult result{fill_holes(mask), LabelMap(mask.width(), mask.height()), {}};
    result.labels = watershed_split(result.filled);
    result.detections = analyze_particles(result.labels, min_radius, probability);
    return result;
}

std::string config_fingerprint(const PipelineConfig& config) {
    json canonical = config_to_json(config);
    canonical.erase("paths");
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a64(canonical.dump())));
    return hex;
}

}  // namespace crowncount
