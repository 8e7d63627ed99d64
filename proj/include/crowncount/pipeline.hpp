#pragma once

// Pipeline configuration and the mask -> detections counting stage.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crowncount/classifiers.hpp"
#include "crowncount/domainfilter.hpp"
#include "crowncount/features.hpp"
#include "crowncount/morphology.hpp"
#include "crowncount/particles.hpp"
#include "crowncount/segmentation.hpp"
#include "crowncount/synth.hpp"
#include "json.hpp"

namespace crowncount {

struct PipelinePaths {
    std::string output_dir = "out";
    std::string image = "out/image.png";
    std::string annotation = "out/annotation.png";
    std::string truth = "out/truth.csv";
    std::string model = "out/model.json";
    std::string probability = "out/probability.png";
    std::string mask = "out/mask.png";
    std::string detections = "out/detections.csv";
    std::string removed = "out/removed.csv";
    std::string overlay = "out/overlay.png";
    std::string report = "out/report.csv";
    std::string report_table = "out/report.txt";
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    FeatureConfig features;
    /// Seed of `classifier` and each bench entry defaults to
    /// derive_seed(seed, "classifier/<kind>") unless set explicitly.
    ClassifierSpec classifier;
    std::vector<ClassifierSpec> bench_classifiers;
    int max_per_class = kDefaultMaxPerClass;
    double binarize_threshold = 0.5;
    double min_radius = 50.0;
    bool apply_filter = true;
    ConstraintConfig constraints;
    PlantationSpec synth;
    bool parallel_sweep = false;
    PipelinePaths paths;

    void validate() const;
};

/// Missing keys take defaults; unknown keys and wrong types raise FormatError.
PipelineConfig config_from_json(const nlohmann::json& document);
nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& path);

/// A spec whose seed is derived from the pipeline seed.
ClassifierSpec seeded_spec(ClassifierKind kind, std::uint64_t pipeline_seed);

struct CountResult {
    BinaryMask filled;
    LabelMap labels;
    std::vector<Detection> detections;
};

/// fill_holes -> watershed_split -> analyze_particles.
CountResult count_crowns(const BinaryMask& mask, double min_radius, const ProbabilityMap* probability);

/// Hex digest of the canonical config JSON.
std::string config_fingerprint(const PipelineConfig& config);

}  // namespace crowncount
