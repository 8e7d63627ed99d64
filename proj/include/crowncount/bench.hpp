#pragma once

// Classifier sweep producing a counting-error report: train/segment/total
// seconds, count, signed error and error percentage per classifier.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowncount/pipeline.hpp"

namespace crowncount {

struct ErrorMetrics {
    long signed_error = 0;  ///< count - truth
    double error_pct = 0.0;  ///< 100 |signed_error| / truth
};

/// Throws PreconditionError when truth < 1.
ErrorMetrics signed_error_metrics(long count, long truth);

/// "+21", "-12", "0".
std::string format_signed(long value);

struct BenchRow {
    std::string classifier;
    bool failed = false;
    std::string failure;
    /// False in parallel sweeps, where timings are not reported.
    bool timed = true;
    double train_s = 0.0;
    double segment_s = 0.0;
    double total_s = 0.0;
    long count = -1;
    long signed_error = 0;
    double error_pct = 0.0;
    std::optional<long> filtered_count;
    std::optional<long> filtered_signed_error;
    std::optional<double> filtered_error_pct;
};

struct BenchReport {
    long truth = 0;
    std::vector<BenchRow> rows;  ///< ascending error_pct, ties by name, failed rows last
    std::string fingerprint;
};

/// Label used for a spec in report rows, e.g. "random_forest[parallel]".
std::string classifier_label(const ClassifierSpec& spec);

/// Shares one training sample across all specs. Each spec's failure is
/// recorded in its row rather than aborting the sweep.
BenchReport run_bench(const RasterImage& image, const AnnotationMask& mask, const GroundTruth& truth,
                      std::span<const ClassifierSpec> specs, const PipelineConfig& config);

void sort_rows(std::vector<BenchRow>& rows);

void write_report_csv(std::ostream& out, const BenchReport& report);
/// Aligned plain-text table; seconds rounded to 0.1.
std::string format_report_table(const BenchReport& report);

}  // namespace crowncount
