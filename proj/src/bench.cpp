#include "crowncount/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "crowncount/util.hpp"

namespace crowncount {

ErrorMetrics signed_error_metrics(long count, long truth) {
    require(truth >= 1, "ground truth count must be at least 1");
    const long diff = count - truth;
    return ErrorMetrics{diff, 100.0 * static_cast<double>(std::labs(diff)) / static_cast<double>(truth)};
}

std::string format_signed(long value) {
    if (value > 0) {
        return "+" + std::to_string(value);
    }
    return std::to_string(value);
}

std::string classifier_label(const ClassifierSpec& spec) {
    std::string label(to_string(spec.kind));
    if (spec.parallel && spec.kind == ClassifierKind::random_forest) {
        label += "[parallel]";
    }
    return label;
}

void sort_rows(std::vector<BenchRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
        if (a.failed != b.failed) {
            return b.failed;
        }
        if (!a.failed && a.error_pct != b.error_pct) {
            return a.error_pct < b.error_pct;
        }
        return a.classifier < b.classifier;
    });
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

BenchRow run_one(const ClassifierSpec& spec, const TrainingSet& training, const FeatureStack& stack, long truth,
                 const PipelineConfig& config, bool timed) {
    BenchRow row;
    row.classifier = classifier_label(spec);
    row.timed = timed;
    try {
        const auto start = std::chrono::steady_clock::now();
        const ClassifierModel model = fit(spec, training);
        row.train_s = seconds_since(start);

        // single-threaded inside a parallel sweep so workers do not nest
        const auto segment_start = std::chrono::steady_clock::now();
        const ClassifiedImage classified = classify_image(model, stack, timed ? 0 : 1);
        const BinaryMask mask = binarize(classified.probability, config.binarize_threshold);
        row.segment_s = seconds_since(segment_start);
        row.total_s = row.train_s + row.segment_s;

        const CountResult counted = count_crowns(mask, config.min_radius, &classified.probability);
        row.count = static_cast<long>(counted.detections.size());
        const ErrorMetrics raw = signed_error_metrics(row.count, truth);
        row.signed_error = raw.signed_error;
        row.error_pct = raw.error_pct;
        if (config.apply_filter) {
            const FilterReport filtered = apply_constraints(counted.detections, config.constraints);
            const auto kept = static_cast<long>(count_after_filter(filtered));
            const ErrorMetrics after = signed_error_metrics(kept, truth);
            row.filtered_count = kept;
            row.filtered_signed_error = after.signed_error;
            row.filtered_error_pct = after.error_pct;
        }
    } catch (const std::exception& e) {
        BenchRow failed;
        failed.classifier = row.classifier;
        failed.timed = timed;
        failed.failed = true;
        failed.failure = e.what();
        return failed;
    }
    if (!timed) {
        row.train_s = row.segment_s = row.total_s = 0.0;
    }
    return row;
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

}  // namespace

BenchReport run_bench(const RasterImage& image, const AnnotationMask& mask, const GroundTruth& truth,
                      std::span<const ClassifierSpec> specs, const PipelineConfig& config) {
    require(!specs.empty(), "bench needs at least one classifier spec");
    require(truth.count() >= 1, "bench needs a non-empty ground truth");
    config.features.validate();
    config.constraints.validate();

    BenchReport report;
    report.truth = static_cast<long>(truth.count());
    report.fingerprint = config_fingerprint(config);

    const FeatureStack stack = build_stack(image, config.features);
    const TrainingSet training =
        extract_training(stack, mask, config.max_per_class, derive_seed(config.seed, "training"));

    report.rows.resize(specs.size());
    if (config.parallel_sweep) {
        parallel_for(0, specs.size(), [&](std::size_t i) {
            report.rows[i] = run_one(specs[i], training, stack, report.truth, config, false);
        });
    } else {
        for (std::size_t i = 0; i < specs.size(); ++i) {
            report.rows[i] = run_one(specs[i], training, stack, report.truth, config, true);
        }
    }
    sort_rows(report.rows);
    return report;
}

void write_report_csv(std::ostream& out, const BenchReport& report) {
    out << "classifier,train_s,segment_s,total_s,count,signed_error,error_pct,filtered_count,"
           "filtered_signed_error,filtered_error_pct,truth,failure\n";
    for (const BenchRow& row : report.rows) {
        out << row.classifier << ',';
        if (row.timed && !row.failed) {
            out << fixed(row.train_s, 3) << ',' << fixed(row.segment_s, 3) << ',' << fixed(row.total_s, 3) << ',';
        } else {
            out << ",,,";
        }
        out << row.count << ',';
        if (row.failed) {
            out << ",,,,,";
        } else {
            out << format_signed(row.signed_error) << ',' << fixed(row.error_pct, 2) << ',';
            if (row.filtered_count) {
                out << *row.filtered_count << ',' << format_signed(*row.filtered_signed_error) << ','
                    << fixed(*row.filtered_error_pct, 2) << ',';
            } else {
                out << ",,,";
            }
        }
        out << report.truth << ',';
        std::string failure = row.failure;
        std::replace(failure.begin(), failure.end(), ',', ';');
        std::replace(failure.begin(), failure.end(), '\n', ' ');
        out << failure << '\n';
    }
}

std::string format_report_table(const BenchReport& report) {
    const bool filtered = std::any_of(report.rows.begin(), report.rows.end(),
                                      [](const BenchRow& r) { return r.filtered_count.has_value(); });
    std::vector<std::string> header{"Classifier", "Train(s)", "Segment(s)", "Total(s)", "Count", "Error", "Error(%)"};
    if (filtered) {
        header.insert(header.end(), {"Filtered", "Error", "Error(%)"});
    }
    std::vector<std::vector<std::string>> cells{header};
    for (const BenchRow& row : report.rows) {
        std::vector<std::string> line{row.classifier};
        if (row.timed && !row.failed) {
            line.insert(line.end(), {fixed(row.train_s, 1), fixed(row.segment_s, 1), fixed(row.total_s, 1)});
        } else {
            line.insert(line.end(), {"-", "-", "-"});
        }
        if (row.failed) {
            line.insert(line.end(), {"failed", "", ""});
        } else {
            line.insert(line.end(), {std::to_string(row.count), format_signed(row.signed_error), fixed(row.error_pct, 1)});
        }
        if (filtered) {
            if (row.filtered_count) {
                line.insert(line.end(), {std::to_string(*row.filtered_count), format_signed(*row.filtered_signed_error),
                                         fixed(*row.filtered_error_pct, 1)});
            } else {
                line.insert(line.end(), {"", "", ""});
            }
        }
        cells.push_back(std::move(line));
    }

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            width[c] = std::max(width[c], line[c].size());
        }
    }
    std::ostringstream out;
    out << "Ground truth: " << report.truth << " trees\n";
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            const std::string pad(width[c] - line[c].size(), ' ');
            out << (c == 0 ? line[c] + pad : pad + line[c]);
            out << (c + 1 < line.size() ? "  " : "\n");
        }
    }
    for (const BenchRow& row : report.rows) {
        if (row.failed) {
            out << row.classifier << " failed: " << row.failure << '\n';
        }
    }
    return out.str();
}

}  // namespace crowncount
