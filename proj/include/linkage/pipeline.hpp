#pragma once
// End-to-end run: synthesize data, split, fit a model, score and cluster the
// test period, and write the full evaluation bundle to a directory.

#include <string>
#include <vector>

#include "linkage/bf_models.hpp"
#include "linkage/evaluation.hpp"
#include "linkage/synth_gen.hpp"

namespace linkage {

struct PipelineConfig {
    GeneratorConfig generator;
    TransformConfig transform;
    PairSamplingConfig pairs;

    std::string model = "naive-bayes";  // or "logistic"
    NbFitOptions nb;
    LogisticFitOptions logistic;

    double train_fraction = 2.0 / 3.0;   // temporal cutoff as a span fraction
    double unsolved_fraction = 0.35;     // label erasure on the test period

    std::vector<double> cluster_thresholds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    double cut_threshold = 7.0;
    std::vector<size_t> ranks = {1, 5, 10, 25, 50};
    std::vector<double> suspect_thresholds = {0, 1, 2, 3, 4, 5};
    LinkageMethod suspect_linkage = LinkageMethod::Single;

    PipelineConfig();  // demo defaults: richer series mix than the raw generator
};

std::string pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const std::string& text);

struct PipelineResult {
    std::string out_dir;
    double test_auc = 0.0;
    size_t n_train = 0;
    size_t n_test = 0;
    std::vector<std::string> artifacts;  // file names relative to out_dir
};

// Writes datasets, training pairs, the model, test scores, dendrograms and
// partitions for all three linkages, and the evaluation reports, plus
// summary.json and manifest.json (content hashes). Fully deterministic:
// the same config yields byte-identical artifacts.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir);

}  // namespace linkage
