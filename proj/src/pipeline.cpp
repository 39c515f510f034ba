#include "linkage/pipeline.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>

#include "json.hpp"
#include "linkage/csv.hpp"
#include "linkage/rng.hpp"

namespace linkage {

using nlohmann::json;
namespace fs = std::filesystem;

PipelineConfig::PipelineConfig() {
    generator.n_offenders = 250;
    generator.persistent_prob = 0.25;
    generator.series_length_pmf = {{1, 0.55}, {2, 0.18}, {3, 0.10}, {4, 0.07},
                                   {5, 0.05}, {6, 0.03}, {7, 0.01}, {8, 0.01}};
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
    json j;
    j["generator"] = json::parse(generator_config_to_json(cfg.generator));
    j["transform"] = json::parse(transform_config_to_json(cfg.transform));
    j["pairs"] = json::parse(pair_sampling_config_to_json(cfg.pairs));
    j["model"] = cfg.model;
    j["nb"] = {{"n_bins", cfg.nb.n_bins}, {"alpha", cfg.nb.alpha}};
    j["logistic"] = {{"max_iters", cfg.logistic.max_iters},
                     {"tol", cfg.logistic.tol},
                     {"missing", missing_policy_to_string(cfg.logistic.missing)}};
    j["train_fraction"] = cfg.train_fraction;
    j["unsolved_fraction"] = cfg.unsolved_fraction;
    j["cluster_thresholds"] = cfg.cluster_thresholds;
    j["cut_threshold"] = cfg.cut_threshold;
    j["ranks"] = cfg.ranks;
    j["suspect_thresholds"] = cfg.suspect_thresholds;
    j["suspect_linkage"] = linkage_to_string(cfg.suspect_linkage);
    return j.dump(2) + "\n";
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
    PipelineConfig cfg;
    try {
        json j = json::parse(text);
        if (j.contains("generator"))
            cfg.generator = generator_config_from_json(j.at("generator").dump());
        if (j.contains("transform"))
            cfg.transform = transform_config_from_json(j.at("transform").dump());
        if (j.contains("pairs"))
            cfg.pairs = pair_sampling_config_from_json(j.at("pairs").dump());
        cfg.model = j.value("model", cfg.model);
        if (cfg.model != "naive-bayes" && cfg.model != "logistic")
            throw DataError("pipeline model must be naive-bayes or logistic");
        if (j.contains("nb")) {
            cfg.nb.n_bins = j.at("nb").value("n_bins", cfg.nb.n_bins);
            cfg.nb.alpha = j.at("nb").value("alpha", cfg.nb.alpha);
        }
        if (j.contains("logistic")) {
            cfg.logistic.max_iters = j.at("logistic").value("max_iters", cfg.logistic.max_iters);
            cfg.logistic.tol = j.at("logistic").value("tol", cfg.logistic.tol);
            if (j.at("logistic").contains("missing"))
                cfg.logistic.missing =
                    missing_policy_from_string(j.at("logistic").at("missing").get<std::string>());
        }
        cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
        cfg.unsolved_fraction = j.value("unsolved_fraction", cfg.unsolved_fraction);
        if (j.contains("cluster_thresholds"))
            cfg.cluster_thresholds = j.at("cluster_thresholds").get<std::vector<double>>();
        cfg.cut_threshold = j.value("cut_threshold", cfg.cut_threshold);
        if (j.contains("ranks")) cfg.ranks = j.at("ranks").get<std::vector<size_t>>();
        if (j.contains("suspect_thresholds"))
            cfg.suspect_thresholds = j.at("suspect_thresholds").get<std::vector<double>>();
        if (j.contains("suspect_linkage"))
            cfg.suspect_linkage =
                linkage_from_string(j.at("suspect_linkage").get<std::string>());
    } catch (const json::exception& e) {
        throw DataError(std::string("bad pipeline config json: ") + e.what());
    }
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
        throw DataError("train_fraction must lie in (0, 1)");
    if (cfg.unsolved_fraction < 0.0 || cfg.unsolved_fraction > 1.0)
        throw DataError("unsolved_fraction must lie in [0, 1]");
    return cfg;
}

namespace {

uint64_t file_hash(const std::string& path) {
    return fnv1a(read_text_file(path));
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto path = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    PipelineResult result;
    result.out_dir = out_dir;
    auto emit = [&](const std::string& name) { result.artifacts.push_back(name); };

    write_text_file(path("pipeline_config.json"), pipeline_config_to_json(cfg));
    emit("pipeline_config.json");

    // data
    CrimeDataset full = generate(cfg.generator);
    save_dataset(full, path("dataset.csv"));
    save_ingest_schema(canonical_ingest_schema(full), path("dataset.schema.json"));
    save_truth_labels(full, path("truth.csv"));
    emit("dataset.csv");
    emit("dataset.schema.json");
    emit("truth.csv");

    double cutoff = cfg.generator.span_days * 24.0 * cfg.train_fraction;
    auto [train, test_truth] = split_train_test(full, cutoff);
    CrimeDataset test = erase_offender_labels(test_truth, cfg.unsolved_fraction,
                                              mix_seed(cfg.generator.seed, 0x7E57));
    save_dataset(train, path("train.csv"));
    save_dataset(test, path("test.csv"));
    write_text_file(path("split_report.json"),
                    split_report_to_json(split_report(train, test, cutoff)));
    emit("train.csv");
    emit("test.csv");
    emit("split_report.json");
    result.n_train = train.size();
    result.n_test = test.size();

    // training pairs and model
    std::vector<WeightedPair> pairs = build_training_pairs(train, cfg.pairs, cfg.transform);
    write_pairs_csv(path("pairs.csv"), pairs);
    emit("pairs.csv");

    EvidenceSchema schema = evidence_schema(train, cfg.transform);
    std::vector<EvidenceVector> X =
        evidence_for_pairs(train, pair_ids(pairs), cfg.transform, schema);
    write_evidence_csv(path("pair_evidence.csv"), pair_ids(pairs), X, schema);
    emit("pair_evidence.csv");

    AnyModel model;
    if (cfg.model == "logistic") {
        model = fit_logistic(pairs, X, schema, cfg.logistic);
    } else {
        std::vector<FitWarning> warnings;
        NaiveBayesModel nb = fit_naive_bayes(pairs, X, schema, cfg.nb, &warnings);
        nb.write_component_curves_csv(path("model_components.csv"));
        emit("model_components.csv");
        model = std::move(nb);
    }
    save_model_json(model, path("model.json"));
    emit("model.json");
    const PairScorer& scorer = scorer_of(model);

    // test-period pair scores, labeled from the redacted test data
    SimilarityMatrix sim = pairwise_similarities(test, scorer, cfg.transform);
    PairLabeler labeler(test, sim.ids());
    std::vector<ScoredPair> scored;
    scored.reserve(SimilarityMatrix::pair_count(sim.n()));
    for (size_t i = 0; i < sim.n(); ++i)
        for (size_t j = i + 1; j < sim.n(); ++j)
            scored.push_back(
                {sim.ids()[i], sim.ids()[j], sim.at(i, j), labeler.label(i, j)});
    write_scored_pairs_csv(path("test_scores.csv"), scored);
    emit("test_scores.csv");
    sim.save_binary(path("test_similarity.lnk1"));
    write_csv_file(path("test_similarity.ids.csv"), {"crime_id"}, [&] {
        std::vector<std::vector<std::string>> rows;
        for (const auto& id : sim.ids()) rows.push_back({id});
        return rows;
    }());
    emit("test_similarity.lnk1");
    emit("test_similarity.ids.csv");

    RocCurve roc = roc_curve(scored);
    write_roc_csv(path("roc.csv"), roc);
    write_precision_csv(path("precision.csv"), precision_curve(scored));
    emit("roc.csv");
    emit("precision.csv");
    result.test_auc = roc.auc;

    // clustering under each linkage
    for (LinkageMethod m :
         {LinkageMethod::Single, LinkageMethod::Complete, LinkageMethod::Average}) {
        std::string tag = linkage_to_string(m);
        Dendrogram dend = agglomerate(sim, m);
        write_text_file(path("dendrogram_" + tag + ".json"), dend.to_json());
        write_text_file(path("dendrogram_" + tag + ".newick"), dend.to_newick());
        write_partition_csv(path("partition_" + tag + ".csv"),
                            cut_dendrogram(dend, cfg.cut_threshold));
        write_cluster_eval_csv(path("cluster_eval_" + tag + ".csv"),
                               clustering_eval(dend, labeler, cfg.cluster_thresholds));
        emit("dendrogram_" + tag + ".json");
        emit("dendrogram_" + tag + ".newick");
        emit("partition_" + tag + ".csv");
        emit("cluster_eval_" + tag + ".csv");
    }

    // hold-one-out series identification on the redacted test period
    std::vector<CrimeSeries> test_series;
    for (auto& s : series_from_solved(test))
        if (s.crime_ids.size() >= 2) test_series.push_back(std::move(s));
    if (!test_series.empty()) {
        auto rows = series_id_eval_multi(
            test_series, test,
            {LinkageMethod::Single, LinkageMethod::Complete, LinkageMethod::Average}, scorer,
            cfg.transform, cfg.ranks);
        write_series_id_eval_csv(path("series_id_eval.csv"), rows);
        emit("series_id_eval.csv");
    }

    // suspect prioritization: true test series against the solved history
    json suspect_summary;
    if (std::holds_alternative<NaiveBayesModel>(model)) {
        NaiveBayesModel no_time = std::get<NaiveBayesModel>(model);
        if (no_time.schema().index_of(kTemporalVar))
            no_time = no_time.without(kTemporalVar);
        std::vector<CrimeSeries> queries = series_from_solved(test_truth);
        std::vector<CrimeSeries> history = series_from_solved(train);
        if (!queries.empty() && !history.empty()) {
            SuspectEval ev =
                suspect_eval(queries, test_truth, history, train, cfg.suspect_linkage, no_time,
                             cfg.transform, cfg.suspect_thresholds);
            write_suspect_eval_csv(path("suspect_eval.csv"), ev);
            emit("suspect_eval.csv");
            suspect_summary = {{"coverage", ev.coverage},
                               {"n_queries", ev.n_queries},
                               {"n_covered", ev.n_covered}};
        }
    } else {
        suspect_summary = {{"skipped", "logistic model cannot drop the temporal component"}};
    }

    // summary and manifest
    json summary;
    summary["version"] = kVersion;
    summary["seed"] = cfg.generator.seed;
    summary["n_crimes"] = full.size();
    summary["n_train"] = result.n_train;
    summary["n_test"] = result.n_test;
    summary["n_training_pairs"] = pairs.size();
    summary["test_auc"] = roc.auc;
    summary["test_linked_pairs"] = roc.n_linked;
    summary["test_unlinked_pairs"] = roc.n_unlinked;
    summary["suspects"] = suspect_summary;
    write_text_file(path("summary.json"), summary.dump(2) + "\n");
    emit("summary.json");

    json manifest;
    manifest["version"] = kVersion;
    json files = json::object();
    for (const auto& name : result.artifacts) {
        char hex[24];
        std::snprintf(hex, sizeof hex, "%016" PRIx64, file_hash(path(name)));
        files[name] = {{"bytes", fs::file_size(path(name))}, {"fnv1a", hex}};
    }
    manifest["artifacts"] = files;
    write_text_file(path("manifest.json"), manifest.dump(2) + "\n");
    result.artifacts.push_back("manifest.json");

    return result;
}

}  // namespace linkage
