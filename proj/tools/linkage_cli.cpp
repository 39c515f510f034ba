// linkage: command line front end for the crime linkage library.
//
// Relative paths resolve under $LINKAGE_DATA_DIR when it is set. Every
// successful run writes a small manifest (inputs with content hashes, the
// effective config hash, the seed, tool version) next to its primary output.
// Exit codes: 0 ok, 1 data error, 2 usage error; failures also emit a one-line
// JSON report on stderr.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "linkage/common.hpp"
#include "linkage/csv.hpp"
#include "linkage/evaluation.hpp"
#include "linkage/pipeline.hpp"
#include "linkage/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace linkage;

namespace {

std::string resolve_path(const std::string& p) {
    const char* dir = std::getenv("LINKAGE_DATA_DIR");
    if (p.empty() || !dir || !*dir || fs::path(p).is_absolute()) return p;
    return (fs::path(dir) / p).string();
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// run manifest accumulated by each subcommand and written on success
struct ManifestBuilder {
    explicit ManifestBuilder(std::string sub) : subcommand(std::move(sub)) {}

    std::string subcommand;
    json inputs = json::object();
    json outputs = json::object();
    std::string config_json = "{}";
    std::optional<uint64_t> seed;
    std::string primary;   // default manifest location: <primary>.manifest.json
    std::string override_path;

    void in(const std::string& name, const std::string& path) {
        if (path.empty()) return;
        json e;
        e["path"] = path;
        try {
            e["fnv1a"] = hex64(fnv1a(read_text_file(path)));
        } catch (const DataError&) {
            // unreadable inputs still get recorded by path
        }
        inputs[name] = e;
    }
    void out(const std::string& name, const std::string& path) {
        if (path.empty()) return;
        outputs[name] = path;
        if (primary.empty()) primary = path;
    }

    void write() const {
        std::string path = override_path;
        if (path.empty()) {
            if (primary.empty()) return;
            path = primary + ".manifest.json";
        }
        json j;
        j["tool"] = "linkage";
        j["version"] = kVersion;
        j["subcommand"] = subcommand;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        j["config_hash"] = hex64(fnv1a(config_json));
        if (seed) j["seed"] = *seed;
        write_text_file(path, j.dump(2) + "\n");
    }
};

// Canonical layout when no schema sidecar is given: the standard columns by
// name, everything else treated as a category attribute.
IngestSchema schema_for(const std::string& data_path, const std::string& schema_path) {
    if (!schema_path.empty()) return load_ingest_schema(schema_path);
    CsvTable t = read_csv_file(data_path);
    IngestSchema s;
    for (const auto& col : t.header) {
        if (col == "id" || col == "x" || col == "y" || col == "t_earliest" ||
            col == "t_latest" || col == "offenders")
            s.columns[col] = col;
        else
            s.columns[col] = "category:" + col;
    }
    s.fail_on_bad_row = true;
    return s;
}

CrimeDataset load_ds(const std::string& data_path, const std::string& schema_path) {
    LoadResult res = load_dataset(data_path, schema_for(data_path, schema_path));
    for (const auto& issue : res.issues)
        std::cerr << "warning: " << data_path << " row " << issue.row << ": " << issue.message
                  << "\n";
    return std::move(res.dataset);
}

std::vector<IdPair> all_pairs(const CrimeDataset& ds) {
    auto ids = ds.ids();
    std::vector<IdPair> out;
    out.reserve(ids.size() * (ids.size() - 1) / 2);
    for (size_t i = 0; i < ids.size(); ++i)
        for (size_t j = i + 1; j < ids.size(); ++j) {
            const auto& [a, b] = std::minmax(ids[i], ids[j]);
            out.emplace_back(a, b);
        }
    return out;
}

std::vector<IdPair> pairs_from_csv(const std::string& path) {
    return pair_ids(read_pairs_csv(path));
}

std::string read_config_text(const std::string& path) {
    return path.empty() ? std::string("{}") : read_text_file(resolve_path(path));
}

TransformConfig transform_from(const std::string& config_path) {
    return config_path.empty() ? TransformConfig{}
                               : transform_config_from_json(read_config_text(config_path));
}

// --model / --external resolution shared by score, cluster, identify,
// prioritize and the eval subcommands
struct ScorerArgs {
    std::string model_path;
    std::string external_path;

    void add_to(CLI::App* sub, bool require = true) {
        auto* m = sub->add_option("--model", model_path, "model json from `fit`");
        auto* e =
            sub->add_option("--external", external_path, "precomputed id_a,id_b,score csv");
        m->excludes(e);
        if (require) {
            // one of the two must be present; checked at run time for a
            // friendlier message than CLI11's group errors
        }
    }

    bool has_model() const { return !model_path.empty(); }
    bool has_external() const { return !external_path.empty(); }
    void require_one() const {
        if (!has_model() && !has_external())
            throw UsageError("one of --model or --external is required");
    }
};

// NB models silently shed the elapsed-time component for suspect work; a
// logistic model has to be refit without it, which we can't do here.
const PairScorer& suspect_scorer(const AnyModel& model, NaiveBayesModel& storage) {
    const PairScorer& s = scorer_of(model);
    if (!s.schema().index_of(kTemporalVar)) return s;
    if (const auto* nb = std::get_if<NaiveBayesModel>(&model)) {
        storage = nb->without(kTemporalVar);
        std::cerr << "note: dropped the temporal component for suspect ranking\n";
        return storage;
    }
    throw DataError(
        "suspect ranking needs a model without the temporal component; refit the logistic "
        "model with enabled_variables excluding it");
}

void write_id_list_csv(const std::string& path, const std::vector<std::string>& ids) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ids.size());
    for (const auto& id : ids) rows.push_back({id});
    write_csv_file(path, {"id"}, rows);
}

std::vector<std::string> read_id_list_csv(const std::string& path) {
    CsvTable t = read_csv_file(path);
    int c = t.column("id");
    if (c < 0) throw DataError(path + ": id list csv needs an `id` column");
    std::vector<std::string> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) out.push_back(row[c]);
    return out;
}

std::vector<LinkageMethod> parse_methods(std::vector<std::string> names) {
    if (names.empty()) names = {"single", "complete", "average"};
    std::vector<LinkageMethod> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(linkage_from_string(n));
    return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string config, out, truth, schema_out;
    uint64_t seed = 0;
    int n_offenders = 0;
    double unsolved_fraction = 0.0;
    uint64_t erase_seed = 1;
    std::string manifest;
};

void run_simulate(const SimulateOpts& o, const CLI::App* sub) {
    GeneratorConfig cfg;
    if (!o.config.empty()) cfg = generator_config_from_json(read_config_text(o.config));
    if (sub->count("--seed")) cfg.seed = o.seed;
    if (sub->count("--n-offenders")) cfg.n_offenders = o.n_offenders;

    CrimeDataset ds = generate(cfg);
    CrimeDataset out_ds =
        o.unsolved_fraction > 0.0 ? erase_offender_labels(ds, o.unsolved_fraction, o.erase_seed)
                                  : ds;

    ManifestBuilder mb("simulate");
    mb.in("config", o.config.empty() ? "" : resolve_path(o.config));
    mb.config_json = generator_config_to_json(cfg);
    mb.seed = cfg.seed;
    mb.override_path = resolve_path(o.manifest);

    save_dataset(out_ds, resolve_path(o.out));
    mb.out("dataset", resolve_path(o.out));
    if (!o.truth.empty()) {
        save_truth_labels(ds, resolve_path(o.truth));
        mb.out("truth", resolve_path(o.truth));
    }
    if (!o.schema_out.empty()) {
        save_ingest_schema(canonical_ingest_schema(out_ds), resolve_path(o.schema_out));
        mb.out("schema", resolve_path(o.schema_out));
    }
    mb.write();
    std::cout << json{{"n_crimes", out_ds.size()}, {"seed", cfg.seed}}.dump() << "\n";
}

// ------------------------------------------------------------------- split

struct SplitOpts {
    std::string data, schema, train_out, test_out, report;
    double cutoff = 0.0, fraction = 0.0;
    std::string manifest;
};

void run_split(const SplitOpts& o, const CLI::App* sub) {
    if (!sub->count("--cutoff") && !sub->count("--fraction"))
        throw UsageError("split needs --cutoff <hours> or --fraction <0..1>");
    CrimeDataset ds = load_ds(resolve_path(o.data), resolve_path(o.schema));

    double cutoff = o.cutoff;
    if (sub->count("--fraction")) {
        if (o.fraction <= 0.0 || o.fraction >= 1.0)
            throw UsageError("--fraction must be inside (0,1)");
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& r : ds.records) {
            lo = std::min(lo, r.t_earliest);
            hi = std::max(hi, r.t_earliest);
        }
        cutoff = lo + o.fraction * (hi - lo);
    }

    auto [train, test] = split_train_test(ds, cutoff);
    save_dataset(train, resolve_path(o.train_out));
    save_dataset(test, resolve_path(o.test_out));

    ManifestBuilder mb("split");
    mb.in("data", resolve_path(o.data));
    mb.in("schema", o.schema.empty() ? "" : resolve_path(o.schema));
    mb.config_json = json{{"cutoff_hours", cutoff}}.dump();
    mb.override_path = resolve_path(o.manifest);
    mb.out("train", resolve_path(o.train_out));
    mb.out("test", resolve_path(o.test_out));

    SplitReport rep = split_report(train, test, cutoff);
    if (!o.report.empty()) {
        write_text_file(resolve_path(o.report), split_report_to_json(rep));
        mb.out("report", resolve_path(o.report));
    }
    mb.write();
    std::cout << split_report_to_json(rep);
}

// --------------------------------------------------------------- transform

struct TransformOpts {
    std::string data, schema, pairs, config, out;
    int mc_draws = 0;
    uint64_t seed = 0;
    std::string manifest;
};

void run_transform(const TransformOpts& o, const CLI::App* sub) {
    CrimeDataset ds = load_ds(resolve_path(o.data), resolve_path(o.schema));
    TransformConfig cfg = transform_from(o.config);
    if (sub->count("--mc-draws")) cfg.mc_draws = o.mc_draws;
    if (sub->count("--seed")) cfg.rng_seed = o.seed;

    std::vector<IdPair> pairs =
        o.pairs.empty() ? all_pairs(ds) : pairs_from_csv(resolve_path(o.pairs));
    EvidenceSchema schema = evidence_schema(ds, cfg);
    auto ev = evidence_for_pairs(ds, pairs, cfg, schema);
    write_evidence_csv(resolve_path(o.out), pairs, ev, schema);

    ManifestBuilder mb("transform");
    mb.in("data", resolve_path(o.data));
    mb.in("schema", o.schema.empty() ? "" : resolve_path(o.schema));
    mb.in("pairs", o.pairs.empty() ? "" : resolve_path(o.pairs));
    mb.config_json = transform_config_to_json(cfg);
    mb.seed = cfg.rng_seed;
    mb.override_path = resolve_path(o.manifest);
    mb.out("evidence", resolve_path(o.out));
    mb.write();
    std::cout << json{{"n_pairs", pairs.size()}, {"n_variables", schema.size()}}.dump() << "\n";
}

// ------------------------------------------------------------------- pairs

struct PairsOpts {
    std::string data, schema, config, out;
    int k = 0;
    double max_days = 0.0;
    uint64_t seed = 0;
    std::string transform_config;
    std::string manifest;
};

void run_pairs(const PairsOpts& o, const CLI::App* sub) {
    CrimeDataset ds = load_ds(resolve_path(o.data), resolve_path(o.schema));
    PairSamplingConfig cfg;
    if (!o.config.empty()) cfg = pair_sampling_config_from_json(read_config_text(o.config));
    if (sub->count("--k")) cfg.k_unlinked = o.k;
    if (sub->count("--max-days")) cfg.max_days = o.max_days;
    if (sub->count("--seed")) cfg.rng_seed = o.seed;
    TransformConfig tcfg = transform_from(o.transform_config);

    auto pairs = build_training_pairs(ds, cfg, tcfg);
    write_pairs_csv(resolve_path(o.out), pairs);

    size_t n_linked = 0;
    for (const auto& p : pairs)
        if (p.label == LinkLabel::Linked) ++n_linked;

    ManifestBuilder mb("pairs");
    mb.in("data", resolve_path(o.data));
    mb.in("schema", o.schema.empty() ? "" : resolve_path(o.schema));
    mb.config_json = pair_sampling_config_to_json(cfg);
    mb.seed = cfg.rng_seed;
    mb.override_path = resolve_path(o.manifest);
    mb.out("pairs", resolve_path(o.out));
    mb.write();
    std::cout << json{{"n_pairs", pairs.size()},
                      {"n_linked", n_linked},
                      {"n_unlinked", pairs.size() - n_linked}}
                     .dump()
              << "\n";
}

// --------------------------------------------------------------------- fit

struct FitOpts {
    std::string data, schema, pairs, config, out, components_out;
    std::string model = "naive-bayes";
    int bins = 20;
    double alpha = 1.0;
    std::string missing = "strict";
    int max_iters = 50;
    double tol = 1e-8;
    std::string manifest;
};

void run_fit(const FitOpts& o, const CLI::App* sub) {
    CrimeDataset ds = load_ds(resolve_path(o.data), resolve_path(o.schema));
    json cfg = json::parse(read_config_text(o.config));

    TransformConfig tcfg;
    if (cfg.contains("transform"))
        tcfg = transform_config_from_json(cfg["transform"].dump());
    NbFitOptions nb;
    LogisticFitOptions lg;
    if (cfg.contains("bins")) nb.n_bins = cfg["bins"].get<int>();
    if (cfg.contains("alpha")) nb.alpha = cfg["alpha"].get<double>();
    if (cfg.contains("max_iters")) lg.max_iters = cfg["max_iters"].get<int>();
    if (cfg.contains("tol")) lg.tol = cfg["tol"].get<double>();
    if (cfg.contains("missing"))
        lg.missing = missing_policy_from_string(cfg["missing"].get<std::string>());
    if (sub->count("--bins")) nb.n_bins = o.bins;
    if (sub->count("--alpha")) nb.alpha = o.alpha;
    if (sub->count("--max-iters")) lg.max_iters = o.max_iters;
    if (sub->count("--tol")) lg.tol = o.tol;
    if (sub->count("--missing")) lg.missing = missing_policy_from_string(o.missing);

    auto pairs = read_pairs_csv(resolve_path(o.pairs));
    EvidenceSchema schema = evidence_schema(ds, tcfg);
    auto ev = evidence_for_pairs(ds, pair_ids(pairs), tcfg, schema);

    AnyModel model;
    if (o.model == "naive-bayes") {
        std::vector<FitWarning> warnings;
        model = fit_naive_bayes(pairs, ev, schema, nb, &warnings);
        for (const auto& w : warnings)
            std::cerr << "warning: " << w.variable << ": " << w.message << "\n";
        if (!o.components_out.empty())
            std::get<NaiveBayesModel>(model).write_component_curves_csv(
                resolve_path(o.components_out));
    } else {
        model = fit_logistic(pairs, ev, schema, lg);
        const auto& m = std::get<LogisticModel>(model);
        std::cerr << "converged in " << m.iterations() << " iterations, phi=" << fmt_g6(m.phi())
                  << "\n";
    }
    save_model_json(model, resolve_path(o.out));

    ManifestBuilder mb("fit");
    mb.in("data", resolve_path(o.data));
    mb.in("schema", o.schema.empty() ? "" : resolve_path(o.schema));
    mb.in("pairs", resolve_path(o.pairs));
    json eff{{"model", o.model},
             {"bins", nb.n_bins},
             {"alpha", nb.alpha},
             {"max_iters", lg.max_iters},
             {"tol", lg.tol},
             {"missing", missing_policy_to_string(lg.missing)},
             {"transform", json::parse(transform_config_to_json(tcfg))}};
    mb.config_json = eff.dump();
    mb.seed = tcfg.rng_seed;
    mb.override_path = resolve_path(o.manifest);
    mb.out("model", resolve_path(o.out));
    if (!o.components_out.empty()) mb.out("components", resolve_path(o.components_out));
    mb.write();
    std::cout << json{{"model", o.model}, {"n_pairs", pairs.size()},
                      {"n_variables", schema.size()}}
                     .dump()
              << "\n";
}

// ------------------------------------------------------------------- score

struct ScoreOpts {
    std::string data, schema, pairs, config, out;
    ScorerArgs scorer;
    bool use_all_pairs = false;
    std::string manifest;
};

void run_score(const ScoreOpts& o, const CLI::App*) {
    o.scorer.require_one();
    if (o.pairs.empty() && !o.use_all_pairs)
        throw UsageError("score needs --pairs <csv> or --all-pairs");
    CrimeDataset ds = load_ds(resolve_path(o.data), resolve_path(o.schema));
    TransformConfig cfg = transform_from(o.config);

    std::vector<IdPair> pairs =
        o.use_all_pairs ? all_pairs(ds) : pairs_from_csv(resolve_path(o.pairs));

    std::optional<AnyModel> model;
    std::optional<ExternalScores> ext;
    PairScoreFn fn;
    if (o.scorer.has_model()) {
        model = load_model_json(resolve_path(o.scorer.model_path));
        fn = make_pair_score_fn(scorer_of(*model), cfg);
    } else {
        ext = ExternalScores::from_csv(resolve_path(o.scorer.external_path));
        fn = make_pair_score_fn(*ext);
    }

    PairLabeler labeler(ds, ds.ids());
    std::vector<ScoredPair> scored(pairs.size());
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 64)
    for (int64_t t = 0; t < int64_t(pairs.size()); ++t) {
        try {
            const auto& [a, b] = pairs[size_t(t)];
            double s = fn(ds.at(a), ds.at(b));
            scored[size_t(t)] = {a, b, s, labeler.label(ds.index_of(a), ds.index_of(b))};
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    write_scored_pairs_csv(resolve_path(o.out), scored);

    ManifestBuilder mb("score");
    mb.in("data", resolve_path(o.data));
    mb.in("schema", o.schema.empty() ? "" : resolve_path(o.schema));
    mb.in("pairs", o.pairs.empty() ? "" : resolve_path(o.pairs));
    mb.in("model", o.scorer.has_model() ? resolve_path(o.scorer.model_path) : "");
    mb.in("external", o.scorer.has_external() ? resolve_path(o.scorer.external_path) : "");
    mb.config_json = transform_config_to_json(cfg);
    mb.seed = cfg.rng_seed;
    mb.override_path = resolve_path(o.manifest);
    mb.out("scores", resolve_path(o.out));
    mb.write();
    std::cout << json{{"n_pairs", scored.size()}}.dump() << "\n";
}

// ------------------------------------------------------------------ cluster

struct ClusterOpts {
    std::string data, schema, config;
    ScorerArgs scorer;
    std::string sim_in, ids_in;
    std::string linkage = "average";
    double cut = 0.0;
    double stop_below = 0.0;
    std::string init;
    std::string dendrogram_out, newick_out, partition_out, sim_out, sim_ids_out;
    std::string manifest;
};

void run_cluster(const ClusterOpts& o, const CLI::App* sub) {
    if (o.dendrogram_out.empty() && o.partition_out.empty() && o.sim_out.empty())
        throw UsageError("cluster writes nothing: give --dendrogram-out, --partition-out "
                         "or --sim-out");

    SimilarityMatrix sim;
    std::optional<AnyModel> model;
    TransformConfig cfg = transform_from(o.config);
    if (!o.sim_in.empty()) {
        if (o.ids_in.empty()) throw UsageError("--sim-in needs --ids-in");
        sim = SimilarityMatrix::load_binary(resolve_path(o.sim_in),
                                            read_id_list_csv(resolve_path(o.ids_in)));
    } else {
        o.scorer.require_one();
        CrimeDataset ds = load_ds(resolve_path(o.data), resolve_path(o.schema));
        if (o.scorer.has_model()) {
            model = load_model_json(resolve_path(o.scorer.model_path));
            sim = pairwise_similarities(ds, scorer_of(*model), cfg);
        } else {
            sim = similarity_from_external(
                ds.ids(), ExternalScores::from_csv(resolve_path(o.scorer.external_path)));
        }
    }

    std::optional<Partition> init;
    if (!o.init.empty()) init = read_partition_csv(resolve_path(o.init));
    std::optional<double> stop;
    if (sub->count("--stop-below")) stop = o.stop_below;

    LinkageMethod method = linkage_from_string(o.linkage);
    Dendrogram dend = agglomerate(sim, method, init, stop);

    ManifestBuilder mb("cluster");
    mb.in("data", o.data.empty() ? "" : resolve_path(o.data));
    mb.in("schema", o.schema.empty() ? "" : resolve_path(o.schema));
    mb.in("model", o.scorer.has_model() ? resolve_path(o.scorer.model_path) : "");
    mb.in("external", o.scorer.has_external() ? resolve_path(o.scorer.external_path) : "");
    mb.in("sim", o.sim_in.empty() ? "" : resolve_path(o.sim_in));
    mb.in("init", o.init.empty() ? "" : resolve_path(o.init));
    json eff{{"linkage", o.linkage},
             {"transform", json::parse(transform_config_to_json(cfg))}};
    if (sub->count("--cut")) eff["cut"] = o.cut;
    if (stop) eff["stop_below"] = *stop;
    mb.config_json = eff.dump();
    mb.seed = cfg.rng_seed;
    mb.override_path = resolve_path(o.manifest);

    if (!o.dendrogram_out.empty()) {
        write_text_file(resolve_path(o.dendrogram_out), dend.to_json());
        mb.out("dendrogram", resolve_path(o.dendrogram_out));
    }
    if (!o.newick_out.empty()) {
        write_text_file(resolve_path(o.newick_out), dend.to_newick());
        mb.out("newick", resolve_path(o.newick_out));
    }
    size_t n_clusters = 0;
    if (!o.partition_out.empty()) {
        if (!sub->count("--cut"))
            throw UsageError("--partition-out needs --cut <threshold>");
        Partition part = cut_dendrogram(dend, o.cut);
        n_clusters = cluster_count(part);
        write_partition_csv(resolve_path(o.partition_out), part);
        mb.out("partition", resolve_path(o.partition_out));
    }
    if (!o.sim_out.empty()) {
        sim.save_binary(resolve_path(o.sim_out));
        mb.out("sim", resolve_path(o.sim_out));
        if (!o.sim_ids_out.empty()) {
            write_id_list_csv(resolve_path(o.sim_ids_out), sim.ids());
            mb.out("sim_ids", resolve_path(o.sim_ids_out));
        }
    }
    mb.write();
    json summary{{"n", sim.n()}, {"n_merges", dend.merges.size()}};
    if (!o.partition_out.empty()) summary["n_clusters"] = n_clusters;
    std::cout << summary.dump() << "\n";
}

// --------------------------------------------------------------------- cut

struct CutOpts {
    std::string dendrogram, out;
    double threshold = 0.0;
    std::string manifest;
};

void run_cut(const CutOpts& o, const CLI::App*) {
    Dendrogram dend = Dendrogram::from_json(read_text_file(resolve_path(o.dendrogram)));
    Partition part = cut_dendrogram(dend, o.threshold);
    write_partition_csv(resolve_path(o.out), part);

    ManifestBuilder mb("cut");
    mb.in("dendrogram", resolve_path(o.dendrogram));
    mb.config_json = json{{"threshold", o.threshold}}.dump();
    mb.override_path = resolve_path(o.manifest);
    mb.out("partition", resolve_path(o.out));
    mb.write();
    std::cout << json{{"n_clusters", cluster_count(part)}}.dump() << "\n";
}

// ---------------------------------------------------------------- identify

struct IdentifyOpts {
    std::string data, schema, config, out;
    ScorerArgs scorer;
    std::vector<std::string> series;
    std::string series_file;
    std::string linkage = "single";
    size_t top = 50;
    bool unsolved_only = false;
    bool sequential = false;
    double absorb_threshold = 0.0;
    size_t max_steps = 25;
    std::string manifest;
};

void run_identify(const IdentifyOpts& o, const CLI::App* sub) {
    o.scorer.require_one();
    std::vector<std::string> series = o.series;
    if (!o.series_file.empty()) {
        auto more = read_id_list_csv(resolve_path(o.series_file));
        series.insert(series.end(), more.begin(), more.end());
    }
    if (series.empty()) throw UsageError("identify needs --series or --series-file");
    if (o.sequential && !sub->count("--absorb-threshold"))
        throw UsageError("--sequential needs --absorb-threshold");

    CrimeDataset ds = load_ds(resolve_path(o.data), resolve_path(o.schema));
    TransformConfig cfg = transform_from(o.config);

    std::optional<AnyModel> model;
    std::optional<ExternalScores> ext;
    PairScoreFn fn;
    if (o.scorer.has_model()) {
        model = load_model_json(resolve_path(o.scorer.model_path));
        fn = make_pair_score_fn(scorer_of(*model), cfg);
    } else {
        ext = ExternalScores::from_csv(resolve_path(o.scorer.external_path));
        fn = make_pair_score_fn(*ext);
    }
    LinkageMethod method = linkage_from_string(o.linkage);

    ManifestBuilder mb("identify");
    mb.in("data", resolve_path(o.data));
    mb.in("schema", o.schema.empty() ? "" : resolve_path(o.schema));
    mb.in("model", o.scorer.has_model() ? resolve_path(o.scorer.model_path) : "");
    mb.in("external", o.scorer.has_external() ? resolve_path(o.scorer.external_path) : "");
    json eff{{"linkage", o.linkage},
             {"series", series},
             {"top", o.top},
             {"unsolved_only", o.unsolved_only},
             {"sequential", o.sequential},
             {"transform", json::parse(transform_config_to_json(cfg))}};
    if (o.sequential) {
        eff["absorb_threshold"] = o.absorb_threshold;
        eff["max_steps"] = o.max_steps;
    }
    mb.config_json = eff.dump();
    mb.seed = cfg.rng_seed;
    mb.override_path = resolve_path(o.manifest);

    if (o.sequential) {
        auto steps = identify_series_sequential(ds, series, method, fn, o.absorb_threshold,
                                                o.max_steps, o.unsolved_only);
        std::vector<std::vector<std::string>> rows;
        for (size_t i = 0; i < steps.size(); ++i)
            rows.push_back({std::to_string(i + 1), steps[i].id, fmt_full(steps[i].score)});
        write_csv_file(resolve_path(o.out), {"step", "id", "score"}, rows);
        mb.out("steps", resolve_path(o.out));
        mb.write();
        std::cout << json{{"n_absorbed", steps.size()}}.dump() << "\n";
    } else {
        auto ranked = identify_series(ds, series, method, fn, o.top, o.unsolved_only);
        write_ranked_csv(resolve_path(o.out), ranked);
        mb.out("ranked", resolve_path(o.out));
        mb.write();
        std::cout << json{{"n_ranked", ranked.size()}}.dump() << "\n";
    }
}

// -------------------------------------------------------------- prioritize

struct PrioritizeOpts {
    std::string query_data, query_schema, history_data, history_schema, config, out;
    ScorerArgs scorer;
    std::vector<std::string> query;
    std::string linkage = "single";
    std::string manifest;
};

void run_prioritize(const PrioritizeOpts& o, const CLI::App*) {
    o.scorer.require_one();
    if (o.query.empty()) throw UsageError("prioritize needs --query <crime ids>");
    CrimeDataset query_ds = load_ds(resolve_path(o.query_data), resolve_path(o.query_schema));
    CrimeDataset history_ds =
        load_ds(resolve_path(o.history_data), resolve_path(o.history_schema));
    TransformConfig cfg = transform_from(o.config);
    LinkageMethod method = linkage_from_string(o.linkage);

    auto history = series_from_solved(history_ds);

    std::optional<AnyModel> model;
    std::optional<ExternalScores> ext;
    NaiveBayesModel stripped;
    PairScoreFn fn;
    if (o.scorer.has_model()) {
        model = load_model_json(resolve_path(o.scorer.model_path));
        fn = make_pair_score_fn(suspect_scorer(*model, stripped), cfg);
    } else {
        ext = ExternalScores::from_csv(resolve_path(o.scorer.external_path));
        fn = make_pair_score_fn(*ext);
    }

    auto ranked = prioritize_suspects(query_ds, o.query, history_ds, history, method, fn);
    write_ranked_csv(resolve_path(o.out), ranked);

    ManifestBuilder mb("prioritize");
    mb.in("query_data", resolve_path(o.query_data));
    mb.in("history_data", resolve_path(o.history_data));
    mb.in("model", o.scorer.has_model() ? resolve_path(o.scorer.model_path) : "");
    mb.in("external", o.scorer.has_external() ? resolve_path(o.scorer.external_path) : "");
    mb.config_json = json{{"linkage", o.linkage},
                          {"query", o.query},
                          {"transform", json::parse(transform_config_to_json(cfg))}}
                         .dump();
    mb.seed = cfg.rng_seed;
    mb.override_path = resolve_path(o.manifest);
    mb.out("ranked", resolve_path(o.out));
    mb.write();
    std::cout << json{{"n_series", ranked.size()}}.dump() << "\n";
}

// ---------------------------------------------------------------- eval-roc

struct EvalRocOpts {
    std::string scores, roc_out, precision_out, summary_out;
    std::string manifest;
};

void run_eval_roc(const EvalRocOpts& o, const CLI::App*) {
    auto scored = read_scored_pairs_csv(resolve_path(o.scores));
    RocCurve roc = roc_curve(scored);

    ManifestBuilder mb("eval-roc");
    mb.in("scores", resolve_path(o.scores));
    mb.override_path = resolve_path(o.manifest);
    if (!o.roc_out.empty()) {
        write_roc_csv(resolve_path(o.roc_out), roc);
        mb.out("roc", resolve_path(o.roc_out));
    }
    if (!o.precision_out.empty()) {
        write_precision_csv(resolve_path(o.precision_out), precision_curve(scored));
        mb.out("precision", resolve_path(o.precision_out));
    }
    json summary{{"auc", roc.auc},
                 {"n_linked", roc.n_linked},
                 {"n_unlinked", roc.n_unlinked}};
    if (!o.summary_out.empty()) {
        write_text_file(resolve_path(o.summary_out), summary.dump(2) + "\n");
        mb.out("summary", resolve_path(o.summary_out));
    }
    mb.write();
    std::cout << summary.dump() << "\n";
}

// ------------------------------------------------------------- eval-series

struct EvalSeriesOpts {
    std::string data, schema, config, out;
    ScorerArgs scorer;
    std::vector<std::string> methods;
    std::vector<size_t> ranks;
    std::string manifest;
};

void run_eval_series(const EvalSeriesOpts& o, const CLI::App*) {
    o.scorer.require_one();
    CrimeDataset ds = load_ds(resolve_path(o.data), resolve_path(o.schema));
    TransformConfig cfg = transform_from(o.config);

    std::vector<CrimeSeries> series;
    for (auto& s : series_from_solved(ds))
        if (s.crime_ids.size() >= 2) series.push_back(std::move(s));
    if (series.empty()) throw DataError("no solved series of length >= 2 to evaluate");

    std::optional<AnyModel> model;
    std::optional<ExternalScores> ext;
    PairScoreFn fn;
    if (o.scorer.has_model()) {
        model = load_model_json(resolve_path(o.scorer.model_path));
        fn = make_pair_score_fn(scorer_of(*model), cfg);
    } else {
        ext = ExternalScores::from_csv(resolve_path(o.scorer.external_path));
        fn = make_pair_score_fn(*ext);
    }

    std::vector<size_t> ranks = o.ranks.empty() ? std::vector<size_t>{1, 5, 10, 25, 50}
                                                : o.ranks;
    auto rows = series_id_eval_multi(series, ds, parse_methods(o.methods), fn, ranks);
    write_series_id_eval_csv(resolve_path(o.out), rows);

    ManifestBuilder mb("eval-series");
    mb.in("data", resolve_path(o.data));
    mb.in("schema", o.schema.empty() ? "" : resolve_path(o.schema));
    mb.in("model", o.scorer.has_model() ? resolve_path(o.scorer.model_path) : "");
    mb.in("external", o.scorer.has_external() ? resolve_path(o.scorer.external_path) : "");
    mb.config_json = json{{"methods", o.methods},
                          {"ranks", ranks},
                          {"transform", json::parse(transform_config_to_json(cfg))}}
                         .dump();
    mb.seed = cfg.rng_seed;
    mb.override_path = resolve_path(o.manifest);
    mb.out("rows", resolve_path(o.out));
    mb.write();
    std::cout << json{{"n_series", series.size()}, {"n_rows", rows.size()}}.dump() << "\n";
}

// ------------------------------------------------------------ eval-cluster

struct EvalClusterOpts {
    std::string dendrogram, data, schema, out;
    std::vector<double> thresholds;
    std::string manifest;
};

void run_eval_cluster(const EvalClusterOpts& o, const CLI::App*) {
    Dendrogram dend = Dendrogram::from_json(read_text_file(resolve_path(o.dendrogram)));
    CrimeDataset ds = load_ds(resolve_path(o.data), resolve_path(o.schema));
    std::vector<double> thresholds =
        o.thresholds.empty() ? std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}
                             : o.thresholds;

    PairLabeler labeler(ds, dend.leaves);
    ClusterEval ev = clustering_eval(dend, labeler, thresholds);
    write_cluster_eval_csv(resolve_path(o.out), ev);

    ManifestBuilder mb("eval-cluster");
    mb.in("dendrogram", resolve_path(o.dendrogram));
    mb.in("data", resolve_path(o.data));
    mb.config_json = json{{"thresholds", thresholds}}.dump();
    mb.override_path = resolve_path(o.manifest);
    mb.out("rows", resolve_path(o.out));
    mb.write();
    std::cout << json{{"n_rows", ev.rows.size()},
                      {"linked_pairs", ev.totals.linked},
                      {"unlinked_pairs", ev.totals.unlinked},
                      {"unknown_pairs", ev.totals.unknown}}
                     .dump()
              << "\n";
}

// ----------------------------------------------------------- eval-suspects

struct EvalSuspectsOpts {
    std::string query_data, query_schema, history_data, history_schema, config, out;
    ScorerArgs scorer;
    std::string linkage = "single";
    std::vector<double> thresholds;
    std::string manifest;
};

void run_eval_suspects(const EvalSuspectsOpts& o, const CLI::App*) {
    o.scorer.require_one();
    CrimeDataset query_ds = load_ds(resolve_path(o.query_data), resolve_path(o.query_schema));
    CrimeDataset history_ds =
        load_ds(resolve_path(o.history_data), resolve_path(o.history_schema));
    TransformConfig cfg = transform_from(o.config);

    auto queries = series_from_solved(query_ds);
    auto history = series_from_solved(history_ds);
    if (queries.empty()) throw DataError("no solved query series");

    std::optional<AnyModel> model;
    std::optional<ExternalScores> ext;
    NaiveBayesModel stripped;
    PairScoreFn fn;
    if (o.scorer.has_model()) {
        model = load_model_json(resolve_path(o.scorer.model_path));
        fn = make_pair_score_fn(suspect_scorer(*model, stripped), cfg);
    } else {
        ext = ExternalScores::from_csv(resolve_path(o.scorer.external_path));
        fn = make_pair_score_fn(*ext);
    }

    std::vector<double> thresholds =
        o.thresholds.empty() ? std::vector<double>{0, 1, 2, 3, 4, 5} : o.thresholds;
    SuspectEval ev = suspect_eval(queries, query_ds, history, history_ds,
                                  linkage_from_string(o.linkage), fn, thresholds);
    write_suspect_eval_csv(resolve_path(o.out), ev);

    ManifestBuilder mb("eval-suspects");
    mb.in("query_data", resolve_path(o.query_data));
    mb.in("history_data", resolve_path(o.history_data));
    mb.in("model", o.scorer.has_model() ? resolve_path(o.scorer.model_path) : "");
    mb.in("external", o.scorer.has_external() ? resolve_path(o.scorer.external_path) : "");
    mb.config_json = json{{"linkage", o.linkage},
                          {"thresholds", thresholds},
                          {"transform", json::parse(transform_config_to_json(cfg))}}
                         .dump();
    mb.seed = cfg.rng_seed;
    mb.override_path = resolve_path(o.manifest);
    mb.out("rows", resolve_path(o.out));
    mb.write();
    std::cout << json{{"coverage", ev.coverage},
                      {"n_queries", ev.n_queries},
                      {"n_covered", ev.n_covered}}
                     .dump()
              << "\n";
}

// ---------------------------------------------------------------- pipeline

struct PipelineOpts {
    std::string config, out_dir;
    uint64_t seed = 0;
    std::string manifest;
};

void run_pipeline_cmd(const PipelineOpts& o, const CLI::App* sub) {
    PipelineConfig cfg;
    if (!o.config.empty()) cfg = pipeline_config_from_json(read_config_text(o.config));
    if (sub->count("--seed")) cfg.generator.seed = o.seed;

    PipelineResult res = run_pipeline(cfg, resolve_path(o.out_dir));

    ManifestBuilder mb("pipeline");
    mb.in("config", o.config.empty() ? "" : resolve_path(o.config));
    mb.config_json = pipeline_config_to_json(cfg);
    mb.seed = cfg.generator.seed;
    mb.override_path = o.manifest.empty()
                           ? (fs::path(resolve_path(o.out_dir)) / "run_manifest.json").string()
                           : resolve_path(o.manifest);
    mb.out("out_dir", resolve_path(o.out_dir));
    mb.write();
    std::cout << json{{"out_dir", res.out_dir},
                      {"test_auc", res.test_auc},
                      {"n_train", res.n_train},
                      {"n_test", res.n_test},
                      {"n_artifacts", res.artifacts.size()}}
                     .dump()
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crime linkage toolkit: Bayes factor pair scoring, series clustering, "
                 "and evaluation"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.footer("Relative paths resolve under $LINKAGE_DATA_DIR when it is set.");

    auto methods_check = CLI::IsMember({"single", "complete", "average"});

    // simulate
    auto sim = std::make_shared<SimulateOpts>();
    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic labeled dataset");
    sim_cmd->add_option("--config", sim->config, "generator config json");
    sim_cmd->add_option("--seed", sim->seed, "override the generator seed");
    sim_cmd->add_option("--n-offenders", sim->n_offenders, "override the offender count");
    sim_cmd->add_option("--unsolved-fraction", sim->unsolved_fraction,
                        "erase offender labels at this rate")
        ->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--erase-seed", sim->erase_seed, "seed for label erasure");
    sim_cmd->add_option("--out", sim->out, "dataset csv")->required();
    sim_cmd->add_option("--truth", sim->truth, "full offender labels sidecar csv");
    sim_cmd->add_option("--schema-out", sim->schema_out, "ingest schema json");
    sim_cmd->add_option("--manifest", sim->manifest, "run manifest path");
    sim_cmd->callback([sim, sim_cmd] { run_simulate(*sim, sim_cmd); });

    // split
    auto spl = std::make_shared<SplitOpts>();
    auto* spl_cmd = app.add_subcommand("split", "temporal train/test split");
    spl_cmd->add_option("--data", spl->data, "dataset csv")->required();
    spl_cmd->add_option("--schema", spl->schema, "ingest schema json");
    spl_cmd->add_option("--cutoff", spl->cutoff, "cutoff in hours");
    spl_cmd->add_option("--fraction", spl->fraction, "cutoff as a span fraction");
    spl_cmd->add_option("--train-out", spl->train_out, "train csv")->required();
    spl_cmd->add_option("--test-out", spl->test_out, "test csv")->required();
    spl_cmd->add_option("--report", spl->report, "split report json");
    spl_cmd->add_option("--manifest", spl->manifest, "run manifest path");
    spl_cmd->callback([spl, spl_cmd] { run_split(*spl, spl_cmd); });

    // transform
    auto trf = std::make_shared<TransformOpts>();
    auto* trf_cmd =
        app.add_subcommand("transform", "pairwise evidence vectors for crime pairs");
    trf_cmd->add_option("--data", trf->data, "dataset csv")->required();
    trf_cmd->add_option("--schema", trf->schema, "ingest schema json");
    trf_cmd->add_option("--pairs", trf->pairs, "pairs csv (default: all pairs)");
    trf_cmd->add_option("--config", trf->config, "transform config json");
    trf_cmd->add_option("--mc-draws", trf->mc_draws, "monte carlo draws per censored pair");
    trf_cmd->add_option("--seed", trf->seed, "transform rng seed");
    trf_cmd->add_option("--out", trf->out, "evidence csv")->required();
    trf_cmd->add_option("--manifest", trf->manifest, "run manifest path");
    trf_cmd->callback([trf, trf_cmd] { run_transform(*trf, trf_cmd); });

    // pairs
    auto prs = std::make_shared<PairsOpts>();
    auto* prs_cmd = app.add_subcommand("pairs", "weighted linked/unlinked training pairs");
    prs_cmd->add_option("--data", prs->data, "labeled dataset csv")->required();
    prs_cmd->add_option("--schema", prs->schema, "ingest schema json");
    prs_cmd->add_option("--config", prs->config, "pair sampling config json");
    prs_cmd->add_option("--k", prs->k, "unlinked draws per crime group");
    prs_cmd->add_option("--max-days", prs->max_days, "elapsed-time window in days");
    prs_cmd->add_option("--seed", prs->seed, "sampling seed");
    prs_cmd->add_option("--transform-config", prs->transform_config,
                        "transform config json (for the time window)");
    prs_cmd->add_option("--out", prs->out, "pairs csv")->required();
    prs_cmd->add_option("--manifest", prs->manifest, "run manifest path");
    prs_cmd->callback([prs, prs_cmd] { run_pairs(*prs, prs_cmd); });

    // fit
    auto fit = std::make_shared<FitOpts>();
    auto* fit_cmd = app.add_subcommand("fit", "fit a pairwise Bayes factor model");
    fit_cmd->add_option("--data", fit->data, "labeled dataset csv")->required();
    fit_cmd->add_option("--schema", fit->schema, "ingest schema json");
    fit_cmd->add_option("--pairs", fit->pairs, "training pairs csv")->required();
    fit_cmd->add_option("--config", fit->config,
                        "fit config json (transform/bins/alpha/missing/...)");
    fit_cmd->add_option("--model", fit->model, "model family")
        ->check(CLI::IsMember({"naive-bayes", "logistic"}));
    fit_cmd->add_option("--bins", fit->bins, "bins per numeric variable");
    fit_cmd->add_option("--alpha", fit->alpha, "additive smoothing per bin");
    fit_cmd->add_option("--missing", fit->missing, "logistic missing policy")
        ->check(CLI::IsMember({"strict", "mean_impute"}));
    fit_cmd->add_option("--max-iters", fit->max_iters, "logistic iteration cap");
    fit_cmd->add_option("--tol", fit->tol, "logistic convergence tolerance");
    fit_cmd->add_option("--out", fit->out, "model json")->required();
    fit_cmd->add_option("--components-out", fit->components_out,
                        "naive bayes component curves csv");
    fit_cmd->add_option("--manifest", fit->manifest, "run manifest path");
    fit_cmd->callback([fit, fit_cmd] { run_fit(*fit, fit_cmd); });

    // score
    auto sco = std::make_shared<ScoreOpts>();
    auto* sco_cmd = app.add_subcommand("score", "log Bayes factors for crime pairs");
    sco_cmd->add_option("--data", sco->data, "dataset csv")->required();
    sco_cmd->add_option("--schema", sco->schema, "ingest schema json");
    sco->scorer.add_to(sco_cmd);
    sco_cmd->add_option("--pairs", sco->pairs, "pairs csv");
    sco_cmd->add_flag("--all-pairs", sco->use_all_pairs, "score every unordered pair");
    sco_cmd->add_option("--config", sco->config, "transform config json");
    sco_cmd->add_option("--out", sco->out, "scored pairs csv")->required();
    sco_cmd->add_option("--manifest", sco->manifest, "run manifest path");
    sco_cmd->callback([sco, sco_cmd] { run_score(*sco, sco_cmd); });

    // cluster
    auto clu = std::make_shared<ClusterOpts>();
    auto* clu_cmd =
        app.add_subcommand("cluster", "agglomerate crimes into a dendrogram/partition");
    clu_cmd->add_option("--data", clu->data, "dataset csv");
    clu_cmd->add_option("--schema", clu->schema, "ingest schema json");
    clu->scorer.add_to(clu_cmd, false);
    clu_cmd->add_option("--sim-in", clu->sim_in, "similarity matrix (lnk1)");
    clu_cmd->add_option("--ids-in", clu->ids_in, "id list csv for --sim-in");
    clu_cmd->add_option("--config", clu->config, "transform config json");
    clu_cmd->add_option("--linkage", clu->linkage, "linkage method")->check(methods_check);
    clu_cmd->add_option("--cut", clu->cut, "partition threshold (log BF)");
    clu_cmd->add_option("--stop-below", clu->stop_below, "stop merging below this score");
    clu_cmd->add_option("--init", clu->init, "must-link partition csv");
    clu_cmd->add_option("--dendrogram-out", clu->dendrogram_out, "dendrogram json");
    clu_cmd->add_option("--newick-out", clu->newick_out, "dendrogram newick");
    clu_cmd->add_option("--partition-out", clu->partition_out, "partition csv (needs --cut)");
    clu_cmd->add_option("--sim-out", clu->sim_out, "similarity matrix out (lnk1)");
    clu_cmd->add_option("--sim-ids-out", clu->sim_ids_out, "id list csv for --sim-out");
    clu_cmd->add_option("--manifest", clu->manifest, "run manifest path");
    clu_cmd->callback([clu, clu_cmd] { run_cluster(*clu, clu_cmd); });

    // cut
    auto cut = std::make_shared<CutOpts>();
    auto* cut_cmd = app.add_subcommand("cut", "partition an existing dendrogram");
    cut_cmd->add_option("--dendrogram", cut->dendrogram, "dendrogram json")->required();
    cut_cmd->add_option("--threshold", cut->threshold, "log BF threshold")->required();
    cut_cmd->add_option("--out", cut->out, "partition csv")->required();
    cut_cmd->add_option("--manifest", cut->manifest, "run manifest path");
    cut_cmd->callback([cut, cut_cmd] { run_cut(*cut, cut_cmd); });

    // identify
    auto idf = std::make_shared<IdentifyOpts>();
    auto* idf_cmd =
        app.add_subcommand("identify", "rank candidate crimes against a known series");
    idf_cmd->add_option("--data", idf->data, "dataset csv")->required();
    idf_cmd->add_option("--schema", idf->schema, "ingest schema json");
    idf->scorer.add_to(idf_cmd);
    idf_cmd->add_option("--series", idf->series, "comma separated crime ids")
        ->delimiter(',');
    idf_cmd->add_option("--series-file", idf->series_file, "csv with an `id` column");
    idf_cmd->add_option("--config", idf->config, "transform config json");
    idf_cmd->add_option("--linkage", idf->linkage, "linkage method")->check(methods_check);
    idf_cmd->add_option("--top", idf->top, "keep the top R candidates (0 = all)");
    idf_cmd->add_flag("--unsolved-only", idf->unsolved_only, "restrict pool to unsolved");
    idf_cmd->add_flag("--sequential", idf->sequential, "absorb candidates one at a time");
    idf_cmd->add_option("--absorb-threshold", idf->absorb_threshold,
                        "minimum score to absorb (sequential)");
    idf_cmd->add_option("--max-steps", idf->max_steps, "absorption cap (sequential)");
    idf_cmd->add_option("--out", idf->out, "output csv")->required();
    idf_cmd->add_option("--manifest", idf->manifest, "run manifest path");
    idf_cmd->callback([idf, idf_cmd] { run_identify(*idf, idf_cmd); });

    // prioritize
    auto pri = std::make_shared<PrioritizeOpts>();
    auto* pri_cmd =
        app.add_subcommand("prioritize", "rank known offender series against query crimes");
    pri_cmd->add_option("--query-data", pri->query_data, "query dataset csv")->required();
    pri_cmd->add_option("--query-schema", pri->query_schema, "query ingest schema json");
    pri_cmd->add_option("--query", pri->query, "comma separated query crime ids")
        ->delimiter(',')
        ->required();
    pri_cmd->add_option("--history-data", pri->history_data, "solved history dataset csv")
        ->required();
    pri_cmd->add_option("--history-schema", pri->history_schema, "history ingest schema json");
    pri->scorer.add_to(pri_cmd);
    pri_cmd->add_option("--config", pri->config, "transform config json");
    pri_cmd->add_option("--linkage", pri->linkage, "linkage method")->check(methods_check);
    pri_cmd->add_option("--out", pri->out, "ranked series csv")->required();
    pri_cmd->add_option("--manifest", pri->manifest, "run manifest path");
    pri_cmd->callback([pri, pri_cmd] { run_prioritize(*pri, pri_cmd); });

    // eval-roc
    auto ero = std::make_shared<EvalRocOpts>();
    auto* ero_cmd = app.add_subcommand("eval-roc", "ROC/AUC and precision-vs-workload");
    ero_cmd->add_option("--scores", ero->scores, "scored pairs csv")->required();
    ero_cmd->add_option("--roc-out", ero->roc_out, "roc points csv");
    ero_cmd->add_option("--precision-out", ero->precision_out, "precision points csv");
    ero_cmd->add_option("--summary-out", ero->summary_out, "summary json");
    ero_cmd->add_option("--manifest", ero->manifest, "run manifest path");
    ero_cmd->callback([ero, ero_cmd] { run_eval_roc(*ero, ero_cmd); });

    // eval-series
    auto ese = std::make_shared<EvalSeriesOpts>();
    auto* ese_cmd =
        app.add_subcommand("eval-series", "hold-one-out series identification accuracy");
    ese_cmd->add_option("--data", ese->data, "labeled dataset csv")->required();
    ese_cmd->add_option("--schema", ese->schema, "ingest schema json");
    ese->scorer.add_to(ese_cmd);
    ese_cmd->add_option("--methods", ese->methods, "linkage methods")
        ->delimiter(',')
        ->check(methods_check);
    ese_cmd->add_option("--ranks", ese->ranks, "list lengths R")->delimiter(',');
    ese_cmd->add_option("--config", ese->config, "transform config json");
    ese_cmd->add_option("--out", ese->out, "result rows csv")->required();
    ese_cmd->add_option("--manifest", ese->manifest, "run manifest path");
    ese_cmd->callback([ese, ese_cmd] { run_eval_series(*ese, ese_cmd); });

    // eval-cluster
    auto ecl = std::make_shared<EvalClusterOpts>();
    auto* ecl_cmd =
        app.add_subcommand("eval-cluster", "partition quality across cut thresholds");
    ecl_cmd->add_option("--dendrogram", ecl->dendrogram, "dendrogram json")->required();
    ecl_cmd->add_option("--data", ecl->data, "labeled dataset csv")->required();
    ecl_cmd->add_option("--schema", ecl->schema, "ingest schema json");
    ecl_cmd->add_option("--thresholds", ecl->thresholds, "cut thresholds")->delimiter(',');
    ecl_cmd->add_option("--out", ecl->out, "result rows csv")->required();
    ecl_cmd->add_option("--manifest", ecl->manifest, "run manifest path");
    ecl_cmd->callback([ecl, ecl_cmd] { run_eval_cluster(*ecl, ecl_cmd); });

    // eval-suspects
    auto esu = std::make_shared<EvalSuspectsOpts>();
    auto* esu_cmd = app.add_subcommand("eval-suspects", "suspect list coverage and accuracy");
    esu_cmd->add_option("--query-data", esu->query_data, "labeled query dataset csv")
        ->required();
    esu_cmd->add_option("--query-schema", esu->query_schema, "query ingest schema json");
    esu_cmd->add_option("--history-data", esu->history_data, "solved history dataset csv")
        ->required();
    esu_cmd->add_option("--history-schema", esu->history_schema, "history ingest schema json");
    esu->scorer.add_to(esu_cmd);
    esu_cmd->add_option("--linkage", esu->linkage, "linkage method")->check(methods_check);
    esu_cmd->add_option("--thresholds", esu->thresholds, "score thresholds")->delimiter(',');
    esu_cmd->add_option("--config", esu->config, "transform config json");
    esu_cmd->add_option("--out", esu->out, "result rows csv")->required();
    esu_cmd->add_option("--manifest", esu->manifest, "run manifest path");
    esu_cmd->callback([esu, esu_cmd] { run_eval_suspects(*esu, esu_cmd); });

    // pipeline
    auto pip = std::make_shared<PipelineOpts>();
    auto* pip_cmd =
        app.add_subcommand("pipeline", "simulate, fit, score, cluster and evaluate end to end");
    pip_cmd->add_option("--config", pip->config, "pipeline config json");
    pip_cmd->add_option("--seed", pip->seed, "override the generator seed");
    pip_cmd->add_option("--out-dir", pip->out_dir, "artifact directory")->required();
    pip_cmd->add_option("--manifest", pip->manifest, "run manifest path");
    pip_cmd->callback([pip, pip_cmd] { run_pipeline_cmd(*pip, pip_cmd); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << json{{"error", "data"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
