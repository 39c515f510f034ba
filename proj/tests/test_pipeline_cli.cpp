#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "linkage/bf_models.hpp"
#include "linkage/csv.hpp"
#include "linkage/linkage_cluster.hpp"
#include "linkage/series_tasks.hpp"
#include "linkage/training_pairs.hpp"
#include "support.hpp"

using namespace linkage;
using nlohmann::json;

namespace {

testsup::TempDir& dir() {
    static testsup::TempDir td;
    return td;
}

struct CliOut {
    int code = -1;
    std::string out;
    std::string err;
};

CliOut run_cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    std::string base = dir().file("cli_" + std::to_string(counter++));
    std::string cmd = env + (env.empty() ? "" : " ") + LINKAGE_CLI_PATH + " " + args + " >" +
                      base + ".out 2>" + base + ".err";
    int rc = std::system(cmd.c_str());
    CliOut r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = read_text_file(base + ".out");
    r.err = read_text_file(base + ".err");
    return r;
}

json parse_line(const std::string& s) { return json::parse(s); }

}  // namespace

TEST_CASE("version, usage errors, and json error lines") {
    CHECK(run_cli("--version").code == 0);
    CHECK(run_cli("--version").out.find("0.1.0") != std::string::npos);

    CliOut none = run_cli("");
    CHECK(none.code == 2);
    CHECK(none.err.find("\"error\":\"usage\"") != std::string::npos);

    CHECK(run_cli("frobnicate").code == 2);

    CliOut noout = run_cli("simulate");
    CHECK(noout.code == 2);
    CHECK(noout.err.find("--out is required") != std::string::npos);

    CliOut missing =
        run_cli("score --data /nonexistent.csv --all-pairs --external /also-missing.csv --out " +
                dir().file("x.csv"));
    CHECK(missing.code == 1);
    CHECK(missing.err.find("\"error\":\"data\"") != std::string::npos);
}

TEST_CASE("subcommand chain end to end") {
    auto& td = dir();
    auto f = [&](const std::string& name) { return td.file(name); };

    write_text_file(f("gen.json"),
                    "{\"n_offenders\": 40, \"seed\": 3, \"sigma_series_km\": 2.0,\n"
                    " \"series_length_pmf\": {\"2\": 0.5, \"3\": 0.5}}\n");
    write_text_file(f("fit.json"), "{\"transform\": {\"mc_draws\": 64}}\n");

    // simulate
    CliOut sim = run_cli("simulate --config " + f("gen.json") + " --out " + f("data.csv") +
                         " --truth " + f("truth.csv") + " --schema-out " + f("schema.json"));
    REQUIRE(sim.code == 0);
    json sim_j = parse_line(sim.out);
    CHECK(sim_j["seed"] == 3);
    CHECK(sim_j["n_crimes"].get<size_t>() >= 80);

    json man = json::parse(read_text_file(f("data.csv.manifest.json")));
    CHECK(man["tool"] == "linkage");
    CHECK(man["subcommand"] == "simulate");
    CHECK(man["seed"] == 3);
    CHECK(man["outputs"].size() == 3);
    CHECK(man["inputs"]["config"]["fnv1a"].is_string());

    IngestSchema schema = load_ingest_schema(f("schema.json"));
    CrimeDataset full = load_dataset(f("data.csv"), schema).dataset;
    CHECK(full.size() == sim_j["n_crimes"].get<size_t>());

    // split
    CliOut spl = run_cli("split --data " + f("data.csv") + " --schema " + f("schema.json") +
                         " --fraction 0.7 --train-out " + f("train.csv") + " --test-out " +
                         f("test.csv") + " --report " + f("report.json"));
    REQUIRE(spl.code == 0);
    json spl_j = json::parse(spl.out);
    CrimeDataset test_ds = load_dataset(f("test.csv"), schema).dataset;
    CHECK(test_ds.size() == spl_j["n_test"].get<size_t>());
    CHECK(spl_j["n_train"].get<size_t>() + test_ds.size() == full.size());
    CHECK(run_cli("split --data " + f("data.csv") + " --train-out " + f("t1.csv") +
                  " --test-out " + f("t2.csv"))
              .code == 2);  // needs --cutoff or --fraction

    // pairs
    CliOut prs = run_cli("pairs --data " + f("train.csv") + " --schema " + f("schema.json") +
                         " --k 3 --seed 1 --out " + f("pairs.csv"));
    REQUIRE(prs.code == 0);
    json prs_j = parse_line(prs.out);
    CHECK(prs_j["n_pairs"].get<size_t>() ==
          prs_j["n_linked"].get<size_t>() + prs_j["n_unlinked"].get<size_t>());
    CHECK(read_pairs_csv(f("pairs.csv")).size() == prs_j["n_pairs"].get<size_t>());

    // fit, both families
    CliOut fit = run_cli("fit --data " + f("train.csv") + " --schema " + f("schema.json") +
                         " --pairs " + f("pairs.csv") + " --config " + f("fit.json") +
                         " --bins 6 --out " + f("model.json") + " --components-out " +
                         f("components.csv"));
    REQUIRE(fit.code == 0);
    AnyModel model = load_model_json(f("model.json"));
    CHECK(std::holds_alternative<NaiveBayesModel>(model));
    CHECK(std::filesystem::exists(f("components.csv")));
    CHECK(std::filesystem::exists(f("model.json.manifest.json")));

    CliOut lfit = run_cli("fit --data " + f("train.csv") + " --schema " + f("schema.json") +
                          " --pairs " + f("pairs.csv") + " --config " + f("fit.json") +
                          " --model logistic --missing mean_impute --out " + f("logistic.json"));
    REQUIRE(lfit.code == 0);
    CHECK(lfit.err.find("converged in") != std::string::npos);
    CHECK(std::holds_alternative<LogisticModel>(load_model_json(f("logistic.json"))));

    // score all test pairs
    CliOut sco = run_cli("score --data " + f("test.csv") + " --schema " + f("schema.json") +
                         " --model " + f("model.json") + " --all-pairs --out " + f("scores.csv"));
    REQUIRE(sco.code == 0);
    size_t n = test_ds.size();
    CHECK(parse_line(sco.out)["n_pairs"].get<size_t>() == n * (n - 1) / 2);
    CHECK(run_cli("score --data " + f("test.csv") + " --model " + f("model.json") + " --out " +
                  f("x.csv"))
              .code == 2);  // neither --pairs nor --all-pairs
    CHECK(run_cli("score --data " + f("test.csv") + " --model " + f("model.json") +
                  " --external " + f("scores.csv") + " --all-pairs --out " + f("x.csv"))
              .code == 2);  // mutually exclusive scorers

    // external scores reproduce the model scores byte for byte
    CliOut ext = run_cli("score --data " + f("test.csv") + " --schema " + f("schema.json") +
                         " --external " + f("scores.csv") + " --all-pairs --out " +
                         f("scores_ext.csv"));
    REQUIRE(ext.code == 0);
    CHECK(read_text_file(f("scores_ext.csv")) == read_text_file(f("scores.csv")));

    // eval-roc
    CliOut roc = run_cli("eval-roc --scores " + f("scores.csv") + " --roc-out " + f("roc.csv") +
                         " --precision-out " + f("precision.csv") + " --summary-out " +
                         f("roc_summary.json"));
    REQUIRE(roc.code == 0);
    double auc = parse_line(roc.out)["auc"].get<double>();
    CHECK(auc > 0.5);
    CHECK(auc <= 1.0);
    CHECK(json::parse(read_text_file(f("roc_summary.json")))["auc"].get<double>() == auc);

    // cluster + cut
    CliOut clu = run_cli("cluster --data " + f("test.csv") + " --schema " + f("schema.json") +
                         " --model " + f("model.json") + " --linkage average --cut 2" +
                         " --dendrogram-out " + f("dend.json") + " --newick-out " + f("dend.nwk") +
                         " --partition-out " + f("partition.csv") + " --sim-out " + f("sim.lnk1") +
                         " --sim-ids-out " + f("sim_ids.csv"));
    REQUIRE(clu.code == 0);
    json clu_j = parse_line(clu.out);
    CHECK(clu_j["n"].get<size_t>() == n);
    CHECK(clu_j["n_merges"].get<size_t>() == n - 1);
    CHECK(clu_j["n_clusters"].get<size_t>() >= 1);
    CHECK(run_cli("cluster --data " + f("test.csv") + " --model " + f("model.json")).code == 2);

    CliOut cut = run_cli("cut --dendrogram " + f("dend.json") + " --threshold 2 --out " +
                         f("partition2.csv"));
    REQUIRE(cut.code == 0);
    CHECK(read_text_file(f("partition2.csv")) == read_text_file(f("partition.csv")));
    CHECK(parse_line(cut.out)["n_clusters"] == clu_j["n_clusters"]);

    // clustering straight from the saved similarity matrix
    CliOut clu2 = run_cli("cluster --sim-in " + f("sim.lnk1") + " --ids-in " + f("sim_ids.csv") +
                          " --linkage average --dendrogram-out " + f("dend2.json"));
    REQUIRE(clu2.code == 0);
    Dendrogram d1 = Dendrogram::from_json(read_text_file(f("dend.json")));
    Dendrogram d2 = Dendrogram::from_json(read_text_file(f("dend2.json")));
    CHECK(d1.leaves == d2.leaves);
    CHECK(d1.merges.size() == d2.merges.size());
    CHECK(run_cli("cluster --sim-in " + f("sim.lnk1") + " --dendrogram-out " + f("x.json"))
              .code == 2);  // --sim-in needs --ids-in

    // identify: first solved test series with two crimes
    auto series = series_from_solved(test_ds);
    std::vector<std::string> seed_ids;
    for (const auto& s : series)
        if (s.crime_ids.size() >= 2) {
            seed_ids = {s.crime_ids[0], s.crime_ids[1]};
            break;
        }
    REQUIRE(!seed_ids.empty());
    CliOut idf = run_cli("identify --data " + f("test.csv") + " --schema " + f("schema.json") +
                         " --model " + f("model.json") + " --series " + seed_ids[0] + "," +
                         seed_ids[1] + " --top 5 --out " + f("ranked.csv"));
    REQUIRE(idf.code == 0);
    CsvTable ranked = read_csv_file(f("ranked.csv"));
    CHECK(ranked.header == std::vector<std::string>{"rank", "id", "score"});
    CHECK(ranked.rows.size() == parse_line(idf.out)["n_ranked"].get<size_t>());
    CHECK(ranked.rows.size() <= 5);
    CHECK(run_cli("identify --data " + f("test.csv") + " --model " + f("model.json") +
                  " --series a,b --sequential --out " + f("x.csv"))
              .code == 2);  // sequential without --absorb-threshold

    // prioritize: NB models shed the temporal component with a note
    CliOut pri = run_cli("prioritize --query-data " + f("test.csv") + " --query-schema " +
                         f("schema.json") + " --query " + seed_ids[0] + " --history-data " +
                         f("train.csv") + " --history-schema " + f("schema.json") + " --model " +
                         f("model.json") + " --out " + f("suspects.csv"));
    REQUIRE(pri.code == 0);
    CHECK(pri.err.find("dropped the temporal component") != std::string::npos);
    CHECK(read_csv_file(f("suspects.csv")).rows.size() ==
          parse_line(pri.out)["n_series"].get<size_t>());

    // eval-series / eval-cluster / eval-suspects
    CliOut ese = run_cli("eval-series --data " + f("test.csv") + " --schema " + f("schema.json") +
                         " --model " + f("model.json") + " --methods single --ranks 1,5 --out " +
                         f("series_eval.csv"));
    REQUIRE(ese.code == 0);
    CHECK(parse_line(ese.out)["n_rows"].get<size_t>() == 16);  // 1 method x 2 pools x 4 strata x 2
    CHECK(read_csv_file(f("series_eval.csv")).rows.size() == 16);

    CliOut ecl = run_cli("eval-cluster --dendrogram " + f("dend.json") + " --data " +
                         f("test.csv") + " --schema " + f("schema.json") +
                         " --thresholds 0,2,4 --out " + f("cluster_eval.csv"));
    REQUIRE(ecl.code == 0);
    CHECK(parse_line(ecl.out)["n_rows"].get<size_t>() == 3);
    CHECK(read_csv_file(f("cluster_eval.csv")).rows.size() == 4);  // + total row

    CliOut esu = run_cli("eval-suspects --query-data " + f("test.csv") + " --query-schema " +
                         f("schema.json") + " --history-data " + f("train.csv") +
                         " --history-schema " + f("schema.json") + " --model " + f("model.json") +
                         " --thresholds 0,2 --out " + f("suspect_eval.csv"));
    REQUIRE(esu.code == 0);
    CHECK(esu.err.find("dropped the temporal component") != std::string::npos);
    json esu_j = parse_line(esu.out);
    CHECK(esu_j["coverage"].get<double>() >= 0.0);
    CHECK(esu_j["coverage"].get<double>() <= 1.0);
    CHECK(read_csv_file(f("suspect_eval.csv")).rows.size() == 2);
}

TEST_CASE("relative paths resolve under LINKAGE_DATA_DIR") {
    std::string dd = dir().file("datadir");
    std::filesystem::create_directories(dd);
    CliOut r = run_cli("simulate --seed 1 --n-offenders 5 --out rel.csv",
                       "LINKAGE_DATA_DIR=" + dd);
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::exists(dd + "/rel.csv"));
    CHECK(std::filesystem::exists(dd + "/rel.csv.manifest.json"));
}

TEST_CASE("pipeline reruns are byte identical") {
    auto& td = dir();
    write_text_file(
        td.file("pipe.json"),
        "{\"generator\": {\"n_offenders\": 60, \"seed\": 11,\n"
        "  \"series_length_pmf\": {\"1\": 0.4, \"2\": 0.25, \"3\": 0.15, \"4\": 0.1, "
        "\"5\": 0.1}},\n"
        " \"transform\": {\"mc_draws\": 60},\n"
        " \"cluster_thresholds\": [0, 2, 4, 6], \"ranks\": [1, 5],\n"
        " \"suspect_thresholds\": [0, 2]}\n");

    CliOut r1 = run_cli("pipeline --config " + td.file("pipe.json") + " --out-dir " +
                        td.file("run1"));
    REQUIRE(r1.code == 0);
    json r1_j = parse_line(r1.out);
    CHECK(r1_j["n_artifacts"].get<size_t>() >= 25);

    CliOut r2 = run_cli("pipeline --config " + td.file("pipe.json") + " --out-dir " +
                        td.file("run2"));
    REQUIRE(r2.code == 0);

    json man = json::parse(read_text_file(td.file("run1") + "/manifest.json"));
    std::vector<std::string> names;
    for (const auto& [name, meta] : man["artifacts"].items()) names.push_back(name);
    names.push_back("manifest.json");
    CHECK(names.size() == r1_j["n_artifacts"].get<size_t>());
    for (const auto& name : names) {
        CAPTURE(name);
        CHECK(read_text_file(td.file("run1") + "/" + name) ==
              read_text_file(td.file("run2") + "/" + name));
    }
    for (const char* key : {"dataset.csv", "model.json", "test_scores.csv", "roc.csv",
                            "series_id_eval.csv", "suspect_eval.csv", "summary.json"})
        CHECK(man["artifacts"].contains(key));

    json summary = json::parse(read_text_file(td.file("run1") + "/summary.json"));
    CHECK(summary["test_auc"].get<double>() == r1_j["test_auc"].get<double>());
    // the run manifest records the invocation (out_dir differs per run)
    CHECK(std::filesystem::exists(td.file("run1") + "/run_manifest.json"));

    // a seed override flows through to the generator
    CliOut r3 = run_cli("pipeline --config " + td.file("pipe.json") + " --seed 12 --out-dir " +
                        td.file("run3"));
    REQUIRE(r3.code == 0);
    CHECK(read_text_file(td.file("run3") + "/dataset.csv") !=
          read_text_file(td.file("run1") + "/dataset.csv"));
}
