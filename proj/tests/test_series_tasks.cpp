#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "linkage/csv.hpp"
#include "linkage/series_tasks.hpp"
#include "support.hpp"

using namespace linkage;
using testsup::rec;

namespace {

// symmetric lookup-table scorer; throws on pairs the test forgot to define
PairScoreFn table_fn(std::map<std::pair<std::string, std::string>, double> table) {
    return [table = std::move(table)](const CrimeRecord& a, const CrimeRecord& b) {
        auto key = a.id < b.id ? std::make_pair(a.id, b.id) : std::make_pair(b.id, a.id);
        return table.at(key);
    };
}

}  // namespace

TEST_CASE("series from solved crimes") {
    CrimeDataset ds = make_dataset(
        {
            rec("b", 0, 0, 0, 0, {"o2", "o1"}),
            rec("a", 0, 0, 0, 0, {"o1"}),
            rec("c", 0, 0, 0, 0, {"o2"}),
            rec("d", 0, 0, 0, 0, {"o2"}),
            rec("e", 0, 0, 0, 0),
        },
        {});
    auto series = series_from_solved(ds);
    REQUIRE(series.size() == 2);
    CHECK(series[0].series_id == "o1");
    CHECK(series[0].crime_ids == std::vector<std::string>{"a", "b"});
    CHECK(series[0].offender_ids == std::vector<std::string>{"o1"});
    CHECK(series[1].series_id == "o2");
    CHECK(series[1].crime_ids == std::vector<std::string>{"b", "c", "d"});
}

TEST_CASE("combining cross scores") {
    std::vector<double> s = {1.0, 5.0, 3.0};
    CHECK(combine_cross_scores(s, LinkageMethod::Single) == 5.0);
    CHECK(combine_cross_scores(s, LinkageMethod::Complete) == 1.0);
    CHECK(combine_cross_scores(s, LinkageMethod::Average) == 3.0);
    CHECK_THROWS_AS(combine_cross_scores({}, LinkageMethod::Single), DataError);
}

TEST_CASE("series similarity over a lookup table") {
    CrimeDataset ds = make_dataset(
        {rec("a", 0, 0, 0, 0), rec("b", 0, 0, 0, 0), rec("c", 0, 0, 0, 0)}, {});
    auto fn = table_fn({{{"a", "c"}, 1.0}, {{"b", "c"}, 4.0}});
    CHECK(series_similarity(ds, {"a", "b"}, "c", LinkageMethod::Single, fn) == 4.0);
    CHECK(series_similarity(ds, {"a", "b"}, "c", LinkageMethod::Complete, fn) == 1.0);
    CHECK(series_similarity(ds, {"a", "b"}, "c", LinkageMethod::Average, fn) == 2.5);
    CHECK_THROWS_AS(series_similarity(ds, {}, "c", LinkageMethod::Single, fn), DataError);
    CHECK_THROWS_AS(series_similarity(ds, {"a"}, "zzz", LinkageMethod::Single, fn), DataError);
}

TEST_CASE("identify_series ranks candidates with pessimistic ties") {
    CrimeDataset ds = make_dataset(
        {
            rec("s1", 0, 0, 0, 0, {"oo"}),
            rec("s2", 0, 0, 0, 0, {"oo"}),
            rec("c", 0, 0, 0, 0),
            rec("d", 0, 0, 0, 0),
            rec("e", 0, 0, 0, 0),
            rec("f", 0, 0, 0, 0, {"other"}),  // solved candidate
        },
        {});
    // average-linkage scores: c -> 5, d -> 5 (tie), e -> 2, f -> 7
    auto fn = table_fn({
        {{"c", "s1"}, 4.0}, {{"c", "s2"}, 6.0},
        {{"d", "s1"}, 5.0}, {{"d", "s2"}, 5.0},
        {{"e", "s1"}, 2.0}, {{"e", "s2"}, 2.0},
        {{"f", "s1"}, 7.0}, {{"f", "s2"}, 7.0},
    });

    auto all = identify_series(ds, {"s1", "s2"}, LinkageMethod::Average, fn, 0, false);
    REQUIRE(all.size() == 4);
    CHECK(all[0].id == "f");
    CHECK(all[0].rank == 1);
    CHECK(all[1].id == "c");  // tie block c,d sorted by id
    CHECK(all[1].rank == 3);  // pessimistic: both take the block's last slot
    CHECK(all[2].id == "d");
    CHECK(all[2].rank == 3);
    CHECK(all[3].id == "e");
    CHECK(all[3].rank == 4);

    auto unsolved = identify_series(ds, {"s1", "s2"}, LinkageMethod::Average, fn, 0, true);
    REQUIRE(unsolved.size() == 3);  // f is solved
    CHECK(unsolved[0].id == "c");
    CHECK(unsolved[0].rank == 2);

    auto top2 = identify_series(ds, {"s1", "s2"}, LinkageMethod::Average, fn, 2, false);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].id == "f");
    CHECK(top2[1].id == "c");

    // every crime in the series -> empty candidate pool
    CHECK_THROWS_AS(
        identify_series(ds, {"s1", "s2", "c", "d", "e", "f"}, LinkageMethod::Single, fn, 0, false),
        DataError);
}

TEST_CASE("sequential identification absorbs and reshapes") {
    CrimeDataset ds = make_dataset(
        {rec("a", 0, 0, 0, 0, {"oo"}), rec("c", 0, 0, 0, 0), rec("d", 0, 0, 0, 0)}, {});
    auto fn = table_fn({{{"a", "c"}, 2.0}, {{"a", "d"}, 0.5}, {{"c", "d"}, 5.0}});

    // single linkage: absorbing c lifts d above the threshold
    auto steps = identify_series_sequential(ds, {"a"}, LinkageMethod::Single, fn, 1.0, 10, false);
    REQUIRE(steps.size() == 2);
    CHECK(steps[0].id == "c");
    CHECK(steps[0].score == 2.0);
    CHECK(steps[1].id == "d");
    CHECK(steps[1].score == 5.0);

    // complete linkage: d stays below threshold after c joins
    auto cmpl = identify_series_sequential(ds, {"a"}, LinkageMethod::Complete, fn, 1.0, 10, false);
    REQUIRE(cmpl.size() == 1);
    CHECK(cmpl[0].id == "c");

    // max_steps caps the growth
    auto capped = identify_series_sequential(ds, {"a"}, LinkageMethod::Single, fn, 1.0, 1, false);
    CHECK(capped.size() == 1);

    // nothing clears an impossible threshold
    auto none = identify_series_sequential(ds, {"a"}, LinkageMethod::Single, fn, 100.0, 10, false);
    CHECK(none.empty());
}

TEST_CASE("prioritize suspects ranks history series") {
    CrimeDataset query = make_dataset({rec("q1", 0, 0, 0, 0), rec("q2", 0, 0, 0, 0)}, {});
    CrimeDataset hist = make_dataset(
        {
            rec("h1", 0, 0, 0, 0, {"A"}),
            rec("h2", 0, 0, 0, 0, {"A"}),
            rec("h3", 0, 0, 0, 0, {"B"}),
        },
        {});
    auto series = series_from_solved(hist);
    REQUIRE(series.size() == 2);

    auto fn = table_fn({
        {{"h1", "q1"}, 1.0}, {{"h2", "q1"}, 3.0},
        {{"h1", "q2"}, 2.0}, {{"h2", "q2"}, 0.0},
        {{"h3", "q1"}, 2.5}, {{"h3", "q2"}, 2.5},
    });

    auto by_single =
        prioritize_suspects(query, {"q1", "q2"}, hist, series, LinkageMethod::Single, fn);
    REQUIRE(by_single.size() == 2);
    CHECK(by_single[0].id == "A");   // max 3.0 beats 2.5
    CHECK(by_single[0].score == 3.0);
    CHECK(by_single[0].rank == 1);
    CHECK(by_single[1].id == "B");

    auto by_complete =
        prioritize_suspects(query, {"q1", "q2"}, hist, series, LinkageMethod::Complete, fn);
    CHECK(by_complete[0].id == "B");  // min 2.5 beats 0.0
    CHECK(by_complete[1].id == "A");

    auto by_avg =
        prioritize_suspects(query, {"q1"}, hist, series, LinkageMethod::Average, fn);
    CHECK(by_avg[0].id == "B");
    CHECK(by_avg[0].score == 2.5);
    CHECK(by_avg[1].score == 2.0);  // mean of 1.0, 3.0
}

TEST_CASE("suspect prioritization refuses an elapsed-time component") {
    CrimeDataset query = make_dataset({rec("q1", 0, 0, 0, 0)}, {});
    CrimeDataset hist = make_dataset({rec("h1", 0, 0, 0, 0, {"A"})}, {});
    auto series = series_from_solved(hist);

    TransformConfig cfg;
    EvidenceSchema with_t{{kSpatialVar, kTemporalVar},
                          {EvidenceKind::Numeric, EvidenceKind::Numeric}};
    std::vector<WeightedPair> pairs = {{"x1", "y1", LinkLabel::Linked, 1.0},
                                       {"x2", "y2", LinkLabel::Linked, 1.0},
                                       {"x3", "y3", LinkLabel::Unlinked, 1.0},
                                       {"x4", "y4", LinkLabel::Unlinked, 1.0}};
    std::vector<EvidenceVector> ev = {{0.1, 0.2}, {0.5, 4.0}, {3.0, 2.0}, {9.0, 8.0}};
    NbFitOptions opt;
    opt.n_bins = 2;
    NaiveBayesModel m = fit_naive_bayes(pairs, ev, with_t, opt);

    CHECK_THROWS_AS(
        prioritize_suspects(query, {"q1"}, hist, series, LinkageMethod::Single, m, cfg),
        DataError);
    // dropping the component makes the same model acceptable
    auto ranked = prioritize_suspects(query, {"q1"}, hist, series, LinkageMethod::Single,
                                      m.without(kTemporalVar), cfg);
    CHECK(ranked.size() == 1);
}

TEST_CASE("scorer overload matches the equivalent score fn") {
    CrimeDataset ds = make_dataset(
        {
            rec("a", 0, 0, 10, 10, {"oo"}),
            rec("b", 1, 1, 30, 30, {"oo"}),
            rec("c", 5, 5, 200, 200),
            rec("d", 0.5, 0.5, 40, 40),
        },
        {});
    TransformConfig cfg;
    EvidenceSchema schema = evidence_schema(ds, cfg);
    std::vector<WeightedPair> pairs = {{"a", "b", LinkLabel::Linked, 1.0},
                                       {"a", "d", LinkLabel::Linked, 1.0},
                                       {"a", "c", LinkLabel::Unlinked, 1.0},
                                       {"b", "c", LinkLabel::Unlinked, 1.0}};
    std::vector<EvidenceVector> ev;
    for (const auto& p : pairs)
        ev.push_back(make_evidence(ds.at(p.id_a), ds.at(p.id_b), cfg, schema));
    NbFitOptions opt;
    opt.n_bins = 2;
    NaiveBayesModel m = fit_naive_bayes(pairs, ev, schema, opt);

    auto via_scorer = identify_series(ds, {"a", "b"}, LinkageMethod::Average, m, cfg, 0, false);
    auto via_fn = identify_series(ds, {"a", "b"}, LinkageMethod::Average,
                                  make_pair_score_fn(m, cfg), 0, false);
    REQUIRE(via_scorer.size() == via_fn.size());
    for (size_t i = 0; i < via_fn.size(); ++i) {
        CHECK(via_scorer[i].id == via_fn[i].id);
        CHECK(via_scorer[i].score == via_fn[i].score);
        CHECK(via_scorer[i].rank == via_fn[i].rank);
    }
}

TEST_CASE("external scores drive series tasks") {
    CrimeDataset ds = make_dataset(
        {rec("a", 0, 0, 0, 0, {"oo"}), rec("c", 0, 0, 0, 0), rec("d", 0, 0, 0, 0)}, {});
    ExternalScores es;
    es.scores[{"a", "c"}] = 3.0;
    es.scores[{"a", "d"}] = -1.0;
    auto fn = make_pair_score_fn(es);
    auto ranked = identify_series(ds, {"a"}, LinkageMethod::Single, fn, 0, false);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].id == "c");
    CHECK(ranked[0].score == 3.0);

    ExternalScores sparse;
    sparse.scores[{"a", "c"}] = 3.0;  // (a,d) undefined
    CHECK_THROWS_AS(
        identify_series(ds, {"a"}, LinkageMethod::Single, make_pair_score_fn(sparse), 0, false),
        DataError);
}

TEST_CASE("ranked csv layout") {
    std::vector<RankedItem> items = {{"x", 2.5, 1}, {"y", 1.0, 2}};
    testsup::TempDir td;
    write_ranked_csv(td.file("r.csv"), items);
    CsvTable t = read_csv_file(td.file("r.csv"));
    CHECK(t.header == std::vector<std::string>{"rank", "id", "score"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "1");
    CHECK(t.rows[0][1] == "x");
    CHECK(parse_double(t.rows[0][2], "score") == 2.5);
}
