#include "linkage/series_tasks.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "linkage/csv.hpp"

namespace linkage {

std::vector<CrimeSeries> series_from_solved(const CrimeDataset& ds) {
    std::map<std::string, std::vector<std::string>> by_offender;
    for (const auto& r : ds.records)
        for (const auto& off : r.offenders) by_offender[off].push_back(r.id);
    std::vector<CrimeSeries> out;
    out.reserve(by_offender.size());
    for (auto& [off, ids] : by_offender) {
        std::sort(ids.begin(), ids.end());
        out.push_back({off, std::move(ids), {off}});
    }
    return out;
}

double combine_cross_scores(const std::vector<double>& scores, LinkageMethod method) {
    if (scores.empty()) throw DataError("no cross scores to combine");
    switch (method) {
        case LinkageMethod::Single: return *std::max_element(scores.begin(), scores.end());
        case LinkageMethod::Complete: return *std::min_element(scores.begin(), scores.end());
        default: {
            double s = 0.0;
            for (double v : scores) s += v;
            return s / double(scores.size());
        }
    }
}

PairScoreFn make_pair_score_fn(const PairScorer& scorer, const TransformConfig& cfg) {
    return [s = &scorer, cfg](const CrimeRecord& a, const CrimeRecord& b) {
        return score_record_pair(a, b, *s, cfg);
    };
}

PairScoreFn make_pair_score_fn(const ExternalScores& scores) {
    return [s = &scores](const CrimeRecord& a, const CrimeRecord& b) {
        auto v = s->get(a.id, b.id);
        if (!v) throw DataError("no external score for pair " + a.id + "," + b.id);
        return *v;
    };
}

double series_similarity_records(const std::vector<const CrimeRecord*>& a,
                                 const std::vector<const CrimeRecord*>& b, LinkageMethod method,
                                 const PairScoreFn& score) {
    if (a.empty() || b.empty()) throw DataError("series similarity needs non-empty groups");
    std::vector<double> scores;
    scores.reserve(a.size() * b.size());
    for (const CrimeRecord* ra : a)
        for (const CrimeRecord* rb : b) {
            if (ra->id == rb->id)
                throw DataError("series overlap: crime " + ra->id + " on both sides");
            scores.push_back(score(*ra, *rb));
        }
    return combine_cross_scores(scores, method);
}

double series_similarity_records(const std::vector<const CrimeRecord*>& a,
                                 const std::vector<const CrimeRecord*>& b, LinkageMethod method,
                                 const PairScorer& scorer, const TransformConfig& cfg) {
    return series_similarity_records(a, b, method, make_pair_score_fn(scorer, cfg));
}

namespace {

std::vector<const CrimeRecord*> records_of(const CrimeDataset& ds,
                                           const std::vector<std::string>& ids) {
    if (ids.empty()) throw DataError("empty crime id list");
    std::set<std::string> seen;
    std::vector<const CrimeRecord*> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        if (!seen.insert(id).second) throw DataError("duplicate crime id in series: " + id);
        out.push_back(&ds.at(id));
    }
    return out;
}

void rank_items(std::vector<RankedItem>& items) {
    std::sort(items.begin(), items.end(), [](const RankedItem& x, const RankedItem& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.id < y.id;
    });
    // pessimistic ranks: every member of a tie block takes the block's last position
    size_t i = 0;
    while (i < items.size()) {
        size_t j = i;
        while (j + 1 < items.size() && items[j + 1].score == items[i].score) ++j;
        for (size_t k = i; k <= j; ++k) items[k].rank = j + 1;
        i = j + 1;
    }
}

}  // namespace

double series_similarity(const CrimeDataset& ds, const std::vector<std::string>& series_ids,
                         const std::string& candidate_id, LinkageMethod method,
                         const PairScoreFn& score) {
    auto series = records_of(ds, series_ids);
    auto cand = records_of(ds, {candidate_id});
    return series_similarity_records(series, cand, method, score);
}

double series_similarity(const CrimeDataset& ds, const std::vector<std::string>& series_ids,
                         const std::string& candidate_id, LinkageMethod method,
                         const PairScorer& scorer, const TransformConfig& cfg) {
    return series_similarity(ds, series_ids, candidate_id, method,
                             make_pair_score_fn(scorer, cfg));
}

std::vector<RankedItem> identify_series(const CrimeDataset& ds,
                                        const std::vector<std::string>& series_ids,
                                        LinkageMethod method, const PairScoreFn& score,
                                        size_t top_r, bool unsolved_only) {
    auto series = records_of(ds, series_ids);
    std::set<std::string> in_series(series_ids.begin(), series_ids.end());
    std::vector<const CrimeRecord*> pool;
    for (const auto& r : ds.records) {
        if (in_series.count(r.id)) continue;
        if (unsolved_only && r.solved()) continue;
        pool.push_back(&r);
    }
    if (pool.empty()) throw DataError("no candidate crimes outside the series");

    std::vector<RankedItem> items(pool.size());
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 8)
    for (int64_t i = 0; i < int64_t(pool.size()); ++i) {
        try {
            double s = series_similarity_records(series, {pool[i]}, method, score);
            items[i] = {pool[i]->id, s, 0};
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);

    rank_items(items);
    if (top_r > 0 && items.size() > top_r) items.resize(top_r);
    return items;
}

std::vector<RankedItem> identify_series(const CrimeDataset& ds,
                                        const std::vector<std::string>& series_ids,
                                        LinkageMethod method, const PairScorer& scorer,
                                        const TransformConfig& cfg, size_t top_r,
                                        bool unsolved_only) {
    return identify_series(ds, series_ids, method, make_pair_score_fn(scorer, cfg), top_r,
                           unsolved_only);
}

std::vector<AbsorbStep> identify_series_sequential(const CrimeDataset& ds,
                                                   std::vector<std::string> series_ids,
                                                   LinkageMethod method, const PairScoreFn& score,
                                                   double absorb_threshold, size_t max_steps,
                                                   bool unsolved_only) {
    std::vector<AbsorbStep> steps;
    for (size_t step = 0; step < max_steps; ++step) {
        std::vector<RankedItem> ranked;
        try {
            ranked = identify_series(ds, series_ids, method, score, 1, unsolved_only);
        } catch (const DataError&) {
            break;  // pool exhausted
        }
        if (ranked.empty() || ranked[0].score < absorb_threshold) break;
        steps.push_back({ranked[0].id, ranked[0].score});
        series_ids.push_back(ranked[0].id);
    }
    return steps;
}

std::vector<AbsorbStep> identify_series_sequential(const CrimeDataset& ds,
                                                   std::vector<std::string> series_ids,
                                                   LinkageMethod method, const PairScorer& scorer,
                                                   const TransformConfig& cfg,
                                                   double absorb_threshold, size_t max_steps,
                                                   bool unsolved_only) {
    return identify_series_sequential(ds, std::move(series_ids), method,
                                      make_pair_score_fn(scorer, cfg), absorb_threshold,
                                      max_steps, unsolved_only);
}

std::vector<RankedItem> prioritize_suspects(const CrimeDataset& query_ds,
                                            const std::vector<std::string>& query_ids,
                                            const CrimeDataset& history_ds,
                                            const std::vector<CrimeSeries>& history,
                                            LinkageMethod method, const PairScoreFn& score) {
    if (history.empty()) throw DataError("no history series to rank");
    auto query = records_of(query_ds, query_ids);
    std::set<std::string> qset(query_ids.begin(), query_ids.end());

    std::vector<RankedItem> items(history.size());
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 4)
    for (int64_t i = 0; i < int64_t(history.size()); ++i) {
        try {
            for (const auto& id : history[i].crime_ids)
                if (qset.count(id))
                    throw DataError("history series " + history[i].series_id +
                                    " overlaps the query crime " + id);
            auto hist = records_of(history_ds, history[i].crime_ids);
            double s = series_similarity_records(query, hist, method, score);
            items[i] = {history[i].series_id, s, 0};
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);

    rank_items(items);
    return items;
}

std::vector<RankedItem> prioritize_suspects(const CrimeDataset& query_ds,
                                            const std::vector<std::string>& query_ids,
                                            const CrimeDataset& history_ds,
                                            const std::vector<CrimeSeries>& history,
                                            LinkageMethod method, const PairScorer& scorer,
                                            const TransformConfig& cfg) {
    if (scorer.schema().index_of(kTemporalVar))
        throw DataError("prioritize_suspects requires a scorer without the temporal component");
    return prioritize_suspects(query_ds, query_ids, history_ds, history, method,
                               make_pair_score_fn(scorer, cfg));
}

void write_ranked_csv(const std::string& path, const std::vector<RankedItem>& items) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(items.size());
    for (const auto& it : items)
        rows.push_back({std::to_string(it.rank), it.id, fmt_full(it.score)});
    write_csv_file(path, {"rank", "id", "score"}, rows);
}

}  // namespace linkage
