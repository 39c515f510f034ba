#include "linkage/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "linkage/csv.hpp"

namespace linkage {

void write_scored_pairs_csv(const std::string& path, const std::vector<ScoredPair>& scored) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(scored.size());
    for (const auto& s : scored)
        rows.push_back({s.id_a, s.id_b, fmt_full(s.score), link_label_to_string(s.label)});
    write_csv_file(path, {"id_a", "id_b", "score", "label"}, rows);
}

std::vector<ScoredPair> read_scored_pairs_csv(const std::string& path) {
    CsvTable t = read_csv_file(path);
    int ca = t.column("id_a"), cb = t.column("id_b");
    int cs = t.column("score"), cl = t.column("label");
    if (ca < 0 || cb < 0 || cs < 0 || cl < 0)
        throw DataError(path + ": scored pairs csv needs id_a,id_b,score,label");
    std::vector<ScoredPair> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        ScoredPair s;
        s.id_a = row[ca];
        s.id_b = row[cb];
        s.score = parse_double(row[cs], "score");
        s.label = link_label_from_string(row[cl]);
        out.push_back(std::move(s));
    }
    return out;
}

RocCurve roc_curve(const std::vector<ScoredPair>& scored) {
    std::vector<std::pair<double, bool>> known;  // score, is_linked
    for (const auto& s : scored) {
        if (s.label == LinkLabel::Unknown) continue;
        if (!std::isfinite(s.score)) throw DataError("non-finite score in roc input");
        known.emplace_back(s.score, s.label == LinkLabel::Linked);
    }
    RocCurve roc;
    for (const auto& [sc, is_linked] : known) {
        (void)sc;
        (is_linked ? roc.n_linked : roc.n_unlinked)++;
    }
    if (roc.n_linked == 0 || roc.n_unlinked == 0)
        throw DataError("roc needs both linked and unlinked pairs");

    std::sort(known.begin(), known.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    size_t tp = 0, fp = 0;
    double auc = 0.0;
    size_t i = 0;
    while (i < known.size()) {
        size_t j = i;
        while (j + 1 < known.size() && known[j + 1].first == known[i].first) ++j;
        for (size_t k = i; k <= j; ++k) (known[k].second ? tp : fp)++;
        double fpr = double(fp) / double(roc.n_unlinked);
        double tpr = double(tp) / double(roc.n_linked);
        const RocPoint& prev = roc.points.back();
        auc += (fpr - prev.fpr) * (tpr + prev.tpr) / 2.0;
        roc.points.push_back({known[i].first, fpr, tpr});
        i = j + 1;
    }
    roc.auc = auc;
    return roc;
}

std::vector<PrecisionPoint> precision_curve(const std::vector<ScoredPair>& scored) {
    std::vector<const ScoredPair*> known;
    for (const auto& s : scored)
        if (s.label != LinkLabel::Unknown) known.push_back(&s);
    if (known.empty()) throw DataError("precision curve needs labeled pairs");
    std::sort(known.begin(), known.end(), [](const ScoredPair* a, const ScoredPair* b) {
        if (a->score != b->score) return a->score > b->score;
        if (a->id_a != b->id_a) return a->id_a < b->id_a;
        return a->id_b < b->id_b;
    });
    std::vector<PrecisionPoint> out;
    out.reserve(known.size());
    size_t hits = 0;
    for (size_t k = 0; k < known.size(); ++k) {
        if (known[k]->label == LinkLabel::Linked) ++hits;
        out.push_back({k + 1, double(hits) / double(k + 1), hits});
    }
    return out;
}

double variation_of_information(const Partition& a, const Partition& b) {
    if (a.size() != b.size()) throw DataError("partitions cover different id sets");
    for (const auto& [id, cl] : a)
        if (!b.count(id)) throw DataError("partitions cover different id sets: " + id);
    size_t n = a.size();
    if (n == 0) return 0.0;

    std::map<int, size_t> ca, cb;
    std::map<std::pair<int, int>, size_t> joint;
    for (const auto& [id, cl] : a) {
        int clb = b.at(id);
        ca[cl]++;
        cb[clb]++;
        joint[{cl, clb}]++;
    }
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (const auto& [cl, cnt] : ca) {
        double p = double(cnt) / double(n);
        ha -= p * std::log(p);
    }
    for (const auto& [cl, cnt] : cb) {
        double p = double(cnt) / double(n);
        hb -= p * std::log(p);
    }
    for (const auto& [key, cnt] : joint) {
        double p = double(cnt) / double(n);
        double pa = double(ca[key.first]) / double(n);
        double pb = double(cb[key.second]) / double(n);
        mi += p * std::log(p / (pa * pb));
    }
    return std::max(0.0, ha + hb - 2.0 * mi);
}

PairLabeler::PairLabeler(const CrimeDataset& truth, std::vector<std::string> ids)
    : ids_(std::move(ids)) {
    offenders_.reserve(ids_.size());
    std::vector<std::string> solved_ids;
    for (const auto& id : ids_) {
        offenders_.push_back(truth.at(id).offenders);
        if (!offenders_.back().empty()) solved_ids.push_back(id);
    }
    if (!solved_ids.empty()) {
        CrimeGroups groups = build_offender_graph(filter_dataset(truth, solved_ids));
        for (const auto& [id, g] : groups.group_of) truth_[id] = int(g);
    }
}

LinkLabel PairLabeler::label(size_t i, size_t j) const {
    const auto& oa = offenders_[i];
    const auto& ob = offenders_[j];
    if (oa.empty() || ob.empty()) return LinkLabel::Unknown;
    // both sorted; linked iff they intersect
    size_t x = 0, y = 0;
    while (x < oa.size() && y < ob.size()) {
        if (oa[x] == ob[y]) return LinkLabel::Linked;
        if (oa[x] < ob[y]) ++x;
        else ++y;
    }
    return LinkLabel::Unlinked;
}

ClusterEval clustering_eval(const Dendrogram& dend, const PairLabeler& labeler,
                            const std::vector<double>& thresholds) {
    if (labeler.ids() != dend.leaves)
        throw DataError("labeler ids do not match dendrogram leaves");
    size_t n = dend.leaves.size();

    ClusterEval ev;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            switch (labeler.label(i, j)) {
                case LinkLabel::Linked: ev.totals.linked++; break;
                case LinkLabel::Unlinked: ev.totals.unlinked++; break;
                default: ev.totals.unknown++;
            }
        }
    ev.totals.all_pairs = n * (n - 1) / 2;

    const Partition& truth = labeler.truth_partition();
    std::vector<double> sorted_thr = thresholds;
    std::sort(sorted_thr.begin(), sorted_thr.end());

    for (double thr : sorted_thr) {
        Partition part = cut_dendrogram(dend, thr);
        ClusterEvalRow row;
        row.threshold = thr;

        std::map<int, std::vector<size_t>> clusters;  // cluster -> leaf indices
        for (size_t i = 0; i < n; ++i) clusters[part.at(dend.leaves[i])].push_back(i);
        row.n_clusters = clusters.size();
        for (const auto& [c, members] : clusters) {
            if (members.size() >= 2) row.n_multi++;
            for (size_t x = 0; x < members.size(); ++x)
                for (size_t y = x + 1; y < members.size(); ++y) {
                    switch (labeler.label(members[x], members[y])) {
                        case LinkLabel::Linked: row.linked_pairs++; break;
                        case LinkLabel::Unlinked: row.unlinked_pairs++; break;
                        default: row.unknown_pairs++;
                    }
                }
        }

        if (!truth.empty()) {
            Partition restricted;
            for (const auto& [id, g] : truth) restricted[id] = part.at(id);
            row.vi = variation_of_information(restricted, truth);
        }
        ev.rows.push_back(row);
    }
    return ev;
}

void write_cluster_eval_csv(const std::string& path, const ClusterEval& ev) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : ev.rows)
        rows.push_back({fmt_full(r.threshold), std::to_string(r.n_clusters),
                        std::to_string(r.n_multi), std::to_string(r.linked_pairs),
                        std::to_string(r.unlinked_pairs), std::to_string(r.unknown_pairs),
                        fmt_full(r.vi)});
    rows.push_back({"total", "", "", std::to_string(ev.totals.linked),
                    std::to_string(ev.totals.unlinked), std::to_string(ev.totals.unknown), ""});
    write_csv_file(path, {"threshold", "n_clusters", "n_multi", "linked_pairs", "unlinked_pairs",
                          "unknown_pairs", "vi"},
                   rows);
}

namespace {

// row-major left x right pair scores, parallel over cells
std::vector<double> cross_scores(const std::vector<const CrimeRecord*>& left,
                                 const std::vector<const CrimeRecord*>& right,
                                 const PairScoreFn& score) {
    std::vector<double> out(left.size() * right.size(), 0.0);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 32)
    for (int64_t t = 0; t < int64_t(out.size()); ++t) {
        try {
            size_t i = size_t(t) / right.size();
            size_t j = size_t(t) % right.size();
            out[size_t(t)] = score(*left[i], *right[j]);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

std::string stratum_of(size_t remaining) {
    if (remaining <= 1) return "1";
    if (remaining <= 3) return "2-3";
    return "4+";
}

}  // namespace

std::vector<SeriesIdEvalRow> series_id_eval_multi(const std::vector<CrimeSeries>& series,
                                                  const CrimeDataset& ds,
                                                  const std::vector<LinkageMethod>& methods,
                                                  const PairScoreFn& score,
                                                  const std::vector<size_t>& ranks) {
    if (series.empty()) throw DataError("series_id_eval needs at least one series");
    if (methods.empty()) throw DataError("series_id_eval needs a linkage method");
    std::vector<size_t> sorted_ranks = ranks;
    std::sort(sorted_ranks.begin(), sorted_ranks.end());
    sorted_ranks.erase(std::unique(sorted_ranks.begin(), sorted_ranks.end()),
                       sorted_ranks.end());
    if (sorted_ranks.empty() || sorted_ranks.front() == 0)
        throw DataError("ranks must be positive");

    struct SeriesResult {
        std::string stratum;
        // per method, per pool: fraction of members recovered within each rank cap
        std::vector<std::vector<double>> frac_all, frac_solved;
    };
    std::vector<SeriesResult> results;

    for (const auto& s : series) {
        size_t m = s.crime_ids.size();
        if (m < 2) throw DataError("series too short for hold-one-out: " + s.series_id);
        std::vector<const CrimeRecord*> members;
        std::set<std::string> member_set(s.crime_ids.begin(), s.crime_ids.end());
        if (member_set.size() != m) throw DataError("duplicate crime in series " + s.series_id);
        for (const auto& id : s.crime_ids) members.push_back(&ds.at(id));

        std::vector<const CrimeRecord*> others;
        for (const auto& r : ds.records)
            if (!member_set.count(r.id)) others.push_back(&r);

        // all member-vs-other and member-vs-member scores, computed once
        std::vector<double> mo = cross_scores(members, others, score);
        std::vector<double> mm(m * m, 0.0);
        {
            std::vector<std::pair<size_t, size_t>> idx;
            for (size_t i = 0; i < m; ++i)
                for (size_t j = i + 1; j < m; ++j) idx.emplace_back(i, j);
            std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 8)
            for (int64_t t = 0; t < int64_t(idx.size()); ++t) {
                try {
                    auto [i, j] = idx[size_t(t)];
                    double v = score(*members[i], *members[j]);
                    mm[i * m + j] = mm[j * m + i] = v;
                } catch (...) {
#pragma omp critical
                    if (!err) err = std::current_exception();
                }
            }
            if (err) std::rethrow_exception(err);
        }

        SeriesResult res;
        res.stratum = stratum_of(m - 1);
        res.frac_all.assign(methods.size(), std::vector<double>(sorted_ranks.size(), 0.0));
        res.frac_solved.assign(methods.size(), std::vector<double>(sorted_ranks.size(), 0.0));

        for (size_t mi = 0; mi < methods.size(); ++mi) {
            LinkageMethod method = methods[mi];
            for (size_t h = 0; h < m; ++h) {
                std::vector<double> sc_self;
                sc_self.reserve(m - 1);
                for (size_t i = 0; i < m; ++i)
                    if (i != h) sc_self.push_back(mm[i * m + h]);
                double held_score = combine_cross_scores(sc_self, method);

                size_t ahead_all = 0, ahead_solved = 0;
                std::vector<double> sc;
                for (size_t oi = 0; oi < others.size(); ++oi) {
                    sc.clear();
                    for (size_t i = 0; i < m; ++i)
                        if (i != h) sc.push_back(mo[i * others.size() + oi]);
                    if (combine_cross_scores(sc, method) >= held_score) {
                        ++ahead_all;
                        if (others[oi]->solved()) ++ahead_solved;
                    }
                }
                // pessimistic rank: the held-out crime sits after every
                // candidate scoring at least as high
                size_t rank_all = 1 + ahead_all;
                size_t rank_solved = 1 + ahead_solved;
                for (size_t ri = 0; ri < sorted_ranks.size(); ++ri) {
                    if (rank_all <= sorted_ranks[ri]) res.frac_all[mi][ri] += 1.0;
                    if (rank_solved <= sorted_ranks[ri]) res.frac_solved[mi][ri] += 1.0;
                }
            }
            for (auto& f : res.frac_all[mi]) f /= double(m);
            for (auto& f : res.frac_solved[mi]) f /= double(m);
        }
        results.push_back(std::move(res));
    }

    std::vector<SeriesIdEvalRow> rows;
    const std::vector<std::string> strata = {"all", "1", "2-3", "4+"};
    for (size_t mi = 0; mi < methods.size(); ++mi) {
        for (const std::string& pool : {std::string("all"), std::string("solved")}) {
            for (const auto& stratum : strata) {
                std::vector<const SeriesResult*> in;
                for (const auto& r : results)
                    if (stratum == "all" || r.stratum == stratum) in.push_back(&r);
                for (size_t ri = 0; ri < sorted_ranks.size(); ++ri) {
                    SeriesIdEvalRow row;
                    row.method = linkage_to_string(methods[mi]);
                    row.pool = pool;
                    row.stratum = stratum;
                    row.rank = sorted_ranks[ri];
                    row.n_series = in.size();
                    if (!in.empty()) {
                        double sum = 0.0;
                        for (const auto* r : in)
                            sum += pool == "all" ? r->frac_all[mi][ri] : r->frac_solved[mi][ri];
                        row.proportion = sum / double(in.size());
                    }
                    rows.push_back(row);
                }
            }
        }
    }
    return rows;
}

std::vector<SeriesIdEvalRow> series_id_eval_multi(const std::vector<CrimeSeries>& series,
                                                  const CrimeDataset& ds,
                                                  const std::vector<LinkageMethod>& methods,
                                                  const PairScorer& scorer,
                                                  const TransformConfig& cfg,
                                                  const std::vector<size_t>& ranks) {
    return series_id_eval_multi(series, ds, methods, make_pair_score_fn(scorer, cfg), ranks);
}

std::vector<SeriesIdEvalRow> series_id_eval(const std::vector<CrimeSeries>& series,
                                            const CrimeDataset& ds, LinkageMethod method,
                                            const PairScorer& scorer, const TransformConfig& cfg,
                                            const std::vector<size_t>& ranks) {
    return series_id_eval_multi(series, ds, {method}, scorer, cfg, ranks);
}

void write_series_id_eval_csv(const std::string& path,
                              const std::vector<SeriesIdEvalRow>& rows) {
    std::vector<std::vector<std::string>> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back({r.method, r.pool, r.stratum, std::to_string(r.rank),
                       fmt_full(r.proportion), std::to_string(r.n_series)});
    write_csv_file(path, {"method", "pool", "stratum", "rank", "proportion", "n_series"}, out);
}

double quantile_type7(const std::vector<double>& sorted_vals, double p) {
    if (sorted_vals.empty()) throw DataError("quantile of empty sample");
    if (p <= 0.0) return sorted_vals.front();
    if (p >= 1.0) return sorted_vals.back();
    double h = double(sorted_vals.size() - 1) * p;
    size_t lo = size_t(std::floor(h));
    double frac = h - double(lo);
    if (lo + 1 >= sorted_vals.size()) return sorted_vals.back();
    return sorted_vals[lo] * (1.0 - frac) + sorted_vals[lo + 1] * frac;
}

SuspectEval suspect_eval(const std::vector<CrimeSeries>& queries, const CrimeDataset& query_ds,
                         const std::vector<CrimeSeries>& history, const CrimeDataset& history_ds,
                         LinkageMethod method, const PairScoreFn& score,
                         const std::vector<double>& thresholds) {
    if (queries.empty()) throw DataError("suspect_eval needs at least one query");
    if (history.empty()) throw DataError("suspect_eval needs a history");

    // per query: all history scores, plus the best score of a true-offender series
    struct QueryResult {
        std::vector<double> scores;
        bool covered = false;
        double hit_score = 0.0;
    };
    std::vector<QueryResult> qr(queries.size());

    for (size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& q = queries[qi];
        std::vector<RankedItem> ranked = prioritize_suspects(
            query_ds, q.crime_ids, history_ds, history, method, score);
        std::map<std::string, double> score_of;
        for (const auto& it : ranked) score_of[it.id] = it.score;

        std::set<std::string> true_offenders(q.offender_ids.begin(), q.offender_ids.end());
        QueryResult& r = qr[qi];
        for (const auto& h : history) {
            double sc = score_of.at(h.series_id);
            r.scores.push_back(sc);
            bool match = std::any_of(h.offender_ids.begin(), h.offender_ids.end(),
                                     [&](const std::string& o) { return true_offenders.count(o); });
            if (match) {
                if (!r.covered || sc > r.hit_score) r.hit_score = sc;
                r.covered = true;
            }
        }
    }

    SuspectEval ev;
    ev.n_queries = queries.size();
    for (const auto& r : qr)
        if (r.covered) ev.n_covered++;
    ev.coverage = double(ev.n_covered) / double(ev.n_queries);

    std::vector<double> sorted_thr = thresholds;
    std::sort(sorted_thr.begin(), sorted_thr.end());
    for (double thr : sorted_thr) {
        SuspectEvalRow row;
        row.threshold = thr;
        std::vector<double> sizes;
        sizes.reserve(qr.size());
        double mean = 0.0;
        size_t hits = 0;
        for (const auto& r : qr) {
            size_t listed = 0;
            for (double sc : r.scores)
                if (sc >= thr) ++listed;
            sizes.push_back(double(listed));
            mean += double(listed);
            if (r.covered && r.hit_score >= thr) ++hits;
        }
        std::sort(sizes.begin(), sizes.end());
        row.list_q1 = quantile_type7(sizes, 0.25);
        row.list_median = quantile_type7(sizes, 0.5);
        row.list_q3 = quantile_type7(sizes, 0.75);
        row.list_mean = mean / double(qr.size());
        row.conditional_accuracy =
            ev.n_covered == 0 ? 0.0 : double(hits) / double(ev.n_covered);
        row.overall_accuracy = row.conditional_accuracy * ev.coverage;
        ev.rows.push_back(row);
    }
    return ev;
}

SuspectEval suspect_eval(const std::vector<CrimeSeries>& queries, const CrimeDataset& query_ds,
                         const std::vector<CrimeSeries>& history, const CrimeDataset& history_ds,
                         LinkageMethod method, const PairScorer& scorer,
                         const TransformConfig& cfg, const std::vector<double>& thresholds) {
    if (scorer.schema().index_of(kTemporalVar))
        throw DataError("suspect_eval requires a scorer without the temporal component");
    return suspect_eval(queries, query_ds, history, history_ds, method,
                        make_pair_score_fn(scorer, cfg), thresholds);
}

void write_suspect_eval_csv(const std::string& path, const SuspectEval& ev) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : ev.rows)
        rows.push_back({fmt_full(r.threshold), fmt_full(r.list_q1), fmt_full(r.list_median),
                        fmt_full(r.list_q3), fmt_full(r.list_mean),
                        fmt_full(r.conditional_accuracy), fmt_full(r.overall_accuracy)});
    write_csv_file(path,
                   {"threshold", "list_q1", "list_median", "list_q3", "list_mean",
                    "conditional_accuracy", "overall_accuracy"},
                   rows);
}

void write_roc_csv(const std::string& path, const RocCurve& roc) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(roc.points.size());
    for (const auto& p : roc.points)
        rows.push_back({fmt_full(p.threshold), fmt_full(p.fpr), fmt_full(p.tpr)});
    write_csv_file(path, {"threshold", "fpr", "tpr"}, rows);
}

void write_precision_csv(const std::string& path, const std::vector<PrecisionPoint>& curve) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(curve.size());
    for (const auto& p : curve)
        rows.push_back({std::to_string(p.k), fmt_full(p.precision), std::to_string(p.n_linked)});
    write_csv_file(path, {"k", "precision", "n_linked"}, rows);
}

}  // namespace linkage
