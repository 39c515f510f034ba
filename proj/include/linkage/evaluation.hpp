#pragma once
// Evaluation harness: ROC/AUC, precision-vs-workload, hold-one-out series
// identification, partition comparison, and suspect-list accuracy.

#include <string>
#include <vector>

#include "linkage/linkage_cluster.hpp"
#include "linkage/series_tasks.hpp"
#include "linkage/training_pairs.hpp"

namespace linkage {

struct ScoredPair {
    std::string id_a;
    std::string id_b;
    double score = 0.0;
    LinkLabel label = LinkLabel::Unknown;
};

void write_scored_pairs_csv(const std::string& path, const std::vector<ScoredPair>& scored);
std::vector<ScoredPair> read_scored_pairs_csv(const std::string& path);

struct RocPoint {
    double threshold = 0.0;  // score at and above which pairs are called linked
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // starts at (0,0), ends at (1,1)
    double auc = 0.0;
    size_t n_linked = 0;
    size_t n_unlinked = 0;
};

// Unknown labels are excluded; ties in score collapse to one point; AUC by
// trapezoid (equals the concordance probability). Unweighted pair counts.
RocCurve roc_curve(const std::vector<ScoredPair>& scored);

struct PrecisionPoint {
    size_t k = 0;          // investigating the top k pairs...
    double precision = 0.0;
    size_t n_linked = 0;   // ...finds this many true links
};

// Pairs ordered by score descending, ties by (id_a, id_b); unknowns excluded.
std::vector<PrecisionPoint> precision_curve(const std::vector<ScoredPair>& scored);

// VI in nats between two partitions over the same id set (DataError if the
// sets differ). Zero iff the partitions are identical up to relabeling.
double variation_of_information(const Partition& a, const Partition& b);

// Ground-truth pair labels and the truth partition derived from a labeled
// dataset, restricted to a fixed id list.
class PairLabeler {
public:
    PairLabeler(const CrimeDataset& truth, std::vector<std::string> ids);

    const std::vector<std::string>& ids() const { return ids_; }
    // linked = shared offender; unlinked = both solved, none shared
    LinkLabel label(size_t i, size_t j) const;
    // transitive offender-sharing groups over the solved ids
    const Partition& truth_partition() const { return truth_; }

private:
    std::vector<std::string> ids_;
    std::vector<std::vector<std::string>> offenders_;
    Partition truth_;
};

struct ClusterEvalRow {
    double threshold = 0.0;
    size_t n_clusters = 0;
    size_t n_multi = 0;          // clusters holding 2+ crimes
    size_t linked_pairs = 0;     // within-cluster pair counts by truth label
    size_t unlinked_pairs = 0;
    size_t unknown_pairs = 0;
    double vi = 0.0;             // against the truth partition, solved ids only
};

struct ClusterEvalTotals {
    size_t linked = 0;
    size_t unlinked = 0;
    size_t unknown = 0;
    size_t all_pairs = 0;
};

struct ClusterEval {
    std::vector<ClusterEvalRow> rows;
    ClusterEvalTotals totals;  // label counts over every pair of leaves
};

ClusterEval clustering_eval(const Dendrogram& dend, const PairLabeler& labeler,
                            const std::vector<double>& thresholds);
void write_cluster_eval_csv(const std::string& path, const ClusterEval& ev);

struct SeriesIdEvalRow {
    std::string method;   // linkage method name
    std::string pool;     // "all" or "solved"
    std::string stratum;  // remaining series size: "all", "1", "2-3", "4+"
    size_t rank = 0;      // list length R
    double proportion = 0.0;  // mean over series of per-series hit fractions
    size_t n_series = 0;
};

// Hold-one-out: each crime of each series is ranked against every crime not
// in the rest of its series (pessimistic tie ranks). Series weigh equally
// regardless of length. Throws DataError on a series shorter than 2.
// The multi-method variant combines the same pair scores under each method.
std::vector<SeriesIdEvalRow> series_id_eval_multi(const std::vector<CrimeSeries>& series,
                                                  const CrimeDataset& ds,
                                                  const std::vector<LinkageMethod>& methods,
                                                  const PairScoreFn& score,
                                                  const std::vector<size_t>& ranks);
std::vector<SeriesIdEvalRow> series_id_eval_multi(const std::vector<CrimeSeries>& series,
                                                  const CrimeDataset& ds,
                                                  const std::vector<LinkageMethod>& methods,
                                                  const PairScorer& scorer,
                                                  const TransformConfig& cfg,
                                                  const std::vector<size_t>& ranks);
std::vector<SeriesIdEvalRow> series_id_eval(const std::vector<CrimeSeries>& series,
                                            const CrimeDataset& ds, LinkageMethod method,
                                            const PairScorer& scorer, const TransformConfig& cfg,
                                            const std::vector<size_t>& ranks);
void write_series_id_eval_csv(const std::string& path,
                              const std::vector<SeriesIdEvalRow>& rows);

struct SuspectEvalRow {
    double threshold = 0.0;
    double list_q1 = 0.0;  // suspect-list sizes over all queries (type-7 quantiles)
    double list_median = 0.0;
    double list_q3 = 0.0;
    double list_mean = 0.0;
    double conditional_accuracy = 0.0;  // true offender listed, given they are in history
    double overall_accuracy = 0.0;      // conditional * coverage
};

struct SuspectEval {
    std::vector<SuspectEvalRow> rows;
    double coverage = 0.0;  // fraction of queries whose offender has history
    size_t n_queries = 0;
    size_t n_covered = 0;
};

// Each query series is scored against every history series (temporal
// component must already be dropped from the scorer). A query counts as
// covered when some history series shares an offender with it.
SuspectEval suspect_eval(const std::vector<CrimeSeries>& queries, const CrimeDataset& query_ds,
                         const std::vector<CrimeSeries>& history, const CrimeDataset& history_ds,
                         LinkageMethod method, const PairScoreFn& score,
                         const std::vector<double>& thresholds);
SuspectEval suspect_eval(const std::vector<CrimeSeries>& queries, const CrimeDataset& query_ds,
                         const std::vector<CrimeSeries>& history, const CrimeDataset& history_ds,
                         LinkageMethod method, const PairScorer& scorer,
                         const TransformConfig& cfg, const std::vector<double>& thresholds);
void write_suspect_eval_csv(const std::string& path, const SuspectEval& ev);

void write_roc_csv(const std::string& path, const RocCurve& roc);
void write_precision_csv(const std::string& path, const std::vector<PrecisionPoint>& curve);

// R type-7 quantile of pre-sorted values
double quantile_type7(const std::vector<double>& sorted_vals, double p);

}  // namespace linkage
