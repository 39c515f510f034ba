#pragma once
// Crime-series level operations: series-to-candidate similarity, ranking
// candidate crimes into a series, and prioritizing known offenders.

#include <functional>
#include <string>
#include <vector>

#include "linkage/bf_models.hpp"
#include "linkage/linkage_cluster.hpp"

namespace linkage {

struct CrimeSeries {
    std::string series_id;
    std::vector<std::string> crime_ids;     // sorted, unique
    std::vector<std::string> offender_ids;  // sorted; may be empty
};

// one offender series per solved offender, series_id = offender id
std::vector<CrimeSeries> series_from_solved(const CrimeDataset& ds);

// Pluggable pair scoring used by the series-level operations; must be pure
// and safe to call from multiple threads.
using PairScoreFn = std::function<double(const CrimeRecord&, const CrimeRecord&)>;

// Both adapters capture their argument by pointer; it must outlive the fn.
PairScoreFn make_pair_score_fn(const PairScorer& scorer, const TransformConfig& cfg);
PairScoreFn make_pair_score_fn(const ExternalScores& scores);

// Combine cross pair log-BF scores between two disjoint crime groups:
// single = max, complete = min, average = unweighted mean.
double combine_cross_scores(const std::vector<double>& scores, LinkageMethod method);

double series_similarity_records(const std::vector<const CrimeRecord*>& a,
                                 const std::vector<const CrimeRecord*>& b, LinkageMethod method,
                                 const PairScoreFn& score);
double series_similarity_records(const std::vector<const CrimeRecord*>& a,
                                 const std::vector<const CrimeRecord*>& b, LinkageMethod method,
                                 const PairScorer& scorer, const TransformConfig& cfg);

// similarity of one candidate crime to a series within the same dataset
double series_similarity(const CrimeDataset& ds, const std::vector<std::string>& series_ids,
                         const std::string& candidate_id, LinkageMethod method,
                         const PairScoreFn& score);
double series_similarity(const CrimeDataset& ds, const std::vector<std::string>& series_ids,
                         const std::string& candidate_id, LinkageMethod method,
                         const PairScorer& scorer, const TransformConfig& cfg);

struct RankedItem {
    std::string id;       // candidate crime or suspect series id
    double score = 0.0;
    size_t rank = 0;      // 1-based; ties share the later (pessimistic) rank
};

// Candidates scored against the series, sorted by score descending then id.
// top_r = 0 keeps every candidate. unsolved_only restricts the pool.
std::vector<RankedItem> identify_series(const CrimeDataset& ds,
                                        const std::vector<std::string>& series_ids,
                                        LinkageMethod method, const PairScoreFn& score,
                                        size_t top_r, bool unsolved_only);
std::vector<RankedItem> identify_series(const CrimeDataset& ds,
                                        const std::vector<std::string>& series_ids,
                                        LinkageMethod method, const PairScorer& scorer,
                                        const TransformConfig& cfg, size_t top_r,
                                        bool unsolved_only);

// Sequential variant: grows the series one crime at a time, absorbing the
// best-scoring candidate while it clears `absorb_threshold`; each absorbed
// crime reshapes the scores of the rest.
struct AbsorbStep {
    std::string id;
    double score = 0.0;
};
std::vector<AbsorbStep> identify_series_sequential(const CrimeDataset& ds,
                                                   std::vector<std::string> series_ids,
                                                   LinkageMethod method, const PairScoreFn& score,
                                                   double absorb_threshold, size_t max_steps,
                                                   bool unsolved_only);
std::vector<AbsorbStep> identify_series_sequential(const CrimeDataset& ds,
                                                   std::vector<std::string> series_ids,
                                                   LinkageMethod method, const PairScorer& scorer,
                                                   const TransformConfig& cfg,
                                                   double absorb_threshold, size_t max_steps,
                                                   bool unsolved_only);

// Ranks each history series by similarity to the query crimes. The scorer
// must not carry the elapsed-time component (shared offender behavior, not
// closeness in calendar time, is what transfers across a career); the
// PairScoreFn overload trusts the caller on that point.
std::vector<RankedItem> prioritize_suspects(const CrimeDataset& query_ds,
                                            const std::vector<std::string>& query_ids,
                                            const CrimeDataset& history_ds,
                                            const std::vector<CrimeSeries>& history,
                                            LinkageMethod method, const PairScoreFn& score);
std::vector<RankedItem> prioritize_suspects(const CrimeDataset& query_ds,
                                            const std::vector<std::string>& query_ids,
                                            const CrimeDataset& history_ds,
                                            const std::vector<CrimeSeries>& history,
                                            LinkageMethod method, const PairScorer& scorer,
                                            const TransformConfig& cfg);

// columns: rank,id,score
void write_ranked_csv(const std::string& path, const std::vector<RankedItem>& items);

}  // namespace linkage
