#pragma once
// All-pairs similarity computation and greedy agglomerative clustering of
// crimes under single/complete/average linkage, with dendrogram exports.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linkage/bf_models.hpp"
#include "linkage/crime_data.hpp"

namespace linkage {

// Dense symmetric log-BF matrix stored as the upper triangle (i < j),
// row-major, over an ordered id list.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    SimilarityMatrix(std::vector<std::string> ids, double fill = 0.0);

    size_t n() const { return ids_.size(); }
    static size_t pair_count(size_t n) { return n * (n - 1) / 2; }

    double at(size_t i, size_t j) const;
    void set(size_t i, size_t j, double v);
    const std::vector<std::string>& ids() const { return ids_; }
    size_t index_of(const std::string& id) const;
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    // "LNK1" magic, u64 LE item count, then the upper triangle as f32 LE
    void save_binary(const std::string& path) const;
    static SimilarityMatrix load_binary(const std::string& path, std::vector<std::string> ids);

private:
    std::vector<std::string> ids_;
    std::vector<double> data_;
    size_t tri_index(size_t i, size_t j) const;
};

// Scores every unordered pair; parallel over pairs, identical output to the
// serial variant. Throws DataError if any score comes back non-finite.
SimilarityMatrix pairwise_similarities(const CrimeDataset& ds, const PairScorer& scorer,
                                       const TransformConfig& cfg);
SimilarityMatrix pairwise_similarities_serial(const CrimeDataset& ds, const PairScorer& scorer,
                                              const TransformConfig& cfg);

// Matrix filled from precomputed scores; every pair must be present.
SimilarityMatrix similarity_from_external(const std::vector<std::string>& ids,
                                          const ExternalScores& scores);

enum class LinkageMethod { Single, Complete, Average };

std::string linkage_to_string(LinkageMethod m);
LinkageMethod linkage_from_string(const std::string& s);

// crime id -> cluster id (dense, 0-based)
using Partition = std::map<std::string, int>;

struct DendrogramMerge {
    int a = 0;       // cluster ids being merged; leaves are 0..n-1,
    int b = 0;       // merge t creates id n+t
    int id = 0;
    double score = 0.0;  // similarity at which the merge happened
    bool forced = false; // seeded by an initial partition, not by the data
};

struct Dendrogram {
    std::vector<std::string> leaves;  // leaf cluster i is leaves[i]
    LinkageMethod method = LinkageMethod::Average;
    std::vector<DendrogramMerge> merges;

    std::string to_json() const;
    static Dendrogram from_json(const std::string& text);
    std::string to_newick() const;
};

// Greedy agglomeration: repeatedly merges the globally most similar pair of
// clusters (ties broken by lowest cluster id pair) until one cluster remains
// or, when `stop_below` is set, the best merge falls below it. `init` seeds
// must-link clusters which are merged first with score +inf and forced=true.
Dendrogram agglomerate(const SimilarityMatrix& sim, LinkageMethod method,
                       const std::optional<Partition>& init = std::nullopt,
                       std::optional<double> stop_below = std::nullopt);

// Clusters connected by merges with score >= threshold (forced merges always
// hold). Cluster ids are dense, ordered by each cluster's first leaf.
Partition cut_dendrogram(const Dendrogram& dend, double threshold);

size_t cluster_count(const Partition& p);
std::vector<std::vector<std::string>> partition_groups(const Partition& p);

// columns: crime_id,cluster
void write_partition_csv(const std::string& path, const Partition& p);
Partition read_partition_csv(const std::string& path);

}  // namespace linkage
