#pragma once
// Construction of weighted linked/unlinked training pairs from solved crimes.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "linkage/crime_data.hpp"
#include "linkage/evidence.hpp"

namespace linkage {

enum class LinkLabel { Linked, Unlinked, Unknown };

std::string link_label_to_string(LinkLabel l);
LinkLabel link_label_from_string(const std::string& s);

// id_a < id_b always (canonical order)
struct WeightedPair {
    std::string id_a;
    std::string id_b;
    LinkLabel label = LinkLabel::Unknown;
    double weight = 1.0;
};

// Connected components of the offender-sharing graph over solved crimes:
// crimes in the same group share at least one offender, possibly transitively.
struct CrimeGroups {
    std::vector<std::vector<std::string>> groups;        // crime ids, sorted within group
    std::map<std::string, size_t> group_of;              // crime id -> group index
};

// Groups are ordered by their smallest crime id. Unsolved crimes are ignored.
CrimeGroups build_offender_graph(const CrimeDataset& ds);

// One pair per within-series combination, weight 1/C(n,2) for a series of n
// crimes. A pair appearing in several offenders' series keeps the minimum
// weight. Output sorted by (id_a, id_b).
std::vector<WeightedPair> linked_pairs(const CrimeDataset& ds);

// For each crime group, draws `k` pairs (group crime, crime from any other
// group) with replacement, weight 1; duplicates are removed globally.
// Deterministic in `seed`. Output sorted by (id_a, id_b).
std::vector<WeightedPair> unlinked_pairs(const CrimeDataset& ds, const CrimeGroups& groups,
                                         int k, uint64_t seed);

// Drops pairs whose expected elapsed time exceeds `max_days` (inf keeps all).
std::vector<WeightedPair> apply_time_window(const std::vector<WeightedPair>& pairs,
                                            const CrimeDataset& ds, double max_days,
                                            const TransformConfig& cfg);

struct PairSamplingConfig {
    int k_unlinked = 20;
    double max_days = 365.0;
    uint64_t rng_seed = 0;
};

std::string pair_sampling_config_to_json(const PairSamplingConfig& cfg);
PairSamplingConfig pair_sampling_config_from_json(const std::string& text);

// linked + unlinked over the solved subset, then the time window.
std::vector<WeightedPair> build_training_pairs(const CrimeDataset& ds,
                                               const PairSamplingConfig& pcfg,
                                               const TransformConfig& tcfg);

// columns: id_a,id_b,label,weight
void write_pairs_csv(const std::string& path, const std::vector<WeightedPair>& pairs);
std::vector<WeightedPair> read_pairs_csv(const std::string& path);

std::vector<IdPair> pair_ids(const std::vector<WeightedPair>& pairs);

}  // namespace linkage
