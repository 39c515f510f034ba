#pragma once
// Pairwise evidence variables: spatial distance, expected temporal
// differences under censored event times, and categorical agreement.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linkage/crime_data.hpp"

namespace linkage {

enum class EvidenceKind { Numeric, Binary };

// Ordered list of evidence variable names and kinds; evidence vectors are
// positional against this.
struct EvidenceSchema {
    std::vector<std::string> names;
    std::vector<EvidenceKind> kinds;

    size_t size() const { return names.size(); }
    std::optional<size_t> index_of(std::string_view name) const;
    bool operator==(const EvidenceSchema&) const = default;
};

// One row of pair-comparison values aligned to an EvidenceSchema.
// NaN marks a missing entry.
using EvidenceVector = std::vector<double>;

inline double evidence_missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool evidence_missing(double v) { return std::isnan(v); }

inline constexpr const char* kSpatialVar = "spatial";
inline constexpr const char* kTemporalVar = "temporal";
inline constexpr const char* kTodVar = "tod";
inline constexpr const char* kDowVar = "dow";

struct TransformConfig {
    int mc_draws = 1000;
    uint64_t rng_seed = 0;
    // empty = spatial, temporal, tod, dow, then every dataset category.
    // Otherwise restricts/reorders to exactly these names.
    std::vector<std::string> enabled_variables;
};

std::string transform_config_to_json(const TransformConfig& cfg);
TransformConfig transform_config_from_json(const std::string& text);

// shortest way around a circle of the given period
inline double circular_distance(double diff, double period) {
    double d = std::fmod(std::abs(diff), period);
    return std::min(d, period - d);
}

// Euclidean distance in km; missing (NaN) if either crime lacks finite coords.
double spatial_distance(const CrimeRecord& a, const CrimeRecord& b);

struct TemporalDiffs {
    double temporal_days = 0.0;  // E|t_a - t_b| in days
    double tod_hours = 0.0;      // E[circular 24h distance], in [0, 12]
    double dow_days = 0.0;       // E[circular 7d distance], in [0, 3.5]
};

// Expected absolute differences with event times drawn uniformly over each
// crime's interval. Exact intervals short-circuit to the closed form; the
// Monte Carlo stream is seeded from the pair's ids so results do not depend
// on evaluation order.
TemporalDiffs expected_temporal_diffs(const CrimeRecord& a, const CrimeRecord& b,
                                      const TransformConfig& cfg);

// 1 = same level, 0 = different, nullopt = missing on either side
std::optional<int> category_match(const CrimeRecord& a, const CrimeRecord& b,
                                  const std::string& name);

// Schema implied by the dataset and config; throws DataError when
// enabled_variables names an unknown variable.
EvidenceSchema evidence_schema(const CrimeDataset& ds, const TransformConfig& cfg);

// Evidence vector for one pair; throws DataError when a.id == b.id.
// Symmetric in its record arguments.
EvidenceVector make_evidence(const CrimeRecord& a, const CrimeRecord& b,
                             const TransformConfig& cfg, const EvidenceSchema& schema);

using IdPair = std::pair<std::string, std::string>;

// Batch transform over id pairs; parallel over pairs, output order matches
// input order and the serial variant exactly.
std::vector<EvidenceVector> evidence_for_pairs(const CrimeDataset& ds,
                                               const std::vector<IdPair>& pairs,
                                               const TransformConfig& cfg,
                                               const EvidenceSchema& schema);
std::vector<EvidenceVector> evidence_for_pairs_serial(const CrimeDataset& ds,
                                                      const std::vector<IdPair>& pairs,
                                                      const TransformConfig& cfg,
                                                      const EvidenceSchema& schema);

// columns: id_a,id_b,<variable...>; missing values as empty fields
void write_evidence_csv(const std::string& path, const std::vector<IdPair>& pairs,
                        const std::vector<EvidenceVector>& evidence,
                        const EvidenceSchema& schema);

// re-index an evidence vector from one schema onto another (names must exist
// in `from`); used when scoring with a model fit on a variable subset
EvidenceVector project_evidence(const EvidenceSchema& from, const EvidenceVector& x,
                                const EvidenceSchema& to);

}  // namespace linkage
