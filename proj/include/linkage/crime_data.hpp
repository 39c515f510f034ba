#pragma once
// Crime event records, datasets, and CSV ingestion with validation.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "linkage/common.hpp"

namespace linkage {

// One crime event. Times are fractional hours on a common clock; the true
// event time lies in [t_earliest, t_latest] (equal endpoints = exactly known).
// Coordinates are planar kilometers. An empty offender list means unsolved.
struct CrimeRecord {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    double t_earliest = 0.0;
    double t_latest = 0.0;
    std::map<std::string, std::string> categories;  // absent key = missing value
    std::vector<std::string> offenders;             // sorted, unique

    bool solved() const { return !offenders.empty(); }
    bool exact_time() const { return t_earliest == t_latest; }
    // nullptr when the attribute is missing for this crime
    const std::string* category(const std::string& name) const;
};

struct CrimeDataset {
    std::vector<CrimeRecord> records;
    // admissible levels per categorical attribute, sorted ascending
    std::map<std::string, std::vector<std::string>> category_schemas;

    size_t size() const { return records.size(); }
    const CrimeRecord* find(const std::string& id) const;      // nullptr if absent
    const CrimeRecord& at(const std::string& id) const;        // throws DataError
    size_t index_of(const std::string& id) const;              // throws DataError
    std::vector<std::string> ids() const;

private:
    std::unordered_map<std::string, size_t> index_;
    friend void finalize_dataset(CrimeDataset&);
};

// Validates invariants and (re)builds the id index. Sorts and dedupes each
// offender list. Throws DataError on duplicate ids, t_latest < t_earliest,
// non-finite fields, or category values outside the schema.
void finalize_dataset(CrimeDataset& ds);

CrimeDataset make_dataset(std::vector<CrimeRecord> records,
                          std::map<std::string, std::vector<std::string>> category_schemas);

CrimeDataset solved_subset(const CrimeDataset& ds);
CrimeDataset unsolved_subset(const CrimeDataset& ds);
// keeps records whose id passes `keep`; schemas carried over
CrimeDataset filter_dataset(const CrimeDataset& ds, const std::vector<std::string>& keep_ids);

enum class TimeFormat { Hours, Iso8601 };

// Maps CSV columns onto record fields. `columns` maps a column name to one of
// the roles: id, x, y, t_earliest, t_latest, offenders, category:<name>.
// Unmapped columns are ignored. When `categories` is empty the admissible
// levels are inferred from the data.
struct IngestSchema {
    std::map<std::string, std::string> columns;
    TimeFormat time_format = TimeFormat::Hours;
    std::map<std::string, std::vector<std::string>> categories;
    bool fail_on_bad_row = false;
    std::string offender_separator = ";";
};

struct RowIssue {
    size_t row = 0;  // 1-based data row number
    std::string id;  // empty when the id itself was unreadable
    std::string message;
};

struct LoadResult {
    CrimeDataset dataset;
    std::vector<RowIssue> issues;  // rows skipped (empty when fail_on_bad_row)
};

LoadResult load_dataset(const std::string& csv_path, const IngestSchema& schema);

// Writes the canonical column layout: id,x,y,t_earliest,t_latest,offenders,
// then one column per category attribute. load via canonical_ingest_schema.
void save_dataset(const CrimeDataset& ds, const std::string& csv_path);
IngestSchema canonical_ingest_schema(const CrimeDataset& ds);

// JSON (de)serialization of an ingest schema sidecar.
std::string ingest_schema_to_json(const IngestSchema& s);
IngestSchema ingest_schema_from_json(const std::string& text);
void save_ingest_schema(const IngestSchema& s, const std::string& json_path);
IngestSchema load_ingest_schema(const std::string& json_path);

// Ground-truth offender sidecar: CSV columns crime_id,offender_ids.
std::map<std::string, std::vector<std::string>> load_truth_labels(const std::string& csv_path);
void save_truth_labels(const CrimeDataset& ds, const std::string& csv_path);
// returns a copy of `ds` with offender lists replaced from `labels`
CrimeDataset apply_offender_labels(const CrimeDataset& ds,
                                   const std::map<std::string, std::vector<std::string>>& labels);

// "YYYY-MM-DD[ T]HH:MM[:SS]" (time optional) -> fractional hours since 1970-01-01T00:00.
double parse_iso8601_hours(const std::string& s);
// days since 1970-01-01 for a civil date (proleptic Gregorian)
int64_t days_from_civil(int64_t y, unsigned m, unsigned d);

}  // namespace linkage
