#include "linkage/crime_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"
#include "linkage/csv.hpp"

namespace linkage {

using nlohmann::json;

const std::string* CrimeRecord::category(const std::string& name) const {
    auto it = categories.find(name);
    return it == categories.end() ? nullptr : &it->second;
}

const CrimeRecord* CrimeDataset::find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &records[it->second];
}

const CrimeRecord& CrimeDataset::at(const std::string& id) const {
    return records[index_of(id)];
}

size_t CrimeDataset::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("unknown crime id: " + id);
    return it->second;
}

std::vector<std::string> CrimeDataset::ids() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.id);
    return out;
}

void finalize_dataset(CrimeDataset& ds) {
    ds.index_.clear();
    ds.index_.reserve(ds.records.size());
    for (size_t i = 0; i < ds.records.size(); ++i) {
        CrimeRecord& r = ds.records[i];
        if (r.id.empty()) throw DataError("crime record with empty id");
        if (!ds.index_.emplace(r.id, i).second) throw DataError("duplicate crime id: " + r.id);
        if (!std::isfinite(r.x) || !std::isfinite(r.y))
            throw DataError("non-finite coordinates for crime " + r.id);
        if (!std::isfinite(r.t_earliest) || !std::isfinite(r.t_latest))
            throw DataError("non-finite time interval for crime " + r.id);
        if (r.t_latest < r.t_earliest)
            throw DataError("t_latest < t_earliest for crime " + r.id);
        std::sort(r.offenders.begin(), r.offenders.end());
        r.offenders.erase(std::unique(r.offenders.begin(), r.offenders.end()), r.offenders.end());
        for (const auto& o : r.offenders)
            if (o.empty()) throw DataError("empty offender id on crime " + r.id);
        for (const auto& [name, value] : r.categories) {
            auto sit = ds.category_schemas.find(name);
            if (sit == ds.category_schemas.end())
                throw DataError("crime " + r.id + " has value for unknown category " + name);
            if (!std::binary_search(sit->second.begin(), sit->second.end(), value))
                throw DataError("crime " + r.id + ": value '" + value +
                                "' not in schema for category " + name);
        }
    }
    for (auto& [name, levels] : ds.category_schemas) {
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        if (levels.empty()) throw DataError("category " + name + " has no levels");
    }
}

CrimeDataset make_dataset(std::vector<CrimeRecord> records,
                          std::map<std::string, std::vector<std::string>> category_schemas) {
    CrimeDataset ds;
    ds.records = std::move(records);
    ds.category_schemas = std::move(category_schemas);
    for (auto& [name, levels] : ds.category_schemas) {
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    }
    finalize_dataset(ds);
    return ds;
}

namespace {

CrimeDataset subset_where(const CrimeDataset& ds, bool want_solved) {
    std::vector<CrimeRecord> keep;
    for (const auto& r : ds.records)
        if (r.solved() == want_solved) keep.push_back(r);
    return make_dataset(std::move(keep), ds.category_schemas);
}

}  // namespace

CrimeDataset solved_subset(const CrimeDataset& ds) { return subset_where(ds, true); }
CrimeDataset unsolved_subset(const CrimeDataset& ds) { return subset_where(ds, false); }

CrimeDataset filter_dataset(const CrimeDataset& ds, const std::vector<std::string>& keep_ids) {
    std::vector<CrimeRecord> keep;
    keep.reserve(keep_ids.size());
    for (const auto& id : keep_ids) keep.push_back(ds.at(id));
    return make_dataset(std::move(keep), ds.category_schemas);
}

int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = unsigned(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + int64_t(doe) - 719468;
}

double parse_iso8601_hours(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    char sep = 0;
    int n = 0;
    int got = std::sscanf(s.c_str(), "%d-%d-%d%n", &y, &mo, &d, &n);
    if (got != 3) throw DataError("bad ISO-8601 timestamp: '" + s + "'");
    std::string rest = s.substr(n);
    if (!rest.empty()) {
        got = std::sscanf(rest.c_str(), "%c%d:%d:%lf%n", &sep, &h, &mi, &sec, &n);
        if (got == 4 && size_t(n) == rest.size() && (sep == 'T' || sep == ' ')) {
            // full time with seconds
        } else {
            got = std::sscanf(rest.c_str(), "%c%d:%d%n", &sep, &h, &mi, &n);
            if (got != 3 || size_t(n) != rest.size() || (sep != 'T' && sep != ' '))
                throw DataError("bad ISO-8601 timestamp: '" + s + "'");
            sec = 0.0;
        }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        sec < 0.0 || sec >= 60.0)
        throw DataError("bad ISO-8601 timestamp: '" + s + "'");
    return double(days_from_civil(y, unsigned(mo), unsigned(d))) * 24.0 + h + mi / 60.0 +
           sec / 3600.0;
}

namespace {

std::vector<std::string> split_list(const std::string& s, const std::string& sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    size_t pos = 0;
    while (true) {
        size_t next = s.find(sep, pos);
        std::string item = s.substr(pos, next == std::string::npos ? next : next - pos);
        if (!item.empty()) out.push_back(item);
        if (next == std::string::npos) break;
        pos = next + sep.size();
    }
    return out;
}

struct RoleMap {
    int id = -1, x = -1, y = -1, te = -1, tl = -1, off = -1;
    std::vector<std::pair<int, std::string>> cats;  // column -> category name
};

RoleMap resolve_roles(const CsvTable& t, const IngestSchema& schema) {
    RoleMap rm;
    for (const auto& [col, role] : schema.columns) {
        int idx = t.column(col);
        if (idx < 0) throw DataError("ingest schema maps missing column: " + col);
        if (role == "id") rm.id = idx;
        else if (role == "x") rm.x = idx;
        else if (role == "y") rm.y = idx;
        else if (role == "t_earliest") rm.te = idx;
        else if (role == "t_latest") rm.tl = idx;
        else if (role == "offenders") rm.off = idx;
        else if (role.rfind("category:", 0) == 0) rm.cats.emplace_back(idx, role.substr(9));
        else throw DataError("unknown ingest role: " + role);
    }
    if (rm.id < 0 || rm.x < 0 || rm.y < 0 || rm.te < 0 || rm.tl < 0)
        throw DataError("ingest schema must map id, x, y, t_earliest, t_latest");
    std::sort(rm.cats.begin(), rm.cats.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    return rm;
}

double parse_time_field(const std::string& s, TimeFormat fmt, const std::string& context) {
    if (fmt == TimeFormat::Hours) return parse_double(s, context);
    return parse_iso8601_hours(s);
}

}  // namespace

LoadResult load_dataset(const std::string& csv_path, const IngestSchema& schema) {
    CsvTable t = read_csv_file(csv_path);
    RoleMap rm = resolve_roles(t, schema);

    bool fixed_schema = !schema.categories.empty();
    std::map<std::string, std::set<std::string>> seen_levels;

    LoadResult res;
    std::vector<CrimeRecord> recs;
    for (size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        size_t rowno = i + 1;
        auto fail = [&](const std::string& id, const std::string& msg) {
            if (schema.fail_on_bad_row)
                throw DataError("row " + std::to_string(rowno) +
                                (id.empty() ? "" : " (id " + id + ")") + ": " + msg);
            res.issues.push_back({rowno, id, msg});
        };
        if (row.size() != t.header.size()) {
            fail("", "expected " + std::to_string(t.header.size()) + " fields, got " +
                         std::to_string(row.size()));
            continue;
        }
        CrimeRecord r;
        r.id = row[rm.id];
        if (r.id.empty()) {
            fail("", "empty id");
            continue;
        }
        try {
            r.x = parse_double(row[rm.x], "x");
            r.y = parse_double(row[rm.y], "y");
            r.t_earliest = parse_time_field(row[rm.te], schema.time_format, "t_earliest");
            r.t_latest = parse_time_field(row[rm.tl], schema.time_format, "t_latest");
        } catch (const DataError& e) {
            fail(r.id, e.what());
            continue;
        }
        if (r.t_latest < r.t_earliest) {
            fail(r.id, "t_latest < t_earliest");
            continue;
        }
        if (rm.off >= 0) r.offenders = split_list(row[rm.off], schema.offender_separator);
        bool bad_cat = false;
        for (const auto& [col, name] : rm.cats) {
            const std::string& v = row[col];
            if (v.empty()) continue;  // missing value
            if (fixed_schema) {
                auto it = schema.categories.find(name);
                if (it == schema.categories.end() ||
                    std::find(it->second.begin(), it->second.end(), v) == it->second.end()) {
                    fail(r.id, "value '" + v + "' not admissible for category " + name);
                    bad_cat = true;
                    break;
                }
            } else {
                seen_levels[name].insert(v);
            }
            r.categories[name] = v;
        }
        if (bad_cat) continue;
        recs.push_back(std::move(r));
    }

    std::map<std::string, std::vector<std::string>> schemas;
    if (fixed_schema) {
        schemas = schema.categories;
    } else {
        for (const auto& [col, name] : rm.cats) {
            auto it = seen_levels.find(name);
            schemas[name] = it == seen_levels.end()
                                ? std::vector<std::string>{}
                                : std::vector<std::string>(it->second.begin(), it->second.end());
            if (schemas[name].empty()) schemas[name].push_back("__none__");
        }
    }
    try {
        res.dataset = make_dataset(std::move(recs), std::move(schemas));
    } catch (const DataError& e) {
        throw DataError(csv_path + ": " + e.what());
    }
    return res;
}

void save_dataset(const CrimeDataset& ds, const std::string& csv_path) {
    std::vector<std::string> header = {"id", "x", "y", "t_earliest", "t_latest", "offenders"};
    for (const auto& [name, levels] : ds.category_schemas) header.push_back(name);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ds.records.size());
    for (const auto& r : ds.records) {
        std::vector<std::string> row = {r.id, fmt_full(r.x), fmt_full(r.y),
                                        fmt_full(r.t_earliest), fmt_full(r.t_latest)};
        std::string off;
        for (size_t i = 0; i < r.offenders.size(); ++i) {
            if (i) off += ';';
            off += r.offenders[i];
        }
        row.push_back(off);
        for (const auto& [name, levels] : ds.category_schemas) {
            const std::string* v = r.category(name);
            row.push_back(v ? *v : "");
        }
        rows.push_back(std::move(row));
    }
    write_csv_file(csv_path, header, rows);
}

IngestSchema canonical_ingest_schema(const CrimeDataset& ds) {
    IngestSchema s;
    s.columns = {{"id", "id"},
                 {"x", "x"},
                 {"y", "y"},
                 {"t_earliest", "t_earliest"},
                 {"t_latest", "t_latest"},
                 {"offenders", "offenders"}};
    for (const auto& [name, levels] : ds.category_schemas) s.columns[name] = "category:" + name;
    s.time_format = TimeFormat::Hours;
    s.categories = ds.category_schemas;
    return s;
}

std::string ingest_schema_to_json(const IngestSchema& s) {
    json j;
    j["columns"] = s.columns;
    j["time_format"] = s.time_format == TimeFormat::Hours ? "hours" : "iso8601";
    j["categories"] = s.categories;
    j["fail_on_bad_row"] = s.fail_on_bad_row;
    j["offender_separator"] = s.offender_separator;
    return j.dump(2) + "\n";
}

IngestSchema ingest_schema_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("bad ingest schema json: ") + e.what());
    }
    IngestSchema s;
    try {
        s.columns = j.at("columns").get<std::map<std::string, std::string>>();
        std::string tf = j.value("time_format", "hours");
        if (tf == "hours") s.time_format = TimeFormat::Hours;
        else if (tf == "iso8601") s.time_format = TimeFormat::Iso8601;
        else throw DataError("bad time_format: " + tf);
        if (j.contains("categories"))
            s.categories = j.at("categories").get<std::map<std::string, std::vector<std::string>>>();
        s.fail_on_bad_row = j.value("fail_on_bad_row", false);
        s.offender_separator = j.value("offender_separator", ";");
    } catch (const json::exception& e) {
        throw DataError(std::string("bad ingest schema json: ") + e.what());
    }
    return s;
}

void save_ingest_schema(const IngestSchema& s, const std::string& json_path) {
    write_text_file(json_path, ingest_schema_to_json(s));
}

IngestSchema load_ingest_schema(const std::string& json_path) {
    return ingest_schema_from_json(read_text_file(json_path));
}

std::map<std::string, std::vector<std::string>> load_truth_labels(const std::string& csv_path) {
    CsvTable t = read_csv_file(csv_path);
    int cid = t.column("crime_id");
    int coff = t.column("offender_ids");
    if (cid < 0 || coff < 0)
        throw DataError(csv_path + ": truth labels need columns crime_id,offender_ids");
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& row : t.rows) {
        auto offs = split_list(row[coff], ";");
        std::sort(offs.begin(), offs.end());
        offs.erase(std::unique(offs.begin(), offs.end()), offs.end());
        if (!out.emplace(row[cid], std::move(offs)).second)
            throw DataError(csv_path + ": duplicate crime_id " + row[cid]);
    }
    return out;
}

void save_truth_labels(const CrimeDataset& ds, const std::string& csv_path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : ds.records) {
        std::string off;
        for (size_t i = 0; i < r.offenders.size(); ++i) {
            if (i) off += ';';
            off += r.offenders[i];
        }
        rows.push_back({r.id, off});
    }
    write_csv_file(csv_path, {"crime_id", "offender_ids"}, rows);
}

CrimeDataset apply_offender_labels(const CrimeDataset& ds,
                                   const std::map<std::string, std::vector<std::string>>& labels) {
    std::vector<CrimeRecord> recs = ds.records;
    for (auto& r : recs) {
        auto it = labels.find(r.id);
        if (it != labels.end()) r.offenders = it->second;
    }
    return make_dataset(std::move(recs), ds.category_schemas);
}

}  // namespace linkage
