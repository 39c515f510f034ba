#include "linkage/evidence.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "linkage/csv.hpp"
#include "linkage/rng.hpp"

namespace linkage {

using nlohmann::json;

std::optional<size_t> EvidenceSchema::index_of(std::string_view name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    return std::nullopt;
}

std::string transform_config_to_json(const TransformConfig& cfg) {
    json j;
    j["mc_draws"] = cfg.mc_draws;
    j["rng_seed"] = cfg.rng_seed;
    j["enabled_variables"] = cfg.enabled_variables;
    return j.dump(2) + "\n";
}

TransformConfig transform_config_from_json(const std::string& text) {
    TransformConfig cfg;
    try {
        json j = json::parse(text);
        cfg.mc_draws = j.value("mc_draws", 1000);
        cfg.rng_seed = j.value("rng_seed", uint64_t(0));
        if (j.contains("enabled_variables"))
            cfg.enabled_variables = j.at("enabled_variables").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw DataError(std::string("bad transform config json: ") + e.what());
    }
    if (cfg.mc_draws < 1) throw DataError("mc_draws must be >= 1");
    return cfg;
}

double spatial_distance(const CrimeRecord& a, const CrimeRecord& b) {
    double dx = a.x - b.x;
    double dy = a.y - b.y;
    double d = std::sqrt(dx * dx + dy * dy);
    return std::isfinite(d) ? d : evidence_missing_value();
}

namespace {

TemporalDiffs diffs_from_times(double ta, double tb) {
    TemporalDiffs d;
    double diff = ta - tb;
    d.temporal_days = std::abs(diff) / 24.0;
    d.tod_hours = circular_distance(diff, 24.0);
    d.dow_days = circular_distance(diff / 24.0, 7.0);
    return d;
}

}  // namespace

TemporalDiffs expected_temporal_diffs(const CrimeRecord& a, const CrimeRecord& b,
                                      const TransformConfig& cfg) {
    if (a.exact_time() && b.exact_time())
        return diffs_from_times(a.t_earliest, b.t_earliest);

    // canonical argument order so (a,b) and (b,a) consume the stream identically
    const CrimeRecord* p = &a;
    const CrimeRecord* q = &b;
    if (q->id < p->id) std::swap(p, q);
    uint64_t h = fnv1a(p->id);
    h = fnv1a(q->id, h);
    Rng rng(mix_seed(cfg.rng_seed, h));

    TemporalDiffs acc;
    int n = std::max(1, cfg.mc_draws);
    for (int k = 0; k < n; ++k) {
        double tp = p->exact_time() ? p->t_earliest : rng.uniform(p->t_earliest, p->t_latest);
        double tq = q->exact_time() ? q->t_earliest : rng.uniform(q->t_earliest, q->t_latest);
        TemporalDiffs d = diffs_from_times(tp, tq);
        acc.temporal_days += d.temporal_days;
        acc.tod_hours += d.tod_hours;
        acc.dow_days += d.dow_days;
    }
    acc.temporal_days /= n;
    acc.tod_hours /= n;
    acc.dow_days /= n;
    return acc;
}

std::optional<int> category_match(const CrimeRecord& a, const CrimeRecord& b,
                                  const std::string& name) {
    const std::string* va = a.category(name);
    const std::string* vb = b.category(name);
    if (!va || !vb) return std::nullopt;
    return *va == *vb ? 1 : 0;
}

EvidenceSchema evidence_schema(const CrimeDataset& ds, const TransformConfig& cfg) {
    std::vector<std::string> base = {kSpatialVar, kTemporalVar, kTodVar, kDowVar};
    std::vector<std::string> names;
    if (cfg.enabled_variables.empty()) {
        names = base;
        for (const auto& [cat, levels] : ds.category_schemas) names.push_back(cat);
    } else {
        for (const auto& v : cfg.enabled_variables) {
            bool known = std::find(base.begin(), base.end(), v) != base.end() ||
                         ds.category_schemas.count(v) > 0;
            if (!known) throw DataError("unknown evidence variable: " + v);
            if (std::find(names.begin(), names.end(), v) != names.end())
                throw DataError("duplicate evidence variable: " + v);
            names.push_back(v);
        }
    }
    EvidenceSchema s;
    for (auto& n : names) {
        bool numeric = std::find(base.begin(), base.end(), n) != base.end();
        s.kinds.push_back(numeric ? EvidenceKind::Numeric : EvidenceKind::Binary);
        s.names.push_back(std::move(n));
    }
    return s;
}

EvidenceVector make_evidence(const CrimeRecord& a, const CrimeRecord& b,
                             const TransformConfig& cfg, const EvidenceSchema& schema) {
    if (a.id == b.id) throw DataError("evidence requested for identical crime ids: " + a.id);
    EvidenceVector x(schema.size(), evidence_missing_value());
    bool have_temporal = false;
    TemporalDiffs td;
    for (size_t i = 0; i < schema.size(); ++i) {
        const std::string& name = schema.names[i];
        if (name == kSpatialVar) {
            x[i] = spatial_distance(a, b);
        } else if (name == kTemporalVar || name == kTodVar || name == kDowVar) {
            if (!have_temporal) {
                td = expected_temporal_diffs(a, b, cfg);
                have_temporal = true;
            }
            x[i] = name == kTemporalVar ? td.temporal_days
                                        : (name == kTodVar ? td.tod_hours : td.dow_days);
        } else {
            auto m = category_match(a, b, name);
            if (m) x[i] = double(*m);
        }
    }
    return x;
}

std::vector<EvidenceVector> evidence_for_pairs_serial(const CrimeDataset& ds,
                                                      const std::vector<IdPair>& pairs,
                                                      const TransformConfig& cfg,
                                                      const EvidenceSchema& schema) {
    std::vector<EvidenceVector> out(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i)
        out[i] = make_evidence(ds.at(pairs[i].first), ds.at(pairs[i].second), cfg, schema);
    return out;
}

std::vector<EvidenceVector> evidence_for_pairs(const CrimeDataset& ds,
                                               const std::vector<IdPair>& pairs,
                                               const TransformConfig& cfg,
                                               const EvidenceSchema& schema) {
    std::vector<EvidenceVector> out(pairs.size());
    // pairs are independent and each draws from its own id-seeded stream, so
    // the schedule cannot change results
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 64)
    for (int64_t i = 0; i < int64_t(pairs.size()); ++i) {
        try {
            out[i] = make_evidence(ds.at(pairs[i].first), ds.at(pairs[i].second), cfg, schema);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

void write_evidence_csv(const std::string& path, const std::vector<IdPair>& pairs,
                        const std::vector<EvidenceVector>& evidence,
                        const EvidenceSchema& schema) {
    if (pairs.size() != evidence.size())
        throw DataError("evidence csv: pairs and evidence sizes differ");
    std::vector<std::string> header = {"id_a", "id_b"};
    header.insert(header.end(), schema.names.begin(), schema.names.end());
    std::vector<std::vector<std::string>> rows;
    rows.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        std::vector<std::string> row = {pairs[i].first, pairs[i].second};
        for (double v : evidence[i]) row.push_back(evidence_missing(v) ? "" : fmt_full(v));
        rows.push_back(std::move(row));
    }
    write_csv_file(path, header, rows);
}

EvidenceVector project_evidence(const EvidenceSchema& from, const EvidenceVector& x,
                                const EvidenceSchema& to) {
    if (x.size() != from.size()) throw DataError("evidence vector does not match schema");
    EvidenceVector out(to.size(), evidence_missing_value());
    for (size_t i = 0; i < to.size(); ++i) {
        auto j = from.index_of(to.names[i]);
        if (!j) throw DataError("evidence projection: missing variable " + to.names[i]);
        out[i] = x[*j];
    }
    return out;
}

}  // namespace linkage
