#include "linkage/training_pairs.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "linkage/csv.hpp"
#include "linkage/rng.hpp"

namespace linkage {

using nlohmann::json;

std::string link_label_to_string(LinkLabel l) {
    switch (l) {
        case LinkLabel::Linked: return "linked";
        case LinkLabel::Unlinked: return "unlinked";
        default: return "unknown";
    }
}

LinkLabel link_label_from_string(const std::string& s) {
    if (s == "linked") return LinkLabel::Linked;
    if (s == "unlinked") return LinkLabel::Unlinked;
    if (s == "unknown") return LinkLabel::Unknown;
    throw DataError("bad link label: '" + s + "'");
}

namespace {

// index-based union-find with path halving
struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n) {
        for (size_t i = 0; i < n; ++i) parent[i] = i;
    }
    size_t find(size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

CrimeGroups build_offender_graph(const CrimeDataset& ds) {
    // union solved crimes through shared offenders
    std::map<std::string, size_t> offender_first;  // offender -> first crime index seen
    std::vector<size_t> solved_idx;
    for (size_t i = 0; i < ds.records.size(); ++i)
        if (ds.records[i].solved()) solved_idx.push_back(i);

    UnionFind uf(ds.records.size());
    for (size_t i : solved_idx) {
        for (const auto& off : ds.records[i].offenders) {
            auto [it, fresh] = offender_first.emplace(off, i);
            if (!fresh) uf.unite(i, it->second);
        }
    }

    std::map<size_t, std::vector<std::string>> by_root;
    for (size_t i : solved_idx) by_root[uf.find(i)].push_back(ds.records[i].id);

    CrimeGroups g;
    std::vector<std::vector<std::string>> groups;
    for (auto& [root, ids] : by_root) {
        std::sort(ids.begin(), ids.end());
        groups.push_back(std::move(ids));
    }
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (size_t gi = 0; gi < groups.size(); ++gi)
        for (const auto& id : groups[gi]) g.group_of[id] = gi;
    g.groups = std::move(groups);
    return g;
}

std::vector<WeightedPair> linked_pairs(const CrimeDataset& ds) {
    // offender -> sorted ids of their solved crimes
    std::map<std::string, std::vector<std::string>> series;
    for (const auto& r : ds.records)
        for (const auto& off : r.offenders) series[off].push_back(r.id);

    std::map<std::pair<std::string, std::string>, double> weight;
    for (auto& [off, ids] : series) {
        size_t n = ids.size();
        if (n < 2) continue;
        std::sort(ids.begin(), ids.end());
        double w = 2.0 / (double(n) * double(n - 1));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) {
                auto key = std::make_pair(ids[i], ids[j]);
                auto [it, fresh] = weight.emplace(key, w);
                if (!fresh) it->second = std::min(it->second, w);
            }
    }

    std::vector<WeightedPair> out;
    out.reserve(weight.size());
    for (const auto& [key, w] : weight)
        out.push_back({key.first, key.second, LinkLabel::Linked, w});
    return out;
}

std::vector<WeightedPair> unlinked_pairs(const CrimeDataset& ds, const CrimeGroups& groups,
                                         int k, uint64_t seed) {
    if (k < 1) throw DataError("unlinked sampling needs k >= 1");
    if (groups.groups.size() < 2) throw DataError("unlinked sampling needs at least two crime groups");
    (void)ds;

    // flat list of (group, id) in deterministic order for "other group" draws
    std::vector<std::pair<size_t, std::string>> all;
    for (size_t gi = 0; gi < groups.groups.size(); ++gi)
        for (const auto& id : groups.groups[gi]) all.emplace_back(gi, id);

    std::set<std::pair<std::string, std::string>> seen;
    for (size_t gi = 0; gi < groups.groups.size(); ++gi) {
        const auto& mine = groups.groups[gi];
        Rng rng(mix_seed(seed, 0x9a7b0000ULL + gi));
        for (int draw = 0; draw < k; ++draw) {
            const std::string& a = mine[rng.uniform_index(mine.size())];
            // rejection over the flat list keeps the draw uniform over other groups' crimes
            const std::string* b = nullptr;
            do {
                const auto& cand = all[rng.uniform_index(all.size())];
                if (cand.first != gi) b = &cand.second;
            } while (!b);
            seen.insert(a < *b ? std::make_pair(a, *b) : std::make_pair(*b, a));
        }
    }

    std::vector<WeightedPair> out;
    out.reserve(seen.size());
    for (const auto& [a, b] : seen) out.push_back({a, b, LinkLabel::Unlinked, 1.0});
    return out;
}

std::vector<WeightedPair> apply_time_window(const std::vector<WeightedPair>& pairs,
                                            const CrimeDataset& ds, double max_days,
                                            const TransformConfig& cfg) {
    if (max_days <= 0.0) throw DataError("time window must be positive");
    if (std::isinf(max_days)) return pairs;
    std::vector<WeightedPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        TemporalDiffs d = expected_temporal_diffs(ds.at(p.id_a), ds.at(p.id_b), cfg);
        if (d.temporal_days <= max_days) out.push_back(p);
    }
    return out;
}

std::string pair_sampling_config_to_json(const PairSamplingConfig& cfg) {
    json j;
    j["k_unlinked"] = cfg.k_unlinked;
    j["max_days"] = std::isinf(cfg.max_days) ? json() : json(cfg.max_days);
    j["rng_seed"] = cfg.rng_seed;
    return j.dump(2) + "\n";
}

PairSamplingConfig pair_sampling_config_from_json(const std::string& text) {
    PairSamplingConfig cfg;
    try {
        json j = json::parse(text);
        cfg.k_unlinked = j.value("k_unlinked", 20);
        if (j.contains("max_days") && !j.at("max_days").is_null())
            cfg.max_days = j.at("max_days").get<double>();
        else if (j.contains("max_days"))
            cfg.max_days = std::numeric_limits<double>::infinity();
        cfg.rng_seed = j.value("rng_seed", uint64_t(0));
    } catch (const json::exception& e) {
        throw DataError(std::string("bad pair sampling config json: ") + e.what());
    }
    return cfg;
}

std::vector<WeightedPair> build_training_pairs(const CrimeDataset& ds,
                                               const PairSamplingConfig& pcfg,
                                               const TransformConfig& tcfg) {
    CrimeDataset solved = solved_subset(ds);
    if (solved.records.empty()) throw DataError("no solved crimes to build training pairs from");
    CrimeGroups groups = build_offender_graph(solved);
    std::vector<WeightedPair> linked = linked_pairs(solved);
    std::vector<WeightedPair> unlinked =
        unlinked_pairs(solved, groups, pcfg.k_unlinked, pcfg.rng_seed);
    linked.insert(linked.end(), unlinked.begin(), unlinked.end());
    return apply_time_window(linked, solved, pcfg.max_days, tcfg);
}

void write_pairs_csv(const std::string& path, const std::vector<WeightedPair>& pairs) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(pairs.size());
    for (const auto& p : pairs)
        rows.push_back({p.id_a, p.id_b, link_label_to_string(p.label), fmt_full(p.weight)});
    write_csv_file(path, {"id_a", "id_b", "label", "weight"}, rows);
}

std::vector<WeightedPair> read_pairs_csv(const std::string& path) {
    CsvTable t = read_csv_file(path);
    int ca = t.column("id_a"), cb = t.column("id_b");
    int cl = t.column("label"), cw = t.column("weight");
    if (ca < 0 || cb < 0 || cl < 0 || cw < 0)
        throw DataError(path + ": pairs csv needs columns id_a,id_b,label,weight");
    std::vector<WeightedPair> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        WeightedPair p;
        p.id_a = row[ca];
        p.id_b = row[cb];
        if (p.id_b < p.id_a) std::swap(p.id_a, p.id_b);
        p.label = link_label_from_string(row[cl]);
        p.weight = parse_double(row[cw], "weight");
        if (p.weight < 0.0) throw DataError(path + ": negative pair weight");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<IdPair> pair_ids(const std::vector<WeightedPair>& pairs) {
    std::vector<IdPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.emplace_back(p.id_a, p.id_b);
    return out;
}

}  // namespace linkage
