#include "linkage/linkage_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "linkage/csv.hpp"

namespace linkage {

using nlohmann::json;

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> ids, double fill)
    : ids_(std::move(ids)), data_(pair_count(ids_.size()), fill) {
    std::vector<std::string> sorted = ids_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DataError("similarity matrix ids must be unique");
}

size_t SimilarityMatrix::tri_index(size_t i, size_t j) const {
    if (i > j) std::swap(i, j);
    if (i == j || j >= n()) throw DataError("similarity index out of range");
    // row-major upper triangle: row i holds n-1-i entries starting after rows 0..i-1
    return i * (2 * n() - i - 1) / 2 + (j - i - 1);
}

double SimilarityMatrix::at(size_t i, size_t j) const { return data_[tri_index(i, j)]; }
void SimilarityMatrix::set(size_t i, size_t j, double v) { data_[tri_index(i, j)] = v; }

size_t SimilarityMatrix::index_of(const std::string& id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw DataError("id not in similarity matrix: " + id);
    return size_t(it - ids_.begin());
}

void SimilarityMatrix::save_binary(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out.write("LNK1", 4);
    uint64_t count = n();
    out.write(reinterpret_cast<const char*>(&count), 8);
    for (double v : data_) {
        float f = float(v);
        out.write(reinterpret_cast<const char*>(&f), 4);
    }
    if (!out) throw DataError("write failed: " + path);
}

SimilarityMatrix SimilarityMatrix::load_binary(const std::string& path,
                                               std::vector<std::string> ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "LNK1", 4) != 0)
        throw DataError(path + ": not a LNK1 similarity file");
    uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 8);
    if (!in) throw DataError(path + ": truncated header");
    if (count != ids.size())
        throw DataError(path + ": file has " + std::to_string(count) + " items, ids list has " +
                        std::to_string(ids.size()));
    SimilarityMatrix m(std::move(ids));
    for (double& v : m.data_) {
        float f = 0.0f;
        in.read(reinterpret_cast<char*>(&f), 4);
        if (!in) throw DataError(path + ": truncated data");
        v = double(f);
    }
    char extra;
    if (in.read(&extra, 1)) throw DataError(path + ": trailing bytes");
    return m;
}

namespace {

SimilarityMatrix score_all_pairs(const CrimeDataset& ds, const PairScorer& scorer,
                                 const TransformConfig& cfg, bool parallel) {
    SimilarityMatrix m(ds.ids());
    size_t n = m.n();
    std::vector<double>& out = m.data();
    std::exception_ptr err;

    // flatten so each triangle entry is one independent work item
    int64_t total = int64_t(out.size());
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
    for (int64_t t = 0; t < total; ++t) {
        try {
            // invert the row-major triangle index
            size_t i = 0, rem = size_t(t);
            while (rem >= n - 1 - i) {
                rem -= n - 1 - i;
                ++i;
            }
            size_t j = i + 1 + rem;
            double s =
                score_record_pair(ds.records[i], ds.records[j], scorer, cfg);
            if (!std::isfinite(s))
                throw DataError("non-finite similarity for pair " + ds.records[i].id + "," +
                                ds.records[j].id);
            out[size_t(t)] = s;
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return m;
}

}  // namespace

SimilarityMatrix pairwise_similarities(const CrimeDataset& ds, const PairScorer& scorer,
                                       const TransformConfig& cfg) {
    return score_all_pairs(ds, scorer, cfg, true);
}

SimilarityMatrix pairwise_similarities_serial(const CrimeDataset& ds, const PairScorer& scorer,
                                              const TransformConfig& cfg) {
    return score_all_pairs(ds, scorer, cfg, false);
}

SimilarityMatrix similarity_from_external(const std::vector<std::string>& ids,
                                          const ExternalScores& scores) {
    SimilarityMatrix m(ids);
    for (size_t i = 0; i < ids.size(); ++i)
        for (size_t j = i + 1; j < ids.size(); ++j) {
            auto s = scores.get(ids[i], ids[j]);
            if (!s) throw DataError("external scores missing pair " + ids[i] + "," + ids[j]);
            if (!std::isfinite(*s))
                throw DataError("non-finite external score for " + ids[i] + "," + ids[j]);
            m.set(i, j, *s);
        }
    return m;
}

std::string linkage_to_string(LinkageMethod m) {
    switch (m) {
        case LinkageMethod::Single: return "single";
        case LinkageMethod::Complete: return "complete";
        default: return "average";
    }
}

LinkageMethod linkage_from_string(const std::string& s) {
    if (s == "single") return LinkageMethod::Single;
    if (s == "complete") return LinkageMethod::Complete;
    if (s == "average") return LinkageMethod::Average;
    throw DataError("bad linkage method: '" + s + "'");
}

namespace {

// candidate merge, ordered by score then lowest cluster id pair
struct Cand {
    double score = 0.0;
    int pmin = 0, pmax = 0;
};

bool better(const Cand& x, const Cand& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.pmin != y.pmin) return x.pmin < y.pmin;
    return x.pmax < y.pmax;
}

// Greedy agglomeration engine over a working copy of the triangle. Slots are
// fixed positions 0..n-1; a merge collapses into the lower slot. Each live
// slot caches its best partner among higher slots; merges invalidate exactly
// the caches whose value or tie order could have changed.
class Engine {
public:
    Engine(const SimilarityMatrix& sim, LinkageMethod method)
        : n_(sim.n()), method_(method), d_(sim.data()), active_(n_, true), cid_(n_), sz_(n_, 1),
          best_(n_), live_(n_) {
        for (size_t i = 0; i < n_; ++i) cid_[i] = int(i);
        next_id_ = int(n_);
        for (double v : d_)
            if (!std::isfinite(v)) throw DataError("similarity matrix has non-finite entries");
    }

    void merge_slots(size_t si, size_t sj, double score, bool forced,
                     std::vector<DendrogramMerge>& out) {
        int a = cid_[si], b = cid_[sj];
        out.push_back({std::min(a, b), std::max(a, b), next_id_, score, forced});

        for (size_t k = 0; k < n_; ++k) {
            if (!active_[k] || k == si || k == sj) continue;
            double va = val(k, si), vb = val(k, sj);
            double nv;
            switch (method_) {
                case LinkageMethod::Single: nv = std::max(va, vb); break;
                case LinkageMethod::Complete: nv = std::min(va, vb); break;
                default:
                    nv = (double(sz_[si]) * va + double(sz_[sj]) * vb) /
                         double(sz_[si] + sz_[sj]);
            }
            val(k, si) = nv;
        }
        sz_[si] += sz_[sj];
        cid_[si] = next_id_++;
        active_[sj] = false;
        --live_;

        // cache repair: row si changed wholesale; other rows only where they
        // referenced si or sj, or where the new (k, si) value can beat them
        best_[si].valid = false;
        for (size_t k = 0; k < sj; ++k) {
            if (!active_[k] || k == si || !best_[k].valid) continue;
            if (best_[k].partner == int(sj) || best_[k].partner == int(si)) {
                best_[k].valid = false;
            } else if (k < si) {
                Cand cand = cand_for(k, si);
                if (better(cand, {best_[k].score, best_[k].pmin, best_[k].pmax}))
                    best_[k] = {cand.score, int(si), cand.pmin, cand.pmax, true};
            }
        }
    }

    // best merge over all live slots, or nullopt when fewer than two remain
    struct Pick {
        size_t si, sj;
        double score;
    };
    std::optional<Pick> pick_best() {
        if (live_ < 2) return std::nullopt;
        bool have = false;
        Cand incumbent;
        size_t bi = 0, bj = 0;
        for (size_t i = 0; i < n_; ++i) {
            if (!active_[i]) continue;
            if (!best_[i].valid) recompute(i);
            if (best_[i].partner < 0) continue;
            Cand c{best_[i].score, best_[i].pmin, best_[i].pmax};
            if (!have || better(c, incumbent)) {
                incumbent = c;
                bi = i;
                bj = size_t(best_[i].partner);
                have = true;
            }
        }
        if (!have) return std::nullopt;
        return Pick{bi, bj, incumbent.score};
    }

    size_t live() const { return live_; }

private:
    struct Best {
        double score = 0.0;
        int partner = -1;
        int pmin = 0, pmax = 0;
        bool valid = false;
    };

    double& val(size_t i, size_t j) {
        if (i > j) std::swap(i, j);
        return d_[i * (2 * n_ - i - 1) / 2 + (j - i - 1)];
    }

    Cand cand_for(size_t i, size_t j) {
        Cand c;
        c.score = val(i, j);
        c.pmin = std::min(cid_[i], cid_[j]);
        c.pmax = std::max(cid_[i], cid_[j]);
        return c;
    }

    void recompute(size_t i) {
        Best b;
        for (size_t j = i + 1; j < n_; ++j) {
            if (!active_[j]) continue;
            Cand c = cand_for(i, j);
            if (b.partner < 0 || better(c, {b.score, b.pmin, b.pmax}))
                b = {c.score, int(j), c.pmin, c.pmax, true};
        }
        b.valid = true;
        best_[i] = b;
    }

    size_t n_;
    LinkageMethod method_;
    std::vector<double> d_;
    std::vector<char> active_;
    std::vector<int> cid_;
    std::vector<int> sz_;
    std::vector<Best> best_;
    size_t live_ = 0;
    int next_id_ = 0;
};

}  // namespace

Dendrogram agglomerate(const SimilarityMatrix& sim, LinkageMethod method,
                       const std::optional<Partition>& init, std::optional<double> stop_below) {
    Dendrogram dend;
    dend.leaves = sim.ids();
    dend.method = method;
    size_t n = sim.n();
    if (n < 2) return dend;

    Engine eng(sim, method);

    if (init) {
        // group leaf slots by init cluster, merge each group front-to-back
        std::map<int, std::vector<size_t>> groups;
        for (const auto& [id, cl] : *init) groups[cl].push_back(sim.index_of(id));
        std::vector<std::vector<size_t>> ordered;
        for (auto& [cl, slots] : groups) {
            std::sort(slots.begin(), slots.end());
            if (slots.size() > 1) ordered.push_back(std::move(slots));
        }
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& a, const auto& b) { return a.front() < b.front(); });
        for (const auto& slots : ordered)
            for (size_t k = 1; k < slots.size(); ++k)
                eng.merge_slots(slots[0], slots[k],
                                std::numeric_limits<double>::infinity(), true, dend.merges);
    }

    while (true) {
        auto pick = eng.pick_best();
        if (!pick) break;
        if (stop_below && pick->score < *stop_below) break;
        eng.merge_slots(pick->si, pick->sj, pick->score, false, dend.merges);
    }
    return dend;
}

std::string Dendrogram::to_json() const {
    json j;
    j["leaves"] = leaves;
    j["method"] = linkage_to_string(method);
    json ms = json::array();
    for (const auto& m : merges) {
        json mj;
        mj["a"] = m.a;
        mj["b"] = m.b;
        mj["id"] = m.id;
        // +inf (forced merges) has no JSON number; encode as null
        mj["score"] = std::isfinite(m.score) ? json(m.score) : json();
        mj["forced"] = m.forced;
        ms.push_back(std::move(mj));
    }
    j["merges"] = ms;
    return j.dump(2) + "\n";
}

Dendrogram Dendrogram::from_json(const std::string& text) {
    Dendrogram d;
    try {
        json j = json::parse(text);
        d.leaves = j.at("leaves").get<std::vector<std::string>>();
        d.method = linkage_from_string(j.at("method").get<std::string>());
        for (const auto& mj : j.at("merges")) {
            DendrogramMerge m;
            m.a = mj.at("a").get<int>();
            m.b = mj.at("b").get<int>();
            m.id = mj.at("id").get<int>();
            m.forced = mj.at("forced").get<bool>();
            m.score = mj.at("score").is_null() ? std::numeric_limits<double>::infinity()
                                               : mj.at("score").get<double>();
            d.merges.push_back(m);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("bad dendrogram json: ") + e.what());
    }
    if (d.merges.size() + 1 > d.leaves.size() && !d.leaves.empty())
        throw DataError("dendrogram has more merges than leaves allow");
    return d;
}

namespace {

std::string newick_quote(const std::string& name) {
    if (name.find_first_of(" (),:;'\"\t") == std::string::npos) return name;
    std::string out = "'";
    for (char c : name) {
        if (c == '\'') out += "''";
        else out += c;
    }
    out += "'";
    return out;
}

}  // namespace

std::string Dendrogram::to_newick() const {
    // node id -> newick fragment; merges reference earlier ids only
    std::map<int, std::string> frag;
    for (size_t i = 0; i < leaves.size(); ++i) frag[int(i)] = newick_quote(leaves[i]);
    for (const auto& m : merges) {
        std::string s = "(" + frag.at(m.a) + "," + frag.at(m.b) + ")";
        if (std::isfinite(m.score)) s += newick_quote(fmt_g6(m.score));
        frag.erase(m.a);
        frag.erase(m.b);
        frag[m.id] = std::move(s);
    }
    // forest: multiple roots become siblings under an unlabeled root
    std::string out;
    if (frag.size() == 1) {
        out = frag.begin()->second;
    } else {
        out = "(";
        bool first = true;
        for (const auto& [id, s] : frag) {
            if (!first) out += ",";
            out += s;
            first = false;
        }
        out += ")";
    }
    return out + ";\n";
}

Partition cut_dendrogram(const Dendrogram& dend, double threshold) {
    size_t n = dend.leaves.size();
    size_t total = n + dend.merges.size();
    std::vector<size_t> parent(total);
    for (size_t i = 0; i < total; ++i) parent[i] = i;
    auto find = [&](size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    for (const auto& m : dend.merges) {
        if (!(m.forced || m.score >= threshold)) continue;
        if (m.a < 0 || size_t(m.a) >= total || m.b < 0 || size_t(m.b) >= total || m.id < 0 ||
            size_t(m.id) >= total)
            throw DataError("dendrogram merge references bad node ids");
        parent[find(size_t(m.a))] = find(size_t(m.id));
        parent[find(size_t(m.b))] = find(size_t(m.id));
    }
    Partition p;
    std::map<size_t, int> root_to_cluster;
    for (size_t i = 0; i < n; ++i) {
        size_t r = find(i);
        p[dend.leaves[i]] = root_to_cluster.emplace(r, int(root_to_cluster.size())).first->second;
    }
    return p;
}

size_t cluster_count(const Partition& p) {
    std::vector<int> ids;
    for (const auto& [id, c] : p) ids.push_back(c);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids.size();
}

std::vector<std::vector<std::string>> partition_groups(const Partition& p) {
    std::map<int, std::vector<std::string>> by_cluster;
    for (const auto& [id, c] : p) by_cluster[c].push_back(id);
    std::vector<std::vector<std::string>> out;
    for (auto& [c, ids] : by_cluster) {
        std::sort(ids.begin(), ids.end());
        out.push_back(std::move(ids));
    }
    return out;
}

void write_partition_csv(const std::string& path, const Partition& p) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [id, c] : p) rows.push_back({id, std::to_string(c)});
    write_csv_file(path, {"crime_id", "cluster"}, rows);
}

Partition read_partition_csv(const std::string& path) {
    CsvTable t = read_csv_file(path);
    int ci = t.column("crime_id"), cc = t.column("cluster");
    if (ci < 0 || cc < 0) throw DataError(path + ": partition csv needs crime_id,cluster");
    Partition p;
    for (const auto& row : t.rows) {
        if (p.count(row[ci])) throw DataError(path + ": duplicate crime_id " + row[ci]);
        p[row[ci]] = int(parse_long(row[cc], "cluster"));
    }
    return p;
}

}  // namespace linkage
