#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>

namespace fs = std::filesystem;
using namespace linkage;

namespace testsup {

TempDir::TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "linkage_test_XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path_ = buf.data();
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& name) const {
    return (fs::path(path_) / name).string();
}

CrimeRecord rec(std::string id, double x, double y, double t0, double t1,
                std::vector<std::string> offenders, std::map<std::string, std::string> cats) {
    CrimeRecord r;
    r.id = std::move(id);
    r.x = x;
    r.y = y;
    r.t_earliest = t0;
    r.t_latest = t1;
    r.offenders = std::move(offenders);
    std::sort(r.offenders.begin(), r.offenders.end());
    r.categories = std::move(cats);
    return r;
}

Dendrogram brute_agglomerate(const SimilarityMatrix& sim, LinkageMethod method) {
    size_t n = sim.n();
    Dendrogram d;
    d.leaves = sim.ids();
    d.method = method;
    if (n < 2) return d;

    struct Cluster {
        int cid;
        std::vector<size_t> members;  // leaf indices
    };
    std::vector<Cluster> live;
    for (size_t i = 0; i < n; ++i) live.push_back({int(i), {i}});
    int next_id = int(n);

    auto combine = [&](const Cluster& a, const Cluster& b) {
        double best_hi = -std::numeric_limits<double>::infinity();
        double best_lo = std::numeric_limits<double>::infinity();
        double sum = 0.0;
        for (size_t p : a.members)
            for (size_t q : b.members) {
                double v = sim.at(std::min(p, q), std::max(p, q));
                best_hi = std::max(best_hi, v);
                best_lo = std::min(best_lo, v);
                sum += v;
            }
        switch (method) {
            case LinkageMethod::Single: return best_hi;
            case LinkageMethod::Complete: return best_lo;
            default: return sum / double(a.members.size() * b.members.size());
        }
    };

    while (live.size() > 1) {
        size_t bi = 0, bj = 1;
        double bscore = 0.0;
        int bmin = 0, bmax = 0;
        bool have = false;
        for (size_t i = 0; i < live.size(); ++i)
            for (size_t j = i + 1; j < live.size(); ++j) {
                double s = combine(live[i], live[j]);
                int lo = std::min(live[i].cid, live[j].cid);
                int hi = std::max(live[i].cid, live[j].cid);
                bool wins = !have || s > bscore ||
                            (s == bscore && (lo < bmin || (lo == bmin && hi < bmax)));
                if (wins) {
                    have = true;
                    bscore = s;
                    bmin = lo;
                    bmax = hi;
                    bi = i;
                    bj = j;
                }
            }
        d.merges.push_back({bmin, bmax, next_id, bscore, false});
        live[bi].members.insert(live[bi].members.end(), live[bj].members.begin(),
                                live[bj].members.end());
        live[bi].cid = next_id++;
        live.erase(live.begin() + long(bj));
    }
    return d;
}

double vi_reference(const Partition& a, const Partition& b) {
    size_t n = a.size();
    if (n == 0) return 0.0;
    std::map<std::pair<int, int>, size_t> joint;
    std::map<int, size_t> ca, cb;
    for (const auto& [id, cl] : a) {
        int clb = b.at(id);
        joint[{cl, clb}]++;
        ca[cl]++;
        cb[clb]++;
    }
    double h_a_given_b = 0.0, h_b_given_a = 0.0;
    for (const auto& [key, cnt] : joint) {
        double p = double(cnt) / double(n);
        h_a_given_b -= p * std::log(p / (double(cb[key.second]) / double(n)));
        h_b_given_a -= p * std::log(p / (double(ca[key.first]) / double(n)));
    }
    return h_a_given_b + h_b_given_a;
}

}  // namespace testsup
