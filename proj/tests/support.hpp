#pragma once
// Shared test helpers: scratch dirs, quick record builders, and independent
// reference implementations used as oracles against the real code paths.

#include <map>
#include <string>
#include <vector>

#include "linkage/crime_data.hpp"
#include "linkage/linkage_cluster.hpp"

namespace testsup {

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const;
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

linkage::CrimeRecord rec(std::string id, double x, double y, double t0, double t1,
                         std::vector<std::string> offenders = {},
                         std::map<std::string, std::string> cats = {});

// Recompute-from-scratch agglomeration: every step re-derives all intercluster
// similarities from the original matrix. Same tie rule as the engine (highest
// score, then lowest (min cid, max cid)).
linkage::Dendrogram brute_agglomerate(const linkage::SimilarityMatrix& sim,
                                      linkage::LinkageMethod method);

// Conditional-entropy form VI(A,B) = H(A|B) + H(B|A), computed directly.
double vi_reference(const linkage::Partition& a, const linkage::Partition& b);

}  // namespace testsup
