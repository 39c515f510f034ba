#pragma once
// Bayes factor models over pair evidence: discretized naive Bayes and
// weighted logistic regression, plus decision helpers and external scores.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "linkage/evidence.hpp"
#include "linkage/training_pairs.hpp"

namespace linkage {

// Anything that turns an evidence vector (aligned to its schema) into a
// log Bayes factor for "same offender" vs "different offenders".
class PairScorer {
public:
    virtual ~PairScorer() = default;
    virtual const EvidenceSchema& schema() const = 0;
    virtual double log_bf(const EvidenceVector& x) const = 0;
};

// Interior cut points for (roughly) equal weighted mass per bin. Cuts are the
// smallest observed values whose cumulative weight reaches each k/n_bins
// share; duplicates collapse, so fewer than n_bins-1 cuts can come back.
std::vector<double> weighted_quantile_cuts(std::vector<std::pair<double, double>> value_weight,
                                           int n_bins);

struct NbComponent {
    std::string name;
    EvidenceKind kind = EvidenceKind::Numeric;
    std::vector<double> cut_points;  // numeric only, strictly ascending
    std::vector<double> log_bf;      // one per bin; empty = inert (always scores 0)

    int n_bins() const { return int(log_bf.size()); }
    // numeric: index of the half-open bin [cut[k-1], cut[k]); clamps at the ends
    int bin_of(double v) const;
    // 0 for missing values and inert components
    double score(double v) const;
};

struct NbFitOptions {
    int n_bins = 20;
    double alpha = 1.0;  // additive smoothing per bin
};

struct FitWarning {
    std::string variable;
    std::string message;
};

class NaiveBayesModel : public PairScorer {
public:
    NaiveBayesModel() = default;

    const EvidenceSchema& schema() const override { return schema_; }
    // sum of per-component scores, in schema order
    double log_bf(const EvidenceVector& x) const override;
    const std::vector<NbComponent>& components() const { return components_; }
    double alpha() const { return alpha_; }
    int requested_bins() const { return requested_bins_; }

    // model with the named component removed from both schema and scoring;
    // remaining component scores are untouched (no refit)
    NaiveBayesModel without(const std::string& variable) const;

    std::string to_json() const;
    static NaiveBayesModel from_json(const std::string& text);

    // columns: variable,bin,lo,hi,log_bf (lo/hi are -inf/inf at the ends)
    void write_component_curves_csv(const std::string& path) const;

private:
    EvidenceSchema schema_;
    std::vector<NbComponent> components_;
    double alpha_ = 1.0;
    int requested_bins_ = 20;

    friend NaiveBayesModel fit_naive_bayes(const std::vector<WeightedPair>&,
                                           const std::vector<EvidenceVector>&,
                                           const EvidenceSchema&, const NbFitOptions&,
                                           std::vector<FitWarning>*);
};

// Per-variable bin masses use that variable's observed (non-missing) weight
// totals, so each smoothed class distribution sums to one even with gaps.
NaiveBayesModel fit_naive_bayes(const std::vector<WeightedPair>& pairs,
                                const std::vector<EvidenceVector>& evidence,
                                const EvidenceSchema& schema, const NbFitOptions& opt,
                                std::vector<FitWarning>* warnings = nullptr);

enum class MissingPolicy { Strict, MeanImpute };

std::string missing_policy_to_string(MissingPolicy p);
MissingPolicy missing_policy_from_string(const std::string& s);

struct LogisticFitOptions {
    int max_iters = 50;
    double tol = 1e-8;  // max |coefficient step|
    MissingPolicy missing = MissingPolicy::Strict;
};

struct LogisticCoef {
    std::string name;  // "(intercept)" first, then schema order
    double estimate = 0.0;
    double std_error = 0.0;
};

class LogisticModel : public PairScorer {
public:
    LogisticModel() = default;

    const EvidenceSchema& schema() const override { return schema_; }
    // linear predictor minus the case-control offset phi
    double log_bf(const EvidenceVector& x) const override;
    double linear_predictor(const EvidenceVector& x) const;
    double phi() const { return phi_; }
    const std::vector<LogisticCoef>& coefficients() const { return coefs_; }
    int iterations() const { return iterations_; }
    MissingPolicy missing_policy() const { return missing_; }
    const std::vector<double>& imputed_means() const { return means_; }

    std::string to_json() const;
    static LogisticModel from_json(const std::string& text);

private:
    EvidenceSchema schema_;
    std::vector<LogisticCoef> coefs_;
    double phi_ = 0.0;
    int iterations_ = 0;
    MissingPolicy missing_ = MissingPolicy::Strict;
    std::vector<double> means_;

    friend LogisticModel fit_logistic(const std::vector<WeightedPair>&,
                                      const std::vector<EvidenceVector>&, const EvidenceSchema&,
                                      const LogisticFitOptions&);
};

// Design matrix with intercept column, shared by the fitter and diagnostics.
// Strict policy drops rows with any missing value; MeanImpute fills weighted
// means of the observed values.
struct LogisticDesign {
    std::vector<std::vector<double>> rows;  // each [1, x1..xp]
    std::vector<double> y;                  // 1 linked, 0 unlinked
    std::vector<double> w;
    std::vector<double> means;              // per variable, no intercept
    double phi = 0.0;
};

LogisticDesign build_logistic_design(const std::vector<WeightedPair>& pairs,
                                     const std::vector<EvidenceVector>& evidence,
                                     const EvidenceSchema& schema, MissingPolicy missing);

double weighted_logistic_loglik(const LogisticDesign& d, const std::vector<double>& beta);
std::vector<double> weighted_logistic_gradient(const LogisticDesign& d,
                                               const std::vector<double>& beta);

// IRLS. Throws DataError on separation (runaway coefficients), a singular
// information matrix, or failure to converge within max_iters.
LogisticModel fit_logistic(const std::vector<WeightedPair>& pairs,
                           const std::vector<EvidenceVector>& evidence,
                           const EvidenceSchema& schema, const LogisticFitOptions& opt);

// posterior odds = bayes_factor * prior_odds
double posterior_odds(double bayes_factor, double prior_odds);
// smallest Bayes factor at which linking beats not linking:
// (1 - p_linked) / p_linked * cost_false_link / cost_missed_link
double decision_threshold(double p_linked_prior, double cost_false_link, double cost_missed_link);

// Precomputed scores from an external model, keyed by canonical id pair.
struct ExternalScores {
    std::map<IdPair, double> scores;

    static ExternalScores from_csv(const std::string& path);  // id_a,id_b,score
    std::optional<double> get(const std::string& a, const std::string& b) const;
};

// evidence built from the scorer's own schema, then scored
double score_record_pair(const CrimeRecord& a, const CrimeRecord& b, const PairScorer& scorer,
                         const TransformConfig& cfg);

using AnyModel = std::variant<NaiveBayesModel, LogisticModel>;

void save_model_json(const AnyModel& model, const std::string& path);
AnyModel load_model_json(const std::string& path);
const PairScorer& scorer_of(const AnyModel& model);

}  // namespace linkage
