#include "linkage/bf_models.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "linkage/csv.hpp"

namespace linkage {

using nlohmann::json;

std::vector<double> weighted_quantile_cuts(std::vector<std::pair<double, double>> vw,
                                           int n_bins) {
    if (n_bins < 1) throw DataError("n_bins must be >= 1");
    if (vw.empty()) throw DataError("quantile cuts need at least one observation");
    for (const auto& [v, w] : vw) {
        if (!std::isfinite(v)) throw DataError("non-finite value in quantile input");
        if (w < 0.0) throw DataError("negative weight in quantile input");
    }
    std::sort(vw.begin(), vw.end());
    double total = 0.0;
    for (const auto& [v, w] : vw) total += w;
    if (total <= 0.0) throw DataError("quantile cuts need positive total weight");

    std::vector<double> cuts;
    double cum = 0.0;
    size_t i = 0;
    for (int k = 1; k < n_bins; ++k) {
        double target = total * double(k) / double(n_bins);
        while (i < vw.size() && cum < target) cum += vw[i++].second;
        if (i >= vw.size()) break;  // remaining targets fall past the data
        double cut = vw[i - 1].first;
        if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
    }
    // a cut at the global minimum would leave an empty leading bin
    while (!cuts.empty() && cuts.front() <= vw.front().first) cuts.erase(cuts.begin());
    return cuts;
}

int NbComponent::bin_of(double v) const {
    if (kind == EvidenceKind::Binary) return v < 0.5 ? 0 : 1;
    auto it = std::upper_bound(cut_points.begin(), cut_points.end(), v);
    return int(it - cut_points.begin());
}

double NbComponent::score(double v) const {
    if (log_bf.empty() || evidence_missing(v)) return 0.0;
    return log_bf[bin_of(v)];
}

double NaiveBayesModel::log_bf(const EvidenceVector& x) const {
    if (x.size() != schema_.size()) throw DataError("evidence vector does not match model schema");
    double sum = 0.0;
    for (size_t i = 0; i < components_.size(); ++i) sum += components_[i].score(x[i]);
    return sum;
}

NaiveBayesModel NaiveBayesModel::without(const std::string& variable) const {
    auto idx = schema_.index_of(variable);
    if (!idx) throw DataError("model has no component named " + variable);
    NaiveBayesModel m = *this;
    m.schema_.names.erase(m.schema_.names.begin() + *idx);
    m.schema_.kinds.erase(m.schema_.kinds.begin() + *idx);
    m.components_.erase(m.components_.begin() + *idx);
    return m;
}

namespace {

const char* kind_name(EvidenceKind k) {
    return k == EvidenceKind::Numeric ? "numeric" : "binary";
}

EvidenceKind kind_from_name(const std::string& s) {
    if (s == "numeric") return EvidenceKind::Numeric;
    if (s == "binary") return EvidenceKind::Binary;
    throw DataError("bad evidence kind: " + s);
}

json schema_to_json(const EvidenceSchema& s) {
    json vars = json::array();
    for (size_t i = 0; i < s.size(); ++i)
        vars.push_back({{"name", s.names[i]}, {"kind", kind_name(s.kinds[i])}});
    return vars;
}

EvidenceSchema schema_from_json(const json& vars) {
    EvidenceSchema s;
    for (const auto& v : vars) {
        s.names.push_back(v.at("name").get<std::string>());
        s.kinds.push_back(kind_from_name(v.at("kind").get<std::string>()));
    }
    return s;
}

}  // namespace

std::string NaiveBayesModel::to_json() const {
    json j;
    j["type"] = "naive_bayes";
    j["alpha"] = alpha_;
    j["requested_bins"] = requested_bins_;
    j["schema"] = schema_to_json(schema_);
    json comps = json::array();
    for (const auto& c : components_) {
        comps.push_back({{"name", c.name},
                         {"kind", kind_name(c.kind)},
                         {"cut_points", c.cut_points},
                         {"log_bf", c.log_bf}});
    }
    j["components"] = comps;
    return j.dump(2) + "\n";
}

NaiveBayesModel NaiveBayesModel::from_json(const std::string& text) {
    NaiveBayesModel m;
    try {
        json j = json::parse(text);
        if (j.at("type") != "naive_bayes") throw DataError("model json is not naive_bayes");
        m.alpha_ = j.at("alpha").get<double>();
        m.requested_bins_ = j.at("requested_bins").get<int>();
        m.schema_ = schema_from_json(j.at("schema"));
        for (const auto& cj : j.at("components")) {
            NbComponent c;
            c.name = cj.at("name").get<std::string>();
            c.kind = kind_from_name(cj.at("kind").get<std::string>());
            c.cut_points = cj.at("cut_points").get<std::vector<double>>();
            c.log_bf = cj.at("log_bf").get<std::vector<double>>();
            m.components_.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("bad naive_bayes model json: ") + e.what());
    }
    if (m.components_.size() != m.schema_.size())
        throw DataError("naive_bayes model: components do not match schema");
    return m;
}

void NaiveBayesModel::write_component_curves_csv(const std::string& path) const {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : components_) {
        for (int b = 0; b < c.n_bins(); ++b) {
            double lo, hi;
            if (c.kind == EvidenceKind::Binary) {
                lo = hi = double(b);
            } else {
                lo = b == 0 ? -std::numeric_limits<double>::infinity() : c.cut_points[b - 1];
                hi = b == int(c.cut_points.size()) ? std::numeric_limits<double>::infinity()
                                                   : c.cut_points[b];
            }
            rows.push_back({c.name, std::to_string(b), fmt_full(lo), fmt_full(hi),
                            fmt_full(c.log_bf[b])});
        }
    }
    write_csv_file(path, {"variable", "bin", "lo", "hi", "log_bf"}, rows);
}

NaiveBayesModel fit_naive_bayes(const std::vector<WeightedPair>& pairs,
                                const std::vector<EvidenceVector>& evidence,
                                const EvidenceSchema& schema, const NbFitOptions& opt,
                                std::vector<FitWarning>* warnings) {
    if (pairs.size() != evidence.size()) throw DataError("pairs and evidence sizes differ");
    if (opt.n_bins < 1) throw DataError("n_bins must be >= 1");
    if (opt.alpha < 0.0) throw DataError("alpha must be >= 0");

    double total_l = 0.0, total_u = 0.0;
    for (const auto& p : pairs) {
        if (p.weight < 0.0) throw DataError("negative training pair weight");
        if (p.label == LinkLabel::Linked) total_l += p.weight;
        else if (p.label == LinkLabel::Unlinked) total_u += p.weight;
        else throw DataError("training pair with unknown label: " + p.id_a + "," + p.id_b);
    }
    if (total_l <= 0.0 || total_u <= 0.0)
        throw DataError("training pairs must carry positive weight in both classes");

    NaiveBayesModel m;
    m.schema_ = schema;
    m.alpha_ = opt.alpha;
    m.requested_bins_ = opt.n_bins;

    for (size_t vi = 0; vi < schema.size(); ++vi) {
        NbComponent c;
        c.name = schema.names[vi];
        c.kind = schema.kinds[vi];

        std::vector<std::pair<double, double>> pooled;  // value, weight (both classes)
        for (size_t i = 0; i < pairs.size(); ++i) {
            double v = evidence[i][vi];
            if (evidence_missing(v)) continue;
            if (c.kind == EvidenceKind::Binary && v != 0.0 && v != 1.0)
                throw DataError("binary variable " + c.name + " has value " + fmt_full(v));
            pooled.emplace_back(v, pairs[i].weight);
        }
        if (pooled.empty()) {
            if (warnings) warnings->push_back({c.name, "no observed values; component is inert"});
            m.components_.push_back(std::move(c));
            continue;
        }

        int n_bins;
        if (c.kind == EvidenceKind::Binary) {
            n_bins = 2;
        } else {
            c.cut_points = weighted_quantile_cuts(pooled, opt.n_bins);
            n_bins = int(c.cut_points.size()) + 1;
            if (n_bins < opt.n_bins && warnings)
                warnings->push_back({c.name, "only " + std::to_string(n_bins) +
                                                 " distinct bins available (" +
                                                 std::to_string(opt.n_bins) + " requested)"});
        }

        std::vector<double> lmass(n_bins, 0.0), umass(n_bins, 0.0);
        double lsum = 0.0, usum = 0.0;
        for (size_t i = 0; i < pairs.size(); ++i) {
            double v = evidence[i][vi];
            if (evidence_missing(v)) continue;
            int b = c.bin_of(v);
            if (pairs[i].label == LinkLabel::Linked) {
                lmass[b] += pairs[i].weight;
                lsum += pairs[i].weight;
            } else {
                umass[b] += pairs[i].weight;
                usum += pairs[i].weight;
            }
        }
        if (lsum <= 0.0 || usum <= 0.0) {
            if (warnings)
                warnings->push_back({c.name, "one class never observes this variable; inert"});
            c.cut_points.clear();
            m.components_.push_back(std::move(c));
            continue;
        }

        double a = opt.alpha;
        c.log_bf.resize(n_bins);
        for (int b = 0; b < n_bins; ++b) {
            double pl = (lmass[b] + a) / (lsum + a * n_bins);
            double pu = (umass[b] + a) / (usum + a * n_bins);
            if (pl <= 0.0 || pu <= 0.0)
                throw DataError("empty bin with alpha=0 for variable " + c.name +
                                "; increase alpha or reduce n_bins");
            c.log_bf[b] = std::log(pl) - std::log(pu);
        }
        m.components_.push_back(std::move(c));
    }
    return m;
}

std::string missing_policy_to_string(MissingPolicy p) {
    return p == MissingPolicy::Strict ? "strict" : "mean_impute";
}

MissingPolicy missing_policy_from_string(const std::string& s) {
    if (s == "strict") return MissingPolicy::Strict;
    if (s == "mean_impute") return MissingPolicy::MeanImpute;
    throw DataError("bad missing policy: " + s);
}

LogisticDesign build_logistic_design(const std::vector<WeightedPair>& pairs,
                                     const std::vector<EvidenceVector>& evidence,
                                     const EvidenceSchema& schema, MissingPolicy missing) {
    if (pairs.size() != evidence.size()) throw DataError("pairs and evidence sizes differ");
    size_t p = schema.size();

    LogisticDesign d;
    d.means.assign(p, 0.0);
    std::vector<double> wsum(p, 0.0);
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (evidence[i].size() != p) throw DataError("evidence vector does not match schema");
        for (size_t j = 0; j < p; ++j) {
            double v = evidence[i][j];
            if (evidence_missing(v)) continue;
            d.means[j] += pairs[i].weight * v;
            wsum[j] += pairs[i].weight;
        }
    }
    for (size_t j = 0; j < p; ++j) d.means[j] = wsum[j] > 0.0 ? d.means[j] / wsum[j] : 0.0;

    double total_l = 0.0, total_u = 0.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].label == LinkLabel::Unknown)
            throw DataError("training pair with unknown label: " + pairs[i].id_a + "," +
                            pairs[i].id_b);
        std::vector<double> row(p + 1, 1.0);
        bool skip = false;
        for (size_t j = 0; j < p; ++j) {
            double v = evidence[i][j];
            if (evidence_missing(v)) {
                if (missing == MissingPolicy::Strict) {
                    skip = true;
                    break;
                }
                v = d.means[j];
            }
            row[j + 1] = v;
        }
        if (skip) continue;
        d.rows.push_back(std::move(row));
        d.y.push_back(pairs[i].label == LinkLabel::Linked ? 1.0 : 0.0);
        d.w.push_back(pairs[i].weight);
        if (pairs[i].label == LinkLabel::Linked) total_l += pairs[i].weight;
        else total_u += pairs[i].weight;
    }
    if (total_l <= 0.0 || total_u <= 0.0)
        throw DataError("logistic design needs positive weight in both classes");
    d.phi = std::log(total_l) - std::log(total_u);
    return d;
}

namespace {

double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    double e = std::exp(eta);
    return e / (1.0 + e);
}

double log1pexp(double eta) {
    // log(1 + e^eta), stable for both signs
    return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
}

// Gaussian elimination with partial pivoting; A is overwritten.
std::vector<double> solve_linear(std::vector<std::vector<double>> A, std::vector<double> b) {
    size_t n = A.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-12)
            throw DataError("singular system (collinear or degenerate design)");
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (size_t r = col + 1; r < n; ++r) {
            double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t r = n; r-- > 0;) {
        double s = b[r];
        for (size_t c = r + 1; c < n; ++c) s -= A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    return x;
}

}  // namespace

double weighted_logistic_loglik(const LogisticDesign& d, const std::vector<double>& beta) {
    double ll = 0.0;
    for (size_t i = 0; i < d.rows.size(); ++i) {
        double eta = 0.0;
        for (size_t j = 0; j < beta.size(); ++j) eta += beta[j] * d.rows[i][j];
        ll += d.w[i] * (d.y[i] * eta - log1pexp(eta));
    }
    return ll;
}

std::vector<double> weighted_logistic_gradient(const LogisticDesign& d,
                                               const std::vector<double>& beta) {
    std::vector<double> g(beta.size(), 0.0);
    for (size_t i = 0; i < d.rows.size(); ++i) {
        double eta = 0.0;
        for (size_t j = 0; j < beta.size(); ++j) eta += beta[j] * d.rows[i][j];
        double r = d.w[i] * (d.y[i] - sigmoid(eta));
        for (size_t j = 0; j < beta.size(); ++j) g[j] += r * d.rows[i][j];
    }
    return g;
}

LogisticModel fit_logistic(const std::vector<WeightedPair>& pairs,
                           const std::vector<EvidenceVector>& evidence,
                           const EvidenceSchema& schema, const LogisticFitOptions& opt) {
    LogisticDesign d = build_logistic_design(pairs, evidence, schema, opt.missing);
    size_t n = d.rows.size();
    size_t pdim = schema.size() + 1;
    if (n < pdim) throw DataError("logistic fit needs at least as many rows as coefficients");

    std::vector<double> beta(pdim, 0.0);
    bool converged = false;
    int iter = 0;
    std::vector<std::vector<double>> H(pdim, std::vector<double>(pdim, 0.0));
    while (iter < opt.max_iters) {
        ++iter;
        for (auto& row : H) std::fill(row.begin(), row.end(), 0.0);
        std::vector<double> g(pdim, 0.0);
        for (size_t i = 0; i < n; ++i) {
            double eta = 0.0;
            for (size_t j = 0; j < pdim; ++j) eta += beta[j] * d.rows[i][j];
            double p = sigmoid(eta);
            double r = d.w[i] * (d.y[i] - p);
            double v = d.w[i] * p * (1.0 - p);
            for (size_t j = 0; j < pdim; ++j) {
                g[j] += r * d.rows[i][j];
                for (size_t k = j; k < pdim; ++k) H[j][k] += v * d.rows[i][j] * d.rows[i][k];
            }
        }
        for (size_t j = 0; j < pdim; ++j)
            for (size_t k = 0; k < j; ++k) H[j][k] = H[k][j];

        std::vector<double> step = solve_linear(H, g);
        double max_step = 0.0, max_beta = 0.0;
        for (size_t j = 0; j < pdim; ++j) {
            beta[j] += step[j];
            max_step = std::max(max_step, std::abs(step[j]));
            max_beta = std::max(max_beta, std::abs(beta[j]));
        }
        if (max_beta > 100.0)
            throw DataError("logistic fit diverged: classes appear perfectly separable");
        if (max_step < opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw DataError("logistic fit did not converge in " + std::to_string(opt.max_iters) +
                        " iterations");

    // std errors from the inverse information at the optimum
    for (auto& row : H) std::fill(row.begin(), row.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
        double eta = 0.0;
        for (size_t j = 0; j < pdim; ++j) eta += beta[j] * d.rows[i][j];
        double p = sigmoid(eta);
        double v = d.w[i] * p * (1.0 - p);
        for (size_t j = 0; j < pdim; ++j)
            for (size_t k = j; k < pdim; ++k) H[j][k] += v * d.rows[i][j] * d.rows[i][k];
    }
    for (size_t j = 0; j < pdim; ++j)
        for (size_t k = 0; k < j; ++k) H[j][k] = H[k][j];

    LogisticModel m;
    m.schema_ = schema;
    m.phi_ = d.phi;
    m.iterations_ = iter;
    m.missing_ = opt.missing;
    m.means_ = d.means;
    m.coefs_.resize(pdim);
    for (size_t j = 0; j < pdim; ++j) {
        m.coefs_[j].name = j == 0 ? "(intercept)" : schema.names[j - 1];
        m.coefs_[j].estimate = beta[j];
        std::vector<double> e(pdim, 0.0);
        e[j] = 1.0;
        std::vector<double> col = solve_linear(H, e);
        m.coefs_[j].std_error = col[j] > 0.0 ? std::sqrt(col[j]) : 0.0;
    }
    return m;
}

double LogisticModel::linear_predictor(const EvidenceVector& x) const {
    if (x.size() != schema_.size()) throw DataError("evidence vector does not match model schema");
    double eta = coefs_[0].estimate;
    for (size_t j = 0; j < schema_.size(); ++j) {
        double v = x[j];
        if (evidence_missing(v)) {
            if (missing_ == MissingPolicy::Strict)
                throw DataError("missing evidence for " + schema_.names[j] +
                                " under strict missing policy");
            v = means_[j];
        }
        eta += coefs_[j + 1].estimate * v;
    }
    return eta;
}

double LogisticModel::log_bf(const EvidenceVector& x) const { return linear_predictor(x) - phi_; }

std::string LogisticModel::to_json() const {
    json j;
    j["type"] = "logistic";
    j["phi"] = phi_;
    j["iterations"] = iterations_;
    j["missing_policy"] = missing_policy_to_string(missing_);
    j["schema"] = schema_to_json(schema_);
    j["means"] = means_;
    json coefs = json::array();
    for (const auto& c : coefs_)
        coefs.push_back({{"name", c.name}, {"estimate", c.estimate}, {"std_error", c.std_error}});
    j["coefficients"] = coefs;
    return j.dump(2) + "\n";
}

LogisticModel LogisticModel::from_json(const std::string& text) {
    LogisticModel m;
    try {
        json j = json::parse(text);
        if (j.at("type") != "logistic") throw DataError("model json is not logistic");
        m.phi_ = j.at("phi").get<double>();
        m.iterations_ = j.value("iterations", 0);
        m.missing_ = missing_policy_from_string(j.at("missing_policy").get<std::string>());
        m.schema_ = schema_from_json(j.at("schema"));
        m.means_ = j.at("means").get<std::vector<double>>();
        for (const auto& cj : j.at("coefficients")) {
            LogisticCoef c;
            c.name = cj.at("name").get<std::string>();
            c.estimate = cj.at("estimate").get<double>();
            c.std_error = cj.at("std_error").get<double>();
            m.coefs_.push_back(c);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("bad logistic model json: ") + e.what());
    }
    if (m.coefs_.size() != m.schema_.size() + 1 || m.means_.size() != m.schema_.size())
        throw DataError("logistic model: coefficients do not match schema");
    return m;
}

double posterior_odds(double bayes_factor, double prior_odds) {
    if (bayes_factor < 0.0) throw DataError("bayes factor must be >= 0");
    if (prior_odds < 0.0) throw DataError("prior odds must be >= 0");
    return bayes_factor * prior_odds;
}

double decision_threshold(double p_linked_prior, double cost_false_link,
                          double cost_missed_link) {
    if (!(p_linked_prior > 0.0 && p_linked_prior < 1.0))
        throw DataError("p_linked_prior must lie in (0, 1)");
    if (cost_false_link <= 0.0 || cost_missed_link <= 0.0)
        throw DataError("costs must be positive");
    return (1.0 - p_linked_prior) / p_linked_prior * (cost_false_link / cost_missed_link);
}

ExternalScores ExternalScores::from_csv(const std::string& path) {
    CsvTable t = read_csv_file(path);
    int ca = t.column("id_a"), cb = t.column("id_b"), cs = t.column("score");
    if (ca < 0 || cb < 0 || cs < 0)
        throw DataError(path + ": external scores need columns id_a,id_b,score");
    ExternalScores es;
    for (const auto& row : t.rows) {
        std::string a = row[ca], b = row[cb];
        if (a == b) throw DataError(path + ": self pair " + a);
        if (b < a) std::swap(a, b);
        double s = parse_double(row[cs], "score");
        if (!es.scores.emplace(IdPair{a, b}, s).second)
            throw DataError(path + ": duplicate pair " + a + "," + b);
    }
    return es;
}

std::optional<double> ExternalScores::get(const std::string& a, const std::string& b) const {
    IdPair key = a < b ? IdPair{a, b} : IdPair{b, a};
    auto it = scores.find(key);
    if (it == scores.end()) return std::nullopt;
    return it->second;
}

double score_record_pair(const CrimeRecord& a, const CrimeRecord& b, const PairScorer& scorer,
                         const TransformConfig& cfg) {
    return scorer.log_bf(make_evidence(a, b, cfg, scorer.schema()));
}

void save_model_json(const AnyModel& model, const std::string& path) {
    if (std::holds_alternative<NaiveBayesModel>(model))
        write_text_file(path, std::get<NaiveBayesModel>(model).to_json());
    else
        write_text_file(path, std::get<LogisticModel>(model).to_json());
}

AnyModel load_model_json(const std::string& path) {
    std::string text = read_text_file(path);
    std::string type;
    try {
        type = json::parse(text).value("type", "");
    } catch (const json::exception& e) {
        throw DataError(path + ": bad model json: " + e.what());
    }
    if (type == "naive_bayes") return NaiveBayesModel::from_json(text);
    if (type == "logistic") return LogisticModel::from_json(text);
    throw DataError(path + ": unknown model type '" + type + "'");
}

const PairScorer& scorer_of(const AnyModel& model) {
    if (std::holds_alternative<NaiveBayesModel>(model))
        return std::get<NaiveBayesModel>(model);
    return std::get<LogisticModel>(model);
}

}  // namespace linkage
