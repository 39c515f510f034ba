#include "linkage/synth_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "linkage/csv.hpp"
#include "linkage/rng.hpp"

namespace linkage {

using nlohmann::json;

namespace {

void validate(const GeneratorConfig& c) {
    if (c.n_offenders < 1) throw DataError("n_offenders must be >= 1");
    if (c.sigma_anchor_km < 0.0 || c.sigma_series_km < 0.0)
        throw DataError("sigma parameters must be >= 0");
    if (c.span_days <= 0.0) throw DataError("span_days must be positive");
    if (c.window_days <= 0.0 || c.window_days > c.span_days)
        throw DataError("window_days must lie in (0, span_days]");
    if (c.span_days < 1.0) throw DataError("span too short: need at least one day");
    if (c.persistent_prob < 0.0 || c.persistent_prob > 1.0)
        throw DataError("persistent_prob must lie in [0, 1]");
    if (c.series_length_pmf.empty()) throw DataError("series_length_pmf is empty");
    double s = 0.0;
    for (const auto& [len, p] : c.series_length_pmf) {
        if (len < 1) throw DataError("series lengths must be >= 1");
        if (p < 0.0) throw DataError("series length probabilities must be >= 0");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-6) throw DataError("series_length_pmf must sum to 1");
    if (c.tod_sd_hours < 0.0) throw DataError("tod_sd_hours must be >= 0");
    if (c.dow_adherence < 0.0 || c.dow_adherence > 1.0)
        throw DataError("dow_adherence must lie in [0, 1]");
    for (const auto& [name, k] : c.category_levels)
        if (k < 2) throw DataError("category " + name + " needs at least 2 levels");
    if (!(c.category_concentration > 0.0))  // inf allowed
        throw DataError("category_concentration must be positive");
    if (c.category_missing_rate < 0.0 || c.category_missing_rate >= 1.0)
        throw DataError("category_missing_rate must lie in [0, 1)");
    if (c.co_offend_prob < 0.0 || c.co_offend_prob > 1.0)
        throw DataError("co_offend_prob must lie in [0, 1]");
    if (c.joint_crime_prob < 0.0 || c.joint_crime_prob > 1.0)
        throw DataError("joint_crime_prob must lie in [0, 1]");
    double cs = c.exact_time_prob;
    if (c.exact_time_prob < 0.0 || c.exact_time_prob > 1.0)
        throw DataError("exact_time_prob must lie in [0, 1]");
    for (const auto& [w, p] : c.censor_width_pmf) {
        if (w <= 0.0) throw DataError("censor widths must be positive");
        if (p < 0.0) throw DataError("censor probabilities must be >= 0");
        cs += p;
    }
    if (std::abs(cs - 1.0) > 1e-6)
        throw DataError("exact_time_prob plus censor_width_pmf must sum to 1");
}

std::string level_name(const std::string& cat, int level) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%02d", cat.c_str(), level);
    return buf;
}

std::string offender_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "o%04d", i);
    return buf;
}

std::string crime_name(size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "c%06zu", i);
    return buf;
}

// index from a pmf given one uniform draw; iteration over a sorted map
template <typename K>
K pick_from_pmf(const std::map<K, double>& pmf, double u) {
    double cum = 0.0;
    K last = pmf.begin()->first;
    for (const auto& [k, p] : pmf) {
        cum += p;
        last = k;
        if (u < cum) return k;
    }
    return last;
}

}  // namespace

CrimeDataset generate(const GeneratorConfig& cfg) {
    validate(cfg);
    int n = cfg.n_offenders;

    // partner assignment first, from its own stream, so offender substreams
    // stay aligned whatever the pairing outcome
    std::vector<int> partner(n, -1);
    {
        Rng pair_rng(mix_seed(cfg.seed, 0xC0FFEE));
        for (int i = 0; i + 1 < n; i += 2)
            if (pair_rng.uniform01() < cfg.co_offend_prob) {
                partner[i] = i + 1;
                partner[i + 1] = i;
            }
    }

    std::vector<std::string> cat_names;
    for (const auto& [name, k] : cfg.category_levels) cat_names.push_back(name);

    struct Proto {
        double x, y, te, tl;
        std::map<std::string, std::string> categories;
        std::vector<std::string> offenders;
    };
    std::vector<Proto> protos;

    int span_day_count = int(std::floor(cfg.span_days));

    for (int i = 0; i < n; ++i) {
        Rng r(mix_seed(cfg.seed, 0xA11CE000ULL + uint64_t(i)));

        double ax = cfg.sigma_anchor_km * r.normal();
        double ay = cfg.sigma_anchor_km * r.normal();

        bool persistent = r.uniform01() < cfg.persistent_prob;
        double window = persistent ? cfg.span_days : cfg.window_days;
        double start = r.uniform01() * (cfg.span_days - window);
        int start_day = int(std::floor(start));
        int window_day_count = std::max(1, int(std::floor(window)));

        int length = pick_from_pmf(cfg.series_length_pmf, r.uniform01());
        double tod_pref = r.uniform(0.0, 24.0);
        int dow_pref = int(r.uniform_index(7));

        // per-category level preference and a sampling profile around it
        std::map<std::string, std::vector<double>> profile;
        for (const auto& cat : cat_names) {
            int k = cfg.category_levels.at(cat);
            int pref = int(r.uniform_index(size_t(k)));
            std::vector<double> probs(k, 0.0);
            if (std::isinf(cfg.category_concentration)) {
                probs[pref] = 1.0;
            } else {
                double total = 0.0;
                for (int l = 0; l < k; ++l) {
                    probs[l] = r.gamma(l == pref ? cfg.category_concentration : 1.0);
                    total += probs[l];
                }
                for (double& p : probs) p /= total;
            }
            profile[cat] = std::move(probs);
        }

        for (int c = 0; c < length; ++c) {
            Proto p;
            p.x = ax + cfg.sigma_series_km * r.normal();
            p.y = ay + cfg.sigma_series_km * r.normal();

            int day = start_day + int(r.uniform_index(size_t(window_day_count)));
            if (r.uniform01() < cfg.dow_adherence) {
                int shift = (dow_pref - day % 7 + 7) % 7;
                day += shift;
            }
            day = std::min(day, span_day_count - 1);
            double hour = std::fmod(tod_pref + cfg.tod_sd_hours * r.normal(), 24.0);
            if (hour < 0.0) hour += 24.0;
            double t_true = double(day) * 24.0 + hour;

            double u = r.uniform01();
            if (u < cfg.exact_time_prob) {
                p.te = p.tl = t_true;
            } else {
                // rescale the leftover mass onto the width pmf
                double v = (u - cfg.exact_time_prob) / (1.0 - cfg.exact_time_prob);
                double width = pick_from_pmf(cfg.censor_width_pmf, v);
                double offset = r.uniform01() * width;
                p.te = t_true - offset;
                p.tl = p.te + width;
            }

            for (const auto& cat : cat_names) {
                double umiss = r.uniform01();
                double ulevel = r.uniform01();
                if (umiss < cfg.category_missing_rate) continue;
                const auto& probs = profile[cat];
                double cum = 0.0;
                int chosen = int(probs.size()) - 1;
                for (size_t l = 0; l < probs.size(); ++l) {
                    cum += probs[l];
                    if (ulevel < cum) {
                        chosen = int(l);
                        break;
                    }
                }
                p.categories[cat] = level_name(cat, chosen);
            }

            p.offenders.push_back(offender_name(i));
            if (partner[i] >= 0 && r.uniform01() < cfg.joint_crime_prob)
                p.offenders.push_back(offender_name(partner[i]));
            protos.push_back(std::move(p));
        }
    }

    std::vector<CrimeRecord> records;
    records.reserve(protos.size());
    for (size_t i = 0; i < protos.size(); ++i) {
        CrimeRecord rec;
        rec.id = crime_name(i);
        rec.x = protos[i].x;
        rec.y = protos[i].y;
        rec.t_earliest = protos[i].te;
        rec.t_latest = protos[i].tl;
        rec.categories = std::move(protos[i].categories);
        rec.offenders = std::move(protos[i].offenders);
        records.push_back(std::move(rec));
    }

    std::map<std::string, std::vector<std::string>> schemas;
    for (const auto& [name, k] : cfg.category_levels) {
        std::vector<std::string> levels;
        for (int l = 0; l < k; ++l) levels.push_back(level_name(name, l));
        schemas[name] = std::move(levels);
    }
    return make_dataset(std::move(records), std::move(schemas));
}

CrimeDataset erase_offender_labels(const CrimeDataset& ds, double fraction, uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0) throw DataError("fraction must lie in [0, 1]");
    Rng rng(mix_seed(seed, 0xE7A5E));
    std::vector<CrimeRecord> recs = ds.records;
    for (auto& r : recs)
        if (rng.uniform01() < fraction) r.offenders.clear();
    return make_dataset(std::move(recs), ds.category_schemas);
}

std::pair<CrimeDataset, CrimeDataset> split_train_test(const CrimeDataset& ds,
                                                       double cutoff_hours) {
    std::vector<CrimeRecord> train, test;
    for (const auto& r : ds.records)
        (r.t_earliest < cutoff_hours ? train : test).push_back(r);
    if (train.empty()) throw DataError("temporal split leaves no training crimes");
    if (test.empty()) throw DataError("temporal split leaves no test crimes");
    return {make_dataset(std::move(train), ds.category_schemas),
            make_dataset(std::move(test), ds.category_schemas)};
}

SplitReport split_report(const CrimeDataset& train, const CrimeDataset& test,
                         double cutoff_hours) {
    SplitReport rep;
    rep.cutoff_hours = cutoff_hours;
    rep.n_train = train.size();
    rep.n_test = test.size();
    std::set<std::string> otrain, otest;
    for (const auto& r : train.records) otrain.insert(r.offenders.begin(), r.offenders.end());
    for (const auto& r : test.records) otest.insert(r.offenders.begin(), r.offenders.end());
    rep.offenders_train = otrain.size();
    rep.offenders_test = otest.size();
    for (const auto& o : otest)
        if (otrain.count(o)) rep.offenders_both++;
    return rep;
}

std::string split_report_to_json(const SplitReport& r) {
    json j;
    j["cutoff_hours"] = r.cutoff_hours;
    j["n_train"] = r.n_train;
    j["n_test"] = r.n_test;
    j["offenders_train"] = r.offenders_train;
    j["offenders_test"] = r.offenders_test;
    j["offenders_both"] = r.offenders_both;
    return j.dump(2) + "\n";
}

std::string generator_config_to_json(const GeneratorConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["n_offenders"] = cfg.n_offenders;
    j["sigma_anchor_km"] = cfg.sigma_anchor_km;
    j["sigma_series_km"] = cfg.sigma_series_km;
    j["span_days"] = cfg.span_days;
    j["window_days"] = cfg.window_days;
    j["persistent_prob"] = cfg.persistent_prob;
    json pmf = json::object();
    for (const auto& [len, p] : cfg.series_length_pmf) pmf[std::to_string(len)] = p;
    j["series_length_pmf"] = pmf;
    j["tod_sd_hours"] = cfg.tod_sd_hours;
    j["dow_adherence"] = cfg.dow_adherence;
    j["category_levels"] = cfg.category_levels;
    j["category_concentration"] =
        std::isinf(cfg.category_concentration) ? json() : json(cfg.category_concentration);
    j["category_missing_rate"] = cfg.category_missing_rate;
    j["co_offend_prob"] = cfg.co_offend_prob;
    j["joint_crime_prob"] = cfg.joint_crime_prob;
    j["exact_time_prob"] = cfg.exact_time_prob;
    json cw = json::object();
    for (const auto& [w, p] : cfg.censor_width_pmf) cw[fmt_full(w)] = p;
    j["censor_width_pmf"] = cw;
    return j.dump(2) + "\n";
}

GeneratorConfig generator_config_from_json(const std::string& text) {
    GeneratorConfig cfg;
    try {
        json j = json::parse(text);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.n_offenders = j.value("n_offenders", cfg.n_offenders);
        cfg.sigma_anchor_km = j.value("sigma_anchor_km", cfg.sigma_anchor_km);
        cfg.sigma_series_km = j.value("sigma_series_km", cfg.sigma_series_km);
        cfg.span_days = j.value("span_days", cfg.span_days);
        cfg.window_days = j.value("window_days", cfg.window_days);
        cfg.persistent_prob = j.value("persistent_prob", cfg.persistent_prob);
        if (j.contains("series_length_pmf")) {
            cfg.series_length_pmf.clear();
            for (const auto& [k, v] : j.at("series_length_pmf").items())
                cfg.series_length_pmf[std::stoi(k)] = v.get<double>();
        }
        cfg.tod_sd_hours = j.value("tod_sd_hours", cfg.tod_sd_hours);
        cfg.dow_adherence = j.value("dow_adherence", cfg.dow_adherence);
        if (j.contains("category_levels"))
            cfg.category_levels = j.at("category_levels").get<std::map<std::string, int>>();
        if (j.contains("category_concentration")) {
            const auto& v = j.at("category_concentration");
            cfg.category_concentration =
                v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
        }
        cfg.category_missing_rate = j.value("category_missing_rate", cfg.category_missing_rate);
        cfg.co_offend_prob = j.value("co_offend_prob", cfg.co_offend_prob);
        cfg.joint_crime_prob = j.value("joint_crime_prob", cfg.joint_crime_prob);
        cfg.exact_time_prob = j.value("exact_time_prob", cfg.exact_time_prob);
        if (j.contains("censor_width_pmf")) {
            cfg.censor_width_pmf.clear();
            for (const auto& [k, v] : j.at("censor_width_pmf").items())
                cfg.censor_width_pmf[std::stod(k)] = v.get<double>();
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("bad generator config json: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw DataError("bad generator config json: non-numeric pmf key");
    }
    validate(cfg);
    return cfg;
}

}  // namespace linkage
