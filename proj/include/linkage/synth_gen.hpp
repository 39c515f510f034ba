#pragma once
// Synthetic crime data with controllable offender behavior: spatial anchors,
// activity windows, time-of-day/day-of-week habits, category preferences,
// interval-censored timestamps, and co-offending.

#include <cstdint>
#include <map>
#include <string>

#include "linkage/crime_data.hpp"

namespace linkage {

struct GeneratorConfig {
    uint64_t seed = 1;
    int n_offenders = 500;

    double sigma_anchor_km = 8.0;   // offender anchors around a common center
    double sigma_series_km = 0.5;   // crimes around their offender's anchor

    double span_days = 1095.0;      // observation period
    double window_days = 120.0;     // offender active window inside the span
    double persistent_prob = 0.1;   // chance the window is the whole span

    // series length distribution; long-tailed with mostly one-off offenders
    std::map<int, double> series_length_pmf = {{1, 0.832}, {2, 0.094}, {3, 0.036},
                                               {4, 0.013}, {5, 0.015}, {6, 0.010}};

    double tod_sd_hours = 2.5;      // spread around the preferred time of day
    double dow_adherence = 0.6;     // chance a crime snaps to the preferred weekday

    // category attribute -> number of levels
    std::map<std::string, int> category_levels = {{"moe", 7}, {"poe", 5}, {"prop", 6}};
    // Dirichlet concentration at each offender's preferred level (others get 1);
    // infinity makes the preference deterministic
    double category_concentration = 20.0;
    double category_missing_rate = 0.1;

    double co_offend_prob = 0.24;   // chance an offender gets a partner
    double joint_crime_prob = 0.5;  // chance a partnered crime lists both

    // timestamp censoring: exact, else a window of the given width
    double exact_time_prob = 0.26;
    std::map<double, double> censor_width_pmf = {{6.0, 0.29}, {24.0, 0.30}, {72.0, 0.15}};
};

std::string generator_config_to_json(const GeneratorConfig& cfg);
GeneratorConfig generator_config_from_json(const std::string& text);

// Fully labeled dataset (every crime solved). Same seed, same bytes; the
// spatial scale parameters reuse the same unit draws, so sweeping a sigma
// holds everything else fixed. Throws DataError on infeasible configs.
CrimeDataset generate(const GeneratorConfig& cfg);

// copy with each crime's offender list cleared independently w.p. `fraction`
CrimeDataset erase_offender_labels(const CrimeDataset& ds, double fraction, uint64_t seed);

struct SplitReport {
    double cutoff_hours = 0.0;
    size_t n_train = 0;
    size_t n_test = 0;
    size_t offenders_train = 0;
    size_t offenders_test = 0;
    size_t offenders_both = 0;  // offenders with solved crimes on both sides
};

// train = crimes with t_earliest < cutoff_hours, test = the rest; throws
// DataError when either side is empty
std::pair<CrimeDataset, CrimeDataset> split_train_test(const CrimeDataset& ds,
                                                       double cutoff_hours);
SplitReport split_report(const CrimeDataset& train, const CrimeDataset& test,
                         double cutoff_hours);
std::string split_report_to_json(const SplitReport& r);

}  // namespace linkage
