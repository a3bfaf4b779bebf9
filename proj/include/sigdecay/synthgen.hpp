#ifndef SIGDECAY_SYNTHGEN_HPP
#define SIGDECAY_SYNTHGEN_HPP

#include "sigdecay/claims.hpp"
#include "sigdecay/regression.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sigdecay {

/// Planted per-county generation parameters. Probability vectors must sum to
/// one (1e-9 tolerance); decay is the probability that a follow-up visit
/// replaces the previous code with a non-specific one.
struct CountyProfile {
    std::string county_fips;
    std::string state;
    int n_patients = 0;

    double female_share = 0.6;
    std::array<double, kRaceCount> race_mix = {0.058, 0.005, 0.022, 0.107,
                                               0.798, 0.006, 0.004};
    double medicaid_share = 0.33;
    double disability_share = 0.15;

    std::array<double, kCategoryCount> category_mix = {0.52, 0.11, 0.30, 0.01, 0.06};
    /// Code weights within each category; empty means uniform.
    std::array<std::vector<double>, kCategoryCount> code_mix{};
    double decay = 0.1;
    std::array<double, kBucketCount> gap_mix = {0.05, 0.35, 0.35, 0.25};
    double mean_visits = 3.0;
    double nursing_share = 0.0;

    // County context written to the covariates file.
    double pct_less_hs = 0.12;
    double unemployment = 0.05;
    double pct_rural = 0.2;
    int population = 20000;
};

/// Outcome plan for regression scenarios: a planted linear model from the
/// covariates to a synthetic similarity score, written alongside the claims.
struct RegressionPlan {
    double intercept = 0.55;
    std::array<double, kCovariateCount> coefficients{};
    double noise_sigma = 0.05;
    double state_effect_spread = 0.04; // planted offsets span +/- spread/2
};

struct ScenarioConfig {
    std::string name;
    StudyWindow window;
    std::vector<CountyProfile> counties; // sorted by county_fips
    std::map<std::string, double> divergence; // planted shift per county, 0 baseline
    std::optional<RegressionPlan> regression;
};

/// Ground truth emitted next to the generated files.
struct PlantedTruth {
    std::string scenario;
    std::uint64_t seed = 0;
    std::map<std::string, double> divergence;
    std::optional<RegressionPlan> regression;
    std::map<std::string, double> state_effects;
};

struct GeneratedFiles {
    std::string beneficiaries;
    std::string hospitalizations;
    std::string covariates;
    std::string truth;
    std::optional<std::string> planted_scores;
};

/// Tuning knobs for the built-in scenario library.
struct ScenarioOverrides {
    std::optional<int> counties;           // baseline county count
    std::optional<int> patients_per_county;
    std::optional<int> states;
    std::optional<double> mean_visits;
    std::optional<double> noise_sigma;
};

std::vector<std::string> scenario_names();

/// Built-in scenarios: "uniform" (every county shares the national profile),
/// "planted-divergence" (graded decay and category shifts in a subset of
/// counties) and "regression-recovery" (covariate-linked planted scores).
/// Throws InputError for an unknown name.
ScenarioConfig make_scenario(const std::string &name, const ScenarioOverrides &overrides = {});

/// Scenario config from a JSON description (see README for the keys).
ScenarioConfig scenario_from_json_file(const std::string &path);

/// Validates the config, then writes beneficiaries.tsv, hospitalizations.tsv,
/// covariates.tsv and truth.json (plus planted_scores.tsv for regression
/// scenarios) under outdir. Deterministic in (config, seed): county streams
/// are derived from (seed, county index) and rows are emitted in canonical
/// order (county, patient, date).
GeneratedFiles generate(const ScenarioConfig &config, std::uint64_t seed,
                        const std::string &outdir);

} // namespace sigdecay

#endif
