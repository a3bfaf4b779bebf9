#ifndef SIGDECAY_REGRESSION_HPP
#define SIGDECAY_REGRESSION_HPP

#include "sigdecay/delimited.hpp"
#include "sigdecay/similarity.hpp"

#include <array>
#include <string>
#include <vector>

namespace sigdecay {

inline constexpr int kCovariateCount = 9;

/// Predictor order fixed across files, fits and reports.
extern const std::array<std::string_view, kCovariateCount> kCovariateNames;

struct CountyCovariates {
    std::string county_fips;
    std::string state;
    std::array<double, kCovariateCount> values{}; // proportions in [0, 1]
};

/// Reads the covariates file:
///   county_fips state pct_less_hs unemployment pct_rural pct_medicaid_dementia
///   pct_disability_dementia pct_dementia pct_black_dementia
///   pct_hispanic_dementia pct_asian_dementia
/// Proportions must be plain fractions in [0, 1]; percent strings are
/// rejected, not divided. A duplicate FIPS is fatal.
struct CovariateLoadResult {
    std::vector<CountyCovariates> records;
    std::vector<RowDiagnostic> rejects;
};
CovariateLoadResult load_covariates(const std::string &path, DelimitedFormat format = {});

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
};

struct RegressionResult {
    std::vector<Coefficient> coefficients; // intercept, predictors, state:XX FEs
    double r_squared = 0.0;
    std::size_t n_observations = 0;
    int fixed_effect_groups = 0;
    std::vector<std::string> dropped_collinear;

    const Coefficient &coefficient(std::string_view name) const;
    bool has_coefficient(std::string_view name) const;
};

/// Fits similarity ~ covariates + state fixed effects by least squares on an
/// orthogonal decomposition, with classical standard errors. Censored scores
/// are excluded; counties without covariates (or vice versa) drop out of the
/// join. The lexicographically first state is the fixed-effect reference;
/// with a single state the design has no indicator columns. Exactly
/// collinear columns are dropped later-first and reported.
RegressionResult fit_fixed_effects(const std::vector<SimilarityScore> &scores,
                                   const std::vector<CountyCovariates> &covariates);

/// Reads an estimate as an effect for a `delta` change of the predictor
/// (delta = 0.1 is the "per 10 percentage points" reading).
double interpret_delta(const RegressionResult &result, std::string_view predictor,
                       double delta);

/// Table-shaped report: one row per covariate predictor.
void write_regression_report(const std::string &path, const RegressionResult &result);

/// Side-by-side report for sensitivity variants: estimate, SE and
/// significance flag per labeled variant.
void write_sensitivity_report(const std::string &path,
                              const std::vector<std::pair<std::string, RegressionResult>>
                                  &variants);

} // namespace sigdecay

#endif
