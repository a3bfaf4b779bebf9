#include "sigdecay/regression.hpp"

#include "sigdecay/errors.hpp"
#include "sigdecay/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

namespace sigdecay {

const std::array<std::string_view, kCovariateCount> kCovariateNames = {
    "pct_less_hs",
    "unemployment",
    "pct_rural",
    "pct_medicaid_dementia",
    "pct_disability_dementia",
    "pct_dementia",
    "pct_black_dementia",
    "pct_hispanic_dementia",
    "pct_asian_dementia",
};

CovariateLoadResult load_covariates(const std::string &path, DelimitedFormat format) {
    DelimitedReader reader(path, format);
    const std::size_t fips_col = reader.column("county_fips");
    const std::size_t state_col = reader.column("state");
    std::array<std::size_t, kCovariateCount> value_cols{};
    for (int i = 0; i < kCovariateCount; ++i)
        value_cols[std::size_t(i)] = reader.column(kCovariateNames[std::size_t(i)]);
    const std::size_t width = reader.header().size();

    CovariateLoadResult result;
    std::set<std::string> seen;
    while (reader.next_row()) {
        const std::size_t row = reader.row_number();
        auto reject = [&](std::string_view column, std::string reason) {
            result.rejects.push_back({row, std::string(column), std::move(reason)});
        };
        if (reader.field_count() != width) {
            reject("", "expected " + std::to_string(width) + " columns, found " +
                           std::to_string(reader.field_count()));
            continue;
        }
        CountyCovariates c;
        c.county_fips = std::string(reader.field(fips_col));
        if (c.county_fips.size() != 5) {
            reject("county_fips", "county_fips must be 5 digits");
            continue;
        }
        c.state = std::string(reader.field(state_col));
        bool ok = true;
        for (int i = 0; i < kCovariateCount && ok; ++i) {
            const std::string_view text = reader.field(value_cols[std::size_t(i)]);
            const auto value = parse_double(text);
            if (!value) {
                reject(kCovariateNames[std::size_t(i)],
                       "not a number: '" + std::string(text) + "'");
                ok = false;
            } else if (!(*value >= 0.0 && *value <= 1.0)) {
                reject(kCovariateNames[std::size_t(i)],
                       "proportion outside [0, 1]: '" + std::string(text) + "'");
                ok = false;
            } else {
                c.values[std::size_t(i)] = *value;
            }
        }
        if (!ok)
            continue;
        if (!seen.insert(c.county_fips).second)
            throw InputError(path + ": duplicate county_fips '" + c.county_fips +
                             "' at row " + std::to_string(row));
        result.records.push_back(std::move(c));
    }
    return result;
}

const Coefficient &RegressionResult::coefficient(std::string_view name) const {
    for (const auto &c : coefficients) {
        if (c.name == name)
            return c;
    }
    throw std::invalid_argument("unknown predictor: " + std::string(name));
}

bool RegressionResult::has_coefficient(std::string_view name) const {
    return std::any_of(coefficients.begin(), coefficients.end(),
                       [&](const Coefficient &c) { return c.name == name; });
}

RegressionResult fit_fixed_effects(const std::vector<SimilarityScore> &scores,
                                   const std::vector<CountyCovariates> &covariates) {
    std::unordered_map<std::string_view, const CountyCovariates *> by_fips;
    for (const auto &c : covariates)
        by_fips.emplace(c.county_fips, &c);

    // Join non-censored county scores with covariates; keep score order.
    std::vector<const SimilarityScore *> joined_scores;
    std::vector<const CountyCovariates *> joined_covs;
    std::set<std::string> states;
    for (const auto &s : scores) {
        if (s.censored)
            continue;
        const auto it = by_fips.find(s.stratum_id);
        if (it == by_fips.end())
            continue;
        joined_scores.push_back(&s);
        joined_covs.push_back(it->second);
        states.insert(it->second->state);
    }

    const std::size_t n = joined_scores.size();
    if (n == 0)
        throw InfeasibleError("regression: no non-censored scores joined to covariates");

    // Design: intercept, the nine covariates, then state indicators with the
    // lexicographically first state as reference.
    std::vector<std::string> column_names;
    column_names.emplace_back("intercept");
    for (const auto name : kCovariateNames)
        column_names.emplace_back(name);
    std::vector<std::string> fe_states(states.begin(), states.end());
    for (std::size_t s = 1; s < fe_states.size(); ++s)
        column_names.emplace_back("state:" + fe_states[s]);

    const std::size_t p_all = column_names.size();
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(p_all));
    Eigen::VectorXd y(Eigen::Index(n));
    std::map<std::string_view, std::size_t> state_column;
    for (std::size_t s = 1; s < fe_states.size(); ++s)
        state_column.emplace(fe_states[s], 1 + kCovariateCount + (s - 1));
    for (std::size_t i = 0; i < n; ++i) {
        y[Eigen::Index(i)] = joined_scores[i]->value;
        design(Eigen::Index(i), 0) = 1.0;
        for (int j = 0; j < kCovariateCount; ++j)
            design(Eigen::Index(i), 1 + j) = joined_covs[i]->values[std::size_t(j)];
        const auto it = state_column.find(joined_covs[i]->state);
        if (it != state_column.end())
            design(Eigen::Index(i), Eigen::Index(it->second)) = 1.0;
    }

    // Drop exactly collinear columns, later columns first: a column is kept
    // only if it adds rank on top of the columns kept before it (modified
    // Gram-Schmidt with a relative tolerance).
    RegressionResult result;
    std::vector<std::size_t> kept;
    std::vector<Eigen::VectorXd> basis; // orthonormal
    const double tol = 1e-9;
    for (std::size_t j = 0; j < p_all; ++j) {
        Eigen::VectorXd candidate = design.col(Eigen::Index(j));
        const double original_norm = candidate.norm();
        if (original_norm == 0.0) {
            result.dropped_collinear.push_back(column_names[j]);
            continue;
        }
        for (const auto &b : basis)
            candidate -= b.dot(candidate) * b;
        // Second pass for numerical orthogonality.
        for (const auto &b : basis)
            candidate -= b.dot(candidate) * b;
        if (candidate.norm() <= tol * original_norm) {
            result.dropped_collinear.push_back(column_names[j]);
            continue;
        }
        basis.push_back(candidate / candidate.norm());
        kept.push_back(j);
    }

    const std::size_t p = kept.size();
    if (n < p)
        throw InfeasibleError("regression: " + std::to_string(n) +
                              " observations for " + std::to_string(p) +
                              " parameters; need at least as many observations");

    Eigen::MatrixXd x(Eigen::Index(n), Eigen::Index(p));
    for (std::size_t j = 0; j < p; ++j)
        x.col(Eigen::Index(j)) = design.col(Eigen::Index(kept[j]));

    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd residuals = y - x * beta;
    const double ssr = residuals.squaredNorm();
    const double mean_y = y.mean();
    const double sst = (y.array() - mean_y).matrix().squaredNorm();
    result.r_squared = sst == 0.0 ? 0.0 : std::clamp(1.0 - ssr / sst, 0.0, 1.0);
    result.n_observations = n;
    result.fixed_effect_groups = int(states.size());

    const double df = double(n) - double(p);
    const double resvar = df > 0.0 ? ssr / df : std::numeric_limits<double>::quiet_NaN();

    // diag((X'X)^-1) from the R factor: squared row norms of R^-1.
    const Eigen::MatrixXd r_factor = qr.matrixQR()
                                         .topLeftCorner(Eigen::Index(p), Eigen::Index(p))
                                         .triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inverse =
        r_factor.triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(Eigen::Index(p), Eigen::Index(p)));

    result.coefficients.reserve(p);
    for (std::size_t j = 0; j < p; ++j) {
        Coefficient c;
        c.name = column_names[kept[j]];
        c.estimate = beta[Eigen::Index(j)];
        const double xtx_inv_jj = r_inverse.row(Eigen::Index(j)).squaredNorm();
        c.std_error = std::sqrt(resvar * xtx_inv_jj);
        if (c.std_error > 0.0 && df > 0.0) {
            c.t_stat = c.estimate / c.std_error;
            c.p_value = student_t_two_sided_p(c.t_stat, df);
        } else {
            c.t_stat = std::numeric_limits<double>::quiet_NaN();
            c.p_value = std::numeric_limits<double>::quiet_NaN();
        }
        result.coefficients.push_back(std::move(c));
    }
    return result;
}

double interpret_delta(const RegressionResult &result, std::string_view predictor,
                       double delta) {
    return result.coefficient(predictor).estimate * delta;
}

void write_regression_report(const std::string &path, const RegressionResult &result) {
    DelimitedWriter writer(path);
    writer.write_header(
        {"predictor", "estimate", "std_error", "t", "p", "significant_at_0.05"});
    for (const auto name : kCovariateNames) {
        if (!result.has_coefficient(name)) {
            writer.write_row({std::string(name), "", "", "", "", "dropped_collinear"});
            continue;
        }
        const Coefficient &c = result.coefficient(name);
        writer.write_row({std::string(name), format_double(c.estimate),
                          format_double(c.std_error), format_double(c.t_stat),
                          format_double(c.p_value), c.p_value <= 0.05 ? "1" : "0"});
    }
    writer.write_row({"r_squared", format_double(result.r_squared), "", "", "", ""});
    writer.write_row({"n_observations", std::to_string(result.n_observations), "", "", "",
                      ""});
    writer.write_row({"fixed_effect_groups", std::to_string(result.fixed_effect_groups), "",
                      "", "", ""});
}

void write_sensitivity_report(
    const std::string &path,
    const std::vector<std::pair<std::string, RegressionResult>> &variants) {
    DelimitedWriter writer(path);
    std::vector<std::string> header = {"predictor"};
    for (const auto &[label, result] : variants) {
        header.push_back(label + "_estimate");
        header.push_back(label + "_std_error");
        header.push_back(label + "_significant");
    }
    writer.write_header(header);
    for (const auto name : kCovariateNames) {
        std::vector<std::string> row = {std::string(name)};
        for (const auto &[label, result] : variants) {
            if (!result.has_coefficient(name)) {
                row.insert(row.end(), {"", "", "dropped"});
                continue;
            }
            const Coefficient &c = result.coefficient(name);
            row.push_back(format_double(c.estimate));
            row.push_back(format_double(c.std_error));
            row.push_back(c.p_value <= 0.05 ? "1" : "0");
        }
        writer.write_row(row);
    }
    std::vector<std::string> r2_row = {"r_squared"};
    for (const auto &[label, result] : variants) {
        r2_row.push_back(format_double(result.r_squared));
        r2_row.insert(r2_row.end(), {"", ""});
    }
    writer.write_row(r2_row);
}

} // namespace sigdecay
