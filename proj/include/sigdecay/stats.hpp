#ifndef SIGDECAY_STATS_HPP
#define SIGDECAY_STATS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sigdecay {

/// Result of one correlation test. rho and p_value are set only when the
/// test is defined: both inputs non-constant and n >= 3. Undefined outcomes
/// represent "no test performed" and are excluded from multiple-testing
/// families rather than coerced to p = 1.
struct CorrelationOutcome {
    std::optional<double> rho;
    std::optional<double> p_value;
    std::size_t n = 0;

    bool defined() const { return rho.has_value(); }
};

/// Average ranks (1-based), ties share the mean of their rank block.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation with a two-sided p-value from the
/// t-approximation t = rho * sqrt((n-2) / (1 - rho^2)) on n-2 degrees of
/// freedom. Throws std::invalid_argument on length mismatch or n == 0.
CorrelationOutcome spearman(std::span<const double> x, std::span<const double> y);

/// Same test with the x ranks precomputed (callers batching many tests
/// against one antecedent). `x_ranks` must come from average_ranks and must
/// not be constant.
CorrelationOutcome spearman_from_ranks(std::span<const double> x_ranks,
                                       std::span<const double> y);

struct MultipleTestResult {
    std::vector<double> adjusted_p; // same order as the input
    std::vector<bool> reject;       // reject[i] <=> adjusted_p[i] <= alpha
    double alpha = 0.0;
};

/// Holm-Bonferroni step-down adjustment. Throws std::invalid_argument when a
/// p-value is outside [0, 1] or alpha is outside (0, 1).
MultipleTestResult holm_bonferroni(std::span<const double> p_values, double alpha);

/// Two-sided tail probability of the t distribution.
double student_t_two_sided_p(double t, double degrees_of_freedom);

} // namespace sigdecay

#endif
