#include "sigdecay/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace sigdecay {

namespace {

bool is_constant(std::span<const double> v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] != v[0])
            return false;
    }
    return true;
}

/// Pearson correlation of two rank vectors. Both are known non-constant.
double rank_pearson(std::span<const double> rx, std::span<const double> ry) {
    const std::size_t n = rx.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += rx[i];
        mean_y += ry[i];
    }
    mean_x /= double(n);
    mean_y /= double(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean_x;
        const double dy = ry[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    const double rho = sxy / std::sqrt(sxx * syy);
    return std::clamp(rho, -1.0, 1.0);
}

} // namespace

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]])
            ++j;
        // Ranks are 1-based; a tie block [i, j] shares the block mean.
        const double rank = double(i + j) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double student_t_two_sided_p(double t, double degrees_of_freedom) {
    if (std::isinf(t))
        return 0.0;
    const boost::math::students_t dist(degrees_of_freedom);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

CorrelationOutcome spearman_from_ranks(std::span<const double> x_ranks,
                                       std::span<const double> y) {
    if (x_ranks.size() != y.size())
        throw std::invalid_argument("spearman: length mismatch");
    const std::size_t n = y.size();
    CorrelationOutcome outcome;
    outcome.n = n;
    if (n < 3 || is_constant(y))
        return outcome;
    const std::vector<double> y_ranks = average_ranks(y);
    const double rho = rank_pearson(x_ranks, y_ranks);
    outcome.rho = rho;
    const double denom = 1.0 - rho * rho;
    if (denom <= 0.0) {
        outcome.p_value = 0.0;
    } else {
        const double t = rho * std::sqrt(double(n - 2) / denom);
        outcome.p_value = student_t_two_sided_p(t, double(n - 2));
    }
    return outcome;
}

CorrelationOutcome spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("spearman: length mismatch");
    if (x.empty())
        throw std::invalid_argument("spearman: empty input");
    CorrelationOutcome outcome;
    outcome.n = x.size();
    if (x.size() < 3 || is_constant(x) || is_constant(y))
        return outcome;
    const std::vector<double> x_ranks = average_ranks(x);
    return spearman_from_ranks(x_ranks, y);
}

MultipleTestResult holm_bonferroni(std::span<const double> p_values, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("holm_bonferroni: alpha must be in (0, 1)");
    for (const double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("holm_bonferroni: p-value outside [0, 1]");
    }
    const std::size_t m = p_values.size();
    MultipleTestResult result;
    result.alpha = alpha;
    result.adjusted_p.resize(m);
    result.reject.resize(m);
    if (m == 0)
        return result;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (p_values[a] != p_values[b])
            return p_values[a] < p_values[b];
        return a < b;
    });

    double running_max = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double scaled = std::min(1.0, double(m - k) * p_values[order[k]]);
        running_max = std::max(running_max, scaled);
        result.adjusted_p[order[k]] = running_max;
        result.reject[order[k]] = running_max <= alpha;
    }
    return result;
}

} // namespace sigdecay
