#include "sigdecay/similarity.hpp"

#include "sigdecay/errors.hpp"
#include "sigdecay/parallel.hpp"
#include "sigdecay/rng.hpp"
#include "sigdecay/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace sigdecay {

namespace {

/// One candidate cell: the flat pair key plus its test outcome.
struct CellTest {
    std::uint32_t key = 0;
    double rho = 0.0;
    double p = 1.0;
};

bool constant_uint(std::span<const std::uint32_t> v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] != v[0])
            return false;
    }
    return true;
}

} // namespace

Eigen::MatrixXd CorrelationMatrixSet::block_diagonal() const {
    const int size = dim * kBucketCount;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(size, size);
    for (int b = 0; b < kBucketCount; ++b)
        block.block(b * dim, b * dim, dim, dim) = rho[std::size_t(b)];
    return block;
}

CorrelationMatrixSet build_matrices(const MinedStratum &stratum, double alpha, int workers) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("build_matrices: alpha must be in (0, 1)");

    CorrelationMatrixSet out;
    out.stratum_id = stratum.stratum_id;
    out.level = stratum.level;
    out.granularity = stratum.granularity;
    out.dim = stratum.dim;
    out.patient_count = stratum.patient_count;
    for (int b = 0; b < kBucketCount; ++b) {
        out.rho[std::size_t(b)] = Eigen::MatrixXd::Zero(out.dim, out.dim);
        out.significant[std::size_t(b)].setZero(out.dim, out.dim);
    }
    const std::size_t n = stratum.patient_count;
    if (n == 0)
        return out;

    const int dim = stratum.dim;

    // One slot per antecedent; each holds that antecedent's defined tests.
    std::vector<std::vector<CellTest>> per_antecedent(std::size_t(dim));
    parallel_chunks(std::size_t(dim), workers, [&](int, std::size_t begin, std::size_t end) {
        std::vector<double> x(n), y(n);
        std::vector<std::uint32_t> x_raw(n);
        for (std::size_t a = begin; a < end; ++a) {
            for (std::size_t p = 0; p < n; ++p)
                x_raw[p] = stratum.event_count(p, int(a));
            if (constant_uint(x_raw) || n < 3)
                continue;
            for (std::size_t p = 0; p < n; ++p)
                x[p] = double(x_raw[p]);
            const std::vector<double> x_ranks = average_ranks(x);
            auto &tests = per_antecedent[a];
            for (int c = 0; c < dim; ++c) {
                for (int b = 0; b < kBucketCount; ++b) {
                    const std::uint32_t key =
                        pair_key(int(a), c, LagBucket(b), dim);
                    const auto &entries = stratum.pair_counts[key];
                    if (entries.empty())
                        continue; // y identically zero
                    std::fill(y.begin(), y.end(), 0.0);
                    for (const auto &[patient, count] : entries)
                        y[patient] = double(count);
                    const CorrelationOutcome outcome = spearman_from_ranks(x_ranks, y);
                    if (!outcome.defined())
                        continue;
                    tests.push_back({key, *outcome.rho, *outcome.p_value});
                }
            }
        }
    });

    std::vector<CellTest> tests;
    for (const auto &group : per_antecedent)
        tests.insert(tests.end(), group.begin(), group.end());
    out.tests_performed = long(tests.size());
    if (tests.empty())
        return out;

    std::vector<double> p_values(tests.size());
    for (std::size_t i = 0; i < tests.size(); ++i)
        p_values[i] = tests[i].p;
    const MultipleTestResult adjusted = holm_bonferroni(p_values, alpha);

    for (std::size_t i = 0; i < tests.size(); ++i) {
        if (!adjusted.reject[i])
            continue;
        const std::uint32_t key = tests[i].key;
        const int bucket = int(key % kBucketCount);
        const int consequent = int(key / kBucketCount) % dim;
        const int antecedent = int(key / kBucketCount) / dim;
        out.rho[std::size_t(bucket)](antecedent, consequent) = tests[i].rho;
        out.significant[std::size_t(bucket)](antecedent, consequent) = 1;
    }
    return out;
}

double random_skewers(const Eigen::MatrixXd &m1, const Eigen::MatrixXd &m2, int n_skewers,
                      std::uint64_t seed) {
    if (m1.rows() != m2.rows() || m1.cols() != m2.cols() || m1.rows() != m1.cols())
        throw std::invalid_argument("random_skewers: matrices must be square and equal size");
    if (n_skewers < 1)
        throw std::invalid_argument("random_skewers: n_skewers must be >= 1");

    const Eigen::Index dim = m1.rows();
    Eigen::VectorXd v(dim), r1(dim), r2(dim);
    double sum = 0.0;
    long used = 0;
    for (int j = 0; j < n_skewers; ++j) {
        Rng rng(mix_seed(seed, std::uint64_t(j)));
        for (Eigen::Index k = 0; k < dim; ++k)
            v[k] = rng.next_gaussian();
        const double norm = v.norm();
        if (norm == 0.0)
            continue;
        v /= norm;
        r1.noalias() = m1 * v;
        r2.noalias() = m2 * v;
        const double n1 = r1.norm();
        const double n2 = r2.norm();
        if (n1 == 0.0 || n2 == 0.0)
            continue;
        sum += r1.dot(r2) / (n1 * n2);
        ++used;
    }
    if (used == 0)
        throw InfeasibleError("random_skewers: every draw produced a zero response");
    return sum / double(used);
}

double one_minus_mad(const Eigen::MatrixXd &m1, const Eigen::MatrixXd &m2) {
    if (m1.rows() != m2.rows() || m1.cols() != m2.cols())
        throw std::invalid_argument("one_minus_mad: dimension mismatch");
    return 1.0 - (m1 - m2).cwiseAbs().mean();
}

std::string_view method_name(SimilarityMethod method) {
    return method == SimilarityMethod::RandomSkewers ? "random_skewers" : "one_minus_mad";
}

std::vector<SimilarityScore> score_strata(const Cohort &cohort, StratumLevel level,
                                          const ScoreOptions &options) {
    if (options.censor_threshold < 1)
        throw std::invalid_argument("score_strata: censor threshold must be >= 1");

    const MinedStratum national_mined = mine_stratum(
        cohort, {StratumLevel::National, ""}, options.granularity, options.workers);
    const CorrelationMatrixSet national =
        build_matrices(national_mined, options.alpha, options.workers);
    const Eigen::MatrixXd national_block = national.block_diagonal();

    const std::vector<StratumSelector> selectors = strata_at_level(cohort, level);
    std::vector<SimilarityScore> scores(selectors.size());

    parallel_chunks(selectors.size(), options.workers,
                    [&](int, std::size_t begin, std::size_t end) {
                        for (std::size_t s = begin; s < end; ++s) {
                            const MinedStratum mined =
                                mine_stratum(cohort, selectors[s], options.granularity, 1);
                            SimilarityScore &score = scores[s];
                            score.stratum_id = mined.stratum_id;
                            score.level = level;
                            score.method = options.method;
                            score.seed = options.seed;
                            score.patient_count = mined.patient_count;
                            if (mined.patient_count <
                                std::size_t(options.censor_threshold)) {
                                score.censored = true;
                                continue;
                            }
                            const CorrelationMatrixSet matrices =
                                build_matrices(mined, options.alpha, 1);
                            const Eigen::MatrixXd block = matrices.block_diagonal();
                            if (options.method == SimilarityMethod::RandomSkewers) {
                                score.n_skewers = options.n_skewers;
                                score.value = random_skewers(national_block, block,
                                                             options.n_skewers, options.seed);
                            } else {
                                score.value = one_minus_mad(national_block, block);
                            }
                        }
                    });
    return scores;
}

void append_matrix_rows(DelimitedWriter &writer, const Codebook &codebook,
                        const CorrelationMatrixSet &matrices) {
    for (int b = 0; b < kBucketCount; ++b) {
        for (int a = 0; a < matrices.dim; ++a) {
            for (int c = 0; c < matrices.dim; ++c) {
                writer.write_row(
                    {matrices.stratum_id, std::string(level_name(matrices.level)),
                     std::string(bucket_name(LagBucket(b))),
                     alphabet_label(codebook, matrices.granularity, a),
                     alphabet_label(codebook, matrices.granularity, c),
                     format_double(matrices.rho[std::size_t(b)](a, c)),
                     matrices.significant[std::size_t(b)](a, c) ? "1" : "0"});
            }
        }
    }
}

void write_scores(const std::string &path, const std::vector<SimilarityScore> &scores) {
    DelimitedWriter writer(path);
    writer.write_header({"stratum", "level", "method", "value", "patient_count", "censored",
                         "n_skewers", "seed"});
    for (const auto &s : scores) {
        writer.write_row({s.stratum_id, std::string(level_name(s.level)),
                          std::string(method_name(s.method)),
                          s.censored ? "" : format_double(s.value),
                          std::to_string(s.patient_count), s.censored ? "1" : "0",
                          std::to_string(s.n_skewers), std::to_string(s.seed)});
    }
}

std::vector<SimilarityScore> load_scores(const std::string &path, DelimitedFormat format) {
    DelimitedReader reader(path, format);
    const std::size_t stratum_col = reader.column("stratum");
    const std::size_t level_col = reader.column("level");
    const std::size_t method_col = reader.column("method");
    const std::size_t value_col = reader.column("value");
    const std::size_t patients_col = reader.column("patient_count");
    const std::size_t censored_col = reader.column("censored");
    const std::size_t skewers_col = reader.column("n_skewers");
    const std::size_t seed_col = reader.column("seed");

    std::vector<SimilarityScore> scores;
    while (reader.next_row()) {
        SimilarityScore s;
        s.stratum_id = std::string(reader.field(stratum_col));
        bool level_ok = false;
        for (int l = 0; l < 4; ++l) {
            if (level_name(StratumLevel(l)) == reader.field(level_col)) {
                s.level = StratumLevel(l);
                level_ok = true;
            }
        }
        if (!level_ok)
            throw InputError(path + ": unknown level at row " +
                             std::to_string(reader.row_number()));
        s.method = reader.field(method_col) == "one_minus_mad"
                       ? SimilarityMethod::OneMinusMAD
                       : SimilarityMethod::RandomSkewers;
        s.censored = reader.field(censored_col) == "1";
        if (!s.censored) {
            const auto value = parse_double(reader.field(value_col));
            if (!value)
                throw InputError(path + ": bad score value at row " +
                                 std::to_string(reader.row_number()));
            s.value = *value;
        }
        if (const auto patients = parse_int(reader.field(patients_col)))
            s.patient_count = std::size_t(*patients);
        if (const auto skewers = parse_int(reader.field(skewers_col)))
            s.n_skewers = *skewers;
        const std::string_view seed_text = reader.field(seed_col);
        unsigned long long seed_value = 0;
        std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed_value);
        s.seed = seed_value;
        scores.push_back(std::move(s));
    }
    return scores;
}

} // namespace sigdecay
