#ifndef SIGDECAY_SIMILARITY_HPP
#define SIGDECAY_SIMILARITY_HPP

#include "sigdecay/miner.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sigdecay {

/// Per-bucket correlation matrices for one stratum. Entries hold the
/// Spearman rho of (antecedent event counts, pair counts) over the stratum's
/// patients; cells whose test was undefined or not significant after the
/// Holm-Bonferroni adjustment are exactly zero.
struct CorrelationMatrixSet {
    std::string stratum_id;
    StratumLevel level = StratumLevel::National;
    Granularity granularity = Granularity::Category5;
    int dim = 0;
    std::size_t patient_count = 0;
    long tests_performed = 0;
    std::array<Eigen::MatrixXd, kBucketCount> rho;
    std::array<Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>, kBucketCount>
        significant;

    /// The four bucket matrices arranged as blocks of one square operand.
    Eigen::MatrixXd block_diagonal() const;
};

/// Builds the matrices for one mined stratum: the multiple-testing family is
/// every defined (antecedent, consequent, bucket) test within the stratum.
CorrelationMatrixSet build_matrices(const MinedStratum &stratum, double alpha,
                                    int workers = 1);

/// Random skewers similarity: mean cosine similarity of M1*v and M2*v over
/// n_skewers directions drawn uniformly on the unit sphere. The direction
/// stream is derived from (seed, skewer index) only. Draws where either
/// response is the zero vector are skipped; if every draw is skipped the
/// score is undefined (InfeasibleError).
double random_skewers(const Eigen::MatrixXd &m1, const Eigen::MatrixXd &m2, int n_skewers,
                      std::uint64_t seed);

/// 1 - mean absolute elementwise difference.
double one_minus_mad(const Eigen::MatrixXd &m1, const Eigen::MatrixXd &m2);

enum class SimilarityMethod : std::uint8_t { RandomSkewers, OneMinusMAD };

std::string_view method_name(SimilarityMethod method);

struct SimilarityScore {
    std::string stratum_id;
    StratumLevel level = StratumLevel::County;
    SimilarityMethod method = SimilarityMethod::RandomSkewers;
    double value = 0.0; // meaningful only when !censored
    int n_skewers = 0;
    std::uint64_t seed = 0;
    bool censored = false;
    std::size_t patient_count = 0;
};

inline constexpr int kDefaultSkewers = 10000;
inline constexpr int kDefaultCensorThreshold = 11;
inline constexpr std::uint64_t kDefaultSeed = 20160101;

struct ScoreOptions {
    SimilarityMethod method = SimilarityMethod::RandomSkewers;
    Granularity granularity = Granularity::Category5;
    double alpha = 0.05;
    int n_skewers = kDefaultSkewers;
    std::uint64_t seed = kDefaultSeed;
    int censor_threshold = kDefaultCensorThreshold;
    int workers = 1;
};

/// Scores every stratum at `level` against the national reference. Strata
/// with fewer patients than the censoring threshold are emitted with
/// censored = true and no value. The same skewer directions (same seed) are
/// used for every stratum so scores are comparable.
std::vector<SimilarityScore> score_strata(const Cohort &cohort, StratumLevel level,
                                          const ScoreOptions &options);

/// Matrix export rows: (stratum, bucket, antecedent, consequent, rho, significant).
void append_matrix_rows(DelimitedWriter &writer, const Codebook &codebook,
                        const CorrelationMatrixSet &matrices);

void write_scores(const std::string &path, const std::vector<SimilarityScore> &scores);

/// Reads a score export back (for the regression stage).
std::vector<SimilarityScore> load_scores(const std::string &path,
                                         DelimitedFormat format = {});

} // namespace sigdecay

#endif
