#ifndef SIGDECAY_MINER_HPP
#define SIGDECAY_MINER_HPP

#include "sigdecay/claims.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sigdecay {

/// Temporal distance between an antecedent and a consequent event.
/// Day-count conventions: month = 30 days, quarter = 90 days.
enum class LagBucket : std::uint8_t {
    Cooccurrence = 0,    // same day
    WithinOneMonth,      // 1..30 days
    OneToThreeMonths,    // 31..90 days
    OverThreeMonths,     // >= 91 days
};

inline constexpr int kBucketCount = 4;

std::string_view bucket_name(LagBucket bucket);

/// Maps a nonnegative day lag to its bucket; negative lag is a contract
/// violation (std::invalid_argument).
LagBucket assign_bucket(int lag_days);

/// Mining alphabet: the 17 individual codes or the 5 categories.
enum class Granularity : std::uint8_t { Code17, Category5 };

std::string_view granularity_name(Granularity granularity);

enum class StratumLevel : std::uint8_t { National, State, County, Race };

std::string_view level_name(StratumLevel level);

struct StratumSelector {
    StratumLevel level = StratumLevel::National;
    std::string value; // empty for National

    std::string id() const { return level == StratumLevel::National ? "national" : value; }
};

/// Pair-bucket counts for one patient, keyed by
/// (antecedent * dim + consequent) * kBucketCount + bucket.
using PatientPairCounts = std::unordered_map<std::uint32_t, std::uint32_t>;

inline std::uint32_t pair_key(int antecedent, int consequent, LagBucket bucket, int dim) {
    return std::uint32_t((antecedent * dim + consequent) * kBucketCount + int(bucket));
}

/// Enumerates every ordered pair of distinct events (e1, e2) with
/// date(e1) <= date(e2) — transitive, not just adjacent — and increments the
/// (id(e1), id(e2), bucket(lag)) count, where id is the code or category per
/// the granularity. Same-day distinct events yield both orderings; an event
/// never pairs with itself. Events must be sorted by date (same patient,
/// duplicates already collapsed); unsorted input throws.
PatientPairCounts mine_patient(std::span<const PatientEvent> events, Granularity granularity,
                               const Codebook &codebook);

/// Aggregated exposures for one stratum. pair_counts[key] holds
/// (local patient index, count) entries in ascending patient order; patients
/// absent from a pair implicitly count zero. id_event_counts is the dense
/// n x dim matrix of per-patient event counts per alphabet id.
struct MinedStratum {
    std::string stratum_id;
    StratumLevel level = StratumLevel::National;
    Granularity granularity = Granularity::Category5;
    int dim = 0;
    std::size_t patient_count = 0;
    std::vector<std::uint32_t> patient_index; // into cohort.patients
    std::vector<std::uint32_t> id_event_counts;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> pair_counts;

    std::uint32_t event_count(std::size_t patient, int id) const {
        return id_event_counts[patient * std::size_t(dim) + std::size_t(id)];
    }
};

/// Mines all patients matching the selector. Data-parallel over patients;
/// the merge is per-chunk in chunk order, so results are identical for any
/// worker count.
MinedStratum mine_stratum(const Cohort &cohort, const StratumSelector &selector,
                          Granularity granularity, int workers = 1);

/// Distinct selectors present in the cohort at `level`, sorted by value.
std::vector<StratumSelector> strata_at_level(const Cohort &cohort, StratumLevel level);

std::string_view stratum_value(const CohortPatient &patient, StratumLevel level);

/// Audit export: one row per (antecedent, consequent, bucket, patient).
void write_exposures(const std::string &path, const Cohort &cohort,
                     const MinedStratum &stratum);

/// Alphabet label for an id at the stratum's granularity.
std::string alphabet_label(const Codebook &codebook, Granularity granularity, int id);

} // namespace sigdecay

#endif
