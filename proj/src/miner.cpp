#include "sigdecay/miner.hpp"

#include "sigdecay/parallel.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace sigdecay {

namespace {

constexpr std::array<std::string_view, kBucketCount> kBucketNames = {
    "cooccurrence", "within_one_month", "one_to_three_months", "over_three_months"};

constexpr std::array<std::string_view, 4> kLevelNames = {"national", "state", "county",
                                                         "race"};

int alphabet_dim(Granularity granularity, const Codebook &codebook) {
    return granularity == Granularity::Code17 ? codebook.size() : kCategoryCount;
}

/// Granularity id of each codebook index.
std::vector<std::uint8_t> alphabet_map(Granularity granularity, const Codebook &codebook) {
    std::vector<std::uint8_t> map(std::size_t(codebook.size()));
    for (int i = 0; i < codebook.size(); ++i) {
        map[std::size_t(i)] = granularity == Granularity::Code17
                                  ? std::uint8_t(i)
                                  : std::uint8_t(codebook.category_of(i));
    }
    return map;
}

void mine_into(std::span<const PatientEvent> events, std::span<const std::uint8_t> id_of,
               int dim, PatientPairCounts &out) {
    const std::size_t n = events.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const int id_i = id_of[events[i].code_index];
        for (std::size_t j = i + 1; j < n; ++j) {
            const int id_j = id_of[events[j].code_index];
            const int lag = events[j].date.days() - events[i].date.days();
            const LagBucket bucket = assign_bucket(lag);
            ++out[pair_key(id_i, id_j, bucket, dim)];
            if (lag == 0)
                ++out[pair_key(id_j, id_i, bucket, dim)];
        }
    }
}

} // namespace

std::string_view bucket_name(LagBucket bucket) { return kBucketNames[std::size_t(bucket)]; }

std::string_view level_name(StratumLevel level) { return kLevelNames[std::size_t(level)]; }

std::string_view granularity_name(Granularity granularity) {
    return granularity == Granularity::Code17 ? "code17" : "category5";
}

LagBucket assign_bucket(int lag_days) {
    if (lag_days < 0)
        throw std::invalid_argument("assign_bucket: negative lag");
    if (lag_days == 0)
        return LagBucket::Cooccurrence;
    if (lag_days <= 30)
        return LagBucket::WithinOneMonth;
    if (lag_days <= 90)
        return LagBucket::OneToThreeMonths;
    return LagBucket::OverThreeMonths;
}

PatientPairCounts mine_patient(std::span<const PatientEvent> events, Granularity granularity,
                               const Codebook &codebook) {
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i].date < events[i - 1].date)
            throw std::invalid_argument("mine_patient: events not sorted by date");
    }
    const auto id_of = alphabet_map(granularity, codebook);
    PatientPairCounts counts;
    mine_into(events, id_of, alphabet_dim(granularity, codebook), counts);
    return counts;
}

std::string_view stratum_value(const CohortPatient &patient, StratumLevel level) {
    switch (level) {
    case StratumLevel::State:
        return patient.state;
    case StratumLevel::County:
        return patient.county_fips;
    case StratumLevel::Race:
        return race_name(patient.race);
    case StratumLevel::National:
        break;
    }
    return {};
}

std::vector<StratumSelector> strata_at_level(const Cohort &cohort, StratumLevel level) {
    if (level == StratumLevel::National)
        return {StratumSelector{StratumLevel::National, ""}};
    std::set<std::string> values;
    for (const auto &p : cohort.patients)
        values.emplace(stratum_value(p, level));
    std::vector<StratumSelector> out;
    out.reserve(values.size());
    for (const auto &v : values)
        out.push_back({level, v});
    return out;
}

MinedStratum mine_stratum(const Cohort &cohort, const StratumSelector &selector,
                          Granularity granularity, int workers) {
    MinedStratum stratum;
    stratum.stratum_id = selector.id();
    stratum.level = selector.level;
    stratum.granularity = granularity;
    stratum.dim = alphabet_dim(granularity, cohort.codebook);

    for (std::uint32_t i = 0; i < cohort.patients.size(); ++i) {
        if (selector.level == StratumLevel::National ||
            stratum_value(cohort.patients[i], selector.level) == selector.value)
            stratum.patient_index.push_back(i);
    }
    stratum.patient_count = stratum.patient_index.size();

    const std::size_t n = stratum.patient_count;
    const int dim = stratum.dim;
    const std::size_t key_count = std::size_t(dim) * std::size_t(dim) * kBucketCount;
    stratum.id_event_counts.assign(n * std::size_t(dim), 0);
    stratum.pair_counts.assign(key_count, {});

    const auto id_of = alphabet_map(granularity, cohort.codebook);

    workers = resolve_workers(workers);
    using ChunkPairs = std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>;
    std::vector<ChunkPairs> chunk_results(std::size_t(std::min<std::size_t>(workers, n ? n : 1)));

    parallel_chunks(n, workers, [&](int chunk, std::size_t begin, std::size_t end) {
        ChunkPairs local(key_count);
        PatientPairCounts patient_counts;
        std::vector<std::uint32_t> keys;
        for (std::size_t p = begin; p < end; ++p) {
            const CohortPatient &patient =
                cohort.patients[stratum.patient_index[p]];
            for (const auto &event : patient.events)
                ++stratum.id_event_counts[p * std::size_t(dim) +
                                          id_of[event.code_index]];
            patient_counts.clear();
            mine_into(patient.events, id_of, dim, patient_counts);
            // Per-key appends stay in ascending patient order within a chunk.
            keys.clear();
            for (const auto &[key, count] : patient_counts)
                keys.push_back(key);
            std::sort(keys.begin(), keys.end());
            for (const auto key : keys)
                local[key].emplace_back(std::uint32_t(p), patient_counts[key]);
        }
        chunk_results[std::size_t(chunk)] = std::move(local);
    });

    // Chunks cover ascending patient ranges; concatenating in chunk order
    // keeps every per-key list sorted by patient index.
    for (auto &chunk : chunk_results) {
        if (chunk.empty())
            continue;
        for (std::size_t key = 0; key < key_count; ++key) {
            auto &dst = stratum.pair_counts[key];
            auto &src = chunk[key];
            dst.insert(dst.end(), src.begin(), src.end());
        }
    }
    return stratum;
}

std::string alphabet_label(const Codebook &codebook, Granularity granularity, int id) {
    if (granularity == Granularity::Code17)
        return codebook.entry(id).code;
    return std::string(category_name(DiagnosticCategory(id)));
}

void write_exposures(const std::string &path, const Cohort &cohort,
                     const MinedStratum &stratum) {
    DelimitedWriter writer(path);
    writer.write_header(
        {"stratum", "antecedent", "consequent", "bucket", "patient_id", "count"});
    const int dim = stratum.dim;
    for (std::size_t key = 0; key < stratum.pair_counts.size(); ++key) {
        const int bucket = int(key % kBucketCount);
        const int consequent = int(key / kBucketCount) % dim;
        const int antecedent = int(key / kBucketCount) / dim;
        for (const auto &[patient, count] : stratum.pair_counts[key]) {
            writer.write_row(
                {stratum.stratum_id,
                 alphabet_label(cohort.codebook, stratum.granularity, antecedent),
                 alphabet_label(cohort.codebook, stratum.granularity, consequent),
                 std::string(bucket_name(LagBucket(bucket))),
                 cohort.patients[stratum.patient_index[patient]].patient_id,
                 std::to_string(count)});
        }
    }
}

} // namespace sigdecay
