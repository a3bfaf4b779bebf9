#ifndef SIGDECAY_PIPELINE_HPP
#define SIGDECAY_PIPELINE_HPP

#include "sigdecay/claims.hpp"
#include "sigdecay/regression.hpp"
#include "sigdecay/similarity.hpp"
#include "sigdecay/synthgen.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sigdecay {

inline constexpr std::string_view kVersion = "0.1.0";

/// Run configuration; file defaults overridden by CLI flags.
struct PipelineConfig {
    std::string beneficiaries;
    std::string hospitalizations;
    std::string covariates;
    std::string scores; // defaults to <out>/scores.tsv when empty
    StudyWindow window{Date::parse("2016-01-01").value(),
                       Date::parse("2018-12-31").value()};
    int min_age = 65;
    Granularity granularity = Granularity::Category5;
    double alpha = 0.05;
    int n_skewers = kDefaultSkewers;
    std::uint64_t seed = kDefaultSeed;
    int censor_threshold = kDefaultCensorThreshold;
    SimilarityMethod method = SimilarityMethod::RandomSkewers;
    StratumLevel level = StratumLevel::County;
    std::string out = "out";
    int workers = 0; // 0 = hardware
    bool sensitivity = false;
    std::string codebook_path; // optional override table

    void validate() const;
    std::string scores_path() const;
};

/// Reads config keys from a JSON file; unknown keys are rejected.
PipelineConfig load_pipeline_config(const std::string &path);

Granularity granularity_from_name(std::string_view name);
SimilarityMethod method_from_name(std::string_view name);
StratumLevel level_from_name(std::string_view name);

/// Loads inputs, applies the cohort filters, writes reject reports next to
/// the outputs.
Cohort load_and_build_cohort(const PipelineConfig &config);

struct StageResult {
    std::string name;
    std::size_t rows = 0;
};

/// Fig-1-style table: distinct patients per code, nationally.
StageResult run_frequencies(const PipelineConfig &config, const Cohort &cohort);
/// Per-stratum correlation matrices at the configured level plus national.
StageResult run_mine(const PipelineConfig &config, const Cohort &cohort);
/// Similarity scores for every stratum at the configured level.
StageResult run_similarity(const PipelineConfig &config, const Cohort &cohort);
/// Fixed-effects regression of county scores on covariates.
StageResult run_regress(const PipelineConfig &config);

/// cohort -> frequencies -> mine -> similarity -> regress, plus a manifest
/// with the config echo and per-stage row counts. Output bytes are fully
/// determined by (inputs, config); worker count never changes them.
std::vector<StageResult> run_pipeline(const PipelineConfig &config);

} // namespace sigdecay

#endif
