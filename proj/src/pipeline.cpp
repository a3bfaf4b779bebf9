#include "sigdecay/pipeline.hpp"

#include "sigdecay/errors.hpp"
#include "sigdecay/miner.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace sigdecay {

namespace {

using nlohmann::json;

std::string percent_text(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

} // namespace

void PipelineConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InputError("config: alpha must be in (0, 1)");
    if (n_skewers < 1)
        throw InputError("config: n_skewers must be >= 1");
    if (censor_threshold < 1)
        throw InputError("config: censor_threshold must be >= 1");
    if (min_age < 0)
        throw InputError("config: min_age must be nonnegative");
    if (window.end < window.start)
        throw InputError("config: study window end precedes start");
    if (out.empty())
        throw InputError("config: output directory not set");
}

std::string PipelineConfig::scores_path() const {
    return scores.empty() ? out + "/scores.tsv" : scores;
}

Granularity granularity_from_name(std::string_view name) {
    if (name == "category5")
        return Granularity::Category5;
    if (name == "code17")
        return Granularity::Code17;
    throw InputError("config: unknown granularity '" + std::string(name) +
                     "' (category5|code17)");
}

SimilarityMethod method_from_name(std::string_view name) {
    if (name == "random_skewers")
        return SimilarityMethod::RandomSkewers;
    if (name == "one_minus_mad")
        return SimilarityMethod::OneMinusMAD;
    throw InputError("config: unknown method '" + std::string(name) +
                     "' (random_skewers|one_minus_mad)");
}

StratumLevel level_from_name(std::string_view name) {
    if (name == "state")
        return StratumLevel::State;
    if (name == "county")
        return StratumLevel::County;
    if (name == "race")
        return StratumLevel::Race;
    throw InputError("config: unknown level '" + std::string(name) +
                     "' (state|county|race)");
}

PipelineConfig load_pipeline_config(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error &e) {
        throw InputError("config file " + path + ": " + e.what());
    }

    static const std::set<std::string> known = {
        "beneficiaries", "hospitalizations", "covariates", "scores",
        "window_start",  "window_end",       "min_age",    "granularity",
        "alpha",         "n_skewers",        "seed",       "censor_threshold",
        "method",        "level",            "out",        "workers",
        "sensitivity",   "codebook"};
    for (const auto &[key, value] : j.items()) {
        if (!known.count(key))
            throw InputError("config file " + path + ": unknown key '" + key + "'");
    }

    PipelineConfig config;
    config.beneficiaries = j.value("beneficiaries", config.beneficiaries);
    config.hospitalizations = j.value("hospitalizations", config.hospitalizations);
    config.covariates = j.value("covariates", config.covariates);
    config.scores = j.value("scores", config.scores);
    if (j.contains("window_start")) {
        const auto d = Date::parse(j["window_start"].get<std::string>());
        if (!d)
            throw InputError("config: invalid window_start");
        config.window.start = *d;
    }
    if (j.contains("window_end")) {
        const auto d = Date::parse(j["window_end"].get<std::string>());
        if (!d)
            throw InputError("config: invalid window_end");
        config.window.end = *d;
    }
    config.min_age = j.value("min_age", config.min_age);
    if (j.contains("granularity"))
        config.granularity = granularity_from_name(j["granularity"].get<std::string>());
    config.alpha = j.value("alpha", config.alpha);
    config.n_skewers = j.value("n_skewers", config.n_skewers);
    config.seed = j.value("seed", config.seed);
    config.censor_threshold = j.value("censor_threshold", config.censor_threshold);
    if (j.contains("method"))
        config.method = method_from_name(j["method"].get<std::string>());
    if (j.contains("level"))
        config.level = level_from_name(j["level"].get<std::string>());
    config.out = j.value("out", config.out);
    config.workers = j.value("workers", config.workers);
    config.sensitivity = j.value("sensitivity", config.sensitivity);
    config.codebook_path = j.value("codebook", config.codebook_path);
    return config;
}

Cohort load_and_build_cohort(const PipelineConfig &config) {
    config.validate();
    if (config.beneficiaries.empty() || config.hospitalizations.empty())
        throw InputError("config: beneficiaries and hospitalizations paths are required");
    std::filesystem::create_directories(config.out);

    const Codebook codebook = config.codebook_path.empty()
                                  ? Codebook::builtin()
                                  : Codebook::load(config.codebook_path);

    auto beneficiaries = load_beneficiaries(config.beneficiaries);
    write_diagnostics(config.out + "/rejects_beneficiaries.tsv", beneficiaries.rejects);
    auto hospitalizations = load_hospitalizations(config.hospitalizations, config.window);
    write_diagnostics(config.out + "/rejects_hospitalizations.tsv",
                      hospitalizations.rejects);

    return build_cohort(beneficiaries.records, hospitalizations.records, config.window,
                        config.min_age, codebook);
}

StageResult run_frequencies(const PipelineConfig &config, const Cohort &cohort) {
    std::filesystem::create_directories(config.out);
    const Codebook &codebook = cohort.codebook;
    const std::size_t n_patients = cohort.patients.size();
    std::size_t rows = 0;

    // Distinct patients per code ("at least one hospitalization with that code").
    std::vector<std::size_t> per_code(std::size_t(codebook.size()), 0);
    std::array<std::size_t, kCategoryCount> national_category{};
    std::map<std::string, std::array<std::size_t, kCategoryCount>> state_category;
    std::map<std::string, std::size_t> state_patients;
    std::vector<bool> seen_code(std::size_t(codebook.size()));
    std::array<bool, kCategoryCount> seen_category{};
    for (const auto &patient : cohort.patients) {
        std::fill(seen_code.begin(), seen_code.end(), false);
        seen_category.fill(false);
        for (const auto &event : patient.events) {
            seen_code[event.code_index] = true;
            seen_category[std::size_t(codebook.category_of(event.code_index))] = true;
        }
        auto &by_state = state_category[patient.state];
        for (std::size_t c = 0; c < seen_code.size(); ++c)
            per_code[c] += seen_code[c] ? 1 : 0;
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            national_category[c] += seen_category[c] ? 1 : 0;
            by_state[c] += seen_category[c] ? 1 : 0;
        }
        ++state_patients[patient.state];
    }

    {
        DelimitedWriter writer(config.out + "/code_frequencies.tsv");
        writer.write_header({"code", "category", "patients", "total_patients", "percent"});
        for (int c = 0; c < codebook.size(); ++c) {
            const double pct = n_patients == 0
                                   ? 0.0
                                   : 100.0 * double(per_code[std::size_t(c)]) /
                                         double(n_patients);
            writer.write_row({codebook.entry(c).code,
                              std::string(category_name(codebook.category_of(c))),
                              std::to_string(per_code[std::size_t(c)]),
                              std::to_string(n_patients), percent_text(pct)});
            ++rows;
        }
    }
    {
        DelimitedWriter writer(config.out + "/category_by_state.tsv");
        writer.write_header({"state", "category", "patients", "state_patients", "percent",
                             "national_patients", "national_total", "national_percent"});
        for (const auto &[state, counts] : state_category) {
            for (std::size_t c = 0; c < kCategoryCount; ++c) {
                const std::size_t denom = state_patients[state];
                const double pct =
                    denom == 0 ? 0.0 : 100.0 * double(counts[c]) / double(denom);
                const double national_pct =
                    n_patients == 0
                        ? 0.0
                        : 100.0 * double(national_category[c]) / double(n_patients);
                writer.write_row({state,
                                  std::string(category_name(DiagnosticCategory(c))),
                                  std::to_string(counts[c]), std::to_string(denom),
                                  percent_text(pct), std::to_string(national_category[c]),
                                  std::to_string(n_patients),
                                  percent_text(national_pct)});
                ++rows;
            }
        }
    }
    write_demographic_summary(config.out + "/demographics.tsv",
                              demographic_summary(cohort));
    return {"frequencies", rows};
}

StageResult run_mine(const PipelineConfig &config, const Cohort &cohort) {
    std::filesystem::create_directories(config.out);
    DelimitedWriter writer(config.out + "/matrices.tsv");
    writer.write_header({"stratum", "level", "bucket", "antecedent", "consequent", "rho",
                         "significant"});
    std::size_t rows = 0;

    const MinedStratum national = mine_stratum(cohort, {StratumLevel::National, ""},
                                               config.granularity, config.workers);
    const CorrelationMatrixSet national_matrices =
        build_matrices(national, config.alpha, config.workers);
    append_matrix_rows(writer, cohort.codebook, national_matrices);
    rows += std::size_t(national_matrices.dim) * std::size_t(national_matrices.dim) *
            kBucketCount;

    const auto selectors = strata_at_level(cohort, config.level);
    std::vector<CorrelationMatrixSet> per_stratum(selectors.size());
    parallel_chunks(selectors.size(), config.workers,
                    [&](int, std::size_t begin, std::size_t end) {
                        for (std::size_t s = begin; s < end; ++s) {
                            per_stratum[s] = build_matrices(
                                mine_stratum(cohort, selectors[s], config.granularity, 1),
                                config.alpha, 1);
                        }
                    });
    for (const auto &matrices : per_stratum) {
        append_matrix_rows(writer, cohort.codebook, matrices);
        rows += std::size_t(matrices.dim) * std::size_t(matrices.dim) * kBucketCount;
    }
    return {"mine", rows};
}

StageResult run_similarity(const PipelineConfig &config, const Cohort &cohort) {
    std::filesystem::create_directories(config.out);
    ScoreOptions options;
    options.method = config.method;
    options.granularity = config.granularity;
    options.alpha = config.alpha;
    options.n_skewers = config.n_skewers;
    options.seed = config.seed;
    options.censor_threshold = config.censor_threshold;
    options.workers = config.workers;
    const auto scores = score_strata(cohort, config.level, options);
    write_scores(config.scores_path(), scores);
    return {"similarity", scores.size()};
}

StageResult run_regress(const PipelineConfig &config) {
    std::filesystem::create_directories(config.out);
    if (config.covariates.empty())
        throw InputError("config: covariates path is required for the regression stage");
    auto covariates = load_covariates(config.covariates);
    write_diagnostics(config.out + "/rejects_covariates.tsv", covariates.rejects);
    const auto scores = load_scores(config.scores_path());
    const RegressionResult result = fit_fixed_effects(scores, covariates.records);
    write_regression_report(config.out + "/regression_report.tsv", result);
    return {"regress", result.coefficients.size()};
}

std::vector<StageResult> run_pipeline(const PipelineConfig &config) {
    config.validate();
    std::filesystem::create_directories(config.out);

    std::vector<StageResult> stages;
    const Cohort cohort = load_and_build_cohort(config);
    stages.push_back({"cohort", cohort.patients.size()});
    stages.push_back(run_frequencies(config, cohort));
    stages.push_back(run_mine(config, cohort));
    stages.push_back(run_similarity(config, cohort));
    stages.push_back(run_regress(config));

    if (config.sensitivity) {
        // Re-score under the alternative metric and alphabet, then report the
        // three variants side by side.
        std::vector<std::pair<std::string, RegressionResult>> variants;
        auto fitted = [&](SimilarityMethod method, Granularity granularity) {
            ScoreOptions options;
            options.method = method;
            options.granularity = granularity;
            options.alpha = config.alpha;
            options.n_skewers = config.n_skewers;
            options.seed = config.seed;
            options.censor_threshold = config.censor_threshold;
            options.workers = config.workers;
            const auto scores = score_strata(cohort, StratumLevel::County, options);
            const auto covariates = load_covariates(config.covariates);
            return fit_fixed_effects(scores, covariates.records);
        };
        variants.emplace_back("rs_category5", fitted(SimilarityMethod::RandomSkewers,
                                                     Granularity::Category5));
        variants.emplace_back("mad_category5", fitted(SimilarityMethod::OneMinusMAD,
                                                      Granularity::Category5));
        variants.emplace_back(
            "rs_code17", fitted(SimilarityMethod::RandomSkewers, Granularity::Code17));
        write_sensitivity_report(config.out + "/sensitivity_report.tsv", variants);
        stages.push_back({"sensitivity", variants.size()});
    }

    json manifest;
    manifest["version"] = std::string(kVersion);
    json config_echo;
    config_echo["beneficiaries"] = config.beneficiaries;
    config_echo["hospitalizations"] = config.hospitalizations;
    config_echo["covariates"] = config.covariates;
    config_echo["scores"] = config.scores_path();
    config_echo["window_start"] = config.window.start.to_string();
    config_echo["window_end"] = config.window.end.to_string();
    config_echo["min_age"] = config.min_age;
    config_echo["granularity"] = std::string(granularity_name(config.granularity));
    config_echo["alpha"] = config.alpha;
    config_echo["n_skewers"] = config.n_skewers;
    config_echo["seed"] = config.seed;
    config_echo["censor_threshold"] = config.censor_threshold;
    config_echo["method"] = std::string(method_name(config.method));
    config_echo["level"] = std::string(level_name(config.level));
    config_echo["out"] = config.out;
    config_echo["sensitivity"] = config.sensitivity;
    manifest["config"] = config_echo;
    json stages_json = json::array();
    for (const auto &stage : stages) {
        json s;
        s["name"] = stage.name;
        s["rows"] = stage.rows;
        stages_json.push_back(std::move(s));
    }
    manifest["stages"] = stages_json;

    std::ofstream out(config.out + "/manifest.json");
    if (!out)
        throw InputError("cannot open output file: " + config.out + "/manifest.json");
    out << manifest.dump(2) << "\n";
    return stages;
}

} // namespace sigdecay
