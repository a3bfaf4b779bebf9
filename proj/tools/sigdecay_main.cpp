// Command-line front end: synth | frequencies | mine | similarity | regress |
// pipeline. Exit codes: 0 success, 1 internal error, 2 input/config error,
// 3 statistical infeasibility.

#include "sigdecay/errors.hpp"
#include "sigdecay/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace sigdecay;

struct CliOptions {
    std::string config_path;
    std::optional<std::string> beneficiaries, hospitalizations, covariates, scores, out;
    std::optional<std::string> granularity, method, level;
    std::optional<std::string> window_start, window_end, codebook;
    std::optional<double> alpha;
    std::optional<int> skewers, censor_threshold, min_age, workers;
    std::optional<std::uint64_t> seed;
    bool sensitivity = false;
};

void add_common_flags(CLI::App *cmd, CliOptions &opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--beneficiaries", opts.beneficiaries, "beneficiaries input file");
    cmd->add_option("--hospitalizations", opts.hospitalizations,
                    "hospitalizations input file");
    cmd->add_option("--covariates", opts.covariates, "county covariates input file");
    cmd->add_option("--scores", opts.scores, "similarity score file (regress input)");
    cmd->add_option("--granularity", opts.granularity, "category5|code17");
    cmd->add_option("--method", opts.method, "random_skewers|one_minus_mad");
    cmd->add_option("--alpha", opts.alpha, "significance level for the correlation mask");
    cmd->add_option("--skewers", opts.skewers, "number of random skewer draws");
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_option("--censor-threshold", opts.censor_threshold,
                    "minimum stratum patient count");
    cmd->add_option("--level", opts.level, "state|county|race");
    cmd->add_option("--out", opts.out, "output directory");
    cmd->add_option("--min-age", opts.min_age, "minimum age at first admission");
    cmd->add_option("--window-start", opts.window_start, "study window start (ISO date)");
    cmd->add_option("--window-end", opts.window_end, "study window end (ISO date)");
    cmd->add_option("--workers", opts.workers, "worker threads (0 = hardware)");
    cmd->add_option("--codebook", opts.codebook, "codebook override file");
    cmd->add_flag("--sensitivity", opts.sensitivity,
                  "also run the metric/granularity sensitivity variants");
}

PipelineConfig resolve_config(const CliOptions &opts) {
    PipelineConfig config;
    if (!opts.config_path.empty())
        config = load_pipeline_config(opts.config_path);
    if (opts.beneficiaries)
        config.beneficiaries = *opts.beneficiaries;
    if (opts.hospitalizations)
        config.hospitalizations = *opts.hospitalizations;
    if (opts.covariates)
        config.covariates = *opts.covariates;
    if (opts.scores)
        config.scores = *opts.scores;
    if (opts.out)
        config.out = *opts.out;
    if (opts.granularity)
        config.granularity = granularity_from_name(*opts.granularity);
    if (opts.method)
        config.method = method_from_name(*opts.method);
    if (opts.level)
        config.level = level_from_name(*opts.level);
    if (opts.alpha)
        config.alpha = *opts.alpha;
    if (opts.skewers)
        config.n_skewers = *opts.skewers;
    if (opts.seed)
        config.seed = *opts.seed;
    if (opts.censor_threshold)
        config.censor_threshold = *opts.censor_threshold;
    if (opts.min_age)
        config.min_age = *opts.min_age;
    if (opts.workers)
        config.workers = *opts.workers;
    if (opts.window_start) {
        const auto d = Date::parse(*opts.window_start);
        if (!d)
            throw InputError("invalid --window-start");
        config.window.start = *d;
    }
    if (opts.window_end) {
        const auto d = Date::parse(*opts.window_end);
        if (!d)
            throw InputError("invalid --window-end");
        config.window.end = *d;
    }
    if (opts.codebook)
        config.codebook_path = *opts.codebook;
    if (opts.sensitivity)
        config.sensitivity = true;
    config.validate();
    return config;
}

void print_stages(const std::vector<StageResult> &stages) {
    for (const auto &stage : stages)
        std::cout << stage.name << "\t" << stage.rows << "\n";
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Regional divergence of diagnosis-code usage in hospitalization claims"};
    app.require_subcommand(1);

    CliOptions opts;

    // synth
    auto *synth = app.add_subcommand("synth", "generate a synthetic scenario");
    std::string scenario = "uniform";
    std::string scenario_file;
    std::string synth_out = "out";
    std::uint64_t synth_seed = kDefaultSeed;
    std::optional<int> synth_counties, synth_patients, synth_states;
    std::optional<double> synth_visits, synth_noise;
    synth->add_option("--scenario", scenario, "uniform|planted-divergence|regression-recovery");
    synth->add_option("--scenario-file", scenario_file, "custom scenario JSON");
    synth->add_option("--seed", synth_seed, "generation seed");
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--counties", synth_counties, "baseline county count");
    synth->add_option("--patients", synth_patients, "patients per county");
    synth->add_option("--states", synth_states, "state count");
    synth->add_option("--visits", synth_visits, "mean hospitalizations per patient");
    synth->add_option("--noise", synth_noise, "regression noise sigma");

    auto *frequencies = app.add_subcommand("frequencies", "descriptive frequency reports");
    add_common_flags(frequencies, opts);
    auto *mine = app.add_subcommand("mine", "temporal pair mining and matrices");
    add_common_flags(mine, opts);
    auto *similarity = app.add_subcommand("similarity", "stratum-vs-national scores");
    add_common_flags(similarity, opts);
    auto *regress = app.add_subcommand("regress", "fixed-effects regression of scores");
    add_common_flags(regress, opts);
    auto *pipeline = app.add_subcommand("pipeline", "run every stage end to end");
    add_common_flags(pipeline, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) {
            ScenarioConfig scenario_config;
            if (!scenario_file.empty()) {
                scenario_config = scenario_from_json_file(scenario_file);
            } else {
                ScenarioOverrides overrides;
                overrides.counties = synth_counties;
                overrides.patients_per_county = synth_patients;
                overrides.states = synth_states;
                overrides.mean_visits = synth_visits;
                overrides.noise_sigma = synth_noise;
                scenario_config = make_scenario(scenario, overrides);
            }
            const GeneratedFiles files = generate(scenario_config, synth_seed, synth_out);
            std::cout << files.beneficiaries << "\n"
                      << files.hospitalizations << "\n"
                      << files.covariates << "\n"
                      << files.truth << "\n";
            if (files.planted_scores)
                std::cout << *files.planted_scores << "\n";
            return 0;
        }

        const PipelineConfig config = resolve_config(opts);
        if (pipeline->parsed()) {
            print_stages(run_pipeline(config));
        } else if (regress->parsed()) {
            print_stages({run_regress(config)});
        } else {
            const Cohort cohort = load_and_build_cohort(config);
            if (frequencies->parsed())
                print_stages({run_frequencies(config, cohort)});
            else if (mine->parsed())
                print_stages({run_mine(config, cohort)});
            else if (similarity->parsed())
                print_stages({run_similarity(config, cohort)});
        }
        return 0;
    } catch (const InputError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
