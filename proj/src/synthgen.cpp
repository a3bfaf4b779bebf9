#include "sigdecay/synthgen.hpp"

#include "sigdecay/errors.hpp"
#include "sigdecay/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace sigdecay {

namespace {

using nlohmann::json;

constexpr std::uint64_t kCovariateStream = 0xc0741a7e5ULL;
constexpr std::uint64_t kScoreNoiseStream = 0x5c07e9015eULL;

std::string pad_number(int value, int width) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%0*d", width, value);
    return buf;
}

std::string library_state_name(int index) {
    return std::string{char('A' + index % 26), char('A' + index / 26)};
}

std::string library_fips(int state_index, int county_ordinal) {
    return pad_number(state_index + 1, 2) + pad_number(county_ordinal, 3);
}

void check_probability_vector(std::span<const double> v, const std::string &what) {
    double sum = 0.0;
    for (const double p : v) {
        if (!(p >= 0.0 && p <= 1.0))
            throw InputError("scenario: " + what + " has entry outside [0, 1]");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw InputError("scenario: " + what + " must sum to 1 (got " +
                         std::to_string(sum) + ")");
}

void validate_profile(const CountyProfile &profile) {
    const std::string where = "county " + profile.county_fips;
    if (profile.county_fips.size() != 5)
        throw InputError("scenario: county_fips must be 5 digits (" + where + ")");
    if (profile.state.size() != 2)
        throw InputError("scenario: state must be 2 letters (" + where + ")");
    if (profile.n_patients < 0)
        throw InputError("scenario: negative n_patients (" + where + ")");
    check_probability_vector(profile.race_mix, where + " race_mix");
    check_probability_vector(profile.category_mix, where + " category_mix");
    check_probability_vector(profile.gap_mix, where + " gap_mix");
    for (const double share :
         {profile.female_share, profile.medicaid_share, profile.disability_share,
          profile.decay, profile.nursing_share, profile.pct_less_hs,
          profile.unemployment, profile.pct_rural}) {
        if (!(share >= 0.0 && share <= 1.0))
            throw InputError("scenario: share outside [0, 1] (" + where + ")");
    }
    if (profile.mean_visits < 1.0)
        throw InputError("scenario: mean_visits must be >= 1 (" + where + ")");
    if (profile.population < 1)
        throw InputError("scenario: population must be positive (" + where + ")");
    for (const auto &mix : profile.code_mix) {
        if (!mix.empty())
            check_probability_vector(mix, where + " code_mix");
    }
}

void validate_config(const ScenarioConfig &config) {
    if (config.counties.empty())
        throw InputError("scenario: no counties configured");
    if (config.window.end < config.window.start)
        throw InputError("scenario: study window end precedes start");
    std::string prev_fips;
    std::map<std::string, std::string> state_prefix;
    for (const auto &county : config.counties) {
        validate_profile(county);
        if (county.county_fips <= prev_fips)
            throw InputError("scenario: counties must be sorted by unique county_fips");
        prev_fips = county.county_fips;
        const std::string prefix = county.county_fips.substr(0, 2);
        const auto [it, inserted] = state_prefix.emplace(county.state, prefix);
        if (!inserted && it->second != prefix)
            throw InputError("scenario: state " + county.state +
                             " spans multiple FIPS prefixes");
    }
    if (config.regression && config.regression->noise_sigma < 0.0)
        throw InputError("scenario: negative noise_sigma");
}

/// Codebook indices grouped by category, plus the non-specific pool used as
/// the decay target.
struct CodePools {
    std::array<std::vector<int>, kCategoryCount> by_category;
    std::vector<int> non_specific;
};

CodePools build_code_pools() {
    CodePools pools;
    const Codebook &codebook = Codebook::builtin();
    for (int i = 0; i < codebook.size(); ++i) {
        pools.by_category[std::size_t(codebook.category_of(i))].push_back(i);
        if (codebook.category_of(i) == DiagnosticCategory::NonSpecificDementia)
            pools.non_specific.push_back(i);
    }
    return pools;
}

int draw_code(Rng &rng, const CodePools &pools, const CountyProfile &profile,
              int category) {
    const auto &codes = pools.by_category[std::size_t(category)];
    const auto &mix = profile.code_mix[std::size_t(category)];
    if (mix.empty())
        return codes[std::size_t(rng.uniform_int(0, int(codes.size()) - 1))];
    if (mix.size() != codes.size())
        throw InputError("scenario: code_mix size mismatch for category " +
                         std::string(category_name(DiagnosticCategory(category))));
    return codes[rng.categorical(mix)];
}

int draw_lag(Rng &rng, const CountyProfile &profile) {
    switch (LagBucket(rng.categorical(profile.gap_mix))) {
    case LagBucket::Cooccurrence:
        return 0;
    case LagBucket::WithinOneMonth:
        return rng.uniform_int(1, 30);
    case LagBucket::OneToThreeMonths:
        return rng.uniform_int(31, 90);
    case LagBucket::OverThreeMonths:
        return rng.uniform_int(91, 240);
    }
    return 0;
}

double covariate_value(const CountyProfile &profile, int index) {
    switch (index) {
    case 0:
        return profile.pct_less_hs;
    case 1:
        return profile.unemployment;
    case 2:
        return profile.pct_rural;
    case 3:
        return profile.medicaid_share;
    case 4:
        return profile.disability_share;
    case 5:
        return double(profile.n_patients) / double(profile.population);
    case 6:
        return profile.race_mix[std::size_t(RaceEthnicity::NonHispanicBlack)];
    case 7:
        return profile.race_mix[std::size_t(RaceEthnicity::Hispanic)];
    case 8:
        return profile.race_mix[std::size_t(RaceEthnicity::NonHispanicAsian)];
    default:
        throw std::invalid_argument("covariate index out of range");
    }
}

/// Deterministic per-county covariate context for the library scenarios,
/// independent of the generation seed so a scenario's design matrix is fixed
/// across repetitions.
void draw_county_context(CountyProfile &profile, int county_index) {
    Rng rng(mix_seed(kCovariateStream, std::uint64_t(county_index)));
    profile.pct_less_hs = 0.05 + 0.40 * rng.next_double();
    profile.unemployment = 0.02 + 0.23 * rng.next_double();
    profile.pct_rural = rng.next_double();
    profile.medicaid_share = 0.10 + 0.50 * rng.next_double();
    profile.disability_share = 0.05 + 0.30 * rng.next_double();
    const double pct_dementia = 0.001 + 0.079 * rng.next_double();
    profile.population =
        std::max(profile.n_patients, int(std::lround(profile.n_patients / pct_dementia)));
    const double black = 0.45 * rng.next_double();
    const double hispanic = 0.35 * rng.next_double();
    const double asian = 0.15 * rng.next_double();
    auto &mix = profile.race_mix;
    mix[std::size_t(RaceEthnicity::Hispanic)] = hispanic;
    mix[std::size_t(RaceEthnicity::NativeAmericanAlaskaNative)] = 0.005;
    mix[std::size_t(RaceEthnicity::NonHispanicAsian)] = asian;
    mix[std::size_t(RaceEthnicity::NonHispanicBlack)] = black;
    mix[std::size_t(RaceEthnicity::Other)] = 0.01;
    mix[std::size_t(RaceEthnicity::Unknown)] = 0.005;
    mix[std::size_t(RaceEthnicity::NonHispanicWhite)] =
        1.0 - (hispanic + asian + black + 0.02);
}

StudyWindow default_window() {
    return {Date::parse("2016-01-01").value(), Date::parse("2018-12-31").value()};
}

std::map<std::string, double> planted_state_effects(const ScenarioConfig &config) {
    std::map<std::string, double> effects;
    if (!config.regression)
        return effects;
    std::set<std::string> states;
    for (const auto &county : config.counties)
        states.insert(county.state);
    const double spread = config.regression->state_effect_spread;
    const std::size_t k = states.size();
    std::size_t i = 0;
    for (const auto &state : states) {
        effects[state] =
            k > 1 ? spread * (double(i) / double(k - 1) - 0.5) : 0.0;
        ++i;
    }
    return effects;
}

json profile_to_json(const CountyProfile &p) {
    json j;
    j["n_patients"] = p.n_patients;
    j["decay"] = p.decay;
    j["mean_visits"] = p.mean_visits;
    j["category_mix"] = {
        {std::string(category_name(DiagnosticCategory(0))), p.category_mix[0]},
        {std::string(category_name(DiagnosticCategory(1))), p.category_mix[1]},
        {std::string(category_name(DiagnosticCategory(2))), p.category_mix[2]},
        {std::string(category_name(DiagnosticCategory(3))), p.category_mix[3]},
        {std::string(category_name(DiagnosticCategory(4))), p.category_mix[4]},
    };
    return j;
}

} // namespace

std::vector<std::string> scenario_names() {
    return {"uniform", "planted-divergence", "regression-recovery"};
}

ScenarioConfig make_scenario(const std::string &name, const ScenarioOverrides &overrides) {
    ScenarioConfig config;
    config.name = name;
    config.window = default_window();

    auto make_counties = [&](int n_counties, int n_states, int patients,
                             double mean_visits) {
        for (int k = 0; k < n_counties; ++k) {
            CountyProfile profile;
            const int state_index = k % n_states;
            profile.state = library_state_name(state_index);
            profile.county_fips = library_fips(state_index, k / n_states + 1);
            profile.n_patients = patients;
            profile.mean_visits = mean_visits;
            draw_county_context(profile, k);
            config.counties.push_back(std::move(profile));
            config.divergence[config.counties.back().county_fips] = 0.0;
        }
    };

    if (name == "uniform") {
        const int counties = overrides.counties.value_or(20);
        const int states = overrides.states.value_or(5);
        const int patients = overrides.patients_per_county.value_or(250);
        const double visits = overrides.mean_visits.value_or(3.0);
        make_counties(counties, states, patients, visits);
    } else if (name == "planted-divergence") {
        const int baseline = overrides.counties.value_or(30);
        const int shifted = 10;
        const int states = overrides.states.value_or(5);
        const int patients = overrides.patients_per_county.value_or(250);
        const double visits = overrides.mean_visits.value_or(4.0);
        make_counties(baseline + shifted, states, patients, visits);
        for (int i = 0; i < shifted; ++i) {
            CountyProfile &county = config.counties[std::size_t(baseline + i)];
            const double shift = 0.1 + 0.4 * double(i) / double(shifted - 1);
            county.decay = std::min(1.0, county.decay + shift);
            const double moved = std::min(0.4 * shift, county.category_mix[0]);
            county.category_mix[0] -= moved;
            county.category_mix[std::size_t(
                DiagnosticCategory::NonSpecificDementia)] += moved;
            config.divergence[county.county_fips] = shift;
        }
        std::sort(config.counties.begin(), config.counties.end(),
                  [](const CountyProfile &a, const CountyProfile &b) {
                      return a.county_fips < b.county_fips;
                  });
    } else if (name == "regression-recovery") {
        const int counties = overrides.counties.value_or(500);
        const int states = overrides.states.value_or(10);
        const int patients = overrides.patients_per_county.value_or(15);
        const double visits = overrides.mean_visits.value_or(2.0);
        make_counties(counties, states, patients, visits);
        RegressionPlan plan;
        plan.coefficients = {-0.13, 0.24, -0.19, -0.07, 0.32, 1.27, -0.13, -0.16, 0.27};
        plan.intercept = 0.55;
        plan.noise_sigma = overrides.noise_sigma.value_or(0.05);
        config.regression = plan;
    } else {
        std::string known;
        for (const auto &s : scenario_names())
            known += (known.empty() ? "" : ", ") + s;
        throw InputError("unknown scenario '" + name + "' (known: " + known + ")");
    }

    std::sort(config.counties.begin(), config.counties.end(),
              [](const CountyProfile &a, const CountyProfile &b) {
                  return a.county_fips < b.county_fips;
              });
    return config;
}

GeneratedFiles generate(const ScenarioConfig &config, std::uint64_t seed,
                        const std::string &outdir) {
    validate_config(config);
    std::filesystem::create_directories(outdir);

    const CodePools pools = build_code_pools();
    const Codebook &codebook = Codebook::builtin();
    const StudyWindow &window = config.window;
    const int window_days = window.length_days();

    GeneratedFiles files;
    files.beneficiaries = outdir + "/beneficiaries.tsv";
    files.hospitalizations = outdir + "/hospitalizations.tsv";
    files.covariates = outdir + "/covariates.tsv";
    files.truth = outdir + "/truth.json";

    DelimitedWriter beneficiaries(files.beneficiaries);
    beneficiaries.write_header({"patient_id", "birth_year", "sex", "race", "medicaid",
                                "entitlement", "zip", "zip_start", "zip_end"});
    DelimitedWriter hospitalizations(files.hospitalizations);
    {
        std::vector<std::string> header = {"patient_id",  "admission_date",
                                           "admission_source", "zip",
                                           "county_fips", "state"};
        for (std::size_t i = 1; i <= kMaxDiagnosisSlots; ++i)
            header.push_back("dx" + std::to_string(i));
        hospitalizations.write_header(header);
    }
    DelimitedWriter covariates(files.covariates);
    {
        std::vector<std::string> header = {"county_fips", "state"};
        for (const auto name : kCovariateNames)
            header.emplace_back(name);
        covariates.write_header(header);
    }

    const std::string window_start = window.start.to_string();
    const std::string window_end = window.end.to_string();
    std::vector<std::string> dx_row(kMaxDiagnosisSlots);

    for (std::size_t county_index = 0; county_index < config.counties.size();
         ++county_index) {
        const CountyProfile &county = config.counties[county_index];
        Rng rng(mix_seed(seed, county_index));
        const std::string &zip = county.county_fips;

        for (int p = 0; p < county.n_patients; ++p) {
            const std::string patient_id =
                "P" + county.county_fips + "-" + pad_number(p, 6);
            const Sex sex = rng.bernoulli(county.female_share) ? Sex::Female : Sex::Male;
            const RaceEthnicity race = RaceEthnicity(rng.categorical(county.race_mix));
            const bool medicaid = rng.bernoulli(county.medicaid_share);
            const EntitlementReason entitlement = rng.bernoulli(county.disability_share)
                                                      ? EntitlementReason::Disability
                                                      : EntitlementReason::Age;
            const int age = rng.uniform_int(66, 94);
            const int visits = 1 + rng.poisson(county.mean_visits - 1.0);
            Date admission = window.start.plus_days(rng.uniform_int(0, window_days - 1));
            const int birth_year = admission.year() - age;

            beneficiaries.write_row({patient_id, std::to_string(birth_year),
                                     std::string(sex_name(sex)),
                                     std::string(race_name(race)), medicaid ? "1" : "0",
                                     std::string(entitlement_name(entitlement)), zip,
                                     window_start, window_end});

            int code = draw_code(rng, pools, county,
                                 int(rng.categorical(county.category_mix)));
            for (int v = 0; v < visits; ++v) {
                if (v > 0) {
                    admission = admission.plus_days(draw_lag(rng, county));
                    if (window.end < admission)
                        break;
                    if (rng.bernoulli(county.decay))
                        code = pools.non_specific[std::size_t(rng.uniform_int(
                            0, int(pools.non_specific.size()) - 1))];
                }
                const AdmissionSource source = rng.bernoulli(county.nursing_share)
                                                   ? AdmissionSource::NursingFacility
                                                   : AdmissionSource::Other;
                for (auto &slot : dx_row)
                    slot.clear();
                // Occasional non-qualifying filler codes around the signal code.
                const double filler = rng.next_double();
                std::size_t slot = 0;
                if (filler < 0.15)
                    dx_row[slot++] = "I10";
                dx_row[slot++] = codebook.entry(code).code;
                if (filler >= 0.15 && filler < 0.30)
                    dx_row[slot++] = "E119";

                std::vector<std::string> row = {patient_id, admission.to_string(),
                                                std::string(admission_source_name(source)),
                                                zip, county.county_fips, county.state};
                row.insert(row.end(), dx_row.begin(), dx_row.end());
                hospitalizations.write_row(row);
            }
        }

        std::vector<std::string> cov_row = {county.county_fips, county.state};
        for (int i = 0; i < kCovariateCount; ++i)
            cov_row.push_back(format_double(covariate_value(county, i)));
        covariates.write_row(cov_row);
    }

    PlantedTruth truth;
    truth.scenario = config.name;
    truth.seed = seed;
    truth.divergence = config.divergence;
    truth.regression = config.regression;
    truth.state_effects = planted_state_effects(config);

    if (config.regression) {
        files.planted_scores = outdir + "/planted_scores.tsv";
        std::vector<SimilarityScore> scores;
        scores.reserve(config.counties.size());
        for (std::size_t county_index = 0; county_index < config.counties.size();
             ++county_index) {
            const CountyProfile &county = config.counties[county_index];
            Rng noise(mix_seed(mix_seed(seed, kScoreNoiseStream), county_index));
            double value = config.regression->intercept +
                           truth.state_effects.at(county.state);
            for (int i = 0; i < kCovariateCount; ++i)
                value += config.regression->coefficients[std::size_t(i)] *
                         covariate_value(county, i);
            value += config.regression->noise_sigma * noise.next_gaussian();
            SimilarityScore score;
            score.stratum_id = county.county_fips;
            score.level = StratumLevel::County;
            score.method = SimilarityMethod::RandomSkewers;
            score.value = value;
            score.n_skewers = 0;
            score.seed = seed;
            score.censored = false;
            score.patient_count = std::size_t(county.n_patients);
            scores.push_back(std::move(score));
        }
        write_scores(*files.planted_scores, scores);
    }

    json truth_json;
    truth_json["scenario"] = truth.scenario;
    truth_json["seed"] = truth.seed;
    truth_json["divergence"] = truth.divergence;
    if (truth.regression) {
        json plan;
        plan["intercept"] = truth.regression->intercept;
        plan["noise_sigma"] = truth.regression->noise_sigma;
        plan["state_effect_spread"] = truth.regression->state_effect_spread;
        json coeffs;
        for (int i = 0; i < kCovariateCount; ++i)
            coeffs[std::string(kCovariateNames[std::size_t(i)])] =
                truth.regression->coefficients[std::size_t(i)];
        plan["coefficients"] = coeffs;
        plan["state_effects"] = truth.state_effects;
        truth_json["regression"] = plan;
    }
    json counties_json = json::array();
    for (const auto &county : config.counties) {
        json c = profile_to_json(county);
        c["county_fips"] = county.county_fips;
        c["state"] = county.state;
        counties_json.push_back(std::move(c));
    }
    truth_json["counties"] = counties_json;

    std::ofstream truth_out(files.truth);
    if (!truth_out)
        throw InputError("cannot open output file: " + files.truth);
    truth_out << truth_json.dump(2) << "\n";

    return files;
}

ScenarioConfig scenario_from_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open scenario file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error &e) {
        throw InputError("scenario file " + path + ": " + e.what());
    }

    ScenarioConfig config;
    config.name = j.value("name", "custom");
    config.window = default_window();
    if (j.contains("window_start")) {
        const auto d = Date::parse(j["window_start"].get<std::string>());
        if (!d)
            throw InputError("scenario: invalid window_start");
        config.window.start = *d;
    }
    if (j.contains("window_end")) {
        const auto d = Date::parse(j["window_end"].get<std::string>());
        if (!d)
            throw InputError("scenario: invalid window_end");
        config.window.end = *d;
    }

    auto apply_profile = [&](CountyProfile &profile, const json &src) {
        profile.n_patients = src.value("n_patients", profile.n_patients);
        profile.female_share = src.value("female_share", profile.female_share);
        profile.medicaid_share = src.value("medicaid_share", profile.medicaid_share);
        profile.disability_share = src.value("disability_share", profile.disability_share);
        profile.decay = src.value("decay", profile.decay);
        profile.mean_visits = src.value("mean_visits", profile.mean_visits);
        profile.nursing_share = src.value("nursing_share", profile.nursing_share);
        profile.pct_less_hs = src.value("pct_less_hs", profile.pct_less_hs);
        profile.unemployment = src.value("unemployment", profile.unemployment);
        profile.pct_rural = src.value("pct_rural", profile.pct_rural);
        profile.population = src.value("population", profile.population);
        if (src.contains("race_mix")) {
            for (int r = 0; r < kRaceCount; ++r) {
                const std::string key{race_name(RaceEthnicity(r))};
                if (src["race_mix"].contains(key))
                    profile.race_mix[std::size_t(r)] = src["race_mix"][key].get<double>();
            }
        }
        if (src.contains("category_mix")) {
            for (int c = 0; c < kCategoryCount; ++c) {
                const std::string key{category_name(DiagnosticCategory(c))};
                if (src["category_mix"].contains(key))
                    profile.category_mix[std::size_t(c)] =
                        src["category_mix"][key].get<double>();
            }
        }
        if (src.contains("gap_mix")) {
            for (int b = 0; b < kBucketCount; ++b) {
                const std::string key{bucket_name(LagBucket(b))};
                if (src["gap_mix"].contains(key))
                    profile.gap_mix[std::size_t(b)] = src["gap_mix"][key].get<double>();
            }
        }
    };

    CountyProfile defaults;
    if (j.contains("defaults"))
        apply_profile(defaults, j["defaults"]);

    if (!j.contains("counties") || !j["counties"].is_array())
        throw InputError("scenario file " + path + ": missing counties array");
    for (const auto &cj : j["counties"]) {
        CountyProfile profile = defaults;
        if (!cj.contains("county_fips") || !cj.contains("state"))
            throw InputError("scenario: county entries need county_fips and state");
        profile.county_fips = cj["county_fips"].get<std::string>();
        profile.state = cj["state"].get<std::string>();
        apply_profile(profile, cj);
        config.counties.push_back(std::move(profile));
        config.divergence[config.counties.back().county_fips] = 0.0;
    }
    std::sort(config.counties.begin(), config.counties.end(),
              [](const CountyProfile &a, const CountyProfile &b) {
                  return a.county_fips < b.county_fips;
              });

    if (j.contains("divergence")) {
        for (const auto &[fips, value] : j["divergence"].items())
            config.divergence[fips] = value.get<double>();
    }
    if (j.contains("regression")) {
        const json &rj = j["regression"];
        RegressionPlan plan;
        plan.intercept = rj.value("intercept", plan.intercept);
        plan.noise_sigma = rj.value("noise_sigma", plan.noise_sigma);
        plan.state_effect_spread =
            rj.value("state_effect_spread", plan.state_effect_spread);
        if (rj.contains("coefficients")) {
            for (int i = 0; i < kCovariateCount; ++i) {
                const std::string key{kCovariateNames[std::size_t(i)]};
                if (rj["coefficients"].contains(key))
                    plan.coefficients[std::size_t(i)] =
                        rj["coefficients"][key].get<double>();
            }
        }
        config.regression = plan;
    }
    return config;
}

} // namespace sigdecay
