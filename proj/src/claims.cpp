#include "sigdecay/claims.hpp"

#include "sigdecay/errors.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace sigdecay {

namespace {

constexpr std::array<std::string_view, 3> kSexNames = {"male", "female", "unknown"};
constexpr std::array<std::string_view, kRaceCount> kRaceNames = {
    "hispanic",           "native_american_alaska_native",
    "non_hispanic_asian", "non_hispanic_black",
    "non_hispanic_white", "other",
    "unknown",
};
constexpr std::array<std::string_view, 3> kEntitlementNames = {"age", "disability", "esrd"};
constexpr std::array<std::string_view, 2> kAdmissionSourceNames = {"nursing_facility", "other"};

template <typename Enum, std::size_t N>
std::optional<Enum> enum_from_name(const std::array<std::string_view, N> &names,
                                   std::string_view name) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == name)
            return Enum(i);
    }
    return std::nullopt;
}

std::optional<bool> parse_bool(std::string_view text) {
    if (text == "1" || text == "true")
        return true;
    if (text == "0" || text == "false")
        return false;
    return std::nullopt;
}

bool valid_zip(std::string_view zip) {
    if (zip.size() != 5)
        return false;
    return std::all_of(zip.begin(), zip.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
}

bool valid_fips(std::string_view fips) { return valid_zip(fips); } // 5 digits

bool valid_state(std::string_view state) {
    return state.size() == 2 &&
           std::all_of(state.begin(), state.end(),
                       [](char c) { return c >= 'A' && c <= 'Z'; });
}

void split_segments(std::string_view text, std::vector<std::string_view> &out) {
    split_line(text, ';', out);
}

} // namespace

std::string_view sex_name(Sex sex) { return kSexNames[std::size_t(sex)]; }
std::string_view race_name(RaceEthnicity race) { return kRaceNames[std::size_t(race)]; }
std::string_view entitlement_name(EntitlementReason reason) {
    return kEntitlementNames[std::size_t(reason)];
}
std::string_view admission_source_name(AdmissionSource source) {
    return kAdmissionSourceNames[std::size_t(source)];
}
std::optional<Sex> sex_from_name(std::string_view name) {
    return enum_from_name<Sex>(kSexNames, name);
}
std::optional<RaceEthnicity> race_from_name(std::string_view name) {
    return enum_from_name<RaceEthnicity>(kRaceNames, name);
}
std::optional<EntitlementReason> entitlement_from_name(std::string_view name) {
    return enum_from_name<EntitlementReason>(kEntitlementNames, name);
}
std::optional<AdmissionSource> admission_source_from_name(std::string_view name) {
    return enum_from_name<AdmissionSource>(kAdmissionSourceNames, name);
}

LoadResult<Beneficiary> load_beneficiaries(const std::string &path, DelimitedFormat format) {
    DelimitedReader reader(path, format);
    const std::size_t id_col = reader.column("patient_id");
    const std::size_t birth_col = reader.column("birth_year");
    const std::size_t sex_col = reader.column("sex");
    const std::size_t race_col = reader.column("race");
    const std::size_t medicaid_col = reader.column("medicaid");
    const std::size_t entitlement_col = reader.column("entitlement");
    const std::size_t zip_col = reader.column("zip");
    const std::size_t zip_start_col = reader.column("zip_start");
    const std::size_t zip_end_col = reader.column("zip_end");
    const std::size_t width = reader.header().size();

    LoadResult<Beneficiary> result;
    std::unordered_set<std::string> seen_ids;
    std::vector<std::string_view> zips, starts, ends;

    while (reader.next_row()) {
        const std::size_t row = reader.row_number();
        auto reject = [&](std::string_view column, std::string reason) {
            result.rejects.push_back({row, std::string(column), std::move(reason)});
        };
        if (reader.field_count() != width) {
            reject("", "expected " + std::to_string(width) + " columns, found " +
                           std::to_string(reader.field_count()));
            continue;
        }

        Beneficiary b;
        b.patient_id = std::string(reader.field(id_col));
        if (b.patient_id.empty()) {
            reject("patient_id", "empty patient_id");
            continue;
        }
        const auto birth = parse_int(reader.field(birth_col));
        if (!birth) {
            reject("birth_year", "not an integer: '" +
                                     std::string(reader.field(birth_col)) + "'");
            continue;
        }
        b.birth_year = *birth;
        const auto sex = sex_from_name(reader.field(sex_col));
        if (!sex) {
            reject("sex", "unknown sex '" + std::string(reader.field(sex_col)) + "'");
            continue;
        }
        b.sex = *sex;
        const auto race = race_from_name(reader.field(race_col));
        if (!race) {
            reject("race", "unknown race '" + std::string(reader.field(race_col)) + "'");
            continue;
        }
        b.race = *race;
        const auto medicaid = parse_bool(reader.field(medicaid_col));
        if (!medicaid) {
            reject("medicaid", "expected 0/1, found '" +
                                   std::string(reader.field(medicaid_col)) + "'");
            continue;
        }
        b.medicaid_eligible = *medicaid;
        const auto entitlement = entitlement_from_name(reader.field(entitlement_col));
        if (!entitlement) {
            reject("entitlement", "unknown entitlement '" +
                                      std::string(reader.field(entitlement_col)) + "'");
            continue;
        }
        b.entitlement = *entitlement;

        split_segments(reader.field(zip_col), zips);
        split_segments(reader.field(zip_start_col), starts);
        split_segments(reader.field(zip_end_col), ends);
        if (zips.size() != starts.size() || zips.size() != ends.size()) {
            reject("zip", "zip/zip_start/zip_end segment counts differ");
            continue;
        }
        bool ok = true;
        for (std::size_t s = 0; s < zips.size() && ok; ++s) {
            if (!valid_zip(zips[s])) {
                reject("zip", "zip must be 5 digits: '" + std::string(zips[s]) + "'");
                ok = false;
                break;
            }
            const auto start = Date::parse(starts[s]);
            const auto end = Date::parse(ends[s]);
            if (!start || !end || *end < *start) {
                reject("zip_start", "invalid residence range");
                ok = false;
                break;
            }
            if (!b.zip_history.empty() && !(b.zip_history.back().end < *start)) {
                reject("zip_start", "residence segments overlap or are unordered");
                ok = false;
                break;
            }
            b.zip_history.push_back({*start, *end, std::string(zips[s])});
        }
        if (!ok)
            continue;

        if (!seen_ids.insert(b.patient_id).second)
            throw InputError(path + ": duplicate patient_id '" + b.patient_id +
                             "' at row " + std::to_string(row));
        result.records.push_back(std::move(b));
    }
    return result;
}

LoadResult<HospitalizationRecord> load_hospitalizations(const std::string &path,
                                                        const StudyWindow &window,
                                                        DelimitedFormat format) {
    DelimitedReader reader(path, format);
    const std::size_t id_col = reader.column("patient_id");
    const std::size_t date_col = reader.column("admission_date");
    const std::size_t source_col = reader.column("admission_source");
    const std::size_t zip_col = reader.column("zip");
    const std::size_t fips_col = reader.column("county_fips");
    const std::size_t state_col = reader.column("state");
    const std::size_t dx_first = reader.column("dx1");
    const std::size_t width = reader.header().size();
    // dx1..dx25 must be the trailing columns.
    for (std::size_t i = 0; i < kMaxDiagnosisSlots; ++i) {
        const std::string name = "dx" + std::to_string(i + 1);
        if (reader.column(name) != dx_first + i)
            throw InputError(path + ": dx columns must be contiguous, starting at dx1");
    }

    LoadResult<HospitalizationRecord> result;
    while (reader.next_row()) {
        const std::size_t row = reader.row_number();
        auto reject = [&](std::string_view column, std::string reason) {
            result.rejects.push_back({row, std::string(column), std::move(reason)});
        };
        if (reader.field_count() > width) {
            reject("dx25", "too many diagnosis slots");
            continue;
        }
        if (reader.field_count() < width) {
            reject("", "expected " + std::to_string(width) + " columns, found " +
                           std::to_string(reader.field_count()));
            continue;
        }

        HospitalizationRecord rec;
        rec.patient_id = std::string(reader.field(id_col));
        if (rec.patient_id.empty()) {
            reject("patient_id", "empty patient_id");
            continue;
        }
        const auto date = Date::parse(reader.field(date_col));
        if (!date) {
            reject("admission_date", "invalid date '" +
                                         std::string(reader.field(date_col)) + "'");
            continue;
        }
        if (!window.contains(*date)) {
            reject("admission_date", "admission date " + date->to_string() +
                                         " outside study window " +
                                         window.start.to_string() + ".." +
                                         window.end.to_string());
            continue;
        }
        rec.admission_date = *date;
        const auto source = admission_source_from_name(reader.field(source_col));
        if (!source) {
            reject("admission_source", "unknown admission source '" +
                                           std::string(reader.field(source_col)) + "'");
            continue;
        }
        rec.admission_source = *source;
        if (!valid_zip(reader.field(zip_col))) {
            reject("zip", "zip must be 5 digits");
            continue;
        }
        rec.zip = std::string(reader.field(zip_col));
        if (!valid_fips(reader.field(fips_col))) {
            reject("county_fips", "county_fips must be 5 digits");
            continue;
        }
        rec.county_fips = std::string(reader.field(fips_col));
        if (!valid_state(reader.field(state_col))) {
            reject("state", "state must be two uppercase letters");
            continue;
        }
        rec.state = std::string(reader.field(state_col));

        for (std::size_t i = 0; i < kMaxDiagnosisSlots; ++i) {
            const std::string_view dx = reader.field(dx_first + i);
            if (!dx.empty())
                rec.diagnosis_codes.emplace_back(dx);
        }
        if (rec.diagnosis_codes.empty()) {
            reject("dx1", "no diagnosis codes");
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

std::size_t Cohort::total_hospitalizations() const {
    std::size_t total = 0;
    for (const auto &p : patients)
        total += p.hospitalization_count;
    return total;
}

std::size_t Cohort::total_events() const {
    std::size_t total = 0;
    for (const auto &p : patients)
        total += p.events.size();
    return total;
}

Cohort build_cohort(const std::vector<Beneficiary> &beneficiaries,
                    const std::vector<HospitalizationRecord> &records,
                    const StudyWindow &window, int min_age, const Codebook &codebook) {
    if (codebook.size() > 256)
        throw InputError("codebook too large for event encoding");

    std::unordered_map<std::string_view, std::size_t> beneficiary_index;
    beneficiary_index.reserve(beneficiaries.size());
    for (std::size_t i = 0; i < beneficiaries.size(); ++i) {
        if (!beneficiary_index.emplace(beneficiaries[i].patient_id, i).second)
            throw InputError("duplicate patient_id in beneficiaries: " +
                             beneficiaries[i].patient_id);
    }

    std::unordered_map<std::string_view, std::vector<std::uint32_t>> records_by_patient;
    records_by_patient.reserve(beneficiaries.size());
    for (std::uint32_t r = 0; r < records.size(); ++r) {
        if (beneficiary_index.count(records[r].patient_id))
            records_by_patient[records[r].patient_id].push_back(r);
    }

    Cohort cohort;
    cohort.window = window;
    cohort.codebook = codebook;

    std::vector<std::uint8_t> code_indices;
    for (const auto &b : beneficiaries) {
        const auto rec_it = records_by_patient.find(b.patient_id);
        if (rec_it == records_by_patient.end())
            continue;

        // Residence: exactly one zip segment may intersect the window and it
        // must cover the window end to end.
        const ZipStay *stay = nullptr;
        bool unstable = false;
        for (const auto &s : b.zip_history) {
            if (s.end < window.start || window.end < s.start)
                continue;
            if (stay != nullptr) {
                unstable = true;
                break;
            }
            stay = &s;
        }
        if (unstable || stay == nullptr || stay->start > window.start ||
            stay->end < window.end)
            continue;

        // Analytic records: not nursing-facility sourced, >=1 qualifying code.
        CohortPatient patient;
        Date first_admission;
        bool geography_set = false;
        bool zip_conflict = false;
        for (const std::uint32_t r : rec_it->second) {
            const HospitalizationRecord &rec = records[r];
            if (rec.admission_source == AdmissionSource::NursingFacility)
                continue;
            code_indices.clear();
            for (const auto &dx : rec.diagnosis_codes) {
                if (const auto idx = codebook.index_of(dx))
                    code_indices.push_back(std::uint8_t(*idx));
            }
            if (code_indices.empty())
                continue;
            if (rec.zip != stay->zip) {
                zip_conflict = true; // the claim shows a different residence
                break;
            }
            if (!geography_set) {
                patient.county_fips = rec.county_fips;
                patient.state = rec.state;
                first_admission = rec.admission_date;
                geography_set = true;
            } else {
                if (rec.county_fips != patient.county_fips || rec.state != patient.state)
                    throw InputError("inconsistent zip/county mapping for patient " +
                                     b.patient_id);
                first_admission = std::min(first_admission, rec.admission_date);
            }
            ++patient.hospitalization_count;
            for (const std::uint8_t idx : code_indices)
                patient.events.push_back({rec.admission_date, idx});
        }
        if (zip_conflict || patient.hospitalization_count == 0)
            continue;

        const int age = first_admission.year() - b.birth_year;
        if (age < min_age)
            continue;

        std::sort(patient.events.begin(), patient.events.end());
        patient.events.erase(std::unique(patient.events.begin(), patient.events.end()),
                             patient.events.end());

        patient.patient_id = b.patient_id;
        patient.birth_year = b.birth_year;
        patient.sex = b.sex;
        patient.race = b.race;
        patient.medicaid_eligible = b.medicaid_eligible;
        patient.entitlement = b.entitlement;
        patient.zip = stay->zip;
        patient.age_at_first_admission = age;
        cohort.patients.push_back(std::move(patient));
    }

    std::sort(cohort.patients.begin(), cohort.patients.end(),
              [](const CohortPatient &a, const CohortPatient &b) {
                  return a.patient_id < b.patient_id;
              });

    // A state must pair with a single 2-digit FIPS prefix and vice versa.
    std::map<std::string, std::string> state_prefix;
    std::map<std::string, std::string> prefix_state;
    for (const auto &p : cohort.patients) {
        const std::string prefix = p.county_fips.substr(0, 2);
        const auto [it, inserted] = state_prefix.emplace(p.state, prefix);
        if (!inserted && it->second != prefix)
            throw InputError("inconsistent zip/county mapping: state " + p.state +
                             " spans FIPS prefixes " + it->second + " and " + prefix);
        const auto [it2, inserted2] = prefix_state.emplace(prefix, p.state);
        if (!inserted2 && it2->second != p.state)
            throw InputError("inconsistent zip/county mapping: FIPS prefix " + prefix +
                             " spans states " + it2->second + " and " + p.state);
    }
    return cohort;
}

DemographicSummary demographic_summary(const Cohort &cohort) {
    DemographicSummary summary;
    summary.individuals = cohort.patients.size();
    summary.hospitalizations = cohort.total_hospitalizations();

    std::array<std::size_t, 3> by_sex{};
    std::array<std::size_t, 7> by_age{};
    std::array<std::size_t, kRaceCount> by_race{};
    std::array<std::size_t, 2> by_medicaid{};
    for (const auto &p : cohort.patients) {
        ++by_sex[std::size_t(p.sex)];
        const int band = std::min(6, (p.age_at_first_admission - 65) / 5);
        ++by_age[std::size_t(band)];
        ++by_race[std::size_t(p.race)];
        ++by_medicaid[p.medicaid_eligible ? 1 : 0];
    }

    const std::size_t denom = summary.individuals;
    auto pct = [&](std::size_t count) {
        return denom == 0 ? 0.0 : 100.0 * double(count) / double(denom);
    };
    auto add = [&](std::string section, std::string label, std::size_t count) {
        summary.rows.push_back(
            {std::move(section), std::move(label), count, denom, pct(count)});
    };

    for (std::size_t i = 0; i < kSexNames.size(); ++i)
        add("sex", std::string(kSexNames[i]), by_sex[i]);
    static constexpr std::array<std::string_view, 7> kAgeBands = {
        "65-69", "70-74", "75-79", "80-84", "85-89", "90-94", "95+"};
    for (std::size_t i = 0; i < kAgeBands.size(); ++i)
        add("age", std::string(kAgeBands[i]), by_age[i]);
    for (std::size_t i = 0; i < kRaceNames.size(); ++i)
        add("race", std::string(kRaceNames[i]), by_race[i]);
    add("medicaid", "ineligible", by_medicaid[0]);
    add("medicaid", "eligible", by_medicaid[1]);
    return summary;
}

void write_demographic_summary(const std::string &path, const DemographicSummary &summary) {
    DelimitedWriter writer(path);
    writer.write_header({"section", "label", "count", "denominator", "percent"});
    writer.write_row({"total", "individuals", std::to_string(summary.individuals),
                      std::to_string(summary.individuals), "100"});
    writer.write_row({"total", "hospitalizations", std::to_string(summary.hospitalizations),
                      std::to_string(summary.hospitalizations), "100"});
    for (const auto &row : summary.rows) {
        char pct[32];
        std::snprintf(pct, sizeof(pct), "%.4f", row.percent);
        writer.write_row({row.section, row.label, std::to_string(row.count),
                          std::to_string(row.denominator), pct});
    }
}

} // namespace sigdecay
