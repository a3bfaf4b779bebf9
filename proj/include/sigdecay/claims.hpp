#ifndef SIGDECAY_CLAIMS_HPP
#define SIGDECAY_CLAIMS_HPP

#include "sigdecay/codebook.hpp"
#include "sigdecay/date.hpp"
#include "sigdecay/delimited.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sigdecay {

enum class Sex : std::uint8_t { Male, Female, Unknown };
enum class RaceEthnicity : std::uint8_t {
    Hispanic,
    NativeAmericanAlaskaNative,
    NonHispanicAsian,
    NonHispanicBlack,
    NonHispanicWhite,
    Other,
    Unknown,
};
enum class EntitlementReason : std::uint8_t { Age, Disability, Esrd };
enum class AdmissionSource : std::uint8_t { NursingFacility, Other };

inline constexpr int kRaceCount = 7;

std::string_view sex_name(Sex sex);
std::string_view race_name(RaceEthnicity race);
std::string_view entitlement_name(EntitlementReason reason);
std::string_view admission_source_name(AdmissionSource source);
std::optional<Sex> sex_from_name(std::string_view name);
std::optional<RaceEthnicity> race_from_name(std::string_view name);
std::optional<EntitlementReason> entitlement_from_name(std::string_view name);
std::optional<AdmissionSource> admission_source_from_name(std::string_view name);

/// One residential stay: [start, end] inclusive at a single 5-char zip.
struct ZipStay {
    Date start;
    Date end;
    std::string zip;
};

struct Beneficiary {
    std::string patient_id;
    int birth_year = 0;
    Sex sex = Sex::Unknown;
    RaceEthnicity race = RaceEthnicity::Unknown;
    bool medicaid_eligible = false;
    EntitlementReason entitlement = EntitlementReason::Age;
    std::vector<ZipStay> zip_history; // non-overlapping, ordered
};

/// One inpatient claim. Diagnosis codes keep claim order; up to 25 slots.
struct HospitalizationRecord {
    std::string patient_id;
    Date admission_date;
    std::vector<std::string> diagnosis_codes;
    AdmissionSource admission_source = AdmissionSource::Other;
    std::string zip;
    std::string county_fips;
    std::string state;
};

inline constexpr std::size_t kMaxDiagnosisSlots = 25;

template <typename T> struct LoadResult {
    std::vector<T> records;
    std::vector<RowDiagnostic> rejects;
};

/// Reads the beneficiaries file. Header:
///   patient_id birth_year sex race medicaid entitlement zip zip_start zip_end
/// Multiple residence segments are ';'-separated inside the zip, zip_start
/// and zip_end fields of the one row per patient. Malformed rows are
/// collected as diagnostics; a duplicate patient_id is fatal (InputError).
LoadResult<Beneficiary> load_beneficiaries(const std::string &path,
                                           DelimitedFormat format = {});

/// Reads the hospitalizations file. Header:
///   patient_id admission_date admission_source zip county_fips state dx1..dx25
/// Blank dx slots are allowed. Rows with more than 25 dx columns, no codes,
/// or an admission date outside the study window are rejected with diagnostics.
LoadResult<HospitalizationRecord> load_hospitalizations(const std::string &path,
                                                        const StudyWindow &window,
                                                        DelimitedFormat format = {});

/// One (patient, date, qualifying-code) occurrence; same-day duplicates of a
/// code collapse to a single event.
struct PatientEvent {
    Date date;
    std::uint8_t code_index; // index into the cohort's codebook

    auto operator<=>(const PatientEvent &) const = default;
};

struct CohortPatient {
    std::string patient_id;
    int birth_year = 0;
    Sex sex = Sex::Unknown;
    RaceEthnicity race = RaceEthnicity::Unknown;
    bool medicaid_eligible = false;
    EntitlementReason entitlement = EntitlementReason::Age;
    std::string zip;
    std::string county_fips;
    std::string state;
    int age_at_first_admission = 0;
    std::uint32_t hospitalization_count = 0; // retained records
    std::vector<PatientEvent> events;        // sorted, unique
};

struct Cohort {
    StudyWindow window;
    Codebook codebook;
    std::vector<CohortPatient> patients; // sorted by patient_id

    std::size_t total_hospitalizations() const;
    std::size_t total_events() const;
};

/// Applies the cohort filters and produces the analytic event stream:
///  - keeps records with >=1 qualifying code and admission source other than
///    a nursing facility;
///  - keeps patients with >=1 such record, age at the first retained
///    admission >= min_age (age = admission year - birth year), and a single
///    zip segment covering the whole study window that matches every
///    retained record's zip;
///  - collapses events per (patient, date, code).
/// Inconsistent geography (one patient's records naming two counties, or a
/// state paired with two FIPS prefixes) is fatal.
Cohort build_cohort(const std::vector<Beneficiary> &beneficiaries,
                    const std::vector<HospitalizationRecord> &records,
                    const StudyWindow &window, int min_age = 65,
                    const Codebook &codebook = Codebook::builtin());

struct SummaryRow {
    std::string section; // "sex", "age", "race", "medicaid"
    std::string label;
    std::size_t count = 0;
    std::size_t denominator = 0;
    double percent = 0.0;
};

struct DemographicSummary {
    std::size_t individuals = 0;
    std::size_t hospitalizations = 0;
    std::vector<SummaryRow> rows;
};

/// Counts and percentages by sex, 5-year age band (65-69 .. 95+), race and
/// Medicaid eligibility, with patient and hospitalization totals.
DemographicSummary demographic_summary(const Cohort &cohort);

void write_demographic_summary(const std::string &path, const DemographicSummary &summary);

} // namespace sigdecay

#endif
