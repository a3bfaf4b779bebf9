#include "sigdecay/codebook.hpp"

#include "sigdecay/errors.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace sigdecay {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "alzheimers_disease", "vascular_dementia", "non_specific_dementia",
    "picks_disease",      "neurocognitive_disorder",
};

std::vector<DementiaCode> builtin_entries() {
    using C = DiagnosticCategory;
    return {
        {"G300", C::AlzheimersDisease, "Alzheimer's disease with early onset"},
        {"G301", C::AlzheimersDisease, "Alzheimer's disease with late onset"},
        {"G308", C::AlzheimersDisease, "Other Alzheimer's disease"},
        {"G309", C::AlzheimersDisease, "Alzheimer's disease, unspecified"},
        {"G3183", C::NeurocognitiveDisorder, "Neurocognitive disorder with Lewy bodies"},
        {"G3185", C::NeurocognitiveDisorder, "Corticobasal degeneration"},
        {"F0280", C::NonSpecificDementia,
         "Dementia in other diseases classified elsewhere, unspecified severity, "
         "without behavioral disturbance, psychotic disturbance, mood disturbance, "
         "and anxiety"},
        {"F0281", C::NonSpecificDementia,
         "Dementia in other diseases classified elsewhere, unspecified severity, "
         "with behavioral disturbance"},
        {"F0390", C::NonSpecificDementia,
         "Unspecified dementia, unspecified severity, without behavioral "
         "disturbance, psychotic disturbance, mood disturbance, and anxiety"},
        {"F0391", C::NonSpecificDementia,
         "Unspecified dementia, unspecified severity, with behavioral disturbance"},
        {"G3109", C::NonSpecificDementia, "Other frontotemporal neurocognitive disorder"},
        {"G311", C::NonSpecificDementia,
         "Senile degeneration of brain, not elsewhere classified"},
        {"G3189", C::NonSpecificDementia,
         "Other specified degenerative diseases of nervous system"},
        {"G319", C::NonSpecificDementia,
         "Degenerative disease of nervous system, unspecified"},
        {"G3101", C::PicksDisease, "Pick's disease"},
        {"F0150", C::VascularDementia,
         "Vascular dementia, unspecified severity, without behavioral disturbance, "
         "psychotic disturbance, mood disturbance, and anxiety"},
        {"F0151", C::VascularDementia,
         "Vascular dementia, unspecified severity, with behavioral disturbance"},
    };
}

} // namespace

std::string_view category_name(DiagnosticCategory category) {
    return kCategoryNames[std::size_t(category)];
}

std::optional<DiagnosticCategory> category_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == name)
            return DiagnosticCategory(i);
    }
    return std::nullopt;
}

std::string Codebook::normalize(std::string_view raw) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin])))
        ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1])))
        --end;
    std::string out;
    out.reserve(end - begin);
    bool dot_removed = false;
    for (std::size_t i = begin; i < end; ++i) {
        const char c = raw[i];
        if (c == '.' && !dot_removed) {
            dot_removed = true;
            continue;
        }
        out.push_back(char(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

Codebook::Codebook(std::vector<DementiaCode> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        index_.emplace(entries_[i].code, int(i));
}

Codebook Codebook::from_entries(std::vector<DementiaCode> entries) {
    std::unordered_set<std::string> seen;
    for (auto &e : entries) {
        e.code = normalize(e.code);
        if (e.code.empty())
            throw InputError("codebook entry with empty code");
        if (!seen.insert(e.code).second)
            throw InputError("duplicate code in codebook: " + e.code);
    }
    if (entries.empty())
        throw InputError("codebook has no entries");
    return Codebook(std::move(entries));
}

const Codebook &Codebook::builtin() {
    static const Codebook instance = from_entries(builtin_entries());
    return instance;
}

Codebook Codebook::load(const std::string &path, DelimitedFormat format) {
    DelimitedReader reader(path, format);
    const std::size_t code_col = reader.column("code");
    const std::size_t category_col = reader.column("category");
    const std::size_t description_col = reader.column("description");
    std::vector<DementiaCode> entries;
    while (reader.next_row()) {
        if (reader.field_count() <= std::max({code_col, category_col, description_col}))
            throw InputError(path + ": short row " + std::to_string(reader.row_number()));
        const auto category = category_from_name(reader.field(category_col));
        if (!category)
            throw InputError(path + ": unknown category '" +
                             std::string(reader.field(category_col)) + "' at row " +
                             std::to_string(reader.row_number()));
        entries.push_back({std::string(reader.field(code_col)), *category,
                           std::string(reader.field(description_col))});
    }
    return from_entries(std::move(entries));
}

std::optional<int> Codebook::index_of(std::string_view raw_code) const {
    const auto it = index_.find(normalize(raw_code));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

std::optional<DiagnosticCategory> Codebook::classify(std::string_view raw_code) const {
    if (const auto idx = index_of(raw_code))
        return entries_[std::size_t(*idx)].category;
    return std::nullopt;
}

bool Codebook::is_dementia_qualifying(std::string_view raw_code) const {
    return classify(raw_code).has_value();
}

} // namespace sigdecay
