#ifndef SIGDECAY_CODEBOOK_HPP
#define SIGDECAY_CODEBOOK_HPP

#include "sigdecay/delimited.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sigdecay {

/// The five diagnostic groupings of dementia-qualifying ICD-10 codes.
enum class DiagnosticCategory : std::uint8_t {
    AlzheimersDisease = 0,
    VascularDementia,
    NonSpecificDementia,
    PicksDisease,
    NeurocognitiveDisorder,
};

inline constexpr int kCategoryCount = 5;

std::string_view category_name(DiagnosticCategory category);
std::optional<DiagnosticCategory> category_from_name(std::string_view name);

struct DementiaCode {
    std::string code; // normalized: uppercase, no dot
    DiagnosticCategory category;
    std::string description;
};

/// The table of dementia-qualifying ICD-10 codes. The built-in table has the
/// 17 standard entries; an override file may swap in an alternative code set
/// for sensitivity runs. Immutable once constructed.
class Codebook {
  public:
    /// The built-in 17-code table.
    static const Codebook &builtin();

    /// Validates uniqueness after normalization; throws InputError on duplicates.
    static Codebook from_entries(std::vector<DementiaCode> entries);

    /// Override file: delimited text with columns code, category, description.
    static Codebook load(const std::string &path, DelimitedFormat format = {});

    /// Trims whitespace, uppercases, and deletes a single dot ("F01.50" -> "F0150").
    static std::string normalize(std::string_view raw);

    std::optional<DiagnosticCategory> classify(std::string_view raw_code) const;
    bool is_dementia_qualifying(std::string_view raw_code) const;

    /// Index of the normalized code within entries(), if qualifying.
    std::optional<int> index_of(std::string_view raw_code) const;

    const std::vector<DementiaCode> &entries() const { return entries_; }
    int size() const { return int(entries_.size()); }
    const DementiaCode &entry(int index) const { return entries_[std::size_t(index)]; }
    DiagnosticCategory category_of(int index) const {
        return entries_[std::size_t(index)].category;
    }

  private:
    explicit Codebook(std::vector<DementiaCode> entries);
    std::vector<DementiaCode> entries_;
    std::unordered_map<std::string, int> index_;
};

} // namespace sigdecay

#endif
