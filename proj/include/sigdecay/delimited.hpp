#ifndef SIGDECAY_DELIMITED_HPP
#define SIGDECAY_DELIMITED_HPP

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sigdecay {

/// All tabular inputs and outputs are header-first delimited text.
/// Fields must not contain the delimiter or line breaks; no quoting.
struct DelimitedFormat {
    char delimiter = '\t';
};

/// One rejected input row: 1-based data row index (header excluded),
/// offending column name, and a human-readable reason.
struct RowDiagnostic {
    std::size_t row = 0;
    std::string column;
    std::string reason;
};

/// Streaming reader with header-resolved column access.
class DelimitedReader {
  public:
    DelimitedReader(const std::string &path, DelimitedFormat format = {});

    const std::vector<std::string> &header() const { return header_; }
    /// Column index for `name`; throws InputError if missing.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;

    /// Advances to the next data row. Returns false at end of file.
    bool next_row();
    std::size_t row_number() const { return row_number_; }
    std::size_t field_count() const { return fields_.size(); }
    std::string_view field(std::size_t index) const { return fields_[index]; }

  private:
    std::ifstream stream_;
    std::string path_;
    DelimitedFormat format_;
    std::vector<std::string> header_;
    std::string line_;
    std::vector<std::string_view> fields_;
    std::size_t row_number_ = 0;
};

/// Line-buffered writer; write_row joins fields with the delimiter.
class DelimitedWriter {
  public:
    DelimitedWriter(const std::string &path, DelimitedFormat format = {});

    void write_row(const std::vector<std::string> &fields);
    void write_header(const std::vector<std::string> &names) { write_row(names); }

  private:
    std::ofstream stream_;
    std::string path_;
    DelimitedFormat format_;
};

void split_line(std::string_view line, char delimiter, std::vector<std::string_view> &out);

std::optional<int> parse_int(std::string_view text);
std::optional<double> parse_double(std::string_view text);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);

/// Writes a reject report (row, column, reason). No file when empty.
void write_diagnostics(const std::string &path, const std::vector<RowDiagnostic> &diagnostics);

} // namespace sigdecay

#endif
