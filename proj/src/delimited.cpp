#include "sigdecay/delimited.hpp"

#include "sigdecay/errors.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace sigdecay {

void split_line(std::string_view line, char delimiter, std::vector<std::string_view> &out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

DelimitedReader::DelimitedReader(const std::string &path, DelimitedFormat format)
    : stream_(path), path_(path), format_(format) {
    if (!stream_)
        throw InputError("cannot open input file: " + path);
    std::string header_line;
    if (!std::getline(stream_, header_line))
        throw InputError("empty file (missing header): " + path);
    if (!header_line.empty() && header_line.back() == '\r')
        header_line.pop_back();
    std::vector<std::string_view> parts;
    split_line(header_line, format_.delimiter, parts);
    header_.assign(parts.begin(), parts.end());
}

std::size_t DelimitedReader::column(std::string_view name) const {
    if (auto idx = find_column(name))
        return *idx;
    throw InputError(path_ + ": missing required column '" + std::string(name) + "'");
}

std::optional<std::size_t> DelimitedReader::find_column(std::string_view name) const {
    const auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end())
        return std::nullopt;
    return std::size_t(it - header_.begin());
}

bool DelimitedReader::next_row() {
    if (!std::getline(stream_, line_))
        return false;
    if (!line_.empty() && line_.back() == '\r')
        line_.pop_back();
    split_line(line_, format_.delimiter, fields_);
    ++row_number_;
    return true;
}

DelimitedWriter::DelimitedWriter(const std::string &path, DelimitedFormat format)
    : stream_(path), path_(path), format_(format) {
    if (!stream_)
        throw InputError("cannot open output file: " + path);
}

void DelimitedWriter::write_row(const std::vector<std::string> &fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0)
            stream_.put(format_.delimiter);
        stream_.write(fields[i].data(), std::streamsize(fields[i].size()));
    }
    stream_.put('\n');
    if (!stream_)
        throw InputError("write failed: " + path_);
}

std::optional<int> parse_int(std::string_view text) {
    int value = 0;
    const char *first = text.data();
    const char *last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty())
        return std::nullopt;
    return value;
}

std::optional<double> parse_double(std::string_view text) {
    double value = 0.0;
    const char *first = text.data();
    const char *last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty())
        return std::nullopt;
    return value;
}

std::string format_double(double value) {
    // Shortest representation that parses back to the same bits.
    std::array<char, 40> buf;
    for (int precision = 1; precision <= 17; ++precision) {
        const int len =
            std::snprintf(buf.data(), buf.size(), "%.*g", precision, value);
        std::string candidate(buf.data(), std::size_t(len));
        if (const auto back = parse_double(candidate); back && *back == value)
            return candidate;
    }
    const int len = std::snprintf(buf.data(), buf.size(), "%.17g", value);
    return std::string(buf.data(), std::size_t(len));
}

void write_diagnostics(const std::string &path, const std::vector<RowDiagnostic> &diagnostics) {
    if (diagnostics.empty())
        return;
    DelimitedWriter writer(path);
    writer.write_header({"row", "column", "reason"});
    for (const auto &d : diagnostics)
        writer.write_row({std::to_string(d.row), d.column, d.reason});
}

} // namespace sigdecay
