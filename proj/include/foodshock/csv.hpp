#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace foodshock::csv {

/// Row-oriented reader for RFC 4180 style files with a mandatory header.
/// Fields may be quoted; embedded quotes are doubled.
class Reader {
public:
    explicit Reader(const std::filesystem::path& path);

    const std::vector<std::string>& header() const { return header_; }
    /// Index of a named column; throws DataError when absent.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;

    /// Reads the next record into `fields`. Blank lines are skipped.
    bool next(std::vector<std::string>& fields);

    /// 1-based line number of the last record returned by next().
    std::size_t line() const { return line_; }
    const std::filesystem::path& path() const { return path_; }

    /// "file:line: message", for error reporting.
    std::string where(std::string_view message) const;

    double parse_double(const std::string& field, std::string_view column) const;
    long parse_long(const std::string& field, std::string_view column) const;

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::vector<std::string> header_;
    std::size_t line_ = 0;
};

std::vector<std::string> split_record(std::string_view line);

/// Quotes a field only when it contains a separator, quote or newline.
std::string escape(std::string_view field);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// Buffered writer that publishes the file atomically on commit().
class Writer {
public:
    Writer(std::filesystem::path path, const std::vector<std::string>& header);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    Writer& field(std::string_view value);
    Writer& field(double value);
    Writer& field(long long value);
    Writer& field(std::size_t value) { return field(static_cast<long long>(value)); }
    Writer& field(int value) { return field(static_cast<long long>(value)); }
    void end_row();
    void commit();

private:
    std::filesystem::path path_;
    std::string buffer_;
    bool row_open_ = false;
    bool committed_ = false;
};

/// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace foodshock::csv
