#include "foodshock/csv.hpp"

#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <system_error>

namespace foodshock::csv {

namespace {

void strip_cr(std::string& line)
{
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

bool is_blank(std::string_view line)
{
    return line.find_first_not_of(" \t") == std::string_view::npos;
}

} // namespace

std::vector<std::string> split_record(std::string_view line)
{
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    current.push_back('"');
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

Reader::Reader(const std::filesystem::path& path)
    : path_(path), in_(path)
{
    if (!in_) {
        throw DataError(fmt::format("cannot open {}", path.string()));
    }
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        strip_cr(line);
        if (line_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        if (!is_blank(line)) {
            header_ = split_record(line);
            return;
        }
    }
    throw DataError(fmt::format("{}: missing header row", path.string()));
}

std::optional<std::size_t> Reader::find_column(std::string_view name) const
{
    for (std::size_t k = 0; k < header_.size(); ++k) {
        if (header_[k] == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::size_t Reader::column(std::string_view name) const
{
    if (auto k = find_column(name)) {
        return *k;
    }
    throw DataError(fmt::format("{}: missing column '{}'", path_.string(), name));
}

bool Reader::next(std::vector<std::string>& fields)
{
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        strip_cr(line);
        if (is_blank(line)) {
            continue;
        }
        // A quoted field may span lines.
        while (std::count(line.begin(), line.end(), '"') % 2 != 0) {
            std::string more;
            if (!std::getline(in_, more)) {
                throw DataError(where("unterminated quoted field"));
            }
            strip_cr(more);
            line += '\n';
            line += more;
        }
        fields = split_record(line);
        if (fields.size() != header_.size()) {
            throw DataError(where(fmt::format("expected {} fields, found {}", header_.size(), fields.size())));
        }
        return true;
    }
    return false;
}

std::string Reader::where(std::string_view message) const
{
    return fmt::format("{}:{}: {}", path_.string(), line_, message);
}

double Reader::parse_double(const std::string& field, std::string_view column) const
{
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first < last && *first == ' ') {
        ++first;
    }
    if (first < last && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw DataError(where(fmt::format("column '{}': not a finite number: '{}'", column, field)));
    }
    return value;
}

long Reader::parse_long(const std::string& field, std::string_view column) const
{
    long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(where(fmt::format("column '{}': not an integer: '{}'", column, field)));
    }
    return value;
}

std::string escape(std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

std::string format_double(double value)
{
    return fmt::format("{}", value);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError(fmt::format("cannot write {}", tmp.string()));
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw DataError(fmt::format("write failed for {}", tmp.string()));
        }
    }
    std::filesystem::rename(tmp, path);
}

Writer::Writer(std::filesystem::path path, const std::vector<std::string>& header)
    : path_(std::move(path))
{
    for (const auto& name : header) {
        field(std::string_view(name));
    }
    end_row();
}

Writer::~Writer() = default;

Writer& Writer::field(std::string_view value)
{
    if (row_open_) {
        buffer_ += ',';
    }
    buffer_ += escape(value);
    row_open_ = true;
    return *this;
}

Writer& Writer::field(double value)
{
    return field(std::string_view(format_double(value)));
}

Writer& Writer::field(long long value)
{
    return field(std::string_view(fmt::format("{}", value)));
}

void Writer::end_row()
{
    buffer_ += '\n';
    row_open_ = false;
}

void Writer::commit()
{
    if (committed_) {
        return;
    }
    write_file_atomic(path_, buffer_);
    committed_ = true;
}

} // namespace foodshock::csv
