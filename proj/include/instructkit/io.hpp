#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace instructkit::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Throws Error(MissingFile) when the file cannot be opened.
std::string read_file(const fs::path& path);

/// Writes through a temporary sibling and renames, creating parent dirs.
/// Throws Error(IoError).
void write_file(const fs::path& path, std::string_view contents);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

/// One delimited table: header names plus rows of the same width.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row

  /// Column index by name, or throws Error(UnknownColumn).
  std::size_t column(std::string_view name) const;
};

/// RFC 4180 style reader: quoted fields may contain the delimiter, doubled
/// quotes, and newlines. Throws Error(ParseError) with the line number.
Table parse_delimited(std::string_view text, char delimiter);

std::string quote_csv(std::string_view field);

/// Calls `fn(line_number, object)` for each non-blank line.
void for_each_jsonl(std::string_view text, const std::function<void(std::size_t, const json&)>& fn);

/// Dumps one compact JSON object per line, no non-ASCII escaping.
std::string dump_line(const json& value);

/// Line number (1-based) of a byte offset into `text`.
std::size_t line_of_offset(std::string_view text, std::size_t offset);

}  // namespace instructkit::io
