#include "catmouse/csv.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace catmouse {

std::string cell(double v) { return fmt::format("{:.17g}", v); }
std::string cell(std::int64_t v) { return fmt::format("{}", v); }
std::string cell(std::uint64_t v) { return fmt::format("{}", v); }

std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const ConfigHeader& header,
                     const std::vector<std::string>& columns)
    : path_(path), width_(columns.size()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [k, v] : header) out_ << "# " << k << '=' << v << '\n';
  write(columns);
}

void CsvWriter::write(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("CsvWriter: row width mismatch in " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

}  // namespace catmouse
