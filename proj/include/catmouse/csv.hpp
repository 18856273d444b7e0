#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace catmouse {

using ConfigHeader = std::vector<std::pair<std::string, std::string>>;

std::string cell(double v);
std::string cell(std::int64_t v);
std::string cell(std::uint64_t v);
inline std::string cell(int v) { return cell(static_cast<std::int64_t>(v)); }
// Text is quoted when it holds a comma, quote or line break.
std::string cell(const std::string& s);
inline std::string cell(const char* s) { return cell(std::string(s)); }

// CSV file whose first lines are "# key=value" records of the producing config.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const ConfigHeader& header,
            const std::vector<std::string>& columns);

  template <class... T>
  void row(const T&... values) {
    write({cell(values)...});
  }
  void write(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace catmouse
