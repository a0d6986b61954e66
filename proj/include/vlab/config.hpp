#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

// Flat INI-style file: "[section]" headers, "key = value" lines, comments
// starting with '#' or ';'. Keys before the first header belong to section "".
// Numeric values may be constant expressions such as exp(9) or 1/4.
class Config {
 public:
  struct Entry {
    std::string section, key, value;
    std::size_t line = 0, column = 0;  // position of the value
  };

  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  const std::string& source() const { return source_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry* find(const std::string& section, const std::string& key) const;
  bool has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

  std::string text(const std::string& section, const std::string& key) const;
  std::optional<std::string> text_or(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;
  std::vector<double> numbers_or(const std::string& section, const std::string& key,
                                 std::vector<double> fallback) const;

  [[noreturn]] void fail(const Entry& e, std::size_t offset, const std::string& what) const;

 private:
  std::string source_;
  std::vector<Entry> entries_;
};

}  // namespace vlab
