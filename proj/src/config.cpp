#include "vlab/config.hpp"

#include <fstream>
#include <sstream>

#include "vlab/expr.hpp"

namespace vlab {

namespace {

std::size_t first_non_space(const std::string& s, std::size_t from = 0) {
  while (from < s.size() && (s[from] == ' ' || s[from] == '\t')) ++from;
  return from;
}

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

Config Config::parse(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    // Comments run to the end of the line; '#' and ';' never occur in values.
    const std::size_t hash = raw.find_first_of("#;");
    const std::string line = rtrim(hash == std::string::npos ? raw : raw.substr(0, hash));
    const std::size_t start = first_non_space(line);
    if (start == line.size()) continue;
    if (line[start] == '[') {
      const std::size_t close = line.find(']', start);
      if (close == std::string::npos) throw ConfigError(source, lineno, line.size() + 1, "expected ']'");
      if (first_non_space(line, close + 1) != line.size())
        throw ConfigError(source, lineno, close + 2, "unexpected text after section header");
      section = line.substr(start + 1, close - start - 1);
      const std::size_t s0 = first_non_space(section);
      section = rtrim(section.substr(s0));
      if (section.empty()) throw ConfigError(source, lineno, start + 2, "empty section name");
      continue;
    }
    const std::size_t eq = line.find('=', start);
    if (eq == std::string::npos) throw ConfigError(source, lineno, line.size() + 1, "expected '='");
    const std::string key = rtrim(line.substr(start, eq - start));
    if (key.empty()) throw ConfigError(source, lineno, start + 1, "missing key");
    for (char ch : key)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.'))
        throw ConfigError(source, lineno, start + 1, "invalid key '" + key + "'");
    const std::size_t vstart = first_non_space(line, eq + 1);
    if (vstart == line.size()) throw ConfigError(source, lineno, line.size() + 1, "missing value for '" + key + "'");
    if (cfg.find(section, key))
      throw ConfigError(source, lineno, start + 1, "duplicate key '" + key + "' in [" + section + "]");
    cfg.entries_.push_back({section, key, line.substr(vstart), lineno, vstart + 1});
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

void Config::fail(const Entry& e, std::size_t offset, const std::string& what) const {
  throw ConfigError(source_, e.line, e.column + (offset ? offset - 1 : 0), what);
}

std::string Config::text(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) throw ConfigError(source_, 0, 0, "missing key '" + key + "' in [" + section + "]");
  return e->value;
}

std::optional<std::string> Config::text_or(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  return e->value;
}

namespace {

double constant(const Config& cfg, const Config::Entry& e, const std::string& src, std::size_t base) {
  try {
    return eval_constant(src);
  } catch (const ParseError& err) {
    cfg.fail(e, base + err.offset(), "expected " + err.expected());
  } catch (const EvalError& err) {
    cfg.fail(e, base + 1, err.what());
  }
}

}  // namespace

double Config::number(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) throw ConfigError(source_, 0, 0, "missing key '" + key + "' in [" + section + "]");
  return constant(*this, *e, e->value, 0);
}

double Config::number_or(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) throw ConfigError(source_, 0, 0, "missing key '" + key + "' in [" + section + "]");
  std::vector<double> out;
  std::size_t pos = 0;
  const std::string& v = e->value;
  while (pos <= v.size()) {
    // Split on top-level commas so items like max(1, 2) stay intact.
    int depth = 0;
    std::size_t end = pos;
    for (; end < v.size(); ++end) {
      if (v[end] == '(') ++depth;
      if (v[end] == ')') --depth;
      if (v[end] == ',' && depth == 0) break;
    }
    const std::string item = v.substr(pos, end - pos);
    if (first_non_space(item) == item.size()) fail(*e, pos + 1, "empty list item");
    out.push_back(constant(*this, *e, item, pos));
    pos = end + 1;
  }
  return out;
}

std::vector<double> Config::numbers_or(const std::string& section, const std::string& key,
                                       std::vector<double> fallback) const {
  return has(section, key) ? numbers(section, key) : fallback;
}

}  // namespace vlab
