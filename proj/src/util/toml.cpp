#include "qiml/util/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qiml {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// strips a trailing comment, respecting quoted strings
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

TomlValue parse_scalar(const std::string& raw, std::size_t line_no) {
  TomlValue v;
  if (raw.empty())
    throw std::runtime_error("toml: empty value at line " + std::to_string(line_no));

  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw std::runtime_error("toml: unterminated string at line " +
                               std::to_string(line_no));
    v.kind = TomlValue::Kind::String;
    v.s = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = TomlValue::Kind::Bool;
    v.b = raw == "true";
    return v;
  }

  const bool looks_float = raw.find_first_of(".eEnN") != std::string::npos ||
                           raw == "inf" || raw == "-inf";
  if (!looks_float) {
    std::int64_t i = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), i);
    if (ec == std::errc{} && ptr == raw.data() + raw.size()) {
      v.kind = TomlValue::Kind::Int;
      v.i = i;
      return v;
    }
  }
  try {
    std::size_t used = 0;
    const double f = std::stod(raw, &used);
    if (used == raw.size()) {
      v.kind = TomlValue::Kind::Float;
      v.f = f;
      return v;
    }
  } catch (const std::exception&) {
  }
  throw std::runtime_error("toml: cannot parse value '" + raw + "' at line " +
                           std::to_string(line_no));
}

TomlValue parse_value(const std::string& raw, std::size_t line_no) {
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']')
      throw std::runtime_error("toml: unterminated array at line " +
                               std::to_string(line_no));
    TomlValue v;
    v.kind = TomlValue::Kind::Array;
    const std::string inner = trim(raw.substr(1, raw.size() - 2));
    if (inner.empty()) return v;
    std::size_t start = 0;
    bool in_string = false;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
      if (i < inner.size() && inner[i] == '"') in_string = !in_string;
      if (i == inner.size() || (inner[i] == ',' && !in_string)) {
        const std::string item = trim(inner.substr(start, i - start));
        if (!item.empty()) v.array.push_back(parse_scalar(item, line_no));
        start = i + 1;
      }
    }
    return v;
  }
  return parse_scalar(raw, line_no);
}

void format_value(std::ostringstream& out, const TomlValue& v) {
  switch (v.kind) {
    case TomlValue::Kind::Int:
      out << v.i;
      break;
    case TomlValue::Kind::Float: {
      char buf[40];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v.f);
      (void)ec;
      out.write(buf, ptr - buf);
      // keep it recognisably a float on re-parse
      const std::string_view sv(buf, static_cast<std::size_t>(ptr - buf));
      if (sv.find_first_of(".eEnN") == std::string_view::npos) out << ".0";
      break;
    }
    case TomlValue::Kind::Bool:
      out << (v.b ? "true" : "false");
      break;
    case TomlValue::Kind::String:
      out << '"' << v.s << '"';
      break;
    case TomlValue::Kind::Array:
      out << '[';
      for (std::size_t i = 0; i < v.array.size(); ++i) {
        if (i) out << ", ";
        format_value(out, v.array[i]);
      }
      out << ']';
      break;
  }
}

}  // namespace

const TomlValue& TomlTable::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw std::runtime_error("config: missing key '" + key + "'");
  return it->second;
}

std::int64_t TomlTable::get_int(const std::string& key) const {
  const auto& v = at(key);
  if (v.kind != TomlValue::Kind::Int)
    throw std::runtime_error("config: key '" + key + "' is not an integer");
  return v.i;
}

double TomlTable::get_float(const std::string& key) const {
  const auto& v = at(key);
  if (v.kind == TomlValue::Kind::Float) return v.f;
  if (v.kind == TomlValue::Kind::Int) return static_cast<double>(v.i);
  throw std::runtime_error("config: key '" + key + "' is not a number");
}

bool TomlTable::get_bool(const std::string& key) const {
  const auto& v = at(key);
  if (v.kind != TomlValue::Kind::Bool)
    throw std::runtime_error("config: key '" + key + "' is not a boolean");
  return v.b;
}

std::string TomlTable::get_string(const std::string& key) const {
  const auto& v = at(key);
  if (v.kind != TomlValue::Kind::String)
    throw std::runtime_error("config: key '" + key + "' is not a string");
  return v.s;
}

std::vector<double> TomlTable::get_float_array(const std::string& key) const {
  const auto& v = at(key);
  if (v.kind != TomlValue::Kind::Array)
    throw std::runtime_error("config: key '" + key + "' is not an array");
  std::vector<double> out;
  out.reserve(v.array.size());
  for (const auto& item : v.array) {
    if (item.kind == TomlValue::Kind::Float)
      out.push_back(item.f);
    else if (item.kind == TomlValue::Kind::Int)
      out.push_back(static_cast<double>(item.i));
    else
      throw std::runtime_error("config: key '" + key + "' has non-numeric entries");
  }
  return out;
}

std::int64_t TomlTable::get_int(const std::string& key, std::int64_t fallback) const {
  return contains(key) ? get_int(key) : fallback;
}
double TomlTable::get_float(const std::string& key, double fallback) const {
  return contains(key) ? get_float(key) : fallback;
}
bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  return contains(key) ? get_bool(key) : fallback;
}
std::string TomlTable::get_string(const std::string& key,
                                  const std::string& fallback) const {
  return contains(key) ? get_string(key) : fallback;
}
std::vector<double> TomlTable::get_float_array(
    const std::string& key, const std::vector<double>& fallback) const {
  return contains(key) ? get_float_array(key) : fallback;
}

void TomlTable::set(const std::string& key, TomlValue value) {
  values_[key] = std::move(value);
}

std::string TomlTable::serialise() const {
  // std::map keeps keys sorted, so grouping by section prefix is a single pass
  std::ostringstream out;
  std::string current_section;
  bool first = true;
  for (const auto& [key, value] : values_) {
    const auto dot = key.rfind('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
    if (section != current_section || first) {
      if (!first) out << '\n';
      if (!section.empty()) out << '[' << section << "]\n";
      current_section = section;
      first = false;
    }
    out << leaf << " = ";
    format_value(out, value);
    out << '\n';
  }
  return out.str();
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.size() > 1 && line[1] == '[')
        throw std::runtime_error("toml: array-of-tables unsupported, line " +
                                 std::to_string(line_no));
      if (line.back() != ']')
        throw std::runtime_error("toml: bad section header at line " +
                                 std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::runtime_error("toml: empty section name at line " +
                                 std::to_string(line_no));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("toml: expected key = value at line " +
                               std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("toml: empty key at line " + std::to_string(line_no));
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.contains(full))
      throw std::runtime_error("toml: duplicate key '" + full + "' at line " +
                               std::to_string(line_no));
    table.set(full, parse_value(raw, line_no));
  }
  return table;
}

TomlTable parse_toml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

}  // namespace qiml
