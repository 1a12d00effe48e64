#include "synthpipe/io/toml.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "synthpipe/core/errors.hpp"

namespace synthpipe {

std::int64_t TomlValue::as_int() const {
  if (!is_int()) throw ParseError("TOML value is not an integer");
  return std::get<std::int64_t>(v);
}

double TomlValue::as_double() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(v));
  if (!is_float()) throw ParseError("TOML value is not a number");
  return std::get<double>(v);
}

bool TomlValue::as_bool() const {
  if (!is_bool()) throw ParseError("TOML value is not a boolean");
  return std::get<bool>(v);
}

const std::string& TomlValue::as_string() const {
  if (!is_string()) throw ParseError("TOML value is not a string");
  return std::get<std::string>(v);
}

const TomlValue::Array& TomlValue::as_array() const {
  if (!is_array()) throw ParseError("TOML value is not an array");
  return std::get<Array>(v);
}

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Removes a trailing comment that is not inside a string literal.
std::string_view strip_comment(std::string_view s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

TomlValue parse_scalar(std::string_view tok, int line_no);

TomlValue parse_value(std::string_view tok, int line_no) {
  tok = strip(tok);
  if (tok.empty()) throw ParseError("TOML: empty value at line " + std::to_string(line_no));
  if (tok.front() == '[') {
    if (tok.back() != ']') {
      throw ParseError("TOML: unterminated array at line " + std::to_string(line_no));
    }
    TomlValue::Array arr;
    std::string_view body = tok.substr(1, tok.size() - 2);
    std::size_t start = 0;
    bool in_str = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i < body.size() && body[i] == '"') in_str = !in_str;
      if (i == body.size() || (body[i] == ',' && !in_str)) {
        std::string_view item = strip(body.substr(start, i - start));
        if (!item.empty()) arr.push_back(parse_scalar(item, line_no));
        start = i + 1;
      }
    }
    return TomlValue{std::move(arr)};
  }
  return parse_scalar(tok, line_no);
}

TomlValue parse_scalar(std::string_view tok, int line_no) {
  tok = strip(tok);
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
      if (tok[i] == '\\' && i + 2 < tok.size()) {
        ++i;
        switch (tok[i]) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: out.push_back(tok[i]);
        }
      } else {
        out.push_back(tok[i]);
      }
    }
    return TomlValue{std::move(out)};
  }
  if (tok == "true") return TomlValue{true};
  if (tok == "false") return TomlValue{false};

  const std::string s(tok);
  const bool looks_float = s.find_first_of(".eE") != std::string::npos &&
                           s.find("0x") == std::string::npos;
  if (!looks_float) {
    std::int64_t iv = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), iv);
    if (ec == std::errc() && p == s.data() + s.size()) return TomlValue{iv};
  }
  try {
    std::size_t pos = 0;
    double dv = std::stod(s, &pos);
    if (pos == s.size()) return TomlValue{dv};
  } catch (...) {
  }
  throw ParseError("TOML: cannot parse value '" + s + "' at line " + std::to_string(line_no));
}

std::string format_value(const TomlValue& v) {
  if (v.is_int()) return std::to_string(std::get<std::int64_t>(v.v));
  if (v.is_bool()) return std::get<bool>(v.v) ? "true" : "false";
  if (v.is_float()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(v.v));
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  if (v.is_string()) {
    std::string out = "\"";
    for (char c : std::get<std::string>(v.v)) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out += "\"";
    return out;
  }
  std::string out = "[";
  const auto& arr = std::get<TomlValue::Array>(v.v);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (i) out += ", ";
    out += format_value(arr[i]);
  }
  out += "]";
  return out;
}

}  // namespace

bool TomlTable::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

const TomlValue& TomlTable::at(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end() || !s->second.count(key)) {
    throw ParseError("TOML: missing key [" + section + "] " + key);
  }
  return s->second.at(key);
}

std::int64_t TomlTable::get_int(const std::string& section, const std::string& key,
                                std::int64_t fallback) const {
  return has(section, key) ? at(section, key).as_int() : fallback;
}

double TomlTable::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? at(section, key).as_double() : fallback;
}

bool TomlTable::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  return has(section, key) ? at(section, key).as_bool() : fallback;
}

std::string TomlTable::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  return has(section, key) ? at(section, key).as_string() : fallback;
}

std::vector<double> TomlTable::get_double_array(const std::string& section,
                                                const std::string& key,
                                                const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  for (const auto& item : at(section, key).as_array()) out.push_back(item.as_double());
  return out;
}

std::vector<std::int64_t> TomlTable::get_int_array(
    const std::string& section, const std::string& key,
    const std::vector<std::int64_t>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<std::int64_t> out;
  for (const auto& item : at(section, key).as_array()) out.push_back(item.as_int());
  return out;
}

std::vector<std::string> TomlTable::get_string_array(
    const std::string& section, const std::string& key,
    const std::vector<std::string>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<std::string> out;
  for (const auto& item : at(section, key).as_array()) out.push_back(item.as_string());
  return out;
}

void TomlTable::set(const std::string& section, const std::string& key, TomlValue value) {
  sections_[section][key] = std::move(value);
}

std::string TomlTable::dump() const {
  std::ostringstream os;
  auto emit = [&os](const Section& sec) {
    for (const auto& [k, v] : sec) os << k << " = " << format_value(v) << "\n";
  };
  if (auto top = sections_.find(""); top != sections_.end()) emit(top->second);
  for (const auto& [name, sec] : sections_) {
    if (name.empty()) continue;
    os << "\n[" << name << "]\n";
    emit(sec);
  }
  return os.str();
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string_view line = strip(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ParseError("TOML: bad section header at line " + std::to_string(line_no));
      }
      section = std::string(strip(line.substr(1, line.size() - 2)));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("TOML: expected key = value at line " + std::to_string(line_no));
    }
    std::string key(strip(line.substr(0, eq)));
    if (key.empty()) {
      throw ParseError("TOML: empty key at line " + std::to_string(line_no));
    }
    table.set(section, key, parse_value(line.substr(eq + 1), line_no));
  }
  return table;
}

TomlTable load_toml(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open TOML file: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_toml(buf.str());
}

void save_toml(const std::filesystem::path& path, const TomlTable& table) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot create TOML file: " + path.string());
  os << table.dump();
}

}  // namespace synthpipe
