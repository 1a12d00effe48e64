#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace synthpipe {

// Minimal TOML subset used by the pipeline's config files: flat
// [section] tables, key = value pairs, values limited to integers,
// floats, booleans, basic strings, and homogeneous arrays of those.

struct TomlValue {
  using Array = std::vector<TomlValue>;
  std::variant<std::int64_t, double, bool, std::string, Array> v;

  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_float() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_array() const { return std::holds_alternative<Array>(v); }

  std::int64_t as_int() const;
  double as_double() const;  // accepts integer values too
  bool as_bool() const;
  const std::string& as_string() const;
  const Array& as_array() const;
};

class TomlTable {
 public:
  using Section = std::map<std::string, TomlValue>;

  bool has(const std::string& section, const std::string& key) const;
  const TomlValue& at(const std::string& section, const std::string& key) const;

  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::vector<double> get_double_array(const std::string& section, const std::string& key,
                                       const std::vector<double>& fallback) const;
  std::vector<std::int64_t> get_int_array(const std::string& section, const std::string& key,
                                          const std::vector<std::int64_t>& fallback) const;
  std::vector<std::string> get_string_array(const std::string& section, const std::string& key,
                                            const std::vector<std::string>& fallback) const;

  void set(const std::string& section, const std::string& key, TomlValue value);

  const std::map<std::string, Section>& sections() const { return sections_; }

  std::string dump() const;

 private:
  std::map<std::string, Section> sections_;  // "" holds top-level keys
};

TomlTable parse_toml(const std::string& text);
TomlTable load_toml(const std::filesystem::path& path);
void save_toml(const std::filesystem::path& path, const TomlTable& table);

}  // namespace synthpipe
