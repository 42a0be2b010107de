// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isac/frameworks.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>

namespace isac
{
// Subset of TOML: [table], [[array-of-tables]], key = value with numbers,
// quoted strings, booleans and flat arrays of numbers or strings. '#' comments.
using ConfigValue = std::variant<double, std::string, bool, std::vector<double>, std::vector<std::string>>;

class ConfigTable
{
  public:
    void set(const std::string &key, ConfigValue v) { values_[key] = std::move(v); }
    bool has(const std::string &key) const { return values_.count(key) != 0; }
    const std::map<std::string, ConfigValue> &values() const { return values_; }

    double number(const std::string &key, double fallback) const;
    std::string string(const std::string &key, const std::string &fallback) const;
    bool boolean(const std::string &key, bool fallback) const;
    std::vector<double> numbers(const std::string &key, const std::vector<double> &fallback) const;
    std::vector<std::string> strings(const std::string &key, const std::vector<std::string> &fallback) const;

  private:
    std::map<std::string, ConfigValue> values_;
};

struct ConfigDocument
{
    std::map<std::string, ConfigTable> tables;
    std::map<std::string, std::vector<ConfigTable>> arrays;

    const ConfigTable &table(const std::string &name) const; // empty table when absent
};

class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

ConfigDocument parse_config(const std::string &text);
ConfigDocument load_config(const std::string &path);

// Sections missing from the document keep the reference defaults.
Scene scene_from_config(const ConfigDocument &doc);
OfdmConfig ofdm_from_config(const ConfigDocument &doc);
FrameworkConfig framework_from_config(const ConfigDocument &doc);
std::optional<double> snr_from_config(const ConfigDocument &doc);
std::uint64_t seed_from_config(const ConfigDocument &doc, std::uint64_t fallback);

ArrayReference parse_reference(const std::string &s);
SteeringKind parse_model(const std::string &s);
AxisKind parse_axis(const std::string &s);
const char *model_name(SteeringKind k);
} // namespace isac
