#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cltlab/conditions.hpp"
#include "cltlab/harness.hpp"

namespace cltlab {

// Flat sectioned key-value text. A line is "[section]", "key = v1 v2 ...",
// a comment (leading '#'), or blank. Keys may repeat within a section
// (transition matrix rows do). Specs are tagged records: the first value
// names the variant, the rest are its parameters.

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& what, int line_number)
        : std::runtime_error(what + " (line " + std::to_string(line_number) + ")"),
          line(line_number) {}
    int line;
};

struct ConfigEntry {
    std::string key;
    std::vector<std::string> values;
};

struct ConfigSection {
    std::string name;
    std::vector<ConfigEntry> entries;
};

struct ConfigFile {
    std::vector<ConfigSection> sections;

    const ConfigSection* find(const std::string& name) const;
    // First entry with the key, or nullptr.
    const ConfigEntry* find(const std::string& section, const std::string& key) const;
    std::vector<const ConfigEntry*> all(const std::string& section,
                                        const std::string& key) const;
};

ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::string& path);  // throws ConfigError

// Canonical form: sections and keys in file order, values single-spaced.
// serialize(parse(serialize(x))) == serialize(x).
std::string serialize_config(const ConfigFile& config);

// ---- builders (throw ConfigError with a field diagnostic) ------------------

DistributionSpec distribution_from_tokens(const std::vector<std::string>& tokens);
MeasureSpec measure_from_tokens(const std::vector<std::string>& tokens);
Observable observable_from_tokens(const std::vector<std::string>& tokens);
ProcessSpec process_from_config(const ConfigFile& config);
RateFamily rate_family_from_tokens(const std::vector<std::string>& tokens);

// [experiment] + [process] + [measure]
ExperimentConfig experiment_from_config(const ConfigFile& config);

}  // namespace cltlab
