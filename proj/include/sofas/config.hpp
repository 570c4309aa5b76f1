#pragma once

#include "sofas/baseline_lk.hpp"
#include "sofas/engine.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sofas {

/// Everything a run can be configured with. Angles are exposed in degrees (keys ending in _deg).
struct RunConfig {
    EngineConfig engine;
    LKConfig lk;

    /// Throws ConfigError naming the first invalid key.
    void validate() const;
};

/// Parsed `key = value` lines in file order. `#` starts a comment line.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Throws ParseError for a line without `=` or with an empty key.
KeyValues parse_key_values(std::istream& in);
KeyValues parse_key_values_file(const std::string& path);

/// Assigns one key. Throws ConfigError for an unknown key or an unparsable value.
void set_key(RunConfig& cfg, std::string_view key, std::string_view value);

/// Applies all pairs in order and validates the result.
void apply(RunConfig& cfg, const KeyValues& kv);

/// Every key with its current value, one `key = value` line each, in a fixed order. Parsing the
/// output back reproduces `cfg`; degree-valued keys may come back one ulp off.
void write_config(std::ostream& out, const RunConfig& cfg);

/// All recognised keys.
std::vector<std::string> config_keys();

} // namespace sofas
