#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>

#include "qnlb/bandit.hpp"

namespace qnlb {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Flat `key = value` pairs. Blank lines and lines starting with '#' are skipped.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::filesystem::path& path);

// Applies recognised keys onto cfg. Unknown keys and malformed values throw.
void apply_config(RunConfig& cfg, const KeyValues& kv);

KeyValues to_key_values(const ModelSpec& spec);
ModelSpec model_spec_from(const KeyValues& kv);

}  // namespace qnlb
