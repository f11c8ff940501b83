#pragma once

#include <string>

#include "jmlmc/problem.hpp"
#include "jmlmc/study.hpp"

namespace jmlmc {

/// Everything a config file can set.
struct Config {
    ProblemConfig problem;
    StudyConfig study;
};

/// Parses sectioned `key = value` text. Missing keys keep their defaults,
/// unknown sections or keys are rejected; errors quote the line number.
Config parse_config(const std::string& text, const std::string& origin = "<config>");
/// Sets one `section.key` as if it appeared in a config file. Does not
/// validate; call the validate() members afterwards.
void override_config(Config& config, const std::string& key, const std::string& value,
                     const std::string& origin = "override");

/// Reads and parses a file; IoError if it cannot be read.
Config load_config(const std::string& path);
/// Canonical text that parse_config maps back to an equal Config.
std::string serialize_config(const Config& config);
/// The [problem], [field], [jumps], [qoi] and [solver] sections only.
std::string serialize_problem(const ProblemConfig& problem);

bool operator==(const ProblemConfig& a, const ProblemConfig& b);

/// 64-bit FNV-1a, lower-case hex.
std::string fnv1a_hex(const std::string& text);

}  // namespace jmlmc
