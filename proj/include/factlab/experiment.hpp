#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "factlab/errors.hpp"

namespace factlab {

// Flat key=value configuration. One "command" key selects the experiment;
// every other key is validated against that command's schema before any
// computation starts. No nesting.
using ConfigMap = std::map<std::string, std::string>;

// Parses "key=value" lines. '#' starts a comment, blank lines are skipped,
// whitespace around keys and values is trimmed. Duplicate keys are an error.
// parse(serialize(parse(text))) == parse(text).
ConfigMap parse_config(const std::string& text);
std::string serialize_config(const ConfigMap& cfg);

struct RunResult {
  std::string manifest_path;
  std::string manifest_json;
  std::vector<std::string> outputs;  // data files, in the order written
};

// Executes one experiment run: validates the config, drives the mapped module
// operations, writes CSV (and JSON certificate) outputs, then writes the
// manifest last via a temp-file rename. A run without a manifest failed.
// On failure every file created by the run is removed before the error
// propagates. Progress goes to stderr, never stdout.
RunResult run_experiment(const ConfigMap& cfg);

// Full usage text: commands, config keys, CSV columns, exit codes.
const std::string& experiment_help();

}  // namespace factlab
