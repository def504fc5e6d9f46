// Command-line front end. Everything flows through the C API in factlab.h;
// this file owns only argument handling, config file reading, and exit codes.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "factlab.h"

namespace {

int exit_code_for(fl_status st) {
  switch (st) {
    case FL_OK:
      return 0;
    case FL_INVALID_ARGUMENT:
    case FL_CORRUPT_DATA:
      return 2;  // config error
    case FL_BUDGET_EXCEEDED:
    case FL_CAP_EXCEEDED:
      return 3;  // budget refusal
    case FL_VERIFY_FAILED:
      return 4;  // verification failure
    default:
      return 1;
  }
}

int usage_error(const char* message) {
  std::fprintf(stderr, "factlab: %s\nRun 'factlab --help' for usage.\n", message);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) return usage_error("missing command");
  std::string first = argv[1];
  if (first == "--help" || first == "-h" || first == "help") {
    std::fputs(fl_cli_help(), stdout);
    return 0;
  }
  if (first == "--version") {
    std::printf("factlab %s\n", fl_version());
    return 0;
  }
  if (first.size() >= 2 && first.compare(0, 2, "--") == 0)
    return usage_error("the command must come before any flags");

  std::string config_text;
  std::vector<std::string> keys{"command"};
  std::vector<std::string> values{first};

  for (int i = 2; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--help" || arg == "-h") {
      std::fputs(fl_cli_help(), stdout);
      return 0;
    }
    if (arg.size() < 3 || arg.compare(0, 2, "--") != 0)
      return usage_error(("expected a --key flag, got '" + arg + "'").c_str());
    std::string key = arg.substr(2);
    if (i + 1 >= argc) return usage_error(("flag --" + key + " is missing its value").c_str());
    std::string value = argv[++i];
    if (key == "config") {
      std::ifstream in(value, std::ios::binary);
      if (!in) return usage_error(("cannot read config file " + value).c_str());
      std::ostringstream buf;
      buf << in.rdbuf();
      config_text = buf.str();
      continue;
    }
    if (key == "command")
      return usage_error("give the command as the first argument, not as --command");
    keys.push_back(key);
    values.push_back(value);
  }

  std::vector<const char*> key_ptrs, value_ptrs;
  for (const std::string& k : keys) key_ptrs.push_back(k.c_str());
  for (const std::string& v : values) value_ptrs.push_back(v.c_str());

  char* manifest = nullptr;
  fl_status st = fl_run_experiment(config_text.c_str(), key_ptrs.data(), value_ptrs.data(),
                                   key_ptrs.size(), &manifest);
  if (st != FL_OK) {
    std::fprintf(stderr, "factlab: %s\n", fl_last_error());
    return exit_code_for(st);
  }
  std::fputs(manifest, stdout);
  fl_string_free(manifest);
  return 0;
}
