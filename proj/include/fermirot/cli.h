#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fermirot/algebra.h"

namespace fermirot {

/// Flat key-value configuration with one section per subcommand:
///
///   [dynamics]
///   model = hubbard
///   sites = 5
///   # comment
///
/// Values are single tokens or space-separated lists.
class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& name = "<config>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<OrbitalIndex> get_index_list(const std::string& section, const std::string& key) const;
    std::vector<std::uint64_t> get_uint64_list(const std::string& section,
                                               const std::string& key) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string name_;
};

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 1;
    std::uint64_t seed = 0;
};

/// Subcommand entry points. Each returns a process exit code: 0 on success,
/// 2 on malformed input or configuration, 3 when the closed-form case
/// analysis reports a structural violation. Diagnostics go to stderr.
int cmd_transform(const CliOptions& options);
int cmd_downfold(const CliOptions& options);
int cmd_dynamics(const CliOptions& options);
int cmd_inspect(const CliOptions& options);

/// The %.12g rendering used for every floating-point value in text artifacts.
std::string format_number(double value);

} // namespace fermirot
