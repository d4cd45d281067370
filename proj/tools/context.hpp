#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uavpheno/error.hpp"

namespace uavpheno::cli {

/// Per-run state shared by the subcommands: the loaded config, parameter
/// resolution (flag, then the subcommand's config section, then the
/// top-level config, then the default), output paths, and the manifest.
class RunContext {
 public:
  /// Empty `config_flag` means no config file.
  RunContext(std::string subcommand, const std::string& config_flag);

  /// Flag value when `opt` was given on the command line, else the config
  /// value for `key`, else `fallback`. Records the result as a parameter.
  template <typename T>
  T param(const std::string& key, const CLI::Option* opt, const T& flag, const T& fallback) {
    T value = fallback;
    if (opt != nullptr && opt->count() > 0) {
      value = flag;
    } else if (const nlohmann::json* j = lookup(key)) {
      value = convert<T>(*j, key);
    }
    params_[key] = value;
    return value;
  }

  /// Like param() without a default; absent values are not recorded.
  template <typename T>
  std::optional<T> optional_param(const std::string& key, const CLI::Option* opt, const T& flag) {
    std::optional<T> value;
    if (opt != nullptr && opt->count() > 0) {
      value = flag;
    } else if (const nlohmann::json* j = lookup(key)) {
      value = convert<T>(*j, key);
    }
    if (value) {
      params_[key] = *value;
    }
    return value;
  }

  /// Records a resolved value that has no single flag.
  void record(const std::string& key, nlohmann::ordered_json value) { params_[key] = std::move(value); }

  /// Config-only structured parameter (no flag), recorded verbatim.
  const nlohmann::json* config_value(const std::string& key);

  /// Input file from the flag (relative to the working directory) or the
  /// config (relative to the config file). Missing and required ->
  /// ConfigError; named but absent on disk -> InputError.
  std::filesystem::path input(const std::string& key, const CLI::Option* opt,
                              const std::string& flag, bool required = true);
  std::optional<std::filesystem::path> optional_input(const std::string& key,
                                                      const CLI::Option* opt,
                                                      const std::string& flag);

  /// Output directory: flag, config `output_dir`, or "out". Created on demand.
  void set_output_dir(const CLI::Option* opt, const std::string& flag);
  /// Path of an output file inside the output directory; recorded.
  std::filesystem::path output(const std::string& name);

  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set_threads(int threads) { threads_ = threads; }
  /// Thread count from the flag or the top-level `threads` key, default 1.
  /// Kept out of the parameter set: it never changes results.
  int param_threads(const CLI::Option* opt, int flag) const;
  int threads() const noexcept { return threads_; }

  /// Runs fn and records its wall time in milliseconds under `stage`.
  template <typename Fn>
  decltype(auto) timed(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      RunContext* self;
      std::string stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        const auto end = std::chrono::steady_clock::now();
        self->timings_[stage] =
            std::chrono::duration<double, std::milli>(end - start).count();
      }
    } record{this, stage, start};
    return fn();
  }

  /// Hash of the subcommand and every resolved parameter.
  std::string config_hash() const;
  /// Writes `<subcommand>.manifest.json` into the output directory.
  void write_manifest();

 private:
  const nlohmann::json* lookup(const std::string& key) const;

  template <typename T>
  static T convert(const nlohmann::json& j, const std::string& key) {
    try {
      return j.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + key + "' has the wrong type");
    }
  }

  std::string subcommand_;
  std::optional<std::filesystem::path> config_path_;
  std::filesystem::path config_dir_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::ordered_json params_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json timings_ = nlohmann::ordered_json::object();
  std::vector<std::string> outputs_;
  std::filesystem::path out_dir_ = "out";
  std::optional<std::uint64_t> seed_;
  int threads_ = 1;
};

}  // namespace uavpheno::cli
