#include "context.hpp"

#include <cstdio>

#include "uavpheno/csv.hpp"

namespace uavpheno::cli {

namespace fs = std::filesystem;

RunContext::RunContext(std::string subcommand, const std::string& config_flag)
    : subcommand_(std::move(subcommand)) {
  const std::string& path = config_flag;
  if (path.empty()) {
    return;
  }
  if (!fs::exists(path)) {
    throw ConfigError("config file '" + path + "' does not exist");
  }
  try {
    config_ = nlohmann::json::parse(csv::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!config_.is_object()) {
    throw ConfigError("config file must hold a JSON object");
  }
  config_path_ = path;
  config_dir_ = fs::path(path).parent_path();
}

const nlohmann::json* RunContext::lookup(const std::string& key) const {
  if (auto it = config_.find(subcommand_); it != config_.end() && it->is_object()) {
    if (auto k = it->find(key); k != it->end()) {
      return &*k;
    }
  }
  if (auto k = config_.find(key); k != config_.end() && !k->is_object()) {
    return &*k;
  }
  return nullptr;
}

const nlohmann::json* RunContext::config_value(const std::string& key) {
  const nlohmann::json* j = lookup(key);
  if (j != nullptr) {
    params_[key] = *j;
  }
  return j;
}

std::optional<fs::path> RunContext::optional_input(const std::string& key, const CLI::Option* opt,
                                                   const std::string& flag) {
  fs::path path;
  if (opt != nullptr && opt->count() > 0) {
    path = flag;
  } else if (const nlohmann::json* j = lookup(key)) {
    if (!j->is_string()) {
      throw ConfigError("config key '" + key + "' must be a path string");
    }
    path = config_dir_ / j->get<std::string>();
  } else {
    return std::nullopt;
  }
  if (!fs::exists(path)) {
    throw InputError(key + " file '" + path.string() + "' does not exist");
  }
  inputs_[key] = path.generic_string();
  return path;
}

fs::path RunContext::input(const std::string& key, const CLI::Option* opt,
                           const std::string& flag, bool required) {
  auto path = optional_input(key, opt, flag);
  if (!path) {
    if (required) {
      throw ConfigError("missing required input '" + key + "' (flag or config)");
    }
    return {};
  }
  return *path;
}

void RunContext::set_output_dir(const CLI::Option* opt, const std::string& flag) {
  if (opt != nullptr && opt->count() > 0) {
    out_dir_ = flag;
  } else if (const nlohmann::json* j = lookup("output_dir")) {
    if (!j->is_string()) {
      throw ConfigError("output_dir must be a string");
    }
    out_dir_ = config_dir_ / j->get<std::string>();
  }
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) {
    throw InputError("cannot create output directory '" + out_dir_.string() + "': " +
                     ec.message());
  }
}

fs::path RunContext::output(const std::string& name) {
  outputs_.push_back(name);
  return out_dir_ / name;
}

int RunContext::param_threads(const CLI::Option* opt, int flag) const {
  int threads = 1;
  if (opt != nullptr && opt->count() > 0) {
    threads = flag;
  } else if (auto k = config_.find("threads"); k != config_.end()) {
    threads = convert<int>(*k, "threads");
  }
  if (threads < 1) {
    throw ConfigError("threads must be >= 1");
  }
  return threads;
}

std::string RunContext::config_hash() const {
  nlohmann::ordered_json canon;
  canon["subcommand"] = subcommand_;
  canon["params"] = params_;
  const std::string text = canon.dump();
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunContext::write_manifest() {
  nlohmann::ordered_json m;
  m["tool"] = "uavpheno";
  m["version"] = UAVPHENO_VERSION;
  m["subcommand"] = subcommand_;
  m["config_file"] = config_path_ ? nlohmann::ordered_json(config_path_->generic_string())
                                  : nlohmann::ordered_json(nullptr);
  m["inputs"] = inputs_;
  m["params"] = params_;
  m["config_hash"] = config_hash();
  m["seed"] = seed_ ? nlohmann::ordered_json(*seed_) : nlohmann::ordered_json(nullptr);
  m["threads"] = threads_;
  m["timings_ms"] = timings_;
  m["outputs"] = outputs_;
  csv::write_text(out_dir_ / (subcommand_ + ".manifest.json"), m.dump(2) + "\n");
}

}  // namespace uavpheno::cli
