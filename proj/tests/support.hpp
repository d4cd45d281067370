#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "uavpheno/segmentation.hpp"

namespace uavpheno::test {

inline std::filesystem::path data_dir() { return UAVPHENO_TEST_DATA_DIR; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("uavpheno_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Axis-aligned filled block [i0, i0+h) x [j0, j0+w).
inline void fill_block(LeafMask& mask, int i0, int j0, int h, int w) {
  for (int i = i0; i < i0 + h; ++i) {
    for (int j = j0; j < j0 + w; ++j) {
      if (mask.contains(i, j)) {
        mask.set(i, j, true);
      }
    }
  }
}

}  // namespace uavpheno::test
