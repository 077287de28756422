#pragma once

// Seeded generators and scratch-directory helpers shared by the tests.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "lod2vec/raster.hpp"

namespace testing_support {

/// Small seeded generator; every property test names its seed so failures
/// are reproducible.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(engine_); }
  double gaussian(double sigma = 1.0) { return std::normal_distribution<double>(0.0, sigma)(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Random raster; `levels` > 0 quantizes values to that many steps (forces ties),
/// `nodata_p` is the share of nodata pixels.
inline lod2vec::Raster random_raster(Gen& g, int w, int h, float lo = 0.0f, float hi = 1.0f, int levels = 0,
                                     double nodata_p = 0.0) {
  std::vector<float> v(static_cast<std::size_t>(w) * h);
  for (auto& x : v) {
    if (nodata_p > 0 && g.coin(nodata_p)) {
      x = lod2vec::kDefaultNodata;
      continue;
    }
    if (levels > 0) x = lo + (hi - lo) * static_cast<float>(g.integer(0, levels)) / static_cast<float>(levels);
    else x = static_cast<float>(g.real(lo, hi));
  }
  return lod2vec::Raster(w, h, std::move(v));
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lod2vec_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support

