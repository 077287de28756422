#pragma once

// Single-band float raster and windowed access.
//
// Pixel (row, col) maps to world coordinates (x = col * pixel_size,
// y = -row * pixel_size); row 0 is the northern (top) edge.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lod2vec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr float kDefaultNodata = -9999.0f;
inline constexpr double kDefaultPixelSize = 0.5;

struct Pixel {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

class Raster {
 public:
  Raster() = default;

  Raster(int width, int height, double pixel_size = kDefaultPixelSize,
         float nodata = kDefaultNodata, float fill = 0.0f)
      : width_(width), height_(height), pixel_size_(pixel_size), nodata_(nodata) {
    check_dims();
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    check_values();
  }

  Raster(int width, int height, std::vector<float> values,
         double pixel_size = kDefaultPixelSize, float nodata = kDefaultNodata)
      : width_(width), height_(height), pixel_size_(pixel_size), nodata_(nodata),
        values_(std::move(values)) {
    check_dims();
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw Error("raster: value count " + std::to_string(values_.size()) +
                  " does not match " + std::to_string(width) + "x" + std::to_string(height));
    check_values();
  }

  // Same geometry as `other`, every pixel set to `fill`.
  static Raster like(const Raster& other, float fill = 0.0f) {
    return Raster(other.width_, other.height_, other.pixel_size_, other.nodata_, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double pixel_size() const { return pixel_size_; }
  float nodata() const { return nodata_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  float operator()(int row, int col) const { return values_[index(row, col)]; }
  float& operator()(int row, int col) { return values_[index(row, col)]; }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  std::span<const float> row(int r) const {
    return {values_.data() + static_cast<std::size_t>(r) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<float> row(int r) {
    return {values_.data() + static_cast<std::size_t>(r) * width_, static_cast<std::size_t>(width_)};
  }

  bool contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  bool contains(Pixel p) const { return contains(p.row, p.col); }

  bool is_nodata(float v) const { return v == nodata_; }
  bool valid(int row, int col) const { return !is_nodata((*this)(row, col)); }

  bool same_shape(const Raster& o) const { return width_ == o.width_ && height_ == o.height_; }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  // Throws if any non-nodata value is NaN or infinite.
  void check_values() const {
    for (float v : values_)
      if (!is_nodata(v) && !std::isfinite(v)) throw Error("raster: non-finite value");
  }

 private:
  void check_dims() const {
    if (width_ < 0 || height_ < 0) throw Error("raster: negative dimensions");
    if (!(pixel_size_ > 0.0) || !std::isfinite(pixel_size_))
      throw Error("raster: pixel_size must be positive");
  }

  int width_ = 0;
  int height_ = 0;
  double pixel_size_ = kDefaultPixelSize;
  float nodata_ = kDefaultNodata;
  std::vector<float> values_;
};

/// Square window of side 2*half+1 centred on a pixel, clipped at raster borders.
struct Window {
  Pixel center;
  int half = 2;

  int side() const { return 2 * half + 1; }
};

enum class Extremum { Max, Min };

/// Max or min over the non-nodata pixels of the clipped window. Returns the
/// raster's nodata value when the window holds no valid pixel.
inline float window_extremum(const Raster& r, const Window& w, Extremum mode) {
  if (!r.contains(w.center)) throw Error("window_extremum: center outside raster");
  if (w.half < 0) throw Error("window_extremum: negative half size");
  const int r0 = std::max(0, w.center.row - w.half);
  const int r1 = std::min(r.height() - 1, w.center.row + w.half);
  const int c0 = std::max(0, w.center.col - w.half);
  const int c1 = std::min(r.width() - 1, w.center.col + w.half);
  bool found = false;
  float best = 0.0f;
  for (int y = r0; y <= r1; ++y) {
    for (float v : r.row(y).subspan(c0, c1 - c0 + 1)) {
      if (r.is_nodata(v)) continue;
      if (!found || (mode == Extremum::Max ? v > best : v < best)) best = v;
      found = true;
    }
  }
  return found ? best : r.nodata();
}

}  // namespace lod2vec
