#pragma once

// Grayscale erosion/dilation/opening with a square structuring element.
//
// Both passes use the van Herk / Gil-Werman block decomposition: the input is
// split into blocks of length k = 2*half+1, each block gets a forward prefix
// and a backward suffix extremum, and every output is the combination of one
// suffix and one prefix value. Cost is three comparisons per pixel per pass,
// independent of k. Windows are clipped at raster borders and nodata pixels
// never contribute; a window with no valid pixel yields nodata.

#include <algorithm>
#include <limits>
#include <vector>

#include "lod2vec/raster.hpp"

namespace lod2vec {

namespace detail {

struct MinOp {
  static constexpr float identity = std::numeric_limits<float>::infinity();
  static float apply(float a, float b) { return std::min(a, b); }
};

struct MaxOp {
  static constexpr float identity = -std::numeric_limits<float>::infinity();
  static float apply(float a, float b) { return std::max(a, b); }
};

// Sliding extremum along each row. `data` holds identity in place of nodata.
template <class Op>
void sliding_rows(std::vector<float>& data, int width, int height, int half) {
  if (half == 0 || width == 0) return;
  const int k = 2 * half + 1;
  const int padded = width + 2 * half;
  std::vector<float> line(padded), pre(padded), suf(padded);
  for (int y = 0; y < height; ++y) {
    float* row = data.data() + static_cast<std::size_t>(y) * width;
    std::fill(line.begin(), line.end(), Op::identity);
    std::copy(row, row + width, line.begin() + half);
    for (int j = 0; j < padded; ++j)
      pre[j] = (j % k == 0) ? line[j] : Op::apply(pre[j - 1], line[j]);
    for (int j = padded - 1; j >= 0; --j)
      suf[j] = (j % k == k - 1 || j == padded - 1) ? line[j] : Op::apply(suf[j + 1], line[j]);
    for (int i = 0; i < width; ++i) row[i] = Op::apply(suf[i], pre[i + 2 * half]);
  }
}

// Sliding extremum along each column, processed a full row at a time so
// the inner loops run over contiguous memory.
template <class Op>
void sliding_cols(std::vector<float>& data, int width, int height, int half) {
  if (half == 0 || height == 0) return;
  const int k = 2 * half + 1;
  const int padded = height + 2 * half;
  const std::size_t w = static_cast<std::size_t>(width);
  std::vector<float> pre(static_cast<std::size_t>(padded) * w);
  std::vector<float> suf(static_cast<std::size_t>(padded) * w);
  auto src = [&](int j) -> const float* {
    const int y = j - half;
    return (y < 0 || y >= height) ? nullptr : data.data() + static_cast<std::size_t>(y) * w;
  };
  for (int j = 0; j < padded; ++j) {
    float* out = pre.data() + static_cast<std::size_t>(j) * w;
    const float* in = src(j);
    if (j % k == 0) {
      if (in) std::copy(in, in + w, out);
      else std::fill(out, out + w, Op::identity);
    } else {
      const float* prev = out - w;
      if (in) for (std::size_t x = 0; x < w; ++x) out[x] = Op::apply(prev[x], in[x]);
      else std::copy(prev, prev + w, out);
    }
  }
  for (int j = padded - 1; j >= 0; --j) {
    float* out = suf.data() + static_cast<std::size_t>(j) * w;
    const float* in = src(j);
    if (j % k == k - 1 || j == padded - 1) {
      if (in) std::copy(in, in + w, out);
      else std::fill(out, out + w, Op::identity);
    } else {
      const float* next = out + w;
      if (in) for (std::size_t x = 0; x < w; ++x) out[x] = Op::apply(next[x], in[x]);
      else std::copy(next, next + w, out);
    }
  }
  for (int y = 0; y < height; ++y) {
    const float* s = suf.data() + static_cast<std::size_t>(y) * w;
    const float* p = pre.data() + static_cast<std::size_t>(y + 2 * half) * w;
    float* out = data.data() + static_cast<std::size_t>(y) * w;
    for (std::size_t x = 0; x < w; ++x) out[x] = Op::apply(s[x], p[x]);
  }
}

template <class Op>
Raster square_filter(const Raster& in, int half) {
  if (half < 0) throw Error("morphology: negative structuring element half size");
  std::vector<float> buf(in.values().begin(), in.values().end());
  for (auto& v : buf)
    if (in.is_nodata(v)) v = Op::identity;
  sliding_rows<Op>(buf, in.width(), in.height(), half);
  sliding_cols<Op>(buf, in.width(), in.height(), half);
  for (auto& v : buf)
    if (v == Op::identity) v = in.nodata();
  return Raster(in.width(), in.height(), std::move(buf), in.pixel_size(), in.nodata());
}

}  // namespace detail

/// Grayscale erosion (windowed minimum) with a (2*half+1)^2 square.
inline Raster erode(const Raster& in, int half) { return detail::square_filter<detail::MinOp>(in, half); }

/// Grayscale dilation (windowed maximum) with a (2*half+1)^2 square.
inline Raster dilate(const Raster& in, int half) { return detail::square_filter<detail::MaxOp>(in, half); }

/// Opening = dilation of the erosion. Anti-extensive: result <= input.
inline Raster opening(const Raster& in, int half) { return dilate(erode(in, half), half); }

}  // namespace lod2vec
