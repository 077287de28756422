#pragma once

// Raster file formats.
//
// F32BIN: `<base>.f32` holds width*height little-endian float32 values in
// row-major order with no padding; `<base>.json` is the sidecar header
//   {"width":W,"height":H,"pixel_size":P,"nodata":N,"dtype":"f32le","order":"row-major"}
// ASCIIGRID: ESRI ASCII grid.

#include <bit>
#include <cctype>
#include <cstdlib>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lod2vec/raster.hpp"

namespace lod2vec {

enum class RasterFormat { F32Bin, AsciiGrid };

namespace detail {

inline std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  return v;
}

inline std::filesystem::path with_ext(std::filesystem::path p, const char* ext) {
  return p.replace_extension(ext);
}

inline std::string format_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

}  // namespace detail

/// Picks the format from the file extension (.asc -> ASCIIGRID, .f32/.json -> F32BIN).
inline RasterFormat format_from_path(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".asc") return RasterFormat::AsciiGrid;
  if (ext == ".f32" || ext == ".json") return RasterFormat::F32Bin;
  throw Error("unknown raster extension '" + ext + "' (expected .f32, .json or .asc)");
}

inline Raster load_f32bin(const std::filesystem::path& path) {
  const auto header_path = detail::with_ext(path, ".json");
  const auto payload_path = detail::with_ext(path, ".f32");
  std::ifstream hin(header_path);
  if (!hin) throw Error("cannot read raster header " + header_path.string());
  nlohmann::json h;
  try {
    hin >> h;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed raster header " + header_path.string() + ": " + e.what());
  }
  int width = 0, height = 0;
  double pixel_size = kDefaultPixelSize;
  float nodata = kDefaultNodata;
  try {
    width = h.at("width").get<int>();
    height = h.at("height").get<int>();
    pixel_size = h.value("pixel_size", kDefaultPixelSize);
    nodata = h.value("nodata", kDefaultNodata);
    if (h.value("dtype", std::string("f32le")) != "f32le")
      throw Error("unsupported dtype in " + header_path.string());
    if (h.value("order", std::string("row-major")) != "row-major")
      throw Error("unsupported order in " + header_path.string());
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed raster header " + header_path.string() + ": " + e.what());
  }
  if (width < 0 || height < 0) throw Error("malformed raster header: negative dimensions");

  std::ifstream in(payload_path, std::ios::binary);
  if (!in) throw Error("cannot read raster payload " + payload_path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() != n * 4)
    throw Error("raster size mismatch: header declares " + std::to_string(width) + "x" +
                std::to_string(height) + " (" + std::to_string(n) + " floats) but payload holds " +
                std::to_string(bytes.size() / 4) + " floats" +
                (bytes.size() % 4 ? " plus a partial value" : ""));
  std::vector<float> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t u;
    std::memcpy(&u, bytes.data() + 4 * i, 4);
    values[i] = std::bit_cast<float>(detail::to_le(u));
  }
  return Raster(width, height, std::move(values), pixel_size, nodata);
}

inline void save_f32bin(const Raster& r, const std::filesystem::path& path) {
  const auto header_path = detail::with_ext(path, ".json");
  const auto payload_path = detail::with_ext(path, ".f32");
  nlohmann::ordered_json h;
  h["width"] = r.width();
  h["height"] = r.height();
  h["pixel_size"] = r.pixel_size();
  h["nodata"] = r.nodata();
  h["dtype"] = "f32le";
  h["order"] = "row-major";
  std::ofstream hout(header_path);
  if (!hout) throw Error("cannot write " + header_path.string());
  hout << h.dump() << '\n';

  std::string bytes(r.size() * 4, '\0');
  const auto values = r.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint32_t u = detail::to_le(std::bit_cast<std::uint32_t>(values[i]));
    std::memcpy(bytes.data() + 4 * i, &u, 4);
  }
  std::ofstream out(payload_path, std::ios::binary);
  if (!out) throw Error("cannot write " + payload_path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + payload_path.string());
}

inline Raster load_ascii_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  long ncols = -1, nrows = -1;
  double cellsize = kDefaultPixelSize;
  double nodata = kDefaultNodata;
  // Header keys appear in any order until the first numeric token.
  std::string key;
  std::streampos data_start = in.tellg();
  while (in >> key) {
    if (!key.empty() && (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' ||
                         key[0] == '+' || key[0] == '.'))
      break;
    for (auto& ch : key) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    double v;
    if (!(in >> v)) throw Error("malformed ASCII grid header in " + path.string());
    if (key == "NCOLS") ncols = static_cast<long>(v);
    else if (key == "NROWS") nrows = static_cast<long>(v);
    else if (key == "CELLSIZE") cellsize = v;
    else if (key == "NODATA_VALUE") nodata = v;
    else if (key != "XLLCORNER" && key != "YLLCORNER" && key != "XLLCENTER" && key != "YLLCENTER")
      throw Error("unknown ASCII grid header key '" + key + "' in " + path.string());
    data_start = in.tellg();
  }
  if (ncols < 0 || nrows < 0) throw Error("ASCII grid header lacks NCOLS/NROWS: " + path.string());
  in.clear();
  in.seekg(data_start);
  const std::size_t n = static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows);
  std::vector<float> values;
  values.reserve(n);
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const float v = std::strtof(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw Error("bad ASCII grid value '" + tok + "'");
    values.push_back(v);
  }
  if (values.size() != n)
    throw Error("raster size mismatch: header declares " + std::to_string(ncols) + "x" +
                std::to_string(nrows) + " but file holds " + std::to_string(values.size()) +
                " values");
  return Raster(static_cast<int>(ncols), static_cast<int>(nrows), std::move(values), cellsize,
                static_cast<float>(nodata));
}

inline void save_ascii_grid(const Raster& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const double ps = r.pixel_size();
  std::ostringstream s;
  s.precision(17);
  s << "NCOLS " << r.width() << '\n'
    << "NROWS " << r.height() << '\n'
    << "XLLCORNER " << -0.5 * ps << '\n'
    << "YLLCORNER " << -(r.height() - 0.5) * ps << '\n'
    << "CELLSIZE " << ps << '\n'
    << "NODATA_VALUE " << detail::format_float(r.nodata()) << '\n';
  for (int y = 0; y < r.height(); ++y) {
    const auto row = r.row(y);
    for (int x = 0; x < r.width(); ++x) {
      if (x) s << ' ';
      s << detail::format_float(row[x]);
    }
    s << '\n';
  }
  out << s.str();
  if (!out) throw Error("write failed for " + path.string());
}

inline Raster load_raster(const std::filesystem::path& path, RasterFormat format) {
  return format == RasterFormat::F32Bin ? load_f32bin(path) : load_ascii_grid(path);
}

inline Raster load_raster(const std::filesystem::path& path) {
  return load_raster(path, format_from_path(path));
}

inline void save_raster(const Raster& r, const std::filesystem::path& path, RasterFormat format) {
  if (format == RasterFormat::F32Bin) save_f32bin(r, path);
  else save_ascii_grid(r, path);
}

inline void save_raster(const Raster& r, const std::filesystem::path& path) {
  save_raster(r, path, format_from_path(path));
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("write failed for " + p.string());
}

/// load_raster with a "not found" message naming the input's role.
inline Raster load_input_raster(const std::filesystem::path& p, const std::string& what) {
  if (!std::filesystem::exists(p)) throw Error(what + " not found: " + p.string());
  return load_raster(p);
}

}  // namespace lod2vec
