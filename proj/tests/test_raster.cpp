#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "lod2vec/raster.hpp"
#include "lod2vec/raster_io.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lod2vec;
using testing_support::Gen;
using testing_support::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Raster, RejectsBadConstruction) {
  EXPECT_THROW(Raster(2, 2, std::vector<float>{1, 2, 3}), Error);
  EXPECT_THROW(Raster(2, 2, 0.0), Error);
  EXPECT_THROW(Raster(1, 1, std::vector<float>{std::numeric_limits<float>::quiet_NaN()}), Error);
  EXPECT_NO_THROW(Raster(0, 0));
}

TEST(Raster, RowMajorIndexing) {
  const Raster r(3, 2, std::vector<float>{0, 1, 2, 3, 4, 5});
  EXPECT_EQ(r(1, 0), 3.0f);
  EXPECT_EQ(r(0, 2), 2.0f);
  EXPECT_EQ(r.row(1)[2], 5.0f);
}

TEST(WindowExtremum, ConstantRaster) {
  const Raster r(7, 5, kDefaultPixelSize, kDefaultNodata, 4.25f);
  for (int half : {0, 1, 2, 5})
    for (auto mode : {Extremum::Max, Extremum::Min}) EXPECT_EQ(window_extremum(r, {{2, 3}, half}, mode), 4.25f);
}

TEST(WindowExtremum, ThreeByThreeAroundCentre) {
  const Raster r(3, 3, std::vector<float>{0, 1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(window_extremum(r, {{1, 1}, 1}, Extremum::Max), 8.0f);
  EXPECT_EQ(window_extremum(r, {{1, 1}, 1}, Extremum::Min), 0.0f);
}

TEST(WindowExtremum, ClippedAtCorner) {
  std::vector<float> v(25);
  for (int i = 0; i < 25; ++i) v[i] = static_cast<float>(i);
  const Raster r(5, 5, v);
  // Only rows/cols 0..2 survive around (0,0) with half 2.
  EXPECT_EQ(window_extremum(r, {{0, 0}, 2}, Extremum::Max), 12.0f);
  EXPECT_EQ(window_extremum(r, {{4, 4}, 2}, Extremum::Min), 12.0f);
}

TEST(WindowExtremum, NodataOnlyWindowYieldsNodata) {
  Raster r(5, 5, kDefaultPixelSize, kDefaultNodata, kDefaultNodata);
  r(4, 4) = 1.0f;
  EXPECT_EQ(window_extremum(r, {{0, 0}, 1}, Extremum::Max), kDefaultNodata);
  EXPECT_EQ(window_extremum(r, {{3, 3}, 1}, Extremum::Max), 1.0f);
}

TEST(WindowExtremum, CentreOutsideThrows) {
  const Raster r(3, 3);
  EXPECT_THROW(window_extremum(r, {{3, 0}, 1}, Extremum::Max), Error);
}

TEST(WindowExtremumProperty, MatchesDoubleLoopOracle) {
  const auto run = testing_support::run_window_oracle(0x5eed0001, 1500);
  EXPECT_EQ(run.cases, 1500);
  EXPECT_TRUE(run.ok()) << run.failure;
}

TEST(RasterIo, F32RoundTripTwoByTwo) {
  TempDir dir("io");
  const Raster r(2, 2, std::vector<float>{1, 2, 3, 4});
  save_raster(r, dir / "a.f32");
  const Raster back = load_raster(dir / "a.f32", RasterFormat::F32Bin);
  EXPECT_EQ(back.width(), 2);
  EXPECT_EQ(back.height(), 2);
  EXPECT_EQ(std::vector<float>(back.values().begin(), back.values().end()), (std::vector<float>{1, 2, 3, 4}));
}

TEST(RasterIo, F32RoundTripIsBitExact) {
  TempDir dir("io");
  Gen g(42);
  const Raster r = testing_support::random_raster(g, 17, 9, -1e4f, 1e4f, 0, 0.1);
  save_raster(r, dir / "r.f32");
  const Raster back = load_raster(dir / "r.f32");
  ASSERT_EQ(back.size(), r.size());
  EXPECT_EQ(std::memcmp(back.values().data(), r.values().data(), r.size() * sizeof(float)), 0);
  EXPECT_EQ(back.pixel_size(), r.pixel_size());
  EXPECT_EQ(back.nodata(), r.nodata());
}

TEST(RasterIo, SinglePixelPayloadIsFourBytes) {
  TempDir dir("io");
  save_raster(Raster(1, 1, std::vector<float>{7.5f}), dir / "one.f32");
  EXPECT_EQ(std::filesystem::file_size(dir / "one.f32"), 4u);
  EXPECT_TRUE(std::filesystem::exists(dir / "one.json"));
  const std::string payload = slurp(dir / "one.f32");
  float v;
  std::memcpy(&v, payload.data(), 4);
  EXPECT_EQ(v, 7.5f);
}

TEST(RasterIo, PayloadSizeMismatchIsReported) {
  TempDir dir("io");
  save_raster(Raster(4, 3), dir / "x.f32");  // 12 floats
  std::ofstream(dir / "x.json") << R"({"width":4,"height":4,"pixel_size":0.5,"nodata":-9999})";
  try {
    load_raster(dir / "x.f32");
    FAIL() << "expected a size mismatch";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("size mismatch"), std::string::npos);
  }
}

TEST(RasterIo, AsciiGridHasOneLinePerRowAndNodataToken) {
  TempDir dir("io");
  const Raster r(2, 2, std::vector<float>{1.5f, kDefaultNodata, 3.0f, 4.0f});
  save_raster(r, dir / "g.asc");
  std::istringstream text(slurp(dir / "g.asc"));
  std::vector<std::string> data_rows;
  std::string line, nodata_token;
  while (std::getline(text, line)) {
    if (line.rfind("NODATA_VALUE", 0) == 0) nodata_token = line.substr(13);
    if (!line.empty() && (std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-'))
      data_rows.push_back(line);
  }
  ASSERT_EQ(data_rows.size(), 2u);
  EXPECT_EQ(data_rows[0], "1.5 " + nodata_token);
  EXPECT_EQ(data_rows[1], "3 4");
  const Raster back = load_raster(dir / "g.asc");
  EXPECT_EQ(std::vector<float>(back.values().begin(), back.values().end()),
            std::vector<float>(r.values().begin(), r.values().end()));
  EXPECT_TRUE(back.is_nodata(back(0, 1)));
}

TEST(RasterIo, AsciiRoundTripPreservesFloats) {
  TempDir dir("io");
  Gen g(7);
  const Raster r = testing_support::random_raster(g, 6, 5, -100.0f, 100.0f);
  save_raster(r, dir / "g.asc");
  const Raster back = load_raster(dir / "g.asc");
  EXPECT_EQ(std::memcmp(back.values().data(), r.values().data(), r.size() * sizeof(float)), 0);
}

TEST(RasterIo, MissingFileAndUnknownExtension) {
  TempDir dir("io");
  EXPECT_THROW(load_raster(dir / "none.f32"), Error);
  EXPECT_THROW(load_raster(dir / "none.tif"), Error);
}
