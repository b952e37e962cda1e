#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "maebound/data.hpp"
#include "maebound/error.hpp"

using namespace maebound;

namespace {

std::string be32(std::uint32_t v) {
  std::string out;
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xFFu));
  return out;
}

std::string two_image_fixture() {
  std::string bytes = be32(0x00000803) + be32(2) + be32(2) + be32(2);
  for (int v : {0, 255, 128, 64, 1, 2, 3, 4}) bytes.push_back(static_cast<char>(v));
  return bytes;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Parameter;
}

}  // namespace

TEST(Idx, HandFixture) {
  const ImageSet set = parse_idx(two_image_fixture());
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.rows, 2u);
  EXPECT_EQ(set.pixel_count(), 4u);
  EXPECT_EQ(set.images[0][0], 0.0);
  EXPECT_EQ(set.images[0][1], 1.0);
  EXPECT_NEAR(set.images[0][2], 0.50196, 1e-5);
  EXPECT_NEAR(set.images[0][3], 0.25098, 1e-5);
  EXPECT_EQ(set.images[1][3], 4.0 / 255.0);
}

TEST(Idx, ZeroItems) {
  EXPECT_EQ(parse_idx(be32(0x803) + be32(0) + be32(28) + be32(28)).size(), 0u);
}

TEST(Idx, FormatErrors) {
  std::string label_file = be32(0x00000801) + be32(1) + be32(1) + be32(1) + std::string(1, '\0');
  EXPECT_EQ(kind_of([&] { (void)parse_idx(label_file); }), ErrorKind::Format);
  std::string truncated = two_image_fixture();
  truncated.pop_back();
  EXPECT_EQ(kind_of([&] { (void)parse_idx(truncated); }), ErrorKind::Format);
  EXPECT_EQ(kind_of([&] { (void)parse_idx("\x00\x00"); }), ErrorKind::Format);
  const std::string overflow = be32(0x803) + be32(1) + be32(0x10000) + be32(0x10001);
  EXPECT_EQ(kind_of([&] { (void)parse_idx(overflow); }), ErrorKind::Format);
  EXPECT_EQ(kind_of([&] { (void)parse_idx(std::string("\x1f\x8b\x08\x00garbage", 11)); }), ErrorKind::Format);
}

TEST(Idx, QuantizedRoundTrip) {
  Rng rng(3);
  ImageSet set;
  set.rows = 3;
  set.cols = 5;
  for (int n = 0; n < 4; ++n) {
    DenseVector img(15);
    for (double& v : img.data) v = rng.uniform() * 1.2 - 0.1;
    set.images.push_back(img);
  }
  const ImageSet once = parse_idx(encode_idx(set));
  const ImageSet twice = parse_idx(encode_idx(once));
  ASSERT_EQ(once.size(), 4u);
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_EQ(once.images[n], twice.images[n]);
    for (std::size_t p = 0; p < 15; ++p)
      EXPECT_EQ(once.images[n][p], std::clamp(std::round(set.images[n][p] * 255.0), 0.0, 255.0) / 255.0);
  }
}

TEST(Idx, BundledGzipFixtureLoads) {
  const ImageSet set = load_idx(std::string(MAEBOUND_TEST_DATA) + "/mnist-subset-2500-images-idx3-ubyte.gz");
  EXPECT_EQ(set.size(), 2500u);
  EXPECT_EQ(set.rows, 28u);
  EXPECT_EQ(set.cols, 28u);
}

TEST(Idx, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { (void)load_idx("/nonexistent/images.idx"); }), ErrorKind::Io);
}

TEST(Agrn, NoNoiseSmallImageUntouched) {
  ImageSet set;
  set.rows = 1;
  set.cols = 2;
  set.images = {DenseVector{0.6, 0.0}};
  const Dataset ds = corrupt_agrn(set, 0.0, Rng(1));
  EXPECT_EQ(ds.pairs[0].x, set.images[0]);
  EXPECT_EQ(ds.pairs[0].y, set.images[0]);
  EXPECT_EQ(ds.pairs[0].scale, 1.0);
}

TEST(Agrn, UnitBallAndDeterminism) {
  Rng rng(9);
  ImageSet set;
  set.rows = 28;
  set.cols = 28;
  for (int n = 0; n < 200; ++n) {
    DenseVector img(784);
    for (double& v : img.data) v = rng.uniform();
    set.images.push_back(img);
  }
  const Dataset a = corrupt_agrn(set, 1.0, Rng(4));
  const Dataset b = corrupt_agrn(set, 1.0, Rng(4));
  EXPECT_EQ(a, b);
  double s = 0.0;
  for (const auto& p : a.pairs) {
    const double norm = vector_norm(p.x, NormOrder::L2);
    ASSERT_LE(norm, 1.0);
    s = std::max(s, norm);
    EXPECT_LT(p.scale, 1.0);
  }
  EXPECT_NEAR(s, 1.0, 1e-9);
  EXPECT_THROW((void)corrupt_agrn(set, -1.0, Rng(4)), Error);
}

TEST(Agrn, TargetsScaledWithInputs) {
  ImageSet set;
  set.rows = 1;
  set.cols = 3;
  set.images = {DenseVector{1.0, 1.0, 1.0}};
  const Dataset ds = corrupt_agrn(set, 0.0, Rng(1));
  EXPECT_NEAR(ds.pairs[0].scale, 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_EQ(ds.pairs[0].y[0], ds.pairs[0].scale);
}

TEST(Synthetic, NoiselessTargetsAreTeacherOutputs) {
  const SyntheticData data = synth_smooth_dataset(5, 3, 40, 1, 2, 0.0);
  ASSERT_EQ(data.dataset.size(), 40u);
  for (const auto& p : data.dataset.pairs) {
    EXPECT_EQ(p.y, forward(data.teacher, p.x));
    EXPECT_LE(vector_norm(p.x, NormOrder::L2), 1.0);
  }
  EXPECT_EQ(data.teacher.spec().hidden_widths.front(), 32u);
}

TEST(Synthetic, EmptyAndDeterministic) {
  const SyntheticData empty = synth_smooth_dataset(4, 2, 0, 1, 2, 0.1);
  EXPECT_TRUE(empty.dataset.empty());
  EXPECT_EQ(empty.teacher.spec().input_dim, 4u);
  EXPECT_EQ(synth_smooth_dataset(4, 2, 30, 1, 2, 0.1).dataset, synth_smooth_dataset(4, 2, 30, 1, 2, 0.1).dataset);
  EXPECT_NE(synth_smooth_dataset(4, 2, 30, 1, 2, 0.1).dataset, synth_smooth_dataset(4, 2, 30, 1, 3, 0.1).dataset);
}

TEST(Split, CountsDisjointAndSeeded) {
  Dataset ds;
  ds.input_dim = 1;
  ds.output_dim = 1;
  for (int i = 0; i < 10; ++i) ds.pairs.push_back({DenseVector{double(i)}, DenseVector{0.0}, 1.0});
  auto [train, test] = split(ds, 0.2, Rng(3));
  EXPECT_EQ(test.size(), 2u);
  EXPECT_EQ(train.size(), 8u);
  std::vector<double> seen;
  for (const auto& p : train.pairs) seen.push_back(p.x[0]);
  for (const auto& p : test.pairs) seen.push_back(p.x[0]);
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(seen[i], double(i));
  auto [train2, test2] = split(ds, 0.2, Rng(3));
  EXPECT_EQ(train, train2);
  EXPECT_EQ(test, test2);
  EXPECT_THROW((void)split(Dataset{}, 0.2, Rng(3)), Error);
  EXPECT_THROW((void)split(ds, 1.0, Rng(3)), Error);
}

TEST(Slice, RangeChecked) {
  Dataset ds;
  ds.input_dim = 1;
  ds.output_dim = 1;
  for (int i = 0; i < 5; ++i) ds.pairs.push_back({DenseVector{double(i)}, DenseVector{0.0}, 1.0});
  EXPECT_EQ(slice(ds, 1, 3).pairs.front().x[0], 1.0);
  EXPECT_THROW((void)slice(ds, 3, 3), Error);
}
