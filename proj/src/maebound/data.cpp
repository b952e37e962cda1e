#include "maebound/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maebound/error.hpp"
#include "maebound/serialize.hpp"

namespace maebound {

namespace {

std::uint32_t read_be32(std::string_view bytes, std::size_t offset) {
  require(bytes.size() >= offset + 4, ErrorKind::Format,
          "IDX header truncated at offset " + std::to_string(offset));
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

bool is_gzip(std::string_view bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1F &&
         static_cast<unsigned char>(bytes[1]) == 0x8B;
}

std::string gunzip(std::string_view bytes) {
  z_stream zs{};
  // 16 + MAX_WBITS selects the gzip wrapper
  require(inflateInit2(&zs, 16 + MAX_WBITS) == Z_OK, ErrorKind::Format, "cannot initialise gzip decoder");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::string out;
  char buffer[1 << 16];
  int status = Z_OK;
  while (status != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buffer);
    zs.avail_out = sizeof buffer;
    status = inflate(&zs, Z_NO_FLUSH);
    if (status != Z_OK && status != Z_STREAM_END) {
      const auto offset = zs.total_in;
      inflateEnd(&zs);
      fail(ErrorKind::Format, "corrupt gzip stream near compressed offset " + std::to_string(offset));
    }
    out.append(buffer, sizeof buffer - zs.avail_out);
    if (status == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      fail(ErrorKind::Format, "truncated gzip stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

}  // namespace

ImageSet parse_idx(std::string_view bytes) {
  if (is_gzip(bytes)) {
    const std::string raw = gunzip(bytes);
    return parse_idx(raw);
  }
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxImageMagic) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", magic);
    fail(ErrorKind::Format, std::string("IDX magic at offset 0 is ") + buf + ", expected 0x00000803 (u8 images)");
  }
  const std::uint64_t count = read_be32(bytes, 4);
  const std::uint64_t rows = read_be32(bytes, 8);
  const std::uint64_t cols = read_be32(bytes, 12);
  const std::uint64_t pixels = rows * cols;
  require(pixels <= (std::uint64_t{1} << 32), ErrorKind::Format, "IDX image dimensions overflow at offset 8");
  const std::uint64_t payload = bytes.size() - 16;
  require(count == 0 || (pixels > 0 && count <= payload / pixels && count * pixels == payload), ErrorKind::Format,
          "IDX payload at offset 16 holds " + std::to_string(payload) + " bytes, header declares " +
              std::to_string(count) + "x" + std::to_string(rows) + "x" + std::to_string(cols));

  ImageSet set;
  set.rows = rows;
  set.cols = cols;
  set.images.reserve(count);
  for (std::uint64_t n = 0; n < count; ++n) {
    DenseVector img(pixels);
    const std::size_t base = 16 + n * pixels;
    for (std::size_t p = 0; p < pixels; ++p) img[p] = static_cast<unsigned char>(bytes[base + p]) / 255.0;
    set.images.push_back(std::move(img));
  }
  return set;
}

ImageSet load_idx(const std::filesystem::path& path) {
  try {
    return parse_idx(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Format) fail(ErrorKind::Format, path.string() + ": " + e.what());
    throw;
  }
}

std::string encode_idx(const ImageSet& images) {
  std::string out;
  auto be32 = [&out](std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xFFu));
  };
  be32(kIdxImageMagic);
  be32(static_cast<std::uint32_t>(images.size()));
  be32(static_cast<std::uint32_t>(images.rows));
  be32(static_cast<std::uint32_t>(images.cols));
  for (const auto& img : images.images) {
    require(img.dim() == images.pixel_count(), ErrorKind::Shape, "encode_idx: image has wrong pixel count");
    for (double v : img.data) {
      const double q = std::clamp(std::round(v * 255.0), 0.0, 255.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
    }
  }
  return out;
}

Dataset corrupt_agrn(const ImageSet& clean, double variance, const Rng& rng) {
  require(variance >= 0.0 && std::isfinite(variance), ErrorKind::Parameter,
          "corrupt_agrn: variance must be finite and nonnegative");
  Dataset ds;
  ds.input_dim = clean.pixel_count();
  ds.output_dim = clean.pixel_count();
  ds.provenance = Provenance::Corrupted;
  ds.pairs.reserve(clean.size());
  const double stddev = std::sqrt(variance);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    Rng noise = rng.derive("agrn", i);
    const DenseVector& y = clean.images[i];
    DenseVector x(y.dim());
    for (std::size_t p = 0; p < y.dim(); ++p) x[p] = y[p] + stddev * noise.normal();
    double scale = 1.0 / std::max(1.0, vector_norm(x, NormOrder::L2));
    DenseVector scaled = x;
    while (scale != 1.0) {
      for (std::size_t p = 0; p < x.dim(); ++p) scaled[p] = x[p] * scale;
      if (vector_norm(scaled, NormOrder::L2) <= 1.0) break;
      // rounding left the norm a few ulps above 1
      scale = std::nextafter(scale, 0.0);
    }
    SamplePair pair{std::move(scaled), y, scale};
    if (scale != 1.0)
      for (double& v : pair.y.data) v *= scale;
    ds.pairs.push_back(std::move(pair));
  }
  return ds;
}

SyntheticData synth_smooth_dataset(std::size_t d, std::size_t q, std::size_t n, std::uint64_t teacher_seed,
                                   std::uint64_t noise_seed, double noise_variance) {
  require(d > 0 && q > 0, ErrorKind::Parameter, "synth_smooth_dataset: dims must be positive");
  require(noise_variance >= 0.0, ErrorKind::Parameter, "synth_smooth_dataset: noise variance must be nonnegative");
  NetworkSpec spec;
  spec.input_dim = d;
  spec.output_dim = q;
  spec.hidden_widths = {std::max<std::size_t>(32, d + 2)};
  spec.sharpness = 10.0;
  Rng teacher_rng = Rng(teacher_seed).derive("teacher");
  Network teacher = init_network(spec, teacher_rng);

  Dataset ds;
  ds.input_dim = d;
  ds.output_dim = q;
  ds.provenance = Provenance::Synthetic;
  ds.pairs.reserve(n);
  const Rng inputs(Rng(teacher_seed).derive("inputs").seed());
  const Rng noise(noise_seed);
  const double stddev = std::sqrt(noise_variance);
  for (std::size_t i = 0; i < n; ++i) {
    Rng in_rng = inputs.derive("point", i);
    DenseVector x(d);
    for (double& v : x.data) v = in_rng.normal();
    const double norm = vector_norm(x, NormOrder::L2);
    const double radius = std::pow(in_rng.uniform(), 1.0 / static_cast<double>(d));
    const double factor = norm > 0.0 ? radius / norm : 0.0;
    for (double& v : x.data) v *= factor;
    DenseVector y = forward(teacher, x);
    if (noise_variance > 0.0) {
      Rng n_rng = noise.derive("target-noise", i);
      for (double& v : y.data) v += stddev * n_rng.normal();
    }
    ds.pairs.push_back({std::move(x), std::move(y), 1.0});
  }
  return {std::move(ds), std::move(teacher)};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, const Rng& rng) {
  require(!ds.empty(), ErrorKind::Parameter, "split: empty dataset");
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorKind::Parameter, "split: test fraction must lie in (0, 1)");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle = rng.derive("split");
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.uniform_index(i)]);
  const auto n_test = static_cast<std::size_t>(std::ceil(static_cast<double>(ds.size()) * test_fraction));

  Dataset train{{}, ds.input_dim, ds.output_dim, ds.provenance};
  Dataset test{{}, ds.input_dim, ds.output_dim, ds.provenance};
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_test ? test : train).pairs.push_back(ds.pairs[order[i]]);
  return {std::move(train), std::move(test)};
}

Dataset slice(const Dataset& ds, std::size_t first, std::size_t count) {
  require(first + count <= ds.size(), ErrorKind::Parameter,
          "slice: range [" + std::to_string(first) + ", " + std::to_string(first + count) + ") exceeds " +
              std::to_string(ds.size()) + " pairs");
  Dataset out{{}, ds.input_dim, ds.output_dim, ds.provenance};
  out.pairs.assign(ds.pairs.begin() + static_cast<std::ptrdiff_t>(first),
                   ds.pairs.begin() + static_cast<std::ptrdiff_t>(first + count));
  return out;
}

}  // namespace maebound
