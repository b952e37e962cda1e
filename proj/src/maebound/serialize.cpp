#include "maebound/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "maebound/error.hpp"

namespace maebound {

namespace {

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  template <typename T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  [[nodiscard]] std::size_t offset() const noexcept { return pos_; }
  [[nodiscard]] std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      fail(ErrorKind::Format, "truncated container: need " + std::to_string(n) + " bytes at offset " +
                                  std::to_string(pos_) + ", have " + std::to_string(in_.size() - pos_));
    }
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t narrow_u32(std::size_t v, const char* what) {
  require(v <= std::numeric_limits<std::uint32_t>::max(), ErrorKind::Format, std::string(what) + " exceeds u32");
  return static_cast<std::uint32_t>(v);
}

void expect_header(Reader& in, std::string_view magic) {
  const auto got = in.bytes(4);
  require(got == magic, ErrorKind::Format,
          "bad magic at offset 0: expected '" + std::string(magic) + "', got '" + std::string(got) + "'");
  const auto version = in.u32();
  require(version == kContainerVersion, ErrorKind::Format,
          "unsupported container version " + std::to_string(version) + " at offset 4");
}

}  // namespace

std::string encode_network(const Network& net) {
  const auto& spec = net.spec();
  Writer out;
  out.bytes("MAEB");
  out.u32(kContainerVersion);
  out.u32(narrow_u32(net.depth(), "k"));
  out.u32(narrow_u32(spec.input_dim, "d"));
  out.u32(narrow_u32(spec.output_dim, "q"));
  for (std::size_t w : spec.hidden_widths) out.u32(narrow_u32(w, "width"));
  out.f64(spec.sharpness);
  out.u32(spec.bias_enabled ? 1u : 0u);
  for (const auto& w : net.weights())
    for (double v : w.values()) out.f64(v);
  for (const auto& b : net.biases())
    for (double v : b.data) out.f64(v);
  return out.take();
}

Network decode_network(std::string_view bytes) {
  Reader in(bytes);
  expect_header(in, "MAEB");
  NetworkSpec spec;
  const std::uint32_t k = in.u32();
  require(k >= 1 && k <= 4096, ErrorKind::Format, "implausible layer count " + std::to_string(k) + " at offset 8");
  spec.input_dim = in.u32();
  spec.output_dim = in.u32();
  for (std::uint32_t l = 0; l + 1 < k; ++l) spec.hidden_widths.push_back(in.u32());
  spec.sharpness = in.f64();
  const std::uint32_t flags = in.u32();
  require((flags & ~1u) == 0, ErrorKind::Format, "unknown flag bits at offset " + std::to_string(in.offset() - 4));
  spec.bias_enabled = (flags & 1u) != 0;
  spec.validate();

  std::size_t expected = 0;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    expected += spec.layer_inputs(l) * spec.layer_outputs(l);
    if (spec.bias_enabled) expected += spec.layer_outputs(l);
  }
  require(in.remaining() == expected * 8, ErrorKind::Format,
          "payload at offset " + std::to_string(in.offset()) + " holds " + std::to_string(in.remaining()) +
              " bytes, expected " + std::to_string(expected * 8));

  std::vector<DenseMatrix> weights;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    DenseMatrix w(spec.layer_outputs(l), spec.layer_inputs(l));
    for (double& v : w.values()) v = in.f64();
    weights.push_back(std::move(w));
  }
  std::vector<DenseVector> biases;
  if (spec.bias_enabled) {
    for (std::size_t l = 0; l < spec.depth(); ++l) {
      DenseVector b(spec.layer_outputs(l));
      for (double& v : b.data) v = in.f64();
      biases.push_back(std::move(b));
    }
  }
  return Network(spec, std::move(weights), std::move(biases));
}

std::string encode_dataset(const Dataset& ds) {
  ds.validate();
  Writer out;
  out.bytes("MAED");
  out.u32(kContainerVersion);
  out.u32(narrow_u32(ds.input_dim, "d"));
  out.u32(narrow_u32(ds.output_dim, "q"));
  out.u32(static_cast<std::uint32_t>(ds.provenance));
  out.u64(ds.size());
  for (const auto& p : ds.pairs) {
    for (double v : p.x.data) out.f64(v);
    for (double v : p.y.data) out.f64(v);
    out.f64(p.scale);
  }
  return out.take();
}

Dataset decode_dataset(std::string_view bytes) {
  Reader in(bytes);
  expect_header(in, "MAED");
  Dataset ds;
  ds.input_dim = in.u32();
  ds.output_dim = in.u32();
  const std::uint32_t prov = in.u32();
  require(prov <= 2, ErrorKind::Format, "unknown provenance tag at offset 16");
  ds.provenance = static_cast<Provenance>(prov);
  const std::uint64_t count = in.u64();
  const std::uint64_t per_pair = (ds.input_dim + ds.output_dim + 1) * 8ULL;
  require(count <= in.remaining() / per_pair && in.remaining() == count * per_pair, ErrorKind::Format,
          "dataset payload at offset " + std::to_string(in.offset()) + " does not hold " + std::to_string(count) +
              " pairs");
  ds.pairs.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    SamplePair p{DenseVector(ds.input_dim), DenseVector(ds.output_dim), 1.0};
    for (double& v : p.x.data) v = in.f64();
    for (double& v : p.y.data) v = in.f64();
    p.scale = in.f64();
    ds.pairs.push_back(std::move(p));
  }
  return ds;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorKind::Io, "read failed for '" + path.string() + "'");
  return data;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    require(static_cast<bool>(out), ErrorKind::Io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::Io, "cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

void save_network(const Network& net, const std::filesystem::path& path) {
  write_file_atomic(path, encode_network(net));
}

Network load_network(const std::filesystem::path& path) { return decode_network(read_file(path)); }

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, encode_dataset(ds));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

}  // namespace maebound
