#include "mmvlamp/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "mmvlamp/errors.hpp"

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

namespace mmv {
namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f32(double v) {
    const float f = static_cast<float>(v);
    bytes(&f, 4);
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, const char* what) : in_(in), what_(what) {}
  void bytes(void* p, std::size_t n) {
    if (in_.size() - pos_ < n) {
      throw FormatError(std::string(what_) + ": truncated at offset " + std::to_string(pos_));
    }
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, 8);
    return v;
  }
  float f32() {
    float v;
    bytes(&v, 4);
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw FormatError(std::string(what_) + ": " + msg + " at offset " + std::to_string(at));
  }

 private:
  std::span<const std::uint8_t> in_;
  const char* what_;
  std::size_t pos_ = 0;
};

void expect_magic(Reader& r, const char (&magic)[5]) {
  char got[4];
  r.bytes(got, 4);
  if (std::memcmp(got, magic, 4) != 0) r.fail("bad magic", 0);
}

void put_tensor(Writer& w, const std::string& name, std::size_t rows, std::size_t cols, auto&& value_at) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.u32(static_cast<std::uint32_t>(rows));
  w.u32(static_cast<std::uint32_t>(cols));
  for (std::size_t i = 0; i < rows * cols; ++i) w.f32(value_at(i));
}

struct RawTensor {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;
};

CMatrix complex_from(const RawTensor& re, const RawTensor& im, const char* name, Reader& r) {
  if (re.rows != im.rows || re.cols != im.cols) r.fail(std::string("shape mismatch for ") + name, r.pos());
  CMatrix m(re.rows, re.cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = {re.data[i], im.data[i]};
  return m;
}

}  // namespace

// Narrowed through a float buffer: GCC 11 at -O3 folds an in-register
// double -> float -> double round trip away in the vector loop epilogue.
CMatrix round_to_storage(const CMatrix& m) {
  std::vector<float> narrow(2 * m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    narrow[2 * i] = static_cast<float>(m[i].real());
    narrow[2 * i + 1] = static_cast<float>(m[i].imag());
  }
  CMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = {narrow[2 * i], narrow[2 * i + 1]};
  return out;
}

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  const DatasetHeader& h = ds.header;
  if (ds.samples.size() != h.count) throw FormatError("dataset: header count does not match the sample list");
  Writer w;
  w.bytes("MMVL", 4);
  w.u32(h.version);
  w.u32(h.count);
  w.u32(h.n_bs);
  w.u32(h.k);
  w.u32(h.l);
  w.u32(static_cast<std::uint32_t>(h.grid_mode));
  w.u64(h.seed);
  for (const CMatrix& s : ds.samples) {
    if (s.rows() != h.n_bs || s.cols() != h.k) throw DimensionError("dataset", "sample " + shape_str(s));
    for (const auto& v : s.data()) {
      w.f32(v.real());
      w.f32(v.imag());
    }
  }
  return std::move(w.out);
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "dataset");
  expect_magic(r, "MMVL");
  Dataset ds;
  DatasetHeader& h = ds.header;
  const std::size_t version_at = r.pos();
  h.version = r.u32();
  if (h.version != kDatasetVersion) r.fail("unsupported version " + std::to_string(h.version), version_at);
  h.count = r.u32();
  h.n_bs = r.u32();
  h.k = r.u32();
  h.l = r.u32();
  const std::size_t mode_at = r.pos();
  const std::uint32_t mode = r.u32();
  if (mode > 2) r.fail("unknown grid mode " + std::to_string(mode), mode_at);
  h.grid_mode = static_cast<GridMode>(mode);
  h.seed = r.u64();
  const std::size_t per = std::size_t{h.n_bs} * h.k * 8;
  if (per != 0 && r.remaining() / per < h.count) r.fail("truncated payload", r.pos() + r.remaining());
  ds.samples.reserve(h.count);
  for (std::uint32_t n = 0; n < h.count; ++n) {
    CMatrix s(h.n_bs, h.k);
    for (auto& v : s.data()) {
      const float re = r.f32();
      const float im = r.f32();
      v = {re, im};
    }
    ds.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) r.fail("trailing bytes", r.pos());
  return ds;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.bytes("MMVC", 4);
  w.u32(kCheckpointVersion);
  w.u32(ck.n_bs);
  w.u32(ck.m);
  w.u32(ck.g);
  w.u32(ck.k);
  w.u32(ck.layers);
  w.u32(ck.frsn_layers);
  w.u32(ck.crn.link == LinkMode::uplink ? 0 : 1);
  w.u32(ck.frsn ? 10 : 5);

  const auto put_real = [&](const std::string& name, const CMatrix& m) {
    put_tensor(w, name, m.rows(), m.cols(), [&](std::size_t i) { return m[i].real(); });
  };
  const auto put_complex = [&](const std::string& stem, const CMatrix& m) {
    put_tensor(w, stem + "_re", m.rows(), m.cols(), [&](std::size_t i) { return m[i].real(); });
    put_tensor(w, stem + "_im", m.rows(), m.cols(), [&](std::size_t i) { return m[i].imag(); });
  };
  const auto put_scalar = [&](const std::string& name, double v) {
    put_tensor(w, name, 1, 1, [&](std::size_t) { return v; });
  };
  put_real("xi", ck.crn.xi);
  put_complex("b", ck.crn.lamp.b);
  put_scalar("theta1", ck.crn.lamp.theta1);
  put_scalar("theta2", ck.crn.lamp.theta2);
  if (ck.frsn) {
    put_complex("bp", ck.frsn->lamp.b);
    put_scalar("thetap1", ck.frsn->lamp.theta1);
    put_scalar("thetap2", ck.frsn->lamp.theta2);
    const auto& omega = ck.frsn->omega;
    put_tensor(w, "omega", 1, omega.size(), [&](std::size_t i) { return static_cast<double>(omega[i]); });
  }
  return std::move(w.out);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "checkpoint");
  expect_magic(r, "MMVC");
  const std::size_t version_at = r.pos();
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version), version_at);
  Checkpoint ck;
  ck.n_bs = r.u32();
  ck.m = r.u32();
  ck.g = r.u32();
  ck.k = r.u32();
  ck.layers = r.u32();
  ck.frsn_layers = r.u32();
  const std::size_t link_at = r.pos();
  const std::uint32_t link = r.u32();
  if (link > 1) r.fail("unknown link mode", link_at);
  ck.crn.link = link == 0 ? LinkMode::uplink : LinkMode::downlink;
  const std::uint32_t count = r.u32();

  std::map<std::string, RawTensor> tensors;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t at = r.pos();
    const std::uint32_t len = r.u32();
    if (len == 0 || len > 64) r.fail("bad tensor name length", at);
    std::string name(len, '\0');
    r.bytes(name.data(), len);
    RawTensor raw;
    raw.rows = r.u32();
    raw.cols = r.u32();
    const std::size_t n = std::size_t{raw.rows} * raw.cols;
    if (r.remaining() / 4 < n) r.fail("truncated tensor " + name, r.pos());
    raw.data.resize(n);
    for (auto& v : raw.data) v = r.f32();
    tensors[name] = std::move(raw);
  }
  if (r.remaining() != 0) r.fail("trailing bytes", r.pos());

  const auto need = [&](const std::string& name, std::size_t rows, std::size_t cols) -> const RawTensor& {
    const auto it = tensors.find(name);
    if (it == tensors.end()) r.fail("missing tensor " + name, r.pos());
    if (it->second.rows != rows || it->second.cols != cols) {
      r.fail("tensor " + name + " has shape " + std::to_string(it->second.rows) + "x" +
                 std::to_string(it->second.cols) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols),
             r.pos());
    }
    return it->second;
  };

  const RawTensor& xi = need("xi", ck.n_bs, ck.m);
  ck.crn.xi = CMatrix(ck.n_bs, ck.m);
  for (std::size_t i = 0; i < xi.data.size(); ++i) ck.crn.xi[i] = xi.data[i];
  ck.crn.lamp.b = complex_from(need("b_re", ck.g, ck.m), need("b_im", ck.g, ck.m), "b", r);
  ck.crn.lamp.theta1 = need("theta1", 1, 1).data[0];
  ck.crn.lamp.theta2 = need("theta2", 1, 1).data[0];
  if (tensors.count("omega")) {
    const RawTensor& om = tensors.at("omega");
    if (om.rows != 1) r.fail("omega must be a row", r.pos());
    FrsnModel fr;
    for (float v : om.data) {
      if (!(v >= 1.0f) || v > static_cast<float>(ck.k) || v != static_cast<float>(static_cast<std::size_t>(v))) {
        r.fail("invalid subcarrier index in omega", r.pos());
      }
      fr.omega.push_back(static_cast<std::size_t>(v));
    }
    fr.lamp.b = complex_from(need("bp_re", ck.k, om.cols), need("bp_im", ck.k, om.cols), "bp", r);
    fr.lamp.theta1 = need("thetap1", 1, 1).data[0];
    fr.lamp.theta2 = need("thetap2", 1, 1).data[0];
    ck.frsn = std::move(fr);
  }
  return ck;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("write failed for " + path);
}

void save_dataset(const std::string& path, const Dataset& ds) { write_file(path, encode_dataset(ds)); }
Dataset load_dataset(const std::string& path) { return decode_dataset(read_file(path)); }
void save_checkpoint(const std::string& path, const Checkpoint& ck) { write_file(path, encode_checkpoint(ck)); }
Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

}  // namespace mmv
