#include "avsi/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace avsi {

namespace {

constexpr char kMagic[4] = {'A', 'V', 'S', 'I'};

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, const float* data, size_t n) {
  static_assert(sizeof(float) == 4);
  for (size_t i = 0; i < n; ++i) {
    uint32_t bits;
    std::memcpy(&bits, &data[i], 4);
    put_u32(os, bits);
  }
}

void get_f32(std::istream& is, float* data, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const uint32_t bits = get_u32(is);
    std::memcpy(&data[i], &bits, 4);
  }
}

}  // namespace

bool Checkpoint::has(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return true;
  }
  return false;
}

const NamedTensor& Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
}

void Checkpoint::add_matrix(const std::string& name, const Eigen::MatrixXd& m) {
  NamedTensor t;
  t.name = name;
  t.dims = {static_cast<uint32_t>(m.rows()), static_cast<uint32_t>(m.cols())};
  t.data.resize(static_cast<size_t>(m.size()));
  size_t idx = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data[idx++] = static_cast<float>(m(r, c));
  }
  tensors.push_back(std::move(t));
}

void Checkpoint::add_vector(const std::string& name, const Eigen::VectorXd& v) {
  NamedTensor t;
  t.name = name;
  t.dims = {static_cast<uint32_t>(v.size())};
  t.data.resize(static_cast<size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) t.data[static_cast<size_t>(i)] = static_cast<float>(v(i));
  tensors.push_back(std::move(t));
}

void Checkpoint::add_vector(const std::string& name, const std::vector<double>& v) {
  NamedTensor t;
  t.name = name;
  t.dims = {static_cast<uint32_t>(v.size())};
  t.data.assign(v.begin(), v.end());
  tensors.push_back(std::move(t));
}

void Checkpoint::add_scalar(const std::string& name, double value) {
  NamedTensor t;
  t.name = name;
  t.dims = {1};
  t.data = {static_cast<float>(value)};
  tensors.push_back(std::move(t));
}

Eigen::MatrixXd Checkpoint::matrix(const std::string& name) const {
  const NamedTensor& t = find(name);
  if (t.dims.size() != 2) throw std::runtime_error("checkpoint: '" + name + "' is not a matrix");
  Eigen::MatrixXd m(t.dims[0], t.dims[1]);
  size_t idx = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = static_cast<double>(t.data[idx++]);
  }
  return m;
}

Eigen::VectorXd Checkpoint::vector(const std::string& name) const {
  const NamedTensor& t = find(name);
  if (t.dims.size() != 1) throw std::runtime_error("checkpoint: '" + name + "' is not a vector");
  Eigen::VectorXd v(t.dims[0]);
  for (size_t i = 0; i < t.data.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(t.data[i]);
  return v;
}

std::vector<double> Checkpoint::vector_std(const std::string& name) const {
  const NamedTensor& t = find(name);
  if (t.dims.size() != 1) throw std::runtime_error("checkpoint: '" + name + "' is not a vector");
  return std::vector<double>(t.data.begin(), t.data.end());
}

double Checkpoint::scalar(const std::string& name) const {
  const NamedTensor& t = find(name);
  if (t.count() != 1) throw std::runtime_error("checkpoint: '" + name + "' is not a scalar");
  return static_cast<double>(t.data[0]);
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
  os.write(kMagic, 4);
  put_u32(os, Checkpoint::kVersion);
  put_u32(os, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    put_u32(os, static_cast<uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_u32(os, static_cast<uint32_t>(t.dims.size()));
    for (uint32_t d : t.dims) put_u32(os, d);
    if (t.data.size() != t.count())
      throw std::runtime_error("checkpoint: tensor '" + t.name + "' data/dims mismatch");
    put_f32(os, t.data.data(), t.data.size());
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
  const uint32_t version = get_u32(is);
  if (version != Checkpoint::kVersion)
    throw std::runtime_error("checkpoint: unsupported version in '" + path + "'");
  const uint32_t count = get_u32(is);
  Checkpoint ckpt;
  ckpt.tensors.resize(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor& t = ckpt.tensors[i];
    const uint32_t name_len = get_u32(is);
    t.name.resize(name_len);
    is.read(t.name.data(), name_len);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    const uint32_t rank = get_u32(is);
    t.dims.resize(rank);
    for (uint32_t d = 0; d < rank; ++d) t.dims[d] = get_u32(is);
    t.data.resize(t.count());
    get_f32(is, t.data.data(), t.data.size());
  }
  return ckpt;
}

}  // namespace avsi
