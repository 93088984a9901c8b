// Named-tensor model checkpoint: little-endian binary container holding
// float32 tensors plus whatever scalar metadata a model needs to reload.
#ifndef AVSI_CHECKPOINT_HPP
#define AVSI_CHECKPOINT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace avsi {

// Named float32 tensor stored row-major.
struct NamedTensor {
  std::string name;
  std::vector<uint32_t> dims;
  std::vector<float> data;

  size_t count() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

// Ordered collection of named tensors, serialized to a little-endian binary
// file: magic "AVSI", u32 version, u32 tensor count, then for each tensor
// u32 name length, name bytes, u32 rank, u32 dims[rank], float32 data.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  std::vector<NamedTensor> tensors;

  bool has(const std::string& name) const;
  const NamedTensor& find(const std::string& name) const;

  void add_matrix(const std::string& name, const Eigen::MatrixXd& m);
  void add_vector(const std::string& name, const Eigen::VectorXd& v);
  void add_vector(const std::string& name, const std::vector<double>& v);
  void add_scalar(const std::string& name, double value);

  Eigen::MatrixXd matrix(const std::string& name) const;
  Eigen::VectorXd vector(const std::string& name) const;
  std::vector<double> vector_std(const std::string& name) const;
  double scalar(const std::string& name) const;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace avsi

#endif  // AVSI_CHECKPOINT_HPP
