// Synthetic dataset generators, IDX binary ingestion, and batch sampling.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvlab/kernels.hpp"
#include "curvlab/model.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

struct Dataset {
  MatrixD inputs;
  std::vector<int> labels;
  int num_classes = 0;
};

struct SplitDataset {
  Dataset train;
  Dataset validation;
};

enum class DataSource { kTwoGaussians, kSpirals, kIdxFiles };

struct DatasetSpec {
  DataSource source = DataSource::kTwoGaussians;
  long long n = 4096;
  int dim = 2;
  double separation = 4.0;  // two_gaussians: distance between class means
  double turns = 1.5;       // spirals
  double noise = 0.1;       // spirals
  std::string images_path;
  std::string labels_path;
  bool idx_normalize = true;  // scale bytes to [0, 1]
  double train_fraction = 0.875;
  std::uint64_t seed = 0;
};

// Deterministic for a fixed spec; split indices come from a seeded shuffle
// and are disjoint by construction.
SplitDataset build_dataset(const DatasetSpec& spec);

// batch_size uniform draws (with replacement) from the dataset.
Batch sample_batch(const Dataset& data, std::size_t batch_size, SeededRng& rng);

Batch full_batch(const Dataset& data);

// IDX binary tensors: 0x00 0x00 <dtype> <ndims> magic, big-endian u32 dims,
// payload. Only the unsigned-byte dtype (0x08) is supported.
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

class IdxParseError : public std::runtime_error {
 public:
  IdxParseError(const std::string& what, std::size_t byte_offset);
  std::size_t byte_offset() const { return offset_; }

 private:
  std::size_t offset_;
};

IdxTensor parse_idx(const std::vector<std::uint8_t>& bytes);
IdxTensor load_idx_tensor(const std::string& path);
std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor);
void write_idx_tensor(const std::string& path, const IdxTensor& tensor);

// Images flattened row-major and scaled to [0, 1]; throws IdxParseError when
// the image and label counts disagree.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 bool normalize = true);

}  // namespace curvlab
