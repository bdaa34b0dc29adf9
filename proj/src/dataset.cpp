#include "curvlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace curvlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

Dataset make_two_gaussians(const DatasetSpec& spec, SeededRng& rng) {
  if (spec.dim < 1) throw std::invalid_argument("two_gaussians: dim must be >= 1");
  Dataset d;
  d.num_classes = 2;
  d.inputs = MatrixD(static_cast<std::size_t>(spec.n), static_cast<std::size_t>(spec.dim));
  d.labels.resize(static_cast<std::size_t>(spec.n));
  const double half = 0.5 * spec.separation;
  for (std::size_t i = 0; i < d.inputs.rows; ++i) {
    const int label = static_cast<int>(i % 2);
    d.labels[i] = label;
    for (std::size_t j = 0; j < d.inputs.cols; ++j) d.inputs(i, j) = rng.normal();
    d.inputs(i, 0) += label == 0 ? -half : half;
  }
  return d;
}

Dataset make_spirals(const DatasetSpec& spec, SeededRng& rng) {
  Dataset d;
  d.num_classes = 2;
  d.inputs = MatrixD(static_cast<std::size_t>(spec.n), 2);
  d.labels.resize(static_cast<std::size_t>(spec.n));
  const std::size_t n = d.inputs.rows;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    d.labels[i] = label;
    const double u = 0.05 + 0.95 * rng.uniform();
    const double angle = spec.turns * 2.0 * kPi * u + (label == 0 ? 0.0 : kPi);
    d.inputs(i, 0) = u * std::cos(angle) + spec.noise * rng.normal();
    d.inputs(i, 1) = u * std::sin(angle) + spec.noise * rng.normal();
  }
  return d;
}

}  // namespace

SplitDataset build_dataset(const DatasetSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("DatasetSpec: n must be >= 2");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw std::invalid_argument("DatasetSpec: train_fraction must be in (0, 1)");

  SeededRng rng(spec.seed);
  Dataset all;
  switch (spec.source) {
    case DataSource::kTwoGaussians:
      all = make_two_gaussians(spec, rng);
      break;
    case DataSource::kSpirals:
      all = make_spirals(spec, rng);
      break;
    case DataSource::kIdxFiles:
      all = load_idx(spec.images_path, spec.labels_path, spec.idx_normalize);
      break;
  }

  const std::size_t n = all.inputs.rows;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with the spec seed; the split is a prefix of this order.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_index(i + 1);
    std::swap(order[i], order[j]);
  }

  std::size_t n_train = static_cast<std::size_t>(spec.train_fraction * static_cast<double>(n));
  n_train = std::min(std::max<std::size_t>(n_train, 1), n - 1);

  auto take = [&](std::size_t begin, std::size_t end) {
    Dataset out;
    out.num_classes = all.num_classes;
    out.inputs = MatrixD(end - begin, all.inputs.cols);
    out.labels.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t src = order[i];
      for (std::size_t j = 0; j < all.inputs.cols; ++j)
        out.inputs(i - begin, j) = all.inputs(src, j);
      out.labels[i - begin] = all.labels[src];
    }
    return out;
  };

  return SplitDataset{take(0, n_train), take(n_train, n)};
}

Batch sample_batch(const Dataset& data, std::size_t batch_size, SeededRng& rng) {
  if (batch_size < 1) throw std::invalid_argument("sample_batch: batch_size must be >= 1");
  if (data.inputs.rows == 0) throw std::invalid_argument("sample_batch: empty dataset");
  Batch b;
  b.inputs = MatrixD(batch_size, data.inputs.cols);
  b.labels.resize(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t src = rng.uniform_index(data.inputs.rows);
    for (std::size_t j = 0; j < data.inputs.cols; ++j) b.inputs(i, j) = data.inputs(src, j);
    b.labels[i] = data.labels[src];
  }
  return b;
}

Batch full_batch(const Dataset& data) {
  Batch b;
  b.inputs = data.inputs;
  b.labels = data.labels;
  return b;
}

IdxParseError::IdxParseError(const std::string& what, std::size_t byte_offset)
    : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
      offset_(byte_offset) {}

IdxTensor parse_idx(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw IdxParseError("idx: header truncated", bytes.size());
  if (bytes[0] != 0 || bytes[1] != 0) throw IdxParseError("idx: bad magic", 0);
  if (bytes[2] != 0x08) throw IdxParseError("idx: unsupported dtype (want unsigned byte 0x08)", 2);
  const std::size_t ndims = bytes[3];
  if (ndims == 0) throw IdxParseError("idx: zero dimensions", 3);

  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header)
    throw IdxParseError("idx: dimension header truncated", bytes.size());

  IdxTensor t;
  std::size_t count = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    const std::size_t at = 4 + 4 * d;
    const std::uint32_t v = (static_cast<std::uint32_t>(bytes[at]) << 24) |
                            (static_cast<std::uint32_t>(bytes[at + 1]) << 16) |
                            (static_cast<std::uint32_t>(bytes[at + 2]) << 8) |
                            static_cast<std::uint32_t>(bytes[at + 3]);
    t.dims.push_back(v);
    count *= v;
  }
  if (bytes.size() < header + count)
    throw IdxParseError("idx: payload truncated, expected " + std::to_string(count) + " bytes",
                        bytes.size());
  if (bytes.size() > header + count)
    throw IdxParseError("idx: trailing bytes after payload", header + count);
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return t;
}

IdxTensor load_idx_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("idx: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_idx(bytes);
}

std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor) {
  if (tensor.dims.empty()) throw std::invalid_argument("idx: tensor needs dimensions");
  std::size_t count = 1;
  for (std::uint32_t d : tensor.dims) count *= d;
  if (count != tensor.data.size())
    throw std::invalid_argument("idx: data size does not match dims");

  std::vector<std::uint8_t> bytes;
  bytes.reserve(4 + 4 * tensor.dims.size() + tensor.data.size());
  bytes.push_back(0);
  bytes.push_back(0);
  bytes.push_back(0x08);
  bytes.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) {
    bytes.push_back(static_cast<std::uint8_t>(d >> 24));
    bytes.push_back(static_cast<std::uint8_t>(d >> 16));
    bytes.push_back(static_cast<std::uint8_t>(d >> 8));
    bytes.push_back(static_cast<std::uint8_t>(d));
  }
  bytes.insert(bytes.end(), tensor.data.begin(), tensor.data.end());
  return bytes;
}

void write_idx_tensor(const std::string& path, const IdxTensor& tensor) {
  const std::vector<std::uint8_t> bytes = serialize_idx(tensor);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("idx: cannot open for writing " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("idx: write failed " + path);
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 bool normalize) {
  const IdxTensor images = load_idx_tensor(images_path);
  const IdxTensor labels = load_idx_tensor(labels_path);
  if (labels.dims.size() != 1) throw IdxParseError("idx: label file must be 1-dimensional", 3);
  if (images.dims.empty() || images.dims[0] != labels.dims[0])
    throw IdxParseError("idx: image count " +
                            std::to_string(images.dims.empty() ? 0 : images.dims[0]) +
                            " does not match label count " + std::to_string(labels.dims[0]),
                        4);

  const std::size_t n = images.dims[0];
  std::size_t feature_dim = 1;
  for (std::size_t d = 1; d < images.dims.size(); ++d) feature_dim *= images.dims[d];

  Dataset out;
  out.inputs = MatrixD(n, feature_dim);
  out.labels.resize(n);
  const double scale = normalize ? 1.0 / 255.0 : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < feature_dim; ++j)
      out.inputs(i, j) = scale * static_cast<double>(images.data[i * feature_dim + j]);
    out.labels[i] = static_cast<int>(labels.data[i]);
  }
  int max_label = 0;
  for (int l : out.labels) max_label = std::max(max_label, l);
  out.num_classes = max_label + 1;
  return out;
}

}  // namespace curvlab
