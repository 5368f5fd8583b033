#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dtrbench/errors.hpp"
#include "dtrbench/nn/dense_net.hpp"

namespace dtrbench::nn {

/// Checkpoint layout (all integers and floats little-endian):
///
///   bytes 0..7   magic "DTRNNCK\0"
///   u32          format version (1)
///   u32          number of layer sizes L
///   u64 x L      layer sizes, input first
///   f64 ...      per layer: weights row-major (out x in), then biases
///   u64          FNV-1a checksum of every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layer sizes stored in a checkpoint do not match what the caller expected.
class CheckpointMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

std::string encode_params(const DenseNet& net);
DenseNet decode_params(const std::string& bytes,
                       const std::optional<std::vector<std::size_t>>& expected_sizes = std::nullopt);

void save_params(const DenseNet& net, const std::filesystem::path& path);
DenseNet load_params(const std::filesystem::path& path,
                     const std::optional<std::vector<std::size_t>>& expected_sizes = std::nullopt);

}  // namespace dtrbench::nn
