#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wavecoder/tensor.hpp"

namespace wavecoder {

/// Inputs are non-negative real images; targets are class labels or images.
struct Dataset {
  std::vector<RealTensor> inputs;
  std::vector<std::size_t> labels;
  std::vector<RealTensor> targets;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
  bool has_labels() const { return !labels.empty(); }
  bool has_targets() const { return !targets.empty(); }

  void validate() const;
  /// Rows [begin, begin + count).
  Dataset slice(std::size_t begin, std::size_t count) const;
};

class IdxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IdxImages {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::vector<std::uint8_t>> images;
};

// Big-endian IDX files: images magic 0x00000803, labels magic 0x00000801.
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);
void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

struct EmbedOptions {
  std::size_t grid = 0;   // output grid side
  std::size_t size = 0;   // resized image side, 0 keeps the native size
};

/// Loads an IDX image/label pair with pixels scaled to [0,1]. When embed is
/// given, each image is bilinearly resized and centered on the grid.
Dataset load_idx_dataset(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path,
                         const std::optional<EmbedOptions>& embed = std::nullopt,
                         std::size_t offset = 0, std::size_t limit = SIZE_MAX);

RealTensor resize_bilinear(const RealTensor& image, std::size_t rows, std::size_t cols);
RealTensor center_embed(const RealTensor& image, std::size_t n);

}  // namespace wavecoder
