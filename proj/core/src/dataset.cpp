#include "wavecoder/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace wavecoder {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), is_(path, std::ios::binary) {
    if (!is_) throw IdxError("idx: cannot open " + path.string());
  }

  std::uint32_t u32(const char* what) {
    std::array<unsigned char, 4> b{};
    read(b.data(), 4, what);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
  }

  void read(void* dst, std::size_t n, const char* what) {
    if (!is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n))) {
      throw IdxError("idx: " + path_.string() + " truncated at offset " + std::to_string(offset_) +
                     " while reading " + what);
    }
    offset_ += n;
  }

  std::size_t offset() const { return offset_; }

 private:
  std::filesystem::path path_;
  std::ifstream is_;
  std::size_t offset_ = 0;
};

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  os.write(b.data(), 4);
}

}  // namespace

void Dataset::validate() const {
  if (has_labels() && labels.size() != inputs.size()) {
    throw std::invalid_argument("dataset: label count differs from input count");
  }
  if (has_targets() && targets.size() != inputs.size()) {
    throw std::invalid_argument("dataset: target count differs from input count");
  }
  for (const auto& x : inputs) {
    for (double v : x.data) {
      if (!(v >= 0.0)) throw std::invalid_argument("dataset: inputs must be non-negative");
    }
  }
}

Dataset Dataset::slice(std::size_t begin, std::size_t count) const {
  if (begin > size()) throw std::out_of_range("dataset: slice start beyond end");
  const std::size_t end = std::min(size(), begin + count);
  Dataset out;
  out.inputs.assign(inputs.begin() + static_cast<long>(begin), inputs.begin() + static_cast<long>(end));
  if (has_labels()) {
    out.labels.assign(labels.begin() + static_cast<long>(begin), labels.begin() + static_cast<long>(end));
  }
  if (has_targets()) {
    out.targets.assign(targets.begin() + static_cast<long>(begin), targets.begin() + static_cast<long>(end));
  }
  return out;
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  Reader r(path);
  const std::uint32_t magic = r.u32("magic");
  if (magic != kImagesMagic) {
    throw IdxError("idx: " + path.string() + " bad magic " + hex(magic) + " at offset 0, expected " +
                   hex(kImagesMagic));
  }
  const std::uint32_t count = r.u32("image count");
  IdxImages out;
  out.rows = r.u32("rows");
  out.cols = r.u32("cols");
  const std::size_t pixels = std::size_t{out.rows} * out.cols;
  out.images.resize(count, std::vector<std::uint8_t>(pixels));
  for (auto& img : out.images) r.read(img.data(), pixels, "pixel data");
  return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  Reader r(path);
  const std::uint32_t magic = r.u32("magic");
  if (magic != kLabelsMagic) {
    throw IdxError("idx: " + path.string() + " bad magic " + hex(magic) + " at offset 0, expected " +
                   hex(kLabelsMagic));
  }
  const std::uint32_t count = r.u32("label count");
  std::vector<std::uint8_t> labels(count);
  r.read(labels.data(), count, "labels");
  return labels;
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IdxError("idx: cannot open " + path.string() + " for writing");
  put_u32(os, kImagesMagic);
  put_u32(os, static_cast<std::uint32_t>(images.images.size()));
  put_u32(os, images.rows);
  put_u32(os, images.cols);
  for (const auto& img : images.images) {
    if (img.size() != std::size_t{images.rows} * images.cols) {
      throw IdxError("idx: image size does not match rows x cols");
    }
    os.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  }
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IdxError("idx: cannot open " + path.string() + " for writing");
  put_u32(os, kLabelsMagic);
  put_u32(os, static_cast<std::uint32_t>(labels.size()));
  os.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

RealTensor resize_bilinear(const RealTensor& image, std::size_t rows, std::size_t cols) {
  if (image.shape.size() != 2 || rows == 0 || cols == 0) {
    throw std::invalid_argument("resize: expects a 2-D image and a positive size");
  }
  const std::size_t in_r = image.shape[0];
  const std::size_t in_c = image.shape[1];
  RealTensor out({rows, cols});
  // Pixel-center alignment.
  const double sr = static_cast<double>(in_r) / static_cast<double>(rows);
  const double sc = static_cast<double>(in_c) / static_cast<double>(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const double y = std::clamp((static_cast<double>(i) + 0.5) * sr - 0.5, 0.0,
                                static_cast<double>(in_r - 1));
    const auto y0 = static_cast<std::size_t>(y);
    const std::size_t y1 = std::min(y0 + 1, in_r - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t j = 0; j < cols; ++j) {
      const double x = std::clamp((static_cast<double>(j) + 0.5) * sc - 0.5, 0.0,
                                  static_cast<double>(in_c - 1));
      const auto x0 = static_cast<std::size_t>(x);
      const std::size_t x1 = std::min(x0 + 1, in_c - 1);
      const double fx = x - static_cast<double>(x0);
      out(i, j) = (1 - fy) * ((1 - fx) * image(y0, x0) + fx * image(y0, x1)) +
                  fy * ((1 - fx) * image(y1, x0) + fx * image(y1, x1));
    }
  }
  return out;
}

RealTensor center_embed(const RealTensor& image, std::size_t n) {
  if (image.shape.size() != 2 || image.shape[0] > n || image.shape[1] > n) {
    throw std::invalid_argument("center_embed: image larger than grid");
  }
  RealTensor out({n, n});
  const std::size_t top = (n - image.shape[0]) / 2;
  const std::size_t left = (n - image.shape[1]) / 2;
  for (std::size_t i = 0; i < image.shape[0]; ++i) {
    for (std::size_t j = 0; j < image.shape[1]; ++j) out(top + i, left + j) = image(i, j);
  }
  return out;
}

Dataset load_idx_dataset(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path,
                         const std::optional<EmbedOptions>& embed, std::size_t offset,
                         std::size_t limit) {
  const IdxImages raw = read_idx_images(images_path);
  const std::vector<std::uint8_t> labels = read_idx_labels(labels_path);
  if (raw.images.size() != labels.size()) {
    throw IdxError("idx: " + std::to_string(raw.images.size()) + " images but " +
                   std::to_string(labels.size()) + " labels");
  }
  if (offset > raw.images.size()) throw IdxError("idx: offset beyond end of file");
  const std::size_t end = std::min(raw.images.size(), offset > SIZE_MAX - limit ? SIZE_MAX : offset + limit);
  Dataset ds;
  for (std::size_t k = offset; k < end; ++k) {
    RealTensor img({raw.rows, raw.cols});
    for (std::size_t p = 0; p < img.size(); ++p) img[p] = raw.images[k][p] / 255.0;
    if (embed) {
      if (embed->size != 0 && (embed->size != raw.rows || embed->size != raw.cols)) {
        img = resize_bilinear(img, embed->size, embed->size);
      }
      img = center_embed(img, embed->grid);
    }
    ds.inputs.push_back(std::move(img));
    ds.labels.push_back(labels[k]);
  }
  return ds;
}

}  // namespace wavecoder
