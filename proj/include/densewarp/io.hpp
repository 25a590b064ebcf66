#pragma once

// Raster interchange: the `.iuv` binary DensePose format, the FLO1 flow
// format, and 8-bit PNG for images, masks and quantized IUV maps.

#include <png.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "densewarp/raster.hpp"

namespace densewarp {
namespace io_detail {

inline constexpr std::array<char, 4> kIuvMagic = {'I', 'U', 'V', '1'};
inline constexpr std::array<char, 4> kFlowMagic = {'F', 'L', 'O', '1'};
inline constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                                 0x0D, 0x0A, 0x1A, 0x0A};
// Largest side accepted from a file header.
inline constexpr std::uint32_t kMaxSide = 1u << 16;

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFFu));
}

inline void put_f32(std::vector<unsigned char>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Reader {
 public:
  Reader(const std::vector<unsigned char>& bytes, std::string path)
      : bytes_(bytes), path_(std::move(path)) {}

  void need(std::size_t n, const char* field) const {
    if (pos_ + n > bytes_.size()) {
      throw FormatError("'" + path_ + "': truncated while reading " + field);
    }
  }

  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes_[pos_ + k]) << (8 * k);
    pos_ += 4;
    return v;
  }

  float f32(const char* field) { return std::bit_cast<float>(u32(field)); }

  std::uint8_t u8(const char* field) {
    need(1, field);
    return bytes_[pos_++];
  }

  bool magic(const std::array<char, 4>& m) {
    if (bytes_.size() < 4) return false;
    for (std::size_t k = 0; k < 4; ++k) {
      if (bytes_[k] != static_cast<unsigned char>(m[k])) return false;
    }
    pos_ = 4;
    return true;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& path() const { return path_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

inline std::pair<int, int> read_dims(Reader& r) {
  const std::uint32_t w = r.u32("width");
  const std::uint32_t h = r.u32("height");
  if (w == 0 || w > kMaxSide) {
    throw FormatError("'" + r.path() + "': invalid width " + std::to_string(w));
  }
  if (h == 0 || h > kMaxSide) {
    throw FormatError("'" + r.path() + "': invalid height " + std::to_string(h));
  }
  return {static_cast<int>(w), static_cast<int>(h)};
}

inline bool is_png(const std::vector<unsigned char>& bytes) {
  return bytes.size() >= kPngSignature.size() &&
         std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin());
}

/// Decoded 8-bit PNG, `channels` interleaved bytes per pixel.
struct PngBuffer {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<unsigned char> data;
};

inline PngBuffer decode_png(const std::vector<unsigned char>& bytes, const std::string& path,
                            int channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError("'" + path + "': " + image.message);
  }
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  PngBuffer out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = channels;
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw FormatError("'" + path + "': " + message);
  }
  return out;
}

inline PngBuffer read_png(const std::filesystem::path& path, int channels) {
  const auto bytes = read_file(path);
  if (!is_png(bytes)) throw FormatError("'" + path.string() + "': not a PNG file");
  return decode_png(bytes, path.string(), channels);
}

inline void write_png(const std::filesystem::path& path, const PngBuffer& buffer) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(buffer.width);
  image.height = static_cast<png_uint_32>(buffer.height);
  image.format = buffer.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data.data(), 0,
                               nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

inline unsigned char quantize(float v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0F, 1.0F) * 255.0F));
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// DensePose maps

/// Parses either the `.iuv` binary layout or the quantized PNG convention
/// (R = label, G = u*255, B = v*255), chosen by the file's magic bytes.
inline DensePoseMap decode_iuv(const std::vector<unsigned char>& bytes, const std::string& path) {
  using namespace io_detail;
  if (is_png(bytes)) {
    const PngBuffer png = decode_png(bytes, path, 3);
    DensePoseMap map(png.width, png.height);
    for (int y = 0; y < png.height; ++y) {
      for (int x = 0; x < png.width; ++x) {
        const auto* px = &png.data[(static_cast<std::size_t>(y) * png.width + x) * 3];
        const int label = std::min<int>(px[0], kPartCount);
        map.set(x, y, label, px[1] / 255.0F, px[2] / 255.0F);
      }
    }
    return map;
  }

  Reader r(bytes, path);
  if (!r.magic(kIuvMagic)) throw FormatError("'" + path + "': bad magic, expected IUV1 or PNG");
  const auto [w, h] = read_dims(r);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (r.remaining() != n * 9) {
    throw FormatError("'" + path + "': plane sizes do not match header " +
                      detail::shape_string(w, h) + " (expected " + std::to_string(n * 9) +
                      " payload bytes, found " + std::to_string(r.remaining()) + ")");
  }
  std::vector<std::uint8_t> labels(n);
  for (auto& l : labels) {
    l = r.u8("I plane");
    if (l > kPartCount) {
      throw FormatError("'" + path + "': I plane label " + std::to_string(l) +
                        " out of range [0,24]");
    }
  }
  std::vector<float> us(n);
  std::vector<float> vs(n);
  for (auto& u : us) u = r.f32("U plane");
  for (auto& v : vs) v = r.f32("V plane");

  DensePoseMap map(w, h);
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(us[k])) throw FormatError("'" + path + "': non-finite value in U plane");
    if (!std::isfinite(vs[k])) throw FormatError("'" + path + "': non-finite value in V plane");
    const int x = static_cast<int>(k % static_cast<std::size_t>(w));
    const int y = static_cast<int>(k / static_cast<std::size_t>(w));
    map.set(x, y, labels[k], us[k], vs[k]);
  }
  return map;
}

inline DensePoseMap load_iuv(const std::filesystem::path& path) {
  return decode_iuv(io_detail::read_file(path), path.string());
}

inline std::vector<unsigned char> encode_iuv(const DensePoseMap& map) {
  using namespace io_detail;
  std::vector<unsigned char> out(kIuvMagic.begin(), kIuvMagic.end());
  const std::size_t n = static_cast<std::size_t>(map.width()) * map.height();
  out.reserve(12 + n * 9);
  put_u32(out, static_cast<std::uint32_t>(map.width()));
  put_u32(out, static_cast<std::uint32_t>(map.height()));
  for (auto l : map.i_plane().pixels()) out.push_back(l);
  for (auto u : map.u_plane().pixels()) put_f32(out, u);
  for (auto v : map.v_plane().pixels()) put_f32(out, v);
  return out;
}

/// Writes the binary `.iuv` layout, or the quantized PNG convention when
/// the path ends in `.png`.
inline void save_iuv(const DensePoseMap& map, const std::filesystem::path& path) {
  using namespace io_detail;
  if (path.extension() == ".png") {
    PngBuffer png{map.width(), map.height(), 3, {}};
    png.data.reserve(static_cast<std::size_t>(map.width()) * map.height() * 3);
    for (int y = 0; y < map.height(); ++y) {
      for (int x = 0; x < map.width(); ++x) {
        png.data.push_back(static_cast<unsigned char>(map.label(x, y)));
        png.data.push_back(quantize(map.u(x, y)));
        png.data.push_back(quantize(map.v(x, y)));
      }
    }
    write_png(path, png);
    return;
  }
  write_file(path, encode_iuv(map));
}

// ---------------------------------------------------------------------------
// Flow fields

inline FlowField load_flow(const std::filesystem::path& path) {
  using namespace io_detail;
  const auto bytes = read_file(path);
  Reader r(bytes, path.string());
  if (!r.magic(kFlowMagic)) throw FormatError("'" + path.string() + "': bad magic, expected FLO1");
  const auto [w, h] = read_dims(r);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (r.remaining() != n * 8) {
    throw FormatError("'" + path.string() + "': flow payload does not match header " +
                      detail::shape_string(w, h));
  }
  FlowField flow(w, h);
  for (std::size_t k = 0; k < n; ++k) {
    const float dx = r.f32("dx");
    const float dy = r.f32("dy");
    if (!std::isfinite(dx) || !std::isfinite(dy)) {
      throw FormatError("'" + path.string() + "': non-finite flow offset");
    }
    flow.dx.pixels()[k] = dx;
    flow.dy.pixels()[k] = dy;
  }
  return flow;
}

inline void save_flow(const FlowField& flow, const std::filesystem::path& path) {
  using namespace io_detail;
  detail::require_same_shape(flow.dx, flow.dy, "save_flow");
  std::vector<unsigned char> out(kFlowMagic.begin(), kFlowMagic.end());
  put_u32(out, static_cast<std::uint32_t>(flow.width()));
  put_u32(out, static_cast<std::uint32_t>(flow.height()));
  for (std::size_t k = 0; k < flow.dx.size(); ++k) {
    put_f32(out, flow.dx.pixels()[k]);
    put_f32(out, flow.dy.pixels()[k]);
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// Masks and RGB images

/// Loads an 8-bit PNG as a mask, thresholding gray level at 128.
inline BinaryMask load_mask(const std::filesystem::path& path) {
  const auto png = io_detail::read_png(path, 1);
  BinaryMask mask(png.width, png.height);
  for (std::size_t k = 0; k < png.data.size(); ++k) mask.set_index(k, png.data[k] >= 128);
  return mask;
}

inline void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  io_detail::PngBuffer png{mask.width(), mask.height(), 1, {}};
  png.data.resize(mask.size());
  for (std::size_t k = 0; k < mask.size(); ++k) png.data[k] = mask.at_index(k) ? 255 : 0;
  io_detail::write_png(path, png);
}

inline RgbImage load_rgb(const std::filesystem::path& path) {
  const auto png = io_detail::read_png(path, 3);
  RgbImage image(png.width, png.height);
  for (std::size_t k = 0; k < image.size(); ++k) {
    image.pixels()[k] = {png.data[3 * k] / 255.0F, png.data[3 * k + 1] / 255.0F,
                         png.data[3 * k + 2] / 255.0F};
  }
  return image;
}

inline void save_rgb(const RgbImage& image, const std::filesystem::path& path) {
  io_detail::PngBuffer png{image.width(), image.height(), 3, {}};
  png.data.reserve(image.size() * 3);
  for (const auto& px : image.pixels()) {
    png.data.push_back(io_detail::quantize(px.r));
    png.data.push_back(io_detail::quantize(px.g));
    png.data.push_back(io_detail::quantize(px.b));
  }
  io_detail::write_png(path, png);
}

}  // namespace densewarp
