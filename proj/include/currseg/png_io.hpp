#pragma once

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "currseg/errors.hpp"
#include "currseg/image.hpp"

namespace currseg {
namespace png {

// Minimal PNG support: 8-bit grayscale and RGB(A), non-interlaced. The
// encoder always emits filter-0 scanlines compressed at a fixed zlib level,
// so a given raster maps to one byte sequence - the determinism the dataset
// generator and report pipeline rely on. The decoder additionally accepts
// all five scanline filters and an alpha channel (alpha is dropped).

struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 = gray, 3 = rgb
  std::vector<std::uint8_t> bytes;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::uint8_t* data, std::size_t len) {
  put_u32(out, static_cast<std::uint32_t>(len));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  if (len) out.insert(out.end(), data, data + len);
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0L, out.data() + type_at, static_cast<uInt>(4 + len)));
  put_u32(out, crc);
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Raster& raster) {
  if (raster.channels != 1 && raster.channels != 3)
    throw Error("png::encode: channels must be 1 or 3");
  if (raster.bytes.size() != static_cast<std::size_t>(raster.width) *
                                 raster.height * raster.channels)
    throw Error("png::encode: byte buffer size mismatch");

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

  std::uint8_t ihdr[13];
  ihdr[0] = static_cast<std::uint8_t>((raster.width >> 24) & 0xff);
  ihdr[1] = static_cast<std::uint8_t>((raster.width >> 16) & 0xff);
  ihdr[2] = static_cast<std::uint8_t>((raster.width >> 8) & 0xff);
  ihdr[3] = static_cast<std::uint8_t>(raster.width & 0xff);
  ihdr[4] = static_cast<std::uint8_t>((raster.height >> 24) & 0xff);
  ihdr[5] = static_cast<std::uint8_t>((raster.height >> 16) & 0xff);
  ihdr[6] = static_cast<std::uint8_t>((raster.height >> 8) & 0xff);
  ihdr[7] = static_cast<std::uint8_t>(raster.height & 0xff);
  ihdr[8] = 8;                                        // bit depth
  ihdr[9] = raster.channels == 1 ? 0 : 2;             // gray / rgb
  ihdr[10] = 0;                                       // compression
  ihdr[11] = 0;                                       // filter method
  ihdr[12] = 0;                                       // no interlace
  detail::append_chunk(out, "IHDR", ihdr, sizeof(ihdr));

  const std::size_t stride = static_cast<std::size_t>(raster.width) * raster.channels;
  std::vector<std::uint8_t> scanlines;
  scanlines.reserve((stride + 1) * raster.height);
  for (int y = 0; y < raster.height; ++y) {
    scanlines.push_back(0);  // filter: none
    scanlines.insert(scanlines.end(), raster.bytes.begin() + y * stride,
                     raster.bytes.begin() + (y + 1) * stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(scanlines.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, scanlines.data(),
                static_cast<uLong>(scanlines.size()), 6) != Z_OK)
    throw Error("png::encode: zlib compression failed");
  compressed.resize(bound);

  detail::append_chunk(out, "IDAT", compressed.data(), compressed.size());
  detail::append_chunk(out, "IEND", nullptr, 0);
  return out;
}

inline void write_file(const std::filesystem::path& path, const Raster& raster) {
  const auto bytes = encode(raster);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed: " + path.string());
}

inline Raster decode(const std::vector<std::uint8_t>& file) {
  static const std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (file.size() < 8 || std::memcmp(file.data(), kSig, 8) != 0)
    throw DataError("not a PNG file");

  int width = 0, height = 0, bit_depth = 0, color_type = 0, interlace = 0;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  bool saw_ihdr = false, saw_iend = false;
  while (pos + 12 <= file.size() && !saw_iend) {
    const std::uint32_t len = detail::get_u32(&file[pos]);
    if (pos + 12 + len > file.size()) throw DataError("truncated PNG chunk");
    const char* type = reinterpret_cast<const char*>(&file[pos + 4]);
    const std::uint8_t* data = &file[pos + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw DataError("bad IHDR length");
      width = static_cast<int>(detail::get_u32(data));
      height = static_cast<int>(detail::get_u32(data + 4));
      bit_depth = data[8];
      color_type = data[9];
      interlace = data[12];
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr) throw DataError("PNG missing IHDR");
  if (width <= 0 || height <= 0) throw DataError("bad PNG dimensions");
  if (bit_depth != 8)
    throw DataError("unsupported PNG bit depth " + std::to_string(bit_depth) +
                    " (only 8 supported)");
  int src_channels = 0;
  switch (color_type) {
    case 0: src_channels = 1; break;
    case 2: src_channels = 3; break;
    case 4: src_channels = 2; break;
    case 6: src_channels = 4; break;
    default:
      throw DataError("unsupported PNG color type " + std::to_string(color_type));
  }
  if (interlace != 0) throw DataError("interlaced PNG not supported");

  const std::size_t stride = static_cast<std::size_t>(width) * src_channels;
  const std::size_t raw_size = (stride + 1) * height;
  std::vector<std::uint8_t> raw(raw_size);
  uLongf out_len = static_cast<uLongf>(raw_size);
  const int zrc = uncompress(raw.data(), &out_len, idat.data(),
                             static_cast<uLong>(idat.size()));
  if (zrc != Z_OK || out_len != raw_size)
    throw DataError("PNG scanline data corrupt");

  // Undo per-scanline filtering in place.
  std::vector<std::uint8_t> pix(stride * height);
  const int bpp = src_channels;
  for (int y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = &raw[y * (stride + 1) + 1];
    std::uint8_t* dst = &pix[y * stride];
    const std::uint8_t* up = y > 0 ? &pix[(y - 1) * stride] : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      const int left = i >= static_cast<std::size_t>(bpp) ? dst[i - bpp] : 0;
      const int above = up ? up[i] : 0;
      const int corner = (up && i >= static_cast<std::size_t>(bpp)) ? up[i - bpp] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += left; break;
        case 2: v += above; break;
        case 3: v += (left + above) / 2; break;
        case 4: v += detail::paeth(left, above, corner); break;
        default: throw DataError("unknown PNG filter type");
      }
      dst[i] = static_cast<std::uint8_t>(v & 0xff);
    }
  }

  Raster r;
  r.width = width;
  r.height = height;
  if (src_channels == 1 || src_channels == 3) {
    r.channels = src_channels;
    r.bytes = std::move(pix);
  } else {
    // strip alpha
    r.channels = src_channels - 1;
    r.bytes.resize(static_cast<std::size_t>(width) * height * r.channels);
    const int keep = r.channels;
    for (std::size_t p = 0; p < static_cast<std::size_t>(width) * height; ++p)
      for (int c = 0; c < keep; ++c)
        r.bytes[p * keep + c] = pix[p * src_channels + c];
  }
  return r;
}

inline Raster read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace png

// --- conversions between rasters and the library's value types ---

inline void save_image_png(const std::filesystem::path& path, const Image& image) {
  png::Raster r;
  r.width = image.width;
  r.height = image.height;
  r.channels = image.channels;
  r.bytes.resize(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    r.bytes[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(image.pixels[i], 0.0, 1.0) * 255.0));
  png::write_file(path, r);
}

inline Image load_image_png(const std::filesystem::path& path) {
  const png::Raster r = png::read_file(path);
  Image img(r.width, r.height, r.channels);
  for (std::size_t i = 0; i < r.bytes.size(); ++i)
    img.pixels[i] = r.bytes[i] / 255.0;
  return img;
}

// Masks ride as single-channel 8-bit PNGs, 0 = background, 255 = foreground.
inline void save_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  png::Raster r;
  r.width = mask.width;
  r.height = mask.height;
  r.channels = 1;
  r.bytes.resize(mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i)
    r.bytes[i] = mask.bits[i] ? 255 : 0;
  png::write_file(path, r);
}

inline BinaryMask load_mask_png(const std::filesystem::path& path) {
  const png::Raster r = png::read_file(path);
  if (r.channels != 1)
    throw DataError("mask PNG must be single-channel: " + path.string());
  BinaryMask m(r.width, r.height);
  for (std::size_t i = 0; i < r.bytes.size(); ++i)
    m.bits[i] = r.bytes[i] > 127 ? 1 : 0;
  return m;
}

inline void save_soft_png(const std::filesystem::path& path, const SoftMask& soft) {
  png::Raster r;
  r.width = soft.width;
  r.height = soft.height;
  r.channels = 1;
  r.bytes.resize(soft.values.size());
  for (std::size_t i = 0; i < soft.values.size(); ++i)
    r.bytes[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(soft.values[i], 0.0, 1.0) * 255.0));
  png::write_file(path, r);
}

inline SoftMask load_soft_png(const std::filesystem::path& path) {
  const png::Raster r = png::read_file(path);
  if (r.channels != 1)
    throw DataError("soft-mask PNG must be single-channel: " + path.string());
  SoftMask s(r.width, r.height);
  for (std::size_t i = 0; i < r.bytes.size(); ++i) s.values[i] = r.bytes[i] / 255.0;
  return s;
}

}  // namespace currseg
