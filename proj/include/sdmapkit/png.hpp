#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sdmapkit {

/// Minimal non-interlaced 8-bit PNG writer. `channels` is 1 (gray), 3 (RGB) or 4 (RGBA);
/// `pixels` holds height rows of width * channels bytes.
std::vector<std::uint8_t> encode_png(std::size_t width, std::size_t height, int channels,
                                     std::span<const std::uint8_t> pixels);

/// 8-bit RGB image with a few drawing helpers for plots.
class RgbImage {
 public:
  RgbImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }

  void set(long x, long y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void fill_rect(long x0, long y0, long x1, long y1, std::uint8_t r, std::uint8_t g,
                 std::uint8_t b);
  /// Upper-case letters, digits and a few symbols in a 3x5 bitmap font.
  void draw_text(long x, long y, std::string_view text, int scale, std::uint8_t r,
                 std::uint8_t g, std::uint8_t b);
  std::vector<std::uint8_t> to_png() const;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace sdmapkit
