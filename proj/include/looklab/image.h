/* Copyright 2026 The LookLab Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LOOKLAB_IMAGE_H_
#define LOOKLAB_IMAGE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace looklab {

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// 8-bit RGB raster, row-major, interleaved.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Rgb at(int x, int y) const {
    const uint8_t* p = &pixels_[(static_cast<size_t>(y) * width_ + x) * 3];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    uint8_t* p = &pixels_[(static_cast<size_t>(y) * width_ + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  // Ignores out-of-range coordinates.
  void set_clipped(int x, int y, Rgb c) {
    if (x >= 0 && y >= 0 && x < width_ && y < height_) set(x, y, c);
  }

  const std::vector<uint8_t>& pixels() const { return pixels_; }
  std::vector<uint8_t>& pixels() { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> pixels_;
};

// Binary PPM (P6) and PGM (P5, expanded to gray RGB), maxval 255.
// Throws DecodeError on anything else.
Image decode_pnm(const std::vector<uint8_t>& bytes);
Image read_image(const std::string& path);
std::vector<uint8_t> encode_ppm(const Image& image);
void write_image(const std::string& path, const Image& image);
// 24-bit BMP, for browsers (the review UI cannot render PNM).
std::vector<uint8_t> encode_bmp(const Image& image);

// Integer crop [x0, x1) x [y0, y1); the rectangle must lie inside the image.
Image crop(const Image& image, int x0, int y0, int x1, int y1);
Image resize_bilinear(const Image& image, int width, int height);

// Drawing primitives used by the synthetic scene generator.
void fill_rect(Image& image, int x0, int y0, int x1, int y1, Rgb color);
void fill_circle(Image& image, double cx, double cy, double radius, Rgb color);
void draw_line(Image& image, double x0, double y0, double x1, double y1,
               double thickness, Rgb color);

}  // namespace looklab

#endif  // LOOKLAB_IMAGE_H_
