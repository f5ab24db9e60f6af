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

#include "looklab/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "looklab/errors.h"

namespace looklab {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DimensionError("negative image size");
  pixels_.resize(static_cast<size_t>(width) * height * 3);
  for (size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::vector<uint8_t>& bytes, size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
    tok.push_back(static_cast<char>(bytes[pos++]));
  }
  return tok;
}

int parse_dim(const std::string& tok) {
  if (tok.empty() || tok.size() > 6 ||
      !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); })) {
    throw DecodeError("bad PNM header field '" + tok + "'");
  }
  return std::stoi(tok);
}

}  // namespace

Image decode_pnm(const std::vector<uint8_t>& bytes) {
  size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  if (magic != "P6" && magic != "P5") throw DecodeError("not a binary PPM/PGM image");
  const int w = parse_dim(next_token(bytes, pos));
  const int h = parse_dim(next_token(bytes, pos));
  const int maxval = parse_dim(next_token(bytes, pos));
  if (w <= 0 || h <= 0) throw DecodeError("PNM image has zero size");
  if (maxval != 255) throw DecodeError("only maxval 255 PNM is supported");
  ++pos;  // single whitespace after maxval
  const size_t channels = magic == "P6" ? 3 : 1;
  const size_t need = static_cast<size_t>(w) * h * channels;
  if (pos + need > bytes.size()) throw DecodeError("truncated PNM pixel data");
  Image img(w, h);
  auto& px = img.pixels();
  if (channels == 3) {
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), need, px.begin());
  } else {
    for (size_t i = 0; i < need; ++i) {
      px[i * 3] = px[i * 3 + 1] = px[i * 3 + 2] = bytes[pos + i];
    }
  }
  return img;
}

Image read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open image '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  try {
    return decode_pnm(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

std::vector<uint8_t> encode_ppm(const Image& image) {
  const std::string header = "P6\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels().begin(), image.pixels().end());
  return out;
}

void write_image(const std::string& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write image '" + path + "'");
  const auto bytes = encode_ppm(image);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::vector<uint8_t> encode_bmp(const Image& image) {
  const int w = image.width();
  const int h = image.height();
  const int row = (w * 3 + 3) & ~3;
  const uint32_t data_size = static_cast<uint32_t>(row) * h;
  const uint32_t file_size = 54 + data_size;
  std::vector<uint8_t> out(file_size, 0);
  auto put32 = [&](size_t at, uint32_t v) {
    for (int i = 0; i < 4; ++i) out[at + i] = static_cast<uint8_t>(v >> (8 * i));
  };
  out[0] = 'B';
  out[1] = 'M';
  put32(2, file_size);
  put32(10, 54);
  put32(14, 40);
  put32(18, static_cast<uint32_t>(w));
  put32(22, static_cast<uint32_t>(h));
  out[26] = 1;
  out[28] = 24;
  put32(34, data_size);
  for (int y = 0; y < h; ++y) {
    uint8_t* dst = &out[54 + static_cast<size_t>(h - 1 - y) * row];
    for (int x = 0; x < w; ++x) {
      const Rgb c = image.at(x, y);
      dst[x * 3] = c.b;
      dst[x * 3 + 1] = c.g;
      dst[x * 3 + 2] = c.r;
    }
  }
  return out;
}

Image crop(const Image& image, int x0, int y0, int x1, int y1) {
  if (x0 < 0 || y0 < 0 || x1 > image.width() || y1 > image.height() || x0 >= x1 ||
      y0 >= y1) {
    throw OutOfBoundsError("crop rectangle outside image");
  }
  Image out(x1 - x0, y1 - y0);
  for (int y = y0; y < y1; ++y) {
    const auto* src = &image.pixels()[(static_cast<size_t>(y) * image.width() + x0) * 3];
    std::copy_n(src, static_cast<size_t>(x1 - x0) * 3,
                &out.pixels()[static_cast<size_t>(y - y0) * out.width() * 3]);
  }
  return out;
}

Image resize_bilinear(const Image& image, int width, int height) {
  if (image.empty()) throw DimensionError("cannot resize an empty image");
  if (width == image.width() && height == image.height()) return image;
  Image out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      const Rgb a = image.at(x0, y0), b = image.at(x1, y0);
      const Rgb c = image.at(x0, y1), d = image.at(x1, y1);
      auto mix = [&](uint8_t pa, uint8_t pb, uint8_t pc, uint8_t pd) {
        const double top = pa + (pb - pa) * wx;
        const double bot = pc + (pd - pc) * wx;
        return static_cast<uint8_t>(std::lround(top + (bot - top) * wy));
      };
      out.set(x, y, {mix(a.r, b.r, c.r, d.r), mix(a.g, b.g, c.g, d.g),
                     mix(a.b, b.b, c.b, d.b)});
    }
  }
  return out;
}

void fill_rect(Image& image, int x0, int y0, int x1, int y1, Rgb color) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, image.width());
  y1 = std::min(y1, image.height());
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) image.set(x, y, color);
}

void fill_circle(Image& image, double cx, double cy, double radius, Rgb color) {
  const int x0 = static_cast<int>(std::floor(cx - radius));
  const int x1 = static_cast<int>(std::ceil(cx + radius));
  const int y0 = static_cast<int>(std::floor(cy - radius));
  const int y1 = static_cast<int>(std::ceil(cy + radius));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      if (dx * dx + dy * dy <= radius * radius) image.set_clipped(x, y, color);
    }
  }
}

void draw_line(Image& image, double x0, double y0, double x1, double y1,
               double thickness, Rgb color) {
  const double len = std::hypot(x1 - x0, y1 - y0);
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    fill_circle(image, x0 + (x1 - x0) * t, y0 + (y1 - y0) * t, thickness / 2, color);
  }
}

}  // namespace looklab
