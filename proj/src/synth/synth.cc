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

#include "looklab/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "looklab/errors.h"
#include "looklab/jsonl.h"
#include "looklab/keypoints.h"

namespace looklab::synth {

namespace fs = std::filesystem;
using pose::PoseLabel;

namespace {

struct Pt {
  double x, y;
};

enum class PrimType { kCapsule, kRect, kCircle };

struct Prim {
  PrimType type;
  Pt a, b;  // capsule ends / rect corners / circle centre in a
  double r = 0.0;
};

struct Part {
  std::vector<Prim> prims;
  int slot = -1;  // garment slot, or -1 for the body
  Rgb color;
};

struct Bounds {
  double x0 = 1e18, y0 = 1e18, x1 = -1e18, y1 = -1e18;
  void add(double x, double y) {
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
  void add(const Bounds& o) {
    add(o.x0, o.y0);
    add(o.x1, o.y1);
  }
};

Bounds prim_bounds(const Prim& p) {
  Bounds b;
  switch (p.type) {
    case PrimType::kCapsule:
      b.add(std::min(p.a.x, p.b.x) - p.r, std::min(p.a.y, p.b.y) - p.r);
      b.add(std::max(p.a.x, p.b.x) + p.r, std::max(p.a.y, p.b.y) + p.r);
      break;
    case PrimType::kRect:
      b.add(p.a.x, p.a.y);
      b.add(p.b.x, p.b.y);
      break;
    case PrimType::kCircle:
      b.add(p.a.x - p.r, p.a.y - p.r);
      b.add(p.a.x + p.r, p.a.y + p.r);
      break;
  }
  return b;
}

Bounds part_bounds(const Part& part) {
  Bounds b;
  for (const auto& p : part.prims) b.add(prim_bounds(p));
  return b;
}

bool inside(const Prim& p, double x, double y) {
  switch (p.type) {
    case PrimType::kCapsule: {
      const double dx = p.b.x - p.a.x, dy = p.b.y - p.a.y;
      const double len2 = dx * dx + dy * dy;
      double t = len2 > 0 ? ((x - p.a.x) * dx + (y - p.a.y) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = p.a.x + t * dx - x, ey = p.a.y + t * dy - y;
      return ex * ex + ey * ey <= p.r * p.r;
    }
    case PrimType::kRect:
      return x >= p.a.x && x <= p.b.x && y >= p.a.y && y <= p.b.y;
    case PrimType::kCircle:
      return (x - p.a.x) * (x - p.a.x) + (y - p.a.y) * (y - p.a.y) <= p.r * p.r;
  }
  return false;
}

Prim capsule(Pt a, Pt b, double r) { return {PrimType::kCapsule, a, b, r}; }
Prim rect(double x0, double y0, double x1, double y1) {
  return {PrimType::kRect, {x0, y0}, {x1, y1}, 0.0};
}
Prim circle(Pt c, double r) { return {PrimType::kCircle, c, c, r}; }
Pt lerp(Pt a, Pt b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }

enum Joint {
  kNose, kLeftEye, kRightEye, kLeftEar, kRightEar, kLeftShoulder, kRightShoulder, kLeftElbow,
  kRightElbow, kLeftWrist, kRightWrist, kLeftHip, kRightHip, kLeftKnee, kRightKnee,
  kLeftAnkle, kRightAnkle, kNumJoints
};

// Front view on a 64 x 96 canvas; the person's left is image right.
constexpr std::array<Pt, kNumJoints> kCanonical = {{{32, 14},
                                                    {34.5, 11.5},
                                                    {29.5, 11.5},
                                                    {38, 13},
                                                    {26, 13},
                                                    {41, 24},
                                                    {23, 24},
                                                    {44, 37},
                                                    {20, 37},
                                                    {46, 49},
                                                    {18, 49},
                                                    {37, 52},
                                                    {27, 52},
                                                    {38, 70},
                                                    {26, 70},
                                                    {38, 87},
                                                    {26, 87}}};
constexpr Pt kHeadCentre = {32, 13};
constexpr double kHeadRadius = 6.5;
constexpr Pt kCanvasCentre = {32, 48};

Rgb view_color(PoseLabel v) {
  switch (v) {
    case PoseLabel::kFront: return {205, 60, 60};
    case PoseLabel::kBack: return {60, 70, 205};
    case PoseLabel::kLeft: return {50, 165, 60};
    case PoseLabel::kRight: return {215, 175, 30};
    case PoseLabel::kDetailed: break;
  }
  return {120, 120, 120};
}

struct Figure {
  std::array<Pt, kNumJoints> joints;
  std::vector<Part> parts;
};

std::vector<Prim> garment_prims(GarmentKind kind, const std::array<Pt, kNumJoints>& j) {
  std::vector<Prim> out;
  switch (kind) {
    case GarmentKind::kTop: {
      const double cx = (j[kLeftShoulder].x + j[kRightShoulder].x) / 2;
      const double hw = std::max(std::abs(j[kLeftShoulder].x - j[kRightShoulder].x) / 2 + 1.5, 5.0);
      const double sy = std::min(j[kLeftShoulder].y, j[kRightShoulder].y);
      const double hy = (j[kLeftHip].y + j[kRightHip].y) / 2;
      out.push_back(rect(cx - hw, sy - 1.5, cx + hw, hy - 0.5));
      out.push_back(capsule(j[kLeftShoulder], lerp(j[kLeftShoulder], j[kLeftElbow], 0.45), 3.0));
      out.push_back(capsule(j[kRightShoulder], lerp(j[kRightShoulder], j[kRightElbow], 0.45), 3.0));
      break;
    }
    case GarmentKind::kBottom: {
      const double cx = (j[kLeftHip].x + j[kRightHip].x) / 2;
      const double hw = std::max(std::abs(j[kLeftHip].x - j[kRightHip].x) / 2 + 3.0, 5.5);
      const double hy = (j[kLeftHip].y + j[kRightHip].y) / 2;
      out.push_back(rect(cx - hw, hy - 1, cx + hw, hy + 3));
      out.push_back(capsule(j[kLeftHip], lerp(j[kLeftHip], j[kLeftKnee], 0.5), 3.5));
      out.push_back(capsule(j[kRightHip], lerp(j[kRightHip], j[kRightKnee], 0.5), 3.5));
      break;
    }
    case GarmentKind::kBag: {
      const Pt w = j[kRightWrist];
      // Hangs outboard of the wrist, clear of the hips.
      out.push_back(capsule(w, {w.x - 2, w.y + 3.5}, 0.9));
      out.push_back(rect(w.x - 10, w.y + 3, w.x + 2, w.y + 13));
      break;
    }
  }
  return out;
}

Figure build_figure(const WorldConfig& config, PoseLabel view,
                    const std::vector<const Item*>& worn, Rng& rng) {
  Figure f;
  f.joints = kCanonical;
  auto& j = f.joints;
  // Limb variation.
  for (int side = 0; side < 2; ++side) {
    const double dx = rng.uniform(-3, 3), dy = rng.uniform(-2, 2);
    const double sign = side == 0 ? 1.0 : -1.0;
    const int elbow = side == 0 ? kLeftElbow : kRightElbow;
    const int wrist = side == 0 ? kLeftWrist : kRightWrist;
    j[elbow].x += sign * 0.5 * dx;
    j[elbow].y += 0.5 * dy;
    j[wrist].x += sign * dx;
    j[wrist].y += dy;
  }
  const double spread = rng.uniform(-2, 2);
  j[kLeftKnee].x += 0.5 * spread;
  j[kRightKnee].x -= 0.5 * spread;
  j[kLeftAnkle].x += spread;
  j[kRightAnkle].x -= spread;
  for (auto& p : j) {
    p.x += rng.uniform(-0.7, 0.7);
    p.y += rng.uniform(-0.7, 0.7);
  }
  Pt head = kHeadCentre;

  auto map_x = [&](double x, bool face) {
    switch (view) {
      case PoseLabel::kBack: return 64.0 - x;
      case PoseLabel::kLeft: return 32.0 + 0.3 * (x - 32.0) - (face ? 4.0 : 0.0);
      case PoseLabel::kRight: return 32.0 - 0.3 * (x - 32.0) + (face ? 4.0 : 0.0);
      default: return x;
    }
  };
  for (int k = 0; k < kNumJoints; ++k) j[k].x = map_x(j[k].x, k <= kRightEar);
  head.x = map_x(head.x, false) + (view == PoseLabel::kLeft ? -2.0 : view == PoseLabel::kRight ? 2.0 : 0.0);

  const Rgb skin = view_color(view);
  const double foot_dx = view == PoseLabel::kLeft ? -3.0 : view == PoseLabel::kRight ? 3.0 : 0.0;
  Part body;
  body.color = skin;
  for (auto [h, k, a] : {std::array<int, 3>{kLeftHip, kLeftKnee, kLeftAnkle},
                         std::array<int, 3>{kRightHip, kRightKnee, kRightAnkle}}) {
    body.prims.push_back(capsule(j[h], j[k], 1.7));
    body.prims.push_back(capsule(j[k], j[a], 1.7));
    body.prims.push_back(capsule(j[a], {j[a].x + foot_dx, j[a].y + 2.5}, 1.3));
  }
  const Pt neck = {(j[kLeftShoulder].x + j[kRightShoulder].x) / 2,
                   (j[kLeftShoulder].y + j[kRightShoulder].y) / 2 - 2};
  const Pt pelvis = lerp(j[kLeftHip], j[kRightHip], 0.5);
  body.prims.push_back(capsule(neck, pelvis, 2.5));
  body.prims.push_back(capsule(j[kLeftShoulder], j[kRightShoulder], 1.6));
  for (auto [s, e, w] : {std::array<int, 3>{kLeftShoulder, kLeftElbow, kLeftWrist},
                         std::array<int, 3>{kRightShoulder, kRightElbow, kRightWrist}}) {
    body.prims.push_back(capsule(j[s], j[e], 1.5));
    body.prims.push_back(capsule(j[e], j[w], 1.5));
  }
  f.parts.push_back(body);

  auto add_garments = [&](GarmentKind kind) {
    for (size_t slot = 0; slot < worn.size(); ++slot) {
      if (worn[slot] == nullptr || config.articles[slot].kind != kind) continue;
      Part g;
      g.slot = static_cast<int>(slot);
      g.prims = garment_prims(kind, j);
      f.parts.push_back(g);
    }
  };
  add_garments(GarmentKind::kBottom);
  add_garments(GarmentKind::kTop);
  Part head_part;
  head_part.color = skin;
  head_part.prims.push_back(circle(head, kHeadRadius));
  f.parts.push_back(head_part);
  add_garments(GarmentKind::kBag);
  return f;
}

void transform(Figure& f, double s, double tx, double ty) {
  auto tp = [&](Pt p) {
    return Pt{tx + s * (p.x - kCanvasCentre.x), ty + s * (p.y - kCanvasCentre.y)};
  };
  for (auto& p : f.joints) p = tp(p);
  for (auto& part : f.parts) {
    for (auto& prim : part.prims) {
      prim.a = tp(prim.a);
      prim.b = tp(prim.b);
      prim.r *= s;
    }
  }
}

Image background(int w, int h, Rng& rng) {
  const int base = static_cast<int>(rng.uniform(185, 235));
  const Rgb c{static_cast<uint8_t>(std::clamp(base + static_cast<int>(rng.uniform(-15, 15)), 0, 255)),
              static_cast<uint8_t>(std::clamp(base + static_cast<int>(rng.uniform(-15, 15)), 0, 255)),
              static_cast<uint8_t>(std::clamp(base + static_cast<int>(rng.uniform(-15, 15)), 0, 255))};
  return Image(w, h, c);
}

void add_noise(Image& img, Rng& rng, double amplitude) {
  for (auto& v : img.pixels()) {
    v = static_cast<uint8_t>(std::clamp(v + static_cast<int>(std::lround(rng.uniform(-amplitude, amplitude))), 0, 255));
  }
}

struct PaintResult {
  std::vector<Bounds> garment_pixels;  // per slot, painted pixel extents
  std::vector<int> garment_counts;
};

PaintResult paint(Image& img, const std::vector<Part>& parts, const std::vector<const Item*>& worn) {
  PaintResult res;
  res.garment_pixels.resize(worn.size());
  res.garment_counts.assign(worn.size(), 0);
  for (const Part& part : parts) {
    const Bounds b = part_bounds(part);
    const int x0 = std::max(0, static_cast<int>(std::floor(b.x0)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.y0)));
    const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(b.x1)));
    const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(b.y1)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        bool hit = false;
        for (const Prim& p : part.prims) hit = hit || inside(p, px, py);
        if (!hit) continue;
        if (part.slot < 0) {
          img.set(x, y, part.color);
          continue;
        }
        const double u = (px - b.x0) / (b.x1 - b.x0);
        const double v = (py - b.y0) / (b.y1 - b.y0);
        img.set(x, y, texture_at(*worn[part.slot], u, v));
        res.garment_pixels[part.slot].add(x, y);
        ++res.garment_counts[part.slot];
      }
    }
  }
  return res;
}

Rgb hsv(double h, double s, double v) {
  h = std::fmod(h, 1.0) * 6.0;
  const int i = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double r = v, g = t, b = p;
  switch (i) {
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    case 5: r = v; g = p; b = q; break;
    default: break;
  }
  auto c = [](double x) { return static_cast<uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255)); };
  return {c(r), c(g), c(b)};
}

std::string zero_pad(int v, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

std::vector<Item> make_catalog(const WorldConfig& config) {
  std::vector<Item> items;
  Rng rng(config.seed);
  for (size_t t = 0; t < config.articles.size(); ++t) {
    for (int i = 0; i < config.items_per_type; ++i) {
      Item it;
      std::string stem = config.articles[t].article_type;
      std::replace(stem.begin(), stem.end(), ' ', '-');
      std::transform(stem.begin(), stem.end(), stem.begin(), ::tolower);
      it.product_id = stem + "-" + zero_pad(i, 3);
      it.article_index = t;
      const double hue = std::fmod(i * 0.618034 + t * 0.21 + rng.uniform(0, 0.02), 1.0);
      it.base = hsv(hue, 0.55 + 0.35 * ((i / 2) % 2), 0.55 + 0.4 * ((i / 3) % 2));
      it.accent = hsv(hue + 0.35 + 0.3 * (i % 3) / 2.0, 0.6, (i % 2) ? 0.25 : 0.95);
      it.pattern = i % 4;
      it.frequency = 2 + (i / 4) % 2;
      items.push_back(it);
    }
  }
  return items;
}

Rgb texture_at(const Item& item, double u, double v) {
  const int f = item.frequency;
  bool accent = false;
  switch (item.pattern) {
    case 0: accent = static_cast<int>(std::floor(v * f * 2)) % 2 == 1; break;
    case 1: accent = static_cast<int>(std::floor(u * f * 2)) % 2 == 1; break;
    case 2: accent = (static_cast<int>(std::floor(u * f)) + static_cast<int>(std::floor(v * f))) % 2 == 1; break;
    default: accent = u + v > 1.0; break;
  }
  return accent ? item.accent : item.base;
}

Image render_catalog_image(const WorldConfig& config, const Item& item) {
  Figure f;
  f.joints = kCanonical;
  Part g;
  g.slot = 0;
  g.prims = garment_prims(config.articles[item.article_index].kind, f.joints);
  f.parts.push_back(g);
  transform(f, 2.0, 64, 96);
  Image canvas(128, 192, {255, 255, 255});
  const auto res = paint(canvas, f.parts, {&item});
  const Bounds& b = res.garment_pixels[0];
  const int x0 = std::max(0, static_cast<int>(b.x0) - 2), y0 = std::max(0, static_cast<int>(b.y0) - 2);
  const int x1 = std::min(canvas.width(), static_cast<int>(b.x1) + 3);
  const int y1 = std::min(canvas.height(), static_cast<int>(b.y1) + 3);
  return crop(canvas, x0, y0, x1, y1);
}

Scene render_scene(const WorldConfig& config, const SceneRequest& request, Rng& rng) {
  if (request.worn.size() != config.articles.size()) {
    throw ValidationError("worn list must have one slot per article");
  }
  const int W = config.image_width, H = config.image_height;
  Scene scene;
  scene.view = request.view;
  scene.image = background(W, H, rng);
  Figure f = build_figure(config, request.view == PoseLabel::kDetailed ? PoseLabel::kFront : request.view,
                          request.worn, rng);
  const double sx = W / 64.0, sy = H / 96.0;

  if (request.view == PoseLabel::kDetailed) {
    // Close-up of the first worn item only.
    std::vector<Part> kept;
    for (const auto& p : f.parts) {
      if (p.slot >= 0) {
        kept.push_back(p);
        break;
      }
    }
    if (kept.empty()) throw ValidationError("detailed view needs a worn item");
    f.parts = kept;
    const Bounds b = part_bounds(f.parts[0]);
    const double s = std::min(0.8 * W / (b.x1 - b.x0), 0.7 * H / (b.y1 - b.y0)) * rng.uniform(0.85, 1.0);
    const double cx = (b.x0 + b.x1) / 2, cy = (b.y0 + b.y1) / 2;
    transform(f, s, W / 2.0 - s * (cx - kCanvasCentre.x) + rng.uniform(-2, 2),
              H / 2.0 - s * (cy - kCanvasCentre.y) + rng.uniform(-3, 3));
    for (auto& p : f.joints) p = {-1e3, -1e3};
  } else {
    Bounds all;
    for (const auto& p : f.parts) all.add(part_bounds(p));
    double head_max = -1e18;
    for (int k = kNose; k <= kRightEar; ++k) head_max = std::max(head_max, f.joints[k].y);
    const double ankle_min = std::min(f.joints[kLeftAnkle].y, f.joints[kRightAnkle].y);
    double s = 1.0, tx = W / 2.0 + rng.uniform(-3, 3), ty = H / 2.0;
    switch (request.framing) {
      case Framing::kFull: {
        s = rng.uniform(0.78, 0.98) * std::min(sx, sy);
        const double m = 3.0;
        const double ylo = m - s * (all.y0 - kCanvasCentre.y);
        const double yhi = H - m - s * (all.y1 - kCanvasCentre.y);
        const double xlo = m - s * (all.x0 - kCanvasCentre.x);
        const double xhi = W - m - s * (all.x1 - kCanvasCentre.x);
        ty = ylo <= yhi ? rng.uniform(ylo, yhi) : (ylo + yhi) / 2;
        tx = xlo <= xhi ? rng.uniform(xlo, xhi) : (xlo + xhi) / 2;
        break;
      }
      case Framing::kHeadCut:
        s = rng.uniform(1.05, 1.35) * std::min(sx, sy);
        ty = -6.0 - rng.uniform(0, 5) - s * (head_max - kCanvasCentre.y);
        break;
      case Framing::kFeetCut:
        s = rng.uniform(1.05, 1.35) * std::min(sx, sy);
        ty = H + 5.0 + rng.uniform(0, 5) - s * (ankle_min - kCanvasCentre.y);
        break;
      case Framing::kBothCut:
        s = rng.uniform(1.55, 1.75) * std::min(sx, sy);
        ty = -6.0 - rng.uniform(0, 3) - s * (head_max - kCanvasCentre.y);
        break;
    }
    transform(f, s, tx, ty);
  }

  const auto res = paint(scene.image, f.parts, request.worn);
  add_noise(scene.image, rng, 6.0);

  for (const Pt& p : f.joints) {
    const bool vis = p.x >= 0 && p.y >= 0 && p.x < W && p.y < H;
    scene.keypoints.push_back({vis ? p.x : 0.0, vis ? p.y : 0.0, vis ? 2.0 : 0.0});
  }
  bool head = false;
  for (int k = kNose; k <= kRightEar; ++k) head = head || scene.keypoints[k][2] > 0;
  scene.full_shot = head && scene.keypoints[kLeftAnkle][2] > 0 && scene.keypoints[kRightAnkle][2] > 0;

  for (size_t slot = 0; slot < request.worn.size(); ++slot) {
    if (request.worn[slot] == nullptr || res.garment_counts[slot] < 12) continue;
    const Bounds& b = res.garment_pixels[slot];
    scene.boxes.push_back({{b.x0, b.y0, b.x1 + 1, b.y1 + 1}, config.articles[slot].article_type});
    scene.box_product_ids.push_back(request.worn[slot]->product_id);
  }
  return scene;
}

namespace {

PoseLabel random_view(Rng& rng) {
  const double r = rng.uniform();
  if (r < 0.40) return PoseLabel::kFront;
  if (r < 0.55) return PoseLabel::kBack;
  if (r < 0.70) return PoseLabel::kLeft;
  if (r < 0.85) return PoseLabel::kRight;
  return PoseLabel::kDetailed;
}

Framing random_framing(Rng& rng) {
  const double r = rng.uniform();
  if (r < 0.60) return Framing::kFull;
  if (r < 0.74) return Framing::kHeadCut;
  if (r < 0.87) return Framing::kFeetCut;
  return Framing::kBothCut;
}

std::vector<std::vector<const Item*>> by_slot(const WorldConfig& config, const std::vector<Item>& catalog) {
  std::vector<std::vector<const Item*>> out(config.articles.size());
  for (const auto& it : catalog) out[it.article_index].push_back(&it);
  return out;
}

}  // namespace

Scene random_scene(const WorldConfig& config, const std::vector<Item>& catalog, Rng& rng) {
  const auto slots = by_slot(config, catalog);
  SceneRequest req;
  req.view = random_view(rng);
  req.framing = random_framing(rng);
  req.worn.assign(slots.size(), nullptr);
  const size_t must = rng.below(slots.size());
  for (size_t s = 0; s < slots.size(); ++s) {
    if (slots[s].empty()) continue;
    if (s == must || rng.bernoulli(0.85)) req.worn[s] = slots[s][rng.below(slots[s].size())];
  }
  if (req.view == PoseLabel::kDetailed) {
    // Detailed shots show a single item.
    for (size_t s = 0; s < slots.size(); ++s) {
      if (s != must) req.worn[s] = nullptr;
    }
  }
  return render_scene(config, req, rng);
}

namespace {

Json keypoint_row(const std::string& path, const Scene& s) {
  return {{"image_path", path}, {"keypoints", s.keypoints}};
}

Json gt_row(const std::string& path, const Scene& s) {
  Json boxes = Json::array();
  for (size_t i = 0; i < s.boxes.size(); ++i) {
    Json b = detect::box_to_json(s.boxes[i].box);
    b["article_type"] = s.boxes[i].article_type;
    boxes.push_back(b);
  }
  return {{"image_path", path}, {"boxes", boxes}};
}

}  // namespace

void generate_world(const std::string& dir, const WorldConfig& config, const DatasetSizes& sizes) {
  const fs::path root(dir);
  for (const char* sub : {"catalog", "train/images", "train/wild", "eval/fullshot", "eval/pose", "pdps"}) {
    fs::create_directories(root / sub);
  }
  const auto catalog = make_catalog(config);
  const auto slots = by_slot(config, catalog);

  // Taxonomy restricted to the world's article types.
  {
    std::vector<std::pair<std::string, std::vector<std::string>>> cats;
    for (const auto& a : config.articles) {
      auto it = std::find_if(cats.begin(), cats.end(), [&](auto& c) { return c.first == a.broad_category; });
      if (it == cats.end()) {
        cats.push_back({a.broad_category, {a.article_type}});
      } else {
        it->second.push_back(a.article_type);
      }
    }
    write_text_file((root / "taxonomy.json").string(), detect::ArticleTaxonomy(cats).to_json().dump(2) + "\n");
  }

  std::vector<Json> catalog_rows;
  for (const auto& it : catalog) {
    const std::string rel = "catalog/" + it.product_id + ".ppm";
    write_image((root / rel).string(), render_catalog_image(config, it));
    const auto& a = config.articles[it.article_index];
    catalog_rows.push_back({{"product_id", it.product_id},
                            {"article_type", a.article_type},
                            {"broad_category", a.broad_category},
                            {"image_path", rel}});
  }
  write_jsonl((root / "catalog.jsonl").string(), catalog_rows);

  // Training scenes.
  Rng rng(config.seed * 1000003 + 1);
  std::vector<Json> kp_rows, pose_rows, gt_rows, pair_rows;
  for (int i = 0; i < sizes.train_scenes + sizes.pair_scenes; ++i) {
    const Scene s = random_scene(config, catalog, rng);
    const std::string name = "scene_" + zero_pad(i, 4);
    if (i < sizes.train_scenes) {
      const std::string rel = "images/" + name + ".ppm";
      write_image((root / "train" / rel).string(), s.image);
      kp_rows.push_back(keypoint_row(rel, s));
      pose_rows.push_back({{"image_path", rel}, {"pose_label", pose::pose_name(s.view)}});
      gt_rows.push_back(gt_row(rel, s));
    }
    // Wild crops see detector-like framing: each side moves up to 2 px in
    // and 5 px out.
    std::vector<detect::Detection> dets;
    for (const auto& b : s.boxes) {
      detect::BoundingBox j = b.box;
      j.x_min -= std::round(rng.uniform(-2, 5));
      j.y_min -= std::round(rng.uniform(-2, 5));
      j.x_max += std::round(rng.uniform(-2, 5));
      j.y_max += std::round(rng.uniform(-2, 5));
      dets.push_back({j, b.article_type, 1.0});
    }
    const auto rois = detect::crop_rois(s.image, dets, detect::kDefaultPadFraction);
    for (const auto& roi : rois) {
      const std::string wrel = "wild/" + name + "_" + zero_pad(static_cast<int>(roi.detection_index), 1) + ".ppm";
      write_image((root / "train" / wrel).string(), roi.crop);
      pair_rows.push_back({{"wild_path", wrel},
                           {"catalog_path", "../catalog/" + s.box_product_ids[roi.detection_index] + ".ppm"},
                           {"garment_id", s.box_product_ids[roi.detection_index]},
                           {"article_type", roi.article_type}});
    }
  }
  write_jsonl((root / "train/keypoints.jsonl").string(), kp_rows);
  write_jsonl((root / "train/pose.jsonl").string(), pose_rows);
  write_jsonl((root / "train/detect_gt.jsonl").string(), gt_rows);
  write_jsonl((root / "train/pairs.jsonl").string(), pair_rows);

  // Full-shot evaluation: figures only (no detailed close-ups).
  Rng eval_rng(config.seed * 1000003 + 2);
  std::vector<Json> fs_rows;
  for (int i = 0; i < sizes.fullshot_eval; ++i) {
    Scene s;
    do {
      s = random_scene(config, catalog, eval_rng);
    } while (s.view == PoseLabel::kDetailed);
    const std::string rel = "fullshot/figure_" + zero_pad(i, 4) + ".ppm";
    write_image((root / "eval" / rel).string(), s.image);
    Json row = keypoint_row(rel, s);
    row["full_shot"] = s.full_shot;
    fs_rows.push_back(row);
  }
  write_jsonl((root / "eval/fullshot.jsonl").string(), fs_rows);

  std::vector<Json> pose_eval, gt_eval;
  for (int i = 0; i < sizes.pose_eval; ++i) {
    const Scene s = random_scene(config, catalog, eval_rng);
    const std::string rel = "pose/scene_" + zero_pad(i, 4) + ".ppm";
    write_image((root / "eval" / rel).string(), s.image);
    pose_eval.push_back({{"image_path", rel}, {"pose_label", pose::pose_name(s.view)}});
    gt_eval.push_back(gt_row(rel, s));
  }
  write_jsonl((root / "eval/pose.jsonl").string(), pose_eval);
  write_jsonl((root / "eval/detect_gt.jsonl").string(), gt_eval);

  // Product pages: one front full shot with every slot planted, plus views
  // that must be rejected (back, side, close-up, cropped front).
  Rng pdp_rng(config.seed * 1000003 + 3);
  std::vector<Json> pdp_rows, rel_rows, rel_primary, truth_rows;
  for (int i = 0; i < sizes.pdps; ++i) {
    const std::string id = "pdp-" + zero_pad(i, 3);
    const size_t primary = static_cast<size_t>(i) % slots.size();
    std::vector<const Item*> worn(slots.size());
    for (size_t s = 0; s < slots.size(); ++s) worn[s] = slots[s][pdp_rng.below(slots[s].size())];
    std::vector<std::pair<std::string, SceneRequest>> shots;
    shots.push_back({"front", {PoseLabel::kFront, Framing::kFull, worn}});
    shots.push_back({"back", {PoseLabel::kBack, Framing::kFull, worn}});
    shots.push_back({"side", {pdp_rng.bernoulli(0.5) ? PoseLabel::kLeft : PoseLabel::kRight, Framing::kFull, worn}});
    std::vector<const Item*> only(slots.size(), nullptr);
    only[primary] = worn[primary];
    shots.push_back({"detail", {PoseLabel::kDetailed, Framing::kFull, only}});
    shots.push_back({"crop", {PoseLabel::kFront, pdp_rng.bernoulli(0.5) ? Framing::kHeadCut : Framing::kFeetCut, worn}});
    std::vector<std::string> paths;
    std::string selected;
    Json front_boxes;
    for (const auto& [tag, req] : shots) {
      const Scene s = render_scene(config, req, pdp_rng);
      const std::string rel = "pdps/" + id + "_" + tag + ".ppm";
      write_image((root / rel).string(), s.image);
      paths.push_back(rel);
      if (tag == "front") {
        selected = rel;
        front_boxes = gt_row(rel, s).at("boxes");
      }
    }
    pdp_rng.shuffle(paths);
    pdp_rows.push_back({{"request_id", id}, {"images", paths}, {"ugc", false}});
    Json articles = Json::object();
    for (size_t s = 0; s < slots.size(); ++s) {
      const std::string& type = config.articles[s].article_type;
      articles[type] = worn[s]->product_id;
      const Json row = {{"query_ref", id + "/" + type}, {"relevant", {worn[s]->product_id}}};
      rel_rows.push_back(row);
      if (s == primary) rel_primary.push_back(row);
    }
    truth_rows.push_back({{"request_id", id},
                          {"full_shot_image", selected},
                          {"boxes", front_boxes},
                          {"primary_article_type", config.articles[primary].article_type},
                          {"articles", articles}});
  }
  write_jsonl((root / "pdps.jsonl").string(), pdp_rows);
  write_jsonl((root / "relevance.jsonl").string(), rel_rows);
  write_jsonl((root / "relevance_primary.jsonl").string(), rel_primary);
  write_jsonl((root / "pdps_truth.jsonl").string(), truth_rows);
}

}  // namespace looklab::synth
