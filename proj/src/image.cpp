#include "rankher/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace rankher {

void RenderedImage::splat(double cx, double cy, double radius, double peak) {
  if (radius <= 0.0) return;
  const long r = static_cast<long>(std::ceil(radius));
  const long ix = static_cast<long>(std::floor(cx));
  const long iy = static_cast<long>(std::floor(cy));
  for (long row = iy - r; row <= iy + r; ++row) {
    if (row < 0 || row >= static_cast<long>(height)) continue;
    for (long col = ix - r; col <= ix + r; ++col) {
      if (col < 0 || col >= static_cast<long>(width)) continue;
      const double dx = (static_cast<double>(col) + 0.5) - cx;
      const double dy = (static_cast<double>(row) + 0.5) - cy;
      const double dist = std::sqrt(dx * dx + dy * dy);
      const double v = peak * std::max(0.0, 1.0 - dist / radius);
      double& px = at(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
      px = std::max(px, v);
    }
  }
}

void RenderedImage::line(double x0, double y0, double x1, double y1, double radius,
                         double peak) {
  const double dx = x1 - x0, dy = y1 - y0;
  const double len = std::sqrt(dx * dx + dy * dy);
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
  for (int i = 0; i <= steps; ++i) {
    const double f = static_cast<double>(i) / steps;
    splat(x0 + f * dx, y0 + f * dy, radius, peak);
  }
}

void RenderedImage::clamp01() {
  for (double& p : pixels) p = std::clamp(p, 0.0, 1.0);
}

Tensor RenderedImage::to_tensor() const {
  Tensor t = Tensor::zeros({1, height, width});
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double q = std::round(std::clamp(pixels[i], 0.0, 1.0) * 255.0);
    t.data[i] = q / 255.0;
  }
  return t;
}

void write_pgm(const RenderedImage& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (double p : img.pixels) {
    const double q = std::round(std::clamp(p, 0.0, 1.0) * 255.0);
    os.put(static_cast<char>(static_cast<std::uint8_t>(q)));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

RenderedImage read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string magic;
  is >> magic;
  if (magic != "P5") throw std::runtime_error("not a binary PGM: " + path);
  std::size_t w = 0, h = 0;
  int maxval = 0;
  is >> w >> h >> maxval;
  if (!is || w == 0 || h == 0 || maxval != 255)
    throw std::runtime_error("unsupported PGM header: " + path);
  is.get();  // single whitespace after maxval
  RenderedImage img(w, h);
  for (std::size_t i = 0; i < w * h; ++i) {
    const int c = is.get();
    if (c == EOF) throw std::runtime_error("truncated PGM: " + path);
    img.pixels[i] = static_cast<double>(c) / 255.0;
  }
  return img;
}

}  // namespace rankher
