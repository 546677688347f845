#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rankher/tensor.hpp"

namespace rankher {

using nn::Tensor;

// Grayscale raster, row-major, intensities in [0,1].
struct RenderedImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  RenderedImage() = default;
  RenderedImage(std::size_t w, std::size_t h)
      : width(w), height(h), pixels(w * h, 0.0) {}

  double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
  double at(std::size_t row, std::size_t col) const {
    return pixels[row * width + col];
  }

  // Additive splat of a soft disc centered at fractional pixel coordinates,
  // linear falloff over `radius` pixels, combined with max() so overlapping
  // elements stay identifiable. Out-of-frame centers clip silently.
  void splat(double cx, double cy, double radius, double peak);

  // Splats a line segment between two fractional pixel points.
  void line(double x0, double y0, double x1, double y1, double radius, double peak);

  void clamp01();

  // Network input with the same quantization the on-disk format applies, so
  // in-memory classification matches classification of a written-then-read file.
  Tensor to_tensor() const;
};

// Binary PGM (P5, maxval 255).
void write_pgm(const RenderedImage& img, const std::string& path);
RenderedImage read_pgm(const std::string& path);

}  // namespace rankher
