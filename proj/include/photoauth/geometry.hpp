#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "photoauth/error.hpp"

namespace photoauth {

/// Photo dimensions in pixels.
struct Resolution {
  int width = 1920;
  int height = 1080;

  Resolution() = default;
  Resolution(int w, int h) : width(w), height(h) {
    if (w <= 0 || h <= 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "resolution must be positive, got " + std::to_string(w) + "x" + std::to_string(h));
    }
  }

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Axis-aligned rectangle in photo pixel coordinates, origin top-left.
///
/// Boxes are continuous regions: (x, y) is the top-left corner and the box
/// spans [x, x + width) x [y, y + height). Zero-area boxes cannot be built,
/// which keeps every ratio below well defined.
class BoundingBox {
 public:
  BoundingBox(double x, double y, double width, double height)
      : x_(x), y_(y), width_(width), height_(height) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(width) || !std::isfinite(height)) {
      throw Error(ErrorCode::InvalidBox, "box coordinates must be finite");
    }
    if (x < 0 || y < 0) throw Error(ErrorCode::InvalidBox, "box origin must be non-negative");
    if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidBox, "box must have positive area");
  }

  // OCR engines report corner pairs; this is the ingestion point for them.
  static BoundingBox from_corners(double left, double top, double right, double bottom) {
    return BoundingBox(left, top, right - left, bottom - top);
  }

  [[nodiscard]] double x() const noexcept { return x_; }
  [[nodiscard]] double y() const noexcept { return y_; }
  [[nodiscard]] double width() const noexcept { return width_; }
  [[nodiscard]] double height() const noexcept { return height_; }
  [[nodiscard]] double right() const noexcept { return x_ + width_; }
  [[nodiscard]] double bottom() const noexcept { return y_ + height_; }

  [[nodiscard]] bool contains(const BoundingBox& other) const noexcept {
    return other.x_ >= x_ && other.y_ >= y_ && other.right() <= right() && other.bottom() <= bottom();
  }

  [[nodiscard]] bool within(const Resolution& res) const noexcept {
    return right() <= res.width && bottom() <= res.height;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_;
  double y_;
  double width_;
  double height_;
};

inline double area(const BoundingBox& b) noexcept { return b.width() * b.height(); }

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
  if (w <= 0 || h <= 0) return 0.0;
  return w * h;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double inter = intersection_area(a, b);
  return inter / (area(a) + area(b) - inter);
}

/// Fraction of the text box covered by the address bar. Not symmetric: the
/// denominator is always the text box.
inline double cover_rate(const BoundingBox& text, const BoundingBox& addrbar) noexcept {
  return std::min(1.0, intersection_area(text, addrbar) / area(text));
}

/// Maps a box from one photo resolution to another with a single uniform
/// scale factor (aspect ratio kept, no letterbox offset).
inline BoundingBox rescale_box(const BoundingBox& b, const Resolution& from, const Resolution& to) {
  if (!b.within(from)) throw Error(ErrorCode::BoxOutOfBounds, "box exceeds source resolution");
  if (from == to) return b;
  const double scale = std::min(static_cast<double>(to.width) / from.width,
                                static_cast<double>(to.height) / from.height);
  return BoundingBox(b.x() * scale, b.y() * scale, b.width() * scale, b.height() * scale);
}

}  // namespace photoauth
