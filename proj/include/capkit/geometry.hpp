#pragma once

#include <algorithm>
#include <compare>

namespace capkit {

/// Axis-aligned box in normalized image coordinates: origin top-left,
/// x rightward, y downward, all coordinates in [0,1] with x0 < x1, y0 < y1.
struct BoundingBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    [[nodiscard]] double width() const { return x1 - x0; }
    [[nodiscard]] double height() const { return y1 - y0; }
    [[nodiscard]] double area() const { return width() * height(); }

    // Edges exactly at 0 or 1 are accepted; real detector output lands there.
    [[nodiscard]] bool valid() const {
        return 0.0 <= x0 && x0 < x1 && x1 <= 1.0 &&
               0.0 <= y0 && y0 < y1 && y1 <= 1.0;
    }

    friend auto operator<=>(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection over union of two boxes, in [0,1].
inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix0 = std::max(a.x0, b.x0);
    const double iy0 = std::max(a.y0, b.y0);
    const double ix1 = std::min(a.x1, b.x1);
    const double iy1 = std::min(a.y1, b.y1);
    const double iw = std::max(0.0, ix1 - ix0);
    const double ih = std::max(0.0, iy1 - iy0);
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace capkit
