#pragma once

#include <cmath>
#include <compare>

namespace capkit {

/// 8-bit sRGB triplet, each channel in [0,255].
struct RgbColor {
    int r = 0;
    int g = 0;
    int b = 0;

    [[nodiscard]] bool valid() const {
        return 0 <= r && r <= 255 && 0 <= g && g <= 255 && 0 <= b && b <= 255;
    }

    friend auto operator<=>(const RgbColor&, const RgbColor&) = default;
};

/// Linear-light RGB, channels in [0,1]. Intermediate of the sRGB -> Lab chain.
struct LinearRgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
};

/// CIELab, D65 reference white, 2-degree observer. L in [0,100];
/// a and b are the chroma axes (practically within +-128).
struct LabColor {
    double L = 0.0;
    double a = 0.0;
    double b = 0.0;

    friend auto operator<=>(const LabColor&, const LabColor&) = default;
};

/// Both perceptual distances used by the color-fidelity protocol.
struct ColorDifference {
    double delta_e00 = 0.0;  // CIEDE2000, kL = kC = kH = 1
    double ab = 0.0;         // Euclidean distance in the a-b plane
};

/// Inverse sRGB companding for one channel value in [0,255].
inline double srgb_channel_to_linear(double c) {
    const double u = c / 255.0;
    return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

inline LinearRgb srgb_to_linear(const RgbColor& c) {
    return {srgb_channel_to_linear(c.r),
            srgb_channel_to_linear(c.g),
            srgb_channel_to_linear(c.b)};
}

inline LabColor srgb_to_lab(const RgbColor& c) {
    const LinearRgb lin = srgb_to_linear(c);

    // sRGB D65 matrix; row sums equal the reference white.
    const double x = 0.4124564 * lin.r + 0.3575761 * lin.g + 0.1804375 * lin.b;
    const double y = 0.2126729 * lin.r + 0.7151522 * lin.g + 0.0721750 * lin.b;
    const double z = 0.0193339 * lin.r + 0.1191920 * lin.g + 0.9503041 * lin.b;

    constexpr double xn = 0.4124564 + 0.3575761 + 0.1804375;
    constexpr double yn = 0.2126729 + 0.7151522 + 0.0721750;
    constexpr double zn = 0.0193339 + 0.1191920 + 0.9503041;

    constexpr double eps = 216.0 / 24389.0;
    constexpr double kappa = 24389.0 / 27.0;
    const auto f = [](double t) {
        return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
    };

    const double fx = f(x / xn);
    const double fy = f(y / yn);
    const double fz = f(z / zn);

    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

/// CIEDE2000 color difference with kL = kC = kH = 1, including the RT
/// hue-rotation term and all mean-hue branch cases.
inline double ciede2000(const LabColor& p, const LabColor& q) {
    constexpr double kPi = 3.14159265358979323846;
    constexpr double deg2rad = kPi / 180.0;
    const auto pow7 = [](double v) {
        const double v2 = v * v;
        return v2 * v2 * v2 * v;
    };
    constexpr double twenty_five_pow7 = 6103515625.0;  // 25^7

    const double c1 = std::hypot(p.a, p.b);
    const double c2 = std::hypot(q.a, q.b);
    const double c_bar = 0.5 * (c1 + c2);

    const double g = 0.5 * (1.0 - std::sqrt(pow7(c_bar) / (pow7(c_bar) + twenty_five_pow7)));
    const double a1p = (1.0 + g) * p.a;
    const double a2p = (1.0 + g) * q.a;
    const double c1p = std::hypot(a1p, p.b);
    const double c2p = std::hypot(a2p, q.b);

    const auto hue_deg = [](double a, double b) {
        if (a == 0.0 && b == 0.0) return 0.0;
        double h = std::atan2(b, a) / deg2rad;
        return h < 0.0 ? h + 360.0 : h;
    };
    const double h1p = hue_deg(a1p, p.b);
    const double h2p = hue_deg(a2p, q.b);

    const double dl = q.L - p.L;
    const double dc = c2p - c1p;

    double dh = 0.0;
    if (c1p * c2p != 0.0) {
        dh = h2p - h1p;
        if (dh > 180.0) {
            dh -= 360.0;
        } else if (dh < -180.0) {
            dh += 360.0;
        }
    }
    const double dhh = 2.0 * std::sqrt(c1p * c2p) * std::sin(0.5 * dh * deg2rad);

    const double l_bar = 0.5 * (p.L + q.L);
    const double cp_bar = 0.5 * (c1p + c2p);

    double h_bar = h1p + h2p;
    if (c1p * c2p != 0.0) {
        if (std::abs(h1p - h2p) <= 180.0) {
            h_bar = 0.5 * (h1p + h2p);
        } else if (h1p + h2p < 360.0) {
            h_bar = 0.5 * (h1p + h2p + 360.0);
        } else {
            h_bar = 0.5 * (h1p + h2p - 360.0);
        }
    }

    const double t = 1.0 - 0.17 * std::cos((h_bar - 30.0) * deg2rad)
                         + 0.24 * std::cos(2.0 * h_bar * deg2rad)
                         + 0.32 * std::cos((3.0 * h_bar + 6.0) * deg2rad)
                         - 0.20 * std::cos((4.0 * h_bar - 63.0) * deg2rad);

    const double dtheta = 30.0 * std::exp(-((h_bar - 275.0) / 25.0) * ((h_bar - 275.0) / 25.0));
    const double rc = 2.0 * std::sqrt(pow7(cp_bar) / (pow7(cp_bar) + twenty_five_pow7));
    const double rt = -std::sin(2.0 * dtheta * deg2rad) * rc;

    const double l50 = (l_bar - 50.0) * (l_bar - 50.0);
    const double sl = 1.0 + 0.015 * l50 / std::sqrt(20.0 + l50);
    const double sc = 1.0 + 0.045 * cp_bar;
    const double sh = 1.0 + 0.015 * cp_bar * t;

    const double vl = dl / sl;
    const double vc = dc / sc;
    const double vh = dhh / sh;
    return std::sqrt(vl * vl + vc * vc + vh * vh + rt * vc * vh);
}

/// Euclidean distance restricted to the a-b plane; ignores L entirely.
inline double ab_distance(const LabColor& p, const LabColor& q) {
    return std::hypot(p.a - q.a, p.b - q.b);
}

inline ColorDifference color_difference(const LabColor& p, const LabColor& q) {
    return {ciede2000(p, q), ab_distance(p, q)};
}

}  // namespace capkit
