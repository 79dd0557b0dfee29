#pragma once

#include <cmath>

namespace lorentz
{
//! Plain 2D vector used for positions, velocities and directions.
struct Vec2
{
    double x = 0;
    double y = 0;

    constexpr Vec2& operator+=(Vec2 const& o)
    {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr Vec2& operator-=(Vec2 const& o)
    {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    constexpr Vec2& operator*=(double s)
    {
        x *= s;
        y *= s;
        return *this;
    }
    friend constexpr bool operator==(Vec2 const&, Vec2 const&) = default;
};

constexpr Vec2 operator+(Vec2 a, Vec2 const& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, Vec2 const& b) { return a -= b; }
constexpr Vec2 operator-(Vec2 const& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }

constexpr double dot(Vec2 const& a, Vec2 const& b)
{
    return a.x * b.x + a.y * b.y;
}

//! z-component of the 3D cross product; positive when b is CCW from a.
constexpr double cross(Vec2 const& a, Vec2 const& b)
{
    return a.x * b.y - a.y * b.x;
}

inline double norm(Vec2 const& a) { return std::hypot(a.x, a.y); }
constexpr double norm_sq(Vec2 const& a) { return dot(a, a); }

inline Vec2 rotate(Vec2 const& a, double angle)
{
    double const c = std::cos(angle);
    double const s = std::sin(angle);
    return {c * a.x - s * a.y, s * a.x + c * a.y};
}

inline Vec2 unit_from_angle(double angle)
{
    return {std::cos(angle), std::sin(angle)};
}

inline double angle_of(Vec2 const& a) { return std::atan2(a.y, a.x); }

//! Squared distance from point p to the closed segment [a, b].
inline double segment_distance_sq(Vec2 const& p, Vec2 const& a, Vec2 const& b)
{
    Vec2 const ab = b - a;
    double const len_sq = norm_sq(ab);
    double s = len_sq > 0 ? dot(p - a, ab) / len_sq : 0.0;
    s = s < 0 ? 0 : (s > 1 ? 1 : s);
    return norm_sq(p - (a + ab * s));
}

}  // namespace lorentz
