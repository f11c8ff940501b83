#pragma once

#include <cmath>

namespace jmlmc {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(b - a); }

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
inline double orient2d(Point a, Point b, Point c) { return cross(b - a, c - a); }

struct Segment {
    Point a;
    Point b;
};

/// Tolerance used for "on the unit square" style containment checks.
inline constexpr double kGeomTol = 1e-12;

inline bool in_unit_square(Point p, double tol = kGeomTol) {
    return p.x >= -tol && p.x <= 1.0 + tol && p.y >= -tol && p.y <= 1.0 + tol;
}

}  // namespace jmlmc
