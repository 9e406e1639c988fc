#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace xros {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) {
    double len = length(v);
    return len > 0.0 ? v * (1.0 / len) : Vec3{};
}

// Unit quaternion, scalar-first.
struct Quat {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Quat& o) const = default;
};

inline double norm(const Quat& q) { return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z); }

inline Quat normalized(const Quat& q) {
    double n = norm(q);
    if (n <= 0.0) return Quat{};
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

inline Quat conjugate(const Quat& q) { return {q.w, -q.x, -q.y, -q.z}; }

inline Quat operator*(const Quat& a, const Quat& b) {
    return {
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    };
}

inline Quat quat_from_axis_angle(const Vec3& axis, double angle_rad) {
    Vec3 a = normalized(axis);
    double h = 0.5 * angle_rad;
    double s = std::sin(h);
    return {std::cos(h), a.x * s, a.y * s, a.z * s};
}

// Yaw about +Z; yaw 0 faces +X.
inline Quat quat_from_yaw(double yaw_rad) { return quat_from_axis_angle({0, 0, 1}, yaw_rad); }

inline Vec3 rotate(const Quat& q, const Vec3& v) {
    Quat p{0.0, v.x, v.y, v.z};
    Quat r = q * p * conjugate(q);
    return {r.x, r.y, r.z};
}

// Rigid transform: applies rotation then translation.
struct Pose {
    Vec3 position;
    Quat orientation;

    bool operator==(const Pose& o) const = default;
};

inline Vec3 apply(const Pose& p, const Vec3& v) { return rotate(p.orientation, v) + p.position; }

// compose(a, b): first b, then a.
inline Pose compose(const Pose& a, const Pose& b) {
    return {a.position + rotate(a.orientation, b.position), normalized(a.orientation * b.orientation)};
}

inline Pose inverse(const Pose& p) {
    Quat qi = conjugate(normalized(p.orientation));
    return {rotate(qi, p.position) * -1.0, qi};
}

struct Aabb {
    Vec3 lo;
    Vec3 hi;

    bool operator==(const Aabb& o) const = default;

    bool valid() const { return lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z; }
    Vec3 center() const { return (lo + hi) * 0.5; }
    Vec3 size() const { return hi - lo; }

    // Closed-interval intersection; touching boxes count. Used for spatial queries.
    bool intersects(const Aabb& o) const {
        return lo.x <= o.hi.x && hi.x >= o.lo.x && lo.y <= o.hi.y && hi.y >= o.lo.y &&
               lo.z <= o.hi.z && hi.z >= o.lo.z;
    }

    // Strictly overlapping interiors; touching faces do not conflict. Used for
    // lease and placement disjointness.
    bool overlaps_interior(const Aabb& o) const {
        return lo.x < o.hi.x && hi.x > o.lo.x && lo.y < o.hi.y && hi.y > o.lo.y &&
               lo.z < o.hi.z && hi.z > o.lo.z;
    }

    bool contains(const Aabb& o) const {
        return lo.x <= o.lo.x && lo.y <= o.lo.y && lo.z <= o.lo.z && o.hi.x <= hi.x &&
               o.hi.y <= hi.y && o.hi.z <= hi.z;
    }

    bool contains_point(const Vec3& p) const {
        return lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y && lo.z <= p.z && p.z <= hi.z;
    }

    Aabb translated(const Vec3& d) const { return {lo + d, hi + d}; }
};

inline Vec3 closest_point(const Aabb& b, const Vec3& p) {
    return {std::clamp(p.x, b.lo.x, b.hi.x), std::clamp(p.y, b.lo.y, b.hi.y),
            std::clamp(p.z, b.lo.z, b.hi.z)};
}

inline double distance(const Aabb& b, const Vec3& p) { return length(p - closest_point(b, p)); }

struct Ray {
    Vec3 origin;
    Vec3 dir;  // need not be normalized; t is in units of |dir|
};

// Slab test. Returns the entry distance t >= 0, or nullopt on a miss.
// An origin inside the box yields t = 0.
inline std::optional<double> ray_aabb(const Ray& r, const Aabb& b) {
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
    const double o[3] = {r.origin.x, r.origin.y, r.origin.z};
    const double d[3] = {r.dir.x, r.dir.y, r.dir.z};
    const double lo[3] = {b.lo.x, b.lo.y, b.lo.z};
    const double hi[3] = {b.hi.x, b.hi.y, b.hi.z};
    for (int i = 0; i < 3; ++i) {
        if (d[i] == 0.0) {
            if (o[i] < lo[i] || o[i] > hi[i]) return std::nullopt;
            continue;
        }
        double inv = 1.0 / d[i];
        double ta = (lo[i] - o[i]) * inv;
        double tb = (hi[i] - o[i]) * inv;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return std::nullopt;
    }
    return t0;
}

// Symmetric view frustum. forward/right/up form an orthonormal basis.
struct Frustum {
    Vec3 origin;
    Vec3 forward{1, 0, 0};
    Vec3 right{0, -1, 0};
    Vec3 up{0, 0, 1};
    double tan_h = 1.0;   // tan of horizontal half-angle
    double tan_v = 0.577; // tan of vertical half-angle
    double near_m = 0.1;
    double far_m = 50.0;
};

inline Frustum make_frustum(const Pose& pose, double hfov_rad, double vfov_rad, double near_m,
                            double far_m) {
    Frustum f;
    f.origin = pose.position;
    f.forward = rotate(pose.orientation, {1, 0, 0});
    f.up = rotate(pose.orientation, {0, 0, 1});
    f.right = cross(f.forward, f.up);
    f.tan_h = std::tan(0.5 * hfov_rad);
    f.tan_v = std::tan(0.5 * vfov_rad);
    f.near_m = near_m;
    f.far_m = far_m;
    return f;
}

inline bool point_in_frustum(const Frustum& f, const Vec3& p) {
    Vec3 d = p - f.origin;
    double fd = dot(d, f.forward);
    if (fd < f.near_m || fd > f.far_m) return false;
    if (std::abs(dot(d, f.right)) > fd * f.tan_h) return false;
    if (std::abs(dot(d, f.up)) > fd * f.tan_v) return false;
    return true;
}

// Conservative plane test (p-vertex). May rarely report intersection for a box
// outside all corners but near an edge; never misses a true intersection.
inline bool aabb_intersects_frustum(const Aabb& b, const Frustum& f) {
    struct Plane {
        Vec3 n;
        double c;
    };
    Plane planes[6];
    planes[0] = {f.forward, dot(f.forward, f.origin) + f.near_m};
    planes[1] = {f.forward * -1.0, -(dot(f.forward, f.origin) + f.far_m)};
    Vec3 nl = f.forward * f.tan_h + f.right;
    Vec3 nr = f.forward * f.tan_h - f.right;
    Vec3 nd = f.forward * f.tan_v + f.up;
    Vec3 nu = f.forward * f.tan_v - f.up;
    planes[2] = {nl, dot(nl, f.origin)};
    planes[3] = {nr, dot(nr, f.origin)};
    planes[4] = {nd, dot(nd, f.origin)};
    planes[5] = {nu, dot(nu, f.origin)};
    for (const Plane& pl : planes) {
        Vec3 p{pl.n.x >= 0 ? b.hi.x : b.lo.x, pl.n.y >= 0 ? b.hi.y : b.lo.y,
               pl.n.z >= 0 ? b.hi.z : b.lo.z};
        if (dot(pl.n, p) < pl.c) return false;
    }
    return true;
}

}  // namespace xros
