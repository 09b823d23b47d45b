#pragma once

// Exact dyadic-rational geometry: points, boxes and dyadic cubes with
// integer anchors. All coordinates are of the form m / 2^e, so every
// derived object (neighbor translates, half-side dilations, subsquare
// partitions) is represented without rounding.

#include <array>
#include <cassert>
#include <cstdint>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace onesided {

/// Exact dyadic rational m / 2^e with e >= 0, kept normalized (m odd or zero).
struct Dyadic {
    long long num = 0;
    int exp2 = 0;

    Dyadic() = default;
    Dyadic(long long n, int e) : num(n), exp2(e) {
        assert(e >= 0 && e < 62);
        normalize();
    }
    explicit Dyadic(long long n) : num(n), exp2(0) {}

    void normalize() {
        if (num == 0) { exp2 = 0; return; }
        while (exp2 > 0 && (num % 2) == 0) { num /= 2; --exp2; }
    }

    double to_double() const { return std::ldexp(static_cast<double>(num), -exp2); }

    bool is_integer() const { return exp2 == 0; }

    /// Mantissa at a given (>= current) exponent.
    long long mant_at(int e) const {
        assert(e >= exp2 && e - exp2 < 62);
        return num << (e - exp2);
    }

    std::string str() const {
        if (exp2 == 0) return std::to_string(num);
        return std::to_string(num) + "/2^" + std::to_string(exp2);
    }
};

inline Dyadic operator+(Dyadic a, Dyadic b) {
    int e = a.exp2 > b.exp2 ? a.exp2 : b.exp2;
    return Dyadic(a.mant_at(e) + b.mant_at(e), e);
}
inline Dyadic operator-(Dyadic a, Dyadic b) {
    int e = a.exp2 > b.exp2 ? a.exp2 : b.exp2;
    return Dyadic(a.mant_at(e) - b.mant_at(e), e);
}
inline Dyadic operator-(Dyadic a) { return Dyadic(-a.num, a.exp2); }
inline Dyadic operator*(Dyadic a, Dyadic b) {
    __int128 prod = static_cast<__int128>(a.num) * b.num;
    assert(prod <= INT64_MAX && prod >= INT64_MIN);
    return Dyadic(static_cast<long long>(prod), a.exp2 + b.exp2);
}
inline bool operator==(Dyadic a, Dyadic b) { return a.num == b.num && a.exp2 == b.exp2; }
inline bool operator!=(Dyadic a, Dyadic b) { return !(a == b); }
inline bool operator<(Dyadic a, Dyadic b) {
    int e = a.exp2 > b.exp2 ? a.exp2 : b.exp2;
    return a.mant_at(e) < b.mant_at(e);
}
inline bool operator<=(Dyadic a, Dyadic b) { return a == b || a < b; }
inline bool operator>(Dyadic a, Dyadic b) { return b < a; }
inline bool operator>=(Dyadic a, Dyadic b) { return b <= a; }

/// x * 2^k, exact.
inline Dyadic scale_pow2(Dyadic a, int k) {
    if (k >= 0) {
        if (a.exp2 >= k) return Dyadic(a.num, a.exp2 - k);
        assert(k - a.exp2 < 62);
        return Dyadic(a.num << (k - a.exp2), 0);
    }
    return Dyadic(a.num, a.exp2 - k);
}
inline Dyadic half(Dyadic a) { return scale_pow2(a, -1); }

inline Dyadic dy_min(Dyadic a, Dyadic b) { return a < b ? a : b; }
inline Dyadic dy_max(Dyadic a, Dyadic b) { return a < b ? b : a; }

/// Side length 2^-level as a dyadic value (level may be negative).
inline Dyadic level_side(int level) {
    if (level >= 0) return Dyadic(1, level);
    assert(-level < 62);
    return Dyadic(1LL << (-level), 0);
}

using DyPoint = std::array<Dyadic, 3>;

/// Half-open axis-aligned box [lo, hi) with exact dyadic corners.
struct Box {
    int dim = 1;
    DyPoint lo{};
    DyPoint hi{};

    Dyadic side(int axis) const { return hi[axis] - lo[axis]; }
    bool is_square() const {
        for (int a = 1; a < dim; ++a)
            if (side(a) != side(0)) return false;
        return true;
    }
    bool is_empty() const {
        for (int a = 0; a < dim; ++a)
            if (!(lo[a] < hi[a])) return true;
        return false;
    }
    double volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= side(a).to_double();
        return v;
    }
};

inline bool operator==(const Box& a, const Box& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
        if (a.lo[i] != b.lo[i] || a.hi[i] != b.hi[i]) return false;
    return true;
}

inline Box make_box1(Dyadic lo, Dyadic hi) { return Box{1, {lo}, {hi}}; }
inline Box make_box2(Dyadic lx, Dyadic ly, Dyadic hx, Dyadic hy) {
    return Box{2, {lx, ly}, {hx, hy}};
}

/// Grid-indexed dyadic cube: side 2^-level, lower corner anchor * 2^-level.
struct DyadicCube {
    int dim = 1;
    int level = 0;
    std::array<long long, 3> anchor{};

    Dyadic side() const { return level_side(level); }
    Dyadic lower(int axis) const {
        if (level >= 0) return Dyadic(anchor[axis], level);
        return Dyadic(anchor[axis] << (-level), 0);
    }
    Dyadic upper(int axis) const {
        if (level >= 0) return Dyadic(anchor[axis] + 1, level);
        return Dyadic((anchor[axis] + 1) << (-level), 0);
    }
    Box box() const {
        Box b;
        b.dim = dim;
        for (int a = 0; a < dim; ++a) { b.lo[a] = lower(a); b.hi[a] = upper(a); }
        return b;
    }
    /// Ancestor cube at a coarser level (arithmetic floor shift).
    DyadicCube ancestor(int coarser_level) const {
        assert(coarser_level <= level);
        DyadicCube p{dim, coarser_level, {}};
        int shift = level - coarser_level;
        for (int a = 0; a < dim; ++a) {
            long long v = anchor[a];
            p.anchor[a] = v >= 0 ? (v >> shift) : -(((-v) + (1LL << shift) - 1) >> shift);
        }
        return p;
    }
};

inline bool operator==(const DyadicCube& a, const DyadicCube& b) {
    if (a.dim != b.dim || a.level != b.level) return false;
    for (int i = 0; i < a.dim; ++i)
        if (a.anchor[i] != b.anchor[i]) return false;
    return true;
}

/// Q^+: translate by one side length in every coordinate.
inline DyadicCube plus_neighbor(const DyadicCube& q) {
    DyadicCube r = q;
    for (int a = 0; a < q.dim; ++a) r.anchor[a] += 1;
    return r;
}

/// Q^-: translate by minus one side length in every coordinate.
inline DyadicCube minus_neighbor(const DyadicCube& q) {
    DyadicCube r = q;
    for (int a = 0; a < q.dim; ++a) r.anchor[a] -= 1;
    return r;
}

inline Box translate(const Box& b, const DyPoint& delta) {
    Box r = b;
    for (int a = 0; a < b.dim; ++a) { r.lo[a] = b.lo[a] + delta[a]; r.hi[a] = b.hi[a] + delta[a]; }
    return r;
}

/// Q^+ for a square box: translate by its side in every coordinate.
inline Box plus_neighbor(const Box& b) {
    if (!b.is_square()) throw std::invalid_argument("plus_neighbor: box must be square");
    Dyadic s = b.side(0);
    DyPoint d{};
    for (int a = 0; a < b.dim; ++a) d[a] = s;
    return translate(b, d);
}

inline Box minus_neighbor(const Box& b) {
    if (!b.is_square()) throw std::invalid_argument("minus_neighbor: box must be square");
    Dyadic s = b.side(0);
    DyPoint d{};
    for (int a = 0; a < b.dim; ++a) d[a] = -s;
    return translate(b, d);
}

/// (Q)^{s,+} / (Q)^{s,-}: the box anchored at Q's lower corner with side
/// s*l(Q), or ending at Q's upper corner.
inline Box scaled_extension(const DyadicCube& q, Dyadic s, int sign) {
    if (!(Dyadic(0) < s)) throw std::invalid_argument("scaled_extension: s must be positive");
    Dyadic len = s * q.side();
    Box b;
    b.dim = q.dim;
    for (int a = 0; a < q.dim; ++a) {
        if (sign > 0) { b.lo[a] = q.lower(a); b.hi[a] = q.lower(a) + len; }
        else          { b.lo[a] = q.upper(a) - len; b.hi[a] = q.upper(a); }
    }
    return b;
}

// Quarter indices for 2D squares: 0 = lower-left (the half-size square at the
// same anchor), 1 = upper-right, 2 = lower-right, 3 = upper-left.
inline DyadicCube subsquare(const DyadicCube& q, int i) {
    if (q.dim != 2) throw std::invalid_argument("subsquare: cube must be 2D");
    if (i < 0 || i > 3) throw std::invalid_argument("subsquare: index in 0..3");
    DyadicCube r{2, q.level + 1, {}};
    static constexpr int offs[4][2] = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    for (int a = 0; a < 2; ++a) r.anchor[a] = 2 * q.anchor[a] + offs[i][a];
    return r;
}

inline Box subsquare(const Box& b, int i) {
    if (b.dim != 2) throw std::invalid_argument("subsquare: box must be 2D");
    if (!b.is_square()) throw std::invalid_argument("subsquare: box must be square");
    if (i < 0 || i > 3) throw std::invalid_argument("subsquare: index in 0..3");
    Dyadic mx = half(b.lo[0] + b.hi[0]);
    Dyadic my = half(b.lo[1] + b.hi[1]);
    switch (i) {
        case 0: return make_box2(b.lo[0], b.lo[1], mx, my);
        case 1: return make_box2(mx, my, b.hi[0], b.hi[1]);
        case 2: return make_box2(mx, b.lo[1], b.hi[0], my);
        default: return make_box2(b.lo[0], my, mx, b.hi[1]);
    }
}

/// Half-side dilation of a 2D square used by the covering selection.
/// For quarter indices 1 and 2 the square grows to the right and to the
/// bottom; for index 3 (the mirrored geometry) to the left and to the top.
inline Box cover_dilation(const Box& b, int quarter = 2) {
    if (b.dim != 2) throw std::invalid_argument("cover_dilation: box must be 2D");
    if (!b.is_square()) throw std::invalid_argument("cover_dilation: box must be square");
    Dyadic hs = half(b.side(0));
    if (quarter == 3)
        return make_box2(b.lo[0] - hs, b.lo[1], b.hi[0], b.hi[1] + hs);
    return make_box2(b.lo[0], b.lo[1] - hs, b.hi[0] + hs, b.hi[1]);
}

/// Quarter of the plus-neighbor, e.g. Q^{+2} = lower-right quarter of Q^+.
inline DyadicCube plus_quarter(const DyadicCube& q, int i = 2) {
    return subsquare(plus_neighbor(q), i);
}
inline Box plus_quarter(const Box& b, int i = 2) {
    return subsquare(plus_neighbor(b), i);
}

inline bool contains(const Box& outer, const Box& inner) {
    assert(outer.dim == inner.dim);
    for (int a = 0; a < outer.dim; ++a)
        if (inner.lo[a] < outer.lo[a] || outer.hi[a] < inner.hi[a]) return false;
    return true;
}

inline bool point_in(const Box& b, const DyPoint& p) {
    for (int a = 0; a < b.dim; ++a)
        if (p[a] < b.lo[a] || b.hi[a] <= p[a]) return false;
    return true;
}

/// Membership in the closure [lo, hi]; covering arguments place points on
/// upper boundaries, where the half-open test would miss them.
inline bool point_in_closed(const Box& b, const DyPoint& p) {
    for (int a = 0; a < b.dim; ++a)
        if (p[a] < b.lo[a] || b.hi[a] < p[a]) return false;
    return true;
}

inline int overlap_count(std::span<const Box> family, const DyPoint& p) {
    int n = 0;
    for (const Box& b : family)
        if (point_in(b, p)) ++n;
    return n;
}

inline Box intersect(const Box& a, const Box& b) {
    assert(a.dim == b.dim);
    Box r;
    r.dim = a.dim;
    for (int ax = 0; ax < a.dim && ax < 3; ++ax) {
        r.lo[ax] = dy_max(a.lo[ax], b.lo[ax]);
        r.hi[ax] = dy_min(a.hi[ax], b.hi[ax]);
        if (r.hi[ax] < r.lo[ax]) r.hi[ax] = r.lo[ax];
    }
    return r;
}

} // namespace onesided
