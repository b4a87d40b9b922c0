#pragma once

// Forward-mode scalar types used to differentiate the corotational frame
// extraction exactly: Dual<N> carries first derivatives, Dual2<N> first and
// second. Small fixed sizes only; arithmetic is hand-rolled to keep the
// element hot path free of dynamic allocation.

#include <array>
#include <cmath>

namespace girderlab {

template <int N>
struct Dual {
    double v = 0.0;
    std::array<double, N> g{};

    Dual() = default;
    Dual(double value) : v(value) {}
    static Dual seeded(double value, int lane) {
        Dual d(value);
        d.g[lane] = 1.0;
        return d;
    }

    Dual operator-() const {
        Dual r(-v);
        for (int i = 0; i < N; ++i) r.g[i] = -g[i];
        return r;
    }
    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) g[i] += o.g[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) g[i] -= o.g[i];
        return *this;
    }
    friend Dual operator+(Dual a, const Dual& b) { return a += b; }
    friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
    friend Dual operator*(const Dual& a, const Dual& b) {
        Dual r(a.v * b.v);
        for (int i = 0; i < N; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
        return r;
    }
    friend Dual operator*(double s, const Dual& a) {
        Dual r(s * a.v);
        for (int i = 0; i < N; ++i) r.g[i] = s * a.g[i];
        return r;
    }
    friend Dual operator*(const Dual& a, double s) { return s * a; }
    friend Dual operator/(const Dual& a, const Dual& b) {
        const double inv = 1.0 / b.v;
        Dual r(a.v * inv);
        for (int i = 0; i < N; ++i) r.g[i] = (a.g[i] - r.v * b.g[i]) * inv;
        return r;
    }
    friend Dual sqrt(const Dual& a) {
        const double s = std::sqrt(a.v);
        Dual r(s);
        const double f = 0.5 / s;
        for (int i = 0; i < N; ++i) r.g[i] = f * a.g[i];
        return r;
    }
    friend Dual sin(const Dual& a) {
        Dual r(std::sin(a.v));
        const double c = std::cos(a.v);
        for (int i = 0; i < N; ++i) r.g[i] = c * a.g[i];
        return r;
    }
    friend Dual cos(const Dual& a) {
        Dual r(std::cos(a.v));
        const double s = -std::sin(a.v);
        for (int i = 0; i < N; ++i) r.g[i] = s * a.g[i];
        return r;
    }
};

template <int N>
struct Dual2 {
    double v = 0.0;
    std::array<double, N> g{};
    std::array<double, N * N> h{};  // symmetric, stored full

    Dual2() = default;
    Dual2(double value) : v(value) {}
    static Dual2 seeded(double value, int lane) {
        Dual2 d(value);
        d.g[lane] = 1.0;
        return d;
    }

    Dual2& operator+=(const Dual2& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) g[i] += o.g[i];
        for (int i = 0; i < N * N; ++i) h[i] += o.h[i];
        return *this;
    }
    Dual2& operator-=(const Dual2& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) g[i] -= o.g[i];
        for (int i = 0; i < N * N; ++i) h[i] -= o.h[i];
        return *this;
    }
    friend Dual2 operator+(Dual2 a, const Dual2& b) { return a += b; }
    friend Dual2 operator-(Dual2 a, const Dual2& b) { return a -= b; }
    Dual2 operator-() const {
        Dual2 r(-v);
        for (int i = 0; i < N; ++i) r.g[i] = -g[i];
        for (int i = 0; i < N * N; ++i) r.h[i] = -h[i];
        return r;
    }
    friend Dual2 operator*(const Dual2& a, const Dual2& b) {
        Dual2 r(a.v * b.v);
        for (int i = 0; i < N; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                r.h[i * N + j] = a.h[i * N + j] * b.v + b.h[i * N + j] * a.v +
                                 a.g[i] * b.g[j] + a.g[j] * b.g[i];
        return r;
    }
    friend Dual2 operator*(double s, const Dual2& a) {
        Dual2 r(s * a.v);
        for (int i = 0; i < N; ++i) r.g[i] = s * a.g[i];
        for (int i = 0; i < N * N; ++i) r.h[i] = s * a.h[i];
        return r;
    }
    friend Dual2 operator*(const Dual2& a, double s) { return s * a; }

    // chain rule for a scalar function with derivatives f1, f2 at a.v
    Dual2 lifted(double f0, double f1, double f2) const {
        Dual2 r(f0);
        for (int i = 0; i < N; ++i) r.g[i] = f1 * g[i];
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                r.h[i * N + j] = f1 * h[i * N + j] + f2 * g[i] * g[j];
        return r;
    }
    friend Dual2 inv(const Dual2& a) {
        const double iv = 1.0 / a.v;
        return a.lifted(iv, -iv * iv, 2.0 * iv * iv * iv);
    }
    friend Dual2 operator/(const Dual2& a, const Dual2& b) { return a * inv(b); }
    friend Dual2 sqrt(const Dual2& a) {
        const double s = std::sqrt(a.v);
        return a.lifted(s, 0.5 / s, -0.25 / (s * a.v));
    }
    friend Dual2 sin(const Dual2& a) {
        return a.lifted(std::sin(a.v), std::cos(a.v), -std::sin(a.v));
    }
    friend Dual2 cos(const Dual2& a) {
        return a.lifted(std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
    }
};

// minimal 3-vector / 3x3 helpers usable with double, Dual and Dual2
template <typename S>
struct TV3 {
    S x{}, y{}, z{};
    friend TV3 operator+(const TV3& a, const TV3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend TV3 operator-(const TV3& a, const TV3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend TV3 operator*(const S& s, const TV3& a) { return {s * a.x, s * a.y, s * a.z}; }
};

template <typename S>
S dot(const TV3<S>& a, const TV3<S>& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename S>
TV3<S> cross(const TV3<S>& a, const TV3<S>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename S>
TV3<S> normalized(const TV3<S>& a) {
    S inv_len = S(1.0) / sqrt(dot(a, a));
    return {a.x * inv_len, a.y * inv_len, a.z * inv_len};
}

}  // namespace girderlab
