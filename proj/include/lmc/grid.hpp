#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace lmc {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// Uniform space-time grid on (0,X) x (0,T).
struct Grid {
    double X = 1.0;
    double T = 1.0;
    int nx = 64;
    int nt = 64;

    double dx() const { return X / nx; }
    double dt() const { return T / nt; }
    double xc(int i) const { return (i + 0.5) * X / nx; }
    double xe(int j) const { return j * X / nx; }
    double t(int n) const { return n * T / nt; }

    bool operator==(const Grid&) const = default;
};

// Sample location: cell centers (nx values) or cell edges (nx+1 values).
enum class Loc { center, edge };

inline const char* to_string(Loc l) { return l == Loc::center ? "center" : "edge"; }

// Grid function on (0,X).
struct Field {
    Loc loc = Loc::center;
    double X = 1.0;
    std::vector<double> v;

    Field() = default;
    Field(Loc l, double X_, std::vector<double> vals) : loc(l), X(X_), v(std::move(vals)) {}
    Field(Loc l, double X_, int nx, double c = 0.0)
        : loc(l), X(X_), v(static_cast<std::size_t>(l == Loc::center ? nx : nx + 1), c) {}

    template <class F>
    static Field sample(Loc l, double X_, int nx, F&& fn) {
        Field f(l, X_, nx);
        for (int i = 0; i < f.size(); ++i) f.v[i] = fn(f.x(i));
        return f;
    }

    int size() const { return static_cast<int>(v.size()); }
    int nx() const { return loc == Loc::center ? size() : size() - 1; }
    double dx() const { return X / nx(); }
    double x(int i) const { return loc == Loc::center ? (i + 0.5) * X / nx() : i * X / nx(); }
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }

    bool operator==(const Field&) const = default;
};

inline void require_same_shape(const Field& a, const Field& b) {
    if (a.loc != b.loc || a.size() != b.size()) throw Error("field shape mismatch");
}

inline Field operator+(Field a, const Field& b) {
    require_same_shape(a, b);
    for (int i = 0; i < a.size(); ++i) a.v[i] += b.v[i];
    return a;
}
inline Field operator-(Field a, const Field& b) {
    require_same_shape(a, b);
    for (int i = 0; i < a.size(); ++i) a.v[i] -= b.v[i];
    return a;
}
inline Field operator*(double c, Field a) {
    for (auto& x : a.v) x *= c;
    return a;
}

// Center values from edge values by averaging neighbours, and the reverse
// (edges from centers, boundary edges take the adjacent center value).
inline Field edge_to_center(const Field& e) {
    Field c(Loc::center, e.X, e.nx());
    for (int i = 0; i < c.size(); ++i) c.v[i] = 0.5 * (e.v[i] + e.v[i + 1]);
    return c;
}
inline Field center_to_edge(const Field& c) {
    const int n = c.nx();
    Field e(Loc::edge, c.X, n);
    e.v[0] = c.v[0];
    e.v[n] = c.v[n - 1];
    for (int j = 1; j < n; ++j) e.v[j] = 0.5 * (c.v[j - 1] + c.v[j]);
    return e;
}

// Samples of a function on Q = (0,X) x (0,T) at a list of times.
// Row k holds the spatial samples at time t[k].
struct SpaceTimeField {
    Loc loc = Loc::center;
    double X = 1.0;
    int nxs = 0;  // samples per row
    std::vector<double> t;
    std::vector<double> data;

    SpaceTimeField() = default;
    SpaceTimeField(Loc l, double X_, int nx, std::vector<double> times)
        : loc(l), X(X_), nxs(l == Loc::center ? nx : nx + 1), t(std::move(times)),
          data(static_cast<std::size_t>(nxs) * t.size(), 0.0) {}

    template <class F>
    static SpaceTimeField sample(Loc l, double X_, int nx, std::vector<double> times, F&& fn) {
        SpaceTimeField w(l, X_, nx, std::move(times));
        for (int k = 0; k < w.nt(); ++k)
            for (int i = 0; i < w.nxs; ++i) w.at(k, i) = fn(w.x(i), w.t[k]);
        return w;
    }

    int nt() const { return static_cast<int>(t.size()); }
    int nx() const { return loc == Loc::center ? nxs : nxs - 1; }
    double x(int i) const { return loc == Loc::center ? (i + 0.5) * X / nx() : i * X / nx(); }
    double& at(int k, int i) { return data[static_cast<std::size_t>(k) * nxs + i]; }
    double at(int k, int i) const { return data[static_cast<std::size_t>(k) * nxs + i]; }
    std::span<double> row(int k) { return {data.data() + static_cast<std::size_t>(k) * nxs, static_cast<std::size_t>(nxs)}; }
    std::span<const double> row(int k) const {
        return {data.data() + static_cast<std::size_t>(k) * nxs, static_cast<std::size_t>(nxs)};
    }
    Field slice(int k) const { return Field(loc, X, std::vector<double>(row(k).begin(), row(k).end())); }
    void set_row(int k, const Field& f) { std::copy(f.v.begin(), f.v.end(), row(k).begin()); }
    void push_row(double time, const std::vector<double>& vals) {
        t.push_back(time);
        data.insert(data.end(), vals.begin(), vals.end());
    }

    bool operator==(const SpaceTimeField&) const = default;
};

inline void require_same_shape(const SpaceTimeField& a, const SpaceTimeField& b) {
    if (a.loc != b.loc || a.nxs != b.nxs || a.t.size() != b.t.size()) throw Error("space-time field shape mismatch");
}

inline SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) {
    require_same_shape(a, b);
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] -= b.data[i];
    return a;
}
inline SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) {
    require_same_shape(a, b);
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
    return a;
}
inline SpaceTimeField operator*(double c, SpaceTimeField a) {
    for (auto& x : a.data) x *= c;
    return a;
}

// Apply a row-wise field map to every time row.
template <class F>
SpaceTimeField map_rows(const SpaceTimeField& w, F&& fn) {
    SpaceTimeField out;
    for (int k = 0; k < w.nt(); ++k) {
        Field r = fn(w.slice(k));
        if (k == 0) {
            out = SpaceTimeField(r.loc, r.X, r.nx(), {});
        }
        out.push_row(w.t[k], r.v);
    }
    return out;
}

// Boundary time series stored at step times, linear interpolation between.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> v;

    static TimeSeries constant(const Grid& g, double c) {
        TimeSeries s;
        for (int n = 0; n <= g.nt; ++n) {
            s.t.push_back(g.t(n));
            s.v.push_back(c);
        }
        return s;
    }
    template <class F>
    static TimeSeries sample(const Grid& g, F&& fn) {
        TimeSeries s;
        for (int n = 0; n <= g.nt; ++n) {
            s.t.push_back(g.t(n));
            s.v.push_back(fn(g.t(n)));
        }
        return s;
    }

    double operator()(double time) const {
        if (v.empty()) return 0.0;
        if (time <= t.front()) return v.front();
        if (time >= t.back()) return v.back();
        auto it = std::upper_bound(t.begin(), t.end(), time);
        std::size_t k = static_cast<std::size_t>(it - t.begin());
        double a = (time - t[k - 1]) / (t[k] - t[k - 1]);
        return (1.0 - a) * v[k - 1] + a * v[k];
    }

    bool operator==(const TimeSeries&) const = default;
};

}  // namespace lmc
