#pragma once

#include <vector>

#include "grid.hpp"

// Discrete primitives, means, bracket operators, weighted projection and
// difference quotients. Center data integrate by the midpoint rule and edge
// data by the trapezoid rule; the primitive of a center field lives on edges
// and the primitive of an edge field lives on centers, which makes the
// discrete adjoint identities exact up to round-off.

namespace lmc {

inline double integral(const Field& y) {
    const int n = y.nx();
    double s = 0.0;
    if (y.loc == Loc::center) {
        for (double a : y.v) s += a;
    } else {
        for (int j = 1; j < n; ++j) s += y.v[j];
        s += 0.5 * (y.v[0] + y.v[n]);
    }
    return s * y.X / n;
}

// Quadrature of the product of two fields at the same location.
inline double inner(const Field& a, const Field& b) {
    require_same_shape(a, b);
    Field p = a;
    for (int i = 0; i < p.size(); ++i) p.v[i] *= b.v[i];
    return integral(p);
}

inline double mean_omega(const Field& y) { return integral(y) / y.X; }

inline Field primitive(const Field& y) {
    const int n = y.nx();
    const double dx = y.dx();
    if (y.loc == Loc::center) {
        Field out(Loc::edge, y.X, n);
        double s = 0.0;
        for (int j = 1; j <= n; ++j) {
            s += y.v[j - 1];
            out.v[j] = s * dx;
        }
        return out;
    }
    Field out(Loc::center, y.X, n);
    double s = 0.5 * y.v[0];
    for (int i = 0; i < n; ++i) {
        if (i > 0) s += y.v[i];
        out.v[i] = s * dx;
    }
    return out;
}

inline Field coprimitive(const Field& y) {
    const int n = y.nx();
    const double dx = y.dx();
    if (y.loc == Loc::center) {
        Field out(Loc::edge, y.X, n);
        double s = 0.0;
        for (int j = n - 1; j >= 0; --j) {
            s += y.v[j];
            out.v[j] = s * dx;
        }
        return out;
    }
    Field out(Loc::center, y.X, n);
    double s = 0.5 * y.v[n];
    for (int i = n - 1; i >= 0; --i) {
        out.v[i] = s * dx;
        s += y.v[i];
    }
    return out;
}

inline Field subtract_constant(Field y, double c) {
    for (auto& a : y.v) a -= c;
    return y;
}

// I^<m> y: m=1 I y - <I y>, m=2 I y, m=3 I(y - <y>).
inline Field i_bracket(const Field& y, int m) {
    switch (m) {
        case 1: {
            Field p = primitive(y);
            return subtract_constant(p, mean_omega(p));
        }
        case 2:
            return primitive(y);
        case 3:
            return primitive(subtract_constant(y, mean_omega(y)));
        default:
            throw Error("bracket index must be 1, 2 or 3");
    }
}

// P_{1/kappa} y = y - (1/kappa)/<1/kappa> <y>.
inline Field weighted_projection(const Field& y, const Field& kappa) {
    require_same_shape(y, kappa);
    Field w = kappa;
    for (auto& a : w.v) {
        if (!(a > 0.0)) throw NonpositiveWeight("weight must be strictly positive");
        a = 1.0 / a;
    }
    const double mw = mean_omega(w);
    const double my = mean_omega(y);
    Field out = y;
    for (int i = 0; i < out.size(); ++i) out.v[i] -= w.v[i] / mw * my;
    return out;
}

// <z>_{1/kappa} = <z/kappa>/<1/kappa>.
inline double weighted_mean(const Field& z, const Field& kappa) {
    Field zk = z, w = kappa;
    for (int i = 0; i < w.size(); ++i) {
        w.v[i] = 1.0 / kappa.v[i];
        zk.v[i] = z.v[i] / kappa.v[i];
    }
    return mean_omega(zk) / mean_omega(w);
}

// Cumulative trapezoid quadrature in t, zero at the first sample.
inline std::vector<double> time_primitive(const std::vector<double>& b, const std::vector<double>& t) {
    std::vector<double> out(b.size(), 0.0);
    for (std::size_t k = 1; k < b.size(); ++k) out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (b[k] + b[k - 1]);
    return out;
}

inline SpaceTimeField time_primitive(const SpaceTimeField& w) {
    SpaceTimeField out = w;
    for (int i = 0; i < w.nxs; ++i) out.at(0, i) = 0.0;
    for (int k = 1; k < w.nt(); ++k) {
        const double h = 0.5 * (w.t[k] - w.t[k - 1]);
        for (int i = 0; i < w.nxs; ++i) out.at(k, i) = out.at(k - 1, i) + h * (w.at(k, i) + w.at(k - 1, i));
    }
    return out;
}

// (y(x + j dx) - y(x)) / (j dx) on the truncated domain (0, X - j dx).
inline Field difference_quotient(const Field& y, int j) {
    const int n = y.nx();
    if (j < 1 || j >= n) throw ShiftOutOfRange("shift must satisfy 1 <= j < nx");
    const double dx = y.dx();
    const double h = j * dx;
    const int m = y.size() - j;
    Field out(y.loc, y.X - h, std::vector<double>(static_cast<std::size_t>(m)));
    for (int i = 0; i < m; ++i) out.v[i] = (y.v[i + j] - y.v[i]) / h;
    return out;
}

inline SpaceTimeField difference_quotient(const SpaceTimeField& w, int j) {
    return map_rows(w, [j](const Field& r) { return difference_quotient(r, j); });
}

// Dy: edge data give center values; center data give the nx-1 interior
// differences, stored as a center field on the shifted cell grid of
// (dx/2, X - dx/2).
inline Field derivative(const Field& y) {
    const int n = y.nx();
    const double dx = y.dx();
    if (y.loc == Loc::edge) {
        Field out(Loc::center, y.X, n);
        for (int i = 0; i < n; ++i) out.v[i] = (y.v[i + 1] - y.v[i]) / dx;
        return out;
    }
    Field out(Loc::center, y.X - dx, std::vector<double>(static_cast<std::size_t>(n - 1)));
    for (int j = 0; j < n - 1; ++j) out.v[j] = (y.v[j + 1] - y.v[j]) / dx;
    return out;
}

}  // namespace lmc
