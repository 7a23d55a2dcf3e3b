#include "sepmix/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sepmix/errors.hpp"

namespace sepmix {

namespace {
constexpr double eps = std::numeric_limits<double>::epsilon();
}

TridiagEigen tridiag_eigen_ql(const SymTridiag& t, bool want_vectors, int max_sweeps) {
    const int n = static_cast<int>(t.size());
    std::vector<double> d = t.diag;
    std::vector<double> e(n, 0.0);
    for (int i = 0; i + 1 < n; ++i)
        e[i] = t.off[i];

    std::vector<double> z;
    if (want_vectors) {
        z.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            z[static_cast<std::size_t>(i) * n + i] = 1.0;
    }
    auto Z = [&](int row, int col) -> double& { return z[static_cast<std::size_t>(row) * n + col]; };

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd)
                    break;
            }
            if (m != l) {
                if (iter++ == max_sweeps)
                    throw InvariantError("QL did not converge within " + std::to_string(max_sweeps) +
                                         " sweeps at index " + std::to_string(l));
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                bool underflow = false;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i], b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (want_vectors) {
                        for (int k = 0; k < n; ++k) {
                            f = Z(k, i + 1);
                            Z(k, i + 1) = s * Z(k, i) + c * f;
                            Z(k, i) = c * Z(k, i) - s * f;
                        }
                    }
                }
                if (underflow)
                    continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    TridiagEigen out;
    out.values.reserve(n);
    for (int j : order) {
        out.values.push_back(d[j]);
        if (want_vectors) {
            std::vector<double> v(n);
            for (int k = 0; k < n; ++k)
                v[k] = Z(k, j);
            out.vectors.push_back(std::move(v));
        }
    }
    return out;
}

std::size_t sturm_count(const SymTridiag& t, double x) {
    const std::size_t n = t.size();
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double b2 = i ? t.off[i - 1] * t.off[i - 1] : 0.0;
        q = (t.diag[i] - x) - (i ? b2 / q : 0.0);
        if (q == 0.0)
            q = -eps * (std::abs(t.diag[i]) + std::abs(x) + 1e-300);
        if (q < 0)
            ++count;
    }
    return count;
}

double gershgorin_max(const SymTridiag& t) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
        double rad = (i ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < t.size() ? std::abs(t.off[i]) : 0.0);
        m = std::max(m, t.diag[i] + rad);
    }
    return m;
}

double gershgorin_min(const SymTridiag& t) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
        double rad = (i ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < t.size() ? std::abs(t.off[i]) : 0.0);
        m = std::min(m, t.diag[i] - rad);
    }
    return m;
}

double bisect_eigenvalue(const SymTridiag& t, std::size_t i, double rel_tol, int max_iter) {
    double lo = gershgorin_min(t), hi = gershgorin_max(t);
    const double scale = std::max(std::abs(lo), std::abs(hi));
    lo -= eps * scale + 1e-300;
    hi += eps * scale + 1e-300;
    for (int it = 0; it < max_iter; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (sturm_count(t, mid) > i)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi)) + 4 * eps * eps * scale)
            break;
    }
    return 0.5 * (lo + hi);
}

namespace {

// LU with partial pivoting for (T - s I) x = b, b overwritten by x
void tridiag_shifted_solve(const SymTridiag& t, double s, std::vector<double>& b) {
    const std::size_t n = t.size();
    std::vector<double> dl(n, 0.0), d(n), du(n, 0.0), du2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = t.diag[i] - s;
    for (std::size_t i = 0; i + 1 < n; ++i)
        dl[i] = du[i] = t.off[i];
    const double tiny = eps * (std::abs(gershgorin_max(t)) + std::abs(gershgorin_min(t)) + std::abs(s)) + 1e-300;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0)
                d[i] = tiny;
            double f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
        } else {
            double f = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = f;
            double tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - f * d[i + 1];
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du[i + 1];
            }
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= f * b[i];
        }
    }
    if (d[n - 1] == 0.0)
        d[n - 1] = tiny;
    for (std::size_t ii = n; ii-- > 0;) {
        double v = b[ii];
        if (ii + 1 < n)
            v -= du[ii] * b[ii + 1];
        if (ii + 2 < n)
            v -= du2[ii] * b[ii + 2];
        b[ii] = v / d[ii];
    }
}

void normalize(std::vector<double>& v) {
    double s = 0;
    for (double a : v)
        s += a * a;
    s = std::sqrt(s);
    for (double& a : v)
        a /= s;
}

}  // namespace

std::vector<double> inverse_iteration(const SymTridiag& t, double lambda, int iters) {
    const std::size_t n = t.size();
    std::vector<double> v(n);
    // deterministic, not orthogonal to any smooth mode
    for (std::size_t i = 0; i < n; ++i)
        v[i] = 1.0 + 0.5 * std::sin(1.0 + 2.3 * static_cast<double>(i));
    normalize(v);
    for (int it = 0; it < iters; ++it) {
        tridiag_shifted_solve(t, lambda, v);
        normalize(v);
    }
    return v;
}

TridiagEigen tridiag_lowest(const SymTridiag& t, std::size_t count) {
    TridiagEigen out;
    count = std::min(count, t.size());
    for (std::size_t i = 0; i < count; ++i) {
        double lam = bisect_eigenvalue(t, i);
        out.values.push_back(lam);
        out.vectors.push_back(inverse_iteration(t, lam));
    }
    return out;
}

std::vector<double> tridiag_apply(const SymTridiag& t, const std::vector<double>& v) {
    const std::size_t n = t.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = t.diag[i] * v[i];
        if (i)
            s += t.off[i - 1] * v[i - 1];
        if (i + 1 < n)
            s += t.off[i] * v[i + 1];
        out[i] = s;
    }
    return out;
}

}  // namespace sepmix
