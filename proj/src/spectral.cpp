#include "sepmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sepmix/errors.hpp"
#include "sepmix/tridiag.hpp"

namespace sepmix {

namespace {

constexpr double pi = std::numbers::pi;

// beyond this size, and for few requested pairs, skip the dense QL
constexpr int dense_limit = 400;

void fix_sign_and_scale(std::vector<double>& g, Normalization norm, const std::vector<double>& measure) {
    double scale;
    if (norm == Normalization::first_site) {
        scale = g[0];
    } else {
        double s = 0;
        for (std::size_t x = 0; x < g.size(); ++x)
            s += measure[x] * g[x] * g[x];
        scale = std::copysign(std::sqrt(s), g[0]);
    }
    for (double& v : g)
        v /= scale;
}

TridiagEigen lowest_pairs(const SymTridiag& t, std::size_t count) {
    if (static_cast<int>(t.size()) <= dense_limit || 4 * count > t.size()) {
        auto all = tridiag_eigen_ql(t, true);
        all.values.resize(count);
        all.vectors.resize(count);
        return all;
    }
    return tridiag_lowest(t, count);
}

void check_system(const EigenSystem& es, const ConductanceProfile& p) {
    for (std::size_t i = 1; i < es.eigenvalues.size(); ++i)
        if (!(es.eigenvalues[i] > es.eigenvalues[i - 1]))
            throw InvariantError("eigenvalues not strictly increasing at index " + std::to_string(i));
    double res = es.max_residual(p);
    if (!(res <= 1e-10)) {
        std::ostringstream os;
        os << "eigen residual " << res << " exceeds 1e-10";
        throw InvariantError(os.str());
    }
}

}  // namespace

std::vector<double> TriDiagOperator::apply(const std::vector<double>& v) const {
    const std::size_t n = diag.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * v[i];
        if (i)
            s += lower[i - 1] * v[i - 1];
        if (i + 1 < n)
            s += upper[i] * v[i + 1];
        out[i] = s;
    }
    return out;
}

TriDiagOperator neumann_operator(const ConductanceProfile& p) {
    const int n = p.n_sites();
    TriDiagOperator op{Boundary::neumann, std::vector<double>(n, 0.0), std::vector<double>(n - 1),
                       std::vector<double>(n - 1)};
    for (int x = 1; x < n; ++x) {
        double c = p.rate(x);
        op.diag[x - 1] -= c;
        op.diag[x] -= c;
        op.upper[x - 1] = c;
        op.lower[x - 1] = c;
    }
    return op;
}

TriDiagOperator dirichlet_operator(const ConductanceProfile& p) {
    const int n = p.n_sites() - 1;
    TriDiagOperator op{Boundary::dirichlet, std::vector<double>(n), std::vector<double>(std::max(n - 1, 0)),
                       std::vector<double>(std::max(n - 1, 0))};
    for (int x = 1; x <= n; ++x) {
        double c = p.rate(x);
        op.diag[x - 1] = -2 * c;
        if (x < n)
            op.upper[x - 1] = c;
        if (x > 1)
            op.lower[x - 2] = c;
    }
    return op;
}

double EigenSystem::inner(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0;
    for (std::size_t x = 0; x < a.size(); ++x)
        s += measure[x] * a[x] * b[x];
    return s;
}

double EigenSystem::max_residual(const ConductanceProfile& p) const {
    TriDiagOperator op = boundary == Boundary::neumann ? neumann_operator(p) : dirichlet_operator(p);
    double worst = 0;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        auto lg = op.apply(functions[i]);
        double r = 0;
        for (std::size_t x = 0; x < lg.size(); ++x)
            r = std::max(r, std::abs(lg[x] + eigenvalues[i] * functions[i][x]));
        worst = std::max(worst, r / std::max(1.0, eigenvalues[i]));
    }
    return worst;
}

EigenSystem solve_neumann(const ConductanceProfile& p, int count, Normalization norm) {
    const int n = p.n_sites();
    if (count < 1 || count > n - 1)
        throw ConfigError("count must lie in [1, N-1]");
    SymTridiag t{std::vector<double>(n, 0.0), std::vector<double>(n - 1)};
    for (int x = 1; x < n; ++x) {
        t.diag[x - 1] += p.rate(x);
        t.diag[x] += p.rate(x);
        t.off[x - 1] = -p.rate(x);
    }
    auto pairs = lowest_pairs(t, count + 1);

    EigenSystem es{Boundary::neumann, {}, {}, std::vector<double>(n, 1.0 / n), norm};
    es.eigenvalues = pairs.values;
    es.eigenvalues[0] = 0.0;
    es.functions = std::move(pairs.vectors);
    std::fill(es.functions[0].begin(), es.functions[0].end(), 1.0);
    for (auto& g : es.functions)
        fix_sign_and_scale(g, norm, es.measure);
    check_system(es, p);
    return es;
}

std::vector<double> dirichlet_measure(const ConductanceProfile& p) {
    const auto& r = p.resistances();
    // compensated sum
    double s = 0, comp = 0;
    for (double v : r) {
        double y = v - comp;
        double tt = s + y;
        comp = (tt - s) - y;
        s = tt;
    }
    std::vector<double> nu(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        nu[i] = r[i] / s;
    return nu;
}

namespace {

// -B with B = D^{1/2} A-hat D^{-1/2}
SymTridiag dirichlet_symmetric(const ConductanceProfile& p) {
    const int n = p.n_sites() - 1;
    SymTridiag t{std::vector<double>(n), std::vector<double>(std::max(n - 1, 0))};
    for (int x = 1; x <= n; ++x) {
        t.diag[x - 1] = 2 * p.rate(x);
        if (x < n)
            t.off[x - 1] = -std::sqrt(p.rate(x) * p.rate(x + 1));
    }
    return t;
}

// count of eigenvalues below kappa without the ambiguity guard
int raw_angle_count(const ConductanceProfile& p, double kappa) {
    const int n = p.n_sites();
    double num = 1, den = 0;  // b(kappa, 1) = infinity
    int branch = 0;
    for (int x = 1; x < n; ++x) {
        Projective b{num, den};
        if (b.above_one())
            ++branch;
        double kr = kappa * p.resistance(x);
        double nn = (1 - kr) * num + kr * den;
        double nd = den - num;
        double s = std::max(std::abs(nn), std::abs(nd));
        num = nn / s;
        den = nd / s;
    }
    Projective last{num, den};
    return branch - 1 + (last.above_one() ? 1 : 0);
}

}  // namespace

double Projective::value() const {
    return den == 0 ? std::numeric_limits<double>::infinity() : num / den;
}

bool Projective::above_one() const {
    if (den == 0)
        return true;
    return num / den > 1.0;
}

std::vector<Projective> b_recursion(const ConductanceProfile& p, double kappa) {
    if (!(kappa > 0))
        throw ConfigError("b-recursion needs kappa > 0");
    const int n = p.n_sites();
    std::vector<Projective> out;
    out.reserve(n);
    Projective b{1, 0};
    out.push_back(b);
    for (int x = 1; x < n; ++x) {
        // b' = b/(1-b) + kappa r, i.e. [p:q] -> [(1-kr)p + kr q : q - p]
        double kr = kappa * p.resistance(x);
        double nn = (1 - kr) * b.num + kr * b.den;
        double nd = b.den - b.num;
        double s = std::max(std::abs(nn), std::abs(nd));
        b = Projective{nn / s, nd / s};
        if (b.den == 0)
            b.num = 1;
        out.push_back(b);
    }
    return out;
}

// The lift starts at pi/2 and moves forward by less than pi per step except
// on the interval between the fixed points of the map, where it moves by at
// least pi. Either way the branch index goes up by one exactly when the
// current b lies in (1, inf].
double lifted_angle(const ConductanceProfile& p, double kappa) {
    auto bs = b_recursion(p, kappa);
    int branch = 0;
    for (std::size_t x = 0; x + 1 < bs.size(); ++x)
        if (bs[x].above_one())
            ++branch;
    const Projective& last = bs.back();
    double a = last.is_infinite() ? pi / 2 : std::atan(last.value());
    return a + branch * pi;
}

int angle_count(const ConductanceProfile& p, double kappa) {
    if (!(kappa > 0))
        throw ConfigError("angle count needs kappa > 0");
    int lo = raw_angle_count(p, kappa * (1 - 1e-13));
    int hi = raw_angle_count(p, kappa * (1 + 1e-13));
    if (lo != hi) {
        std::ostringstream os;
        os.precision(17);
        os << "ambiguous angle count: kappa=" << kappa << " is within 1e-13 relative of an eigenvalue";
        throw InvariantError(os.str());
    }
    return lo;
}

EigenSystem solve_dirichlet(const ConductanceProfile& p, int count, DirichletMethod method, Normalization norm) {
    const int n = p.n_sites();
    if (count < 1 || count > n - 1)
        throw ConfigError("count must lie in [1, N-1]");
    SymTridiag t = dirichlet_symmetric(p);
    EigenSystem es{Boundary::dirichlet, {}, {}, dirichlet_measure(p), norm};

    if (method == DirichletMethod::dense) {
        auto pairs = lowest_pairs(t, count);
        es.eigenvalues = std::move(pairs.values);
        es.functions = std::move(pairs.vectors);
    } else {
        const double top = gershgorin_max(t) * (1 + 1e-12) + 1e-300;
        for (int i = 1; i <= count; ++i) {
            double lo = 0, hi = top;
            if (raw_angle_count(p, hi) < i) {
                std::ostringstream os;
                os << "shooting bracket failure for kappa_" << i << ": angle interval [pi/2, "
                   << lifted_angle(p, hi) << "] does not reach the branch";
                throw InvariantError(os.str());
            }
            for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
                double mid = 0.5 * (lo + hi);
                if (raw_angle_count(p, mid) >= i)
                    hi = mid;
                else
                    lo = mid;
            }
            if (lo > 0 && raw_angle_count(p, lo) >= i) {
                std::ostringstream os;
                os << "shooting bracket failure for kappa_" << i << ": angle interval [" << lifted_angle(p, lo)
                   << ", " << lifted_angle(p, hi) << "]";
                throw InvariantError(os.str());
            }
            double kappa = 0.5 * (lo + hi);
            es.eigenvalues.push_back(kappa);
            es.functions.push_back(inverse_iteration(t, kappa));
        }
    }
    // back from the symmetrized basis: g = D^{-1/2} g-hat
    for (auto& g : es.functions) {
        for (std::size_t x = 0; x < g.size(); ++x)
            g[x] /= std::sqrt(es.measure[x]);
        fix_sign_and_scale(g, norm, es.measure);
    }
    check_system(es, p);
    return es;
}

ExtendedEigenData solve_extended(const ConductanceProfile& p, double delta) {
    const int n = p.n_sites();
    if (!(delta > 0 && delta <= 1))
        throw ConfigError("embedding parameter must lie in (0,1]");
    const int m = static_cast<int>(std::floor(delta * n + 1e-9));
    if (m < 1)
        throw ConfigError("delta*N < 1: nothing to embed");

    std::vector<double> r(m + 1, 1.0);
    r.insert(r.end(), p.resistances().begin(), p.resistances().end());
    r.insert(r.end(), m, 1.0);
    auto ext = ConductanceProfile::from_resistances(std::move(r));
    auto es = solve_neumann(ext, 1, Normalization::first_site);

    ExtendedEigenData d;
    d.delta = delta;
    d.m = m;
    d.n_bar = ext.n_sites();
    d.lambda_bar1 = es.eigenvalues[1];
    d.G = es.functions[1];

    for (std::size_t j = 1; j < d.G.size(); ++j)
        if (!(d.G[j] < d.G[j - 1]))
            throw InvariantError("extended eigenfunction G not strictly decreasing at x=" +
                                 std::to_string(static_cast<int>(j) - m));
    d.G_bar.resize(n - 1);
    for (int x = 1; x <= n - 1; ++x)
        d.G_bar[x - 1] = d.at(x) - d.at(x + 1);

    // edge (x-1, x) of the original coordinates is edge x+m of the extended profile
    d.delta_min = std::numeric_limits<double>::infinity();
    d.delta_max = 0;
    for (int x = 2; x <= n + 1; ++x) {
        double v = std::abs(ext.rate(x + m) * (d.at(x) - d.at(x - 1)));
        d.delta_min = std::min(d.delta_min, v);
        d.delta_max = std::max(d.delta_max, v);
    }
    // second route: c(x,x+1)[G(x+1)-G(x)] = -lambda * sum_{y <= x} G(y)
    double partial = 0, best = std::numeric_limits<double>::infinity();
    for (int y = -m; y <= n; ++y) {
        partial += d.at(y);
        if (y >= 1)
            best = std::min(best, partial);
    }
    d.delta_min_partial_sums = d.lambda_bar1 * best;
    if (std::abs(d.delta_min_partial_sums - d.delta_min) > 1e-9 * d.delta_min) {
        std::ostringstream os;
        os.precision(17);
        os << "delta_min routes disagree: " << d.delta_min << " vs " << d.delta_min_partial_sums;
        throw InvariantError(os.str());
    }
    return d;
}

std::vector<double> heat_solution(const EigenSystem& dir, const std::vector<double>& h0, double t) {
    const std::size_t n = dir.measure.size() + 1;
    std::vector<double> f(n + 1, 0.0);
    std::vector<double> interior(h0.begin() + 1, h0.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t i = 0; i < dir.eigenvalues.size(); ++i) {
        double coef = dir.inner(interior, dir.functions[i]) * std::exp(-dir.eigenvalues[i] * t);
        for (std::size_t x = 1; x < n; ++x)
            f[x] += coef * dir.functions[i][x - 1];
    }
    return f;
}

std::vector<double> heat_solution(const ConductanceProfile& p, const HeightFunction& h0, double t) {
    if (!(t >= 0))
        throw ConfigError("heat solution needs t >= 0");
    if (h0.n != p.n_sites())
        throw ConfigError("height function and profile disagree on N");
    auto dir = solve_dirichlet(p, p.n_sites() - 1, DirichletMethod::dense, Normalization::unit_norm);
    return heat_solution(dir, h0.values(), t);
}

double homogeneous_eigenvalue(int n, int i) { return 2.0 * (1.0 - std::cos(i * pi / n)); }

double cosine_shape(int n, int i, int x) { return std::cos(i * pi * (x - 0.5) / n); }

double sine_shape(int n, int i, int x) { return std::sin(i * pi * x / n); }

std::vector<double> weighted_gradient(const ConductanceProfile& p, const std::vector<double>& f) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t x = 2; x <= f.size(); ++x)
        out[x - 1] = p.rate(static_cast<int>(x) - 1) * (f[x - 1] - f[x - 2]);
    return out;
}

}  // namespace sepmix
