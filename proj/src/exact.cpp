#include "sepmix/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sepmix/errors.hpp"
#include "sepmix/spectral.hpp"
#include "sepmix/tridiag.hpp"

namespace sepmix {

namespace {

// Poisson(mu) weights truncated so the missing mass is below tail
std::vector<double> poisson_weights(double mu, double tail) {
    std::vector<double> w;
    double cum = 0;
    for (int n = 0;; ++n) {
        double v = std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
        w.push_back(v);
        cum += v;
        if (n > mu && 1.0 - cum < tail)
            break;
        if (n > mu + 50 * std::sqrt(mu) + 100)
            break;
    }
    return w;
}

// e^{tQ} v by uniformization; apply(v, out) must compute out = P v
template <class Apply>
std::vector<double> uniformized(const std::vector<double>& v, double lam_t, double tol, Apply apply) {
    if (lam_t <= 0)
        return v;
    auto w = poisson_weights(lam_t, std::min(tol, 1e-12) * 0.5);
    std::vector<double> cur = v, next(v.size()), acc(v.size(), 0.0);
    double used = 0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        if (n) {
            apply(cur, next);
            cur.swap(next);
        }
        if (w[n] > 0) {
            for (std::size_t i = 0; i < v.size(); ++i)
                acc[i] += w[n] * cur[i];
            used += w[n];
        }
    }
    for (double& a : acc)
        a /= used;
    return acc;
}

std::size_t colex_rank(std::uint64_t mask, const std::vector<std::uint64_t>& binom, int k) {
    std::size_t r = 0;
    int i = 0;
    while (mask) {
        int pos = std::countr_zero(mask);
        mask &= mask - 1;
        ++i;
        r += binom[static_cast<std::size_t>(pos) * (k + 1) + i];
    }
    return r;
}

}  // namespace

std::size_t ChainMatrix::index_of(std::uint64_t mask) const { return colex_rank(mask, binom_, k); }

ChainMatrix build_chain(const ConductanceProfile& p, int k, std::size_t budget) {
    const int n = p.n_sites();
    if (k < 0 || k > n)
        throw ConfigError("need 0 <= k <= N");
    if (n > 63)
        throw CapacityError("exact chain needs N <= 63");
    const std::uint64_t count = binomial(n, k);
    if (count > budget)
        throw CapacityError("state space binomial(" + std::to_string(n) + "," + std::to_string(k) +
                            ") = " + std::to_string(count) + " exceeds budget " + std::to_string(budget));
    ChainMatrix ch;
    ch.n = n;
    ch.k = k;
    ch.states = enumerate_masks(n, k);
    ch.binom_.assign(static_cast<std::size_t>(n + 1) * (k + 1), 0);
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= k; ++b)
            ch.binom_[static_cast<std::size_t>(a) * (k + 1) + b] = binomial(a, b);

    ch.row_ptr.push_back(0);
    ch.diag.assign(ch.size(), 0.0);
    for (std::size_t i = 0; i < ch.size(); ++i) {
        std::uint64_t m = ch.states[i];
        for (int x = 1; x < n; ++x) {
            bool a = (m >> (x - 1)) & 1U, b = (m >> x) & 1U;
            if (a == b)
                continue;
            std::uint64_t nb = m ^ (std::uint64_t{3} << (x - 1));
            ch.col.push_back(static_cast<std::uint32_t>(ch.index_of(nb)));
            ch.rate.push_back(p.rate(x));
            ch.edge.push_back(x);
            ch.center.push_back(std::popcount(m & ((std::uint64_t{1} << (x - 1)) - 1)));
            ch.diag[i] -= p.rate(x);
        }
        ch.row_ptr.push_back(ch.col.size());
        ch.lambda = std::max(ch.lambda, -ch.diag[i]);
    }
    return ch;
}

Distribution point_mass(const ChainMatrix& ch, const Configuration& c) {
    if (c.n() != ch.n || c.k() != ch.k)
        throw ConfigError("start configuration does not belong to the chain");
    Distribution d(ch.size(), 0.0);
    d[ch.index_of(c)] = 1.0;
    return d;
}

std::vector<double> apply_generator(const ChainMatrix& ch, const std::vector<double>& f) {
    std::vector<double> out(ch.size());
    for (std::size_t i = 0; i < ch.size(); ++i) {
        double s = ch.diag[i] * f[i];
        for (std::size_t e = ch.row_ptr[i]; e < ch.row_ptr[i + 1]; ++e)
            s += ch.rate[e] * f[ch.col[e]];
        out[i] = s;
    }
    return out;
}

namespace {

// uniformized step on the generator with some transitions switched off
Distribution propagate(const ChainMatrix& ch, const Distribution& v, double t, double tol,
                       const std::vector<char>* active) {
    if (ch.lambda == 0 || t <= 0)
        return v;
    const double lam = ch.lambda;
    std::vector<double> diag = ch.diag;
    if (active) {
        std::fill(diag.begin(), diag.end(), 0.0);
        for (std::size_t i = 0; i < ch.size(); ++i)
            for (std::size_t e = ch.row_ptr[i]; e < ch.row_ptr[i + 1]; ++e)
                if ((*active)[e])
                    diag[i] -= ch.rate[e];
    }
    return uniformized(v, lam * t, tol, [&](const std::vector<double>& in, std::vector<double>& out) {
        for (std::size_t i = 0; i < ch.size(); ++i) {
            double s = (1.0 + diag[i] / lam) * in[i];
            for (std::size_t e = ch.row_ptr[i]; e < ch.row_ptr[i + 1]; ++e)
                if (!active || (*active)[e])
                    s += ch.rate[e] / lam * in[ch.col[e]];
            out[i] = s;
        }
    });
}

}  // namespace

Distribution distribution_at(const ChainMatrix& ch, const Distribution& start, double t, double tol) {
    if (!(t >= 0) || !(tol > 0))
        throw ConfigError("distribution_at needs t >= 0 and tol > 0");
    return propagate(ch, start, t, tol, nullptr);
}

Distribution distribution_censored(const ChainMatrix& ch, const Distribution& start, double t0, double t1,
                                   const CensoringScheme& scheme, double tol) {
    if (!(t1 >= t0))
        throw ConfigError("censored evolution needs t1 >= t0");
    // breakpoints of the scheme inside [t0, t1]
    std::vector<double> cuts{t0, t1};
    for (const auto& iv : scheme.intervals()) {
        if (iv.t0 > t0 && iv.t0 < t1)
            cuts.push_back(iv.t0);
        if (iv.t1 > t0 && iv.t1 < t1)
            cuts.push_back(iv.t1);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double pieces = static_cast<double>(cuts.size() - 1);

    Distribution d = start;
    std::vector<char> active(ch.col.size());
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double a = cuts[s], b = cuts[s + 1];
        double mid = 0.5 * (a + b);
        bool any = false;
        for (std::size_t i = 0; i < ch.size(); ++i)
            for (std::size_t e = ch.row_ptr[i]; e < ch.row_ptr[i + 1]; ++e) {
                active[e] = !scheme.blocked(mid, ch.edge[e], ch.center[e]);
                any = any || !active[e];
            }
        d = propagate(ch, d, b - a, tol / pieces, any ? &active : nullptr);
    }
    return d;
}

double tv_to_uniform(const Distribution& d) {
    const double u = 1.0 / static_cast<double>(d.size());
    double s = 0;
    for (double v : d)
        s += std::abs(v - u);
    return 0.5 * s;
}

namespace {

std::vector<Distribution> start_set(const ChainMatrix& ch, Starts starts) {
    std::vector<Distribution> out;
    if (starts == Starts::extremal) {
        out.push_back(point_mass(ch, extremal(ch.n, ch.k, Extremal::max)));
        out.push_back(point_mass(ch, extremal(ch.n, ch.k, Extremal::min)));
    } else {
        for (std::size_t i = 0; i < ch.size(); ++i) {
            Distribution d(ch.size(), 0.0);
            d[i] = 1.0;
            out.push_back(std::move(d));
        }
    }
    return out;
}

double worst_tv(const std::vector<Distribution>& ds) {
    double w = 0;
    for (const auto& d : ds)
        w = std::max(w, tv_to_uniform(d));
    return w;
}

}  // namespace

MixingCurve tv_curve(const ChainMatrix& ch, Starts starts, const std::vector<double>& grid, double tol) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] < 0 || (i && grid[i] < grid[i - 1]))
            throw ConfigError("time grid must be nonnegative and increasing");
    MixingCurve c;
    c.starts = starts;
    c.times = grid;
    auto ds = start_set(ch, starts);
    double t = 0;
    for (double g : grid) {
        for (auto& d : ds)
            d = propagate(ch, d, g - t, tol, nullptr);
        t = g;
        c.d.push_back(worst_tv(ds));
    }
    return c;
}

double mixing_time(const ChainMatrix& ch, const MixingCurve& curve, double eps) {
    if (!(eps > 0 && eps < 1))
        throw ConfigError("eps must lie in (0,1)");
    std::size_t i = 0;
    while (i < curve.d.size() && curve.d[i] > eps)
        ++i;
    if (i == curve.d.size() || i == 0)
        throw InvariantError("mixing curve does not cross eps on its grid");
    auto ds = start_set(ch, curve.starts);
    for (auto& d : ds)
        d = propagate(ch, d, curve.times[i - 1], 1e-13, nullptr);
    double lo = curve.times[i - 1], hi = curve.times[i];
    while (hi - lo > 1e-7 * hi) {
        double mid = 0.5 * (lo + hi);
        auto probe = ds;
        for (auto& d : probe)
            d = propagate(ch, d, mid - lo, 1e-13, nullptr);
        if (worst_tv(probe) > eps) {
            ds = std::move(probe);
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

double gap_of(const ChainMatrix& ch, double residual_tol) {
    const std::size_t n = ch.size();
    if (n < 2)
        throw ConfigError("a single-state chain has no gap");
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    auto deflate = [&](std::vector<double>& v) {
        double s = 0;
        for (double a : v)
            s += a;
        s *= inv_sqrt_n;
        for (double& a : v)
            a -= s * inv_sqrt_n;
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += a[i] * b[i];
        return s;
    };
    auto neg_q = [&](const std::vector<double>& v) {
        auto w = apply_generator(ch, v);
        for (double& a : w)
            a = -a;
        return w;
    };

    std::size_t max_basis = std::min<std::size_t>(n - 1, 800);
    max_basis = std::max<std::size_t>(1, std::min<std::size_t>(max_basis, 60000000 / n));

    std::vector<std::vector<double>> V;
    std::vector<double> alpha, beta;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::sin(0.7 + 1.3 * static_cast<double>(i)) + 0.1 * std::cos(0.37 * static_cast<double>(i * i % 1013));
    deflate(v);
    double nv = std::sqrt(dot(v, v));
    for (double& a : v)
        a /= nv;
    V.push_back(v);

    double theta = 0;
    std::vector<double> ritz;
    for (std::size_t j = 0; j < max_basis; ++j) {
        auto w = neg_q(V[j]);
        deflate(w);
        double a = dot(w, V[j]);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : V) {
                double c = dot(w, q);
                for (std::size_t i = 0; i < n; ++i)
                    w[i] -= c * q[i];
            }
        double b = std::sqrt(dot(w, w));

        SymTridiag t{alpha, std::vector<double>(beta.begin(), beta.end())};
        auto te = tridiag_eigen_ql(t, true);
        theta = te.values[0];
        ritz = te.vectors[0];
        double est = std::abs(b * ritz.back());
        bool exhausted = b <= 1e-13 * std::max(1.0, ch.lambda) || j + 1 == n - 1;
        if (est <= 0.01 * residual_tol || exhausted || j + 1 == max_basis) {
            std::vector<double> y(n, 0.0);
            for (std::size_t q = 0; q < ritz.size(); ++q)
                for (std::size_t i = 0; i < n; ++i)
                    y[i] += ritz[q] * V[q][i];
            double ny = std::sqrt(dot(y, y));
            for (double& yy : y)
                yy /= ny;
            auto ay = neg_q(y);
            double res = 0;
            for (std::size_t i = 0; i < n; ++i)
                res += (ay[i] - theta * y[i]) * (ay[i] - theta * y[i]);
            res = std::sqrt(res);
            if (res <= residual_tol)
                return theta;
            if (exhausted || j + 1 == max_basis) {
                std::ostringstream os;
                os << "Lanczos stagnation after " << (j + 1) << " steps, residual " << res;
                throw InvariantError(os.str());
            }
        }
        beta.push_back(b);
        for (double& x : w)
            x /= b;
        V.push_back(std::move(w));
    }
    throw InvariantError("Lanczos stagnation");
}

std::vector<double> lift_eigenfunction(const ChainMatrix& ch, const std::vector<double>& g, double lambda) {
    if (static_cast<int>(g.size()) != ch.n)
        throw ConfigError("eigenfunction length must be N");
    std::vector<double> f(ch.size(), 0.0);
    double fmax = 0;
    for (std::size_t i = 0; i < ch.size(); ++i) {
        std::uint64_t m = ch.states[i];
        double s = 0;
        while (m) {
            s += g[std::countr_zero(m)];
            m &= m - 1;
        }
        f[i] = s;
        fmax = std::max(fmax, std::abs(s));
    }
    auto qf = apply_generator(ch, f);
    double worst = 0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < ch.size(); ++i) {
        double r = std::abs(qf[i] + lambda * f[i]);
        if (r > worst) {
            worst = r;
            at = i;
        }
    }
    if (worst > 1e-8 * std::max(1.0, lambda) * std::max(fmax, 1e-300)) {
        std::ostringstream os;
        os << "lifted eigenfunction residual " << worst << " at state " << ch.config(at).str();
        throw InvariantError(os.str());
    }
    return f;
}

double dirichlet_form(const ChainMatrix& ch, const std::vector<double>& f) {
    double s = 0;
    for (std::size_t i = 0; i < ch.size(); ++i)
        for (std::size_t e = ch.row_ptr[i]; e < ch.row_ptr[i + 1]; ++e) {
            double d = f[ch.col[e]] - f[i];
            s += ch.rate[e] * d * d;
        }
    return 0.5 * s / static_cast<double>(ch.size());
}

double variance_uniform(const std::vector<double>& f) {
    const double n = static_cast<double>(f.size());
    double m = std::accumulate(f.begin(), f.end(), 0.0) / n, s = 0;
    for (double v : f)
        s += (v - m) * (v - m);
    return s / n;
}

std::vector<double> expected_height(const ChainMatrix& ch, const Distribution& d) {
    std::vector<double> h(ch.n + 1, 0.0);
    for (std::size_t i = 0; i < ch.size(); ++i) {
        if (d[i] == 0)
            continue;
        std::uint64_t m = ch.states[i];
        int s = 0;
        for (int x = 1; x <= ch.n; ++x) {
            s += (m >> (x - 1)) & 1U;
            h[x] += d[i] * (s - static_cast<double>(ch.k) * x / ch.n);
        }
    }
    h[ch.n] = 0;
    return h;
}

// ---- two particles ----------------------------------------------------------

std::vector<double> TwoParticleChain::apply(const std::vector<double>& f) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
        double s = diag[i] * f[i];
        for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e)
            s += rate[e] * f[col[e]];
        out[i] = s;
    }
    return out;
}

TwoParticleChain build_two_particle(const ConductanceProfile& p) {
    const int n = p.n_sites();
    TwoParticleChain tc;
    tc.n = n;
    tc.index.assign(static_cast<std::size_t>(n) * n, -1);
    for (int y = 1; y <= n; ++y)
        for (int x = 1; x <= y; ++x) {
            tc.index[(x - 1) * n + (y - 1)] = static_cast<int>(tc.states.size());
            tc.states.emplace_back(x, y);
        }
    tc.row_ptr.push_back(0);
    tc.diag.assign(tc.size(), 0.0);
    for (std::size_t i = 0; i < tc.size(); ++i) {
        auto [x, y] = tc.states[i];
        auto add = [&](int nx, int ny, double c) {
            tc.col.push_back(static_cast<std::uint32_t>(tc.at(nx, ny)));
            tc.rate.push_back(c);
            tc.diag[i] -= c;
        };
        if (x == y) {
            if (x > 1)
                add(x - 1, x - 1, p.rate(x - 1));
            if (x < n)
                add(x + 1, x + 1, p.rate(x));
        } else {
            if (x > 1)
                add(x - 1, y, p.rate(x - 1));
            add(x + 1, y, p.rate(x));
            add(x, y - 1, p.rate(y - 1));
            if (y < n)
                add(x, y + 1, p.rate(y));
        }
        tc.row_ptr.push_back(tc.col.size());
        tc.lambda = std::max(tc.lambda, -tc.diag[i]);
    }
    return tc;
}

namespace {

std::vector<double> product_function(const TwoParticleChain& tc, const std::vector<double>& gi,
                                     const std::vector<double>& gj) {
    std::vector<double> u(tc.size());
    for (std::size_t s = 0; s < tc.size(); ++s) {
        auto [x, y] = tc.states[s];
        u[s] = gi[x - 1] * gj[y - 1] - gi[y - 1] * gj[x - 1];
    }
    return u;
}

}  // namespace

TwoParticleReport two_particle_check(const ConductanceProfile& p, const std::vector<std::pair<int, int>>& indices,
                                     double tol) {
    const int n = p.n_sites();
    int top = 0;
    for (auto [i, j] : indices) {
        if (!(0 <= i && i < j && j <= n - 1))
            throw ConfigError("index pairs need 0 <= i < j <= N-1");
        top = std::max(top, j);
    }
    auto es = solve_neumann(p, std::max(top, 1), Normalization::unit_norm);
    auto tc = build_two_particle(p);
    TwoParticleReport rep;
    rep.basis_count = static_cast<std::size_t>(n) * (n - 1) / 2;
    rep.offdiag_states = tc.size() - static_cast<std::size_t>(n);

    std::vector<std::vector<double>> us;
    for (auto [i, j] : indices) {
        auto u = product_function(tc, es.functions[i], es.functions[j]);
        auto lu = tc.apply(u);
        double lam = es.eigenvalues[i] + es.eigenvalues[j];
        for (std::size_t s = 0; s < tc.size(); ++s) {
            double r = std::abs(lu[s] + lam * u[s]);
            if (r > rep.max_residual) {
                rep.max_residual = r;
                rep.worst_state = tc.states[s];
                rep.worst_pair = {i, j};
            }
        }
        us.push_back(std::move(u));
    }
    const double n2 = static_cast<double>(n) * n;
    for (std::size_t a = 0; a < us.size(); ++a)
        for (std::size_t b = a; b < us.size(); ++b) {
            double s = 0;
            for (std::size_t q = 0; q < tc.size(); ++q)
                s += us[a][q] * us[b][q];
            double expect = indices[a] == indices[b] ? n2 : 0.0;
            rep.max_orth_error = std::max(rep.max_orth_error, std::abs(s - expect) / n2);
        }
    if (rep.max_residual > tol) {
        std::ostringstream os;
        os << "two-particle eigen residual " << rep.max_residual << " for (i,j)=(" << rep.worst_pair.first << ","
           << rep.worst_pair.second << ") at (x,y)=(" << rep.worst_state.first << "," << rep.worst_state.second
           << ")";
        throw InvariantError(os.str());
    }
    return rep;
}

double no_merge_probability(const ConductanceProfile& p, int x0, int y0, double t) {
    const int n = p.n_sites();
    if (x0 < 1 || y0 > n || x0 > y0)
        throw ConfigError("need 1 <= x0 <= y0 <= N");
    if (x0 == y0)
        return 0.0;
    auto tc = build_two_particle(p);
    std::vector<double> f(tc.size());
    for (std::size_t s = 0; s < tc.size(); ++s)
        f[s] = tc.states[s].first != tc.states[s].second ? 1.0 : 0.0;
    const double lam = tc.lambda;
    auto g = uniformized(f, lam * t, 1e-14, [&](const std::vector<double>& in, std::vector<double>& out) {
        auto q = tc.apply(in);
        for (std::size_t i = 0; i < in.size(); ++i)
            out[i] = in[i] + q[i] / lam;
    });
    return g[tc.at(x0, y0)];
}

double no_merge_spectral(const ConductanceProfile& p, int x0, int y0, double t) {
    const int n = p.n_sites();
    if (x0 < 1 || y0 > n || x0 > y0)
        throw ConfigError("need 1 <= x0 <= y0 <= N");
    if (x0 == y0)
        return 0.0;
    auto es = solve_neumann(p, n - 1, Normalization::unit_norm);
    const double n2 = static_cast<double>(n) * n;
    double total = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const auto& gi = es.functions[i];
            const auto& gj = es.functions[j];
            double coef = 0;
            for (int y = 1; y <= n; ++y)
                for (int x = 1; x < y; ++x)
                    coef += gi[x - 1] * gj[y - 1] - gi[y - 1] * gj[x - 1];
            coef /= n2;
            double u0 = gi[x0 - 1] * gj[y0 - 1] - gi[y0 - 1] * gj[x0 - 1];
            total += coef * std::exp(-(es.eigenvalues[i] + es.eigenvalues[j]) * t) * u0;
        }
    return total;
}

double no_merge_bound(double lambda1, double t, double rho) {
    double k0 = std::ceil(2.0 * std::sqrt(3.0 / rho + 1.0));
    return std::pow(2.0, 14) * k0 * k0 * std::exp(-lambda1 * t);
}

}  // namespace sepmix
