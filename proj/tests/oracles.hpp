// Independent reference computations for the tests, built from the model's
// rules with Eigen's dense solvers; none of them reuse library solvers.
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "sepmix/profile.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// one-particle generator, N x N
inline MatrixXd neumann_dense(const sepmix::ConductanceProfile& p) {
    const int n = p.n_sites();
    MatrixXd L = MatrixXd::Zero(n, n);
    for (int x = 1; x < n; ++x) {
        double c = p.rate(x);
        L(x - 1, x) += c;
        L(x, x - 1) += c;
        L(x - 1, x - 1) -= c;
        L(x, x) -= c;
    }
    return L;
}

// rows c(x,x+1) (1, -2, 1), (N-1) x (N-1)
inline MatrixXd dirichlet_dense(const sepmix::ConductanceProfile& p) {
    const int m = p.n_sites() - 1;
    MatrixXd A = MatrixXd::Zero(m, m);
    for (int x = 1; x <= m; ++x) {
        double c = p.rate(x);
        A(x - 1, x - 1) = -2 * c;
        if (x > 1)
            A(x - 1, x - 2) = c;
        if (x < m)
            A(x - 1, x) = c;
    }
    return A;
}

// ascending positive values -eig
inline std::vector<double> neg_eigs_sym(const MatrixXd& L) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(-L);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.begin(), v.end());
    return v;
}

inline std::vector<double> neg_eigs_general(const MatrixXd& A) {
    Eigen::EigenSolver<MatrixXd> es(-A);
    std::vector<double> v;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        v.push_back(es.eigenvalues()[i].real());
    std::sort(v.begin(), v.end());
    return v;
}

// number of Dirichlet eigenvalues below kappa: negative pivots of K - kappa R
inline int inertia_count(const sepmix::ConductanceProfile& p, double kappa) {
    const int m = p.n_sites() - 1;
    int neg = 0;
    double d = 0;
    for (int x = 1; x <= m; ++x) {
        double a = 2 - kappa * p.resistance(x);
        d = x == 1 ? a : a - 1.0 / d;
        if (d < 0)
            ++neg;
    }
    return neg;
}

// full k-particle generator on masks in a private order
struct DenseChain {
    std::vector<std::uint64_t> states;
    std::map<std::uint64_t, int> index;
    MatrixXd Q;
};

inline DenseChain chain_dense(const sepmix::ConductanceProfile& p, int k) {
    const int n = p.n_sites();
    DenseChain c;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
        if (std::popcount(m) == k) {
            c.index[m] = static_cast<int>(c.states.size());
            c.states.push_back(m);
        }
    const int s = static_cast<int>(c.states.size());
    c.Q = MatrixXd::Zero(s, s);
    for (int i = 0; i < s; ++i) {
        std::uint64_t m = c.states[i];
        for (int x = 1; x < n; ++x) {
            bool a = (m >> (x - 1)) & 1, b = (m >> x) & 1;
            if (a == b)
                continue;
            int j = c.index.at(m ^ (std::uint64_t{3} << (x - 1)));
            c.Q(i, j) += p.rate(x);
            c.Q(i, i) -= p.rate(x);
        }
    }
    return c;
}

// coalescing pair generator, states (x,y) with x <= y, index (x-1)*N + (y-1)
inline MatrixXd two_particle_dense(const sepmix::ConductanceProfile& p) {
    const int n = p.n_sites();
    MatrixXd G = MatrixXd::Zero(n * n, n * n);
    auto id = [n](int x, int y) { return (x - 1) * n + (y - 1); };
    for (int x = 1; x <= n; ++x)
        for (int y = x; y <= n; ++y) {
            auto move = [&](int nx, int ny, double c) {
                G(id(x, y), id(nx, ny)) += c;
                G(id(x, y), id(x, y)) -= c;
            };
            if (x == y) {
                if (x > 1)
                    move(x - 1, x - 1, p.rate(x - 1));
                if (x < n)
                    move(x + 1, x + 1, p.rate(x));
                continue;
            }
            if (x > 1)
                move(x - 1, y, p.rate(x - 1));
            move(x + 1, y, p.rate(x));
            move(x, y - 1, p.rate(y - 1));
            if (y < n)
                move(x, y + 1, p.rate(y));
        }
    return G;
}

inline double tv_uniform(const VectorXd& d) {
    const double u = 1.0 / static_cast<double>(d.size());
    return 0.5 * (d.array() - u).abs().sum();
}

}  // namespace oracle
