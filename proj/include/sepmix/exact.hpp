// Exact computations on the full state space: sparse generator, uniformized
// propagation, total variation curves, Lanczos gap, lifted eigenfunctions,
// and the coalescing two-particle chain.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sepmix/config.hpp"
#include "sepmix/coupling.hpp"
#include "sepmix/profile.hpp"

namespace sepmix {

constexpr std::size_t default_state_budget = 200000;

struct ChainMatrix {
    int n = 0, k = 0;
    std::vector<std::uint64_t> states;  // colex order; bit x-1 is site x
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> rate;
    std::vector<int> edge;              // x of the swapped edge
    std::vector<int> center;            // j of the flipped corner
    std::vector<double> diag;
    double lambda = 0;                  // uniformization constant

    std::size_t size() const { return states.size(); }
    std::size_t index_of(std::uint64_t mask) const;
    std::size_t index_of(const Configuration& c) const { return index_of(c.mask()); }
    Configuration config(std::size_t i) const { return Configuration::from_mask(n, states[i]); }

    std::vector<std::uint64_t> binom_;  // (n+1) x (k+1) table for ranking
};

ChainMatrix build_chain(const ConductanceProfile& p, int k, std::size_t budget = default_state_budget);

using Distribution = std::vector<double>;

Distribution point_mass(const ChainMatrix& ch, const Configuration& c);

// (Q f)(i) = sum_j Q(i,j) f(j); Q is symmetric so this also moves distributions
std::vector<double> apply_generator(const ChainMatrix& ch, const std::vector<double>& f);

Distribution distribution_at(const ChainMatrix& ch, const Distribution& start, double t, double tol = 1e-12);

// generator piecewise constant on the scheme's intervals; rings at blocked
// corners are removed. Evolves from t0 to t1.
Distribution distribution_censored(const ChainMatrix& ch, const Distribution& start, double t0, double t1,
                                   const CensoringScheme& scheme, double tol = 1e-12);

double tv_to_uniform(const Distribution& d);

enum class Starts { all, extremal };

struct MixingCurve {
    Starts starts = Starts::extremal;
    std::vector<double> times, d;
};

MixingCurve tv_curve(const ChainMatrix& ch, Starts starts, const std::vector<double>& grid, double tol = 1e-12);

// first time d(t) <= eps, refined by bisection to 1e-6 relative
double mixing_time(const ChainMatrix& ch, const MixingCurve& curve, double eps);

// smallest nonzero eigenvalue of -Q
double gap_of(const ChainMatrix& ch, double residual_tol = 1e-9);

// F(xi) = sum_x xi(x) g(x), checked against Q F = -lambda F
std::vector<double> lift_eigenfunction(const ChainMatrix& ch, const std::vector<double>& g, double lambda);

double dirichlet_form(const ChainMatrix& ch, const std::vector<double>& f);
double variance_uniform(const std::vector<double>& f);

// E[h(x)], x = 0..N, unscaled
std::vector<double> expected_height(const ChainMatrix& ch, const Distribution& d);

// ---- two particles, merged on contact -----------------------------------

struct TwoParticleChain {
    int n = 0;
    std::vector<std::pair<int, int>> states;  // (x, y), x <= y
    std::vector<int> index;                   // (x-1)*n + (y-1) -> state, -1 if x > y
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> rate;
    std::vector<double> diag;
    double lambda = 0;

    std::size_t size() const { return states.size(); }
    int at(int x, int y) const { return index[(x - 1) * n + (y - 1)]; }
    std::vector<double> apply(const std::vector<double>& f) const;
};

TwoParticleChain build_two_particle(const ConductanceProfile& p);

struct TwoParticleReport {
    double max_residual = 0;
    std::pair<int, int> worst_state{0, 0};
    std::pair<int, int> worst_pair{0, 0};
    double max_orth_error = 0;  // relative to N^2
    std::size_t basis_count = 0;
    std::size_t offdiag_states = 0;
};

TwoParticleReport two_particle_check(const ConductanceProfile& p, const std::vector<std::pair<int, int>>& indices,
                                     double tol = 1e-8);

double no_merge_probability(const ConductanceProfile& p, int x0, int y0, double t);
double no_merge_spectral(const ConductanceProfile& p, int x0, int y0, double t);
// 2^14 K0^2 e^{-lambda_1 t}, K0 = ceil(2 sqrt(3/rho + 1))
double no_merge_bound(double lambda1, double t, double rho);

}  // namespace sepmix
