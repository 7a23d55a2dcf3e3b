// Eigenproblems on a conductance profile:
//  - the one-particle generator L (Neumann ends), eigenvalues 0 = l0 < l1 < ...
//  - the Dirichlet conductance Laplacian A-hat with its reversing measure nu
//    and the shooting recursion b(kappa, x)
//  - the principal eigenfunction G of an extended segment
#pragma once

#include <vector>

#include "sepmix/config.hpp"
#include "sepmix/profile.hpp"

namespace sepmix {

enum class Boundary { neumann, dirichlet };

// generic tridiagonal operator; lower[i] couples row i+1 to column i
struct TriDiagOperator {
    Boundary boundary;
    std::vector<double> diag, lower, upper;

    std::size_t size() const { return diag.size(); }
    std::vector<double> apply(const std::vector<double>& v) const;
};

TriDiagOperator neumann_operator(const ConductanceProfile& p);    // L, N x N
TriDiagOperator dirichlet_operator(const ConductanceProfile& p);  // A-hat, (N-1) x (N-1)

enum class Normalization { first_site, unit_norm };

struct EigenSystem {
    Boundary boundary;
    // positive values: L g = -l g. Neumann holds l_0..l_count, Dirichlet
    // holds kappa_1..kappa_count at positions 0..count-1.
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> functions;  // functions[i][x-1]
    std::vector<double> measure;                 // uniform 1/N, or nu
    Normalization normalization;

    double g(std::size_t i, int x) const { return functions[i][x - 1]; }
    double inner(const std::vector<double>& a, const std::vector<double>& b) const;
    // max over returned pairs of |L g + l g|_inf / max(1, l)
    double max_residual(const ConductanceProfile& p) const;
};

EigenSystem solve_neumann(const ConductanceProfile& p, int count, Normalization norm = Normalization::first_site);

// nu(x) = r(x,x+1) / sum r, x = 1..N-1
std::vector<double> dirichlet_measure(const ConductanceProfile& p);

enum class DirichletMethod { dense, shooting };
EigenSystem solve_dirichlet(const ConductanceProfile& p, int count, DirichletMethod method = DirichletMethod::dense,
                            Normalization norm = Normalization::unit_norm);

// a point of the real projective line, num/den with den = 0 the point at infinity
struct Projective {
    double num = 1, den = 0;
    bool is_infinite() const { return den == 0; }
    double value() const;
    bool above_one() const;  // in (1, inf]
};

// b(kappa, 1..N), entry x-1
std::vector<Projective> b_recursion(const ConductanceProfile& p, double kappa);

// lifted angle theta(kappa, N); tan(theta) = b(kappa, N), theta(kappa, 1) = pi/2
double lifted_angle(const ConductanceProfile& p, double kappa);

// number of Dirichlet eigenvalues below kappa; throws when kappa sits on one
int angle_count(const ConductanceProfile& p, double kappa);

struct ExtendedEigenData {
    double delta = 0;
    int m = 0;      // floor(delta N)
    int n_bar = 0;  // N + 2m + 1
    double lambda_bar1 = 0;
    std::vector<double> G;      // G(x) for x = -m..N+m, entry x+m
    std::vector<double> G_bar;  // G(x) - G(x+1) for x = 1..N-1, entry x-1
    double delta_min = 0, delta_max = 0;
    double delta_min_partial_sums = 0;

    double at(int x) const { return G[x + m]; }
    double bar(int x) const { return G_bar[x - 1]; }
};

ExtendedEigenData solve_extended(const ConductanceProfile& p, double delta);

// sum_i <h0, g_i>_nu e^{-kappa_i t} g_i(x), x = 0..N
std::vector<double> heat_solution(const ConductanceProfile& p, const HeightFunction& h0, double t);
std::vector<double> heat_solution(const EigenSystem& dir, const std::vector<double>& h0, double t);

// closed forms for the unit-conductance segment
double homogeneous_eigenvalue(int n, int i);                 // 2(1 - cos(i pi / N))
double cosine_shape(int n, int i, int x);                    // cos(i pi (x - 1/2) / N)
double sine_shape(int n, int i, int x);                      // sin(i pi x / N)

// (c grad f)(x) = c(x-1,x)[f(x) - f(x-1)] for x = 2..N, entry x-1; entry 0 is 0
std::vector<double> weighted_gradient(const ConductanceProfile& p, const std::vector<double>& f);

}  // namespace sepmix
