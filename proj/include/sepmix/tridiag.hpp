// Symmetric tridiagonal eigensolvers: implicit QL for the full spectrum,
// Sturm bisection plus inverse iteration for the bottom of it.
#pragma once

#include <cstddef>
#include <vector>

namespace sepmix {

struct SymTridiag {
    std::vector<double> diag;  // n
    std::vector<double> off;   // n-1, off[i] couples i and i+1

    std::size_t size() const { return diag.size(); }
};

struct TridiagEigen {
    std::vector<double> values;                // ascending
    std::vector<std::vector<double>> vectors;  // unit Euclidean norm, one per value
};

TridiagEigen tridiag_eigen_ql(const SymTridiag& t, bool want_vectors = true, int max_sweeps = 60);

// number of eigenvalues strictly below x
std::size_t sturm_count(const SymTridiag& t, double x);

double gershgorin_max(const SymTridiag& t);
double gershgorin_min(const SymTridiag& t);

// i-th smallest eigenvalue (0-based) by bisection on the Sturm count
double bisect_eigenvalue(const SymTridiag& t, std::size_t i, double rel_tol = 1e-15, int max_iter = 400);

// eigenvector for an eigenvalue estimate, unit Euclidean norm
std::vector<double> inverse_iteration(const SymTridiag& t, double lambda, int iters = 3);

// the `count` smallest eigenpairs, by bisection + inverse iteration
TridiagEigen tridiag_lowest(const SymTridiag& t, std::size_t count);

std::vector<double> tridiag_apply(const SymTridiag& t, const std::vector<double>& v);

}  // namespace sepmix
