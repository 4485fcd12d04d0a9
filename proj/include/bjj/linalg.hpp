#pragma once
// Small dense eigensolvers used across the project: Sturm-sequence bisection
// plus inverse iteration for real symmetric tridiagonal matrices (grid
// Hamiltonians, the Bose-Hubbard dimer), and a cyclic Jacobi eigensolver for
// complex Hermitian matrices (density-matrix functions, Uhlmann fidelity).

#include <complex>
#include <cstddef>
#include <vector>

namespace bjj::linalg {

struct TridiagEigenResult {
  std::vector<double> values;               // ascending
  std::vector<std::vector<double>> vectors; // normalized, one per value
};

// k lowest eigenpairs of the symmetric tridiagonal matrix (diag, off).
// off has diag.size()-1 entries.
TridiagEigenResult sym_tridiag_lowest(const std::vector<double>& diag,
                                      const std::vector<double>& off,
                                      std::size_t k);

// k lowest eigenvalues only (no vectors).
std::vector<double> sym_tridiag_eigenvalues(const std::vector<double>& diag,
                                            const std::vector<double>& off,
                                            std::size_t k);

struct HermitianEigenResult {
  std::vector<double> values;  // ascending
  // column j of `vectors` (vectors[i*n+j] for row i) is the eigenvector of
  // values[j]
  std::vector<std::complex<double>> vectors;
  std::size_t n = 0;
};

// Full eigendecomposition of an n x n complex Hermitian matrix stored
// row-major. Cyclic Jacobi; fine for the small matrices this project needs.
HermitianEigenResult hermitian_eigen(const std::vector<std::complex<double>>& a,
                                     std::size_t n);

}  // namespace bjj::linalg
