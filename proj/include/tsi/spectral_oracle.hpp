#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "tsi/invariants.hpp"

namespace tsi {

/* Finite-difference magnetic Schrodinger operator on the torus, built on an
 * n x n grid of cell coordinates. Covariant second differences carry exact
 * line-integral hop phases; the oblique metric's cross term rides on
 * diagonal hops; boundary wraps apply the magnetic-translation phases
 * u(x + e_j) = exp(i A0(e_j).x) u(x), composed e2-then-e1. Entries are
 * written in conjugate pairs, so the matrix is Hermitian by construction. */
struct discrete_hamiltonian {
    lattice lat;
    int n = 0;                         // grid dimension (n x n sites)
    Eigen::SparseMatrix<cplx> matrix;  // dimension n^2

    double hermiticity_defect() const;  // max |H_ij - conj(H_ji)|
};

/* Requires unit flux b0 * cell area = 2 pi: the wraparound phases close up
 * around the cell corner only for quantized flux. */
discrete_hamiltonian assemble_hamiltonian(const magnetic_potential& a,
                                          const scalar_field& v, int n);

/* The `count` smallest eigenvalues, ascending, by shift-invert Lanczos with
 * full reorthogonalization; the shift sits below the whole spectrum via a
 * Gershgorin bound. Every returned pair is verified against the matrix:
 * ||H v - lambda v|| <= residual_tol * ||v||, else ConvergenceFailure. */
std::vector<double> lowest_eigenvalues(const Eigen::SparseMatrix<cplx>& h,
                                       int count, double residual_tol = 1e-8);
std::vector<double> lowest_eigenvalues(const discrete_hamiltonian& h,
                                       int count, double residual_tol = 1e-8);

/* max_{i < n} |s1[i] - s2[i]| over two ascending spectra. */
double isospectrality_check(const std::vector<double>& s1,
                            const std::vector<double>& s2, int n);

/* sum_j cos(t sqrt(lambda_j)) exp(-lambda_j / (2 width^2)) sampled on
 * t_grid. `width` cuts off in frequency sqrt(lambda); keep it well below
 * sqrt(max lambda) so the truncation tail is suppressed. Qualitative tool:
 * peaks are expected near the lengths of short lattice vectors. */
std::vector<double> smoothed_wave_trace(const std::vector<double>& spectrum,
                                        const std::vector<double>& t_grid,
                                        double width);

}  // namespace tsi
