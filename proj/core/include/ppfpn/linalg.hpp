#pragma once

#include <cstddef>
#include <vector>

namespace ppfpn::linalg {

// Solves the dense system A x = b with partial-pivot LU followed by one round
// of iterative refinement in extended precision. A is row-major n x n and is
// left factorized in place.
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b);

// Residual of A x = b in the infinity norm, accumulated in long double.
double residual_inf(const std::vector<double>& A, const std::vector<double>& x,
                    const std::vector<double>& b);

}
