#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftscope/fields.hpp"
#include "driftscope/smalltime.hpp"
#include "driftscope/sparse.hpp"

namespace driftscope {

// Discretization of 1/2 a^{ij} u_ij + b^i u_i = V u on the nodes strictly inside the
// domain, with Dirichlet data g. Rows are stored negated so the diagonal is positive.
struct LinearSystem {
  Grid grid;
  std::vector<std::size_t> node_of_unknown;
  std::vector<std::size_t> unknown_of_node;  // SIZE_MAX for nodes that are not unknowns
  CsrMatrix matrix;
  std::vector<double> rhs;
  // Dirichlet data carried to every non-unknown node: g at its nearest boundary point.
  std::vector<double> boundary_fill;
  // Initial guess: the same extension evaluated at the unknowns.
  std::vector<double> initial_guess;
  double peclet_max = 0.0;
  std::vector<std::string> warnings;

  std::size_t dimension() const { return node_of_unknown.size(); }
};

// Shortley-Weller unequal arms wherever a stencil leg crosses the boundary, with g taken
// at the exact crossing. The mixed derivative comes from second derivatives along the
// two cell diagonals, which reduces to the 4-point cross stencil away from the boundary.
LinearSystem assemble_dirichlet_system(const DiffusionField& a, const VectorField& b, const ScalarField& v,
                                       const DomainSpec& domain, const ScalarFn& g);

struct BvpSolution {
  ScalarField u;
  std::vector<char> mask;  // 1 on unknowns
  double residual_norm = 0.0;
  std::size_t iterations = 0;
  double min_u = 0.0;
  double smallest_ritz = 0.0;
  double peclet_max = 0.0;
  bool used_cg = false;
  std::vector<std::string> warnings;
};

// Jacobi-preconditioned CG when the matrix is exactly symmetric, BiCGStab otherwise.
// Throws SolverError on breakdown or if tol is not reached within max_iter.
BvpSolution solve_bvp(const LinearSystem& system, double tol = 1e-10, std::size_t max_iter = 20000);

// g(x) = exp(psi(x) - psi(y0)) with y0 the reference node of psi.
ScalarFn boundary_values_from_psi(const BoundaryPsi& psi);

// CSV "residual,iterations,min_u,peclet_max".
void write_bvp_diagnostics_csv(std::ostream& out, const BvpSolution& s);

}  // namespace driftscope
