#pragma once

#include <utility>
#include <vector>

#include "eklab/field.hpp"

namespace eklab {

/// Highest derivative order the half-line finite-difference scheme supports.
inline constexpr int halfline_max_order = 4;

/// d^order f / dx_axis^order. Periodic grids differentiate in Fourier space;
/// the half-line uses 4th-order centered stencils with one-sided closures.
ScalarField derivative(const ScalarField& f, int axis, int order = 1);
ComplexField derivative(const ComplexField& f, int axis, int order = 1);

VectorField gradient(const ScalarField& f);
ComplexVectorField gradient(const ComplexField& f);
ScalarField divergence(const VectorField& v);
ComplexField divergence(const ComplexVectorField& v);
ScalarField laplacian(const ScalarField& f);
ComplexField laplacian(const ComplexField& f);
/// Scalar curl dv_y/dx - dv_x/dy of a planar field.
ScalarField curl(const VectorField& v);

/// 2/3-rule truncation: modes with |k| > n/3 on any axis are removed.
ScalarField dealias(const ScalarField& f);
ComplexField dealias(const ComplexField& f);

/// Quadrature: rectangle rule on periodic grids, trapezoid on the half-line.
double integrate(const ScalarField& f);
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
double l2_norm(const ScalarField& f);
double l2_norm(const ComplexField& f);
double l2_norm(const VectorField& v);
double l2_norm(const ComplexVectorField& v);
/// L2 norm computed from the discrete spectrum (periodic grids only).
double spectral_l2_norm(const ComplexField& f);

/// H^s norm. Periodic: Fourier multiplier (1 + |xi|^2)^(s/2).
/// Half-line: sqrt of the sum of squared L2 norms of derivatives 0..s.
double sobolev_norm(const ScalarField& f, int s);
double sobolev_norm(const ComplexField& f, int s);

/// Splits u = q + p with q a gradient (curl free) and p divergence free,
/// via the multiplier xi xi^T / |xi|^2. The zero mode goes to q.
/// Requires a periodic-2d grid.
std::pair<VectorField, VectorField> leray_project(const VectorField& u);
/// As leray_project, but 1-d fields are accepted: q = u, p = 0.
std::pair<VectorField, VectorField> helmholtz_split(const VectorField& u);

/// Sum over 0 <= a0 <= n/2 of ||d_t^a0 z(t_index)||_2, with time derivatives
/// taken by finite differences on a uniformly sampled history.
double xn_tangential_norm(const std::vector<ComplexField>& history, double dt, int n, std::size_t index);

}  // namespace eklab
