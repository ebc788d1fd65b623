#pragma once

#include "csnt/field.hpp"
#include "csnt/spectral.hpp"

namespace csnt {

// Spectral differential and integral operators on the torus. Each function is
// pure; inputs must be finite.

VectorField gradient(const ScalarField& f);
/// (grad u + grad u^T) / 2
TensorField symmetric_gradient(const VectorField& u);
/// Full Jacobian, entry (i, j) = d_j u_i.
TensorField jacobian(const VectorField& u);
ScalarField divergence(const VectorField& u);
/// Row-wise divergence: (div S)_i = sum_j d_j S_ij.
VectorField divergence_tensor(const TensorField& s);

/// Applies the Fourier multiplier (-|xi|^2)^k, i.e. Delta^k. k >= 1.
ScalarField laplacian_power(const ScalarField& f, int k);
VectorField laplacian_power(const VectorField& u, int k);

/// psi with Delta psi = f - {f} and {psi} = 0.
ScalarField inverse_laplacian_zero_mean(const ScalarField& f);

/// {f} = (1/|T^d|) int f dx
double mean(const ScalarField& f);
VectorField project_zero_mean(const VectorField& u);
ScalarField subtract_mean(const ScalarField& f);

/// Removes every mode outside the 2/3-rule band.
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& u);

/// (int |f|^p dx)^(1/p) by grid quadrature, max |f| for p = infinity.
double lp_norm(const ScalarField& f, double p);
/// L^p norm of the pointwise Euclidean length |u(x)|.
double lp_norm(const VectorField& u, double p);
/// L^p norm of the pointwise Frobenius norm.
double lp_norm(const TensorField& t, double p);

/// int f g dx by grid quadrature.
double integrate(const ScalarField& f);
double inner(const ScalarField& f, const ScalarField& g);
double inner(const VectorField& u, const VectorField& v);

/// ||u||_inf + max_x sum_ij |d_j u_i(x)|; the second term dominates |div u|.
double w1inf_norm(const VectorField& u);

/// Pointwise trace of a tensor field.
ScalarField trace(const TensorField& t);

}  // namespace csnt
