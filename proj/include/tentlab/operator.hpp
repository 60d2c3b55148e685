#pragma once

#include <Eigen/Dense>

#include "tentlab/coefficients.hpp"
#include "tentlab/geometry.hpp"

namespace tentlab {

using Field = Eigen::VectorXcd;
/// Vector field: one column per axis.
using VectorField = Eigen::MatrixXcd;

/// Forward-difference gradient with wraparound, scaled 1/h. One column per axis.
VectorField apply_gradient(const Grid& grid, const Field& u);

/// Exact negative adjoint of apply_gradient: <grad u, v> = -<u, div v> to roundoff.
Field apply_divergence(const Grid& grid, const VectorField& v);

/// L = -div(A grad), assembled in divergence form so the discrete
/// integration-by-parts identity <Lu, phi> = <A grad u, grad phi> is exact.
/// Dense storage; desk-scale caps 1D N <= 512, 2D N <= 32 per axis.
class DiscreteOperator {
public:
    explicit DiscreteOperator(const CoefficientField& field);

    const Grid& grid() const { return grid_; }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    const Eigen::MatrixXcd& adjoint_matrix() const { return adjoint_; }
    double lambda0() const { return lambda0_; }
    double lambda1() const { return lambda1_; }
    const std::string& coefficient_descriptor() const { return descriptor_; }

    /// A(x) applied cell-wise to a vector field.
    VectorField apply_coefficients(const VectorField& v) const;

    Field apply(const Field& u) const;
    Field apply_adjoint(const Field& u) const;

private:
    Grid grid_;
    std::vector<CellMatrix> coeffs_;
    Eigen::MatrixXcd matrix_;
    Eigen::MatrixXcd adjoint_;
    double lambda0_;
    double lambda1_;
    std::string descriptor_;
};

DiscreteOperator assemble_operator(const CoefficientField& field);

/// L2 inner product with the grid measure h^dim: sum conj(v_i) u_i h^n.
Complex inner_product(const Grid& grid, const Field& u, const Field& v);
Complex inner_product(const Grid& grid, const VectorField& u, const VectorField& v);

}  // namespace tentlab
