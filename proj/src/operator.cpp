#include "tentlab/operator.hpp"

#include <stdexcept>

namespace tentlab {

VectorField apply_gradient(const Grid& grid, const Field& u) {
    if (u.size() != grid.num_cells()) {
        throw std::invalid_argument("apply_gradient: field size mismatch");
    }
    const int n = grid.points_per_axis();
    const double inv_h = 1.0 / grid.spacing();
    VectorField g(grid.num_cells(), grid.dim());
    if (grid.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            g(i, 0) = (u((i + 1) % n) - u(i)) * inv_h;
        }
    } else {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                int c = grid.index(ix, iy);
                g(c, 0) = (u(grid.index(ix + 1, iy)) - u(c)) * inv_h;
                g(c, 1) = (u(grid.index(ix, iy + 1)) - u(c)) * inv_h;
            }
        }
    }
    return g;
}

Field apply_divergence(const Grid& grid, const VectorField& v) {
    if (v.rows() != grid.num_cells() || v.cols() != grid.dim()) {
        throw std::invalid_argument("apply_divergence: field size mismatch");
    }
    const int n = grid.points_per_axis();
    const double inv_h = 1.0 / grid.spacing();
    Field d(grid.num_cells());
    if (grid.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            d(i) = (v(i, 0) - v((i - 1 + n) % n, 0)) * inv_h;
        }
    } else {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                int c = grid.index(ix, iy);
                d(c) = (v(c, 0) - v(grid.index(ix - 1, iy), 0)) * inv_h +
                       (v(c, 1) - v(grid.index(ix, iy - 1), 1)) * inv_h;
            }
        }
    }
    return d;
}

DiscreteOperator::DiscreteOperator(const CoefficientField& field)
    : grid_(field.grid()),
      lambda0_(field.lambda0()),
      lambda1_(field.lambda1()),
      descriptor_(field.serialize()) {
    if (grid_.dim() == 1 && grid_.points_per_axis() > 512) {
        throw std::invalid_argument("DiscreteOperator: 1D cap is N = 512");
    }
    if (grid_.dim() == 2 && grid_.points_per_axis() > 32) {
        throw std::invalid_argument("DiscreteOperator: 2D cap is N = 32 per axis");
    }
    coeffs_.reserve(grid_.num_cells());
    for (int c = 0; c < grid_.num_cells(); ++c) coeffs_.push_back(field.matrix(c));

    const int nn = grid_.num_cells();
    matrix_.resize(nn, nn);
    Field e = Field::Zero(nn);
    for (int j = 0; j < nn; ++j) {
        e(j) = 1.0;
        matrix_.col(j) = -apply_divergence(grid_, apply_coefficients(apply_gradient(grid_, e)));
        e(j) = 0.0;
    }
    adjoint_ = matrix_.adjoint();
}

VectorField DiscreteOperator::apply_coefficients(const VectorField& v) const {
    VectorField out(v.rows(), v.cols());
    for (int c = 0; c < grid_.num_cells(); ++c) {
        const CellMatrix& a = coeffs_[c];
        if (grid_.dim() == 1) {
            out(c, 0) = a(0, 0) * v(c, 0);
        } else {
            out(c, 0) = a(0, 0) * v(c, 0) + a(0, 1) * v(c, 1);
            out(c, 1) = a(1, 0) * v(c, 0) + a(1, 1) * v(c, 1);
        }
    }
    return out;
}

Field DiscreteOperator::apply(const Field& u) const {
    if (u.size() != grid_.num_cells()) {
        throw std::invalid_argument("DiscreteOperator::apply: grid mismatch");
    }
    return matrix_ * u;
}

Field DiscreteOperator::apply_adjoint(const Field& u) const {
    if (u.size() != grid_.num_cells()) {
        throw std::invalid_argument("DiscreteOperator::apply_adjoint: grid mismatch");
    }
    return adjoint_ * u;
}

DiscreteOperator assemble_operator(const CoefficientField& field) {
    return DiscreteOperator(field);
}

Complex inner_product(const Grid& grid, const Field& u, const Field& v) {
    return (v.adjoint() * u)(0) * grid.cell_volume();
}

Complex inner_product(const Grid& grid, const VectorField& u, const VectorField& v) {
    Complex s = 0.0;
    for (int a = 0; a < u.cols(); ++a) {
        s += (v.col(a).adjoint() * u.col(a))(0);
    }
    return s * grid.cell_volume();
}

}  // namespace tentlab
