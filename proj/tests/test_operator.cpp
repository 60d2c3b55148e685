#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tentlab/operator.hpp"

using namespace tentlab;

namespace {

Field random_field_on(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Field u(g.num_cells());
    for (int i = 0; i < g.num_cells(); ++i) u(i) = Complex(gauss(rng), gauss(rng));
    return u;
}

}  // namespace

TEST_CASE("gradient of simple fields") {
    Grid g(1, 4 * 4, 1.0);  // N >= 8 floor; use N=16 but test the 4-periodic pattern
    Field constant = Field::Constant(g.num_cells(), Complex(3.0, -1.0));
    CHECK(apply_gradient(g, constant).norm() < 1e-14);

    // u alternating 0,1 -> forward difference +-1 over h
    Field u(g.num_cells());
    for (int i = 0; i < g.num_cells(); ++i) u(i) = (i % 2 == 0) ? 0.0 : 1.0;
    VectorField grad = apply_gradient(g, u);
    const double inv_h = g.points_per_axis() / g.period();
    for (int i = 0; i < g.num_cells(); ++i) {
        const double expect = (i % 2 == 0) ? inv_h : -inv_h;
        CHECK(std::abs(grad(i, 0) - Complex(expect, 0.0)) < 1e-12);
    }
}

TEST_CASE("gradient and divergence are exact negative adjoints") {
    for (int dim : {1, 2}) {
        Grid g(dim, dim == 1 ? 64 : 12, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            Field u = random_field_on(g, 100 * dim + trial);
            VectorField v(g.num_cells(), g.dim());
            for (int a = 0; a < g.dim(); ++a) {
                v.col(a) = random_field_on(g, 5000 * dim + 2 * trial + a);
            }
            const Complex lhs = inner_product(g, apply_gradient(g, u), v);
            const Complex rhs = inner_product(g, u, apply_divergence(g, v));
            CHECK(std::abs(lhs + rhs) < 1e-12);
        }
    }
}

TEST_CASE("identity coefficients give the periodic Laplacian") {
    Grid g(1, 16, 1.0);
    DiscreteOperator op(make_coefficient_field("identity", {}, g));
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());

    // stencil oracle: (L u)_i = (2 u_i - u_{i-1} - u_{i+1}) / h^2
    Field u = random_field_on(g, 1);
    Field lu = op.apply(u);
    for (int i = 0; i < 16; ++i) {
        Complex expect =
            (2.0 * u(i) - u((i + 15) % 16) - u((i + 1) % 16)) * inv_h2;
        CHECK(std::abs(lu(i) - expect) < 1e-9 * inv_h2);
    }

    // linearity in the coefficient: A = cI scales the operator by c
    CoefficientParams params;
    params.lo = 2.5;
    params.hi = 2.5;
    DiscreteOperator op_scaled(
        make_coefficient_field("scalar_checkerboard", params, g, 0));
    CHECK((op_scaled.matrix() - 2.5 * op.matrix()).norm() < 1e-10 * op.matrix().norm());
}

TEST_CASE("Fourier diagonalization oracle for A=I eigenvalues") {
    Grid g(1, 32, 1.0);
    DiscreteOperator op(make_coefficient_field("identity", {}, g));
    const int n = 32;
    const double h = g.spacing();
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < n; ++k) {
        Field mode(n);
        for (int j = 0; j < n; ++j) {
            mode(j) = std::exp(Complex(0.0, 2.0 * pi * k * j / n));
        }
        const double lambda = (2.0 - 2.0 * std::cos(2.0 * pi * k / n)) / (h * h);
        CHECK((op.apply(mode) - lambda * mode).norm() < 1e-8 * std::max(1.0, lambda));
    }
}

TEST_CASE("kernel, adjoint and coercivity") {
    Grid g(2, 10, 1.0);
    CoefficientParams params;
    params.epsilon = 0.3;
    CoefficientField coeffs = make_coefficient_field("complex_perturbation", params, g, 9);
    DiscreteOperator op(coeffs);

    // constants are in the kernel; rows sum to zero
    Field c = Field::Constant(g.num_cells(), Complex(1.0, 2.0));
    CHECK(op.apply(c).norm() < 1e-10 * op.matrix().norm());

    // adjoint pairing and exact conjugate transpose
    CHECK((op.adjoint_matrix() - op.matrix().adjoint()).norm() == 0.0);
    for (int trial = 0; trial < 100; ++trial) {
        Field u = random_field_on(g, 10 + trial);
        Field v = random_field_on(g, 900 + trial);
        const Complex lhs = inner_product(g, op.apply(u), v);
        const Complex rhs = inner_product(g, u, op.apply_adjoint(v));
        CHECK(std::abs(lhs - rhs) <
              1e-12 * op.matrix().norm() * u.norm() * v.norm() + 1e-13);
    }

    // Re<Lu, u> >= lambda0 ||grad u||^2 and the sector condition
    for (int trial = 0; trial < 50; ++trial) {
        Field u = random_field_on(g, 300 + trial);
        const Complex form = inner_product(g, op.apply(u), u);
        VectorField grad = apply_gradient(g, u);
        const double grad2 = inner_product(g, grad, grad).real();
        CHECK(form.real() >= coeffs.lambda0() * grad2 - 1e-10 * grad2);
        CHECK(std::abs(form.imag()) <=
              (coeffs.lambda1() / coeffs.lambda0()) * form.real() + 1e-10);
    }
}

TEST_CASE("weak form exactness") {
    Grid g(1, 48, 1.0);
    CoefficientParams params;
    params.lo = 1.0;
    params.hi = 10.0;
    CoefficientField coeffs = make_coefficient_field("scalar_checkerboard", params, g, 2);
    DiscreteOperator op(coeffs);
    for (int trial = 0; trial < 100; ++trial) {
        Field u = random_field_on(g, 40 + trial);
        Field phi = random_field_on(g, 7000 + trial);
        const Complex lhs = inner_product(g, op.apply(u), phi);
        VectorField agrad = op.apply_coefficients(apply_gradient(g, u));
        const Complex rhs = inner_product(g, agrad, apply_gradient(g, phi));
        CHECK(std::abs(lhs - rhs) < 1e-9 * (std::abs(lhs) + std::abs(rhs) + 1.0));
    }
}

TEST_CASE("grid mismatch and caps") {
    Grid g(1, 16, 1.0);
    DiscreteOperator op(make_coefficient_field("identity", {}, g));
    Field wrong(8);
    wrong.setOnes();
    CHECK_THROWS(op.apply(wrong));

    CHECK_THROWS(DiscreteOperator(
        make_coefficient_field("identity", {}, Grid(2, 64, 1.0))));
}
