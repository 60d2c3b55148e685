#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tentlab/coefficients.hpp"

using namespace tentlab;

namespace {

Eigen::Vector2cd random_vector(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> gauss;
    Eigen::Vector2cd v = Eigen::Vector2cd::Zero();
    for (int i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    return v;
}

// Re<A xi, xi> >= lambda0 |xi|^2 and |<A xi, eta>| <= lambda1 |xi||eta| sampled
// over random vectors; the certification oracle independent of the generator.
void check_ellipticity_samples(const CoefficientField& field, int samples,
                               std::uint64_t seed) {
    const int dim = field.grid().dim();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cell_dist(0, field.grid().num_cells() - 1);
    for (int i = 0; i < samples; ++i) {
        const int cell = cell_dist(rng);
        const CellMatrix& a = field.matrix(cell);
        Eigen::Vector2cd xi = random_vector(rng, dim);
        Eigen::Vector2cd eta = random_vector(rng, dim);
        const double form = ((a * xi).dot(xi)).real();  // Eigen dot conjugates lhs
        CHECK(form >= field.lambda0() * xi.squaredNorm() - 1e-12);
        const double pairing = std::abs((a * xi).dot(eta));
        CHECK(pairing <= field.lambda1() * xi.norm() * eta.norm() + 1e-12);
    }
}

}  // namespace

TEST_CASE("identity field") {
    Grid g(1, 16, 1.0);
    CoefficientField f = make_coefficient_field("identity", {}, g);
    CHECK(f.lambda0() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.lambda1() == doctest::Approx(1.0).epsilon(1e-14));
    for (int c = 0; c < g.num_cells(); ++c) {
        CHECK(std::abs(f.matrix(c)(0, 0) - Complex(1.0, 0.0)) < 1e-15);
    }
}

TEST_CASE("scalar checkerboard constants") {
    Grid g(2, 16, 1.0);
    CoefficientParams params;
    params.lo = 1.0;
    params.hi = 10.0;
    CoefficientField f = make_coefficient_field("scalar_checkerboard", params, g, 3);
    CHECK(f.lambda0() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.lambda1() == doctest::Approx(10.0).epsilon(1e-12));
    check_ellipticity_samples(f, 2000, 11);
}

TEST_CASE("complex perturbation keeps ellipticity") {
    Grid g(2, 16, 1.0);
    CoefficientParams params;
    params.epsilon = 0.3;
    CoefficientField f = make_coefficient_field("complex_perturbation", params, g, 5);
    CHECK(f.lambda0() >= 0.7 - 1e-12);
    check_ellipticity_samples(f, 2000, 13);

    // independent oracle: minimize Re<A xi, xi> over many random unit xi per cell
    std::mt19937_64 rng(99);
    double min_form = 1e300;
    for (int c = 0; c < g.num_cells(); ++c) {
        for (int i = 0; i < 50; ++i) {
            Eigen::Vector2cd xi = random_vector(rng, 2).normalized();
            min_form = std::min(min_form, ((f.matrix(c) * xi).dot(xi)).real());
        }
    }
    CHECK(min_form >= f.lambda0() - 1e-12);
}

TEST_CASE("ellipticity constants closed form") {
    Grid g(2, 8, 1.0);
    // A = diag(2, 5) constant
    std::vector<CellMatrix> mats(g.num_cells());
    for (auto& m : mats) {
        m.setZero();
        m(0, 0) = 2.0;
        m(1, 1) = 5.0;
    }
    auto [l0, l1] = ellipticity_constants(g, mats);
    CHECK(l0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(l1 == doctest::Approx(5.0).epsilon(1e-14));

    // 1D scalar 1 + 0.4i
    Grid g1(1, 8, 1.0);
    std::vector<CellMatrix> mats1(g1.num_cells());
    for (auto& m : mats1) {
        m.setZero();
        m(0, 0) = Complex(1.0, 0.4);
        m(1, 1) = 1.0;  // unused axis
    }
    auto [s0, s1] = ellipticity_constants(g1, mats1);
    CHECK(s0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s1 == doctest::Approx(std::sqrt(1.16)).epsilon(1e-12));

    // not elliptic
    std::vector<CellMatrix> bad(g1.num_cells());
    for (auto& m : bad) {
        m.setZero();
        m(0, 0) = -1.0;
        m(1, 1) = 1.0;
    }
    CHECK_THROWS_WITH(ellipticity_constants(g1, bad),
                      doctest::Contains("not uniformly elliptic"));
}

TEST_CASE("generators are reproducible and serializable") {
    Grid g(1, 32, 1.0);
    CoefficientParams params;
    params.spread = 0.5;
    CoefficientField a = make_coefficient_field("random_real_symmetric", params, g, 42);
    CoefficientField b = make_coefficient_field("random_real_symmetric", params, g, 42);
    CoefficientField c = make_coefficient_field("random_real_symmetric", params, g, 43);
    bool identical = true, differs = false;
    for (int cell = 0; cell < g.num_cells(); ++cell) {
        if (a.matrix(cell) != b.matrix(cell)) identical = false;
        if (a.matrix(cell) != c.matrix(cell)) differs = true;
    }
    CHECK(identical);
    CHECK(differs);
    check_ellipticity_samples(a, 2000, 17);

    // descriptor round trip regenerates the same values
    CoefficientField back = deserialize_coefficient_field(a.serialize());
    bool same = back.grid() == a.grid();
    for (int cell = 0; same && cell < g.num_cells(); ++cell) {
        if (back.matrix(cell) != a.matrix(cell)) same = false;
    }
    CHECK(same);

    CHECK_THROWS(make_coefficient_field("no_such_kind", {}, g, 0));
}
