#include "tentlab/coefficients.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace tentlab {

namespace {

// Smallest eigenvalue of the Hermitian part Re A = (A + A^*)/2, closed form.
double hermitian_part_min_eig(const CellMatrix& a, int dim) {
    if (dim == 1) return a(0, 0).real();
    double h00 = a(0, 0).real();
    double h11 = a(1, 1).real();
    Complex h01 = 0.5 * (a(0, 1) + std::conj(a(1, 0)));
    double mean = 0.5 * (h00 + h11);
    double disc = std::sqrt(0.25 * (h00 - h11) * (h00 - h11) + std::norm(h01));
    return mean - disc;
}

// Operator norm of A: sqrt of the largest eigenvalue of A^* A, closed form for 2x2.
double operator_norm(const CellMatrix& a, int dim) {
    if (dim == 1) return std::abs(a(0, 0));
    Eigen::Matrix2cd m = a.block<2, 2>(0, 0);
    Eigen::Matrix2cd g = m.adjoint() * m;
    double tr = g(0, 0).real() + g(1, 1).real();
    double det = (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).real();
    double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    return std::sqrt(std::max(0.0, 0.5 * tr + disc));
}

CellMatrix identity_cell() {
    CellMatrix m = CellMatrix::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    return m;
}

}  // namespace

std::pair<double, double> ellipticity_constants(const Grid& grid,
                                                const std::vector<CellMatrix>& matrices) {
    double lambda0 = std::numeric_limits<double>::infinity();
    double lambda1 = 0.0;
    for (const auto& a : matrices) {
        lambda0 = std::min(lambda0, hermitian_part_min_eig(a, grid.dim()));
        lambda1 = std::max(lambda1, operator_norm(a, grid.dim()));
    }
    if (!(lambda0 > 0.0)) {
        throw std::runtime_error("ellipticity_constants: not uniformly elliptic");
    }
    return {lambda0, lambda1};
}

CoefficientField::CoefficientField(Grid grid, std::vector<CellMatrix> matrices,
                                   std::string kind, CoefficientParams params,
                                   std::uint64_t seed)
    : grid_(grid),
      matrices_(std::move(matrices)),
      kind_(std::move(kind)),
      params_(params),
      seed_(seed) {
    if (static_cast<int>(matrices_.size()) != grid_.num_cells()) {
        throw std::invalid_argument("CoefficientField: matrix count mismatch");
    }
    auto [l0, l1] = ellipticity_constants(grid_, matrices_);
    lambda0_ = l0;
    lambda1_ = l1;
}

CoefficientField make_coefficient_field(const std::string& kind,
                                        const CoefficientParams& params,
                                        const Grid& grid, std::uint64_t seed) {
    std::vector<CellMatrix> mats(grid.num_cells(), identity_cell());
    std::mt19937_64 rng(seed);

    if (kind == "identity") {
        // already identity
    } else if (kind == "scalar_checkerboard") {
        if (!(params.lo > 0.0 && params.hi >= params.lo)) {
            throw std::invalid_argument("scalar_checkerboard: need 0 < lo <= hi");
        }
        if (params.period_cells < 1) {
            throw std::invalid_argument("scalar_checkerboard: period must be >= 1 cell");
        }
        for (int c = 0; c < grid.num_cells(); ++c) {
            auto [ix, iy] = grid.axis_indices(c);
            int parity = (ix / params.period_cells + iy / params.period_cells) % 2;
            double v = parity == 0 ? params.lo : params.hi;
            mats[c] = identity_cell() * v;
        }
    } else if (kind == "random_real_symmetric") {
        if (!(params.spread >= 0.0 && params.spread < 1.0)) {
            throw std::invalid_argument("random_real_symmetric: need spread in [0, 1)");
        }
        std::uniform_real_distribution<double> diag(1.0 - params.spread, 1.0 + params.spread);
        for (int c = 0; c < grid.num_cells(); ++c) {
            CellMatrix m = CellMatrix::Zero();
            double d0 = diag(rng);
            double d1 = grid.dim() == 2 ? diag(rng) : 1.0;
            // Off-diagonal kept below the diagonal floor so the field stays elliptic.
            double off = 0.0;
            if (grid.dim() == 2) {
                double cap = 0.9 * std::min(d0, d1);
                off = std::uniform_real_distribution<double>(-cap, cap)(rng);
            }
            m(0, 0) = d0;
            m(1, 1) = d1;
            m(0, 1) = off;
            m(1, 0) = off;
            mats[c] = m;
        }
    } else if (kind == "complex_perturbation") {
        if (!(params.epsilon >= 0.0 && params.epsilon < 0.5)) {
            throw std::invalid_argument("complex_perturbation: need epsilon in [0, 1/2)");
        }
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (int c = 0; c < grid.num_cells(); ++c) {
            CellMatrix b = CellMatrix::Zero();
            if (grid.dim() == 1) {
                Complex e(unit(rng), unit(rng));
                b(0, 0) = e / std::max(1.0, std::abs(e));
            } else {
                Eigen::Matrix2cd raw;
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) raw(i, j) = Complex(unit(rng), unit(rng));
                }
                double nrm = raw.operatorNorm();
                raw /= std::max(1.0, nrm);
                b.block<2, 2>(0, 0) = raw;
            }
            mats[c] = identity_cell() + params.epsilon * b;
        }
    } else {
        throw std::invalid_argument("make_coefficient_field: unknown kind '" + kind + "'");
    }

    return CoefficientField(grid, std::move(mats), kind, params, seed);
}

std::string CoefficientField::serialize() const {
    nlohmann::json j;
    j["kind"] = kind_;
    j["seed"] = seed_;
    j["grid"] = {{"dim", grid_.dim()},
                 {"points_per_axis", grid_.points_per_axis()},
                 {"period", grid_.period()}};
    j["params"] = {{"lo", params_.lo},
                   {"hi", params_.hi},
                   {"period_cells", params_.period_cells},
                   {"spread", params_.spread},
                   {"epsilon", params_.epsilon}};
    return j.dump();
}

CoefficientField deserialize_coefficient_field(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Grid grid(j.at("grid").at("dim").get<int>(),
              j.at("grid").at("points_per_axis").get<int>(),
              j.at("grid").at("period").get<double>());
    CoefficientParams p;
    const auto& jp = j.at("params");
    p.lo = jp.at("lo").get<double>();
    p.hi = jp.at("hi").get<double>();
    p.period_cells = jp.at("period_cells").get<int>();
    p.spread = jp.at("spread").get<double>();
    p.epsilon = jp.at("epsilon").get<double>();
    return make_coefficient_field(j.at("kind").get<std::string>(), p, grid,
                                  j.at("seed").get<std::uint64_t>());
}

}  // namespace tentlab
