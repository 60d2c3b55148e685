#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tentlab/geometry.hpp"

namespace tentlab {

using Complex = std::complex<double>;
/// Per-cell coefficient matrix; 1x1 in 1D, 2x2 in 2D.
using CellMatrix = Eigen::Matrix<Complex, 2, 2>;

struct CoefficientParams {
    double lo = 1.0;       // scalar_checkerboard
    double hi = 1.0;       // scalar_checkerboard
    int period_cells = 4;  // scalar_checkerboard
    double spread = 0.5;   // random_real_symmetric: entries in [1-spread, 1+spread]
    double epsilon = 0.0;  // complex_perturbation: A = I + eps*B with ||B|| <= 1
};

/// Uniformly elliptic complex coefficient field A(x) with certified constants:
/// Re<A xi, xi> >= lambda0 |xi|^2 and |<A xi, eta>| <= lambda1 |xi||eta| per cell.
class CoefficientField {
public:
    CoefficientField(Grid grid, std::vector<CellMatrix> matrices, std::string kind,
                     CoefficientParams params, std::uint64_t seed);

    const Grid& grid() const { return grid_; }
    const CellMatrix& matrix(int cell) const { return matrices_[cell]; }
    double lambda0() const { return lambda0_; }
    double lambda1() const { return lambda1_; }
    const std::string& kind() const { return kind_; }
    const CoefficientParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    /// Serialized descriptor (kind, params, seed, grid); values are regenerated on load.
    std::string serialize() const;

private:
    Grid grid_;
    std::vector<CellMatrix> matrices_;
    double lambda0_;
    double lambda1_;
    std::string kind_;
    CoefficientParams params_;
    std::uint64_t seed_;
};

/// kind in {identity, scalar_checkerboard, random_real_symmetric, complex_perturbation}.
/// Deterministic given (kind, params, seed); the result always passes the
/// ellipticity certification (a generator producing a non-elliptic field is a bug).
CoefficientField make_coefficient_field(const std::string& kind,
                                        const CoefficientParams& params,
                                        const Grid& grid, std::uint64_t seed = 0);

CoefficientField deserialize_coefficient_field(const std::string& text);

/// (Lambda0, Lambda1): smallest eigenvalue of the Hermitian part over all cells,
/// and largest operator norm over all cells, via closed-form 2x2 eigenvalues.
/// Throws if Lambda0 <= 0.
std::pair<double, double> ellipticity_constants(const Grid& grid,
                                                const std::vector<CellMatrix>& matrices);

}  // namespace tentlab
