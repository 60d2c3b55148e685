#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tentlab/geometry.hpp"
#include "tentlab/operator.hpp"

namespace tentlab {

/// Discrete space-time field: one value (or dim-vector) per (time node, cell).
/// Time quadrature throughout is left-endpoint: node k carries weight
/// t_{k+1} - t_k, the final node carries none.
struct SpaceTimeField {
    Grid grid;
    TimeGrid time_grid;
    /// One (num_nodes x num_cells) matrix per component.
    std::vector<Eigen::MatrixXcd> values;

    SpaceTimeField(const Grid& g, const TimeGrid& tg, int components = 1);

    int components() const { return static_cast<int>(values.size()); }
    /// Sum over components of |value|^2 at (node k, cell c).
    double magnitude2(int k, int c) const;
    void check_finite() const;
};

SpaceTimeField zero_field(const Grid& grid, const TimeGrid& tg, int components = 1);
/// Independent complex Gaussian entries, deterministic in the seed.
SpaceTimeField random_field(const Grid& grid, const TimeGrid& tg, std::uint64_t seed,
                            int components = 1);

struct TentParams {
    double p = 2.0;
    double beta = 0.0;
    int m = 2;
    double alpha = 1.0;
    double sigma = 0.0;
};

struct NormReport {
    std::string norm_kind;
    double value = 0.0;
    std::string params_json;
    std::string quadrature_descriptor;
    std::string notes;

    std::string serialize() const;
};

/// A^{(alpha)}_{beta;m}(f)(x) =
///   ( sum_k dt_k t_k^{-2beta} t_k^{-n/m} sum_{y in B(x, alpha t_k^{1/m})} |f(t_k,y)|^2 h^n )^{1/2}.
Eigen::VectorXd conical_square_function(const SpaceTimeField& f, double beta, int m,
                                        double alpha);

/// L^p norm of the conical square function (p finite; p < 1 flagged as quasi-norm).
NormReport tent_norm(const SpaceTimeField& f, const TentParams& params);

/// sup over balls B (all grid centers, radii h*2^{j/2} up to P/4) of
/// |B|^{-sigma} ( sum_{t_k <= r(B)^m} dt_k avg_B |t_k^{-beta} f|^2 )^{1/2}.
/// Weight convention is t^{-beta} as everywhere else in this library; a
/// Carleson norm written with |t^{+b} f|^2 is this with beta = -b.
NormReport tinfty_norm(const SpaceTimeField& f, double beta, int m, double sigma);

/// Per x: ( sum_k dt_k |t_k^{-beta} f(t_k, x)|^2 )^{1/2}.
Eigen::VectorXd vertical_square_function(const SpaceTimeField& f, double beta);

/// Per (t, x): max over the geometric radius list of (avg_{B(x,rho)} |f|^q)^{1/q}.
SpaceTimeField mq_maximal(const SpaceTimeField& f, double q);

/// || ( avg_{B(., delta^{1/2})} |g|^2 )^{1/2} ||_p over the grid; p = inf -> sup.
double slice_norm(const Grid& grid, const Field& g, double p, double delta);

/// L^p over x of max over nodes t_k < T of
/// ( avg over nodes s in (t_k/2, t_k] avg_{B(x, t_k^{1/2})} |s^{-beta} u|^2 )^{1/2}.
double kenig_pipher_norm(const SpaceTimeField& u, double p, double beta, double T);

/// ( avg over (t, 2t] x B(x, t^{1/2}) of |u|^2 )^{1/2}, t a mesh node.
double whitney_average(const SpaceTimeField& u, double t, const Point& x);

struct AtomReport {
    bool support_ok = false;
    double measured_norm = 0.0;
    double target_norm = 0.0;
    double ball_measure = 0.0;
};

/// Random field supported in [t_min, r^m] x B, rescaled so the discrete
/// weighted L^2 norm equals |B|^{-(1/p - 1/2)} exactly.
std::pair<SpaceTimeField, AtomReport> make_atom(const Grid& grid, const TimeGrid& tg,
                                                const std::vector<int>& ball_cells,
                                                double ball_radius, double p, double beta,
                                                int m, std::uint64_t seed);

struct ApertureRow {
    double alpha;
    double norm;
    double ratio_to_unit;  // norm(alpha) / norm(1)
    double lower_bound;    // min{alpha^{n/2}, alpha^{n/p}}
    double upper_bound;    // max{alpha^{n/2}, alpha^{n/p}}
};

struct ApertureReport {
    double p;
    double beta;
    int m;
    std::vector<ApertureRow> rows;
    /// Smallest C >= 1 such that every ratio lies in [lower/C, upper*C].
    double slack;
};

/// Requires >= 3 apertures including 1.
ApertureReport change_aperture_report(const SpaceTimeField& f, double p, double beta,
                                      int m, const std::vector<double>& alpha_list);

/// Geometric radius list h * 2^{j/2}, j >= 0, capped at P/4 (used by the
/// Carleson and maximal suprema).
std::vector<double> supremum_radius_list(const Grid& grid);

}  // namespace tentlab
