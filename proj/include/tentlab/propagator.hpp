#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tentlab/operator.hpp"

namespace tentlab {

/// e^{X} by diagonal Pade (6,6) with scaling-and-squaring (scaled norm <= 0.5).
/// Throws if more than 60 squarings would be needed.
Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& x);

/// (e^{-tL}, phi1(tL)) with phi1(z) = (1 - e^{-z})/z, phi1(0) = 1.
/// phi1 is evaluated by Taylor at the scaled level and lifted by the
/// doubling recurrence phi1(2z) = phi1(z)(1 + e^{-z})/2.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> semigroup_and_phi1(
    const Eigen::MatrixXcd& l, double t);

/// (e^{-tL}, phi1(tL), phi2(tL)) with phi2(z) = (e^{-z} - 1 + z)/z^2, phi2(0) = 1/2.
/// Doubling: phi2(2z) = (2 phi2(z) + phi1(z)^2)/4.
std::array<Eigen::MatrixXcd, 3> semigroup_phi12(const Eigen::MatrixXcd& l, double t);

enum class Family {
    Semigroup,           // e^{-tL}
    GradientSemigroup,   // t^{1/2} grad e^{-tL}
    GeneratorSemigroup,  // t L e^{-tL}
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// Matrix functions of a DiscreteOperator: dyadic power tables for the
/// semigroup and phi1 plus a memoized direct evaluation for arbitrary gaps.
class PropagatorCache {
public:
    /// Builds e^{-delta 2^j L} and phi1(delta 2^j L) for j = 0..levels.
    PropagatorCache(const DiscreteOperator& op, double base_gap, int levels);

    const DiscreteOperator& op() const { return *op_; }
    const Grid& grid() const { return op_->grid(); }
    double base_gap() const { return base_gap_; }
    int levels() const { return levels_; }

    const Eigen::MatrixXcd& power(int level) const { return powers_.at(level); }
    const Eigen::MatrixXcd& phi1_table(int level) const { return phi1_tables_.at(level); }

    /// Binary decomposition of t / base_gap into cached levels.
    /// Throws (listing the nearest resolvable gaps) if t is not a
    /// dyadic multiple of the base gap within the cache range.
    std::vector<int> resolve_gap(double t) const;

    /// e^{-tL} for arbitrary t >= 0, memoized direct Pade evaluation.
    const Eigen::MatrixXcd& exponential(double t) const;
    const Eigen::MatrixXcd& phi1(double t) const;
    const Eigen::MatrixXcd& phi2(double t) const;
    /// e^{-tL*} computed from L* directly (not by transposing exponential(t)).
    const Eigen::MatrixXcd& exponential_adjoint(double t) const;

    /// Family matrix at time t (adjoint variant uses L*).
    Eigen::MatrixXcd family_matrix(Family f, double t, bool adjoint = false) const;

    /// Applications routed through the dyadic gap resolver.
    Field semigroup_apply(double t, const Field& g) const;
    VectorField gradient_semigroup_apply(double t, const Field& g) const;
    Field generator_semigroup_apply(double t, const Field& g) const;

private:
    Eigen::MatrixXcd resolved_product(double t) const;

    std::shared_ptr<const DiscreteOperator> op_;
    double base_gap_;
    int levels_;
    std::vector<Eigen::MatrixXcd> powers_;
    std::vector<Eigen::MatrixXcd> phi1_tables_;
    mutable std::map<double, Eigen::MatrixXcd> exp_memo_;
    mutable std::map<double, Eigen::MatrixXcd> phi1_memo_;
    mutable std::map<double, Eigen::MatrixXcd> phi2_memo_;
    mutable std::map<double, Eigen::MatrixXcd> exp_adjoint_memo_;
};

PropagatorCache build_propagator(const DiscreteOperator& op, double base_gap, int levels);

/// ||1_E M(t) 1_F|| from L^q(F) to L^r(E) with the grid measure h^n.
/// Exact (SVD) for (q, r) = (2, 2); otherwise a certified lower bound from
/// 256 seeded random probes plus the delta-basis probes supported in F.
double offdiagonal_norm(const PropagatorCache& cache, Family family, double t,
                        const std::vector<int>& e_cells, const std::vector<int>& f_cells,
                        double q, double r, bool adjoint = false);

/// Masked (q -> r) norm of an explicit matrix; same convention as above.
double masked_norm(const Grid& grid, const Eigen::MatrixXcd& m,
                   const std::vector<int>& e_cells, const std::vector<int>& f_cells,
                   double q, double r);

struct DecaySample {
    double t;
    double separation;   // exact distance between the masked cell sets
    double norm;
    double norm_at_zero; // same-radius, same-center baseline at this t
    bool used_in_fit;
};

/// Least-squares fit of log(norm / norm_at_zero) against log(1 + d^m / t);
/// fitted_order is minus the slope. Residual is RMS in log10.
struct DecayFit {
    std::string family_tag;
    double q;
    double r;
    int homogeneity;
    std::vector<DecaySample> samples;
    double fitted_order;
    double fit_residual;
};

/// Measures masked norms for ball pairs at the given separations and times and
/// fits the decay order. Only samples in the decaying regime
/// (norm < 0.5 * norm_at_zero and norm > 1e-13) enter the regression.
DecayFit fit_decay_order(const PropagatorCache& cache, Family family, double q, double r,
                         const std::vector<double>& time_list,
                         const std::vector<double>& separation_list,
                         double ball_radius = 0.0, bool adjoint = false, int m = 2);

}  // namespace tentlab
