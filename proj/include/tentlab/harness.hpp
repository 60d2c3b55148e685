#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tentlab/duhamel.hpp"
#include "tentlab/propagator.hpp"
#include "tentlab/tentspaces.hpp"

namespace tentlab {

/// Exact rational with int64 numerator/denominator; den == 0 tags infinity.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d = 1);
    static Rational infinity() {
        Rational r;
        r.num = 1;
        r.den = 0;
        return r;
    }

    bool is_infinite() const { return den == 0; }
    double value() const;

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator<(const Rational& o) const;
    bool operator>(const Rational& o) const { return o < *this; }

    Rational abs() const;
    std::string str() const;
};

Rational rational_max(const Rational& a, const Rational& b);
/// [q, r] := 1/q - 1/r; infinite q or r contributes 0.
Rational bracket(const Rational& q, const Rational& r);

struct CriticalExponents {
    int n = 1;
    int m = 2;
    Rational M;        // decay order, possibly infinite
    Rational q;
    Rational beta;
    Rational kappa;
    Rational p_minus;  // configured lower semigroup exponent (empirical stand-in)

    Rational p_M;          // 2n / (n + 2mM)
    Rational p_q_beta;     // 2nq / (2n + (2beta+1) m q)
    Rational M_kappa_q;    // 0 if kappa > 0, else (n/m)|[q,2]| - kappa
    Rational M_c;          // max{n/2m, M_kappa_q}
    Rational p_L_beta;     // n p_- / (n + (2beta+1) p_-)
    /// The alternative sharp heat exponent n/(n + 2beta + 2), reported
    /// alongside p_L(beta) (which gives n/(n + 2beta + 1) at p_- = 1);
    /// the two formulas are exposed side by side, not arbitrated.
    Rational heat_cesaro_lower;

    std::string serialize() const;
};

CriticalExponents critical_exponents(int n, int m, const Rational& M, const Rational& q,
                                     const Rational& beta, const Rational& kappa,
                                     const Rational& p_minus);

/// Case boundary: p_q(beta) = 1 iff q' = 2n/(m(2beta+1)), checked exactly.
bool pq_boundary_consistent(int n, int m, const Rational& q, const Rational& beta);

struct SemigroupProbe {
    double p;
    double max_sampled_ratio;  // sup over t_list of sampled ||e^{-tL}||_{p->p}
    bool within_cap;
};

struct SemigroupRangeEstimate {
    std::vector<SemigroupProbe> probes;
    double p_minus;  // min passing p (NaN if none)
    double p_plus;   // max passing p (NaN if none)
    bool single_time_caveat;
    std::string label;  // always "HEURISTIC"
};

/// Sampled lower bounds of the L^p->L^p semigroup norms over 128 random
/// inputs per p; a heuristic bracket, never a continuum claim.
SemigroupRangeEstimate estimate_semigroup_range(const PropagatorCache& cache,
                                                const std::vector<double>& p_list,
                                                const std::vector<double>& t_list,
                                                double growth_cap = 2.0,
                                                std::uint64_t seed = 1);

struct BatterySpec {
    int atoms = 4;
    int noise = 4;
    int bumps = 2;
    std::uint64_t seed = 1;
};

struct BatteryInput {
    SpaceTimeField field;
    std::string descriptor;
};

/// Atoms at random scales/positions, white noise, Whitney-localized bumps.
std::vector<BatteryInput> make_battery(const Grid& grid, const TimeGrid& tg,
                                       const BatterySpec& spec);

/// Transport to a finer grid by cell-block replication (fine N a multiple of
/// coarse N); the refinement comparisons always pair transported batteries.
SpaceTimeField refine_field(const SpaceTimeField& f, const Grid& fine);
CoefficientField refine_coefficients(const CoefficientField& coarse, const Grid& fine);

struct SweepConfig {
    int dim = 1;
    int n = 128;
    int refine_n = 256;
    double period = 1.0;
    double t_min = 1e-3;
    double t_max = 0.25;
    double ratio = 1.189207115002721;  // 2^{1/4}
    std::string coefficient_kind = "identity";
    CoefficientParams coefficient_params;
    std::uint64_t coefficient_seed = 7;
    std::vector<std::string> operators;          // subset of {L1, Lhalf, L0}
    std::vector<std::pair<double, double>> pairs;  // (p, beta)
    BatterySpec battery;
    double p_minus = 1.0;
    bool force = false;
};

struct SweepEntry {
    std::string op;
    double p;
    double beta;
    int grid_n;
    std::string input;
    double in_norm;
    double out_norm;
    double ratio;
};

struct SweepGroup {
    std::string op;
    double p;
    double beta;
    double max_ratio_coarse;
    double max_ratio_fine;
    double drift;  // max(fine/coarse, coarse/fine)
};

struct SweepResult {
    std::vector<SweepEntry> entries;
    std::vector<SweepGroup> groups;
};

/// Ratios tent_norm(O f, target weight) / tent_norm(f, beta) over the battery,
/// with target weights beta+1 (L1), beta+1/2 (Lhalf), beta (L0), paired across
/// the coarse and refined grids. Inadmissible (p, beta) pairs (p <= p_L(beta))
/// error unless force is set.
SweepResult boundedness_sweep(const SweepConfig& config);

/// Parses the shared experiment-config JSON (grid/time/coefficients/operators/
/// pairs/battery sections) into a SweepConfig.
SweepConfig parse_sweep_config(const std::string& config_json);

enum class TraceMode { WhitneySup, SliceInf, Lp };

struct TraceSlopeFit {
    double slope = 0.0;
    bool exact_zero = false;
    std::vector<std::array<double, 2>> points;  // (t, functional value)
};

/// Log-log slope of the trace functional over the 6 smallest dyadic scales
/// t_min * 2^j. slice_inf evaluates the slice norm at delta = t/16.
TraceSlopeFit trace_slope_fit(const SpaceTimeField& u, double beta, TraceMode mode,
                              double p = 2.0);

/// ||u(t_b)||^2_{L^2(B)} over
/// (L1^2/(L0 r^2) + 1/(t_b - t_a)) int_a^b ||u||^2_{L^2(2B)} +
/// (t_b - t_a) int_a^b ||f||^2_{L^2(2B)}.
double caccioppoli_check(const SpaceTimeField& u, const SpaceTimeField& f,
                         double lambda0, double lambda1, const Point& center,
                         double radius, int a_node, int b_node);

/// Cesaro mean (1/T) int_0^T ||u(t)||_{L^2(B)} dt over
/// T^{beta+1/2} |B|^{1/2 - 1/p} tent_norm(u, p, beta+1); requires T < r(B)^2.
double cesaro_check(const SpaceTimeField& u, double p, double beta,
                    const Point& center, double radius, double T);

struct SpaceTimeRect {
    double t_lo;
    double t_hi;
    Point x_lo;
    Point x_hi;
};

struct SchurIntegrals {
    double row_integral;   // sup_t sum_s dt_s omega(t, s)
    double col_integral;   // sup_s sum_t dt_t omega(t, s)
    double epsilon;        // max component distance of the rectangles
    double time_majorant;  // (epsilon/2)^{kappa-1} |pi_1(Q_1)|
};

/// omega(t,s) = masked (2,2) norm of the causal kernel between the spatial
/// projections, integrated in each time variable over the rectangles.
SchurIntegrals schur_check(const PropagatorCache& cache, Family family,
                           const TimeGrid& tg, const SpaceTimeRect& q0,
                           const SpaceTimeRect& q1, double kappa);

struct ExperimentResult {
    std::string config_hash;
    std::vector<std::string> records;  // line-delimited structured records
    std::string output_path;
};

/// Runs the checks requested in the structured config (JSON text; see the
/// README schema) and writes one record per measurement; deterministic given
/// the config, including all seeds.
ExperimentResult run_experiment(const std::string& config_json,
                                const std::string& config_path_context = "");
ExperimentResult run_experiment_file(const std::string& config_path);

/// FNV-1a 64-bit over the canonical config serialization.
std::string config_hash(const std::string& canonical_json);

}  // namespace tentlab
