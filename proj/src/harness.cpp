#include "tentlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tentlab {

namespace {

using int128 = __int128;

long long to_int64(int128 v) {
    if (v > std::numeric_limits<long long>::max() ||
        v < std::numeric_limits<long long>::min()) {
        throw std::overflow_error("rational overflow");
    }
    return static_cast<long long>(v);
}

int128 gcd128(int128 a, int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational from128(int128 n, int128 d) {
    if (d == 0) {
        Rational r = Rational::infinity();
        if (n < 0) r.num = -1;
        return r;
    }
    if (d < 0) {
        n = -n;
        d = -d;
    }
    int128 g = gcd128(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    return Rational(to_int64(n), to_int64(d));
}

}  // namespace

Rational::Rational(long long n, long long d) {
    if (d == 0) {
        num = n >= 0 ? 1 : -1;
        den = 0;
        return;
    }
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const long long g = std::gcd(n < 0 ? -n : n, d);
    num = g > 1 ? n / g : n;
    den = g > 1 ? d / g : d;
}

double Rational::value() const {
    if (den == 0) {
        return num >= 0 ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

Rational Rational::operator+(const Rational& o) const {
    if (is_infinite()) return *this;
    if (o.is_infinite()) return o;
    return from128(static_cast<int128>(num) * o.den + static_cast<int128>(o.num) * den,
                   static_cast<int128>(den) * o.den);
}

Rational Rational::operator-(const Rational& o) const {
    if (o.is_infinite()) {
        if (is_infinite()) throw std::domain_error("inf - inf");
        Rational r = o;
        r.num = -r.num;
        return r;
    }
    if (is_infinite()) return *this;
    return from128(static_cast<int128>(num) * o.den - static_cast<int128>(o.num) * den,
                   static_cast<int128>(den) * o.den);
}

Rational Rational::operator*(const Rational& o) const {
    if (is_infinite() || o.is_infinite()) {
        Rational r = infinity();
        r.num = (num >= 0) == (o.num >= 0) ? 1 : -1;
        return r;
    }
    return from128(static_cast<int128>(num) * o.num, static_cast<int128>(den) * o.den);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.is_infinite()) return Rational(0, 1);
    if (o.num == 0) return infinity();  // division by zero -> infinity-tagged
    if (is_infinite()) {
        Rational r = infinity();
        r.num = (num >= 0) == (o.num >= 0) ? 1 : -1;
        return r;
    }
    return from128(static_cast<int128>(num) * o.den, static_cast<int128>(den) * o.num);
}

bool Rational::operator<(const Rational& o) const {
    if (is_infinite() || o.is_infinite()) return value() < o.value();
    return static_cast<int128>(num) * o.den < static_cast<int128>(o.num) * den;
}

Rational Rational::abs() const {
    Rational r = *this;
    if (r.num < 0) r.num = -r.num;
    return r;
}

std::string Rational::str() const {
    if (den == 0) return num >= 0 ? "inf" : "-inf";
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

Rational rational_max(const Rational& a, const Rational& b) { return a < b ? b : a; }

Rational bracket(const Rational& q, const Rational& r) {
    Rational iq = q.is_infinite() ? Rational(0, 1) : Rational(q.den, q.num);
    Rational ir = r.is_infinite() ? Rational(0, 1) : Rational(r.den, r.num);
    return iq - ir;
}

CriticalExponents critical_exponents(int n, int m, const Rational& M, const Rational& q,
                                     const Rational& beta, const Rational& kappa,
                                     const Rational& p_minus) {
    if (n < 1 || m < 1) throw std::invalid_argument("critical_exponents: n, m >= 1");
    CriticalExponents e;
    e.n = n;
    e.m = m;
    e.M = M;
    e.q = q;
    e.beta = beta;
    e.kappa = kappa;
    e.p_minus = p_minus;

    const Rational rn(n), two(2), one(1);
    const Rational two_beta_plus_1 = two * beta + one;

    // p_M = 2n / (n + 2mM); M = inf gives 0.
    e.p_M = M.is_infinite() ? Rational(0, 1)
                            : Rational(2LL * n) / (rn + Rational(2LL * m) * M);

    // p_q(beta) = 2nq / (2n + (2beta+1) m q); q = inf gives 2n / ((2beta+1) m).
    e.p_q_beta = q.is_infinite()
                     ? Rational(2LL * n) / (two_beta_plus_1 * Rational(m))
                     : Rational(2LL * n) * q /
                           (Rational(2LL * n) + two_beta_plus_1 * Rational(m) * q);

    e.M_kappa_q = kappa > Rational(0) ? Rational(0)
                                      : Rational(n, m) * bracket(q, two).abs() - kappa;
    e.M_c = rational_max(Rational(n, 2LL * m), e.M_kappa_q);
    e.p_L_beta = rn * p_minus / (rn + two_beta_plus_1 * p_minus);
    e.heat_cesaro_lower = rn / (rn + two * beta + two);
    return e;
}

bool pq_boundary_consistent(int n, int m, const Rational& q, const Rational& beta) {
    CriticalExponents e =
        critical_exponents(n, m, Rational::infinity(), q, beta, Rational(0), Rational(1));
    const bool at_one = e.p_q_beta == Rational(1);
    // q' = q/(q-1), with q=1 -> inf and q=inf -> 1.
    Rational q_conj;
    if (q.is_infinite()) {
        q_conj = Rational(1);
    } else if (q == Rational(1)) {
        q_conj = Rational::infinity();
    } else {
        q_conj = q / (q - Rational(1));
    }
    const Rational rhs =
        Rational(2LL * n) / (Rational(m) * (Rational(2) * beta + Rational(1)));
    return at_one == (q_conj == rhs);
}

std::string CriticalExponents::serialize() const {
    nlohmann::json j;
    j["n"] = n;
    j["m"] = m;
    j["M"] = M.str();
    j["q"] = q.str();
    j["beta"] = beta.str();
    j["kappa"] = kappa.str();
    j["p_minus"] = p_minus.str();
    j["p_M"] = p_M.str();
    j["p_q_beta"] = p_q_beta.str();
    j["M_kappa_q"] = M_kappa_q.str();
    j["M_c"] = M_c.str();
    j["p_L_beta"] = p_L_beta.str();
    j["heat_cesaro_lower"] = heat_cesaro_lower.str();
    j["p_minus_note"] = "p_minus is a configured/empirical stand-in (HEURISTIC)";
    return j.dump();
}

namespace {

double lp_field(const Grid& grid, const Field& g, double p) {
    if (!std::isfinite(p)) return g.cwiseAbs().maxCoeff();
    double acc = 0.0;
    for (int i = 0; i < g.size(); ++i) acc += std::pow(std::abs(g(i)), p);
    return std::pow(acc * grid.cell_volume(), 1.0 / p);
}

}  // namespace

SemigroupRangeEstimate estimate_semigroup_range(const PropagatorCache& cache,
                                                const std::vector<double>& p_list,
                                                const std::vector<double>& t_list,
                                                double growth_cap, std::uint64_t seed) {
    const Grid& grid = cache.grid();
    SemigroupRangeEstimate est;
    est.label = "HEURISTIC";
    est.single_time_caveat = t_list.size() <= 1;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double p : p_list) {
        double worst = 0.0;
        for (int sample = 0; sample < 128; ++sample) {
            Field g(grid.num_cells());
            for (int i = 0; i < g.size(); ++i) g(i) = Complex(gauss(rng), gauss(rng));
            const double gn = lp_field(grid, g, p);
            for (double t : t_list) {
                worst = std::max(worst, lp_field(grid, cache.exponential(t) * g, p) / gn);
            }
        }
        est.probes.push_back({p, worst, worst <= growth_cap});
    }
    est.p_minus = std::numeric_limits<double>::quiet_NaN();
    est.p_plus = std::numeric_limits<double>::quiet_NaN();
    for (const auto& pr : est.probes) {
        if (!pr.within_cap) continue;
        if (std::isnan(est.p_minus) || pr.p < est.p_minus) est.p_minus = pr.p;
        if (std::isnan(est.p_plus) || pr.p > est.p_plus) est.p_plus = pr.p;
    }
    return est;
}

std::vector<BatteryInput> make_battery(const Grid& grid, const TimeGrid& tg,
                                       const BatterySpec& spec) {
    std::vector<BatteryInput> battery;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double period = grid.period();

    for (int i = 0; i < spec.atoms; ++i) {
        double r = period / 16.0 * static_cast<double>(1 << (i % 3));
        while (r * r > tg.t_max() && r > 4.0 * grid.spacing()) r *= 0.5;
        Point center{unif(rng) * period, grid.dim() == 2 ? unif(rng) * period : 0.0};
        BallIndices ball = ball_indices(grid, center, r);
        auto [atom, report] = make_atom(grid, tg, ball.cells, r, 1.0, 0.0, 2, rng());
        nlohmann::json d = {{"type", "atom"}, {"radius", r},
                            {"center", {center[0], center[1]}},
                            {"cells", ball.cells.size()}};
        battery.push_back({std::move(atom), d.dump()});
    }
    for (int i = 0; i < spec.noise; ++i) {
        std::uint64_t s = rng();
        nlohmann::json d = {{"type", "noise"}, {"seed", s}};
        battery.push_back({random_field(grid, tg, s), d.dump()});
    }
    for (int i = 0; i < spec.bumps; ++i) {
        std::vector<int> eligible;
        for (int k = 0; k < tg.num_nodes(); ++k) {
            if (2.0 * tg.node(k) <= tg.t_max() * (1.0 + 1e-12)) eligible.push_back(k);
        }
        if (eligible.empty()) break;
        const int k = eligible[static_cast<std::size_t>(unif(rng) * eligible.size()) %
                               eligible.size()];
        Point center{unif(rng) * period, grid.dim() == 2 ? unif(rng) * period : 0.0};
        Region w = whitney_cube(grid, tg, tg.node(k), center);
        SpaceTimeField bump(grid, tg, 1);
        for (std::size_t ti = 0; ti < w.time_indices.size(); ++ti) {
            for (int c : w.space_indices_per_time[ti]) {
                bump.values[0](w.time_indices[ti], c) = 1.0;
            }
        }
        nlohmann::json d = {{"type", "whitney_bump"}, {"t", tg.node(k)},
                            {"center", {center[0], center[1]}}};
        battery.push_back({std::move(bump), d.dump()});
    }
    return battery;
}

SpaceTimeField refine_field(const SpaceTimeField& f, const Grid& fine) {
    const Grid& coarse = f.grid;
    if (fine.dim() != coarse.dim() || fine.period() != coarse.period() ||
        fine.points_per_axis() % coarse.points_per_axis() != 0) {
        throw std::invalid_argument("refine_field: fine grid not a block refinement");
    }
    const int factor = fine.points_per_axis() / coarse.points_per_axis();
    SpaceTimeField out(fine, f.time_grid, f.components());
    for (int c = 0; c < fine.num_cells(); ++c) {
        auto [ix, iy] = fine.axis_indices(c);
        const int cc = coarse.index(ix / factor, iy / factor);
        for (int comp = 0; comp < f.components(); ++comp) {
            out.values[comp].col(c) = f.values[comp].col(cc);
        }
    }
    return out;
}

CoefficientField refine_coefficients(const CoefficientField& coarse, const Grid& fine) {
    const Grid& cg = coarse.grid();
    if (fine.points_per_axis() % cg.points_per_axis() != 0) {
        throw std::invalid_argument("refine_coefficients: not a block refinement");
    }
    const int factor = fine.points_per_axis() / cg.points_per_axis();
    std::vector<CellMatrix> mats(fine.num_cells());
    for (int c = 0; c < fine.num_cells(); ++c) {
        auto [ix, iy] = fine.axis_indices(c);
        mats[c] = coarse.matrix(cg.index(ix / factor, iy / factor));
    }
    return CoefficientField(fine, std::move(mats), coarse.kind(), coarse.params(),
                            coarse.seed());
}

namespace {

struct GridStage {
    Grid grid;
    PropagatorCache cache;
    std::vector<BatteryInput> battery;
};

double sweep_p_L(int n, double p_minus, double beta) {
    return n * p_minus / (n + (2.0 * beta + 1.0) * p_minus);
}

}  // namespace

SweepResult boundedness_sweep(const SweepConfig& config) {
    if (config.operators.empty()) {
        throw std::invalid_argument("boundedness_sweep: empty operator list");
    }
    if (config.pairs.empty()) {
        throw std::invalid_argument("boundedness_sweep: empty (p, beta) list");
    }
    for (const auto& [p, beta] : config.pairs) {
        const double pl = sweep_p_L(config.dim, config.p_minus, beta);
        if (p <= pl && !config.force) {
            std::ostringstream msg;
            msg << "inadmissible pair (p = " << p << ", beta = " << beta
                << "): p <= p_L(beta) = " << pl << " (use force to override)";
            throw std::invalid_argument(msg.str());
        }
    }

    TimeGrid tg = build_time_grid(config.t_min, config.t_max, config.ratio);

    Grid coarse(config.dim, config.n, config.period);
    CoefficientField coeffs = make_coefficient_field(
        config.coefficient_kind, config.coefficient_params, coarse,
        config.coefficient_seed);
    Grid fine(config.dim, config.refine_n, config.period);
    CoefficientField fine_coeffs = refine_coefficients(coeffs, fine);

    std::vector<GridStage> stages;
    stages.push_back({coarse, PropagatorCache(DiscreteOperator(coeffs), config.t_min, 4),
                      make_battery(coarse, tg, config.battery)});
    {
        std::vector<BatteryInput> fine_battery;
        for (const auto& in : stages[0].battery) {
            fine_battery.push_back({refine_field(in.field, fine), in.descriptor});
        }
        stages.push_back({fine, PropagatorCache(DiscreteOperator(fine_coeffs),
                                                config.t_min, 4),
                          std::move(fine_battery)});
    }

    SweepResult result;
    for (const auto& [p, beta] : config.pairs) {
        for (const auto& op : config.operators) {
            double target_beta;
            if (op == "L1") {
                target_beta = beta + 1.0;
            } else if (op == "Lhalf") {
                target_beta = beta + 0.5;
            } else if (op == "L0") {
                target_beta = beta;
            } else {
                throw std::invalid_argument("boundedness_sweep: unknown operator '" +
                                            op + "'");
            }
            std::array<double, 2> max_ratio{0.0, 0.0};
            for (std::size_t si = 0; si < stages.size(); ++si) {
                const GridStage& st = stages[si];
                for (const auto& input : st.battery) {
                    const double in_norm =
                        tent_norm(input.field, {p, beta, 2, 1.0, 0.0}).value;
                    if (in_norm == 0.0) continue;  // 0/0 guard
                    SpaceTimeField out = [&] {
                        if (op == "L1") return duhamel_L1(st.cache, input.field).u;
                        if (op == "Lhalf") return duhamel_Lhalf(st.cache, input.field);
                        return duhamel_L0(st.cache, input.field);
                    }();
                    const double out_norm =
                        tent_norm(out, {p, target_beta, 2, 1.0, 0.0}).value;
                    const double ratio = out_norm / in_norm;
                    max_ratio[si] = std::max(max_ratio[si], ratio);
                    result.entries.push_back({op, p, beta, st.grid.points_per_axis(),
                                              input.descriptor, in_norm, out_norm,
                                              ratio});
                }
            }
            const double drift =
                max_ratio[0] > 0.0 && max_ratio[1] > 0.0
                    ? std::max(max_ratio[1] / max_ratio[0], max_ratio[0] / max_ratio[1])
                    : std::numeric_limits<double>::quiet_NaN();
            result.groups.push_back({op, p, beta, max_ratio[0], max_ratio[1], drift});
        }
    }
    return result;
}

TraceSlopeFit trace_slope_fit(const SpaceTimeField& u, double beta, TraceMode mode,
                              double p) {
    (void)beta;  // the target slope beta + 1/2 is the caller's comparison point
    const TimeGrid& tg = u.time_grid;
    const Grid& grid = u.grid;
    std::vector<int> scale_nodes;
    for (int j = 0; j < 6; ++j) {
        const double target = tg.t_min() * std::pow(2.0, j);
        const double limit = mode == TraceMode::WhitneySup ? tg.t_max() / 2.0 : tg.t_max();
        if (target > limit * (1.0 + 1e-9)) {
            throw std::invalid_argument("trace_slope_fit: fewer than 6 dyadic scales");
        }
        int best = 0;
        for (int k = 1; k < tg.num_nodes(); ++k) {
            if (std::abs(tg.node(k) - target) < std::abs(tg.node(best) - target)) best = k;
        }
        if (!scale_nodes.empty() && best == scale_nodes.back()) {
            throw std::invalid_argument("trace_slope_fit: fewer than 6 dyadic scales");
        }
        scale_nodes.push_back(best);
    }

    TraceSlopeFit fit;
    for (int k : scale_nodes) {
        const double t = tg.node(k);
        double value = 0.0;
        switch (mode) {
            case TraceMode::WhitneySup:
                for (int c = 0; c < grid.num_cells(); ++c) {
                    value = std::max(value, whitney_average(u, t, grid.cell_center(c)));
                }
                break;
            case TraceMode::SliceInf: {
                Field slice = u.values[0].row(k).transpose();
                value = slice_norm(grid, slice, p, t / 16.0);
                break;
            }
            case TraceMode::Lp: {
                Field slice = u.values[0].row(k).transpose();
                value = lp_field(grid, slice, p);
                break;
            }
        }
        fit.points.push_back({t, value});
    }

    std::vector<double> xs, ys;
    for (const auto& pt : fit.points) {
        if (pt[1] > 0.0) {
            xs.push_back(std::log(pt[0]));
            ys.push_back(std::log(pt[1]));
        }
    }
    if (xs.size() < 2) {
        fit.exact_zero = true;
        return fit;
    }
    const double np = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    fit.slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
    return fit;
}

namespace {

double l2_on_cells(const Grid& grid, const SpaceTimeField& u, int node,
                   const std::vector<int>& cells) {
    double s = 0.0;
    for (int c : cells) s += u.magnitude2(node, c);
    return s * grid.cell_volume();
}

}  // namespace

double caccioppoli_check(const SpaceTimeField& u, const SpaceTimeField& f,
                         double lambda0, double lambda1, const Point& center,
                         double radius, int a_node, int b_node) {
    const Grid& grid = u.grid;
    const TimeGrid& tg = u.time_grid;
    if (2.0 * radius >= grid.period() / 2.0) {
        throw std::invalid_argument("caccioppoli_check: 2B enters the torus wrap zone");
    }
    if (a_node >= b_node || b_node >= tg.num_nodes()) {
        throw std::invalid_argument("caccioppoli_check: need a_node < b_node on the mesh");
    }
    BallIndices b = ball_indices(grid, center, radius);
    BallIndices b2 = ball_indices(grid, center, 2.0 * radius);
    const double span = tg.node(b_node) - tg.node(a_node);

    const double num = l2_on_cells(grid, u, b_node, b.cells);
    double int_u = 0.0, int_f = 0.0;
    for (int k = a_node; k < b_node; ++k) {
        int_u += tg.cell_width(k) * l2_on_cells(grid, u, k, b2.cells);
        int_f += tg.cell_width(k) * l2_on_cells(grid, f, k, b2.cells);
    }
    const double denom =
        (lambda1 * lambda1 / (lambda0 * radius * radius) + 1.0 / span) * int_u +
        span * int_f;
    if (denom == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / denom;
}

double cesaro_check(const SpaceTimeField& u, double p, double beta,
                    const Point& center, double radius, double T) {
    if (p < 2.0) throw std::invalid_argument("cesaro_check: p >= 2 required");
    if (T >= radius * radius) {
        throw std::invalid_argument("cesaro_check: requires T < r(B)^2");
    }
    const Grid& grid = u.grid;
    const TimeGrid& tg = u.time_grid;
    BallIndices b = ball_indices(grid, center, radius);
    double mean = 0.0;
    for (int k = 0; k < tg.num_cells(); ++k) {
        if (tg.node(k) >= T) break;
        mean += tg.cell_width(k) * std::sqrt(l2_on_cells(grid, u, k, b.cells));
    }
    mean /= T;
    const double ball_measure = static_cast<double>(b.cells.size()) * grid.cell_volume();
    const double bound = std::pow(T, beta + 0.5) *
                         std::pow(ball_measure, 0.5 - 1.0 / p) *
                         tent_norm(u, {p, beta + 1.0, 2, 1.0, 0.0}).value;
    if (bound == 0.0) return mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return mean / bound;
}

namespace {

std::vector<int> rect_cells(const Grid& grid, const SpaceTimeRect& q) {
    std::vector<int> cells;
    for (int c = 0; c < grid.num_cells(); ++c) {
        Point x = grid.cell_center(c);
        bool inside = x[0] >= q.x_lo[0] - 1e-12 && x[0] <= q.x_hi[0] + 1e-12;
        if (grid.dim() == 2) {
            inside = inside && x[1] >= q.x_lo[1] - 1e-12 && x[1] <= q.x_hi[1] + 1e-12;
        }
        if (inside) cells.push_back(c);
    }
    return cells;
}

std::vector<int> rect_nodes(const TimeGrid& tg, const SpaceTimeRect& q) {
    std::vector<int> nodes;
    for (int k = 0; k < tg.num_cells(); ++k) {
        if (tg.node(k) >= q.t_lo - 1e-12 && tg.node(k) <= q.t_hi + 1e-12) {
            nodes.push_back(k);
        }
    }
    return nodes;
}

double interval_distance(double a0, double b0, double a1, double b1) {
    return std::max({0.0, a1 - b0, a0 - b1});
}

Eigen::MatrixXcd raw_kernel(const PropagatorCache& cache, Family family, double gap) {
    switch (family) {
        case Family::Semigroup:
            return cache.exponential(gap);
        case Family::GradientSemigroup:
            return cache.family_matrix(family, gap) / std::sqrt(gap);
        case Family::GeneratorSemigroup:
            return cache.family_matrix(family, gap) / gap;
    }
    throw std::logic_error("raw_kernel: bad family");
}

}  // namespace

SchurIntegrals schur_check(const PropagatorCache& cache, Family family,
                           const TimeGrid& tg, const SpaceTimeRect& q0,
                           const SpaceTimeRect& q1, double kappa) {
    const Grid& grid = cache.grid();
    std::vector<int> e_cells = rect_cells(grid, q0);
    std::vector<int> f_cells = rect_cells(grid, q1);
    std::vector<int> t_nodes = rect_nodes(tg, q0);
    std::vector<int> s_nodes = rect_nodes(tg, q1);
    if (e_cells.empty() || f_cells.empty() || t_nodes.empty() || s_nodes.empty()) {
        throw std::invalid_argument("schur_check: rectangle empty on the mesh");
    }

    double space_dist = std::numeric_limits<double>::infinity();
    for (int a : e_cells) {
        for (int b : f_cells) space_dist = std::min(space_dist, torus_distance(grid, a, b));
    }
    const double time_dist = interval_distance(q0.t_lo, q0.t_hi, q1.t_lo, q1.t_hi);
    const double eps = std::max(time_dist, space_dist);
    if (eps <= 0.0) throw std::invalid_argument("rectangles not separated");

    Eigen::MatrixXd omega(t_nodes.size(), s_nodes.size());
    for (std::size_t i = 0; i < t_nodes.size(); ++i) {
        for (std::size_t j = 0; j < s_nodes.size(); ++j) {
            const double gap = tg.node(t_nodes[i]) - tg.node(s_nodes[j]);
            omega(i, j) = gap > 0.0
                              ? masked_norm(grid, raw_kernel(cache, family, gap),
                                            e_cells, f_cells, 2.0, 2.0)
                              : 0.0;  // causal kernel
        }
    }
    SchurIntegrals out{0.0, 0.0, eps,
                       std::pow(eps / 2.0, kappa - 1.0) * (q1.t_hi - q1.t_lo)};
    for (std::size_t i = 0; i < t_nodes.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < s_nodes.size(); ++j) {
            row += tg.cell_width(s_nodes[j]) * omega(i, j);
        }
        out.row_integral = std::max(out.row_integral, row);
    }
    for (std::size_t j = 0; j < s_nodes.size(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < t_nodes.size(); ++i) {
            col += tg.cell_width(t_nodes[i]) * omega(i, j);
        }
        out.col_integral = std::max(out.col_integral, col);
    }
    return out;
}

std::string config_hash(const std::string& canonical_json) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_json) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

namespace {

Rational rational_from_json(const nlohmann::json& j, const Rational& fallback) {
    if (j.is_null()) return fallback;
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return Rational::infinity();
        throw std::invalid_argument("rational: expected [num, den], integer, or \"inf\"");
    }
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_array() && j.size() == 2) {
        return Rational(j[0].get<long long>(), j[1].get<long long>());
    }
    throw std::invalid_argument("rational: expected [num, den], integer, or \"inf\"");
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
    SweepConfig c;
    const auto& grid = j.at("grid");
    c.dim = grid.value("dim", 1);
    c.n = grid.value("n", 128);
    c.refine_n = grid.value("refine_n", 2 * c.n);
    c.period = grid.value("period", 1.0);
    const auto& time = j.at("time");
    c.t_min = time.value("t_min", 1e-3);
    c.t_max = time.value("t_max", 0.25);
    c.ratio = time.value("ratio", 1.189207115002721);
    const auto coeff = j.value("coefficients", nlohmann::json::object());
    c.coefficient_kind = coeff.value("kind", "identity");
    c.coefficient_params.lo = coeff.value("lo", 1.0);
    c.coefficient_params.hi = coeff.value("hi", 1.0);
    c.coefficient_params.period_cells = coeff.value("period_cells", 4);
    c.coefficient_params.spread = coeff.value("spread", 0.5);
    c.coefficient_params.epsilon = coeff.value("epsilon", 0.0);
    c.coefficient_seed = coeff.value("seed", std::uint64_t{7});
    c.operators = j.value("operators", std::vector<std::string>{});
    for (const auto& pair : j.value("pairs", nlohmann::json::array())) {
        c.pairs.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
    const auto battery = j.value("battery", nlohmann::json::object());
    c.battery.atoms = battery.value("atoms", 4);
    c.battery.noise = battery.value("noise", 4);
    c.battery.bumps = battery.value("bumps", 2);
    c.battery.seed = j.value("seed", std::uint64_t{1});
    c.p_minus = j.value("p_minus", 1.0);
    c.force = j.value("force", false);
    return c;
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& config_json) {
    return sweep_config_from_json(nlohmann::json::parse(config_json));
}

ExperimentResult run_experiment(const std::string& config_json,
                                const std::string& config_path_context) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(config_json);
    } catch (const std::exception& e) {
        throw std::runtime_error("config parse error" +
                                 (config_path_context.empty()
                                      ? std::string()
                                      : " (" + config_path_context + ")") +
                                 ": " + e.what());
    }

    ExperimentResult result;
    result.config_hash = config_hash(j.dump());
    result.output_path = j.value("output", "");
    const auto checks = j.value("checks", std::vector<std::string>{"sweep"});
    const std::uint64_t seed = j.value("seed", std::uint64_t{1});

    auto emit = [&](nlohmann::json rec) {
        rec["config_hash"] = result.config_hash;
        rec["seed"] = seed;
        result.records.push_back(rec.dump());
    };

    try {
        for (const auto& check : checks) {
            if (check == "critical_exponents") {
                const auto e = j.value("exponents", nlohmann::json::object());
                CriticalExponents ce = critical_exponents(
                    e.value("n", j.at("grid").value("dim", 1)), e.value("m", 2),
                    rational_from_json(e.value("M", nlohmann::json()),
                                       Rational::infinity()),
                    rational_from_json(e.value("q", nlohmann::json()), Rational(2)),
                    rational_from_json(e.value("beta", nlohmann::json()), Rational(0)),
                    rational_from_json(e.value("kappa", nlohmann::json()), Rational(0)),
                    rational_from_json(e.value("p_minus", nlohmann::json()),
                                       Rational(1)));
                nlohmann::json rec = {{"check", "critical_exponents"},
                                      {"result", nlohmann::json::parse(ce.serialize())}};
                emit(rec);
            } else if (check == "sweep") {
                SweepConfig sc = sweep_config_from_json(j);
                if (sc.operators.empty()) {
                    throw std::invalid_argument("config validation: empty operator list");
                }
                SweepResult sr = boundedness_sweep(sc);
                for (const auto& entry : sr.entries) {
                    emit({{"check", "sweep_entry"}, {"operator", entry.op},
                          {"p", entry.p}, {"beta", entry.beta}, {"grid_n", entry.grid_n},
                          {"input", nlohmann::json::parse(entry.input)},
                          {"in_norm", entry.in_norm}, {"out_norm", entry.out_norm},
                          {"ratio", entry.ratio}});
                }
                for (const auto& group : sr.groups) {
                    emit({{"check", "sweep_group"}, {"operator", group.op},
                          {"p", group.p}, {"beta", group.beta},
                          {"max_ratio_coarse", group.max_ratio_coarse},
                          {"max_ratio_fine", group.max_ratio_fine},
                          {"drift", group.drift}});
                }
            } else if (check == "semigroup_range") {
                SweepConfig sc = sweep_config_from_json(j);
                Grid grid(sc.dim, sc.n, sc.period);
                CoefficientField coeffs = make_coefficient_field(
                    sc.coefficient_kind, sc.coefficient_params, grid,
                    sc.coefficient_seed);
                PropagatorCache cache(DiscreteOperator(coeffs), sc.t_min, 4);
                const auto sg = j.value("semigroup", nlohmann::json::object());
                auto p_list = sg.value("p_list", std::vector<double>{1.0, 2.0, 4.0});
                auto t_list = sg.value("t_list",
                                       std::vector<double>{sc.t_min, 16.0 * sc.t_min});
                const double cap = sg.value("cap", 2.0);
                SemigroupRangeEstimate est =
                    estimate_semigroup_range(cache, p_list, t_list, cap, seed);
                nlohmann::json probes = nlohmann::json::array();
                for (const auto& pr : est.probes) {
                    probes.push_back({{"p", pr.p}, {"max_ratio", pr.max_sampled_ratio},
                                      {"within_cap", pr.within_cap}});
                }
                emit({{"check", "semigroup_range"}, {"label", est.label},
                      {"probes", probes},
                      {"p_minus", std::isnan(est.p_minus) ? nlohmann::json()
                                                          : nlohmann::json(est.p_minus)},
                      {"p_plus", std::isnan(est.p_plus) ? nlohmann::json()
                                                        : nlohmann::json(est.p_plus)},
                      {"single_time_caveat", est.single_time_caveat}});
            } else if (check == "decay") {
                SweepConfig sc = sweep_config_from_json(j);
                Grid grid(sc.dim, sc.n, sc.period);
                CoefficientField coeffs = make_coefficient_field(
                    sc.coefficient_kind, sc.coefficient_params, grid,
                    sc.coefficient_seed);
                PropagatorCache cache(DiscreteOperator(coeffs), sc.t_min, 4);
                const auto d = j.value("decay", nlohmann::json::object());
                DecayFit fit = fit_decay_order(
                    cache, family_from_name(d.value("family", "semigroup")),
                    d.value("q", 2.0), d.value("r", 2.0),
                    d.value("times", std::vector<double>{1e-3, 2e-3}),
                    d.value("separations", std::vector<double>{0.2, 0.3, 0.4}),
                    d.value("ball_radius", 0.0), d.value("adjoint", false),
                    d.value("m", 2));
                nlohmann::json samples = nlohmann::json::array();
                for (const auto& s : fit.samples) {
                    samples.push_back({{"t", s.t}, {"separation", s.separation},
                                       {"norm", s.norm},
                                       {"norm_at_zero", s.norm_at_zero},
                                       {"used", s.used_in_fit}});
                }
                emit({{"check", "decay"}, {"family", fit.family_tag}, {"q", fit.q},
                      {"r", fit.r}, {"fitted_order", fit.fitted_order},
                      {"residual_log10_rms", fit.fit_residual}, {"samples", samples}});
            } else {
                throw std::invalid_argument("config validation: unknown check '" +
                                            check + "'");
            }
        }
    } catch (const std::exception& e) {
        if (config_path_context.empty()) throw;
        throw std::runtime_error(std::string(e.what()) + " [config: " +
                                 config_path_context + "]");
    }

    if (!result.output_path.empty()) {
        std::ofstream out(result.output_path);
        if (!out) {
            throw std::runtime_error("cannot open output path " + result.output_path +
                                     (config_path_context.empty()
                                          ? std::string()
                                          : " [config: " + config_path_context + "]"));
        }
        for (const auto& rec : result.records) out << rec << "\n";
    }
    return result;
}

ExperimentResult run_experiment_file(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot read config file " + config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_experiment(buf.str(), config_path);
}

}  // namespace tentlab
