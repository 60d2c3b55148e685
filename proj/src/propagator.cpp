#include "tentlab/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tentlab {

namespace {

// Diagonal Pade (6,6) coefficients: c_k = (12-k)! 6! / (12! k! (6-k)!).
constexpr double kPade6[7] = {
    1.0, 1.0 / 2.0, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0,
};

Eigen::MatrixXcd pade6(const Eigen::MatrixXcd& x) {
    const auto n = x.rows();
    Eigen::MatrixXcd num = Eigen::MatrixXcd::Identity(n, n) * kPade6[0];
    Eigen::MatrixXcd den = num;
    Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 1; k <= 6; ++k) {
        pw = pw * x;
        num += kPade6[k] * pw;
        den += (k % 2 == 0 ? kPade6[k] : -kPade6[k]) * pw;
    }
    return den.partialPivLu().solve(num);
}

int scaling_exponent(double norm) {
    int s = 0;
    while (norm > 0.5) {
        norm *= 0.5;
        ++s;
        if (s > 60) throw std::runtime_error("gap too large for conditioning");
    }
    return s;
}

// phi1(X) = sum_{k>=0} X^k / (k+1)! by Taylor; intended for ||X|| <= 0.5.
Eigen::MatrixXcd phi1_taylor(const Eigen::MatrixXcd& x) {
    const auto n = x.rows();
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 1; k <= 40; ++k) {
        term = (term * x) / static_cast<double>(k + 1);
        sum += term;
        if (term.norm() < 1e-20 * sum.norm()) break;
    }
    return sum;
}

// phi2(X) = sum_{k>=0} X^k / (k+2)! by Taylor; intended for ||X|| <= 0.5.
Eigen::MatrixXcd phi2_taylor(const Eigen::MatrixXcd& x) {
    const auto n = x.rows();
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Identity(n, n) * 0.5;
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n) * 0.5;
    for (int k = 1; k <= 40; ++k) {
        term = (term * x) / static_cast<double>(k + 2);
        sum += term;
        if (term.norm() < 1e-20 * sum.norm()) break;
    }
    return sum;
}

std::uint64_t probe_seed(double t, std::size_t e_size, std::size_t f_size) {
    std::uint64_t s = 0x9e3779b97f4a7c15ULL;
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(t));
    std::memcpy(&bits, &t, sizeof(bits));
    s ^= bits + (s << 6) + (s >> 2);
    s ^= e_size + (s << 6) + (s >> 2);
    s ^= f_size + (s << 6) + (s >> 2);
    return s;
}

}  // namespace

Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& x) {
    const int s = scaling_exponent(x.norm());
    Eigen::MatrixXcd e = pade6(x / std::ldexp(1.0, s));
    for (int i = 0; i < s; ++i) e = e * e;
    return e;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> semigroup_and_phi1(
    const Eigen::MatrixXcd& l, double t) {
    const auto n = l.rows();
    if (t == 0.0 || l.norm() == 0.0) {
        return {Eigen::MatrixXcd::Identity(n, n), Eigen::MatrixXcd::Identity(n, n)};
    }
    const Eigen::MatrixXcd x = t * l;
    const int s = scaling_exponent(x.norm());
    const Eigen::MatrixXcd xs = x / std::ldexp(1.0, s);
    Eigen::MatrixXcd e = pade6(-xs);
    Eigen::MatrixXcd phi = phi1_taylor(-xs);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    for (int i = 0; i < s; ++i) {
        phi = phi * (id + e) * 0.5;  // phi1(2z) = phi1(z)(1 + e^{-z})/2
        e = e * e;
    }
    return {std::move(e), std::move(phi)};
}

std::array<Eigen::MatrixXcd, 3> semigroup_phi12(const Eigen::MatrixXcd& l, double t) {
    const auto n = l.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    if (t == 0.0 || l.norm() == 0.0) return {id, id, 0.5 * id};
    const Eigen::MatrixXcd x = t * l;
    const int s = scaling_exponent(x.norm());
    const Eigen::MatrixXcd xs = x / std::ldexp(1.0, s);
    Eigen::MatrixXcd e = pade6(-xs);
    Eigen::MatrixXcd phi = phi1_taylor(-xs);
    Eigen::MatrixXcd psi = phi2_taylor(-xs);
    for (int i = 0; i < s; ++i) {
        psi = (2.0 * psi + phi * phi) * 0.25;  // phi2(2z) = (2 phi2(z) + phi1(z)^2)/4
        phi = phi * (id + e) * 0.5;
        e = e * e;
    }
    return {std::move(e), std::move(phi), std::move(psi)};
}

std::string family_name(Family f) {
    switch (f) {
        case Family::Semigroup: return "semigroup";
        case Family::GradientSemigroup: return "gradient_semigroup";
        case Family::GeneratorSemigroup: return "generator_semigroup";
    }
    throw std::logic_error("family_name: bad enum");
}

Family family_from_name(const std::string& name) {
    if (name == "semigroup") return Family::Semigroup;
    if (name == "gradient_semigroup") return Family::GradientSemigroup;
    if (name == "generator_semigroup") return Family::GeneratorSemigroup;
    throw std::invalid_argument("unknown family '" + name + "'");
}

PropagatorCache::PropagatorCache(const DiscreteOperator& op, double base_gap, int levels)
    : op_(std::make_shared<DiscreteOperator>(op)), base_gap_(base_gap), levels_(levels) {
    if (!(base_gap > 0.0)) {
        throw std::invalid_argument("build_propagator: base gap must be positive");
    }
    if (levels < 0 || levels > 40) {
        throw std::invalid_argument("build_propagator: levels must be in [0, 40]");
    }
    auto [e0, phi0] = semigroup_and_phi1(op_->matrix(), base_gap);
    powers_.push_back(std::move(e0));
    phi1_tables_.push_back(std::move(phi0));
    const auto n = op_->matrix().rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    for (int j = 1; j <= levels; ++j) {
        phi1_tables_.push_back(phi1_tables_.back() * (id + powers_.back()) * 0.5);
        powers_.push_back(powers_.back() * powers_.back());
    }
}

std::vector<int> PropagatorCache::resolve_gap(double t) const {
    if (t < 0.0) throw std::invalid_argument("resolve_gap: negative gap");
    const double k = t / base_gap_;
    const long long kr = std::llround(k);
    const long long k_max = (1LL << (levels_ + 1)) - 1;
    if (std::abs(k - static_cast<double>(kr)) > 1e-9 * std::max(1.0, k) || kr > k_max) {
        const long long lo = std::clamp(static_cast<long long>(std::floor(k)), 0LL, k_max);
        const long long hi = std::clamp(static_cast<long long>(std::ceil(k)), 0LL, k_max);
        std::ostringstream msg;
        msg << "unresolvable gap " << t << "; nearest resolvable gaps: "
            << lo * base_gap_ << " and " << hi * base_gap_
            << " (multiples of base gap " << base_gap_ << " up to " << k_max * base_gap_ << ")";
        throw std::invalid_argument(msg.str());
    }
    std::vector<int> out;
    for (int j = 0; j <= levels_; ++j) {
        if ((kr >> j) & 1) out.push_back(j);
    }
    return out;
}

Eigen::MatrixXcd PropagatorCache::resolved_product(double t) const {
    const auto n = op_->matrix().rows();
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Identity(n, n);
    for (int j : resolve_gap(t)) e = powers_[j] * e;
    return e;
}

const Eigen::MatrixXcd& PropagatorCache::exponential(double t) const {
    auto it = exp_memo_.find(t);
    if (it == exp_memo_.end()) {
        auto [e, phi] = semigroup_and_phi1(op_->matrix(), t);
        it = exp_memo_.emplace(t, std::move(e)).first;
        phi1_memo_.emplace(t, std::move(phi));
    }
    return it->second;
}

const Eigen::MatrixXcd& PropagatorCache::phi1(double t) const {
    auto it = phi1_memo_.find(t);
    if (it == phi1_memo_.end()) {
        auto [e, phi] = semigroup_and_phi1(op_->matrix(), t);
        exp_memo_.emplace(t, std::move(e));
        it = phi1_memo_.emplace(t, std::move(phi)).first;
    }
    return it->second;
}

const Eigen::MatrixXcd& PropagatorCache::phi2(double t) const {
    auto it = phi2_memo_.find(t);
    if (it == phi2_memo_.end()) {
        it = phi2_memo_.emplace(t, semigroup_phi12(op_->matrix(), t)[2]).first;
    }
    return it->second;
}

const Eigen::MatrixXcd& PropagatorCache::exponential_adjoint(double t) const {
    auto it = exp_adjoint_memo_.find(t);
    if (it == exp_adjoint_memo_.end()) {
        auto [e, phi] = semigroup_and_phi1(op_->adjoint_matrix(), t);
        it = exp_adjoint_memo_.emplace(t, std::move(e)).first;
    }
    return it->second;
}

Eigen::MatrixXcd PropagatorCache::family_matrix(Family f, double t, bool adjoint) const {
    const Eigen::MatrixXcd& e = adjoint ? exponential_adjoint(t) : exponential(t);
    switch (f) {
        case Family::Semigroup:
            return e;
        case Family::GradientSemigroup: {
            const Grid& g = grid();
            const int n = g.num_cells();
            Eigen::MatrixXcd out(n * g.dim(), n);
            for (int j = 0; j < n; ++j) {
                VectorField grad = apply_gradient(g, e.col(j));
                for (int a = 0; a < g.dim(); ++a) {
                    out.block(a * n, j, n, 1) = grad.col(a);
                }
            }
            return std::sqrt(t) * out;
        }
        case Family::GeneratorSemigroup:
            return t * ((adjoint ? op_->adjoint_matrix() : op_->matrix()) * e);
    }
    throw std::logic_error("family_matrix: bad enum");
}

Field PropagatorCache::semigroup_apply(double t, const Field& g) const {
    return resolved_product(t) * g;
}

VectorField PropagatorCache::gradient_semigroup_apply(double t, const Field& g) const {
    return apply_gradient(grid(), semigroup_apply(t, g));
}

Field PropagatorCache::generator_semigroup_apply(double t, const Field& g) const {
    return op_->matrix() * semigroup_apply(t, g);
}

PropagatorCache build_propagator(const DiscreteOperator& op, double base_gap, int levels) {
    return PropagatorCache(op, base_gap, levels);
}

namespace {

// L^p norm of a possibly multi-axis field restricted to `cells` (ell^2 across axes
// within a cell), grid measure h^n. p = inf -> max over cells.
double lp_on_cells(const Grid& grid, const Eigen::VectorXcd& w, int axes,
                   const std::vector<int>& cells, double p) {
    const int n = grid.num_cells();
    const bool inf = !std::isfinite(p);
    double acc = 0.0;
    for (int c : cells) {
        double mag2 = 0.0;
        for (int a = 0; a < axes; ++a) mag2 += std::norm(w(a * n + c));
        double mag = std::sqrt(mag2);
        if (inf) {
            acc = std::max(acc, mag);
        } else {
            acc += std::pow(mag, p);
        }
    }
    if (inf) return acc;
    return std::pow(acc * grid.cell_volume(), 1.0 / p);
}

}  // namespace

double masked_norm(const Grid& grid, const Eigen::MatrixXcd& m,
                   const std::vector<int>& e_cells, const std::vector<int>& f_cells,
                   double q, double r) {
    if (e_cells.empty() || f_cells.empty()) {
        throw std::invalid_argument("masked_norm: empty cell set");
    }
    if (q > r) throw std::invalid_argument("masked_norm: need q <= r");
    const int n = grid.num_cells();
    const int axes = static_cast<int>(m.rows()) / n;

    // Submatrix with rows restricted to E (all axis blocks) and columns to F.
    Eigen::MatrixXcd sub(static_cast<int>(e_cells.size()) * axes,
                         static_cast<int>(f_cells.size()));
    for (std::size_t jc = 0; jc < f_cells.size(); ++jc) {
        for (std::size_t ic = 0; ic < e_cells.size(); ++ic) {
            for (int a = 0; a < axes; ++a) {
                sub(static_cast<int>(ic + a * e_cells.size()), static_cast<int>(jc)) =
                    m(a * n + e_cells[ic], f_cells[jc]);
            }
        }
    }

    if (q == 2.0 && r == 2.0) {
        // L^2 measure weights cancel between input and output.
        return Eigen::JacobiSVD<Eigen::MatrixXcd>(sub).singularValues()(0);
    }

    // Certified lower bound: delta probes plus 256 seeded Gaussian probes in F.
    const int fn = static_cast<int>(f_cells.size());
    std::mt19937_64 rng(probe_seed(0.0, e_cells.size(), f_cells.size()));
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = 0.0;
    auto try_probe = [&](const Eigen::VectorXcd& v_sub) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
        for (int j = 0; j < fn; ++j) v(f_cells[j]) = v_sub(j);
        double vn = lp_on_cells(grid, v, 1, f_cells, q);
        if (vn == 0.0) return;
        Eigen::VectorXcd w_sub = sub * v_sub;
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(static_cast<long>(n) * axes);
        for (std::size_t ic = 0; ic < e_cells.size(); ++ic) {
            for (int a = 0; a < axes; ++a) {
                w(a * n + e_cells[ic]) = w_sub(static_cast<int>(ic + a * e_cells.size()));
            }
        }
        best = std::max(best, lp_on_cells(grid, w, axes, e_cells, r) / vn);
    };
    for (int j = 0; j < fn; ++j) {
        try_probe(Eigen::VectorXcd::Unit(fn, j));
    }
    for (int k = 0; k < 256; ++k) {
        Eigen::VectorXcd v(fn);
        for (int j = 0; j < fn; ++j) v(j) = Complex(gauss(rng), gauss(rng));
        try_probe(v);
    }
    return best;
}

double offdiagonal_norm(const PropagatorCache& cache, Family family, double t,
                        const std::vector<int>& e_cells, const std::vector<int>& f_cells,
                        double q, double r, bool adjoint) {
    if (e_cells.empty() || f_cells.empty()) {
        throw std::invalid_argument("offdiagonal_norm: empty cell set");
    }
    return masked_norm(cache.grid(), cache.family_matrix(family, t, adjoint),
                       e_cells, f_cells, q, r);
}

DecayFit fit_decay_order(const PropagatorCache& cache, Family family, double q, double r,
                         const std::vector<double>& time_list,
                         const std::vector<double>& separation_list,
                         double ball_radius, bool adjoint, int m) {
    const Grid& grid = cache.grid();
    const double period = grid.period();
    double rb = ball_radius > 0.0 ? ball_radius : period / 32.0;
    if (rb < 2.0 * grid.spacing()) rb = 2.0 * grid.spacing();

    const Point f_center{0.0, 0.0};
    BallIndices f_ball = ball_indices(grid, f_center, rb);

    DecayFit fit;
    fit.family_tag = std::string(adjoint ? "adjoint_" : "") + family_name(family);
    fit.q = q;
    fit.r = r;
    fit.homogeneity = m;

    for (double t : time_list) {
        const double zero_norm =
            masked_norm(grid, cache.family_matrix(family, t, adjoint),
                        f_ball.cells, f_ball.cells, q, r);
        for (double d : separation_list) {
            const double center_sep = d + 2.0 * rb;
            if (center_sep >= 0.5 * period) {
                throw std::invalid_argument(
                    "fit_decay_order: separation too large for the torus");
            }
            Point e_center{center_sep, 0.0};
            BallIndices e_ball = ball_indices(grid, e_center, rb);
            // Realized set separation from the discrete cell centers.
            double sep = std::numeric_limits<double>::infinity();
            for (int ce : e_ball.cells) {
                for (int cf : f_ball.cells) {
                    sep = std::min(sep, torus_distance(grid, ce, cf));
                }
            }
            const double norm = masked_norm(grid, cache.family_matrix(family, t, adjoint),
                                            e_ball.cells, f_ball.cells, q, r);
            DecaySample s;
            s.t = t;
            s.separation = sep;
            s.norm = norm;
            s.norm_at_zero = zero_norm;
            s.used_in_fit = norm > 1e-13 && norm < 0.5 * zero_norm && zero_norm > 0.0;
            fit.samples.push_back(s);
        }
    }

    bool any_above_floor = false;
    for (const auto& s : fit.samples) any_above_floor |= s.norm > 1e-13;
    if (!any_above_floor) {
        throw std::runtime_error("decay exceeds measurable range");
    }

    std::vector<double> xs, ys;
    for (const auto& s : fit.samples) {
        if (!s.used_in_fit) continue;
        xs.push_back(std::log(1.0 + std::pow(s.separation, m) / s.t));
        ys.push_back(std::log(s.norm / s.norm_at_zero));
    }
    if (xs.size() < 4) {
        throw std::runtime_error("fit_decay_order: fewer than 4 usable samples "
                                 "in the decaying regime");
    }
    const auto np = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = np * sxx - sx * sx;
    if (denom <= 0.0) {
        throw std::runtime_error("fit_decay_order: degenerate sample geometry");
    }
    const double slope = (np * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / np;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (slope * xs[i] + intercept);
        rss += e * e;
    }
    fit.fitted_order = -slope;
    fit.fit_residual = std::sqrt(rss / np) / std::log(10.0);  // RMS in log10
    return fit;
}

}  // namespace tentlab
