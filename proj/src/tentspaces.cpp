#include "tentlab/tentspaces.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace tentlab {

namespace {

// Ball membership as per-cell offsets relative to cell 0; translation by whole
// cells preserves torus distances exactly, so one enumeration serves all centers.
std::vector<std::array<int, 2>> ball_offsets(const Grid& grid, double radius) {
    BallIndices b = ball_indices(grid, grid.cell_center(0), radius);
    std::vector<std::array<int, 2>> out;
    out.reserve(b.cells.size());
    for (int c : b.cells) out.push_back(grid.axis_indices(c));
    return out;
}

int shifted_cell(const Grid& grid, const std::array<int, 2>& base,
                 const std::array<int, 2>& off) {
    return grid.index(base[0] + off[0], base[1] + off[1]);
}

double lp_of_spatial(const Grid& grid, const Eigen::VectorXd& v, double p) {
    if (!std::isfinite(p)) return v.maxCoeff();
    double acc = 0.0;
    for (int i = 0; i < v.size(); ++i) acc += std::pow(v(i), p);
    return std::pow(acc * grid.cell_volume(), 1.0 / p);
}

std::string quadrature_tag(const Grid& g, const TimeGrid& tg) {
    nlohmann::json j;
    j["grid"] = {{"dim", g.dim()}, {"N", g.points_per_axis()}, {"period", g.period()}};
    j["time"] = {{"t_min", tg.t_min()}, {"t_max", tg.t_max()}, {"ratio", tg.ratio()},
                 {"nodes", tg.num_nodes()}, {"rule", "left-endpoint"}};
    return j.dump();
}

}  // namespace

SpaceTimeField::SpaceTimeField(const Grid& g, const TimeGrid& tg, int components)
    : grid(g), time_grid(tg) {
    if (components < 1) throw std::invalid_argument("SpaceTimeField: components >= 1");
    values.assign(components,
                  Eigen::MatrixXcd::Zero(tg.num_nodes(), g.num_cells()));
}

double SpaceTimeField::magnitude2(int k, int c) const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v(k, c));
    return s;
}

void SpaceTimeField::check_finite() const {
    for (const auto& v : values) {
        if (!v.allFinite()) throw std::runtime_error("SpaceTimeField: non-finite entry");
    }
}

SpaceTimeField zero_field(const Grid& grid, const TimeGrid& tg, int components) {
    return SpaceTimeField(grid, tg, components);
}

SpaceTimeField random_field(const Grid& grid, const TimeGrid& tg, std::uint64_t seed,
                            int components) {
    SpaceTimeField f(grid, tg, components);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : f.values) {
        for (int k = 0; k < v.rows(); ++k) {
            for (int c = 0; c < v.cols(); ++c) v(k, c) = Complex(gauss(rng), gauss(rng));
        }
    }
    return f;
}

std::string NormReport::serialize() const {
    nlohmann::json j;
    j["norm_kind"] = norm_kind;
    j["value"] = value;
    j["params"] = nlohmann::json::parse(params_json.empty() ? "{}" : params_json);
    j["quadrature"] = nlohmann::json::parse(
        quadrature_descriptor.empty() ? "{}" : quadrature_descriptor);
    if (!notes.empty()) j["notes"] = notes;
    return j.dump();
}

std::vector<double> supremum_radius_list(const Grid& grid) {
    std::vector<double> radii;
    const double cap = grid.period() / 4.0;
    for (double r = grid.spacing(); r <= cap * (1.0 + 1e-12); r *= std::sqrt(2.0)) {
        radii.push_back(r);
    }
    return radii;
}

Eigen::VectorXd conical_square_function(const SpaceTimeField& f, double beta, int m,
                                        double alpha) {
    const Grid& g = f.grid;
    const TimeGrid& tg = f.time_grid;
    const double n_over_m = static_cast<double>(g.dim()) / m;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(g.num_cells());
    for (int k = 0; k < tg.num_cells(); ++k) {
        const double t = tg.node(k);
        const double w = tg.cell_width(k) * std::pow(t, -2.0 * beta - n_over_m) *
                         g.cell_volume();
        auto offs = ball_offsets(g, alpha * std::pow(t, 1.0 / m));
        for (int x = 0; x < g.num_cells(); ++x) {
            auto base = g.axis_indices(x);
            double s = 0.0;
            for (const auto& off : offs) s += f.magnitude2(k, shifted_cell(g, base, off));
            acc(x) += w * s;
        }
    }
    return acc.cwiseSqrt();
}

NormReport tent_norm(const SpaceTimeField& f, const TentParams& params) {
    if (!std::isfinite(params.p)) {
        throw std::invalid_argument("tent_norm: p = infinity, use tinfty_norm");
    }
    if (!(params.p > 0.0) || params.m < 1 || !(params.alpha > 0.0)) {
        throw std::invalid_argument("tent_norm: need p > 0, m >= 1, alpha > 0");
    }
    f.check_finite();
    Eigen::VectorXd a = conical_square_function(f, params.beta, params.m, params.alpha);
    NormReport rep;
    rep.norm_kind = "tent";
    rep.value = lp_of_spatial(f.grid, a, params.p);
    nlohmann::json jp = {{"p", params.p}, {"beta", params.beta}, {"m", params.m},
                         {"alpha", params.alpha}};
    rep.params_json = jp.dump();
    rep.quadrature_descriptor = quadrature_tag(f.grid, f.time_grid);
    if (params.p < 1.0) rep.notes = "quasi-norm (p < 1)";
    bool degenerate = true;
    for (int k = 0; k < f.time_grid.num_cells(); ++k) {
        if (params.alpha * std::pow(f.time_grid.node(k), 1.0 / params.m) >
            f.grid.spacing()) {
            degenerate = false;
            break;
        }
    }
    if (degenerate) {
        rep.notes += std::string(rep.notes.empty() ? "" : "; ") +
                     "cones contain only the center column at every scale";
    }
    return rep;
}

NormReport tinfty_norm(const SpaceTimeField& f, double beta, int m, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("tinfty_norm: sigma >= 0 required");
    f.check_finite();
    const Grid& g = f.grid;
    const TimeGrid& tg = f.time_grid;
    // Per-cell cumulative time integral: cum(k, y) = sum_{j<=k} dt_j t_j^{-2beta} |f|^2.
    Eigen::MatrixXd cum(tg.num_cells(), g.num_cells());
    for (int k = 0; k < tg.num_cells(); ++k) {
        const double w = tg.cell_width(k) * std::pow(tg.node(k), -2.0 * beta);
        for (int y = 0; y < g.num_cells(); ++y) {
            cum(k, y) = (k > 0 ? cum(k - 1, y) : 0.0) + w * f.magnitude2(k, y);
        }
    }
    double best = 0.0;
    for (double r : supremum_radius_list(g)) {
        auto offs = ball_offsets(g, r);
        const double ball_measure = static_cast<double>(offs.size()) * g.cell_volume();
        const double rm = std::pow(r, m);
        int kmax = -1;
        for (int k = 0; k < tg.num_cells(); ++k) {
            if (tg.node(k) <= rm) kmax = k;
        }
        if (kmax < 0) continue;
        const double scale = std::pow(ball_measure, -sigma) /
                             std::sqrt(static_cast<double>(offs.size()));
        for (int x = 0; x < g.num_cells(); ++x) {
            auto base = g.axis_indices(x);
            double s = 0.0;
            for (const auto& off : offs) s += cum(kmax, shifted_cell(g, base, off));
            best = std::max(best, scale * std::sqrt(s));
        }
    }
    NormReport rep;
    rep.norm_kind = "tinfty";
    rep.value = best;
    nlohmann::json jp = {{"beta", beta}, {"m", m}, {"sigma", sigma}};
    rep.params_json = jp.dump();
    rep.quadrature_descriptor = quadrature_tag(g, tg);
    rep.notes = "time integral truncated below t_min";
    return rep;
}

Eigen::VectorXd vertical_square_function(const SpaceTimeField& f, double beta) {
    const TimeGrid& tg = f.time_grid;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(f.grid.num_cells());
    for (int k = 0; k < tg.num_cells(); ++k) {
        const double w = tg.cell_width(k) * std::pow(tg.node(k), -2.0 * beta);
        for (int x = 0; x < f.grid.num_cells(); ++x) acc(x) += w * f.magnitude2(k, x);
    }
    return acc.cwiseSqrt();
}

SpaceTimeField mq_maximal(const SpaceTimeField& f, double q) {
    if (q < 1.0) throw std::invalid_argument("mq_maximal: q >= 1 required");
    const Grid& g = f.grid;
    SpaceTimeField out(g, f.time_grid, 1);
    std::vector<std::vector<std::array<int, 2>>> offs_per_radius;
    for (double r : supremum_radius_list(g)) offs_per_radius.push_back(ball_offsets(g, r));
    for (int k = 0; k < f.time_grid.num_nodes(); ++k) {
        for (int x = 0; x < g.num_cells(); ++x) {
            auto base = g.axis_indices(x);
            double best = 0.0;
            for (const auto& offs : offs_per_radius) {
                double s = 0.0;
                for (const auto& off : offs) {
                    s += std::pow(f.magnitude2(k, shifted_cell(g, base, off)), q / 2.0);
                }
                best = std::max(best, std::pow(s / static_cast<double>(offs.size()), 1.0 / q));
            }
            out.values[0](k, x) = best;
        }
    }
    return out;
}

double slice_norm(const Grid& grid, const Field& g, double p, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("slice_norm: delta > 0 required");
    if (g.size() != grid.num_cells()) {
        throw std::invalid_argument("slice_norm: field size mismatch");
    }
    auto offs = ball_offsets(grid, std::sqrt(delta));
    Eigen::VectorXd avg(grid.num_cells());
    for (int x = 0; x < grid.num_cells(); ++x) {
        auto base = grid.axis_indices(x);
        double s = 0.0;
        for (const auto& off : offs) s += std::norm(g(shifted_cell(grid, base, off)));
        avg(x) = std::sqrt(s / static_cast<double>(offs.size()));
    }
    return lp_of_spatial(grid, avg, p);
}

double kenig_pipher_norm(const SpaceTimeField& u, double p, double beta, double T) {
    const Grid& g = u.grid;
    const TimeGrid& tg = u.time_grid;
    std::vector<int> outer_nodes;
    for (int k = 0; k < tg.num_nodes(); ++k) {
        if (tg.node(k) < T) outer_nodes.push_back(k);
    }
    if (outer_nodes.empty()) {
        throw std::invalid_argument("kenig_pipher_norm: no mesh node below T");
    }
    Eigen::VectorXd maximal = Eigen::VectorXd::Zero(g.num_cells());
    for (int k : outer_nodes) {
        const double t = tg.node(k);
        // Nodes s_j in (t/2, t] with quadrature weight; the final node carries none.
        double wsum = 0.0;
        std::vector<std::pair<int, double>> inner;
        for (int j = 0; j < tg.num_cells(); ++j) {
            const double s = tg.node(j);
            if (s > 0.5 * t && s <= t * (1.0 + 1e-12)) {
                const double w = tg.cell_width(j) * std::pow(s, -2.0 * beta);
                inner.emplace_back(j, w);
                wsum += tg.cell_width(j);
            }
        }
        if (inner.empty()) continue;
        auto offs = ball_offsets(g, std::sqrt(t));
        const double denom = wsum * static_cast<double>(offs.size());
        for (int x = 0; x < g.num_cells(); ++x) {
            auto base = g.axis_indices(x);
            double s = 0.0;
            for (const auto& [j, w] : inner) {
                for (const auto& off : offs) s += w * u.magnitude2(j, shifted_cell(g, base, off));
            }
            maximal(x) = std::max(maximal(x), std::sqrt(s / denom));
        }
    }
    return lp_of_spatial(g, maximal, p);
}

double whitney_average(const SpaceTimeField& u, double t, const Point& x) {
    Region w = whitney_cube(u.grid, u.time_grid, t, x);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < w.time_indices.size(); ++i) {
        const int k = w.time_indices[i];
        if (k >= u.time_grid.num_cells()) continue;  // final node carries no weight
        const double wk = u.time_grid.cell_width(k);
        for (int c : w.space_indices_per_time[i]) {
            num += wk * u.magnitude2(k, c);
            den += wk;
        }
    }
    if (den == 0.0) throw std::runtime_error("whitney_average: empty quadrature region");
    return std::sqrt(num / den);
}

std::pair<SpaceTimeField, AtomReport> make_atom(const Grid& grid, const TimeGrid& tg,
                                                const std::vector<int>& ball_cells,
                                                double ball_radius, double p, double beta,
                                                int m, std::uint64_t seed) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("make_atom: p in (0, 1]");
    if (ball_cells.empty()) throw std::invalid_argument("make_atom: empty ball");
    const double rm = std::pow(ball_radius, m);
    if (rm > tg.t_max() * (1.0 + 1e-12)) {
        throw std::invalid_argument("make_atom: r^m exceeds t_max");
    }
    std::vector<int> support_nodes;
    for (int k = 0; k < tg.num_cells(); ++k) {
        if (tg.node(k) <= rm) support_nodes.push_back(k);
    }
    if (support_nodes.empty()) {
        throw std::invalid_argument("make_atom: support region empty on mesh");
    }
    SpaceTimeField a(grid, tg, 1);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double norm2 = 0.0;
    for (int k : support_nodes) {
        const double w = tg.cell_width(k) * std::pow(tg.node(k), -2.0 * beta);
        for (int c : ball_cells) {
            Complex v(gauss(rng), gauss(rng));
            a.values[0](k, c) = v;
            norm2 += w * std::norm(v) * grid.cell_volume();
        }
    }
    const double ball_measure = static_cast<double>(ball_cells.size()) * grid.cell_volume();
    const double target = std::pow(ball_measure, -(1.0 / p - 0.5));
    const double scale = target / std::sqrt(norm2);
    a.values[0] *= scale;

    AtomReport rep;
    rep.ball_measure = ball_measure;
    rep.target_norm = target;
    // Re-check from the stored field, not the construction loop.
    double check2 = 0.0;
    bool support_ok = true;
    std::vector<bool> in_ball(grid.num_cells(), false);
    for (int c : ball_cells) in_ball[c] = true;
    for (int k = 0; k < tg.num_cells(); ++k) {
        const double w = tg.cell_width(k) * std::pow(tg.node(k), -2.0 * beta);
        for (int c = 0; c < grid.num_cells(); ++c) {
            const double m2 = a.magnitude2(k, c);
            if (m2 > 0.0 && (!in_ball[c] || tg.node(k) > rm)) support_ok = false;
            check2 += w * m2 * grid.cell_volume();
        }
    }
    rep.measured_norm = std::sqrt(check2);
    rep.support_ok = support_ok;
    return {std::move(a), rep};
}

ApertureReport change_aperture_report(const SpaceTimeField& f, double p, double beta,
                                      int m, const std::vector<double>& alpha_list) {
    if (alpha_list.size() < 3) {
        throw std::invalid_argument("change_aperture_report: need >= 3 apertures");
    }
    if (std::find(alpha_list.begin(), alpha_list.end(), 1.0) == alpha_list.end()) {
        throw std::invalid_argument("change_aperture_report: alpha = 1 required");
    }
    const double n = static_cast<double>(f.grid.dim());
    TentParams params{p, beta, m, 1.0, 0.0};
    const double unit_norm = tent_norm(f, params).value;

    ApertureReport rep;
    rep.p = p;
    rep.beta = beta;
    rep.m = m;
    rep.slack = 1.0;
    for (double alpha : alpha_list) {
        params.alpha = alpha;
        ApertureRow row;
        row.alpha = alpha;
        row.norm = tent_norm(f, params).value;
        row.ratio_to_unit = unit_norm > 0.0 ? row.norm / unit_norm : 0.0;
        const double e1 = std::pow(alpha, n / 2.0);
        const double e2 = std::pow(alpha, n / p);
        row.lower_bound = std::min(e1, e2);
        row.upper_bound = std::max(e1, e2);
        rep.rows.push_back(row);
        if (unit_norm > 0.0 && row.ratio_to_unit > 0.0) {
            rep.slack = std::max(rep.slack, row.ratio_to_unit / row.upper_bound);
            rep.slack = std::max(rep.slack, row.lower_bound / row.ratio_to_unit);
        }
    }
    return rep;
}

}  // namespace tentlab
