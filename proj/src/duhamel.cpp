#include "tentlab/duhamel.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace tentlab {

namespace {

void check_source(const PropagatorCache& cache, const SpaceTimeField& source) {
    if (!(source.grid == cache.grid())) {
        throw std::invalid_argument("source not aligned to mesh cells: grid mismatch");
    }
    if (source.components() != 1) {
        throw std::invalid_argument("source must be scalar");
    }
    source.check_finite();
}

std::string integrator_tag(const PropagatorCache& cache, const TimeGrid& tg) {
    nlohmann::json j;
    j["base_gap"] = cache.base_gap();
    j["levels"] = cache.levels();
    j["time"] = {{"t_min", tg.t_min()}, {"t_max", tg.t_max()}, {"nodes", tg.num_nodes()}};
    j["scheme"] = "exact piecewise-constant (phi1)";
    return j.dump();
}

}  // namespace

DuhamelSolution duhamel_L1(const PropagatorCache& cache, const SpaceTimeField& source) {
    check_source(cache, source);
    const Grid& g = source.grid;
    const TimeGrid& tg = source.time_grid;
    const int big_k = tg.num_cells();

    DuhamelSolution sol{SpaceTimeField(g, tg, 1), SpaceTimeField(g, tg, g.dim()),
                        SpaceTimeField(g, tg, 1), source, integrator_tag(cache, tg)};

    // Zero data at t = 0; the source value on (0, t_min) is cell 0's.
    Field u = tg.t_min() * (cache.phi1(tg.t_min()) *
                            source.values[0].row(0).transpose());
    auto store = [&](int k, const Field& uk) {
        sol.u.values[0].row(k) = uk.transpose();
        VectorField grad = apply_gradient(g, uk);
        for (int a = 0; a < g.dim(); ++a) sol.grad_u.values[a].row(k) = grad.col(a).transpose();
        sol.lu.values[0].row(k) = (cache.op().matrix() * uk).transpose();
    };
    store(0, u);
    for (int k = 0; k < big_k; ++k) {
        const double dt = tg.cell_width(k);
        const Field fk = source.values[0].row(k).transpose();
        u = cache.exponential(dt) * u + dt * (cache.phi1(dt) * fk);
        store(k + 1, u);
    }
    return sol;
}

SpaceTimeField duhamel_Lhalf(const PropagatorCache& cache, const SpaceTimeField& source) {
    return duhamel_L1(cache, source).grad_u;
}

SpaceTimeField duhamel_L0(const PropagatorCache& cache, const SpaceTimeField& source) {
    check_source(cache, source);
    const Grid& g = source.grid;
    const TimeGrid& tg = source.time_grid;
    SpaceTimeField out(g, tg, 1);

    // v(t) = int_0^t L e^{-(t-s)L} f ds telescopes per constant cell:
    // the cell [a, b] contributes (e^{-(t-b)L} - e^{-(t-a)L}) f.
    Field v = source.values[0].row(0).transpose() -
              cache.exponential(tg.t_min()) * source.values[0].row(0).transpose();
    out.values[0].row(0) = v.transpose();
    for (int k = 0; k < tg.num_cells(); ++k) {
        const double dt = tg.cell_width(k);
        const Field fk = source.values[0].row(k).transpose();
        v = cache.exponential(dt) * (v - fk) + fk;
        out.values[0].row(k + 1) = v.transpose();
    }
    return out;
}

TzResult duhamel_Tz(const PropagatorCache& cache, Family family, double z,
                    const SpaceTimeField& source) {
    check_source(cache, source);
    const Grid& g = source.grid;
    const TimeGrid& tg = source.time_grid;
    const int components = family == Family::GradientSemigroup ? g.dim() : 1;
    TzResult res{SpaceTimeField(g, tg, components), true};

    for (int k = 0; k < tg.num_nodes(); ++k) {
        const double t = tg.node(k);
        const double half = 0.5 * t;
        Field acc = Field::Zero(g.num_cells());
        bool any = false;
        for (int j = 0; j < tg.num_cells(); ++j) {
            const double a = tg.node(j);
            if (a >= half) break;
            const double b = std::min(tg.node(j + 1), half);  // straddle split at t/2
            const double mid = 0.5 * (a + b);
            const double w = (b - a) * std::pow(mid / t, z);
            acc += w * (cache.exponential(t - mid) *
                        source.values[0].row(j).transpose());
            any = true;
        }
        if (!any) continue;
        res.empty_range = false;
        switch (family) {
            case Family::Semigroup:
                res.field.values[0].row(k) = acc.transpose();
                break;
            case Family::GradientSemigroup: {
                VectorField grad = apply_gradient(g, acc);
                for (int a = 0; a < g.dim(); ++a) {
                    res.field.values[a].row(k) = grad.col(a).transpose();
                }
                break;
            }
            case Family::GeneratorSemigroup:
                res.field.values[0].row(k) = (cache.op().matrix() * acc).transpose();
                break;
        }
    }
    return res;
}

std::pair<SpaceTimeField, SpaceTimeField> split_regular_singular(
    const PropagatorCache& cache, Family family, const SpaceTimeField& source) {
    SpaceTimeField full = [&] {
        switch (family) {
            case Family::Semigroup: return duhamel_L1(cache, source).u;
            case Family::GradientSemigroup: return duhamel_Lhalf(cache, source);
            case Family::GeneratorSemigroup: return duhamel_L0(cache, source);
        }
        throw std::logic_error("split_regular_singular: bad family");
    }();
    SpaceTimeField regular = duhamel_Tz(cache, family, 0.0, source).field;
    SpaceTimeField singular = full;
    for (int c = 0; c < full.components(); ++c) {
        singular.values[c] -= regular.values[c];
    }
    return {std::move(regular), std::move(singular)};
}

double homotopy_residual(const PropagatorCache& cache, const SpaceTimeField& v,
                         int s_node, int t_node, const Field& h) {
    if (s_node >= t_node) {
        throw std::invalid_argument("homotopy_residual: need s_node < t_node");
    }
    const TimeGrid& tg = v.time_grid;
    if (t_node >= tg.num_nodes()) {
        throw std::invalid_argument("homotopy_residual: node out of range");
    }
    const Grid& g = v.grid;
    const double gap = tg.node(t_node) - tg.node(s_node);
    const Field vt = v.values[0].row(t_node).transpose();
    const Field vs = v.values[0].row(s_node).transpose();
    const Field eh = cache.exponential_adjoint(gap) * h;
    return std::abs(inner_product(g, vt, h) - inner_product(g, vs, eh));
}

double weak_form_residual(const PropagatorCache& cache, const SpaceTimeField& u,
                          const SpaceTimeField& f, const CoefficientField& coeffs,
                          const SpaceTimeField& phi) {
    const Grid& g = u.grid;
    const TimeGrid& tg = u.time_grid;
    if (!(f.grid == g) || !(phi.grid == g) || !(f.time_grid == tg) ||
        !(phi.time_grid == tg)) {
        throw std::invalid_argument("weak_form_residual: mesh mismatch");
    }
    const int last = tg.num_nodes() - 1;
    if (phi.values[0].row(0).norm() != 0.0 || phi.values[0].row(last).norm() != 0.0) {
        throw std::invalid_argument("test function not compactly supported");
    }
    DiscreteOperator a_op(coeffs);

    Complex t1 = 0.0, t2 = 0.0, t3 = 0.0;
    // T1 = -sum_k <u_k, phi_k - phi_{k-1}>.
    for (int k = 0; k <= last; ++k) {
        const Field uk = u.values[0].row(k).transpose();
        Field dk = phi.values[0].row(k).transpose();
        if (k > 0) dk -= phi.values[0].row(k - 1).transpose();
        t1 -= inner_product(g, uk, dk);
    }
    for (int k = 0; k < tg.num_cells(); ++k) {
        const double dt = tg.cell_width(k);
        const Field uk = u.values[0].row(k).transpose();
        const Field fk = f.values[0].row(k).transpose();
        const Field pk = phi.values[0].row(k).transpose();
        // Exact cell average of the piecewise-exponential solution.
        const Field ubar = cache.phi1(dt) * uk + dt * (cache.phi2(dt) * fk);
        t2 += dt * inner_product(g, a_op.apply_coefficients(apply_gradient(g, ubar)),
                                 apply_gradient(g, pk));
        t3 += dt * inner_product(g, fk, pk);
    }
    const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
    if (scale == 0.0) return 0.0;
    return std::abs(t1 + t2 - t3) / scale;
}

}  // namespace tentlab
