#include "tentlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tentlab {

Grid::Grid(int dim, int points_per_axis, double period)
    : dim_(dim), n_(points_per_axis), period_(period) {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("Grid: dim must be 1 or 2");
    }
    if (points_per_axis < 8) {
        throw std::invalid_argument("Grid: need at least 8 points per axis");
    }
    if (!(period > 0.0)) {
        throw std::invalid_argument("Grid: period must be positive");
    }
    h_ = period_ / n_;
    cell_volume_ = std::pow(h_, dim_);
    num_cells_ = (dim_ == 1) ? n_ : n_ * n_;
}

int Grid::index(int ix, int iy) const {
    auto wrap = [this](int i) {
        int r = i % n_;
        return r < 0 ? r + n_ : r;
    };
    if (dim_ == 1) return wrap(ix);
    return wrap(iy) * n_ + wrap(ix);
}

std::array<int, 2> Grid::axis_indices(int cell) const {
    if (dim_ == 1) return {cell, 0};
    return {cell % n_, cell / n_};
}

Point Grid::cell_center(int cell) const {
    auto [ix, iy] = axis_indices(cell);
    return {ix * h_, dim_ == 2 ? iy * h_ : 0.0};
}

namespace {
double axis_distance(double a, double b, double period) {
    double d = std::fabs(a - b);
    d = std::fmod(d, period);
    return std::min(d, period - d);
}
}  // namespace

double torus_distance(const Grid& grid, const Point& x, const Point& y) {
    double dx = axis_distance(x[0], y[0], grid.period());
    if (grid.dim() == 1) return dx;
    double dy = axis_distance(x[1], y[1], grid.period());
    return std::hypot(dx, dy);
}

double torus_distance(const Grid& grid, int cell_a, int cell_b) {
    return torus_distance(grid, grid.cell_center(cell_a), grid.cell_center(cell_b));
}

TimeGrid::TimeGrid(double t_min, double ratio, int num_nodes) : ratio_(ratio) {
    if (!(t_min > 0.0)) throw std::invalid_argument("TimeGrid: t_min must be positive");
    if (!(ratio > 1.0)) throw std::invalid_argument("TimeGrid: ratio must exceed 1");
    if (num_nodes < 2) throw std::invalid_argument("TimeGrid: need at least 2 nodes");
    nodes_.resize(num_nodes);
    for (int k = 0; k < num_nodes; ++k) {
        nodes_[k] = t_min * std::pow(ratio, k);
    }
    widths_.resize(num_nodes - 1);
    for (int k = 0; k + 1 < num_nodes; ++k) {
        widths_[k] = nodes_[k + 1] - nodes_[k];
        if (!(widths_[k] > 0.0)) throw std::invalid_argument("TimeGrid: degenerate cell");
    }
}

TimeGrid build_time_grid(double t_min, double t_max, double ratio) {
    if (!(t_min > 0.0 && t_min < t_max)) {
        throw std::invalid_argument("build_time_grid: need 0 < t_min < t_max");
    }
    if (!(ratio > 1.0)) {
        throw std::invalid_argument("build_time_grid: ratio must exceed 1");
    }
    double k_real = std::log(t_max / t_min) / std::log(ratio);
    int k = static_cast<int>(std::ceil(k_real - 1e-12));
    if (k < 1) k = 1;
    if (k > 10000) throw std::invalid_argument("build_time_grid: mesh too fine");
    return TimeGrid(t_min, ratio, k + 1);
}

BallIndices ball_indices(const Grid& grid, const Point& center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("ball_indices: radius must be positive");
    BallIndices out;
    out.wraps = radius >= grid.period() / 2.0;
    int own = grid.index(static_cast<int>(std::lround(center[0] / grid.spacing())),
                         static_cast<int>(std::lround(center[1] / grid.spacing())));
    for (int c = 0; c < grid.num_cells(); ++c) {
        if (c == own || torus_distance(grid, grid.cell_center(c), center) < radius) {
            out.cells.push_back(c);
        }
    }
    return out;
}

std::size_t Region::total_cells() const {
    std::size_t n = 0;
    for (const auto& s : space_indices_per_time) n += s.size();
    return n;
}

bool Region::contains(int time_index, int cell) const {
    for (std::size_t i = 0; i < time_indices.size(); ++i) {
        if (time_indices[i] == time_index) {
            const auto& s = space_indices_per_time[i];
            return std::binary_search(s.begin(), s.end(), cell) ||
                   std::find(s.begin(), s.end(), cell) != s.end();
        }
    }
    return false;
}

Region cone_region(const Grid& grid, const TimeGrid& tg, const Point& x,
                   double alpha, int m) {
    if (!(alpha > 0.0)) throw std::invalid_argument("cone_region: aperture must be positive");
    if (m < 1) throw std::invalid_argument("cone_region: homogeneity must be >= 1");
    Region r;
    r.kind = RegionKind::Cone;
    r.center = x;
    r.aperture = alpha;
    r.homogeneity = m;
    for (int k = 0; k < tg.num_nodes(); ++k) {
        double rad = alpha * std::pow(tg.node(k), 1.0 / m);
        r.time_indices.push_back(k);
        r.space_indices_per_time.push_back(ball_indices(grid, x, rad).cells);
    }
    return r;
}

Region whitney_cube(const Grid& grid, const TimeGrid& tg, double t, const Point& x) {
    if (2.0 * t > tg.t_max() * (1.0 + 1e-12)) {
        throw std::invalid_argument("whitney_cube: Whitney cube exceeds time mesh");
    }
    Region r;
    r.kind = RegionKind::Whitney;
    r.center = x;
    r.radius = std::sqrt(t);
    auto ball = ball_indices(grid, x, std::sqrt(t)).cells;
    for (int k = 0; k < tg.num_nodes(); ++k) {
        double tk = tg.node(k);
        if (tk > t * (1.0 + 1e-12) && tk <= 2.0 * t * (1.0 + 1e-12)) {
            r.time_indices.push_back(k);
            r.space_indices_per_time.push_back(ball);
        }
    }
    return r;
}

Region tent_region(const Grid& grid, const TimeGrid& tg,
                   const std::vector<int>& ball, double alpha, int m) {
    if (!(alpha > 0.0)) throw std::invalid_argument("tent_region: aperture must be positive");
    std::vector<bool> in_ball(grid.num_cells(), false);
    for (int c : ball) in_ball[c] = true;

    // Distance from each cell to the complement of the ball; +inf if no complement.
    std::vector<double> dist_to_complement(grid.num_cells(),
                                           std::numeric_limits<double>::infinity());
    bool has_complement = false;
    for (int c = 0; c < grid.num_cells(); ++c) {
        if (!in_ball[c]) has_complement = true;
    }
    if (has_complement) {
        for (int y = 0; y < grid.num_cells(); ++y) {
            double best = std::numeric_limits<double>::infinity();
            for (int z = 0; z < grid.num_cells(); ++z) {
                if (!in_ball[z]) best = std::min(best, torus_distance(grid, y, z));
            }
            dist_to_complement[y] = best;
        }
    }

    Region r;
    r.kind = RegionKind::Tent;
    r.aperture = alpha;
    r.homogeneity = m;
    for (int k = 0; k < tg.num_nodes(); ++k) {
        double threshold = alpha * std::pow(tg.node(k), 1.0 / m);
        std::vector<int> cells;
        for (int y = 0; y < grid.num_cells(); ++y) {
            if (threshold <= dist_to_complement[y]) cells.push_back(y);
        }
        if (!cells.empty()) {
            r.time_indices.push_back(k);
            r.space_indices_per_time.push_back(std::move(cells));
        }
    }
    return r;
}

}  // namespace tentlab
