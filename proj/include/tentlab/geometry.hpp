#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tentlab {

/// Point on the torus. Second coordinate is ignored in 1D.
using Point = std::array<double, 2>;

/// Periodic spatial lattice with N cells per axis and period P.
/// Cell i sits at coordinate i * h with h = P / N, reduced mod P.
class Grid {
public:
    Grid(int dim, int points_per_axis, double period);

    int dim() const { return dim_; }
    int points_per_axis() const { return n_; }
    double period() const { return period_; }
    double spacing() const { return h_; }
    double cell_volume() const { return cell_volume_; }
    int num_cells() const { return num_cells_; }

    /// Flat index from per-axis indices (reduced mod N).
    int index(int ix, int iy = 0) const;
    std::array<int, 2> axis_indices(int cell) const;
    Point cell_center(int cell) const;

    bool operator==(const Grid& other) const {
        return dim_ == other.dim_ && n_ == other.n_ && period_ == other.period_;
    }

private:
    int dim_;
    int n_;
    double period_;
    double h_;
    double cell_volume_;
    int num_cells_;
};

/// Shortest distance on the torus: per-axis min(|d|, P - |d|), combined Euclidean.
double torus_distance(const Grid& grid, const Point& x, const Point& y);
double torus_distance(const Grid& grid, int cell_a, int cell_b);

/// Geometric time mesh t_k = t_min * ratio^k, k = 0..K.
class TimeGrid {
public:
    TimeGrid(double t_min, double ratio, int num_nodes);

    double t_min() const { return nodes_.front(); }
    double t_max() const { return nodes_.back(); }
    double ratio() const { return ratio_; }
    /// Number of nodes (K + 1).
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    /// Number of mesh cells [t_k, t_{k+1}), equal to num_nodes() - 1.
    int num_cells() const { return num_nodes() - 1; }
    double node(int k) const { return nodes_[k]; }
    /// Width of cell k, t_{k+1} - t_k.
    double cell_width(int k) const { return widths_[k]; }
    const std::vector<double>& nodes() const { return nodes_; }

    bool operator==(const TimeGrid& other) const {
        return nodes_ == other.nodes_;
    }

private:
    double ratio_;
    std::vector<double> nodes_;
    std::vector<double> widths_;
};

/// K = ceil(log(t_max / t_min) / log(ratio)), nodes exactly t_min * ratio^k.
TimeGrid build_time_grid(double t_min, double t_max, double ratio);

struct BallIndices {
    std::vector<int> cells;
    /// Set when radius >= P/2: the ball sees itself around the torus.
    bool wraps = false;
};

/// Cells whose centers lie strictly within `radius` of `center` in torus metric.
/// The cell containing `center` is always included.
BallIndices ball_indices(const Grid& grid, const Point& center, double radius);

enum class RegionKind { Ball, Cone, Whitney, Tent };

/// A space-time index set: per listed time node, a set of spatial cells.
struct Region {
    RegionKind kind;
    std::vector<int> time_indices;
    std::vector<std::vector<int>> space_indices_per_time;

    Point center{0.0, 0.0};
    double radius = 0.0;
    double aperture = 0.0;
    int homogeneity = 0;

    std::size_t total_cells() const;
    bool contains(int time_index, int cell) const;
};

/// Cone at x: per time node t_k, the ball B(x, alpha * t_k^{1/m}).
Region cone_region(const Grid& grid, const TimeGrid& tg, const Point& x,
                   double alpha, int m);

/// Parabolic Whitney box (t, 2t] x B(x, t^{1/2}); t must be a mesh node with 2t <= t_max.
Region whitney_cube(const Grid& grid, const TimeGrid& tg, double t, const Point& x);

/// Tent over the cell set `ball`: all (t_k, y) with alpha * t_k^{1/m} <= dist(y, complement of ball).
Region tent_region(const Grid& grid, const TimeGrid& tg,
                   const std::vector<int>& ball, double alpha, int m);

}  // namespace tentlab
