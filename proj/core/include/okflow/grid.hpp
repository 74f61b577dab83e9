// grid.hpp
// Uniform structured grids in 2D/3D with periodic or no-flux boundaries,
// plus the discrete differential and integral operators built on them.

#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace okflow {

enum class BoundaryKind { Periodic, NoFlux };

std::string to_string(BoundaryKind bc);
BoundaryKind boundary_kind_from_string(const std::string& name);

/// Immutable description of a uniform structured grid.
///
/// Node ordering is row-major over the axes (x, y[, z]): the last axis
/// varies fastest. For no-flux grids the nodes include both endpoints and
/// the spacing is L/(N-1); periodic grids omit the duplicate endpoint and
/// use L/N.
class GridSpec {
public:
    GridSpec(std::vector<int> nodes_per_dim,
             std::vector<double> lengths,
             BoundaryKind bc);

    int dims() const { return dims_; }
    int nodes(int axis) const { return nodes_[axis]; }
    double length(int axis) const { return lengths_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    BoundaryKind bc() const { return bc_; }

    std::size_t node_count() const { return node_count_; }
    double cell_volume() const { return cell_volume_; }
    double domain_volume() const { return domain_volume_; }

    // Index of the neighbor along `axis`, with periodic wrap or ghost
    // mirroring already folded in (mirror: index -1 maps to 1).
    const std::vector<int>& minus(int axis) const { return minus_[axis]; }
    const std::vector<int>& plus(int axis) const { return plus_[axis]; }

    // Per-axis quadrature weight (trapezoidal halves at no-flux ends).
    const std::vector<double>& axis_weight(int axis) const { return weight_[axis]; }
    // Product of per-axis weights for every node, and their total.
    const std::vector<double>& node_weight() const { return node_weight_; }
    double weight_sum() const { return weight_sum_; }

    bool operator==(const GridSpec& other) const;

private:
    int dims_;
    std::array<int, 3> nodes_{1, 1, 1};
    std::array<double, 3> lengths_{1.0, 1.0, 1.0};
    std::array<double, 3> spacing_{0.0, 0.0, 0.0};
    BoundaryKind bc_;
    std::size_t node_count_ = 0;
    double cell_volume_ = 0.0;
    double domain_volume_ = 0.0;
    std::array<std::vector<int>, 3> minus_;
    std::array<std::vector<int>, 3> plus_;
    std::array<std::vector<double>, 3> weight_;
    std::vector<double> node_weight_;
    double weight_sum_ = 0.0;
};

using GridPtr = std::shared_ptr<const GridSpec>;

/// Nodal scalar values bound to a grid.
class Field {
public:
    explicit Field(GridPtr grid, double fill = 0.0);
    Field(GridPtr grid, std::vector<double> values);

    const GridSpec& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& vec() { return values_; }
    const std::vector<double>& vec() const { return values_; }

    bool all_finite() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

// Throws std::invalid_argument unless both fields live on the same grid.
void require_same_grid(const Field& a, const Field& b);

// Second-order centered Laplacian (5-point in 2D, 7-point in 3D).
Field laplacian(const Field& f);
void laplacian_into(const GridSpec& g, std::span<const double> in, std::span<double> out);

// Quadrature-weighted nodal average; plain average on periodic grids,
// trapezoidal end weights on no-flux grids.
double mean(const Field& f);
double mean(const GridSpec& g, std::span<const double> v);

// mean(f) times the domain volume.
double integrate(const Field& f);

// Integral of |grad f|^2 via forward differences on edges; consistent with
// the Laplacian so that integrate(f * laplacian(f)) == -grad_norm_sq_integral(f)
// discretely.
double grad_norm_sq_integral(const Field& f);

}  // namespace okflow
