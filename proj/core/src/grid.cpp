#include "okflow/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace okflow {

std::string to_string(BoundaryKind bc) {
    return bc == BoundaryKind::Periodic ? "periodic" : "no-flux";
}

BoundaryKind boundary_kind_from_string(const std::string& name) {
    if (name == "periodic") return BoundaryKind::Periodic;
    if (name == "no-flux" || name == "noflux") return BoundaryKind::NoFlux;
    throw std::invalid_argument("unknown boundary kind '" + name + "'");
}

GridSpec::GridSpec(std::vector<int> nodes_per_dim,
                   std::vector<double> lengths,
                   BoundaryKind bc)
    : dims_(static_cast<int>(nodes_per_dim.size())), bc_(bc) {
    if (dims_ != 2 && dims_ != 3)
        throw std::invalid_argument("grid must be 2D or 3D");
    if (lengths.size() != nodes_per_dim.size())
        throw std::invalid_argument("grid nodes and lengths must have matching dimensions");

    node_count_ = 1;
    cell_volume_ = 1.0;
    domain_volume_ = 1.0;
    for (int a = 0; a < dims_; ++a) {
        const int n = nodes_per_dim[a];
        const double len = lengths[a];
        if (n < 4)
            throw std::invalid_argument("grid needs at least 4 nodes per axis");
        if (!(len > 0.0))
            throw std::invalid_argument("grid lengths must be positive");
        nodes_[a] = n;
        lengths_[a] = len;
        spacing_[a] = bc_ == BoundaryKind::Periodic ? len / n : len / (n - 1);
        node_count_ *= static_cast<std::size_t>(n);
        cell_volume_ *= spacing_[a];
        domain_volume_ *= len;

        auto& mn = minus_[a];
        auto& pl = plus_[a];
        mn.resize(n);
        pl.resize(n);
        for (int i = 0; i < n; ++i) {
            mn[i] = i - 1;
            pl[i] = i + 1;
        }
        if (bc_ == BoundaryKind::Periodic) {
            mn[0] = n - 1;
            pl[n - 1] = 0;
        } else {
            mn[0] = 1;       // ghost mirror across the boundary node
            pl[n - 1] = n - 2;
        }

        auto& w = weight_[a];
        w.assign(n, 1.0);
        if (bc_ == BoundaryKind::NoFlux) {
            w[0] = 0.5;
            w[n - 1] = 0.5;
        }
    }

    node_weight_.resize(node_count_);
    const int nx = nodes_[0];
    const int ny = dims_ >= 2 ? nodes_[1] : 1;
    const int nz = dims_ == 3 ? nodes_[2] : 1;
    std::size_t idx = 0;
    weight_sum_ = 0.0;
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y)
            for (int z = 0; z < nz; ++z, ++idx) {
                double w = weight_[0][x] * weight_[1][y];
                if (dims_ == 3) w *= weight_[2][z];
                node_weight_[idx] = w;
                weight_sum_ += w;
            }
}

bool GridSpec::operator==(const GridSpec& other) const {
    if (dims_ != other.dims_ || bc_ != other.bc_) return false;
    for (int a = 0; a < dims_; ++a)
        if (nodes_[a] != other.nodes_[a] || lengths_[a] != other.lengths_[a]) return false;
    return true;
}

Field::Field(GridPtr grid, double fill)
    : grid_(std::move(grid)), values_(grid_->node_count(), fill) {}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->node_count())
        throw std::invalid_argument("field value count does not match grid node count");
}

bool Field::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

void require_same_grid(const Field& a, const Field& b) {
    if (a.grid_ptr() == b.grid_ptr()) return;
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("fields are bound to different grids");
}

void laplacian_into(const GridSpec& g, std::span<const double> in, std::span<double> out) {
    if (in.size() != g.node_count() || out.size() != g.node_count())
        throw std::invalid_argument("laplacian: field size does not match grid");

    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ihy2 = 1.0 / (g.spacing(1) * g.spacing(1));
    const auto& xm = g.minus(0);
    const auto& xp = g.plus(0);
    const auto& ym = g.minus(1);
    const auto& yp = g.plus(1);
    const int nx = g.nodes(0);
    const int ny = g.nodes(1);

    if (g.dims() == 2) {
        for (int x = 0; x < nx; ++x) {
            const double* row = in.data() + static_cast<std::size_t>(x) * ny;
            const double* rowm = in.data() + static_cast<std::size_t>(xm[x]) * ny;
            const double* rowp = in.data() + static_cast<std::size_t>(xp[x]) * ny;
            double* o = out.data() + static_cast<std::size_t>(x) * ny;
            for (int y = 0; y < ny; ++y) {
                const double c = row[y];
                o[y] = (rowm[y] - 2.0 * c + rowp[y]) * ihx2 +
                       (row[ym[y]] - 2.0 * c + row[yp[y]]) * ihy2;
            }
        }
        return;
    }

    const double ihz2 = 1.0 / (g.spacing(2) * g.spacing(2));
    const auto& zm = g.minus(2);
    const auto& zp = g.plus(2);
    const int nz = g.nodes(2);
    const std::size_t sx = static_cast<std::size_t>(ny) * nz;
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
            const std::size_t base = x * sx + static_cast<std::size_t>(y) * nz;
            const std::size_t bxm = xm[x] * sx + static_cast<std::size_t>(y) * nz;
            const std::size_t bxp = xp[x] * sx + static_cast<std::size_t>(y) * nz;
            const std::size_t bym = x * sx + static_cast<std::size_t>(ym[y]) * nz;
            const std::size_t byp = x * sx + static_cast<std::size_t>(yp[y]) * nz;
            for (int z = 0; z < nz; ++z) {
                const double c = in[base + z];
                out[base + z] = (in[bxm + z] - 2.0 * c + in[bxp + z]) * ihx2 +
                                (in[bym + z] - 2.0 * c + in[byp + z]) * ihy2 +
                                (in[base + zm[z]] - 2.0 * c + in[base + zp[z]]) * ihz2;
            }
        }
    }
}

Field laplacian(const Field& f) {
    Field out(f.grid_ptr());
    laplacian_into(f.grid(), f.values(), out.values());
    return out;
}

double mean(const GridSpec& g, std::span<const double> v) {
    if (v.size() != g.node_count())
        throw std::invalid_argument("mean: field size does not match grid");
    if (v.empty())
        throw std::invalid_argument("mean of an empty field");
    const auto& w = g.node_weight();
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * v[i];
    return acc / g.weight_sum();
}

double mean(const Field& f) { return mean(f.grid(), f.values()); }

double integrate(const Field& f) { return mean(f) * f.grid().domain_volume(); }

double grad_norm_sq_integral(const Field& f) {
    const GridSpec& g = f.grid();
    std::span<const double> v = f.values();
    const int nx = g.nodes(0);
    const int ny = g.nodes(1);
    const int nz = g.dims() == 3 ? g.nodes(2) : 1;
    const bool periodic = g.bc() == BoundaryKind::Periodic;
    const double cv = g.cell_volume();

    double total = 0.0;
    for (int axis = 0; axis < g.dims(); ++axis) {
        const double ih = 1.0 / g.spacing(axis);
        const auto& pl = g.plus(axis);
        const auto& waxis = g.axis_weight(axis);
        const int na = g.nodes(axis);
        double acc = 0.0;
        std::size_t idx = 0;
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y)
                for (int z = 0; z < nz; ++z, ++idx) {
                    const int ia = axis == 0 ? x : (axis == 1 ? y : z);
                    if (!periodic && ia == na - 1) continue;  // no wrap edge
                    std::size_t jdx;
                    if (axis == 0)
                        jdx = (static_cast<std::size_t>(pl[x]) * ny + y) * nz + z;
                    else if (axis == 1)
                        jdx = (static_cast<std::size_t>(x) * ny + pl[y]) * nz + z;
                    else
                        jdx = (static_cast<std::size_t>(x) * ny + y) * nz + pl[z];
                    const double d = (v[jdx] - v[idx]) * ih;
                    // transverse trapezoid weight = full node weight / own-axis weight
                    const double wt = g.node_weight()[idx] / waxis[ia];
                    acc += d * d * wt;
                }
        total += acc * cv;
    }
    return total;
}

}  // namespace okflow
