#include "okflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace okflow {

double interface_fraction(const Field& phi, double band) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (std::abs(phi[i]) < band) ++count;
    return static_cast<double>(count) / static_cast<double>(phi.size());
}

int count_components(const Field& phi, double threshold, bool above) {
    const GridSpec& g = phi.grid();
    const int nx = g.nodes(0);
    const int ny = g.nodes(1);
    const int nz = g.dims() == 3 ? g.nodes(2) : 1;
    const bool periodic = g.bc() == BoundaryKind::Periodic;
    const std::size_t n = g.node_count();

    auto in_phase = [&](std::size_t i) {
        return above ? phi[i] > threshold : phi[i] < threshold;
    };

    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack;
    int components = 0;

    auto index = [&](int x, int y, int z) {
        return (static_cast<std::size_t>(x) * ny + y) * nz + z;
    };

    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start] || !in_phase(start)) continue;
        ++components;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            const int z = static_cast<int>(cur % nz);
            const int y = static_cast<int>((cur / nz) % ny);
            const int x = static_cast<int>(cur / (static_cast<std::size_t>(ny) * nz));
            const int coords[3] = {x, y, z};
            const int limits[3] = {nx, ny, nz};
            for (int axis = 0; axis < g.dims(); ++axis) {
                for (int dir = -1; dir <= 1; dir += 2) {
                    int c[3] = {coords[0], coords[1], coords[2]};
                    c[axis] += dir;
                    if (c[axis] < 0 || c[axis] >= limits[axis]) {
                        if (!periodic) continue;
                        c[axis] = (c[axis] + limits[axis]) % limits[axis];
                    }
                    const std::size_t nb = index(c[0], c[1], c[2]);
                    if (!seen[nb] && in_phase(nb)) {
                        seen[nb] = 1;
                        stack.push_back(nb);
                    }
                }
            }
        }
    }
    return components;
}

std::string to_string(PatternClass c) {
    switch (c) {
        case PatternClass::Uniform: return "uniform";
        case PatternClass::Spots: return "spots";
        case PatternClass::Stripes: return "stripes";
        case PatternClass::Mixed: return "mixed";
    }
    return "unknown";
}

PatternMetrics classify_pattern(const Field& phi) {
    PatternMetrics m;
    double lo = phi[0], hi = phi[0];
    for (std::size_t i = 0; i < phi.size(); ++i) {
        lo = std::min(lo, phi[i]);
        hi = std::max(hi, phi[i]);
    }
    m.value_range = hi - lo;
    m.threshold = 0.5 * (hi + lo);
    m.interface_fraction = interface_fraction(phi);

    if (m.value_range < 0.4) {
        m.pattern = PatternClass::Uniform;
        return m;
    }

    m.components_high = count_components(phi, m.threshold, true);
    m.components_low = count_components(phi, m.threshold, false);
    std::size_t high_count = 0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (phi[i] > m.threshold) ++high_count;
    m.high_area_fraction = static_cast<double>(high_count) / static_cast<double>(phi.size());

    const bool high_is_minority = m.high_area_fraction < 0.5;
    const int n_minor = high_is_minority ? m.components_high : m.components_low;
    const int n_major = high_is_minority ? m.components_low : m.components_high;

    if (n_minor >= 5 && n_minor >= 3 * n_major) {
        m.pattern = PatternClass::Spots;
    } else if (m.components_high >= 2 && m.components_low >= 2 &&
               std::max(m.components_high, m.components_low) <=
                   3 * std::min(m.components_high, m.components_low)) {
        m.pattern = PatternClass::Stripes;
    } else {
        m.pattern = PatternClass::Mixed;
    }
    return m;
}

}  // namespace okflow
