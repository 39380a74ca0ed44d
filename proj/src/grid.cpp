#include "shl/grid.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "shl/special.hpp"

namespace shl {

std::string to_string(DomainKind k) {
    switch (k) {
        case DomainKind::interval: return "interval";
        case DomainKind::box: return "box";
        case DomainKind::ball: return "ball";
        case DomainKind::ring: return "ring";
        case DomainKind::sphere: return "sphere";
    }
    return "unknown";
}

double Grid::volume() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

Grid interval_grid(double a, double b, int nodes) {
    if (!(b > a)) throw std::invalid_argument("interval_grid: need b > a");
    if (nodes < 2) throw std::invalid_argument("interval_grid: need at least 2 nodes");
    Grid g;
    g.kind = DomainKind::interval;
    g.dim = 1;
    g.coords = linspace(a, b, nodes);
    g.weights = trapezoid_weights(a, b, nodes);
    g.bounds = {{a, b}};
    g.nodes_per_axis = {nodes};
    return g;
}

Grid box_grid(const std::vector<std::pair<double, double>>& bounds, int nodes_per_axis) {
    if (bounds.empty()) throw std::invalid_argument("box_grid: need at least one axis");
    if (nodes_per_axis < 2) throw std::invalid_argument("box_grid: need at least 2 nodes per axis");
    Grid g;
    g.kind = bounds.size() == 1 ? DomainKind::interval : DomainKind::box;
    g.dim = static_cast<int>(bounds.size());
    g.bounds = bounds;
    g.nodes_per_axis.assign(g.dim, nodes_per_axis);
    std::vector<std::vector<double>> ax, aw;
    std::size_t total = 1;
    for (auto [a, b] : bounds) {
        if (!(b > a)) throw std::invalid_argument("box_grid: need hi > lo on every axis");
        ax.push_back(linspace(a, b, nodes_per_axis));
        aw.push_back(trapezoid_weights(a, b, nodes_per_axis));
        total *= nodes_per_axis;
    }
    g.coords.reserve(total * g.dim);
    g.weights.reserve(total);
    std::vector<int> idx(g.dim, 0);
    for (std::size_t k = 0; k < total; ++k) {
        double w = 1.0;
        for (int d = 0; d < g.dim; ++d) {
            g.coords.push_back(ax[d][idx[d]]);
            w *= aw[d][idx[d]];
        }
        g.weights.push_back(w);
        for (int d = g.dim - 1; d >= 0; --d) {
            if (++idx[d] < nodes_per_axis) break;
            idx[d] = 0;
        }
    }
    return g;
}

Grid ball_grid(double R, int cells_per_diameter) {
    if (!(R > 0.0) || cells_per_diameter < 2) throw std::invalid_argument("ball_grid: bad parameters");
    Grid g;
    g.kind = DomainKind::ball;
    g.dim = 3;
    g.radius = R;
    double h = 2.0 * R / cells_per_diameter;
    double cell = h * h * h;
    for (int i = 0; i < cells_per_diameter; ++i)
        for (int j = 0; j < cells_per_diameter; ++j)
            for (int k = 0; k < cells_per_diameter; ++k) {
                double x = -R + (i + 0.5) * h, y = -R + (j + 0.5) * h, z = -R + (k + 0.5) * h;
                if (x * x + y * y + z * z < R * R) {
                    g.coords.insert(g.coords.end(), {x, y, z});
                    g.weights.push_back(cell);
                }
            }
    return g;
}

Grid ring_grid(int nodes) {
    if (nodes < 3) throw std::invalid_argument("ring_grid: need at least 3 nodes");
    Grid g;
    g.kind = DomainKind::ring;
    g.dim = 2;
    g.radius = 1.0;
    for (int j = 0; j < nodes; ++j) {
        double th = 2.0 * pi * j / nodes;
        g.angle.push_back(th);
        g.coords.insert(g.coords.end(), {std::cos(th), std::sin(th)});
        g.weights.push_back(2.0 * pi / nodes);
    }
    g.nodes_per_axis = {nodes};
    return g;
}

Grid sphere_grid(double R, int n_theta, int n_phi) {
    if (!(R > 0.0) || n_theta < 2 || n_phi < 3) throw std::invalid_argument("sphere_grid: bad parameters");
    Grid g;
    g.kind = DomainKind::sphere;
    g.dim = 3;
    g.radius = R;
    const QuadratureRule& gl = gauss_legendre(n_theta);
    double dphi = 2.0 * pi / n_phi;
    for (int i = 0; i < n_theta; ++i) {
        double mu = gl.nodes[i];
        double s = std::sqrt(1.0 - mu * mu);
        for (int j = 0; j < n_phi; ++j) {
            double ph = j * dphi;
            g.coords.insert(g.coords.end(), {R * s * std::cos(ph), R * s * std::sin(ph), R * mu});
            g.angle.insert(g.angle.end(), {std::acos(mu), ph});
            g.weights.push_back(R * R * gl.weights[i] * dphi);
        }
    }
    g.nodes_per_axis = {n_theta, n_phi};
    return g;
}

double distance2(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return s;
}

double distance(std::span<const double> x, std::span<const double> y) { return std::sqrt(distance2(x, y)); }

}  // namespace shl
