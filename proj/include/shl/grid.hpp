// Discretized domains: node coordinates plus quadrature (cell) weights.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace shl {

enum class DomainKind { interval, box, ball, ring, sphere };

std::string to_string(DomainKind k);

// Node coordinates live in the embedding space used for covariance distances:
// the ring is embedded in R^2 (unit circle) and the sphere in R^3.
struct Grid {
    DomainKind kind = DomainKind::interval;
    int dim = 1;
    std::vector<double> coords;   // size() * dim, row major
    std::vector<double> weights;  // quadrature weight (cell volume) per node
    std::vector<double> angle;    // ring: theta per node; sphere: theta,phi pairs
    std::vector<std::pair<double, double>> bounds;  // interval/box axis bounds
    double radius = 0.0;          // ball and sphere
    std::vector<int> nodes_per_axis;

    std::size_t size() const { return weights.size(); }
    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
    }
    double volume() const;
};

// Uniform nodes on [a,b] with trapezoid weights.
Grid interval_grid(double a, double b, int nodes);

// Tensor product of uniform axes with trapezoid weights.
Grid box_grid(const std::vector<std::pair<double, double>>& bounds, int nodes_per_axis);

// Cell-centred cubic lattice restricted to the open ball B_R(0) in R^3; each
// node carries its full cell volume.
Grid ball_grid(double R, int cells_per_diameter);

// Uniform angles theta_j = 2 pi j / nodes on the unit circle.
Grid ring_grid(int nodes);

// Gauss-Legendre in cos(theta) times uniform in phi on the sphere of radius R.
Grid sphere_grid(double R, int n_theta, int n_phi);

double distance(std::span<const double> x, std::span<const double> y);
double distance2(std::span<const double> x, std::span<const double> y);

}  // namespace shl
