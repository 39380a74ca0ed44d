#include "shl/grsf.hpp"

#include <cmath>
#include <stdexcept>

#include "shl/special.hpp"

namespace shl {

std::string to_string(KernelFamily f) {
    return f == KernelFamily::exponential ? "exponential" : "squared_exponential";
}

KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "exponential") return KernelFamily::exponential;
    if (s == "squared_exponential") return KernelFamily::squared_exponential;
    throw std::invalid_argument("unknown kernel family: " + s);
}

double CovarianceKernel::correlation(double r) const {
    if (family == KernelFamily::exponential) return std::exp(-r / ell);
    return std::exp(-(r * r) / (ell * ell));
}

double covariance(const CovarianceKernel& k, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("covariance: dimension mismatch");
    return k.zeta * k.correlation(distance(x, y));
}

FieldSampler::FieldSampler(std::shared_ptr<const Grid> grid, CovarianceKernel kernel)
    : grid_(std::move(grid)), kernel_(kernel) {
    if (!grid_) throw std::invalid_argument("FieldSampler: null grid");
    if (!(kernel_.zeta > 0.0) || !(kernel_.ell > 0.0))
        throw std::invalid_argument("FieldSampler: zeta and ell must be positive");
    const std::size_t m = grid_->size();
    if (m == 0 || m > max_nodes)
        throw std::invalid_argument("FieldSampler: node count must be in [1, 4096]");
    Eigen::MatrixXd K = covariance_matrix();
    for (double j = 1e-12; j <= 1e-6 * 1.0000001; j *= 10.0) {
        Eigen::MatrixXd A = K;
        A.diagonal().array() += j * kernel_.zeta;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            L_ = llt.matrixL();
            jitter_ = j * kernel_.zeta;
            return;
        }
    }
    throw std::runtime_error("FieldSampler: covariance factorization failed at maximum jitter 1e-6*zeta");
}

Eigen::MatrixXd FieldSampler::covariance_matrix() const {
    const std::size_t m = grid_->size();
    Eigen::MatrixXd K(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        K(i, i) = kernel_.zeta;
        for (std::size_t j = 0; j < i; ++j) {
            double c = kernel_.zeta * kernel_.correlation(distance(grid_->point(i), grid_->point(j)));
            K(i, j) = c;
            K(j, i) = c;
        }
    }
    return K;
}

Eigen::VectorXd FieldSampler::draw_standard(SeedPath s) const {
    auto eng = make_engine(s);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::VectorXd z(grid_->size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = nd(eng);
    return z;
}

FieldSample FieldSampler::sample(SeedPath s) const {
    Eigen::VectorXd v = L_.triangularView<Eigen::Lower>() * draw_standard(s);
    FieldSample out;
    out.grid = grid_;
    out.values.assign(v.data(), v.data() + v.size());
    out.seed = s;
    return out;
}

Eigen::MatrixXd FieldSampler::project(const Eigen::MatrixXd& W) const {
    if (static_cast<std::size_t>(W.rows()) != grid_->size())
        throw std::invalid_argument("FieldSampler::project: functional rows must equal node count");
    return L_.triangularView<Eigen::Lower>().transpose() * W;
}

FieldSample sample_field(std::shared_ptr<const Grid> grid, const CovarianceKernel& k, SeedPath s) {
    return FieldSampler(std::move(grid), k).sample(s);
}

double printed_abs_moment(int p, double zeta) {
    if (p < 1) throw std::invalid_argument("printed_abs_moment: p must be >= 1");
    double z = std::pow(zeta, 0.5 * p);
    return 0.5 * (z + ((p % 2 == 0) ? z : -z));
}

double gaussian_abs_moment(int p, double zeta) {
    if (p < 0) throw std::invalid_argument("gaussian_abs_moment: p must be >= 0");
    double z = std::pow(zeta, 0.5 * p);
    if (p % 2 == 0) return z * double_factorial(p - 1);
    return z * std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1)) / std::sqrt(pi);
}

double stochastic_integral(const FieldSample& s, std::span<const double> weight) {
    const Grid& g = *s.grid;
    if (weight.size() != g.size()) throw std::invalid_argument("stochastic_integral: weight size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) acc += weight[i] * s.values[i] * g.weights[i];
    return acc;
}

FieldSample gaussian_smooth(const FieldSample& s, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("gaussian_smooth: scale must be positive");
    const Grid& g = *s.grid;
    FieldSample out = s;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            double w = std::exp(-distance2(g.point(i), g.point(j)) / (scale * scale)) * g.weights[j];
            num += w * s.values[j];
            den += w;
        }
        out.values[i] = num / den;
    }
    return out;
}

MsDifferentiabilityReport ms_differentiability_check(const CovarianceKernel& k,
                                                     const std::vector<double>& h_sequence) {
    if (h_sequence.size() < 2) throw std::invalid_argument("ms_differentiability_check: need at least two steps");
    MsDifferentiabilityReport r;
    r.h = h_sequence;
    for (double h : h_sequence) {
        if (!(h > 0.0)) throw std::invalid_argument("ms_differentiability_check: steps must be positive");
        double arg = k.family == KernelFamily::exponential ? h / k.ell : (h * h) / (k.ell * k.ell);
        r.second_difference.push_back(-2.0 * k.zeta * std::expm1(-arg) / (h * h));
    }
    std::size_t n = r.second_difference.size();
    double last = r.second_difference[n - 1], prev = r.second_difference[n - 2];
    r.converges = std::abs(last - prev) <= 1e-3 * std::abs(last);
    r.limit = last;
    r.verdict = r.converges ? "mean-square differentiable" : "not MS-differentiable";
    return r;
}

}  // namespace shl
