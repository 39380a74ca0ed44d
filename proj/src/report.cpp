#include "shl/report.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace shl {

double batch_stderr(std::span<const double> values, int batches) {
    const std::size_t n = values.size();
    if (n < static_cast<std::size_t>(2 * batches)) {
        // Too few samples for batching: plain standard error.
        if (n < 2) return 0.0;
        double m = 0.0;
        for (double v : values) m += v;
        m /= n;
        double s = 0.0;
        for (double v : values) s += (v - m) * (v - m);
        return std::sqrt(s / (n - 1) / n);
    }
    std::vector<double> means(batches, 0.0);
    std::size_t per = n / batches;
    for (int b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += values[i];
        means[b] = s / per;
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= batches;
    double s = 0.0;
    for (double v : means) s += (v - m) * (v - m);
    return std::sqrt(s / (batches - 1) / batches);
}

Estimate mean_estimate(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean_estimate: empty sample");
    double m = 0.0;
    for (double v : x) m += v;
    return {m / x.size(), batch_stderr(x)};
}

Estimate abs_moment(std::span<const double> x, int p) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::pow(std::abs(x[i]), p);
    return mean_estimate(y);
}

Estimate central_moment(std::span<const double> x, int p) {
    double m = mean_estimate(x).value;
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::pow(x[i] - m, p);
    return mean_estimate(y);
}

EnsembleStats summarize(std::span<const double> samples, double t, std::size_t node, std::uint64_t seed) {
    EnsembleStats s;
    s.t = t;
    s.node_index = node;
    Estimate m = mean_estimate(samples);
    s.mean = m.value;
    s.stderr_mean = m.stderr_;
    s.var = central_moment(samples, 2).value * samples.size() / std::max<std::size_t>(1, samples.size() - 1);
    s.p3 = abs_moment(samples, 3).value;
    s.p4 = abs_moment(samples, 4).value;
    s.n = samples.size();
    s.seed = seed;
    return s;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::violated: return "violated";
        case Verdict::inconclusive: return "inconclusive";
        case Verdict::printed_convention_only: return "printed-convention-only";
    }
    return "unknown";
}

Verdict classify(double bound, double empirical, double stderr_) {
    if (empirical + sigma_margin * stderr_ <= bound) return Verdict::holds;
    if (empirical - sigma_margin * stderr_ > bound) return Verdict::violated;
    return Verdict::inconclusive;
}

nlohmann::json to_json(const BoundReport& r) {
    nlohmann::json j;
    j["bound_name"] = r.bound_name;
    j["statement"] = r.statement;
    j["inputs"] = r.inputs;
    j["bound"] = r.bound;
    j["empirical"] = r.empirical;
    j["stderr"] = r.stderr_;
    j["verdict"] = to_string(r.verdict);
    if (!r.note.empty()) j["note"] = r.note;
    if (!r.extra.empty()) j["extra"] = r.extra;
    return j;
}

nlohmann::json to_json(const InequalityVerdict& v) {
    nlohmann::json j;
    j["name"] = v.name;
    j["sweep"] = v.sweep;
    j["worst_margin"] = v.worst_margin;
    j["worst_point"] = v.worst_point;
    j["pass"] = v.pass;
    j["tolerance"] = v.tolerance;
    j["points"] = v.points;
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

void record_margin(InequalityVerdict& v, double margin, std::vector<double> point) {
    if (v.points == 0 || margin < v.worst_margin || std::isnan(margin)) {
        v.worst_margin = margin;
        v.worst_point = std::move(point);
    }
    ++v.points;
}

void finish(InequalityVerdict& v) {
    v.pass = v.points > 0 && std::isfinite(v.worst_margin) && v.worst_margin >= -v.tolerance;
}

}  // namespace shl
