// Ensemble statistics and the report records emitted by every check.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace shl {

inline constexpr int batch_count = 20;
inline constexpr double sigma_margin = 4.0;

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

// Batch-means standard error of the mean of f(x_i), contiguous batches in
// sample (stream) order.
double batch_stderr(std::span<const double> values, int batches = batch_count);

Estimate mean_estimate(std::span<const double> x);
Estimate abs_moment(std::span<const double> x, int p);      // E|X|^p
Estimate central_moment(std::span<const double> x, int p);  // E(X - mean)^p

struct EnsembleStats {
    double t = 0.0;
    std::size_t node_index = 0;
    double mean = 0.0;
    double var = 0.0;
    double p3 = 0.0;  // E|u|^3
    double p4 = 0.0;  // E|u|^4
    double stderr_mean = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

EnsembleStats summarize(std::span<const double> samples, double t, std::size_t node, std::uint64_t seed);

enum class Verdict { holds, violated, inconclusive, printed_convention_only };

std::string to_string(Verdict v);

// holds: empirical + 4 se <= bound; violated: empirical - 4 se > bound.
Verdict classify(double bound, double empirical, double stderr_);

struct BoundReport {
    std::string bound_name;
    std::string statement;
    std::map<std::string, double> inputs;
    double bound = 0.0;
    double empirical = 0.0;
    double stderr_ = 0.0;
    Verdict verdict = Verdict::inconclusive;
    std::string note;
    std::map<std::string, double> extra;  // side-by-side values (printed forms, true-moment bound)
};

nlohmann::json to_json(const BoundReport& r);

struct InequalityVerdict {
    std::string name;
    std::string sweep;
    double worst_margin = 0.0;  // min of RHS - LHS over the sweep
    std::vector<double> worst_point;
    double tolerance = 0.0;
    bool pass = false;
    std::size_t points = 0;
    std::string note;
};

nlohmann::json to_json(const InequalityVerdict& v);

// Folds one sweep point into a verdict; pass is finalized by finish().
void record_margin(InequalityVerdict& v, double margin, std::vector<double> point);
void finish(InequalityVerdict& v);

}  // namespace shl
