#pragma once

// Posterior summaries from chain traces: inclusion probabilities, moments
// and quantiles over all kept draws (structural zeros included, matching
// the convention of reporting unconditional posterior expectations),
// conditional-on-inclusion samples, model-size trajectories, and
// replicate-level error against known generating values.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <armadillo>

#include "ivbma/sampler.hpp"
#include "ivbma/simulate.hpp"

namespace ivbma {

enum class Stage { Second, First };

struct CoefficientSummary {
    double inclusion_prob = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
};

struct PosteriorSummary {
    std::vector<CoefficientSummary> second_stage;  // X, then W columns
    std::vector<CoefficientSummary> first_stage;   // Z columns, then W columns
    double avg_second_size = 0.0;
    double avg_first_size = 0.0;
    double step1_accept_rate = 0.0;
    double step3_accept_rate = 0.0;
    std::uint64_t psi_failures = 0;
};

// Quantile of a sorted sample with linear interpolation between order
// statistics (the common type-7 rule).
inline double quantile_sorted(const arma::vec& sorted, double prob) {
    const arma::uword n = sorted.n_elem;
    if (n == 0) throw std::invalid_argument("quantile_sorted: empty sample");
    if (n == 1) return sorted(0);
    const double h = prob * double(n - 1);
    const auto lo = static_cast<arma::uword>(h);
    if (lo + 1 >= n) return sorted(n - 1);
    return sorted(lo) + (h - double(lo)) * (sorted(lo + 1) - sorted(lo));
}

namespace detail {

inline CoefficientSummary summarize_column(const arma::vec& draws,
                                           double included_count) {
    CoefficientSummary s;
    const arma::uword kept = draws.n_elem;
    s.inclusion_prob = included_count / double(kept);
    s.mean = arma::mean(draws);
    s.sd = kept > 1 ? arma::stddev(draws) : 0.0;
    const arma::vec sorted = arma::sort(draws);
    s.q025 = quantile_sorted(sorted, 0.025);
    s.q50 = quantile_sorted(sorted, 0.50);
    s.q975 = quantile_sorted(sorted, 0.975);
    return s;
}

inline double column_count(const arma::uchar_mat& flags, arma::uword j) {
    double c = 0.0;
    for (arma::uword r = 0; r < flags.n_rows; ++r) c += flags(r, j);
    return c;
}

}  // namespace detail

inline PosteriorSummary summarize(const ChainTrace& trace) {
    const arma::uword kept = trace.kept();
    if (kept == 0) throw std::invalid_argument("summarize: empty trace");
    PosteriorSummary out;
    out.second_stage.reserve(trace.rho.n_cols);
    for (arma::uword j = 0; j < trace.rho.n_cols; ++j)
        out.second_stage.push_back(detail::summarize_column(
            trace.rho.col(j), detail::column_count(trace.L, j)));
    out.first_stage.reserve(trace.lambda.n_cols);
    for (arma::uword j = 0; j < trace.lambda.n_cols; ++j)
        out.first_stage.push_back(detail::summarize_column(
            trace.lambda.col(j), detail::column_count(trace.M, j)));
    out.avg_second_size = double(arma::accu(trace.L)) / double(kept);
    out.avg_first_size = double(arma::accu(trace.M)) / double(kept);
    const auto& c = trace.counters;
    out.step1_accept_rate =
        c.step1_proposals ? double(c.step1_accepts) / double(c.step1_proposals) : 0.0;
    out.step3_accept_rate =
        c.step3_proposals ? double(c.step3_accepts) / double(c.step3_proposals) : 0.0;
    out.psi_failures = c.psi_failures;
    return out;
}

// Draws of one coefficient restricted to the iterations where its variable
// was included. Empty optional if it never was.
inline std::optional<arma::vec> conditional_density(const ChainTrace& trace,
                                                    arma::uword slot,
                                                    Stage stage) {
    const arma::mat& draws = (stage == Stage::Second) ? trace.rho : trace.lambda;
    const arma::uchar_mat& flags = (stage == Stage::Second) ? trace.L : trace.M;
    if (slot >= draws.n_cols)
        throw std::invalid_argument("conditional_density: slot out of range");
    arma::vec sub(draws.n_rows);
    arma::uword count = 0;
    for (arma::uword r = 0; r < draws.n_rows; ++r)
        if (flags(r, slot)) sub(count++) = draws(r, slot);
    if (count == 0) return std::nullopt;
    return arma::vec(sub.head(count));
}

// Running average of the active-variable counts, per chain, over every
// iteration including burn-in.
struct SizeTrajectory {
    arma::vec second_stage;
    arma::vec first_stage;
};

inline std::vector<SizeTrajectory> model_size_trajectory(
    const std::vector<ChainTrace>& traces) {
    std::vector<SizeTrajectory> out;
    out.reserve(traces.size());
    for (const ChainTrace& trace : traces) {
        SizeTrajectory t;
        t.second_stage = arma::cumsum(trace.l_size);
        t.first_stage = arma::cumsum(trace.m_size);
        for (arma::uword i = 0; i < t.second_stage.n_elem; ++i) {
            t.second_stage(i) /= double(i + 1);
            t.first_stage(i) /= double(i + 1);
        }
        out.push_back(std::move(t));
    }
    return out;
}

// Squared error of the posterior means against the generating values,
// summed over the coefficients of each stage per replicate, then averaged
// over replicates. Both per-stage sums and their total are reported.
struct MseReport {
    double second_stage = 0.0;
    double first_stage = 0.0;
    double total = 0.0;
};

inline MseReport replicate_mse(const std::vector<PosteriorSummary>& summaries,
                               const std::vector<TruthRecord>& truths) {
    if (summaries.empty() || summaries.size() != truths.size())
        throw std::invalid_argument("replicate_mse: need one truth per summary");
    MseReport report;
    for (std::size_t r = 0; r < summaries.size(); ++r) {
        const PosteriorSummary& s = summaries[r];
        const TruthRecord& t = truths[r];
        if (s.second_stage.size() != t.rho.n_elem ||
            s.first_stage.size() != t.lambda.n_elem)
            throw std::invalid_argument("replicate_mse: dimension mismatch with truth");
        for (arma::uword j = 0; j < t.rho.n_elem; ++j) {
            const double d = s.second_stage[j].mean - t.rho(j);
            report.second_stage += d * d;
        }
        for (arma::uword j = 0; j < t.lambda.n_elem; ++j) {
            const double d = s.first_stage[j].mean - t.lambda(j);
            report.first_stage += d * d;
        }
    }
    report.second_stage /= double(summaries.size());
    report.first_stage /= double(summaries.size());
    report.total = report.second_stage + report.first_stage;
    return report;
}

}  // namespace ivbma
