#pragma once

// Replication study driver: repeatedly simulate a dataset from a known
// design, fit both the model-averaging sampler and the fixed-model baseline
// on the same data, and aggregate posterior means, inclusion probabilities,
// and squared-error totals across replicates. Replicates run on a thread
// pool; every replicate derives its generator streams from the study seed
// alone, so results do not depend on the thread count.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <armadillo>

#include "ivbma/parallel.hpp"
#include "ivbma/sampler.hpp"
#include "ivbma/simulate.hpp"
#include "ivbma/summary.hpp"

namespace ivbma {

struct StudyConfig {
    SimSpec spec = default_truth();
    std::uint64_t reps = 200;
    std::uint64_t iterations = 50000;
    std::uint64_t burn_in = 10000;
    std::uint64_t thin = 1;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0 picks default_thread_count()
    bool include_baseline = true;

    void validate() const {
        spec.validate();
        if (reps == 0) throw std::invalid_argument("study config: reps must be positive");
        SamplerConfig sampler;
        sampler.iterations = iterations;
        sampler.burn_in = burn_in;
        sampler.thin = thin;
        sampler.validate();
    }
};

struct ReplicateResult {
    TruthRecord truth;
    PosteriorSummary ivbma;
    PosteriorSummary iv;
};

// Per-coefficient medians and quartiles over replicates, plus the averaged
// squared-error report, for one method.
struct MethodAggregate {
    arma::vec median_mean_second;
    arma::vec median_mean_first;
    arma::vec median_incl_second;
    arma::vec median_incl_first;
    arma::vec incl_q25_second;
    arma::vec incl_q75_second;
    arma::vec incl_q25_first;
    arma::vec incl_q75_first;
    MseReport mse;
};

struct StudyReport {
    SimSpec spec;
    std::uint64_t reps = 0;
    std::uint64_t iterations = 0;
    std::uint64_t burn_in = 0;
    bool baseline_included = true;
    std::vector<ReplicateResult> replicates;
    MethodAggregate ivbma;
    MethodAggregate iv;  // meaningful only when baseline_included
};

namespace detail {

inline arma::vec column_quantile(const arma::mat& per_rep, double prob) {
    arma::vec out(per_rep.n_cols);
    for (arma::uword j = 0; j < per_rep.n_cols; ++j)
        out(j) = quantile_sorted(arma::sort(per_rep.col(j)), prob);
    return out;
}

template <typename Pick>
MethodAggregate aggregate_method(const std::vector<ReplicateResult>& results,
                                 Pick pick) {
    const std::size_t reps = results.size();
    const std::size_t d2 = pick(results[0]).second_stage.size();
    const std::size_t d1 = pick(results[0]).first_stage.size();
    arma::mat mean2(reps, d2), mean1(reps, d1), incl2(reps, d2), incl1(reps, d1);
    std::vector<PosteriorSummary> summaries;
    std::vector<TruthRecord> truths;
    summaries.reserve(reps);
    truths.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const PosteriorSummary& s = pick(results[r]);
        for (std::size_t j = 0; j < d2; ++j) {
            mean2(r, j) = s.second_stage[j].mean;
            incl2(r, j) = s.second_stage[j].inclusion_prob;
        }
        for (std::size_t j = 0; j < d1; ++j) {
            mean1(r, j) = s.first_stage[j].mean;
            incl1(r, j) = s.first_stage[j].inclusion_prob;
        }
        summaries.push_back(s);
        truths.push_back(results[r].truth);
    }
    MethodAggregate agg;
    agg.median_mean_second = column_quantile(mean2, 0.50);
    agg.median_mean_first = column_quantile(mean1, 0.50);
    agg.median_incl_second = column_quantile(incl2, 0.50);
    agg.median_incl_first = column_quantile(incl1, 0.50);
    agg.incl_q25_second = column_quantile(incl2, 0.25);
    agg.incl_q75_second = column_quantile(incl2, 0.75);
    agg.incl_q25_first = column_quantile(incl1, 0.25);
    agg.incl_q75_first = column_quantile(incl1, 0.75);
    agg.mse = replicate_mse(summaries, truths);
    return agg;
}

}  // namespace detail

// Streams 3r, 3r+1, 3r+2 of the study seed drive replicate r's data,
// model-averaging chain, and baseline chain. Both chains fit the same data.
inline StudyReport run_study(const StudyConfig& config) {
    config.validate();
    StudyReport report;
    report.spec = config.spec;
    report.reps = config.reps;
    report.iterations = config.iterations;
    report.burn_in = config.burn_in;
    report.baseline_included = config.include_baseline;
    report.replicates.resize(config.reps);

    SamplerConfig base;
    base.iterations = config.iterations;
    base.burn_in = config.burn_in;
    base.thin = config.thin;

    const unsigned threads =
        config.threads ? config.threads : default_thread_count();
    parallel_for(config.reps, threads, [&](std::size_t r) {
        RngStream data_rng = RngStream::for_stream(config.seed, 3 * r);
        auto [data, truth] = generate(config.spec, data_rng);

        SamplerConfig avg = base;
        avg.mode = SamplerMode::IVBMA;
        ChainTrace avg_trace =
            run_chain(data, avg, RngStream::for_stream(config.seed, 3 * r + 1));

        PosteriorSummary fixed_summary;
        if (config.include_baseline) {
            SamplerConfig fixed = base;
            fixed.mode = SamplerMode::IV;
            ChainTrace fixed_trace =
                run_chain(data, fixed, RngStream::for_stream(config.seed, 3 * r + 2));
            fixed_summary = summarize(fixed_trace);
        }

        report.replicates[r] =
            ReplicateResult{truth, summarize(avg_trace), std::move(fixed_summary)};
    });

    report.ivbma = detail::aggregate_method(
        report.replicates, [](const ReplicateResult& r) -> const PosteriorSummary& {
            return r.ivbma;
        });
    if (config.include_baseline)
        report.iv = detail::aggregate_method(
            report.replicates, [](const ReplicateResult& r) -> const PosteriorSummary& {
                return r.iv;
            });
    return report;
}

}  // namespace ivbma
