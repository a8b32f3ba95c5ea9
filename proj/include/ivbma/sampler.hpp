#pragma once

// The two samplers. ivbma_sweep runs the five-step sweep: an MC3 move on
// the outcome model via the conditional Bayes factor, a draw of rho, an MC3
// move on the instrument model, a draw of lambda, and a conjugate draw of
// Sigma. iv_sweep is the baseline three-step sampler with every variable
// kept in both stages. The MC3 steps hand the retained model's Gaussian
// posterior to the following draw step so nothing is computed twice.

#include <cstdint>
#include <stdexcept>
#include <utility>

#include <armadillo>

#include "ivbma/core.hpp"
#include "ivbma/data.hpp"
#include "ivbma/kernels.hpp"
#include "ivbma/model_space.hpp"
#include "ivbma/rng.hpp"

namespace ivbma {

enum class SamplerMode { IVBMA, IV };

struct SamplerConfig {
    std::uint64_t iterations = 50000;
    std::uint64_t burn_in = 10000;
    std::uint64_t seed = 0;
    SamplerMode mode = SamplerMode::IVBMA;
    std::uint64_t thin = 1;

    void validate() const {
        if (iterations == 0)
            throw std::invalid_argument("sampler config: iterations must be positive");
        if (burn_in >= iterations)
            throw std::invalid_argument("sampler config: burn_in must be below iterations");
        if (thin == 0)
            throw std::invalid_argument("sampler config: thin must be positive");
    }
};

struct SweepCounters {
    std::uint64_t step1_proposals = 0;
    std::uint64_t step1_accepts = 0;
    std::uint64_t step3_proposals = 0;
    std::uint64_t step3_accepts = 0;
    std::uint64_t psi_failures = 0;
};

// Stored draws. Rows are kept iterations; sigma rows hold (s11, s21, s22).
// l_size and m_size record the active-variable counts at every iteration
// including burn-in, which is what the convergence trajectories plot.
struct ChainTrace {
    arma::mat rho;         // kept x (1+p)
    arma::mat lambda;      // kept x (q+p)
    arma::mat sigma;       // kept x 3
    arma::uchar_mat L;     // kept x (1+p), 0/1
    arma::uchar_mat M;     // kept x (q+p), 0/1
    arma::vec l_size;      // length iterations
    arma::vec m_size;      // length iterations
    SweepCounters counters;
    arma::uword n_instruments = 0;
    SamplerConfig config;

    arma::uword kept() const { return rho.n_rows; }
};

// Full models, zero coefficients, identity covariance. Always a valid pair
// because the dataset carries at least one instrument.
inline ParameterState initial_state(const Dataset& data) {
    const arma::uword p = data.p(), q = data.q();
    ParameterState st;
    st.rho = arma::zeros(1 + p);
    st.lambda = arma::zeros(q + p);
    st.Sigma = arma::eye(2, 2);
    st.pair.L.include.assign(1 + p, 1);
    st.pair.M.include.assign(q + p, 1);
    st.pair.M.n_instruments = q;
    return st;
}

// Step 1: single-flip proposal on L, accepted with probability
// min{1, CBF x 1{(L', M) valid}}. Returns the retained model's posterior.
// The acceptance uniform is drawn for every proposal, valid or not.
inline GaussianPosterior mc3_update_second(const Dataset& data,
                                           ParameterState& st, RngStream& rng,
                                           SweepCounters& counters) {
    const SecondStageModel proposal = neighborhood_propose(st.pair.L, rng);
    ++counters.step1_proposals;
    const double u = rng.uniform01();
    GaussianPosterior current =
        rho_posterior(data, st.lambda, st.Sigma, st.pair.L);
    if (!is_valid_pair(proposal, st.pair.M)) return current;
    GaussianPosterior proposed =
        rho_posterior(data, st.lambda, st.Sigma, proposal);
    if (std::log(u) <
        log_integrated_lik(proposed) - log_integrated_lik(current)) {
        st.pair.L = proposal;
        ++counters.step1_accepts;
        return proposed;
    }
    return current;
}

// Step 2: draw rho from the given posterior and scatter into the full
// vector, zeroing everything outside L.
inline void draw_rho(const Dataset&, ParameterState& st, RngStream& rng,
                     const GaussianPosterior& post) {
    const arma::vec draw = mvn_sample(post.mean_hat, post.precision, rng);
    st.rho.zeros();
    const arma::uvec slots = active_slots(st.pair.L.include);
    for (arma::uword j = 0; j < slots.n_elem; ++j) st.rho(slots(j)) = draw(j);
}

inline void draw_rho(const Dataset& data, ParameterState& st, RngStream& rng) {
    draw_rho(data, st, rng,
             rho_posterior(data, st.lambda, st.Sigma, st.pair.L));
}

// Step 3: the analogous MC3 move on M, conditioning on the rho just drawn.
inline GaussianPosterior mc3_update_first(const Dataset& data,
                                          ParameterState& st, RngStream& rng,
                                          SweepCounters& counters) {
    const FirstStageModel proposal = neighborhood_propose(st.pair.M, rng);
    ++counters.step3_proposals;
    const double u = rng.uniform01();
    GaussianPosterior current =
        first_stage_posterior(data, st.rho, st.Sigma, st.pair.M);
    if (!is_valid_pair(st.pair.L, proposal)) return current;
    GaussianPosterior proposed =
        first_stage_posterior(data, st.rho, st.Sigma, proposal);
    if (std::log(u) <
        log_integrated_lik(proposed) - log_integrated_lik(current)) {
        st.pair.M = proposal;
        ++counters.step3_accepts;
        return proposed;
    }
    return current;
}

// Step 4: draw lambda and scatter, zeroing everything outside M.
inline void draw_lambda(const Dataset&, ParameterState& st, RngStream& rng,
                        const GaussianPosterior& post) {
    const arma::vec draw = mvn_sample(post.mean_hat, post.precision, rng);
    st.lambda.zeros();
    const arma::uvec slots = active_slots(st.pair.M.include);
    for (arma::uword j = 0; j < slots.n_elem; ++j)
        st.lambda(slots(j)) = draw(j);
}

inline void draw_lambda(const Dataset& data, ParameterState& st,
                        RngStream& rng) {
    draw_lambda(data, st, rng,
                first_stage_posterior(data, st.rho, st.Sigma, st.pair.M));
}

// Step 5: conjugate covariance draw from the crossproduct of the residuals.
inline void draw_sigma(const Dataset& data, ParameterState& st,
                       RngStream& rng) {
    const auto [eps, eta] = residuals(data, st);
    arma::mat q(2, 2);
    q(0, 0) = arma::dot(eps, eps);
    q(0, 1) = q(1, 0) = arma::dot(eps, eta);
    q(1, 1) = arma::dot(eta, eta);
    st.Sigma = inv_wishart_sample(arma::eye(2, 2) + q,
                                  double(data.n()) + 3.0, rng);
}

// One full five-step sweep. freeze_models skips the two MC3 moves, which
// reduces the kernel to the baseline sampler on whatever models are held;
// it exists for tests that compare the two samplers. A degeneracy in step 3
// or 4 (Psi losing positive definiteness, or beta collapsing onto zero while
// X is in the outcome model) keeps the previous (M, lambda), counts the
// event, and proceeds to step 5, whose fresh Sigma draw retries the pair on
// the next sweep.
inline void ivbma_sweep(const Dataset& data, ParameterState& st,
                        RngStream& rng, SweepCounters& counters,
                        bool freeze_models = false) {
    if (freeze_models) {
        draw_rho(data, st, rng);
    } else {
        const GaussianPosterior post = mc3_update_second(data, st, rng, counters);
        draw_rho(data, st, rng, post);
    }
    FirstStageModel previous = st.pair.M;
    try {
        if (freeze_models) {
            draw_lambda(data, st, rng);
        } else {
            const GaussianPosterior post = mc3_update_first(data, st, rng, counters);
            draw_lambda(data, st, rng, post);
        }
    } catch (const DegeneracyError&) {
        st.pair.M = std::move(previous);
        ++counters.psi_failures;
    }
    draw_sigma(data, st, rng);
}

// The baseline three-step sweep; expects full models in the state.
inline void iv_sweep(const Dataset& data, ParameterState& st, RngStream& rng,
                     SweepCounters& counters) {
    draw_rho(data, st, rng);
    try {
        draw_lambda(data, st, rng);
    } catch (const DegeneracyError&) {
        ++counters.psi_failures;
    }
    draw_sigma(data, st, rng);
}

// Run one chain from the deterministic initial state with the given stream.
// The stream argument exists so a replication harness can hand out
// non-overlapping streams derived from one master seed; config.seed is not
// consulted on this overload.
inline ChainTrace run_chain(const Dataset& data, const SamplerConfig& config,
                            RngStream rng) {
    config.validate();
    data.validate();
    const arma::uword p = data.p(), q = data.q();
    ParameterState st = initial_state(data);

    const arma::uword kept =
        static_cast<arma::uword>((config.iterations - config.burn_in) / config.thin);
    ChainTrace trace;
    trace.config = config;
    trace.n_instruments = q;
    trace.rho.set_size(kept, 1 + p);
    trace.lambda.set_size(kept, q + p);
    trace.sigma.set_size(kept, 3);
    trace.L.set_size(kept, 1 + p);
    trace.M.set_size(kept, q + p);
    trace.l_size.set_size(config.iterations);
    trace.m_size.set_size(config.iterations);

    arma::uword row = 0;
    for (std::uint64_t s = 1; s <= config.iterations; ++s) {
        if (config.mode == SamplerMode::IVBMA)
            ivbma_sweep(data, st, rng, trace.counters);
        else
            iv_sweep(data, st, rng, trace.counters);
        trace.l_size(s - 1) = double(st.pair.L.active_count());
        trace.m_size(s - 1) = double(st.pair.M.active_count());
        if (s > config.burn_in && (s - config.burn_in) % config.thin == 0) {
            trace.rho.row(row) = st.rho.t();
            trace.lambda.row(row) = st.lambda.t();
            trace.sigma(row, 0) = st.Sigma(0, 0);
            trace.sigma(row, 1) = st.Sigma(1, 0);
            trace.sigma(row, 2) = st.Sigma(1, 1);
            for (arma::uword j = 0; j < 1 + p; ++j)
                trace.L(row, j) = st.pair.L.include[j];
            for (arma::uword j = 0; j < q + p; ++j)
                trace.M(row, j) = st.pair.M.include[j];
            ++row;
        }
    }
    return trace;
}

inline ChainTrace run_chain(const Dataset& data, const SamplerConfig& config) {
    return run_chain(data, config, RngStream(config.seed));
}

}  // namespace ivbma
