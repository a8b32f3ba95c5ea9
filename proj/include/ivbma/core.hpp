#pragma once

// Conditional-posterior algebra for the two-stage model
//
//   Y = X beta + W gamma + eps        (outcome stage, coefficients rho)
//   X = Z delta + W tau + eta         (instrument stage, coefficients lambda)
//   (eps_i, eta_i) ~ N2(0, Sigma)
//
// with independent N(0, 1) priors on every active coefficient. Everything
// here is a deterministic function of (data, parameters); the sampling lives
// in sampler.hpp. All model comparison happens in log space.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <armadillo>

#include "ivbma/data.hpp"
#include "ivbma/kernels.hpp"
#include "ivbma/model_space.hpp"

namespace ivbma {

// Numerically impossible inputs for a conditional update: a non-positive
// conditional variance, the doubled system's covariance losing positive
// definiteness, or beta indistinguishable from zero while X sits in the
// outcome model. The sampler treats these as recoverable events.
class DegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One Gibbs state. Coefficients outside the current models are exactly zero.
struct ParameterState {
    arma::vec rho;     // length 1+p, rho(0) = beta
    arma::vec lambda;  // length q+p, first q slots = delta, rest = tau
    arma::mat Sigma;   // 2x2 positive definite
    ModelPair pair;
};

// Gaussian conditional posterior N(mean_hat, precision^{-1}) on the active
// coefficients of one stage, in the model's slot order.
struct GaussianPosterior {
    arma::vec mean_hat;
    arma::mat precision;
};

inline arma::uvec active_slots(const std::vector<std::uint8_t>& include) {
    arma::uvec idx(include.size());
    arma::uword count = 0;
    for (std::size_t j = 0; j < include.size(); ++j)
        if (include[j]) idx(count++) = j;
    return idx.head(count);
}

// Residuals at the given state: eps = Y - X beta - W gamma,
// eta = X - Z delta - W tau.
inline std::pair<arma::vec, arma::vec> residuals(const Dataset& data,
                                                 const ParameterState& state) {
    const arma::uword p = data.p(), q = data.q();
    if (state.rho.n_elem != 1 + p || state.lambda.n_elem != q + p)
        throw std::invalid_argument("residuals: state dimensions do not match data");
    arma::vec eps = data.Y - data.X * state.rho(0);
    if (p > 0) eps -= data.W * state.rho.tail(p);
    arma::vec eta = data.X - data.Z * state.lambda.head(q);
    if (p > 0) eta -= data.W * state.lambda.tail(p);
    return {std::move(eps), std::move(eta)};
}

// Posterior for a unit-normal-prior regression with noise variance s:
// precision = I + X'X / s, mean = precision^{-1} X'y / s. Both stages'
// updates reduce to this once their response and regressors are formed.
inline GaussianPosterior normal_prior_posterior(const arma::mat& regressors,
                                                const arma::vec& response,
                                                double s) {
    GaussianPosterior post;
    const arma::uword d = regressors.n_cols;
    if (d == 0) return post;
    post.precision = arma::eye(d, d) + (regressors.t() * regressors) / s;
    post.mean_hat =
        chol_solve(cholesky(post.precision), regressors.t() * response / s);
    return post;
}

namespace detail {

// Columns of [X W] selected by L, in slot order.
inline arma::mat selected_outcome_regressors(const Dataset& data,
                                             const arma::uvec& slots) {
    arma::mat v(data.n(), slots.n_elem);
    for (arma::uword j = 0; j < slots.n_elem; ++j)
        v.col(j) = (slots(j) == 0) ? data.X : data.W.col(slots(j) - 1);
    return v;
}

// Columns of [Z W] selected by M, in slot order.
inline arma::mat selected_instrument_regressors(const Dataset& data,
                                                const arma::uvec& slots) {
    const arma::uword q = data.q();
    arma::mat u(data.n(), slots.n_elem);
    for (arma::uword j = 0; j < slots.n_elem; ++j)
        u.col(j) = (slots(j) < q) ? data.Z.col(slots(j)) : data.W.col(slots(j) - q);
    return u;
}

}  // namespace detail

// Conditional posterior of the active outcome coefficients given
// (lambda, Sigma): with xi = s11 - s21^2/s22 and Ytilde = Y - (s21/s22) eta,
// precision = I_l + V_L'V_L / xi and mean = precision^{-1} V_L'Ytilde / xi,
// V_L being the selected columns of [X W]. Empty L gives the
// zero-dimensional posterior.
inline GaussianPosterior rho_posterior(const Dataset& data,
                                       const arma::vec& lambda,
                                       const arma::mat& Sigma,
                                       const SecondStageModel& L) {
    const double s11 = Sigma(0, 0), s21 = Sigma(1, 0), s22 = Sigma(1, 1);
    if (!(s22 > 0.0))
        throw DegeneracyError("rho_posterior: sigma22 not positive");
    const double xi = s11 - s21 * s21 / s22;
    if (!(xi > 0.0)) throw DegeneracyError("rho_posterior: xi not positive");
    const arma::uvec slots = active_slots(L.include);
    if (slots.n_elem == 0) return GaussianPosterior{};
    const arma::uword p = data.p(), q = data.q();
    arma::vec eta = data.X - data.Z * lambda.head(q);
    if (p > 0) eta -= data.W * lambda.tail(p);
    const arma::vec ytilde = data.Y - (s21 / s22) * eta;
    return normal_prior_posterior(detail::selected_outcome_regressors(data, slots),
                                  ytilde, xi);
}

// The 2n-observation whitened regression system used to update lambda when
// beta != 0. Substituting the instrument equation into the outcome equation
// and scaling by 1/beta gives a second regression of Y* = (Y - W gamma)/beta
// on [Z W]; stacking it with the instrument equation doubles the data, and
// the pairwise error covariance
//   Psi = [ s22 + s11/b^2 + 2 s21/b ,  s22 + s21/b ;  . , s22 ]
// is removed by whitening each observation pair with the inverse of Psi's
// Cholesky factor. S interleaves the whitened (Y*_i, X_i); column j of T
// interleaves the whitened ([Z W]_ij, [Z W]_ij) pairs for the variables in M.
struct DoubledSystem {
    arma::vec S;  // length 2n
    arma::mat T;  // 2n x m
};

inline DoubledSystem build_doubled_system(const Dataset& data,
                                          const arma::vec& rho,
                                          const arma::mat& Sigma,
                                          const FirstStageModel& M) {
    const double beta = rho(0);
    if (std::abs(beta) < 1e-12)
        throw DegeneracyError(
            "build_doubled_system: beta within 1e-12 of zero while X is in the outcome model");
    const double s11 = Sigma(0, 0), s21 = Sigma(1, 0), s22 = Sigma(1, 1);
    arma::mat psi(2, 2);
    psi(0, 0) = s22 + s11 / (beta * beta) + 2.0 * s21 / beta;
    psi(0, 1) = psi(1, 0) = s22 + s21 / beta;
    psi(1, 1) = s22;
    arma::mat phi;
    try {
        phi = cholesky(psi);
    } catch (const CholeskyError& e) {
        throw DegeneracyError(
            "build_doubled_system: Psi not positive definite (pivot " +
            std::to_string(e.pivot()) + ")");
    }
    // Whitening an observation pair (a, b) with phi lower triangular:
    // first component a/phi00, second (b - phi10 * (a/phi00)) / phi11.
    const double inv00 = 1.0 / phi(0, 0);
    const double f10 = phi(1, 0);
    const double inv11 = 1.0 / phi(1, 1);

    const arma::uword n = data.n(), p = data.p(), q = data.q();
    arma::vec ystar = data.Y;
    if (p > 0) ystar -= data.W * rho.tail(p);
    ystar /= beta;

    const arma::uvec slots = active_slots(M.include);
    DoubledSystem sys;
    sys.S.set_size(2 * n);
    sys.T.set_size(2 * n, slots.n_elem);
    for (arma::uword i = 0; i < n; ++i) {
        const double a = ystar(i) * inv00;
        sys.S(2 * i) = a;
        sys.S(2 * i + 1) = (data.X(i) - f10 * a) * inv11;
    }
    for (arma::uword j = 0; j < slots.n_elem; ++j) {
        const arma::uword slot = slots(j);
        for (arma::uword i = 0; i < n; ++i) {
            const double u = (slot < q) ? data.Z(i, slot) : data.W(i, slot - q);
            const double a = u * inv00;
            sys.T(2 * i, j) = a;
            sys.T(2 * i + 1, j) = (u - f10 * a) * inv11;
        }
    }
    return sys;
}

// Conditional posterior of the active instrument-stage coefficients given
// (rho, Sigma) when beta != 0, through the doubled system:
// precision = I_m + T'T, mean = precision^{-1} T'S.
inline GaussianPosterior lambda_posterior(const Dataset& data,
                                          const arma::vec& rho,
                                          const arma::mat& Sigma,
                                          const FirstStageModel& M) {
    if (M.active_count() == 0) return GaussianPosterior{};
    const DoubledSystem sys = build_doubled_system(data, rho, Sigma, M);
    return normal_prior_posterior(sys.T, sys.S, 1.0);
}

// Conditional posterior of the active instrument-stage coefficients when
// beta = 0 (X outside the outcome model). The system is then a seemingly
// unrelated regression: with omega = s22 - s21^2/s11 and
// X* = X - (s21/s11) eps, precision = I_m + U_M'U_M / omega and
// mean = precision^{-1} U_M'X* / omega, U_M the selected columns of [Z W].
inline GaussianPosterior sur_lambda_posterior(const Dataset& data,
                                              const arma::vec& rho,
                                              const arma::mat& Sigma,
                                              const FirstStageModel& M) {
    const double s11 = Sigma(0, 0), s21 = Sigma(1, 0), s22 = Sigma(1, 1);
    if (!(s11 > 0.0))
        throw DegeneracyError("sur_lambda_posterior: sigma11 not positive");
    const double omega = s22 - s21 * s21 / s11;
    if (!(omega > 0.0))
        throw DegeneracyError("sur_lambda_posterior: omega not positive");
    const arma::uvec slots = active_slots(M.include);
    if (slots.n_elem == 0) return GaussianPosterior{};
    const arma::uword p = data.p();
    arma::vec eps = data.Y - data.X * rho(0);
    if (p > 0) eps -= data.W * rho.tail(p);
    const arma::vec xstar = data.X - (s21 / s11) * eps;
    return normal_prior_posterior(
        detail::selected_instrument_regressors(data, slots), xstar, omega);
}

// Log integrated likelihood of the model behind a Gaussian posterior, up to
// an additive constant shared by all models of the same stage at the same
// conditioning values: -log|precision|/2 + mean'precision mean/2. The
// dropped constant depends on the other stage's coefficients and Sigma but
// not on the model, so differences of this quantity are exact log Bayes
// factors. The empty model's value is 0, consistent with the same constant.
inline double log_integrated_lik(const GaussianPosterior& post) {
    if (post.mean_hat.n_elem == 0) return 0.0;
    return -0.5 * log_det_psd(post.precision) +
           0.5 * arma::dot(post.mean_hat, post.precision * post.mean_hat);
}

inline double log_integrated_lik_second(const Dataset& data,
                                        const arma::vec& lambda,
                                        const arma::mat& Sigma,
                                        const SecondStageModel& L) {
    return log_integrated_lik(rho_posterior(data, lambda, Sigma, L));
}

// The instrument-stage analogue; routes on the structural value of beta.
inline GaussianPosterior first_stage_posterior(const Dataset& data,
                                               const arma::vec& rho,
                                               const arma::mat& Sigma,
                                               const FirstStageModel& M) {
    return (rho(0) == 0.0) ? sur_lambda_posterior(data, rho, Sigma, M)
                           : lambda_posterior(data, rho, Sigma, M);
}

inline double log_integrated_lik_first(const Dataset& data,
                                       const arma::vec& rho,
                                       const arma::mat& Sigma,
                                       const FirstStageModel& M) {
    return log_integrated_lik(first_stage_posterior(data, rho, Sigma, M));
}

}  // namespace ivbma
