#pragma once

// Synthetic data generator for the replication harness. The defaults
// reproduce the reference design: n = 120 observations, 15 candidate
// covariates, 10 candidate instruments, 6 active outcome coefficients
// (including the endogenous one), 4 active instruments, 3 covariates
// driving the endogenous regressor, and correlated errors.

#include <cstdint>
#include <stdexcept>
#include <utility>

#include <armadillo>

#include "ivbma/data.hpp"
#include "ivbma/kernels.hpp"
#include "ivbma/rng.hpp"

namespace ivbma {

struct SimSpec {
    arma::uword n = 120;
    arma::uword p = 15;
    arma::uword q = 10;
    arma::vec rho_true;     // length 1+p
    arma::vec lambda_true;  // length q+p
    arma::mat Sigma_true;   // 2x2 positive definite
    std::uint64_t seed = 0;

    void validate() const {
        if (n == 0) throw std::invalid_argument("sim spec: n must be positive");
        if (q == 0) throw std::invalid_argument("sim spec: q must be positive");
        if (rho_true.n_elem != 1 + p || lambda_true.n_elem != q + p)
            throw std::invalid_argument("sim spec: coefficient lengths do not match p and q");
        if (Sigma_true.n_rows != 2 || Sigma_true.n_cols != 2)
            throw std::invalid_argument("sim spec: Sigma must be 2x2");
    }
};

// The generating values behind one dataset, kept for error measurement.
struct TruthRecord {
    arma::vec rho;
    arma::vec lambda;
    arma::mat Sigma;
};

// The reference design, optionally resized. Coefficients that fall outside
// a smaller p or q are simply dropped.
inline SimSpec default_truth(arma::uword n = 120, arma::uword p = 15,
                             arma::uword q = 10) {
    SimSpec spec;
    spec.n = n;
    spec.p = p;
    spec.q = q;
    spec.rho_true = arma::zeros(1 + p);
    spec.lambda_true = arma::zeros(q + p);
    spec.Sigma_true = {{1.0, 0.4}, {0.4, 1.0}};

    // Outcome stage: coefficient on X, then on W1, W4, W8, W9, W13.
    const std::pair<arma::uword, double> outcome[] = {
        {0, 1.5}, {1, 2.0}, {4, 1.4}, {8, 2.7}, {9, 1.25}, {13, 3.3}};
    for (const auto& [slot, value] : outcome)
        if (slot < 1 + p) spec.rho_true(slot) = value;

    // Instrument stage: Z3, Z7, Z8, Z10, then W2, W9, W13.
    const std::pair<arma::uword, double> instruments[] = {
        {3, 4.0}, {7, 1.2}, {8, 3.0}, {10, 0.9}};
    for (const auto& [var, value] : instruments)
        if (var <= q) spec.lambda_true(var - 1) = value;
    const std::pair<arma::uword, double> covariates[] = {
        {2, 2.5}, {9, 1.7}, {13, 0.8}};
    for (const auto& [var, value] : covariates)
        if (var <= p) spec.lambda_true(q + var - 1) = value;

    return spec;
}

// Draw one dataset. Draw order is fixed: W column by column, then Z column
// by column, then one standard-normal pair per observation mapped through
// the Cholesky factor of Sigma_true.
inline std::pair<Dataset, TruthRecord> generate(const SimSpec& spec,
                                                RngStream& rng) {
    spec.validate();
    const arma::uword n = spec.n, p = spec.p, q = spec.q;
    Dataset data;
    data.W.set_size(n, p);
    for (arma::uword j = 0; j < p; ++j)
        for (arma::uword i = 0; i < n; ++i) data.W(i, j) = rng.normal();
    data.Z.set_size(n, q);
    for (arma::uword j = 0; j < q; ++j)
        for (arma::uword i = 0; i < n; ++i) data.Z(i, j) = rng.normal();

    const arma::mat ls = cholesky(spec.Sigma_true);
    arma::vec eps(n), eta(n);
    for (arma::uword i = 0; i < n; ++i) {
        const double g1 = rng.normal();
        const double g2 = rng.normal();
        eps(i) = ls(0, 0) * g1;
        eta(i) = ls(1, 0) * g1 + ls(1, 1) * g2;
    }

    data.X = data.Z * spec.lambda_true.head(q) + eta;
    if (p > 0) data.X += data.W * spec.lambda_true.tail(p);
    data.Y = data.X * spec.rho_true(0) + eps;
    if (p > 0) data.Y += data.W * spec.rho_true.tail(p);

    return {std::move(data),
            TruthRecord{spec.rho_true, spec.lambda_true, spec.Sigma_true}};
}

inline std::pair<Dataset, TruthRecord> generate(const SimSpec& spec) {
    RngStream rng(spec.seed);
    return generate(spec, rng);
}

}  // namespace ivbma
