#pragma once

// The observed problem: outcome Y, endogenous regressor X, exogenous
// covariates W, candidate instruments Z. Immutable during a run and shared
// read-only across chains.

#include <stdexcept>

#include <armadillo>

namespace ivbma {

struct Dataset {
    arma::vec Y;
    arma::vec X;
    arma::mat W;  // n x p
    arma::mat Z;  // n x q

    arma::uword n() const { return Y.n_elem; }
    arma::uword p() const { return W.n_cols; }
    arma::uword q() const { return Z.n_cols; }

    void validate() const {
        const arma::uword rows = Y.n_elem;
        if (rows == 0) throw std::invalid_argument("dataset: no observations");
        if (X.n_elem != rows || W.n_rows != rows || Z.n_rows != rows)
            throw std::invalid_argument("dataset: row counts differ");
        if (Z.n_cols == 0)
            throw std::invalid_argument("dataset: at least one instrument required");
        if (!Y.is_finite() || !X.is_finite() || !W.is_finite() || !Z.is_finite())
            throw std::invalid_argument("dataset: non-finite entries");
    }
};

}  // namespace ivbma
