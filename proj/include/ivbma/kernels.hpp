#pragma once

// Dense symmetric-matrix kernels and the two random samplers (multivariate
// normal, inverse Wishart) behind every conditional update. The Cholesky
// routine is written out instead of calling arma::chol so that a failed
// factorization reports which pivot went non-positive; the samplers are
// written out so the draw order is pinned down for reproducibility.

#include <cmath>
#include <stdexcept>
#include <string>

#include <armadillo>

#include "ivbma/rng.hpp"

namespace ivbma {

// Failed Cholesky factorization; pivot() is the 0-based index of the first
// non-positive diagonal pivot.
class CholeskyError : public std::runtime_error {
public:
    explicit CholeskyError(arma::uword pivot)
        : std::runtime_error("cholesky: non-positive pivot at index " +
                             std::to_string(pivot)),
          pivot_(pivot) {}
    arma::uword pivot() const noexcept { return pivot_; }

private:
    arma::uword pivot_;
};

// Lower-triangular factor of a symmetric positive definite matrix,
// a a' = input, with strictly positive diagonal.
inline arma::mat cholesky(const arma::mat& a) {
    const arma::uword d = a.n_rows;
    if (a.n_cols != d) throw std::invalid_argument("cholesky: matrix not square");
    arma::mat l(d, d, arma::fill::zeros);
    for (arma::uword j = 0; j < d; ++j) {
        double diag = a(j, j);
        for (arma::uword k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0) || !std::isfinite(diag)) throw CholeskyError(j);
        l(j, j) = std::sqrt(diag);
        for (arma::uword i = j + 1; i < d; ++i) {
            double s = a(i, j);
            for (arma::uword k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

// log|A| for symmetric positive definite A, via the Cholesky diagonal.
inline double log_det_psd(const arma::mat& a) {
    const arma::mat l = cholesky(a);
    double s = 0.0;
    for (arma::uword i = 0; i < l.n_rows; ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

// Solve A x = b given the lower Cholesky factor of A.
inline arma::vec chol_solve(const arma::mat& l, const arma::vec& b) {
    return arma::solve(arma::trimatu(l.t()),
                       arma::solve(arma::trimatl(l), b));
}

// Inverse of a symmetric positive definite matrix. 2x2 inputs (the error
// covariance) go through the closed form; anything larger goes through the
// Cholesky factor.
inline arma::mat spd_inverse(const arma::mat& a) {
    const arma::uword d = a.n_rows;
    if (a.n_cols != d || d == 0)
        throw std::invalid_argument("spd_inverse: matrix not square");
    if (d == 2) {
        if (!(a(0, 0) > 0.0)) throw CholeskyError(0);
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        if (!(det > 0.0)) throw CholeskyError(1);
        arma::mat r(2, 2);
        r(0, 0) = a(1, 1) / det;
        r(1, 1) = a(0, 0) / det;
        r(0, 1) = r(1, 0) = -a(0, 1) / det;
        return r;
    }
    const arma::mat l = cholesky(a);
    const arma::mat linv = arma::inv(arma::trimatl(l));
    arma::mat r = linv.t() * linv;
    return 0.5 * (r + r.t());
}

// One draw from N(mean, precision^{-1}). A zero-dimensional mean yields an
// empty draw. Standard normals are consumed in index order.
inline arma::vec mvn_sample(const arma::vec& mean, const arma::mat& precision,
                            RngStream& rng) {
    const arma::uword d = mean.n_elem;
    if (precision.n_rows != d || precision.n_cols != d)
        throw std::invalid_argument("mvn_sample: dimension mismatch");
    if (d == 0) return arma::vec();
    const arma::mat l = cholesky(precision);
    arma::vec z(d);
    for (arma::uword i = 0; i < d; ++i) z(i) = rng.normal();
    // precision = l l', so solving l' x = z gives cov(x) = precision^{-1}.
    return mean + arma::solve(arma::trimatu(l.t()), z);
}

// One draw from the inverse Wishart with the convention
// Sigma^{-1} ~ Wishart(scale^{-1}, df), so E[Sigma^{-1}] = df * scale^{-1}.
// Bartlett construction with a fixed draw order: for each column j, the
// chi-squared diagonal (df - j degrees of freedom) first, then the
// subdiagonal normals top to bottom.
inline arma::mat inv_wishart_sample(const arma::mat& scale, double df,
                                    RngStream& rng) {
    const arma::uword d = scale.n_rows;
    if (scale.n_cols != d || d == 0)
        throw std::invalid_argument("inv_wishart_sample: matrix not square");
    if (!(df > double(d) - 1.0))
        throw std::invalid_argument("inv_wishart_sample: df must exceed dim - 1");
    const arma::mat lv = cholesky(spd_inverse(scale));
    arma::mat a(d, d, arma::fill::zeros);
    for (arma::uword j = 0; j < d; ++j) {
        a(j, j) = std::sqrt(rng.chi_squared(df - double(j)));
        for (arma::uword i = j + 1; i < d; ++i) a(i, j) = rng.normal();
    }
    const arma::mat lp = lv * a;  // precision draw = lp lp'
    return spd_inverse(lp * lp.t());
}

}  // namespace ivbma
