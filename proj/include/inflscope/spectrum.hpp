#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>

#include <Eigen/Dense>

#include "inflscope/distance.hpp"

namespace inflscope {

/// Eigenpairs of a real symmetric matrix, ordered by |lambda| ascending.
/// Column k of `eigenvectors` pairs with eigenvalues[k]; each column's
/// largest-magnitude component is positive.
struct EigenSpectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    std::size_t sweeps = 0;
};

/// Cyclic Jacobi rotations until the largest off-diagonal entry drops below
/// 1e-12 times the Frobenius norm. Throws DataError when the input deviates
/// from symmetry by more than 1e-9 and NumericalError if 100 sweeps do not
/// converge.
EigenSpectrum eigen_decompose(const Eigen::MatrixXd& symmetric);
EigenSpectrum eigen_decompose(const DistanceMatrix& dist);

struct SimilarityCount {
    double threshold = 0.0;
    std::size_t k = 0;                              // #{ |lambda| < threshold }, capped at n-1
    std::optional<std::size_t> similar_entities;  // k+1, or empty for "no similarity group"
};

SimilarityCount similarity_count(const EigenSpectrum& spectrum, double threshold);

/// Largest |lambda| by power iteration on D^2 (so +/- pairs of equal
/// magnitude do not oscillate). Independent of eigen_decompose.
double operator_norm(const Eigen::MatrixXd& symmetric);
double operator_norm(const DistanceMatrix& dist);

/// Rows (index, eigenvalue, abs_eigenvalue); index is 1-based.
void write_spectrum_csv(const EigenSpectrum& spectrum, std::ostream& out);
void write_eigenvectors_csv(const EigenSpectrum& spectrum, std::ostream& out);

}  // namespace inflscope
