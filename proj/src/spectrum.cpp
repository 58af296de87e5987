#include "inflscope/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "inflscope/error.hpp"
#include "inflscope/format.hpp"

namespace inflscope {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kRelativeOffTolerance = 1e-12;

double max_off_diagonal(const Eigen::MatrixXd& a) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

// Rotation in the (p, q) plane annihilating a(p, q). Rutishauser's form.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const double tau = s / (1.0 + c);
    const Eigen::Index n = a.rows();

    a(p, p) -= t * apq;
    a(q, q) += t * apq;
    a(p, q) = a(q, p) = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        const double arp = a(r, p);
        const double arq = a(r, q);
        a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
        a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = vrp - s * (vrq + tau * vrp);
        v(r, q) = vrq + s * (vrp - tau * vrq);
    }
}

}  // namespace

EigenSpectrum eigen_decompose(const Eigen::MatrixXd& symmetric) {
    const Eigen::Index n = symmetric.rows();
    if (symmetric.cols() != n) throw DataError("eigen_decompose needs a square matrix");
    if (!symmetric.allFinite()) throw DataError("eigen_decompose: non-finite entries");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::abs(symmetric(i, j) - symmetric(j, i)) > 1e-9)
                throw DataError("eigen_decompose: matrix is not symmetric");

    Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double frob = a.norm();
    const double tol = kRelativeOffTolerance * frob;

    std::size_t sweeps = 0;
    while (max_off_diagonal(a) > tol) {
        if (sweeps == kMaxSweeps)
            throw NumericalError("Jacobi eigensolver did not converge in " +
                                 std::to_string(kMaxSweeps) + " sweeps");
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
        ++sweeps;
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        const double ax = std::abs(a(x, x)), ay = std::abs(a(y, y));
        if (ax != ay) return ax < ay;
        return a(x, x) < a(y, y);
    });

    EigenSpectrum out;
    out.sweeps = sweeps;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.eigenvalues(k) = a(src, src);
        Eigen::VectorXd col = v.col(src);
        Eigen::Index arg = 0;
        for (Eigen::Index r = 1; r < n; ++r)
            if (std::abs(col(r)) > std::abs(col(arg))) arg = r;
        if (n > 0 && col(arg) < 0.0) col = -col;
        out.eigenvectors.col(k) = col;
    }
    return out;
}

EigenSpectrum eigen_decompose(const DistanceMatrix& dist) { return eigen_decompose(dist.matrix()); }

SimilarityCount similarity_count(const EigenSpectrum& spectrum, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
    const auto n = static_cast<std::size_t>(spectrum.eigenvalues.size());
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i)
        if (std::abs(spectrum.eigenvalues(i)) < threshold) ++k;
    if (n > 0) k = std::min(k, n - 1);
    SimilarityCount out;
    out.threshold = threshold;
    out.k = k;
    if (k >= 1) out.similar_entities = k + 1;
    return out;
}

double operator_norm(const Eigen::MatrixXd& symmetric) {
    constexpr int kMaxIterations = 10000;
    constexpr double kRelativeChange = 1e-12;
    const Eigen::Index n = symmetric.rows();
    if (n == 0) return 0.0;

    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 1e-3 * static_cast<double>(i + 1);
    x.normalize();

    // Rayleigh quotient of D^2 is ||D x||^2; its square root tracks max |lambda|.
    double estimate = 0.0;
    for (int it = 0; it < kMaxIterations; ++it) {
        const Eigen::VectorXd y = symmetric * x;
        const double next = y.norm();
        if (next == 0.0) return 0.0;
        const Eigen::VectorXd z = symmetric * y;
        const double zn = z.norm();
        if (zn == 0.0) return next;
        x = z / zn;
        if (it > 0 && std::abs(next - estimate) <= kRelativeChange * next) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    return (symmetric * x).norm();
}

double operator_norm(const DistanceMatrix& dist) { return operator_norm(dist.matrix()); }

void write_spectrum_csv(const EigenSpectrum& spectrum, std::ostream& out) {
    out << "index,eigenvalue,abs_eigenvalue\n";
    for (Eigen::Index k = 0; k < spectrum.eigenvalues.size(); ++k) {
        const double v = spectrum.eigenvalues(k);
        out << (k + 1) << ',' << format_number(v) << ',' << format_number(std::abs(v)) << '\n';
    }
}

void write_eigenvectors_csv(const EigenSpectrum& spectrum, std::ostream& out) {
    const Eigen::Index n = spectrum.eigenvectors.rows();
    out << "row";
    for (Eigen::Index k = 0; k < spectrum.eigenvectors.cols(); ++k) out << ",v" << (k + 1);
    out << '\n';
    for (Eigen::Index r = 0; r < n; ++r) {
        out << (r + 1);
        for (Eigen::Index k = 0; k < spectrum.eigenvectors.cols(); ++k)
            out << ',' << format_number(spectrum.eigenvectors(r, k));
        out << '\n';
    }
}

}  // namespace inflscope
