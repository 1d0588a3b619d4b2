#include "shapekrrc/shape.hpp"

#include <algorithm>
#include <cmath>

namespace shapekrrc {

namespace {

constexpr double kDegenerateSize = 1e-12;

bool all_finite(const ComplexVector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
    }
    return true;
}

// Bitwise-identical coordinates: the distances below return exactly zero on
// them instead of the ~1e-15 the rounded inner product would give.
bool same_coords(const Preshape& a, const Preshape& b) {
    if (&a == &b) return true;
    if (a.coords().size() != b.coords().size()) return false;
    for (Eigen::Index i = 0; i < a.coords().size(); ++i) {
        if (a.coords()[i] != b.coords()[i]) return false;
    }
    return true;
}

// |<a,b>| clamped into [0,1]; roundoff can push it slightly above 1 for
// near-identical shapes, which would NaN the arccos.
double abs_inner_clamped(const Preshape& a, const Preshape& b) {
    const double c = std::abs(hermitian_inner(a.coords(), b.coords()));
    return std::clamp(c, 0.0, 1.0);
}

}  // namespace

Preshape::Preshape(ComplexVector coords) : coords_(std::move(coords)) {
    if (coords_.size() < 3) {
        throw InvalidInput("preshape needs at least 3 landmarks, got " +
                           std::to_string(coords_.size()));
    }
    if (!all_finite(coords_)) {
        throw InvalidInput("preshape coordinates must be finite");
    }
    if (std::abs(coords_.sum()) > 1e-10) {
        throw InvalidInput("preshape is not centered: |sum| = " +
                           std::to_string(std::abs(coords_.sum())));
    }
    if (std::abs(coords_.norm() - 1.0) > 1e-12) {
        throw InvalidInput("preshape is not unit-norm: ||u|| = " +
                           std::to_string(coords_.norm()));
    }
}

Preshape to_preshape(const LandmarkConfig& config) {
    const Eigen::Index k = config.points.size();
    if (k < 3) {
        throw InvalidInput("a planar shape needs at least 3 landmarks, got " +
                           std::to_string(k));
    }
    if (!all_finite(config.points)) {
        throw InvalidInput("landmark coordinates must be finite" +
                           (config.id.empty() ? std::string() : " (record " + config.id + ")"));
    }

    ComplexVector centered = config.points;
    centered.array() -= config.points.mean();
    // Second centering pass kills the roundoff residual of the first, which
    // the normalization below would otherwise amplify for small-size shapes.
    centered.array() -= centered.mean();

    const double size = centered.norm();
    if (size <= kDegenerateSize) {
        throw DegenerateConfiguration("all landmarks coincide (size " + std::to_string(size) +
                                      ")" +
                                      (config.id.empty() ? std::string() : " in record " + config.id));
    }
    return Preshape(centered / size);
}

EmbeddedShape vw_embed(const Preshape& u) {
    const ComplexVector& c = u.coords();
    return EmbeddedShape{c * c.adjoint()};
}

double riemannian_dist(const Preshape& a, const Preshape& b) {
    if (same_coords(a, b)) return 0.0;
    return std::acos(abs_inner_clamped(a, b));
}

double full_procrustes_dist(const Preshape& a, const Preshape& b) {
    if (same_coords(a, b)) return 0.0;
    const double c = abs_inner_clamped(a, b);
    return std::sqrt(std::max(0.0, 1.0 - c * c));
}

double partial_procrustes_dist_sq(const Preshape& a, const Preshape& b) {
    if (same_coords(a, b)) return 0.0;
    return 1.0 - abs_inner_clamped(a, b);
}

double extrinsic_dist_sq(const Preshape& a, const Preshape& b) {
    if (same_coords(a, b)) return 0.0;
    const double c = abs_inner_clamped(a, b);
    return 2.0 * (1.0 - c * c);
}

double check_equivariance(const Preshape& u, const ComplexMatrix& a) {
    const Eigen::Index k = u.coords().size();
    if (a.rows() != k || a.cols() != k) {
        throw InvalidInput("equivariance matrix must be k x k");
    }
    const double unitary_dev =
        (a * a.adjoint() - ComplexMatrix::Identity(k, k)).cwiseAbs().maxCoeff();
    if (unitary_dev > 1e-10) {
        throw InvalidInput("matrix is not unitary within 1e-10 (deviation " +
                           std::to_string(unitary_dev) + ")");
    }
    const Complex det = a.determinant();
    if (std::abs(det - Complex(1.0, 0.0)) > 1e-10) {
        throw InvalidInput("matrix determinant is not 1 within 1e-10");
    }

    const ComplexVector rotated = a * u.coords();
    const ComplexMatrix lhs = rotated * rotated.adjoint();
    const ComplexMatrix rhs = a * vw_embed(u).matrix * a.adjoint();
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

Preshape random_preshape(int k, Rng& rng) {
    ComplexVector z(k);
    for (int i = 0; i < k; ++i) z[i] = Complex(gaussian(rng), gaussian(rng));
    return to_preshape(LandmarkConfig{std::move(z), std::nullopt, {}});
}

ComplexMatrix random_special_unitary(int k, Rng& rng) {
    ComplexMatrix g(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) g(i, j) = Complex(gaussian(rng), gaussian(rng));

    const Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fold the phases of R's diagonal into Q so the distribution does not
    // depend on the QR sign conventions.
    for (int j = 0; j < k; ++j) {
        const Complex d = r(j, j);
        q.col(j) *= (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0, 0.0);
    }
    q.col(0) /= q.determinant();
    return q;
}

}  // namespace shapekrrc
