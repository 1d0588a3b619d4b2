#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "shapekrrc/errors.hpp"
#include "shapekrrc/random.hpp"

namespace shapekrrc {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

// A raw k-point planar configuration, landmarks as complex coordinates.
struct LandmarkConfig {
    ComplexVector points;       // k >= 3 landmark coordinates, arbitrary units
    std::optional<int> label;   // category identifier
    std::string id;             // record identifier, may be empty

    int landmark_count() const { return static_cast<int>(points.size()); }
};

// Centered, unit-norm complex k-vector: the canonical shape representative.
//
// The rotation orbit { e^{i theta} u } is never materialized; every quantity
// computed downstream (|<u,v>|, u u*) is invariant under the phase, so an
// arbitrary representative is stored.
class Preshape {
public:
    // Validates the invariants: |sum of entries| <= 1e-10 and ||u|| = 1
    // within 1e-12. Throws InvalidInput otherwise.
    explicit Preshape(ComplexVector coords);

    const ComplexVector& coords() const { return coords_; }
    int landmark_count() const { return static_cast<int>(coords_.size()); }

private:
    ComplexVector coords_;
};

// k x k Hermitian rank-one matrix u u*, the embedded image of a shape.
struct EmbeddedShape {
    ComplexMatrix matrix;
};

// Shapes paired with integer category labels (and optional record ids).
struct LabeledPreshapes {
    std::vector<Preshape> shapes;
    std::vector<int> labels;
    std::vector<std::string> ids;  // empty or parallel to shapes

    std::size_t size() const { return shapes.size(); }
};

// Fixed inner-product convention used throughout: <a,b> = sum conj(a_j) b_j
// (conjugate-linear in the first argument).
inline Complex hermitian_inner(const ComplexVector& a, const ComplexVector& b) {
    return a.dot(b);
}

// Centers and scales a configuration to its preshape u = (z - <z>) / ||z - <z>||.
// Throws DegenerateConfiguration when all landmarks coincide (size <= 1e-12
// after centering) and InvalidInput on non-finite coordinates or k < 3.
Preshape to_preshape(const LandmarkConfig& config);

// The embedding [z] |-> u u*. Invariant under u -> e^{i theta} u.
EmbeddedShape vw_embed(const Preshape& u);

// Geodesic arc length arccos(|<a,b>|), clamped into [0, pi/2].
double riemannian_dist(const Preshape& a, const Preshape& b);

// (1 - |<a,b>|^2)^{1/2}, range [0, 1].
double full_procrustes_dist(const Preshape& a, const Preshape& b);

// 1 - |<a,b>|, range [0, 1]. This is the *squared* partial Procrustes distance.
double partial_procrustes_dist_sq(const Preshape& a, const Preshape& b);

// Squared Frobenius distance between the embedded images,
// ||u u* - v v*||_F^2 = 2 (1 - |<a,b>|^2).
double extrinsic_dist_sq(const Preshape& a, const Preshape& b);

// Max elementwise deviation |J(Au) - A J(u) A*| for a special-unitary A.
// Throws InvalidInput if A is not special unitary within 1e-10.
double check_equivariance(const Preshape& u, const ComplexMatrix& a);

// Uniform-ish random preshape: complex Gaussian configuration, centered and
// normalized. Used by diagnostics, tests, and benchmarks.
Preshape random_preshape(int k, Rng& rng);

// Haar-adjacent random SU(k): QR of a complex Gaussian matrix, R's diagonal
// phases folded into Q, one column divided by det(Q).
ComplexMatrix random_special_unitary(int k, Rng& rng);

}  // namespace shapekrrc
