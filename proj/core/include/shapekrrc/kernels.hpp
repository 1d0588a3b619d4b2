#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shapekrrc/shape.hpp"

namespace shapekrrc {

enum class KernelFamily {
    VWG,                // exp(-rho_E^2 / sigma^2), embedding-induced distance
    FPG,                // exp(-d_FP^2 / sigma^2), full Procrustes
    IntrinsicGaussian,  // exp(-rho_R^2 / sigma^2), geodesic; not positive definite
    EuclideanGaussian,  // exp(-||a-b||^2 / sigma^2) on the raw complex vectors
};

std::string kernel_family_name(KernelFamily family);
KernelFamily kernel_family_from_name(const std::string& name);  // InvalidInput on unknown

// Kernel family plus squared bandwidth. All four families divide a squared
// distance by sigma^2, so the parameter is stored squared to remove any
// square/no-square ambiguity at the API boundary.
struct KernelSpec {
    KernelSpec(KernelFamily family, double bandwidth_sq);

    KernelFamily family;
    double bandwidth_sq;
};

// Symmetric matrix of pairwise kernel values, unit diagonal, entries in (0,1].
// Real storage: every family is a real function of a real distance.
struct GramMatrix {
    Eigen::MatrixXd values;
    KernelSpec spec;
};

// exp(-d^2(a,b) / sigma^2) with d^2 selected by the family.
double kernel_eval(const KernelSpec& spec, const Preshape& a, const Preshape& b);

// Pairwise kernel matrix over a nonempty shape sequence. Throws EmptyInput.
GramMatrix gram(const KernelSpec& spec, const std::vector<Preshape>& shapes);

// Smallest eigenvalue by dense symmetric eigen-solve; >= -1e-8 counts as PSD.
double min_eigenvalue(const GramMatrix& g);

inline constexpr double kPsdTolerance = -1e-8;

using DistSqFn = std::function<double(const Preshape&, const Preshape&)>;

// Draws `trials` random coefficient vectors, recenters each to zero sum and
// unit norm, and evaluates sum_{i,j} alpha_i alpha_j dist_sq(s_i, s_j).
// Returns the maximum over trials: <= ~0 certifies negative type empirically,
// a positive value is a concrete violation witness. Needs >= 2 shapes.
double check_negative_type(const DistSqFn& dist_sq, const std::vector<Preshape>& shapes,
                           int trials, Rng& rng);

// A Gram matrix caught with a substantially negative eigenvalue.
struct PsdViolation {
    std::vector<std::size_t> subset;  // indices into the shape pool
    double sigma_sq;
    double min_eig;
};

// Randomized search for a non-PSD Gram: samples subsets of the pool and
// bandwidths from the grid until a Gram has min eigenvalue < -1e-6.
// Absence of a witness after `attempts` tries is a valid outcome (nullopt).
std::optional<PsdViolation> find_psd_violation(KernelFamily family,
                                               const std::vector<Preshape>& shape_pool,
                                               const std::vector<double>& sigma_sq_grid,
                                               std::size_t subset_size, int attempts, Rng& rng);

}  // namespace shapekrrc
