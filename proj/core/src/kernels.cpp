#include "shapekrrc/kernels.hpp"

#include <cmath>
#include <limits>

namespace shapekrrc {

std::string kernel_family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::VWG: return "vwg";
        case KernelFamily::FPG: return "fpg";
        case KernelFamily::IntrinsicGaussian: return "rie";
        case KernelFamily::EuclideanGaussian: return "euclidean";
    }
    return "?";
}

KernelFamily kernel_family_from_name(const std::string& name) {
    if (name == "vwg") return KernelFamily::VWG;
    if (name == "fpg") return KernelFamily::FPG;
    if (name == "rie") return KernelFamily::IntrinsicGaussian;
    if (name == "euclidean") return KernelFamily::EuclideanGaussian;
    throw InvalidInput("unknown kernel family: " + name);
}

KernelSpec::KernelSpec(KernelFamily family, double bandwidth_sq)
    : family(family), bandwidth_sq(bandwidth_sq) {
    if (!(bandwidth_sq > 0.0) || !std::isfinite(bandwidth_sq)) {
        throw InvalidInput("kernel bandwidth_sq must be positive and finite");
    }
}

namespace {

double dist_sq_for(KernelFamily family, const Preshape& a, const Preshape& b) {
    switch (family) {
        case KernelFamily::VWG:
            return extrinsic_dist_sq(a, b);
        case KernelFamily::FPG:
            // d_FP^2 = rho_E^2 / 2; halving is exact, so the VWG/FPG bandwidth
            // correspondence holds bit for bit instead of to an ulp.
            return extrinsic_dist_sq(a, b) / 2.0;
        case KernelFamily::IntrinsicGaussian: {
            const double d = riemannian_dist(a, b);
            return d * d;
        }
        case KernelFamily::EuclideanGaussian:
            return (a.coords() - b.coords()).squaredNorm();
    }
    return 0.0;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Preshape& a, const Preshape& b) {
    return std::exp(-dist_sq_for(spec.family, a, b) / spec.bandwidth_sq);
}

GramMatrix gram(const KernelSpec& spec, const std::vector<Preshape>& shapes) {
    const std::size_t n = shapes.size();
    if (n == 0) throw EmptyInput("gram over an empty shape sequence");

    Eigen::MatrixXd values(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        values(i, i) = 1.0;  // d(x,x) = 0 for every family
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = kernel_eval(spec, shapes[i], shapes[j]);
            values(i, j) = k;
            values(j, i) = k;
        }
    }
    return GramMatrix{std::move(values), spec};
}

double min_eigenvalue(const GramMatrix& g) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.values,
                                                                Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double check_negative_type(const DistSqFn& dist_sq, const std::vector<Preshape>& shapes,
                           int trials, Rng& rng) {
    const std::size_t n = shapes.size();
    if (n < 2) throw InvalidInput("check_negative_type needs at least 2 shapes");
    if (trials < 1) throw InvalidInput("check_negative_type needs trials >= 1");

    Eigen::MatrixXd d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = dist_sq(shapes[i], shapes[j]);
            d(i, j) = v;
            d(j, i) = v;
        }
    }

    double worst = -std::numeric_limits<double>::infinity();
    bool any = false;
    Eigen::VectorXd alpha(n);
    for (int t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < n; ++i) alpha[i] = gaussian(rng);
        alpha.array() -= alpha.mean();
        const double norm = alpha.norm();
        if (norm < 1e-300) continue;  // degenerate draw contributes the zero form
        alpha /= norm;
        worst = std::max(worst, alpha.dot(d * alpha));
        any = true;
    }
    return any ? worst : 0.0;
}

std::optional<PsdViolation> find_psd_violation(KernelFamily family,
                                               const std::vector<Preshape>& shape_pool,
                                               const std::vector<double>& sigma_sq_grid,
                                               std::size_t subset_size, int attempts, Rng& rng) {
    if (shape_pool.size() <= subset_size) {
        throw InvalidInput("shape pool must be larger than the subset size");
    }
    if (sigma_sq_grid.empty()) throw InvalidInput("sigma_sq grid must be nonempty");
    if (subset_size == 0) return std::nullopt;

    for (int attempt = 0; attempt < attempts; ++attempt) {
        const auto subset = sample_without_replacement(shape_pool.size(), subset_size, rng);
        const double sigma_sq =
            sigma_sq_grid[uniform_index(rng, sigma_sq_grid.size())];

        std::vector<Preshape> shapes;
        shapes.reserve(subset.size());
        for (const std::size_t idx : subset) shapes.push_back(shape_pool[idx]);

        const GramMatrix g = gram(KernelSpec(family, sigma_sq), shapes);
        const double min_eig = min_eigenvalue(g);
        if (min_eig < -1e-6) {
            return PsdViolation{subset, sigma_sq, min_eig};
        }
    }
    return std::nullopt;
}

}  // namespace shapekrrc
