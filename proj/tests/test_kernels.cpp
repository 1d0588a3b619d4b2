#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shapekrrc/kernels.hpp"
#include "support.hpp"

using namespace shapekrrc;
using testsupport::geodesic_four_points;
using testsupport::GeodesicCircle;
using testsupport::random_shapes;

TEST_CASE("kernel spec validation") {
    CHECK_THROWS_AS(KernelSpec(KernelFamily::VWG, 0.0), InvalidInput);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::FPG, -1.0), InvalidInput);
    CHECK(kernel_family_from_name("vwg") == KernelFamily::VWG);
    CHECK(kernel_family_from_name("euclidean") == KernelFamily::EuclideanGaussian);
    CHECK_THROWS_AS(kernel_family_from_name("poly"), InvalidInput);
    CHECK(kernel_family_name(KernelFamily::IntrinsicGaussian) == "rie");
}

TEST_CASE("kernel values at the endpoints") {
    Rng rng(21);
    const Preshape a = random_preshape(5, rng);
    for (const KernelFamily family :
         {KernelFamily::VWG, KernelFamily::FPG, KernelFamily::IntrinsicGaussian,
          KernelFamily::EuclideanGaussian}) {
        CHECK(kernel_eval(KernelSpec(family, 0.7), a, a) == doctest::Approx(1.0).epsilon(1e-14));
    }

    // Orthogonal pair: rho_E^2 = 2, so VWG with sigma^2 = 2 gives exp(-1).
    const GeodesicCircle circle(4);
    const Preshape p(circle.e1), q(circle.e2);
    CHECK(kernel_eval(KernelSpec(KernelFamily::VWG, 2.0), p, q) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("VWG at sigma^2 equals FPG at sigma^2 / 2 exactly") {
    Rng rng(22);
    for (int trial = 0; trial < 1000; ++trial) {
        const Preshape x = random_preshape(4, rng);
        const Preshape y = random_preshape(4, rng);
        const double sigma_sq = std::exp(uniform(rng, -3.0, 3.0));
        const double vwg = kernel_eval(KernelSpec(KernelFamily::VWG, sigma_sq), x, y);
        const double fpg = kernel_eval(KernelSpec(KernelFamily::FPG, sigma_sq / 2.0), x, y);
        CHECK(vwg == fpg);
    }
}

TEST_CASE("kernel values increase with bandwidth and stay in (0, 1]") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const Preshape x = random_preshape(5, rng);
        const Preshape y = random_preshape(5, rng);
        for (const KernelFamily family :
             {KernelFamily::VWG, KernelFamily::FPG, KernelFamily::IntrinsicGaussian,
              KernelFamily::EuclideanGaussian}) {
            const double lo = kernel_eval(KernelSpec(family, 0.5), x, y);
            const double hi = kernel_eval(KernelSpec(family, 5.0), x, y);
            CHECK(lo > 0.0);
            CHECK(hi <= 1.0);
            CHECK(lo < hi);  // x != y almost surely
        }
    }
}

TEST_CASE("gram matrix construction") {
    Rng rng(24);

    SUBCASE("single shape") {
        const GramMatrix g =
            gram(KernelSpec(KernelFamily::VWG, 1.0), random_shapes(4, 1, rng));
        REQUIRE(g.values.rows() == 1);
        CHECK(g.values(0, 0) == doctest::Approx(1.0));
    }

    SUBCASE("two orthogonal shapes, VWG, sigma^2 = 2") {
        const GeodesicCircle circle(5);
        const GramMatrix g = gram(KernelSpec(KernelFamily::VWG, 2.0),
                                  {Preshape(circle.e1), Preshape(circle.e2)});
        CHECK(g.values(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
        CHECK(g.values(1, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
        CHECK(g.values(0, 0) == doctest::Approx(1.0));
        CHECK(g.values(1, 1) == doctest::Approx(1.0));
    }

    SUBCASE("matches the elementwise double loop") {
        const auto shapes = random_shapes(5, 10, rng);
        const KernelSpec spec(KernelFamily::FPG, 0.8);
        const GramMatrix g = gram(spec, shapes);
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                CHECK(g.values(i, j) ==
                      doctest::Approx(kernel_eval(spec, shapes[i], shapes[j])).epsilon(1e-15));
            }
        }
        CHECK((g.values - g.values.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("empty input") {
        CHECK_THROWS_AS(gram(KernelSpec(KernelFamily::VWG, 1.0), {}), EmptyInput);
    }
}

TEST_CASE("min eigenvalue diagnostics") {
    Rng rng(25);

    SUBCASE("near-identity gram") {
        // Well-spread shapes at tiny bandwidth: off-diagonals collapse.
        const auto shapes = random_shapes(8, 6, rng);
        const GramMatrix g = gram(KernelSpec(KernelFamily::VWG, 0.01), shapes);
        CHECK(min_eigenvalue(g) > 0.9);
    }

    SUBCASE("VWG grams are positive semidefinite") {
        for (int trial = 0; trial < 20; ++trial) {
            const auto shapes = random_shapes(4, 50, rng);
            const double sigma_sq = std::exp(uniform(rng, -2.0, 2.0));
            CHECK(min_eigenvalue(gram(KernelSpec(KernelFamily::VWG, sigma_sq), shapes)) >=
                  kPsdTolerance);
        }
    }

    SUBCASE("intrinsic-distance gram has a genuinely negative eigenvalue") {
        // Four points on a closed geodesic, large bandwidth. The Rayleigh
        // quotient of alpha = (1,-1,1,-1)/2 is 1 - 2 e^{-pi^2/(16 s)} +
        // e^{-pi^2/(4 s)} which is about -0.012 at s = 100.
        const GramMatrix g =
            gram(KernelSpec(KernelFamily::IntrinsicGaussian, 100.0), geodesic_four_points(4));
        const double min_eig = min_eigenvalue(g);
        CHECK(min_eig < -1e-6);
        CHECK(min_eig < -1e-3);
    }
}

TEST_CASE("PSD property sweep for the embedded-distance kernels") {
    Rng rng(26);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 49));
        const int k = 3 + static_cast<int>(uniform_index(rng, 5));
        const auto shapes = random_shapes(k, n, rng);
        const double sigma_sq = std::pow(10.0, uniform(rng, -2.0, 2.0));
        for (const KernelFamily family :
             {KernelFamily::VWG, KernelFamily::FPG, KernelFamily::EuclideanGaussian}) {
            CHECK(min_eigenvalue(gram(KernelSpec(family, sigma_sq), shapes)) >= kPsdTolerance);
        }
    }
}

TEST_CASE("negative-type check for the extrinsic squared distance") {
    Rng rng(27);

    SUBCASE("identical shapes give the zero form") {
        const Preshape u = random_preshape(4, rng);
        CHECK(check_negative_type(extrinsic_dist_sq, {u, u}, 50, rng) == doctest::Approx(0.0));
    }

    SUBCASE("fewer than two shapes is an error") {
        const auto one = random_shapes(4, 1, rng);
        CHECK_THROWS_AS(check_negative_type(extrinsic_dist_sq, one, 10, rng), InvalidInput);
    }

    SUBCASE("rho_E^2 stays nonpositive over random draws") {
        for (int set = 0; set < 10; ++set) {
            const auto shapes = random_shapes(5, 20, rng);
            CHECK(check_negative_type(extrinsic_dist_sq, shapes, 1000, rng) <= 1e-8);
        }
    }

    SUBCASE("quadratic form equals -2 || sum_i alpha_i J(u_i) ||_F^2") {
        // Independent identity for the zero-sum quadratic form.
        const auto shapes = random_shapes(4, 12, rng);
        for (int trial = 0; trial < 200; ++trial) {
            Eigen::VectorXd alpha(12);
            for (int i = 0; i < 12; ++i) alpha[i] = gaussian(rng);
            alpha.array() -= alpha.mean();

            double form = 0.0;
            ComplexMatrix weighted = ComplexMatrix::Zero(4, 4);
            for (int i = 0; i < 12; ++i) {
                weighted += alpha[i] * vw_embed(shapes[i]).matrix;
                for (int j = 0; j < 12; ++j) {
                    form += alpha[i] * alpha[j] * extrinsic_dist_sq(shapes[i], shapes[j]);
                }
            }
            CHECK(std::abs(form - (-2.0 * weighted.squaredNorm())) < 1e-10);
        }
    }

    SUBCASE("squared geodesic distance violates negative type on a closed geodesic") {
        const auto points = geodesic_four_points(5);
        const auto rho_sq = [](const Preshape& a, const Preshape& b) {
            const double d = riemannian_dist(a, b);
            return d * d;
        };

        // Deterministic witness: alpha = (1,-1,1,-1)/2 gives pi^2 / 8.
        const double alpha[4] = {0.5, -0.5, 0.5, -0.5};
        double form = 0.0;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                form += alpha[i] * alpha[j] * rho_sq(points[i], points[j]);
            }
        }
        const double expected = std::numbers::pi * std::numbers::pi / 8.0;
        CHECK(form == doctest::Approx(expected).epsilon(1e-12));

        // The randomized search finds a positive value on the same points.
        CHECK(check_negative_type(rho_sq, points, 1000, rng) > 1e-3);
    }
}

TEST_CASE("randomized search for PSD violations") {
    Rng rng(28);

    SUBCASE("subset sizes 0 and 1 cannot produce a witness") {
        const auto pool = random_shapes(4, 10, rng);
        CHECK(!find_psd_violation(KernelFamily::VWG, pool, {1.0}, 1, 100, rng));
        CHECK(!find_psd_violation(KernelFamily::VWG, pool, {1.0}, 0, 100, rng));
    }

    SUBCASE("VWG never produces a witness") {
        const auto pool = random_shapes(4, 30, rng);
        const std::vector<double> grid = {0.01, 0.1, 1.0, 10.0, 100.0};
        CHECK(!find_psd_violation(KernelFamily::VWG, pool, grid, 8, 10000, rng));
    }

    SUBCASE("intrinsic kernel on a geodesic-circle pool yields a witness") {
        GeodesicCircle circle(5);
        std::vector<Preshape> pool;
        for (int i = 0; i < 24; ++i) {
            pool.push_back(circle.at(uniform(rng, 0.0, std::numbers::pi)));
        }
        const std::vector<double> grid = {1.0, 10.0, 100.0};
        const auto witness =
            find_psd_violation(KernelFamily::IntrinsicGaussian, pool, grid, 8, 2000, rng);
        REQUIRE(witness.has_value());
        CHECK(witness->min_eig < -1e-6);
        CHECK(witness->subset.size() == 8);

        // The witness is reproducible: rebuilding the Gram from the reported
        // subset and bandwidth shows the same eigenvalue.
        std::vector<Preshape> subset;
        for (const std::size_t idx : witness->subset) subset.push_back(pool[idx]);
        const double rebuilt = min_eigenvalue(
            gram(KernelSpec(KernelFamily::IntrinsicGaussian, witness->sigma_sq), subset));
        CHECK(rebuilt == doctest::Approx(witness->min_eig).epsilon(1e-10));
    }

    SUBCASE("pool smaller than the subset is rejected") {
        const auto pool = random_shapes(4, 5, rng);
        CHECK_THROWS_AS(find_psd_violation(KernelFamily::VWG, pool, {1.0}, 5, 10, rng),
                        InvalidInput);
    }
}
