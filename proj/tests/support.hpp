#pragma once

// Shared helpers for the test suites.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <unistd.h>
#include <vector>

#include "shapekrrc/data_io.hpp"
#include "shapekrrc/shape.hpp"

namespace testsupport {

using namespace shapekrrc;

// Orthonormal centered pair (e1, e2) spanning a closed geodesic in shape
// space; points are u(t) = cos(t) e1 + sin(t) e2. The induced Riemannian
// distance between parameters is the circle distance on a circle of
// circumference pi: d(u(s), u(t)) = arccos|cos(s - t)|.
struct GeodesicCircle {
    explicit GeodesicCircle(int k) {
        ComplexVector a(k), b(k);
        a.setZero();
        b.setZero();
        // Two real centered orthonormal vectors.
        a[0] = 1.0 / std::sqrt(2.0);
        a[1] = -1.0 / std::sqrt(2.0);
        const double s = 1.0 / std::sqrt(6.0);
        b[0] = s;
        b[1] = s;
        b[2] = -2.0 * s;
        e1 = a;
        e2 = b;
    }

    Preshape at(double t) const {
        ComplexVector u = std::cos(t) * e1 + std::sin(t) * e2;
        return Preshape(u);
    }

    ComplexVector e1, e2;
};

// The classic 4-point negative-type violation for squared geodesic distance:
// parameters {0, pi/4, pi/2, 3pi/4}.
inline std::vector<Preshape> geodesic_four_points(int k) {
    const GeodesicCircle circle(k);
    const double pi = std::numbers::pi;
    return {circle.at(0.0), circle.at(pi / 4), circle.at(pi / 2), circle.at(3 * pi / 4)};
}

inline std::vector<Preshape> random_shapes(int k, int n, Rng& rng) {
    std::vector<Preshape> shapes;
    shapes.reserve(n);
    for (int i = 0; i < n; ++i) shapes.push_back(random_preshape(k, rng));
    return shapes;
}

// Unique scratch directory under the system temp dir; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        const auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(i));
            if (std::filesystem::create_directory(path_)) break;
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
