#include <catch2/catch.hpp>

#include <cmath>
#include <complex>

#include "fsolink/receiver.hpp"
#include "oracles.hpp"

using namespace fsolink;

namespace {

const ReceiverSpec kRx{0.355, 1.6}; // 35.5 cm aperture, 1600 mm focal length
constexpr double kLambda = 1550e-9;

// Uniform-amplitude pupil disc of the receiver's aperture diameter.
ComplexField uniform_disc(int n, double dx, double diameter) {
    ComplexField f(n, dx, kLambda);
    const double r2 = 0.25 * diameter * diameter;
    for (int iy = 0; iy < n; ++iy) {
        const double y = f.coord(iy);
        for (int ix = 0; ix < n; ++ix) {
            const double x = f.coord(ix);
            if (x * x + y * y <= r2) f.at(ix, iy) = 1.0;
        }
    }
    return f;
}

// Concentrated speckle: complex Gaussian noise under a Gaussian envelope, so
// the focal window containment guard is satisfied.
ComplexField concentrated_speckle(int n, double dx, double sigma, std::uint64_t seed) {
    ComplexField f = oracles::random_field(n, dx, kLambda, seed);
    for (int iy = 0; iy < n; ++iy) {
        const double y = f.coord(iy);
        for (int ix = 0; ix < n; ++ix) {
            const double x = f.coord(ix);
            f.at(ix, iy) *= std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        }
    }
    return f;
}

} // namespace

TEST_CASE("focal field of a uniform disc is an Airy pattern") {
    const int n = 2048;
    const double dx = 1e-3;
    const ComplexField focal = focal_field(uniform_disc(n, dx, kRx.aperture_diameter), kRx);

    const double dxf = kLambda * kRx.focal_length / (n * dx);
    CHECK(focal.dx() == Approx(dxf).epsilon(1e-12));

    // first null at 1.22 lambda f / D, within one focal-plane pixel
    const double null_expected = 1.22 * kLambda * kRx.focal_length / kRx.aperture_diameter;
    CHECK(null_expected == Approx(8.524e-6).epsilon(1e-3));
    const int c = n / 2;
    int min_px = 0;
    double min_val = std::norm(focal.at(c, c));
    for (int s = 1; s < 20; ++s) {
        const double v = std::norm(focal.at(c + s, c));
        if (v < min_val) {
            min_val = v;
            min_px = s;
        }
    }
    CHECK(std::abs(min_px * dxf - null_expected) <= dxf);
}

TEST_CASE("focal transform conserves the apertured power") {
    const ComplexField pupil = oracles::random_field(512, 1e-3, kLambda, 3);
    const double p_apertured = total_power(apply_circular_aperture(pupil, kRx.aperture_diameter));
    const ComplexField focal = focal_field(pupil, kRx);
    CHECK(total_power(focal) == Approx(p_apertured).epsilon(1e-9));
}

TEST_CASE("uniform tilt displaces the focal spot by f theta") {
    const int n = 2048;
    const double dx = 1e-3;
    ComplexField pupil = uniform_disc(n, dx, kRx.aperture_diameter);
    const double theta = 20e-6;
    const double k = 2.0 * constants::pi / kLambda;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double x = pupil.coord(ix);
            pupil.at(ix, iy) *= std::complex<double>(std::cos(k * theta * x),
                                                     std::sin(k * theta * x));
        }
    }
    const ComplexField focal = focal_field(std::move(pupil), kRx);

    double cx = 0.0, p = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double w = std::norm(focal.at(ix, iy));
            cx += w * focal.coord(ix);
            p += w;
        }
    }
    cx /= p;
    CHECK(std::abs(cx - kRx.focal_length * theta) <= focal.dx());
}

TEST_CASE("focal window guard rejects an undersized window") {
    const ComplexField pupil = uniform_disc(256, 2e-3, kRx.aperture_diameter);
    CHECK_THROWS_WITH(focal_field(pupil, kRx, 1.0), Catch::Contains("focal window"));
}

TEST_CASE("fiber coupling of the mode itself is unity") {
    const double mfd = 10e-6;
    const int n = 256;
    const double dxf = 0.5e-6;
    ComplexField focal(n, dxf, kLambda);
    const double wm = 0.5 * mfd;
    for (int iy = 0; iy < n; ++iy) {
        const double y = focal.coord(iy);
        for (int ix = 0; ix < n; ++ix) {
            const double x = focal.coord(ix);
            focal.at(ix, iy) = std::exp(-(x * x + y * y) / (wm * wm));
        }
    }
    CHECK(fiber_coupling_efficiency(focal, mfd) == Approx(1.0).epsilon(1e-9));

    // global phase leaves the overlap unchanged
    ComplexField rotated = focal;
    const std::complex<double> ph(std::cos(1.1), std::sin(1.1));
    for (auto& a : rotated.samples()) a *= ph;
    CHECK(fiber_coupling_efficiency(rotated, mfd) ==
          Approx(fiber_coupling_efficiency(focal, mfd)).epsilon(1e-12));
}

TEST_CASE("two-gaussian overlap matches the analytic coupling") {
    const double mfd = 10e-6;
    const double w_spot = 2.0 * (0.5 * mfd); // spot radius twice the mode radius
    const int n = 512;
    const double dxf = 0.4e-6;
    ComplexField focal(n, dxf, kLambda);
    for (int iy = 0; iy < n; ++iy) {
        const double y = focal.coord(iy);
        for (int ix = 0; ix < n; ++ix) {
            const double x = focal.coord(ix);
            focal.at(ix, iy) = std::exp(-(x * x + y * y) / (w_spot * w_spot));
        }
    }
    const double eta = fiber_coupling_efficiency(focal, mfd);
    CHECK(oracles::two_gaussian_coupling(w_spot, 0.5 * mfd) == Approx(0.64).epsilon(1e-12));
    CHECK(eta == Approx(0.64).epsilon(0.005));
}

TEST_CASE("under-resolved fiber mode is rejected") {
    const ComplexField focal(64, 4e-6, kLambda); // 2.5 px per 10 um MFD
    CHECK_THROWS_WITH(fiber_coupling_efficiency(focal, 10e-6), Catch::Contains("under-resolved"));
}

TEST_CASE("detector covering the window captures everything exactly") {
    const ComplexField focal = concentrated_speckle(256, 1e-6, 20e-6, 5);
    CHECK(detector_capture_fraction(focal, CouplingTarget::square_detector(1e-3)) == 1.0);
    CHECK(detector_capture_fraction(focal, CouplingTarget::circular_detector(1e-3)) == 1.0);
}

TEST_CASE("detector capture decreases monotonically as the side shrinks") {
    const ComplexField focal = concentrated_speckle(256, 1e-6, 20e-6, 6);
    double prev = 1.1;
    for (double side : {200e-6, 100e-6, 50e-6, 20e-6, 10e-6, 4e-6, 2e-6}) {
        const double eta = detector_capture_fraction(focal, CouplingTarget::square_detector(side));
        CHECK(eta <= prev);
        CHECK(eta >= 0.0);
        prev = eta;
    }
    CHECK(prev < 0.02); // 2 um detector on a ~20 um speckle spot
}

TEST_CASE("detector capture depends on intensity only") {
    const ComplexField focal = concentrated_speckle(128, 1e-6, 15e-6, 9);
    ComplexField masked = focal;
    rng::Xoshiro256pp gen(17);
    for (auto& a : masked.samples()) {
        const double ph = 2.0 * constants::pi * gen.next_unit();
        a *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
    const auto target = CouplingTarget::square_detector(30e-6);
    CHECK(detector_capture_fraction(masked, target) ==
          Approx(detector_capture_fraction(focal, target)).epsilon(1e-12));
}

TEST_CASE("containment guard rejects a spot leaking off the window") {
    // speckle with no envelope fills the window uniformly
    const ComplexField focal = oracles::random_field(128, 1e-6, kLambda, 4);
    CHECK_THROWS_WITH(detector_capture_fraction(focal, CouplingTarget::square_detector(50e-6)),
                      Catch::Contains("containment"));
}

TEST_CASE("detector capture dominates fiber coupling on identical focal fields") {
    for (std::uint64_t seed : {31ull, 32ull, 33ull, 34ull}) {
        const ComplexField focal = concentrated_speckle(256, 1e-6, 25e-6, seed);
        const double eta_det =
            detector_capture_fraction(focal, CouplingTarget::square_detector(1e-3));
        const double eta_fib = fiber_coupling_efficiency(focal, 10e-6);
        CHECK(eta_det >= eta_fib);
    }
}

TEST_CASE("field of view reproduces the quoted values") {
    // fiber facet: area of a 10 um diameter disc at f = 1.6 m
    const double fov_fiber = field_of_view(constants::pi * 5e-6 * 5e-6, 1.6);
    CHECK(fov_fiber == Approx(6.250e-6).epsilon(1e-4));
    // 1 mm circular detector
    const double fov_det = field_of_view(constants::pi * 0.5e-3 * 0.5e-3, 1.6);
    CHECK(fov_det == Approx(625.0e-6).epsilon(1e-4));
    // square detector reading for reference: side 1 mm
    CHECK(field_of_view(1e-3 * 1e-3, 1.6) == Approx(705.2e-6).epsilon(1e-3));
}

TEST_CASE("field of view is monotone in area and focal length") {
    double prev = 0.0;
    for (double a : {1e-12, 1e-10, 1e-8, 1e-6}) {
        const double v = field_of_view(a, 1.6);
        CHECK(v > prev);
        prev = v;
    }
    prev = 1.0;
    for (double f : {0.1, 1.0, 10.0, 1e3, 1e6}) {
        const double v = field_of_view(1e-6, f);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(field_of_view(1e-6, 1e9) < 1e-11); // f -> infinity limit
}
