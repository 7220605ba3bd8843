#include <catch2/catch.hpp>

#include <cmath>
#include <complex>

#include "fsolink/field_optics.hpp"
#include "oracles.hpp"

using namespace fsolink;

namespace {
const GaussianBeamSpec kLaunch{0.0355, 1.0, 1550e-9}; // 7.1 cm 1/e^2 diameter
}

TEST_CASE("gaussian beam launch reproduces power and width") {
    const ComplexField f = make_gaussian_beam(kLaunch, 512, 8e-4);

    CHECK(total_power(f) == Approx(1.0).epsilon(1e-6));

    // intensity at one waist radius is e^-2 of the axis value
    const int c = 256;
    const int off = static_cast<int>(std::lround(kLaunch.waist_radius / 8e-4));
    const double i0 = std::norm(f.at(c, c));
    const double iw = std::norm(f.at(c + off, c));
    const double r = off * 8e-4; // actual sampled radius
    CHECK(iw / i0 == Approx(std::exp(-2.0 * r * r / (kLaunch.waist_radius * kLaunch.waist_radius)))
                         .epsilon(1e-9));
}

TEST_CASE("zero-power launch gives an all-zero field") {
    GaussianBeamSpec spec = kLaunch;
    spec.power = 0.0;
    const ComplexField f = make_gaussian_beam(spec, 64, 8e-3);
    for (const auto& a : f.samples()) CHECK(a == std::complex<double>(0.0, 0.0));
    CHECK(total_power(f) == 0.0);
}

TEST_CASE("launch rejects a grid that clips the beam") {
    CHECK_THROWS_AS(make_gaussian_beam(kLaunch, 64, 1e-3), SimulationError); // window 6.4 cm
}

TEST_CASE("gaussian far-field half angle matches the quoted divergence") {
    // lambda/(pi w0) for the 7.1 cm beam: 13.9 urad, consistent with ~14 urad
    const double half = gaussian_divergence_half_angle(kLaunch.waist_radius, kLaunch.wavelength);
    CHECK(half == Approx(13.90e-6).epsilon(1e-3));
}

TEST_CASE("propagation at z = 0 is the identity") {
    const ComplexField f = oracles::random_field(64, 1e-3, 1550e-9, 7);
    const ComplexField g = propagate_vacuum(f, 0.0);
    for (std::size_t i = 0; i < f.samples().size(); ++i) CHECK(g.samples()[i] == f.samples()[i]);
}

TEST_CASE("vacuum propagation conserves power on arbitrary fields") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const ComplexField f = oracles::random_field(128, 1e-3, 1550e-9, seed);
        const double p0 = total_power(f);
        const double zmax = max_vacuum_step(f);
        const ComplexField g = propagate_vacuum(f, 0.9 * zmax);
        CHECK(total_power(g) == Approx(p0).epsilon(1e-9));
    }
}

TEST_CASE("propagated gaussian width follows the analytic w(z)") {
    // stay well inside the aliasing limit: n*dx^2/lambda = 2048*(4e-4)^2/1.55e-6 = 211 m
    const GaussianBeamSpec spec{4e-3, 1.0, 1550e-9};
    ComplexField f = make_gaussian_beam(spec, 2048, 4e-4);
    const double z = 150.0;
    f = propagate_vacuum(std::move(f), z);
    const double expected = gaussian_beam_radius(spec.waist_radius, spec.wavelength, z);
    CHECK(measure_gaussian_radius_e2(f) == Approx(expected).epsilon(0.01));
    CHECK(total_power(f) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("scaled propagation reaches 700 km with the right beam size") {
    ComplexField f = make_gaussian_beam(kLaunch, 2048, 8.0 * 0.0355 / 2048);
    const double z = 700e3;
    const double w_exp = gaussian_beam_radius(kLaunch.waist_radius, kLaunch.wavelength, z);
    CHECK(w_exp == Approx(9.7287).epsilon(1e-4)); // frozen from the analytic formula

    const double dx_out = 2.05 * 2.0 * w_exp / 2048;
    f = propagate_vacuum_scaled(std::move(f), z, dx_out / f.dx());
    CHECK(f.dx() == Approx(dx_out).epsilon(1e-12));
    CHECK(measure_gaussian_radius_e2(f) == Approx(w_exp).epsilon(0.01));
    CHECK(total_power(f) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("aliasing violation is rejected with the admissible distance") {
    const ComplexField f = make_gaussian_beam(kLaunch, 256, 2e-3);
    const double zmax = max_vacuum_step(f);
    CHECK_THROWS_WITH(propagate_vacuum(f, 2.0 * zmax), Catch::Contains("max admissible"));
    CHECK_NOTHROW(propagate_vacuum(f, 0.99 * zmax));
}

TEST_CASE("aperture larger than the grid leaves power unchanged") {
    const ComplexField f = oracles::random_field(64, 1e-3, 1550e-9, 11);
    const double p0 = total_power(f);
    const ComplexField g = apply_circular_aperture(f, 1.0); // window diagonal ~ 9 cm
    CHECK(total_power(g) == p0);
}

TEST_CASE("grid aperture transmission matches the closed form at a = w") {
    const GaussianBeamSpec spec{0.02, 1.0, 1550e-9};
    const ComplexField f = make_gaussian_beam(spec, 512, 3.2e-4); // 64 samples per w
    const ComplexField g = apply_circular_aperture(f, 2.0 * spec.waist_radius);
    const double t_grid = total_power(g) / total_power(f);
    const double t_ana = gaussian_aperture_transmission(spec.waist_radius, spec.waist_radius);
    CHECK(t_ana == Approx(0.864664716).epsilon(1e-9)); // 1 - e^-2
    CHECK(t_grid == Approx(t_ana).epsilon(0.005));
}

TEST_CASE("aperture transmission tracks the closed form across sizes") {
    const GaussianBeamSpec spec{0.02, 1.0, 1550e-9};
    const ComplexField f = make_gaussian_beam(spec, 512, 4.1667e-4); // 48 samples per w
    for (double ratio : {0.8, 1.0, 1.5, 2.0}) {
        const double a = ratio * spec.waist_radius;
        const double t_grid = total_power(apply_circular_aperture(f, 2.0 * a)) / total_power(f);
        const double t_ana = gaussian_aperture_transmission(spec.waist_radius, a);
        INFO("a/w = " << ratio);
        CHECK(t_grid == Approx(t_ana).epsilon(0.005));
    }
    // a binary pixel-center edge carries lattice-count noise: at ~24 samples
    // of aperture radius the transmitted power is only good to ~1%
    const double t_grid = total_power(apply_circular_aperture(f, spec.waist_radius)) /
                          total_power(f);
    CHECK(t_grid == Approx(gaussian_aperture_transmission(spec.waist_radius,
                                                          0.5 * spec.waist_radius))
                        .epsilon(0.015));
}

TEST_CASE("closed-form aperture transmission endpoints") {
    CHECK(gaussian_aperture_transmission(1.0, 100.0) == Approx(1.0).margin(1e-12));
    CHECK(gaussian_aperture_transmission(1.0, 0.0) == 0.0);
    // downlink numbers: w = 9.73 m beam on the 35.5 cm aperture
    const double t = gaussian_aperture_transmission(9.7287, 0.1775);
    CHECK(t == Approx(6.655e-4).epsilon(2e-3));
    CHECK(-10.0 * std::log10(t) == Approx(31.77).margin(0.05));
}

TEST_CASE("divergence full angle and beam diameters") {
    // 8 cm transmitter at 1550 nm: 23.6 urad, 0.236 m beam diameter at 10 km
    const double theta = divergence_full_angle(1550e-9, 0.08);
    CHECK(theta == Approx(23.6375e-6).epsilon(1e-6));
    CHECK(theta * 10e3 == Approx(0.2364).margin(5e-4));
    // doubling the aperture halves the divergence, exactly
    CHECK(divergence_full_angle(1550e-9, 0.16) == theta / 2.0);
    // receiver-sized aperture
    CHECK(divergence_full_angle(1550e-9, 0.355) == Approx(5.327e-6).epsilon(1e-3));
}

TEST_CASE("propagation and aperture are linear in the field") {
    const ComplexField f = oracles::random_field(128, 1e-3, 1550e-9, 21);
    ComplexField f2 = f;
    for (auto& a : f2.samples()) a *= 2.0; // power-of-two scale is exact

    const double z = 0.5 * max_vacuum_step(f);
    const ComplexField p1 = propagate_vacuum(f, z);
    const ComplexField p2 = propagate_vacuum(f2, z);
    for (std::size_t i = 0; i < p1.samples().size(); ++i)
        CHECK(p2.samples()[i] == 2.0 * p1.samples()[i]);

    const ComplexField a1 = apply_circular_aperture(f, 0.05);
    const ComplexField a2 = apply_circular_aperture(f2, 0.05);
    for (std::size_t i = 0; i < a1.samples().size(); ++i)
        CHECK(a2.samples()[i] == 2.0 * a1.samples()[i]);
}

TEST_CASE("total power bookkeeping") {
    ComplexField z(64, 1e-3, 1550e-9);
    CHECK(total_power(z) == 0.0);
    const ComplexField f = make_gaussian_beam(kLaunch, 512, 8e-4);
    CHECK(total_power(f) == Approx(1.0).epsilon(1e-6));
}
