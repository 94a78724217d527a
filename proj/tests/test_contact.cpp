#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "thermosense/contact.hpp"
#include "thermosense/materials.hpp"

namespace ts = thermosense;

namespace {

ts::ThermalProps props(const char* name) { return ts::to_thermal_props(ts::bundled_db().at(name)); }

// Values computed independently with scipy.special.erf and frozen here.
constexpr double kWaterEffusivity = 1582.4606156236557;
constexpr double kCopperGamma = 0.043474192736913615;
constexpr double kWoodGamma = 4.311881786440479;
constexpr double kCopperSurface = 42.16674139064454;  // 43 C copper, 23 C device
constexpr double kWoodSurface = 26.765144030699922;
constexpr double kCopperProfile = 42.57929066988966;  // x = 1 cm, t = 1 s
constexpr double kCopperFluxT10 = 2.1645431515970053; // W, dT = 20, A = 4 cm^2

}  // namespace

TEST_CASE("effusivity of water and the identity case") {
    CHECK(ts::effusivity(0.6, 998.0, 4182.0) == doctest::Approx(kWaterEffusivity).epsilon(1e-12));
    CHECK(ts::effusivity(1.0, 1.0, 1.0) == 1.0);
    CHECK(ts::water_device().effusivity() == doctest::Approx(1582.46).epsilon(1e-5));
}

TEST_CASE("copper effusivity is recovered from any consistent density and heat capacity") {
    const double rho_c = 3.64e4 * 3.64e4 / 386.0;
    for (double rho : {8933.0, 1000.0, 12345.6}) {
        CHECK(ts::effusivity(386.0, rho, rho_c / rho) == doctest::Approx(3.64e4).epsilon(0.01));
    }
}

TEST_CASE("effusivity rejects non-positive inputs") {
    CHECK_THROWS_AS(ts::effusivity(0.0, 1.0, 1.0), ts::DomainError);
    CHECK_THROWS_AS(ts::effusivity(1.0, -1.0, 1.0), ts::DomainError);
    CHECK_THROWS_AS(ts::effusivity(1.0, 1.0, NAN), ts::DomainError);
}

TEST_CASE("thermal properties stay consistent") {
    const auto p = ts::ThermalProps::from_conductivity_effusivity(386.0, 3.64e4);
    CHECK(p.diffusivity() == doctest::Approx(386.0 * 386.0 / (3.64e4 * 3.64e4)).epsilon(1e-14));
    CHECK_NOTHROW(ts::ThermalProps(1.0, 1.0, 1.0));
    CHECK_THROWS_AS(ts::ThermalProps(1.0, 1.0, 1.001), ts::DomainError);
    CHECK_THROWS_AS(ts::ThermalProps::from_conductivity_effusivity(-1.0, 1.0), ts::DomainError);
    CHECK_THROWS_AS(ts::ThermalProps::from_conductivity_effusivity(1.0, INFINITY), ts::DomainError);
}

TEST_CASE("gamma for the water device") {
    const auto water = ts::water_device();
    CHECK(ts::gamma(water, water) == 1.0);
    CHECK(ts::gamma(water, props("Copper")) == doctest::Approx(kCopperGamma).epsilon(1e-12));
    CHECK(ts::gamma(water, props("Copper")) == doctest::Approx(0.04346).epsilon(1e-3));
    CHECK(ts::gamma(water, props("Wood")) == doctest::Approx(kWoodGamma).epsilon(1e-12));
    CHECK(ts::gamma(water, props("Wood")) == doctest::Approx(4.31).epsilon(1e-3));
}

TEST_CASE("contact surface temperature examples") {
    CHECK(ts::contact_surface_temp(43.0, 23.0, kCopperGamma) ==
          doctest::Approx(kCopperSurface).epsilon(1e-12));
    CHECK(ts::contact_surface_temp(43.0, 23.0, 0.04346) == doctest::Approx(42.17).epsilon(1e-4));
    CHECK(ts::contact_surface_temp(43.0, 23.0, kWoodGamma) ==
          doctest::Approx(kWoodSurface).epsilon(1e-12));
    CHECK(ts::contact_surface_temp(25.0, 25.0, 3.7) == 25.0);
    CHECK(std::abs(ts::contact_surface_temp(43.0, 23.0, 1e6) - 23.0) < 1e-4);
    CHECK_THROWS_AS(ts::contact_surface_temp(43.0, 23.0, 0.0), ts::DomainError);
    CHECK_THROWS_AS(ts::contact_surface_temp(-300.0, 23.0, 1.0), ts::DomainError);
}

TEST_CASE("resolved contact state") {
    const auto s = ts::ContactState::resolve(ts::water_device(), props("Wood"), 23.0, 43.0);
    CHECK(s.surface_temp == doctest::Approx(kWoodSurface).epsilon(1e-12));
    CHECK(s.gamma == doctest::Approx(kWoodGamma).epsilon(1e-12));
    CHECK(s.delta_t == -20.0);
}

TEST_CASE("property: surface temperature stays between the initial temperatures") {
    for (double tm : {-40.0, 0.0, 18.0, 43.0, 300.0}) {
        for (double td : {-10.0, 23.0, 38.0, 48.0, 1000.0}) {
            for (double g : {1e-9, 1e-3, 0.0435, 1.0, 4.31, 1e3, 1e12}) {
                const double s = ts::contact_surface_temp(tm, td, g);
                CHECK(s >= std::min(tm, td));
                CHECK(s <= std::max(tm, td));
            }
        }
    }
}

TEST_CASE("property: equal temperatures give that temperature exactly") {
    for (double t : {-273.0, -5.5, 0.0, 23.0, 42.17, 1e4}) {
        for (double g : {1e-12, 0.3, 1.0, 7.0, 1e9}) CHECK(ts::contact_surface_temp(t, t, g) == t);
    }
}

TEST_CASE("property: gamma equals (Ts - Tm) / (Td - Ts)") {
    const auto water = ts::water_device();
    for (const auto& rec : ts::bundled_db().records()) {
        const auto mat = ts::to_thermal_props(rec);
        const double g = ts::gamma(water, mat);
        for (auto [tm, td] : {std::pair{43.0, 23.0}, {28.0, 48.0}, {18.0, 38.0}, {43.0, 38.0}}) {
            const double s = ts::contact_surface_temp(tm, td, g);
            CAPTURE(rec.name);
            CHECK((s - tm) / (td - s) == doctest::Approx(g).epsilon(1e-9));
        }
    }
}

TEST_CASE("property: device and material heat flows balance") {
    const auto water = ts::water_device();
    for (const auto& rec : ts::bundled_db().records()) {
        const auto mat = ts::to_thermal_props(rec);
        const double g = ts::gamma(water, mat);
        for (double dt : {-20.0, -5.0, 3.0, 20.0}) {
            for (double t : {0.1, 1.0, 10.0}) {
                const double q_dev = ts::heat_flux_device(water, dt, g, 4e-4, t);
                const double q_mat = ts::heat_flux(mat, -dt, 1.0 / g, 4e-4, t);
                CHECK(q_mat == doctest::Approx(-q_dev).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("heat flow spot value and sign") {
    const auto water = ts::water_device();
    CHECK(ts::heat_flux_device(water, 20.0, kCopperGamma, 4e-4, 10.0) ==
          doctest::Approx(kCopperFluxT10).epsilon(1e-12));
    CHECK(ts::heat_flux_device(water, 0.0, kCopperGamma, 4e-4, 10.0) == 0.0);
    CHECK(ts::heat_flux_device(water, -20.0, kCopperGamma, 4e-4, 10.0) < 0.0);
    CHECK_THROWS_AS(ts::heat_flux_device(water, 20.0, kCopperGamma, 4e-4, 0.0), ts::DomainError);
    CHECK_THROWS_AS(ts::heat_flux_device(water, 20.0, kCopperGamma, -1.0, 1.0), ts::DomainError);
}

TEST_CASE("heat flow equals conduction at the surface of the profile") {
    const auto water = ts::water_device();
    const double g = kCopperGamma;
    const double ts_ = ts::contact_surface_temp(43.0, 23.0, g);
    for (double t : {0.5, 2.0, 10.0}) {
        const double h = 1e-7;
        const double slope = (ts::temp_profile(water, 23.0, ts_, h, t) -
                              ts::temp_profile(water, 23.0, ts_, 0.0, t)) / h;
        // Depth x points into the device, so heat leaving it through x = 0
        // is the conductive flux in the -x direction, +k dT/dx.
        const double q = water.conductivity() * 4e-4 * slope;
        CHECK(ts::heat_flux_device(water, -20.0, g, 4e-4, t) == doctest::Approx(q).epsilon(1e-4));
    }
}

TEST_CASE("property: heat flow is monotone in delta T and area") {
    const auto water = ts::water_device();
    for (const auto& rec : ts::bundled_db().records()) {
        const double g = ts::gamma(water, ts::to_thermal_props(rec));
        double prev_dt = -1.0;
        for (double dt = 0.0; dt <= 30.0; dt += 2.5) {
            const double q = std::abs(ts::heat_flux_device(water, dt, g, 4e-4, 10.0));
            CHECK(q >= prev_dt);
            prev_dt = q;
        }
        double prev_a = -1.0;
        for (double a = 1e-5; a <= 1e-2; a *= 1.7) {
            const double q = std::abs(ts::heat_flux_device(water, 20.0, g, a, 10.0));
            CHECK(q >= prev_a);
            prev_a = q;
        }
    }
}

TEST_CASE("temperature profile boundary and far field") {
    const auto cu = props("Copper");
    CHECK(ts::temp_profile(cu, 43.0, 42.17, 0.0, 3.0) == 42.17);
    const double far = 6.5 * 2.0 * std::sqrt(cu.diffusivity() * 2.0);
    CHECK(std::abs(ts::temp_profile(cu, 43.0, 42.17, far, 2.0) - 43.0) < 1e-9);
    CHECK(ts::temp_profile(cu, 43.0, kCopperSurface, 0.01, 1.0) ==
          doctest::Approx(kCopperProfile).epsilon(1e-12));
    CHECK_THROWS_AS(ts::temp_profile(cu, 43.0, 42.0, 0.01, 0.0), ts::DomainError);
    CHECK_THROWS_AS(ts::temp_profile(cu, 43.0, 42.0, -0.01, 1.0), ts::DomainError);
}

TEST_CASE("property: profile derivative matches the closed form") {
    const auto water = ts::water_device();
    const double a = water.diffusivity();
    for (double t : {0.5, 1.0, 10.0}) {
        const double scale = 2.0 * std::sqrt(a * t);
        for (double u : {0.05, 0.3, 1.0, 2.0}) {
            const double x = u * scale;
            const double h = 1e-6 * scale;
            const double fd = (ts::temp_profile(water, 23.0, 40.0, x + h, t) -
                               ts::temp_profile(water, 23.0, 40.0, x - h, t)) / (2.0 * h);
            const double exact = (23.0 - 40.0) / std::sqrt(std::numbers::pi * a * t) *
                                 std::exp(-x * x / (4.0 * a * t));
            CHECK(fd == doctest::Approx(exact).epsilon(1e-5));
            CHECK(ts::temp_profile_gradient(water, 23.0, 40.0, x, t) ==
                  doctest::Approx(exact).epsilon(1e-12));
        }
    }
}

TEST_CASE("sensor response conventions") {
    const auto water = ts::water_device();
    const auto cu = props("Copper");
    CHECK(ts::sample_count(10.0, 10.0) == 101);
    CHECK(ts::sample_count(40.0, 10.0) == 401);
    CHECK(ts::sample_count(0.3, 10.0) == 4);

    const auto flat = ts::device_sensor_response(water, cu, 30.0, 30.0, 1e-3, 10.0, 10.0);
    REQUIRE(flat.size() == 101);
    for (double v : flat) CHECK(v == 30.0);

    const auto surface = ts::device_sensor_response(water, cu, 23.0, 43.0, 0.0, 10.0, 10.0);
    CHECK(surface.front() == 23.0);
    for (std::size_t k = 1; k < surface.size(); ++k) {
        CHECK(surface[k] == doctest::Approx(kCopperSurface).epsilon(1e-12));
    }
}

TEST_CASE("copper and wood traces separate at the default depth") {
    // Frozen from the scipy evaluation: gap at t = 1 s is 9.873 C at 0.25 mm
    // and 0.958 C at 1 mm.
    const auto water = ts::water_device();
    const auto cu = ts::device_sensor_response(water, props("Copper"), 23.0, 43.0, 2.5e-4, 10.0, 10.0);
    const auto wood = ts::device_sensor_response(water, props("Wood"), 23.0, 43.0, 2.5e-4, 10.0, 10.0);
    CHECK(cu[10] - wood[10] == doctest::Approx(9.873131116205098).epsilon(1e-9));
    for (std::size_t k = 10; k < cu.size(); ++k) CHECK(cu[k] - wood[k] > 1.0);

    const auto cu1 = ts::device_sensor_response(water, props("Copper"), 23.0, 43.0, 1e-3, 10.0, 10.0);
    const auto wood1 = ts::device_sensor_response(water, props("Wood"), 23.0, 43.0, 1e-3, 10.0, 10.0);
    CHECK(cu1[10] - wood1[10] == doctest::Approx(0.9578058191773877).epsilon(1e-9));
    CHECK(cu1[100] - wood1[100] == doctest::Approx(8.553422499776211).epsilon(1e-9));
}

TEST_CASE("invalid temperatures are rejected") {
    const auto water = ts::water_device();
    CHECK_THROWS_AS(ts::ContactState::resolve(water, props("Iron"), -274.0, 20.0), ts::DomainError);
    CHECK_THROWS_AS(ts::device_sensor_response(water, props("Iron"), NAN, 20.0, 1e-3, 10.0, 10.0),
                    ts::DomainError);
}
