#pragma once

/**
 * @file contact.hpp
 * @brief Closed-form contact of two semi-infinite solids.
 *
 * Each body obeys dT/dt = alpha d2T/dx2 with its own diffusivity. On contact
 * the shared boundary jumps to a time-invariant surface temperature set by
 * the effusivity ratio of the two bodies, and each side relaxes towards it as
 *
 *     T(x, t) = T_s + (T_i - T_s) erf(x / (2 sqrt(alpha t))).
 *
 * x is measured from the contact plane into the body. Temperatures are in
 * degrees Celsius; only differences enter the equations.
 */

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace thermosense {

/// Raised for inputs outside an operation's mathematical domain.
class DomainError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

inline constexpr double kAbsoluteZeroC = -273.15;

/// Bulk thermal properties of one body.
///
/// Density and specific heat are not stored: they enter only through
/// effusivity^2 / conductivity = rho * c, so the triple
/// (conductivity, effusivity, diffusivity) is closed and consistent.
class ThermalProps {
   public:
    /// Derives diffusivity as conductivity^2 / effusivity^2.
    static ThermalProps from_conductivity_effusivity(double conductivity, double effusivity);

    /// Checks diffusivity == conductivity^2 / effusivity^2 to 1e-9 relative.
    ThermalProps(double conductivity, double effusivity, double diffusivity);

    double conductivity() const noexcept { return conductivity_; }  ///< W/(m K)
    double effusivity() const noexcept { return effusivity_; }      ///< J/(m^2 s^1/2 K)
    double diffusivity() const noexcept { return diffusivity_; }    ///< m^2/s
    double volumetric_heat_capacity() const noexcept {              ///< J/(m^3 K)
        return conductivity_ / diffusivity_;
    }

    friend bool operator==(const ThermalProps&, const ThermalProps&) = default;

   private:
    double conductivity_;
    double effusivity_;
    double diffusivity_;
};

/// Water at room temperature; default body of the temperature-regulated device.
ThermalProps water_device();

/// sqrt(conductivity * density * specific_heat).
double effusivity(double conductivity, double density, double specific_heat);

/// Effusivity ratio e_device / e_material.
double gamma(const ThermalProps& device, const ThermalProps& material);

/// Interface temperature (T_mi + T_devi * gamma) / (1 + gamma).
double contact_surface_temp(double material_initial, double device_initial, double gamma);

/// Snapshot of one contact: initial temperatures and the resulting interface.
struct ContactState {
    double material_initial;
    double device_initial;
    double surface_temp;
    double gamma;
    double delta_t;  ///< device_initial - material_initial, signed

    static ContactState resolve(const ThermalProps& device, const ThermalProps& material,
                                double device_initial, double material_initial);
};

/// Semi-infinite relaxation profile of a body initially at `initial` whose
/// boundary is held at `surface`. Requires x >= 0 and t > 0.
double temp_profile(const ThermalProps& props, double initial, double surface, double x, double t);

/// Analytic spatial derivative of temp_profile.
double temp_profile_gradient(const ThermalProps& props, double initial, double surface, double x,
                             double t);

/// Heat flow through the contact plane out of a body, in watts.
///
/// `side_delta` is this body's initial temperature minus the other body's, and
/// `side_gamma` is e_this / e_other. Positive means heat leaves this body.
/// With device properties this is the device-side flow; the same call with
/// material properties, -delta and 1/gamma gives the opposite flow.
double heat_flux(const ThermalProps& side, double side_delta, double side_gamma, double area,
                 double t);

/// Device-side heat flow; positive when the device is hotter than the material.
inline double heat_flux_device(const ThermalProps& device, double delta_t, double gamma,
                               double area, double t) {
    return heat_flux(device, delta_t, gamma, area, t);
}

/// Uniformly sampled temperature of a sensor embedded `sensor_depth` inside
/// the device. Sample k is taken at t = k / sample_rate; sample 0 is the
/// device's initial temperature.
std::vector<double> device_sensor_response(const ThermalProps& device,
                                           const ThermalProps& material, double device_initial,
                                           double material_initial, double sensor_depth,
                                           double duration, double sample_rate);

/// Number of samples device_sensor_response produces: ceil(duration*rate)+1.
std::size_t sample_count(double duration, double sample_rate);

}  // namespace thermosense
