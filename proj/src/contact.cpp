#include "thermosense/contact.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "thermosense/special.hpp"

namespace thermosense {

namespace {

void require_positive(double value, const char* what) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw DomainError(std::string(what) + " must be positive and finite, got " +
                          std::to_string(value));
    }
}

void require_temperature(double value, const char* what) {
    if (!std::isfinite(value) || value < kAbsoluteZeroC) {
        throw DomainError(std::string(what) + " must be a finite temperature above -273.15 C");
    }
}

}  // namespace

ThermalProps ThermalProps::from_conductivity_effusivity(double conductivity, double effusivity) {
    require_positive(conductivity, "conductivity");
    require_positive(effusivity, "effusivity");
    const double ratio = conductivity / effusivity;
    return ThermalProps(conductivity, effusivity, ratio * ratio);
}

ThermalProps::ThermalProps(double conductivity, double effusivity, double diffusivity)
    : conductivity_(conductivity), effusivity_(effusivity), diffusivity_(diffusivity) {
    require_positive(conductivity, "conductivity");
    require_positive(effusivity, "effusivity");
    require_positive(diffusivity, "diffusivity");
    const double ratio = conductivity / effusivity;
    const double expected = ratio * ratio;
    if (std::abs(diffusivity - expected) > 1e-9 * expected) {
        throw DomainError("diffusivity inconsistent with conductivity^2 / effusivity^2");
    }
}

ThermalProps water_device() {
    // lambda = 0.6 W/mK, rho = 998 kg/m^3, c = 4182 J/kgK
    return ThermalProps::from_conductivity_effusivity(0.6, effusivity(0.6, 998.0, 4182.0));
}

double effusivity(double conductivity, double density, double specific_heat) {
    require_positive(conductivity, "conductivity");
    require_positive(density, "density");
    require_positive(specific_heat, "specific heat");
    return std::sqrt(conductivity * density * specific_heat);
}

double gamma(const ThermalProps& device, const ThermalProps& material) {
    return device.effusivity() / material.effusivity();
}

double contact_surface_temp(double material_initial, double device_initial, double gamma) {
    require_positive(gamma, "gamma");
    require_temperature(material_initial, "material initial temperature");
    require_temperature(device_initial, "device initial temperature");
    if (material_initial == device_initial) return material_initial;
    const double ts = (material_initial + device_initial * gamma) / (1.0 + gamma);
    // Keep the result inside the closed interval under rounding.
    return std::clamp(ts, std::min(material_initial, device_initial),
                      std::max(material_initial, device_initial));
}

ContactState ContactState::resolve(const ThermalProps& device, const ThermalProps& material,
                                   double device_initial, double material_initial) {
    const double g = thermosense::gamma(device, material);
    return ContactState{material_initial, device_initial,
                        contact_surface_temp(material_initial, device_initial, g), g,
                        device_initial - material_initial};
}

double temp_profile(const ThermalProps& props, double initial, double surface, double x,
                    double t) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("depth must be finite and >= 0");
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and > 0");
    if (x == 0.0) return surface;
    const double eta = x / (2.0 * std::sqrt(props.diffusivity() * t));
    return surface + (initial - surface) * erf(eta);
}

double temp_profile_gradient(const ThermalProps& props, double initial, double surface, double x,
                             double t) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("depth must be finite and >= 0");
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and > 0");
    const double at = props.diffusivity() * t;
    return (initial - surface) / std::sqrt(std::numbers::pi * at) * std::exp(-x * x / (4.0 * at));
}

double heat_flux(const ThermalProps& side, double side_delta, double side_gamma, double area,
                 double t) {
    require_positive(t, "time");
    require_positive(area, "contact area");
    require_positive(side_gamma, "gamma");
    if (!std::isfinite(side_delta)) throw DomainError("temperature difference must be finite");
    if (side_delta == 0.0) return 0.0;
    // lambda * A * (T_side_initial - T_s) / sqrt(pi * alpha * t)
    const double drop = side_delta / (1.0 + side_gamma);
    return side.conductivity() * area * drop /
           std::sqrt(std::numbers::pi * side.diffusivity() * t);
}

std::size_t sample_count(double duration, double sample_rate) {
    require_positive(duration, "duration");
    require_positive(sample_rate, "sample rate");
    // Guard against duration*rate landing a hair above an integer.
    const double steps = duration * sample_rate;
    const double rounded = std::round(steps);
    const double whole = std::abs(steps - rounded) < 1e-9 * std::max(1.0, steps) ? rounded
                                                                                   : std::ceil(steps);
    return static_cast<std::size_t>(whole) + 1;
}

std::vector<double> device_sensor_response(const ThermalProps& device,
                                           const ThermalProps& material, double device_initial,
                                           double material_initial, double sensor_depth,
                                           double duration, double sample_rate) {
    if (!(sensor_depth >= 0.0) || !std::isfinite(sensor_depth)) {
        throw DomainError("sensor depth must be finite and >= 0");
    }
    const std::size_t n = sample_count(duration, sample_rate);
    const auto contact = ContactState::resolve(device, material, device_initial, material_initial);

    std::vector<double> trace(n);
    trace[0] = device_initial;
    for (std::size_t k = 1; k < n; ++k) {
        const double t = static_cast<double>(k) / sample_rate;
        trace[k] = temp_profile(device, device_initial, contact.surface_temp, sensor_depth, t);
    }
    return trace;
}

}  // namespace thermosense
