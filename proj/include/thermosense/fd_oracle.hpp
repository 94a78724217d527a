#pragma once

/**
 * @file fd_oracle.hpp
 * @brief Explicit finite-difference solver for two half-spaces in contact.
 *
 * Numerical reference for the closed-form contact model. Each body is a 1D
 * rod discretized from the contact plane (node 0) to a far boundary held at
 * its initial temperature. Both rods share node 0; its control volume is a
 * half cell on each side, so the update there balances the conductive flux
 * from both neighbours against the combined heat capacity:
 *
 *     (C_d dx_d/2 + C_m dx_m/2) dT_0/dt = k_d (T_d1 - T_0)/dx_d + k_m (T_m1 - T_0)/dx_m
 *
 * Interior nodes use the standard FTCS update. The shared node starts at the
 * capacity-weighted mean of the two half cells it represents, which conserves
 * the initial enthalpy. Nothing here uses effusivities or the contact law.
 */

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "thermosense/contact.hpp"

namespace thermosense {

struct FdConfig {
    double device_length = 0.0;    ///< m, contact plane to far boundary
    double material_length = 0.0;  ///< m
    std::size_t points_per_side = 4000;  ///< grid intervals per body
    double dt = 0.0;                     ///< s
    double total_time = 0.0;             ///< s

    /// Sizes each body to `extent` diffusion lengths sqrt(alpha * total_time)
    /// and picks dt = safety * min(dx^2 / alpha), shrunk so total_time is a
    /// whole number of steps.
    static FdConfig semi_infinite(const ThermalProps& device, const ThermalProps& material,
                                  double total_time, std::size_t points_per_side = 4000,
                                  double safety = 0.4, double extent = 9.0);

    double device_dx() const noexcept;
    double material_dx() const noexcept;
    std::size_t steps() const noexcept;

    /// Rejects configurations violating alpha dt / dx^2 <= 1/2 on either side
    /// (or the equivalent bound at the shared node).
    void check_stability(const ThermalProps& device, const ThermalProps& material) const;
};

struct FdSnapshot {
    double time = 0.0;
    std::vector<double> device;    ///< node i at depth i * device_dx
    std::vector<double> material;  ///< node i at depth i * material_dx
};

struct FdSolution {
    double device_dx = 0.0;
    double material_dx = 0.0;
    double device_conductivity = 0.0;

    std::vector<double> times;           ///< recorded instants, s
    std::vector<double> interface_temp;  ///< shared node temperature, C
    std::vector<double> device_flux;     ///< W/m^2, positive = heat leaving the device

    std::vector<FdSnapshot> snapshots;

    /// Enthalpy change per unit area, J/m^2, of each body over the run.
    double device_enthalpy_change = 0.0;
    double material_enthalpy_change = 0.0;

    /// Field minimum and maximum seen over all steps.
    double min_temperature = 0.0;
    double max_temperature = 0.0;

    enum class Side { device, material };
    /// Linear interpolation of a snapshot at depth `x` on one side.
    double temperature(std::size_t snapshot, Side side, double x) const;
};

/// Runs the solver. Snapshots are taken at the steps nearest to
/// `snapshot_times`; the interface series is recorded every
/// `record_stride` steps (and at the last step).
FdSolution solve_contact(const ThermalProps& device, const ThermalProps& material,
                         double device_initial, double material_initial, const FdConfig& cfg,
                         std::span<const double> snapshot_times = {},
                         std::size_t record_stride = 0);

/// One-sided device-side interface flux series, W/m^2.
std::vector<double> interface_flux(const FdSolution& solution);

/// `side,x_m,time_s,temperature_c` rows for every snapshot.
void write_snapshots_csv(const FdSolution& solution, std::ostream& out);

}  // namespace thermosense
