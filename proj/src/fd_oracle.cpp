#include "thermosense/fd_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "thermosense/special.hpp"

namespace thermosense {

namespace {

// Largest far-boundary drift tolerated over the run, in C.
constexpr double kBoundaryDrift = 1e-6;

}  // namespace

FdConfig FdConfig::semi_infinite(const ThermalProps& device, const ThermalProps& material,
                                 double total_time, std::size_t points_per_side, double safety,
                                 double extent) {
    if (!(total_time > 0.0)) throw DomainError("FD total_time must be > 0");
    if (points_per_side < 2) throw DomainError("FD grid needs at least 2 intervals per side");
    if (!(safety > 0.0 && safety <= 0.5)) throw DomainError("FD safety factor must be in (0, 0.5]");

    FdConfig cfg;
    cfg.total_time = total_time;
    cfg.points_per_side = points_per_side;
    cfg.device_length = extent * std::sqrt(device.diffusivity() * total_time);
    cfg.material_length = extent * std::sqrt(material.diffusivity() * total_time);

    const double dxd = cfg.device_dx();
    const double dxm = cfg.material_dx();
    const double dt_max = safety * std::min(dxd * dxd / device.diffusivity(),
                                            dxm * dxm / material.diffusivity());
    const auto steps = static_cast<std::size_t>(std::ceil(total_time / dt_max));
    cfg.dt = total_time / static_cast<double>(steps);
    return cfg;
}

double FdConfig::device_dx() const noexcept {
    return device_length / static_cast<double>(points_per_side);
}

double FdConfig::material_dx() const noexcept {
    return material_length / static_cast<double>(points_per_side);
}

std::size_t FdConfig::steps() const noexcept {
    return static_cast<std::size_t>(std::llround(total_time / dt));
}

void FdConfig::check_stability(const ThermalProps& device, const ThermalProps& material) const {
    if (!(device_length > 0.0) || !(material_length > 0.0)) {
        throw DomainError("FD domain lengths must be > 0");
    }
    if (points_per_side < 2) throw DomainError("FD grid needs at least 2 intervals per side");
    if (!(dt > 0.0) || !(total_time > 0.0)) throw DomainError("FD dt and total_time must be > 0");

    const double dxd = device_dx();
    const double dxm = material_dx();
    const double rd = device.diffusivity() * dt / (dxd * dxd);
    const double rm = material.diffusivity() * dt / (dxm * dxm);
    if (rd > 0.5 || rm > 0.5) {
        throw DomainError("unstable FD configuration: alpha*dt/dx^2 = " +
                          std::to_string(std::max(rd, rm)) + " > 0.5");
    }
    const double capacity = 0.5 * (device.volumetric_heat_capacity() * dxd +
                                   material.volumetric_heat_capacity() * dxm);
    const double coupling = device.conductivity() / dxd + material.conductivity() / dxm;
    if (dt * coupling / capacity > 1.0) {
        throw DomainError("unstable FD configuration at the contact node");
    }
}

double FdSolution::temperature(std::size_t snapshot, Side side, double x) const {
    const auto& snap = snapshots.at(snapshot);
    const auto& values = side == Side::device ? snap.device : snap.material;
    const double dx = side == Side::device ? device_dx : material_dx;
    if (!(x >= 0.0)) throw DomainError("FD sample depth must be >= 0");
    const double pos = x / dx;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= values.size()) throw DomainError("FD sample depth outside the grid");
    const double frac = pos - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
}

FdSolution solve_contact(const ThermalProps& device, const ThermalProps& material,
                         double device_initial, double material_initial, const FdConfig& cfg,
                         std::span<const double> snapshot_times, std::size_t record_stride) {
    cfg.check_stability(device, material);
    const double gap = std::abs(device_initial - material_initial);
    const auto drift = [&](double length, const ThermalProps& p) {
        return gap * erfc(length / (2.0 * std::sqrt(p.diffusivity() * cfg.total_time)));
    };
    if (drift(cfg.device_length, device) > kBoundaryDrift ||
        drift(cfg.material_length, material) > kBoundaryDrift) {
        throw DomainError("FD domain too short to emulate a semi-infinite body");
    }

    const std::size_t n = cfg.points_per_side;
    const std::size_t steps = cfg.steps();
    if (record_stride == 0) record_stride = std::max<std::size_t>(1, steps / 20000);

    const double dxd = cfg.device_dx();
    const double dxm = cfg.material_dx();
    const double rd = device.diffusivity() * cfg.dt / (dxd * dxd);
    const double rm = material.diffusivity() * cfg.dt / (dxm * dxm);
    const double cap_d = device.volumetric_heat_capacity() * dxd;  // per node, J/(m^2 K)
    const double cap_m = material.volumetric_heat_capacity() * dxm;
    const double cond_d = device.conductivity() / dxd;
    const double cond_m = material.conductivity() / dxm;
    const double node_capacity = 0.5 * (cap_d + cap_m);

    // Node 0 of both arrays is the shared contact node and is kept in sync.
    std::vector<double> dev(n + 1, device_initial), mat(n + 1, material_initial);
    std::vector<double> dev_next(dev), mat_next(mat);
    // Written as an offset so equal temperatures stay exactly in equilibrium.
    const double contact0 =
        material_initial + cap_d * (device_initial - material_initial) / (cap_d + cap_m);
    dev[0] = mat[0] = contact0;

    FdSolution sol;
    sol.device_dx = dxd;
    sol.material_dx = dxm;
    sol.device_conductivity = device.conductivity();
    sol.min_temperature = std::min({device_initial, material_initial, contact0});
    sol.max_temperature = std::max({device_initial, material_initial, contact0});

    std::vector<std::size_t> snapshot_steps;
    for (double t : snapshot_times) {
        if (!(t >= 0.0 && t <= cfg.total_time * (1.0 + 1e-12))) {
            throw DomainError("FD snapshot time outside [0, total_time]");
        }
        snapshot_steps.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));
    }

    const auto take_snapshots = [&](std::size_t step) {
        for (std::size_t k = 0; k < snapshot_steps.size(); ++k) {
            if (snapshot_steps[k] == step) {
                sol.snapshots.push_back({static_cast<double>(step) * cfg.dt, dev, mat});
            }
        }
    };
    const auto record = [&](std::size_t step) {
        sol.times.push_back(static_cast<double>(step) * cfg.dt);
        sol.interface_temp.push_back(dev[0]);
        sol.device_flux.push_back(device.conductivity() * (dev[1] - dev[0]) / dxd);
        take_snapshots(step);
    };

    const auto update_rod = [n](const std::vector<double>& cur, std::vector<double>& next,
                                double r) {
        const double* c = cur.data();
        double* nx = next.data();
        for (std::size_t i = 1; i < n; ++i) {
            nx[i] = c[i] + r * (c[i - 1] - 2.0 * c[i] + c[i + 1]);
        }
        nx[n] = c[n];
    };

    record(0);
    for (std::size_t step = 1; step <= steps; ++step) {
        update_rod(dev, dev_next, rd);
        update_rod(mat, mat_next, rm);
        const double inflow = cond_d * (dev[1] - dev[0]) + cond_m * (mat[1] - mat[0]);
        const double contact = dev[0] + cfg.dt * inflow / node_capacity;
        dev_next[0] = mat_next[0] = contact;
        dev.swap(dev_next);
        mat.swap(mat_next);

        if (step % record_stride == 0 || step == steps) {
            record(step);
            const auto [dlo, dhi] = std::minmax_element(dev.begin(), dev.end());
            const auto [mlo, mhi] = std::minmax_element(mat.begin(), mat.end());
            sol.min_temperature = std::min({sol.min_temperature, *dlo, *mlo});
            sol.max_temperature = std::max({sol.max_temperature, *dhi, *mhi});
        } else if (!snapshot_steps.empty()) {
            take_snapshots(step);
        }
    }

    // Half cells at the contact node and the (fixed) far boundary belong to
    // their own body.
    double ed = 0.5 * cap_d * (dev[0] - device_initial);
    double em = 0.5 * cap_m * (mat[0] - material_initial);
    for (std::size_t i = 1; i < n; ++i) {
        ed += cap_d * (dev[i] - device_initial);
        em += cap_m * (mat[i] - material_initial);
    }
    sol.device_enthalpy_change = ed;
    sol.material_enthalpy_change = em;
    return sol;
}

std::vector<double> interface_flux(const FdSolution& solution) { return solution.device_flux; }

void write_snapshots_csv(const FdSolution& solution, std::ostream& out) {
    std::ostringstream buf;
    buf << std::setprecision(10);
    buf << "side,x_m,time_s,temperature_c\n";
    for (const auto& snap : solution.snapshots) {
        for (std::size_t i = 0; i < snap.device.size(); ++i) {
            buf << "device," << static_cast<double>(i) * solution.device_dx << ',' << snap.time
                << ',' << snap.device[i] << '\n';
        }
        for (std::size_t i = 0; i < snap.material.size(); ++i) {
            buf << "material," << static_cast<double>(i) * solution.material_dx << ','
                << snap.time << ',' << snap.material[i] << '\n';
        }
    }
    out << buf.str();
}

}  // namespace thermosense
