#pragma once

// Analytic surrogate for a 1-D p-n junction device workflow: the depletion
// approximation for electrostatics plus the ideal-diode relation for the IV
// sweep. All quantities are pure functions of the inputs.
//
//   V_bi = (kT/q) ln(N_a N_d / n_i^2)
//   W(V) = sqrt( 2 eps (V_bi - V) (N_a + N_d) / (q N_a N_d) )
//   x_p  = W N_d / (N_a + N_d),  x_n = W N_a / (N_a + N_d)
//   I(V) = I_s (exp(qV/kT) - 1)           (so I(0) == 0 exactly, via expm1)
//
// Dopings enter in cm^-3 (converted internally to m^-3), lengths come out in
// meters; the device surface converts to the declared micrometer units.

#include <cmath>
#include <string>
#include <vector>

#include "fairflow/errors.hpp"

namespace fairflow::pn {

// Exact SI defining constants (2019 redefinition) and CODATA-2018 eps0.
constexpr double kBoltzmann = 1.380649e-23;     // J/K
constexpr double kElementaryCharge = 1.602176634e-19;  // C
constexpr double kEps0 = 8.8541878128e-12;      // F/m

struct Semiconductor {
  std::string name;
  double n_i_cm3 = 0.0;  // intrinsic carrier concentration at 300 K
  double eps_r = 0.0;    // relative permittivity
  double eg_ev = 0.0;    // band gap
  double i_s_a = 0.0;    // surrogate diode saturation current
};

inline double thermal_voltage(double temperature_k) {
  return kBoltzmann * temperature_k / kElementaryCharge;
}

inline double built_in_potential(double na_cm3, double nd_cm3, double n_i_cm3,
                                 double temperature_k) {
  return thermal_voltage(temperature_k) * std::log(na_cm3 * nd_cm3 / (n_i_cm3 * n_i_cm3));
}

// Total depletion width in meters at applied bias `v`. Clamps at zero once
// the bias reaches the built-in potential (the approximation's limit).
inline double depletion_width_m(double eps_r, double v_bi, double v, double na_cm3,
                                double nd_cm3) {
  double drop = v_bi - v;
  if (drop <= 0.0) return 0.0;
  double na = na_cm3 * 1e6;  // cm^-3 -> m^-3
  double nd = nd_cm3 * 1e6;
  return std::sqrt(2.0 * eps_r * kEps0 * drop * (na + nd) / (kElementaryCharge * na * nd));
}

inline double diode_current_a(double i_s_a, double v, double temperature_k) {
  return i_s_a * std::expm1(v / thermal_voltage(temperature_k));
}

// Inclusive sweep start..stop with positive step. A non-positive step or a
// stop below the start has no well-defined point set.
inline std::vector<double> sweep_points(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start)
    throw Error(Errc::degenerate_sweep,
                "voltage sweep is degenerate: step must be > 0 and stop must be >= start");
  size_t n = static_cast<size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> points;
  points.reserve(n);
  for (size_t i = 0; i < n; ++i) points.push_back(start + static_cast<double>(i) * step);
  return points;
}

struct DeviceSolution {
  double v_bi = 0.0;
  double w_um = 0.0;    // zero-bias depletion width
  double x_p_um = 0.0;  // penetration into the p side
  double x_n_um = 0.0;
  std::vector<std::vector<double>> iv;             // rows: [V, I]
  std::vector<std::vector<double>> band_edges;     // rows: [x_um, Ec, Ev, Ei, Ef]
  std::vector<std::vector<double>> charge_density;  // rows: [x_um, rho_C_per_cm3]
};

struct DeviceRequest {
  Semiconductor material;
  double p_length_um = 5.0;
  double n_length_um = 5.0;
  int p_points = 60;
  int n_points = 60;
  double na_cm3 = 1e16;
  double nd_cm3 = 1e16;
  double temperature_k = 300.0;
  double v_start = -0.5;
  double v_stop = 0.5;
  double v_step = 0.05;
};

// Solves the zero-bias electrostatics and sweeps the ideal-diode IV curve.
inline DeviceSolution solve_device(const DeviceRequest& req) {
  DeviceSolution sol;
  sol.v_bi = built_in_potential(req.na_cm3, req.nd_cm3, req.material.n_i_cm3,
                                req.temperature_k);
  double w_m = depletion_width_m(req.material.eps_r, sol.v_bi, 0.0, req.na_cm3, req.nd_cm3);
  sol.w_um = w_m * 1e6;
  sol.x_p_um = sol.w_um * req.nd_cm3 / (req.na_cm3 + req.nd_cm3);
  sol.x_n_um = sol.w_um * req.na_cm3 / (req.na_cm3 + req.nd_cm3);

  for (double v : sweep_points(req.v_start, req.v_stop, req.v_step))
    sol.iv.push_back({v, diode_current_a(req.material.i_s_a, v, req.temperature_k)});

  // Zero-bias band diagram on a junction-centered grid: x in [-L_p, +L_n],
  // p-side bulk taken as the potential reference. The Fermi level is flat at
  // equilibrium, pinned kT ln(N_a/n_i) below the intrinsic level in the p
  // bulk. Energies in eV, positions in micrometers.
  double vt = thermal_voltage(req.temperature_k);
  double eps = req.material.eps_r * kEps0;
  double na = req.na_cm3 * 1e6, nd = req.nd_cm3 * 1e6;
  double x_p_m = sol.x_p_um * 1e-6, x_n_m = sol.x_n_um * 1e-6;
  double half_gap = req.material.eg_ev / 2.0;
  double e_fermi = -vt * std::log(req.na_cm3 / req.material.n_i_cm3);

  auto potential_v = [&](double x_m) -> double {
    if (x_m <= -x_p_m) return 0.0;
    if (x_m < 0.0) {
      double d = x_m + x_p_m;
      return kElementaryCharge * na * d * d / (2.0 * eps);
    }
    if (x_m < x_n_m) {
      double d = x_n_m - x_m;
      return sol.v_bi - kElementaryCharge * nd * d * d / (2.0 * eps);
    }
    return sol.v_bi;
  };

  int total = req.p_points + req.n_points;
  for (int i = 0; i < total; ++i) {
    double x_um = (i < req.p_points)
                      ? -req.p_length_um +
                            (static_cast<double>(i) / req.p_points) * req.p_length_um
                      : (static_cast<double>(i - req.p_points) / (req.n_points - 1)) *
                            req.n_length_um;
    double e_i = -potential_v(x_um * 1e-6);  // intrinsic level tracks -phi
    sol.band_edges.push_back({x_um, e_i + half_gap, e_i - half_gap, e_i, e_fermi});

    double rho = 0.0;  // C per cm^3
    if (x_um * 1e-6 > -x_p_m && x_um < 0.0) rho = -kElementaryCharge * req.na_cm3;
    else if (x_um >= 0.0 && x_um * 1e-6 < x_n_m) rho = kElementaryCharge * req.nd_cm3;
    sol.charge_density.push_back({x_um, rho});
  }
  return sol;
}

}  // namespace fairflow::pn
