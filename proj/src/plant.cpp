#include "plant.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace fcmpc {

namespace {

constexpr double kPaPerAtm = 101325.0;

bool all_finite(const PlantState& s) {
  return std::isfinite(s.p_h2) && std::isfinite(s.p_o2) && std::isfinite(s.p_n2);
}

bool all_finite(const PlantInputs& u) {
  return std::isfinite(u.q_h2) && std::isfinite(u.q_air) && std::isfinite(u.current);
}

}  // namespace

PlantParams PlantParams::defaults() {
  PlantParams p{};
  p.n_cells = 64.0;
  p.faraday = 96485.33212;
  p.gas_constant = 8.314462618;
  p.temperature = 338.15;
  p.anode_volume = 4.524492e-4;
  p.cathode_volume = 6.465137e-3;
  p.ambient_pressure = 1.0;
  p.nernst_e0 = 0.9150388;
  p.r_ohmic = 0.004;
  p.act_coeff = 2.0;
  p.conc_coeff = 1.0;
  p.i_limit = 400.0;
  p.i_exchange = 1.66;
  p.act_h2_exp = 0.7;
  p.act_o2_exp = 0.7;
  p.h2_consumption_gain = 3.3165666e-4;
  p.o2_consumption_gain = 1.6582833e-4;
  p.outflow_coeff_anode = 0.10870552;
  p.outflow_coeff_cathode = 0.46599445;
  p.o2_fraction_air = 0.21;
  return p;
}

double PlantParams::mol_per_lpm() const {
  return ambient_pressure * kPaPerAtm * (1.0e-3 / 60.0) / (gas_constant * temperature);
}

double PlantParams::mol_per_atm(double volume) const {
  return volume * kPaPerAtm / (gas_constant * temperature);
}

void PlantParams::validate() const {
  const double positives[] = {
      n_cells, faraday, gas_constant, temperature, anode_volume, cathode_volume,
      ambient_pressure, nernst_e0, r_ohmic, act_coeff, conc_coeff, i_limit,
      i_exchange, act_h2_exp, act_o2_exp, h2_consumption_gain, o2_consumption_gain,
      outflow_coeff_anode, outflow_coeff_cathode};
  for (double v : positives) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw InvalidStateError("plant parameter must be finite and strictly positive");
    }
  }
  if (!std::isfinite(o2_fraction_air) || o2_fraction_air <= 0.0 || o2_fraction_air >= 1.0) {
    throw InvalidStateError("o2_fraction_air must lie in (0,1)");
  }
}

PlantState plant_derivative(const PlantState& state, const PlantInputs& inputs,
                            const PlantParams& params) {
  if (!all_finite(state) || !all_finite(inputs)) {
    throw InvalidStateError("plant_derivative: non-finite state or inputs");
  }

  const double c_in = params.mol_per_lpm();

  // Anode: inflow - Faraday consumption - valve outflow.
  const double n_in_h2 = inputs.q_h2 * c_in;
  const double n_cons_h2 = params.h2_consumption_gain * inputs.current;
  const double dp_an = state.p_h2 - params.ambient_pressure;
  const double n_out_h2 = params.outflow_coeff_anode * (dp_an > 0.0 ? dp_an : 0.0);

  // Cathode: air split into O2/N2, O2 consumed, common outlet valve with
  // species leaving in proportion to their partial pressures.
  const double n_in_air = inputs.q_air * c_in;
  const double n_in_o2 = params.o2_fraction_air * n_in_air;
  const double n_in_n2 = (1.0 - params.o2_fraction_air) * n_in_air;
  const double n_cons_o2 = params.o2_consumption_gain * inputs.current;
  const double p_ca = state.p_o2 + state.p_n2;
  const double dp_ca = p_ca - params.ambient_pressure;
  const double n_out_ca = params.outflow_coeff_cathode * (dp_ca > 0.0 ? dp_ca : 0.0);
  const double f_o2 = p_ca > 0.0 ? state.p_o2 / p_ca : 0.0;
  const double f_n2 = p_ca > 0.0 ? state.p_n2 / p_ca : 0.0;

  const double atm_per_mol_an = 1.0 / params.mol_per_atm(params.anode_volume);
  const double atm_per_mol_ca = 1.0 / params.mol_per_atm(params.cathode_volume);

  PlantState rate;
  rate.p_h2 = (n_in_h2 - n_cons_h2 - n_out_h2) * atm_per_mol_an;
  rate.p_o2 = (n_in_o2 - n_cons_o2 - n_out_ca * f_o2) * atm_per_mol_ca;
  rate.p_n2 = (n_in_n2 - n_out_ca * f_n2) * atm_per_mol_ca;
  if (!all_finite(rate)) {
    throw InvalidStateError("plant_derivative: non-finite rate");
  }
  return rate;
}

PlantState plant_step(const PlantState& state, const PlantInputs& inputs,
                      const PlantParams& params, double dt) {
  if (!(dt > 0.0)) throw InvalidStateError("plant_step: dt must be positive");

  const double h_max = 0.01;
  const int n_sub = static_cast<int>(std::ceil(dt / h_max));
  const double h = dt / n_sub;

  PlantState x = state;
  for (int i = 0; i < n_sub; ++i) {
    const PlantState k1 = plant_derivative(x, inputs, params);
    PlantState x2{x.p_h2 + 0.5 * h * k1.p_h2, x.p_o2 + 0.5 * h * k1.p_o2,
                  x.p_n2 + 0.5 * h * k1.p_n2};
    const PlantState k2 = plant_derivative(x2, inputs, params);
    PlantState x3{x.p_h2 + 0.5 * h * k2.p_h2, x.p_o2 + 0.5 * h * k2.p_o2,
                  x.p_n2 + 0.5 * h * k2.p_n2};
    const PlantState k3 = plant_derivative(x3, inputs, params);
    PlantState x4{x.p_h2 + h * k3.p_h2, x.p_o2 + h * k3.p_o2, x.p_n2 + h * k3.p_n2};
    const PlantState k4 = plant_derivative(x4, inputs, params);

    x.p_h2 += h / 6.0 * (k1.p_h2 + 2.0 * k2.p_h2 + 2.0 * k3.p_h2 + k4.p_h2);
    x.p_o2 += h / 6.0 * (k1.p_o2 + 2.0 * k2.p_o2 + 2.0 * k3.p_o2 + k4.p_o2);
    x.p_n2 += h / 6.0 * (k1.p_n2 + 2.0 * k2.p_n2 + 2.0 * k3.p_n2 + k4.p_n2);

    if (x.p_h2 < 0.0) x.p_h2 = 0.0;
    if (x.p_o2 < 0.0) x.p_o2 = 0.0;
    if (x.p_n2 < 0.0) x.p_n2 = 0.0;
  }

  if (!std::isfinite(x.p_h2)) throw IntegrationError("plant_step: p_h2 became non-finite");
  if (!std::isfinite(x.p_o2)) throw IntegrationError("plant_step: p_o2 became non-finite");
  if (!std::isfinite(x.p_n2)) throw IntegrationError("plant_step: p_n2 became non-finite");
  return x;
}

PlantOutput plant_output(const PlantState& state, const PlantInputs& inputs,
                         const PlantParams& params) {
  if (!all_finite(state) || !all_finite(inputs)) {
    throw InvalidStateError("plant_output: non-finite state or inputs");
  }
  if (inputs.current >= params.i_limit) {
    throw LimitCurrentError("plant_output: current " + std::to_string(inputs.current) +
                            " A at or above limiting current " +
                            std::to_string(params.i_limit) + " A");
  }
  if (state.p_h2 <= 0.0 || state.p_o2 <= 0.0) {
    throw InvalidStateError("plant_output: reactant partial pressure must be positive");
  }

  const double i = inputs.current;
  const double rt_2f = params.gas_constant * params.temperature / (2.0 * params.faraday);

  // Nernst potential; reactant pressures referenced to 1 atm.
  const double e_nernst =
      params.n_cells *
      (params.nernst_e0 + rt_2f * (std::log(state.p_h2) + 0.5 * std::log(state.p_o2)));

  // Activation loss with pressure-dependent exchange current, finite at i=0.
  const double i0 = params.i_exchange * std::pow(state.p_h2, params.act_h2_exp) *
                    std::pow(state.p_o2, params.act_o2_exp);
  const double v_act = params.act_coeff * std::log1p(i / i0);

  const double v_ohm = params.r_ohmic * i;
  const double v_conc = -params.conc_coeff * std::log1p(-i / params.i_limit);

  PlantOutput out;
  out.v_fc = e_nernst - v_act - v_ohm - v_conc;
  out.p_h2 = state.p_h2;
  if (!std::isfinite(out.v_fc)) {
    throw InvalidStateError("plant_output: non-finite stack voltage");
  }
  return out;
}

Measurement measure(const PlantOutput& output, const NoiseStd& noise_std, Rng& rng) {
  Measurement m;
  m.v_fc = output.v_fc + (noise_std.v_fc > 0.0 ? rng.gaussian(0.0, noise_std.v_fc) : 0.0);
  m.p_h2 = output.p_h2 + (noise_std.p_h2 > 0.0 ? rng.gaussian(0.0, noise_std.p_h2) : 0.0);
  return m;
}

PlantState plant_equilibrium(const PlantInputs& inputs, const PlantParams& params) {
  const double c_in = params.mol_per_lpm();

  const double net_h2 = inputs.q_h2 * c_in - params.h2_consumption_gain * inputs.current;
  const double net_o2 = params.o2_fraction_air * inputs.q_air * c_in -
                        params.o2_consumption_gain * inputs.current;
  const double net_n2 = (1.0 - params.o2_fraction_air) * inputs.q_air * c_in;
  if (net_h2 < 0.0 || net_o2 < 0.0) {
    throw InvalidStateError("plant_equilibrium: consumption exceeds inflow, no steady state");
  }

  PlantState eq;
  eq.p_h2 = params.ambient_pressure + net_h2 / params.outflow_coeff_anode;
  const double p_ca = params.ambient_pressure + (net_o2 + net_n2) / params.outflow_coeff_cathode;
  const double total_out = net_o2 + net_n2;
  if (total_out <= 0.0) {
    // No cathode throughput: composition matches ambient air.
    eq.p_o2 = params.o2_fraction_air * params.ambient_pressure;
    eq.p_n2 = (1.0 - params.o2_fraction_air) * params.ambient_pressure;
  } else {
    eq.p_o2 = p_ca * net_o2 / total_out;
    eq.p_n2 = p_ca * net_n2 / total_out;
  }
  return eq;
}

}  // namespace fcmpc
