#pragma once

#include "rng.hpp"

namespace fcmpc {

// Lumped-parameter fuel cell stack: two gas balances (anode H2, cathode
// O2/N2) with Faraday-law consumption and linear outlet valves, plus a
// static polarization curve for the stack voltage. Pressures in atm,
// flows in lpm, current in A.
struct PlantParams {
  double n_cells;             // cells in series
  double faraday;             // C/mol
  double gas_constant;        // J/(mol K)
  double temperature;         // K, held constant
  double anode_volume;        // m^3
  double cathode_volume;      // m^3
  double ambient_pressure;    // atm, outlet back-pressure and lpm reference
  double nernst_e0;           // V per cell at 1 atm reactants
  double r_ohmic;             // ohm, whole stack
  double act_coeff;           // V, stack Tafel slope
  double conc_coeff;          // V, stack concentration-loss coefficient
  double i_limit;             // A, limiting current
  double i_exchange;          // A, exchange current at 1 atm reactants
  double act_h2_exp;          // exchange-current pressure exponent, H2
  double act_o2_exp;          // exchange-current pressure exponent, O2
  double h2_consumption_gain; // mol/(A s), n_cells/(2 F)
  double o2_consumption_gain; // mol/(A s), n_cells/(4 F)
  double outflow_coeff_anode;   // mol/(s atm)
  double outflow_coeff_cathode; // mol/(s atm)
  double o2_fraction_air;     // mole fraction of O2 in feed air

  // Calibrated defaults: 48 V / 6 kW at (250 lpm, 500 lpm, 125 A) with
  // P_H2 = 2.0 atm. Values produced by tools/calibrate_plant.
  static PlantParams defaults();

  // mol/s of gas fed per lpm of inflow (ideal gas at ambient pressure and
  // stack temperature).
  double mol_per_lpm() const;

  // mol of gas per atm of partial pressure in the given volume.
  double mol_per_atm(double volume) const;

  void validate() const;  // throws InvalidStateError on bad values
};

struct PlantState {
  double p_h2;  // atm, anode hydrogen partial pressure
  double p_o2;  // atm, cathode oxygen partial pressure
  double p_n2;  // atm, cathode nitrogen partial pressure
};

struct PlantInputs {
  double q_h2;     // lpm
  double q_air;    // lpm
  double current;  // A, exogenous workload
};

struct Measurement {
  double v_fc;  // V, noisy stack voltage
  double p_h2;  // atm, noisy hydrogen pressure
};

// Time derivative of the partial pressures, atm/s per field.
PlantState plant_derivative(const PlantState& state, const PlantInputs& inputs,
                            const PlantParams& params);

// Classic RK4 over plant_derivative with internal substep <= 0.01 s.
// Pressures are clamped at zero from below after every substep.
PlantState plant_step(const PlantState& state, const PlantInputs& inputs,
                      const PlantParams& params, double dt);

struct PlantOutput {
  double v_fc;  // V
  double p_h2;  // atm
};

// Static polarization: Nernst potential minus activation, ohmic and
// concentration losses. Requires current < i_limit and positive reactant
// pressures.
PlantOutput plant_output(const PlantState& state, const PlantInputs& inputs,
                         const PlantParams& params);

struct NoiseStd {
  double v_fc;  // V
  double p_h2;  // atm
};

// True output plus independent zero-mean Gaussian noise.
Measurement measure(const PlantOutput& output, const NoiseStd& noise_std, Rng& rng);

// Algebraic flow-balance equilibrium for constant inputs. Used to seed
// simulations and as an independent oracle for the integrator.
PlantState plant_equilibrium(const PlantInputs& inputs, const PlantParams& params);

}  // namespace fcmpc
