//! Closed-loop trial simulation: reference -> PWM controller -> valve line ->
//! plant, sampled at the controller rate.
//!
//! Triangle trials run a configurable number of unrecorded warmup cycles
//! first so the recorded cycles are in the periodic steady state (the play
//! memories entrain after one full sweep; the fill lag converges
//! geometrically).

use serde::{Deserialize, Serialize};

use crate::actuator_sim::{Plant, PlantState};
use crate::analysis::TimeSeries;
use crate::error::{CoreError, Result};
use crate::pneumatics::{
    inflate_fraction, pwm_step, ControllerConfig, ControllerState, PressureLine, ReferenceKind,
    ReferenceWaveform,
};

/// Rig-level configuration shared by all trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigConfig {
    /// Supply pressure behind the inflate valve, kPa gauge.
    pub supply_kpa: f64,
    /// First-order time constant of the valve line node, seconds.
    pub line_time_constant_s: f64,
    /// Unrecorded triangle cycles run before recording starts.
    pub warmup_cycles: u32,
    /// Bypass the controller and the line: the plant is commanded with the
    /// reference directly.
    pub open_loop: bool,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            supply_kpa: 100.0,
            line_time_constant_s: 0.35,
            warmup_cycles: 5,
            open_loop: false,
        }
    }
}

impl RigConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.supply_kpa > 0.0) || !(self.line_time_constant_s > 0.0) {
            return Err(CoreError::InvalidValue {
                parameter: "rig",
                value: format!(
                    "supply {} kPa, line tau {} s",
                    self.supply_kpa, self.line_time_constant_s
                ),
                constraint: "supply and line time constant must be positive",
            });
        }
        Ok(())
    }
}

/// Run one trial and return the recorded series.
///
/// The supply must sit above the reference peak, otherwise the inflate valve
/// can never reach it.
pub fn simulate_trial(
    plant: &Plant,
    reference: &ReferenceWaveform,
    controller: &ControllerConfig,
    rig: &RigConfig,
) -> Result<TimeSeries> {
    reference.validate()?;
    controller.validate()?;
    rig.validate()?;
    if !rig.open_loop && rig.supply_kpa <= reference.peak_to_peak_kpa {
        return Err(CoreError::InvalidValue {
            parameter: "supply_kpa",
            value: format!("{}", rig.supply_kpa),
            constraint: "supply must exceed the reference peak",
        });
    }

    let recorded = reference.samples()?;
    let dt = 1.0 / reference.sample_rate_hz;

    // Warmup: whole cycles replayed ahead of the recording.
    let warmup: Vec<f64> = match (reference.kind, reference.samples_per_cycle()) {
        (ReferenceKind::Triangle { .. }, Some(spc)) if rig.warmup_cycles > 0 => {
            let cycle = &recorded[..spc.min(recorded.len())];
            std::iter::repeat(cycle)
                .take(rig.warmup_cycles as usize)
                .flatten()
                .cloned()
                .collect()
        }
        _ => Vec::new(),
    };

    let mut plant_state: PlantState = plant.initial_state();
    let mut ctrl = ControllerState::default();
    let mut line = PressureLine::new(rig.supply_kpa, rig.line_time_constant_s)?;

    let run = |samples: &[f64],
                   record: bool,
                   plant_state: &mut PlantState,
                   ctrl: &mut ControllerState,
                   line: &mut PressureLine|
     -> Result<Option<TimeSeries>> {
        let mut time = record.then(|| Vec::with_capacity(samples.len()));
        let mut p_meas = record.then(|| Vec::with_capacity(samples.len()));
        let mut angle = record.then(|| Vec::with_capacity(samples.len()));
        for (k, &r) in samples.iter().enumerate() {
            let commanded = if rig.open_loop {
                r
            } else {
                let phase_before = ctrl.carrier_phase_s;
                let (next, _valve) = pwm_step(ctrl, r, line.pressure_kpa, dt, controller)?;
                let open =
                    inflate_fraction(phase_before, dt, next.duty, controller.pwm_period_s);
                *ctrl = next;
                line.step(open, dt);
                line.pressure_kpa
            };
            plant.step_dynamics(plant_state, commanded, dt)?;
            if record {
                time.as_mut().unwrap().push(k as f64 * dt);
                p_meas.as_mut().unwrap().push(commanded);
                angle.as_mut().unwrap().push(plant_state.bending_angle_deg());
            }
        }
        if record {
            Ok(Some(TimeSeries::new(
                time.unwrap(),
                samples.to_vec(),
                p_meas.unwrap(),
                angle.unwrap(),
            )?))
        } else {
            Ok(None)
        }
    };

    run(&warmup, false, &mut plant_state, &mut ctrl, &mut line)?;
    let series = run(&recorded, true, &mut plant_state, &mut ctrl, &mut line)?;
    Ok(series.expect("recording pass returns a series"))
}
