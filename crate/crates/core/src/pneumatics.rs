//! Reference waveforms and the closed-loop pressure controller: a
//! proportional-duty PWM valve pair with a first-order low-pass on the sensed
//! pressure.
//!
//! The valve pair either connects the supply (inflate) or the exhaust; the
//! line between the valves and the actuator inlet is modeled as a first-order
//! pressure node, which is what the sensor reads.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Shape of a commanded reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ReferenceKind {
    /// Steps of `step_kpa`, each held `hold_s` seconds, from zero up to the
    /// peak.
    Staircase { step_kpa: f64, hold_s: f64 },
    /// Symmetric rising/falling ramps between zero and the peak.
    Triangle { frequency_hz: f64, cycles: u32 },
}

/// A sampled pressure reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceWaveform {
    #[serde(flatten)]
    pub kind: ReferenceKind,
    pub peak_to_peak_kpa: f64,
    pub sample_rate_hz: f64,
}

impl ReferenceWaveform {
    pub fn staircase(step_kpa: f64, hold_s: f64, max_kpa: f64, sample_rate_hz: f64) -> Self {
        Self {
            kind: ReferenceKind::Staircase { step_kpa, hold_s },
            peak_to_peak_kpa: max_kpa,
            sample_rate_hz,
        }
    }

    pub fn triangle(frequency_hz: f64, peak_to_peak_kpa: f64, cycles: u32, sample_rate_hz: f64) -> Self {
        Self {
            kind: ReferenceKind::Triangle {
                frequency_hz,
                cycles,
            },
            peak_to_peak_kpa,
            sample_rate_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_to_peak_kpa > 0.0) {
            return Err(CoreError::InvalidValue {
                parameter: "peak_to_peak_kpa",
                value: format!("{}", self.peak_to_peak_kpa),
                constraint: "must be positive",
            });
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(CoreError::InvalidValue {
                parameter: "sample_rate_hz",
                value: format!("{}", self.sample_rate_hz),
                constraint: "must be positive",
            });
        }
        match self.kind {
            ReferenceKind::Staircase { step_kpa, hold_s } => {
                if !(step_kpa > 0.0) || !(hold_s > 0.0) {
                    return Err(CoreError::InvalidValue {
                        parameter: "staircase",
                        value: format!("step {step_kpa} kPa, hold {hold_s} s"),
                        constraint: "step and hold must be positive",
                    });
                }
            }
            ReferenceKind::Triangle {
                frequency_hz,
                cycles,
            } => {
                if cycles < 1 {
                    return Err(CoreError::InvalidValue {
                        parameter: "cycles",
                        value: format!("{cycles}"),
                        constraint: "need at least one cycle",
                    });
                }
                if !(self.sample_rate_hz > 2.0 * frequency_hz) {
                    return Err(CoreError::InvalidValue {
                        parameter: "sample_rate_hz",
                        value: format!("{}", self.sample_rate_hz),
                        constraint: "must exceed twice the triangle frequency",
                    });
                }
            }
        }
        Ok(())
    }

    /// Sample the reference over its full duration.
    pub fn samples(&self) -> Result<Vec<f64>> {
        self.validate()?;
        match self.kind {
            ReferenceKind::Staircase { step_kpa, hold_s } => {
                staircase(step_kpa, hold_s, self.peak_to_peak_kpa, self.sample_rate_hz)
            }
            ReferenceKind::Triangle {
                frequency_hz,
                cycles,
            } => triangle(
                frequency_hz,
                self.peak_to_peak_kpa,
                cycles,
                self.sample_rate_hz,
            ),
        }
    }

    /// Samples per triangle cycle, if the rate divides the period evenly.
    pub fn samples_per_cycle(&self) -> Option<usize> {
        match self.kind {
            ReferenceKind::Triangle { frequency_hz, .. } => {
                integer_samples_per_cycle(self.sample_rate_hz, frequency_hz)
            }
            _ => None,
        }
    }
}

fn integer_samples_per_cycle(rate_hz: f64, frequency_hz: f64) -> Option<usize> {
    let spc = rate_hz / frequency_hz;
    let rounded = spc.round();
    if (spc - rounded).abs() < 1e-9 * spc.max(1.0) && rounded >= 2.0 {
        Some(rounded as usize)
    } else {
        None
    }
}

/// Staircase reference: levels 0, step, 2*step, ... up to `max_kpa`, each
/// held for `hold_s`. The step must divide the maximum.
pub fn staircase(step_kpa: f64, hold_s: f64, max_kpa: f64, rate_hz: f64) -> Result<Vec<f64>> {
    if !(step_kpa > 0.0) || !(hold_s > 0.0) || !(max_kpa > 0.0) || !(rate_hz > 0.0) {
        return Err(CoreError::InvalidInput(
            "staircase parameters must be positive".into(),
        ));
    }
    let levels_f = max_kpa / step_kpa;
    let levels = levels_f.round();
    if (levels_f - levels).abs() > 1e-9 * levels_f.max(1.0) {
        return Err(CoreError::InvalidValue {
            parameter: "step_kpa",
            value: format!("{step_kpa}"),
            constraint: "step must divide the staircase maximum",
        });
    }
    let per_level = (hold_s * rate_hz).round() as usize;
    if per_level == 0 {
        return Err(CoreError::InvalidValue {
            parameter: "hold_s",
            value: format!("{hold_s}"),
            constraint: "hold shorter than one sample",
        });
    }
    let levels = levels as usize + 1;
    let mut out = Vec::with_capacity(levels * per_level);
    for level in 0..levels {
        let value = step_kpa * level as f64;
        out.extend(std::iter::repeat(value).take(per_level));
    }
    Ok(out)
}

/// Triangle reference: `cycles` periods of symmetric 0 -> peak -> 0 ramps.
///
/// When the sample rate divides the period, the phase is computed from the
/// integer sample index modulo the samples-per-cycle, which makes the cycles
/// bit-identical.
pub fn triangle(frequency_hz: f64, pkpk_kpa: f64, cycles: u32, rate_hz: f64) -> Result<Vec<f64>> {
    if cycles < 1 {
        return Err(CoreError::InvalidValue {
            parameter: "cycles",
            value: format!("{cycles}"),
            constraint: "need at least one cycle",
        });
    }
    if !(frequency_hz > 0.0) || !(pkpk_kpa > 0.0) || !(rate_hz > 2.0 * frequency_hz) {
        return Err(CoreError::InvalidInput(
            "triangle needs positive frequency/amplitude and rate above Nyquist".into(),
        ));
    }
    let total = (cycles as f64 * rate_hz / frequency_hz).round() as usize;
    if let Some(spc) = integer_samples_per_cycle(rate_hz, frequency_hz) {
        let value_at = |j: usize| -> f64 {
            let phase = j as f64 / spc as f64;
            if phase < 0.5 {
                pkpk_kpa * 2.0 * phase
            } else {
                pkpk_kpa * (2.0 - 2.0 * phase)
            }
        };
        Ok((0..total).map(|k| value_at(k % spc)).collect())
    } else {
        Ok((0..total)
            .map(|k| {
                let t = k as f64 / rate_hz;
                let phase = (t * frequency_hz).fract();
                if phase < 0.5 {
                    pkpk_kpa * 2.0 * phase
                } else {
                    pkpk_kpa * (2.0 - 2.0 * phase)
                }
            })
            .collect())
    }
}

/// One step of the discrete first-order low-pass `y += alpha (x - y)` with
/// `alpha = dt / (dt + 1 / (2 pi cutoff))`. Unit DC gain.
pub fn lowpass_step(prev_filtered: f64, raw: f64, cutoff_hz: f64, dt_s: f64) -> Result<f64> {
    if !(dt_s > 0.0) || !(cutoff_hz > 0.0) {
        return Err(CoreError::InvalidInput(
            "lowpass needs positive dt and cutoff".into(),
        ));
    }
    let rc = 1.0 / (2.0 * std::f64::consts::PI * cutoff_hz);
    let alpha = dt_s / (dt_s + rc);
    Ok(prev_filtered + alpha * (raw - prev_filtered))
}

/// Valve-pair command: exactly one of the two valves is open at any instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValveCommand {
    Inflate,
    Exhaust,
}

/// Controller configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Proportional gain, duty fraction per kPa of filtered error.
    pub gain_per_kpa: f64,
    /// PWM carrier period, seconds.
    pub pwm_period_s: f64,
    pub lowpass_cutoff_hz: f64,
    pub sample_rate_hz: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            gain_per_kpa: 2.0,
            pwm_period_s: 0.010,
            lowpass_cutoff_hz: 5.0,
            sample_rate_hz: 400.0,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gain_per_kpa", self.gain_per_kpa),
            ("pwm_period_s", self.pwm_period_s),
            ("lowpass_cutoff_hz", self.lowpass_cutoff_hz),
            ("sample_rate_hz", self.sample_rate_hz),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidValue {
                    parameter: name,
                    value: format!("{v}"),
                    constraint: "must be positive",
                });
            }
        }
        Ok(())
    }
}

/// Controller state carried between samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    /// Low-passed sensed pressure, kPa.
    pub filtered_pressure: f64,
    /// Duty fraction in [0, 1].
    pub duty: f64,
    pub valve_state: ValveCommand,
    /// Position inside the PWM carrier, seconds.
    pub carrier_phase_s: f64,
}

impl Default for ControllerState {
    fn default() -> Self {
        Self {
            filtered_pressure: 0.0,
            duty: 0.0,
            valve_state: ValveCommand::Exhaust,
            carrier_phase_s: 0.0,
        }
    }
}

/// One controller sample: filter the sensed pressure, set the duty from the
/// proportional error, and derive the valve command from the carrier phase.
/// Returns the updated state and the command at the start of this sample.
pub fn pwm_step(
    ctrl: &ControllerState,
    ref_kpa: f64,
    sensed_kpa: f64,
    dt_s: f64,
    cfg: &ControllerConfig,
) -> Result<(ControllerState, ValveCommand)> {
    if !(dt_s > 0.0) {
        return Err(CoreError::InvalidInput(format!(
            "dt {dt_s} must be positive"
        )));
    }
    let filtered = lowpass_step(ctrl.filtered_pressure, sensed_kpa, cfg.lowpass_cutoff_hz, dt_s)?;
    let duty = (cfg.gain_per_kpa * (ref_kpa - filtered)).clamp(0.0, 1.0);
    let valve = if ctrl.carrier_phase_s < duty * cfg.pwm_period_s {
        ValveCommand::Inflate
    } else {
        ValveCommand::Exhaust
    };
    let mut phase = ctrl.carrier_phase_s + dt_s;
    while phase >= cfg.pwm_period_s {
        phase -= cfg.pwm_period_s;
    }
    let next = ControllerState {
        filtered_pressure: filtered,
        duty,
        valve_state: valve,
        carrier_phase_s: phase,
    };
    Ok((next, valve))
}

/// Fraction of the interval `[phase, phase + dt)` the inflate valve is open,
/// given the duty and carrier period. The carrier may wrap within the
/// interval.
pub fn inflate_fraction(phase_s: f64, dt_s: f64, duty: f64, period_s: f64) -> f64 {
    if duty <= 0.0 {
        return 0.0;
    }
    if duty >= 1.0 {
        return 1.0;
    }
    let on = duty * period_s;
    let mut remaining = dt_s;
    let mut phase = phase_s;
    let mut open = 0.0;
    // dt is assumed small relative to the period; walk carrier windows.
    while remaining > 0.0 {
        let window = (period_s - phase).min(remaining);
        let open_in_window = (on - phase).clamp(0.0, window);
        open += open_in_window;
        remaining -= window;
        phase += window;
        if phase >= period_s {
            phase = 0.0;
        }
    }
    (open / dt_s).clamp(0.0, 1.0)
}

/// The pressure node between the valve pair and the actuator inlet; this is
/// what the sensor reads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLine {
    pub pressure_kpa: f64,
    pub supply_kpa: f64,
    pub time_constant_s: f64,
}

impl PressureLine {
    pub fn new(supply_kpa: f64, time_constant_s: f64) -> Result<Self> {
        if !(supply_kpa > 0.0) || !(time_constant_s > 0.0) {
            return Err(CoreError::InvalidInput(
                "line supply and time constant must be positive".into(),
            ));
        }
        Ok(Self {
            pressure_kpa: 0.0,
            supply_kpa,
            time_constant_s,
        })
    }

    /// Advance the node by `dt_s` with the inflate valve open for
    /// `inflate_fraction` of the interval: exact exponential relaxation
    /// toward the supply for the open piece and toward atmosphere for the
    /// rest.
    pub fn step(&mut self, inflate_fraction: f64, dt_s: f64) {
        let f = inflate_fraction.clamp(0.0, 1.0);
        let relax = |p: f64, target: f64, t: f64| -> f64 {
            target + (p - target) * (-t / self.time_constant_s).exp()
        };
        let p1 = relax(self.pressure_kpa, self.supply_kpa, f * dt_s);
        self.pressure_kpa = relax(p1, 0.0, (1.0 - f) * dt_s);
    }
}

/// Root-mean-square tracking error and its range-normalized form.
pub fn tracking_error(reference: &[f64], measured: &[f64]) -> Result<(f64, f64)> {
    if reference.is_empty() || reference.len() != measured.len() {
        return Err(CoreError::InvalidInput(format!(
            "tracking_error needs equal non-empty sequences (got {} and {})",
            reference.len(),
            measured.len()
        )));
    }
    let sum_sq: f64 = reference
        .iter()
        .zip(measured)
        .map(|(r, m)| (r - m) * (r - m))
        .sum();
    let rmse = (sum_sq / reference.len() as f64).sqrt();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in reference {
        lo = lo.min(*r);
        hi = hi.max(*r);
    }
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(CoreError::InvalidInput(
            "reference range is zero; NRMSE undefined".into(),
        ));
    }
    Ok((rmse, rmse / range))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase_shape() {
        let s = staircase(5.0, 10.0, 50.0, 400.0).unwrap();
        assert_eq!(s.len(), 11 * 4000);
        assert_eq!(s[0], 0.0);
        assert_eq!(*s.last().unwrap(), 50.0);
        // 11 distinct levels, each constant over its hold.
        for level in 0..11 {
            let seg = &s[level * 4000..(level + 1) * 4000];
            assert!(seg.iter().all(|v| *v == 5.0 * level as f64));
        }
    }

    #[test]
    fn two_level_staircase() {
        let s = staircase(50.0, 1.0, 50.0, 400.0).unwrap();
        assert_eq!(s.len(), 2 * 400);
        assert!(s[..400].iter().all(|v| *v == 0.0));
        assert!(s[400..].iter().all(|v| *v == 50.0));
    }

    #[test]
    fn non_divisible_step_rejected() {
        assert!(staircase(7.0, 1.0, 50.0, 400.0).is_err());
    }

    #[test]
    fn triangle_duration_and_peaks() {
        let t = triangle(0.0625, 45.0, 12, 400.0).unwrap();
        assert_eq!(t.len(), 76800); // 192 s at 400 Hz
        let spc = 6400;
        for cycle in 0..12 {
            let peak = t[cycle * spc + spc / 2];
            assert_eq!(peak, 45.0, "cycle {cycle} peak");
        }
        let max = t.iter().cloned().fold(0.0_f64, f64::max);
        assert_eq!(max, 45.0);

        let fast = triangle(0.25, 40.0, 1, 400.0).unwrap();
        assert_eq!(fast.len(), 1600); // 4 s
        assert_eq!(fast.iter().cloned().fold(0.0_f64, f64::max), 40.0);
    }

    #[test]
    fn triangle_cycles_are_bit_identical() {
        let t = triangle(0.0625, 55.0, 3, 400.0).unwrap();
        let spc = 6400;
        for k in 0..spc {
            assert_eq!(t[k], t[k + spc]);
            assert_eq!(t[k], t[k + 2 * spc]);
        }
    }

    #[test]
    fn lowpass_dc_gain_and_fixed_point() {
        let cutoff = 5.0;
        let dt = 1.0 / 400.0;
        // Constant input converges to the input.
        let mut y = 0.0;
        let settle = (5.0 / (2.0 * std::f64::consts::PI * cutoff) / dt).ceil() as usize;
        for _ in 0..settle {
            y = lowpass_step(y, 10.0, cutoff, dt).unwrap();
        }
        assert!((y - 10.0).abs() < 0.1 * 10.0 * 0.1); // within 1%
        assert!((y - 10.0).abs() / 10.0 < 0.01);

        // raw == prev is a fixed point.
        assert_eq!(lowpass_step(3.5, 3.5, cutoff, dt).unwrap(), 3.5);
    }

    #[test]
    fn lowpass_step_response_crosses_at_the_time_constant() {
        let cutoff = 5.0;
        let dt = 1.0 / 400.0;
        let rc = 1.0 / (2.0 * std::f64::consts::PI * cutoff);
        let mut y = 0.0;
        let target = 1.0 - (-1.0_f64).exp(); // 63.21%
        let mut prev = 0.0;
        let mut crossing = None;
        for n in 1..200 {
            y = lowpass_step(y, 1.0, cutoff, dt).unwrap();
            if y >= target {
                // Fractional crossing between samples n-1 and n.
                let frac = (target - prev) / (y - prev);
                crossing = Some((n as f64 - 1.0 + frac) * dt);
                break;
            }
            prev = y;
        }
        let t_cross = crossing.expect("no crossing");
        assert!(
            (t_cross - rc).abs() <= dt,
            "crossing {t_cross} vs RC {rc} off by more than one sample"
        );
    }

    #[test]
    fn duty_saturates_and_deadbands() {
        let cfg = ControllerConfig::default();
        let state = ControllerState {
            filtered_pressure: 20.0,
            ..ControllerState::default()
        };
        // ref == filtered sensed: zero duty.
        let (s, _) = pwm_step(&state, 20.0, 20.0, 0.0025, &cfg).unwrap();
        assert_eq!(s.duty, 0.0);
        // ref far above: saturated inflate.
        let (s, v) = pwm_step(&state, 90.0, 20.0, 0.0025, &cfg).unwrap();
        assert_eq!(s.duty, 1.0);
        assert_eq!(v, ValveCommand::Inflate);
    }

    #[test]
    fn duty_always_within_unit_interval() {
        let cfg = ControllerConfig::default();
        let mut state = ControllerState::default();
        for k in 0..4000 {
            let r = 30.0 * ((k as f64 / 100.0).sin().abs());
            let sensed = 60.0 * ((k as f64 / 37.0).cos().abs());
            let (next, _) = pwm_step(&state, r, sensed, 0.0025, &cfg).unwrap();
            assert!((0.0..=1.0).contains(&next.duty));
            state = next;
        }
    }

    #[test]
    fn inflate_fraction_matches_duty_over_whole_carriers() {
        let period = 0.010;
        for &duty in &[0.0, 0.3, 0.5, 0.77, 1.0] {
            let mut open = 0.0;
            let dt = 0.0025;
            let mut phase = 0.0;
            for _ in 0..4 {
                open += inflate_fraction(phase, dt, duty, period) * dt;
                phase += dt;
                if phase >= period {
                    phase -= period;
                }
            }
            assert!(
                (open - duty * period).abs() < 1e-12,
                "duty {duty}: open {open}"
            );
        }
    }

    #[test]
    fn line_relaxes_toward_supply_and_atmosphere() {
        let mut line = PressureLine::new(100.0, 0.2).unwrap();
        for _ in 0..4000 {
            line.step(1.0, 0.0025);
        }
        assert!((line.pressure_kpa - 100.0).abs() < 1e-6);
        for _ in 0..4000 {
            line.step(0.0, 0.0025);
        }
        assert!(line.pressure_kpa.abs() < 1e-6);
    }

    #[test]
    fn tracking_error_arithmetic() {
        let r = triangle(0.25, 55.0, 2, 400.0).unwrap();
        let m: Vec<f64> = r.iter().map(|v| v + 0.4).collect();
        let (rmse, nrmse) = tracking_error(&r, &m).unwrap();
        assert!((rmse - 0.4).abs() < 1e-12);
        assert!((nrmse - 0.4 / 55.0).abs() < 1e-12);
        assert!((nrmse - 0.00727).abs() < 1e-4);

        let (rmse, nrmse) = tracking_error(&r, &r.clone()).unwrap();
        assert_eq!(rmse, 0.0);
        assert_eq!(nrmse, 0.0);

        assert!(tracking_error(&[1.0, 1.0], &[1.0, 2.0]).is_err()); // zero range
        assert!(tracking_error(&[], &[]).is_err());
    }

    #[test]
    fn filter_output_bounded_by_input_extremes() {
        let cutoff = 5.0;
        let dt = 1.0 / 400.0;
        let mut y = 0.0;
        let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
        for k in 0..10000 {
            let x = 25.0 + 20.0 * (k as f64 * 0.013).sin();
            lo = lo.min(x);
            hi = hi.max(x);
            y = lowpass_step(y, x, cutoff, dt).unwrap();
            assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
        }
    }
}
