//! Static validation metrics and the dynamic/hysteresis pipeline: cycle
//! segmentation, leaf-loop area, hysteresis ratio, dynamic response, and
//! constant-angle comparisons between designs.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::pneumatics::{ReferenceKind, ReferenceWaveform};

/// Time-synchronized trial record: reference pressure, measured pressure,
/// and bending angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub time_s: Vec<f64>,
    pub p_ref_kpa: Vec<f64>,
    pub p_meas_kpa: Vec<f64>,
    pub angle_deg: Vec<f64>,
}

impl TimeSeries {
    pub fn new(
        time_s: Vec<f64>,
        p_ref_kpa: Vec<f64>,
        p_meas_kpa: Vec<f64>,
        angle_deg: Vec<f64>,
    ) -> Result<Self> {
        let n = time_s.len();
        if p_ref_kpa.len() != n || p_meas_kpa.len() != n || angle_deg.len() != n {
            return Err(CoreError::InvalidInput(
                "time series columns must have equal length".into(),
            ));
        }
        if time_s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::InvalidInput(
                "time must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            time_s,
            p_ref_kpa,
            p_meas_kpa,
            angle_deg,
        })
    }

    pub fn len(&self) -> usize {
        self.time_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_s.is_empty()
    }
}

/// One closed pressure-angle loop with its metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisCycle {
    pub pressure_kpa: Vec<f64>,
    pub angle_deg: Vec<f64>,
    /// Shoelace area of the closed loop, kPa * deg.
    pub area_kpa_deg: f64,
    pub max_pressure_kpa: f64,
    pub max_angle_deg: f64,
    /// Loop area over the origin-anchored bounding rectangle.
    pub ratio: f64,
}

/// Per-design response curve: one point per peak-to-peak pressure trial,
/// sorted by the peak angle reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub points: Vec<ResponsePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    pub max_angle_deg: f64,
    pub hysteresis_ratio: f64,
    pub pkpk_pressure_kpa: f64,
}

impl ResponseCurve {
    pub fn new(mut points: Vec<ResponsePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(CoreError::InvalidInput("empty response curve".into()));
        }
        points.sort_by(|a, b| a.max_angle_deg.partial_cmp(&b.max_angle_deg).unwrap());
        for w in points.windows(2) {
            if w[1].max_angle_deg <= w[0].max_angle_deg
                || w[1].pkpk_pressure_kpa <= w[0].pkpk_pressure_kpa
            {
                return Err(CoreError::InvalidInput(
                    "max angle must increase strictly with peak-to-peak pressure".into(),
                ));
            }
        }
        Ok(Self { points })
    }

    pub fn angle_span(&self) -> (f64, f64) {
        (
            self.points.first().unwrap().max_angle_deg,
            self.points.last().unwrap().max_angle_deg,
        )
    }

    /// Hysteresis ratio at a peak angle, piecewise-linear between stored
    /// points and exact on them. No extrapolation.
    pub fn ratio_at(&self, angle_deg: f64) -> Result<f64> {
        let (lo, hi) = self.angle_span();
        if angle_deg < lo || angle_deg > hi {
            return Err(CoreError::OutOfRange {
                what: "angle_deg",
                value: angle_deg,
                lo,
                hi,
            });
        }
        let idx = self
            .points
            .partition_point(|p| p.max_angle_deg < angle_deg)
            .min(self.points.len() - 1)
            .max(1);
        let (a, b) = (&self.points[idx - 1], &self.points[idx]);
        if angle_deg == a.max_angle_deg {
            return Ok(a.hysteresis_ratio);
        }
        if angle_deg == b.max_angle_deg {
            return Ok(b.hysteresis_ratio);
        }
        let t = (angle_deg - a.max_angle_deg) / (b.max_angle_deg - a.max_angle_deg);
        Ok(a.hysteresis_ratio + t * (b.hysteresis_ratio - a.hysteresis_ratio))
    }
}

/// Model-vs-experiment agreement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rmse_deg: f64,
    /// RMSE over the experimental angle range.
    pub nrmse: f64,
}

/// Split a triangle trial into its cycles, one closed loop per reference
/// period (loops use the measured pressure). Splits fall on the reference
/// minima, i.e. cycle boundaries of the generating waveform.
pub fn segment_cycles(
    series: &TimeSeries,
    reference: &ReferenceWaveform,
) -> Result<Vec<HysteresisCycle>> {
    let cycles = match reference.kind {
        ReferenceKind::Triangle { cycles, .. } => cycles as usize,
        _ => {
            return Err(CoreError::InvalidInput(
                "cycle segmentation needs a triangle reference".into(),
            ))
        }
    };
    let spc = series.len() / cycles;
    if spc < 2 || series.len() < cycles {
        return Err(CoreError::InvalidInput(format!(
            "{} samples cannot hold {cycles} cycles",
            series.len()
        )));
    }
    if let Some(expected) = reference.samples_per_cycle() {
        if expected != spc {
            return Err(CoreError::InvalidInput(format!(
                "series length {} inconsistent with {} samples per cycle",
                series.len(),
                expected
            )));
        }
    }
    (0..cycles)
        .map(|k| {
            let lo = k * spc;
            let hi = lo + spc;
            build_cycle(
                series.p_meas_kpa[lo..hi].to_vec(),
                series.angle_deg[lo..hi].to_vec(),
            )
        })
        .collect()
}

fn build_cycle(pressure_kpa: Vec<f64>, angle_deg: Vec<f64>) -> Result<HysteresisCycle> {
    let area = shoelace_area(&pressure_kpa, &angle_deg)?;
    let max_p = pressure_kpa.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_a = angle_deg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ratio = if max_p > 0.0 && max_a > 0.0 {
        area / (max_p * max_a)
    } else if area == 0.0 {
        0.0
    } else {
        return Err(CoreError::InvalidInput(
            "bounding rectangle degenerate but loop area nonzero".into(),
        ));
    };
    Ok(HysteresisCycle {
        pressure_kpa,
        angle_deg,
        area_kpa_deg: area,
        max_pressure_kpa: max_p,
        max_angle_deg: max_a,
        ratio,
    })
}

/// Absolute shoelace area of the polygon closed by joining the last vertex
/// back to the first.
pub fn shoelace_area(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(CoreError::InvalidInput(format!(
            "polygon needs at least 3 points ({} given)",
            xs.len()
        )));
    }
    let n = xs.len();
    let mut acc = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        acc += xs[i] * ys[j] - xs[j] * ys[i];
    }
    Ok(0.5 * acc.abs())
}

/// Loop area of one cycle, kPa * deg.
pub fn loop_area(cycle: &HysteresisCycle) -> Result<f64> {
    shoelace_area(&cycle.pressure_kpa, &cycle.angle_deg)
}

/// Hysteresis ratio: loop area over the rectangle spanned by the axes and
/// the loop maxima.
pub fn hysteresis_ratio(cycle: &HysteresisCycle) -> Result<f64> {
    if !(cycle.max_pressure_kpa > 0.0) || !(cycle.max_angle_deg > 0.0) {
        return Err(CoreError::InvalidInput(
            "hysteresis ratio needs positive peak pressure and angle".into(),
        ));
    }
    Ok(loop_area(cycle)? / (cycle.max_pressure_kpa * cycle.max_angle_deg))
}

/// Dynamic response of a trial: the maximum bending angle reached.
pub fn dynamic_response(angle_deg: &[f64]) -> Result<f64> {
    if angle_deg.is_empty() {
        return Err(CoreError::InvalidInput("empty angle trace".into()));
    }
    Ok(angle_deg.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// How the twelve cycles of a trial are reduced to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CycleAggregate {
    #[default]
    Mean,
    PerCycle,
    /// One loop built from all cycles concatenated.
    Union,
}

/// Mean hysteresis ratio across a trial's cycles.
pub fn mean_ratio(cycles: &[HysteresisCycle]) -> Result<f64> {
    if cycles.is_empty() {
        return Err(CoreError::InvalidInput("no cycles".into()));
    }
    Ok(cycles.iter().map(|c| c.ratio).sum::<f64>() / cycles.len() as f64)
}

/// Constant-angle comparison of two designs' hysteresis ratios.
///
/// Interpolates both curves at `theta_deg` and reports
/// `(ratio_a, ratio_b, (ratio_a - ratio_b) / ratio_a)`: the fractional
/// improvement of `b` over `a`.
pub fn constant_angle_compare(
    a: &ResponseCurve,
    b: &ResponseCurve,
    theta_deg: f64,
) -> Result<(f64, f64, f64)> {
    let ra = a.ratio_at(theta_deg)?;
    let rb = b.ratio_at(theta_deg)?;
    if ra == 0.0 {
        return Err(CoreError::InvalidInput(
            "baseline ratio is zero; improvement undefined".into(),
        ));
    }
    Ok((ra, rb, (ra - rb) / ra))
}

/// Fractional increase of `improved` over `baseline`.
pub fn relative_improvement(baseline: f64, improved: f64) -> Result<f64> {
    if baseline == 0.0 {
        return Err(CoreError::InvalidInput(
            "baseline is zero; improvement undefined".into(),
        ));
    }
    Ok((improved - baseline) / baseline)
}

/// Compare a model angle-pressure curve against experimental points: the
/// model is interpolated at the experimental pressures, RMSE is taken over
/// the points, and NRMSE normalizes by the experimental angle range.
pub fn validate_static(
    model_curve: &[(f64, f64)],
    exp_points: &[(f64, f64)],
) -> Result<ValidationReport> {
    if exp_points.len() < 2 {
        return Err(CoreError::InvalidInput(
            "need at least 2 experimental points".into(),
        ));
    }
    if model_curve.len() < 2 {
        return Err(CoreError::InvalidInput(
            "need at least 2 model points".into(),
        ));
    }
    if model_curve.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(CoreError::InvalidInput(
            "model curve pressures must be strictly increasing".into(),
        ));
    }
    let (model_lo, model_hi) = (model_curve[0].0, model_curve[model_curve.len() - 1].0);
    let mut sum_sq = 0.0;
    let (mut a_lo, mut a_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (p, a) in exp_points {
        if *p < model_lo || *p > model_hi {
            return Err(CoreError::OutOfRange {
                what: "pressure_kpa",
                value: *p,
                lo: model_lo,
                hi: model_hi,
            });
        }
        let model_a = lerp_at(model_curve, *p);
        sum_sq += (model_a - a) * (model_a - a);
        a_lo = a_lo.min(*a);
        a_hi = a_hi.max(*a);
    }
    let rmse = (sum_sq / exp_points.len() as f64).sqrt();
    let range = a_hi - a_lo;
    if !(range > 0.0) {
        return Err(CoreError::InvalidInput(
            "experimental angle range is zero; NRMSE undefined".into(),
        ));
    }
    Ok(ValidationReport {
        rmse_deg: rmse,
        nrmse: rmse / range,
    })
}

fn lerp_at(curve: &[(f64, f64)], x: f64) -> f64 {
    let idx = curve
        .partition_point(|(cx, _)| *cx < x)
        .min(curve.len() - 1)
        .max(1);
    let (x0, y0) = curve[idx - 1];
    let (x1, y1) = curve[idx];
    if x == x0 {
        return y0;
    }
    if x == x1 {
        return y1;
    }
    y0 + (x - x0) / (x1 - x0) * (y1 - y0)
}

/// Steady-state angle per staircase level: the mean angle over the final
/// `settle_fraction` of each hold window.
pub fn steady_state_extract(
    series: &TimeSeries,
    reference: &ReferenceWaveform,
    settle_fraction: f64,
) -> Result<Vec<(f64, f64)>> {
    let (step_kpa, hold_s) = match reference.kind {
        ReferenceKind::Staircase { step_kpa, hold_s } => (step_kpa, hold_s),
        _ => {
            return Err(CoreError::InvalidInput(
                "steady-state extraction needs a staircase reference".into(),
            ))
        }
    };
    if !(settle_fraction > 0.0 && settle_fraction <= 1.0) {
        return Err(CoreError::InvalidValue {
            parameter: "settle_fraction",
            value: format!("{settle_fraction}"),
            constraint: "must lie in (0, 1]",
        });
    }
    let per_level = (hold_s * reference.sample_rate_hz).round() as usize;
    if per_level == 0 {
        return Err(CoreError::InvalidInput(
            "hold shorter than one sample".into(),
        ));
    }
    let levels = series.len() / per_level;
    if levels == 0 || series.len() % per_level != 0 {
        return Err(CoreError::InvalidInput(format!(
            "series length {} is not a whole number of {per_level}-sample holds",
            series.len()
        )));
    }
    let window = ((per_level as f64 * settle_fraction).round() as usize).max(1);
    if window > per_level {
        return Err(CoreError::InvalidInput(
            "settle window longer than the hold".into(),
        ));
    }
    Ok((0..levels)
        .map(|level| {
            let end = (level + 1) * per_level;
            let start = end - window;
            let mean =
                series.angle_deg[start..end].iter().sum::<f64>() / window as f64;
            (step_kpa * level as f64, mean)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_cycle() -> HysteresisCycle {
        build_cycle(
            vec![0.0, 10.0, 10.0, 0.0],
            vec![0.0, 0.0, 50.0, 50.0],
        )
        .unwrap()
    }

    #[test]
    fn rectangle_loop_area_and_ratio() {
        let c = rect_cycle();
        assert_eq!(c.area_kpa_deg, 500.0);
        assert_eq!(loop_area(&c).unwrap(), 500.0);
        // The loop IS its bounding rectangle.
        assert_eq!(hysteresis_ratio(&c).unwrap(), 1.0);
    }

    #[test]
    fn reversed_traversal_same_area() {
        let c = rect_cycle();
        let mut rev_p = c.pressure_kpa.clone();
        let mut rev_a = c.angle_deg.clone();
        rev_p.reverse();
        rev_a.reverse();
        assert_eq!(
            shoelace_area(&rev_p, &rev_a).unwrap(),
            c.area_kpa_deg
        );
    }

    #[test]
    fn cyclic_rotation_same_area() {
        let c = rect_cycle();
        for shift in 1..4 {
            let p: Vec<f64> = (0..4).map(|i| c.pressure_kpa[(i + shift) % 4]).collect();
            let a: Vec<f64> = (0..4).map(|i| c.angle_deg[(i + shift) % 4]).collect();
            assert_eq!(shoelace_area(&p, &a).unwrap(), c.area_kpa_deg);
        }
    }

    #[test]
    fn zero_area_loop_has_zero_ratio() {
        let c = build_cycle(vec![0.0, 10.0, 0.0, 10.0], vec![0.0, 5.0, 0.0, 5.0]);
        let c = c.unwrap();
        assert!(c.area_kpa_deg < 1e-12);
        assert!(hysteresis_ratio(&c).unwrap() < 1e-12);
    }

    #[test]
    fn degenerate_polygon_rejected() {
        assert!(shoelace_area(&[0.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn segment_cycles_splits_at_reference_minima() {
        let reference = ReferenceWaveform::triangle(1.0, 10.0, 3, 20.0);
        let p_ref = reference.samples().unwrap();
        let n = p_ref.len();
        let time: Vec<f64> = (0..n).map(|k| k as f64 / 20.0).collect();
        let angle: Vec<f64> = p_ref.iter().map(|p| 2.0 * p).collect();
        let series = TimeSeries::new(time, p_ref.clone(), p_ref, angle).unwrap();
        let cycles = segment_cycles(&series, &reference).unwrap();
        assert_eq!(cycles.len(), 3);
        for c in &cycles {
            assert_eq!(c.pressure_kpa.len(), 20);
            assert_eq!(c.pressure_kpa[0], 0.0); // each loop starts at a minimum
        }
        // Deterministic input: the loops are identical.
        for w in cycles.windows(2) {
            assert!((w[0].area_kpa_deg - w[1].area_kpa_deg).abs() < 1e-12);
        }
    }

    #[test]
    fn one_cycle_trial_one_loop() {
        let reference = ReferenceWaveform::triangle(1.0, 10.0, 1, 40.0);
        let p = reference.samples().unwrap();
        let n = p.len();
        let series = TimeSeries::new(
            (0..n).map(|k| k as f64 / 40.0).collect(),
            p.clone(),
            p.clone(),
            p.iter().map(|v| *v * 1.5).collect(),
        )
        .unwrap();
        assert_eq!(segment_cycles(&series, &reference).unwrap().len(), 1);
    }

    #[test]
    fn too_few_samples_rejected() {
        let series = TimeSeries::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
        )
        .unwrap();
        let reference = ReferenceWaveform::triangle(1.0, 10.0, 3, 20.0);
        assert!(segment_cycles(&series, &reference).is_err());
    }

    #[test]
    fn table_style_constant_angle_comparison() {
        let original = ResponseCurve::new(vec![
            ResponsePoint { max_angle_deg: 100.0, hysteresis_ratio: 0.30, pkpk_pressure_kpa: 45.0 },
            ResponsePoint { max_angle_deg: 140.0, hysteresis_ratio: 0.279, pkpk_pressure_kpa: 55.0 },
        ])
        .unwrap();
        let improved = ResponseCurve::new(vec![
            ResponsePoint { max_angle_deg: 93.0, hysteresis_ratio: 0.21, pkpk_pressure_kpa: 40.0 },
            ResponsePoint { max_angle_deg: 140.0, hysteresis_ratio: 0.219, pkpk_pressure_kpa: 45.0 },
            ResponsePoint { max_angle_deg: 190.0, hysteresis_ratio: 0.25, pkpk_pressure_kpa: 50.0 },
        ])
        .unwrap();
        let (ra, rb, imp) = constant_angle_compare(&original, &improved, 140.0).unwrap();
        assert_eq!(ra, 0.279);
        assert_eq!(rb, 0.219);
        assert!((imp - 0.215).abs() < 0.003);
    }

    #[test]
    fn identical_curves_zero_improvement() {
        let c = ResponseCurve::new(vec![
            ResponsePoint { max_angle_deg: 50.0, hysteresis_ratio: 0.3, pkpk_pressure_kpa: 40.0 },
            ResponsePoint { max_angle_deg: 90.0, hysteresis_ratio: 0.25, pkpk_pressure_kpa: 50.0 },
        ])
        .unwrap();
        let (_, _, imp) = constant_angle_compare(&c, &c, 70.0).unwrap();
        assert_eq!(imp, 0.0);
    }

    #[test]
    fn no_extrapolation() {
        let c = ResponseCurve::new(vec![
            ResponsePoint { max_angle_deg: 50.0, hysteresis_ratio: 0.3, pkpk_pressure_kpa: 40.0 },
            ResponsePoint { max_angle_deg: 90.0, hysteresis_ratio: 0.25, pkpk_pressure_kpa: 50.0 },
        ])
        .unwrap();
        assert!(c.ratio_at(49.9).is_err());
        assert!(c.ratio_at(90.1).is_err());
        assert_eq!(c.ratio_at(50.0).unwrap(), 0.3);
        assert_eq!(c.ratio_at(90.0).unwrap(), 0.25);
    }

    #[test]
    fn improvement_antisymmetry_identity() {
        let (ra, rb): (f64, f64) = (0.279, 0.219);
        let i_ab = (ra - rb) / ra;
        let i_ba = (rb - ra) / rb;
        assert!((i_ab - (-i_ba / (1.0 - i_ba))).abs() < 1e-12);
    }

    #[test]
    fn dynamic_response_is_the_peak() {
        assert_eq!(dynamic_response(&[0.0, 10.0, 45.44, 3.0]).unwrap(), 45.44);
        assert_eq!(dynamic_response(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(dynamic_response(&[]).is_err());
    }

    #[test]
    fn validation_exact_and_offset() {
        let model: Vec<(f64, f64)> = (0..=10).map(|k| (5.0 * k as f64, 2.0 * k as f64 * 5.0)).collect();
        let exact: Vec<(f64, f64)> = vec![(0.0, 0.0), (25.0, 50.0), (50.0, 100.0)];
        let r = validate_static(&model, &exact).unwrap();
        assert_eq!(r.rmse_deg, 0.0);
        assert_eq!(r.nrmse, 0.0);

        // +2 deg offset over a 0-100 deg span: RMSE 2 deg, NRMSE 2%.
        let offset: Vec<(f64, f64)> = exact.iter().map(|(p, a)| (*p, a - 2.0)).collect();
        let r = validate_static(&model, &offset).unwrap();
        assert!((r.rmse_deg - 2.0).abs() < 1e-12);
        assert!((r.nrmse - 0.02).abs() < 1e-12);

        assert!(validate_static(&model, &[(0.0, 0.0)]).is_err());
        assert!(validate_static(&model, &[(60.0, 1.0), (61.0, 2.0)]).is_err());
    }

    #[test]
    fn steady_state_extraction() {
        let reference = ReferenceWaveform::staircase(5.0, 1.0, 50.0, 100.0);
        let p_ref = reference.samples().unwrap();
        let n = p_ref.len();
        let time: Vec<f64> = (0..n).map(|k| k as f64 / 100.0).collect();

        // Constant angle per level.
        let angle: Vec<f64> = p_ref.iter().map(|p| 3.0 * p).collect();
        let series = TimeSeries::new(time.clone(), p_ref.clone(), p_ref.clone(), angle).unwrap();
        let pts = steady_state_extract(&series, &reference, 0.2).unwrap();
        assert_eq!(pts.len(), 11);
        for (i, (p, a)) in pts.iter().enumerate() {
            assert_eq!(*p, 5.0 * i as f64);
            assert!((a - 3.0 * p).abs() < 1e-12);
        }

        // First-order settling with tau much shorter than the hold lands on
        // the asymptote.
        let tau = 0.02_f64;
        let mut angle = Vec::with_capacity(n);
        let mut y = 0.0_f64;
        for p in &p_ref {
            let target = 2.0 * p;
            y += (target - y) * (1.0 - (-0.01 / tau).exp());
            angle.push(y);
        }
        let series = TimeSeries::new(time, p_ref.clone(), p_ref, angle).unwrap();
        let pts = steady_state_extract(&series, &reference, 0.2).unwrap();
        for (p, a) in pts.iter().skip(1) {
            let asymptote = 2.0 * p;
            assert!(
                (a - asymptote).abs() / asymptote < 1e-3,
                "level {p}: {a} vs {asymptote}"
            );
        }
    }

    #[test]
    fn hold_too_short_is_an_error() {
        let reference = ReferenceWaveform::staircase(5.0, 0.001, 50.0, 100.0);
        let series = TimeSeries::new(
            vec![0.0, 0.01, 0.02],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(steady_state_extract(&series, &reference, 0.2).is_err());
    }
}
