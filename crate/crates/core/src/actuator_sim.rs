//! Reduced-order actuator model: a chain of chamber segments, each with a
//! quasi-static bending equilibrium, plus first-order pneumatic fill lag and
//! a rate-independent backlash element.
//!
//! Per segment, the equilibrium balances the pressure expansion moment
//! against the elastic resistance of the stretched wall material:
//!
//! ```text
//! p * cv * w * h^2 * cos(sigma * theta)  =  V_wall * G * P(1 + G * theta)
//! ```
//!
//! where `G = (h + t_top) / (2 L)` converts segment angle to outer-fiber
//! stretch, `P` is the uniaxial nominal stress of the Yeoh material, and
//! `V_wall` is the stretched wall volume. The `cos` factor collapses the
//! expansion moment as the segment folds open, which caps each segment at
//! `90 / sigma` degrees and gives the angle-pressure curve its saturating
//! shape. Interior chambers push on their neighbors, so the chain applies a
//! center-weighted load factor on top of the common pressure.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fem_post::{Layer, StressElement, StressField};
use crate::geometry::{ActuatorDesign, ChamberDims};
use crate::material::{uniaxial_nominal_stress, YeohCoefficients};

/// Number of longitudinal bins used by the stress-distribution comparisons.
pub const STRESS_SLICES: usize = 20;

const THETA_TOL_RAD: f64 = 1e-10;
const MAX_BISECT: usize = 200;

/// Geometric tuning constants of the segment model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentGeometry {
    /// Scale of the expansion moment `cv * w * h^2` (per mm, per rad).
    pub expansion_coeff: f64,
    /// Sharpness of the moment collapse; segment angle saturates at
    /// `90 / saturation_sharpness` degrees.
    pub saturation_sharpness: f64,
    /// Peak of the center-weighted load factor: the middle of the chain sees
    /// `(1 + center_coupling)` times the applied pressure, the ends 1x.
    pub center_coupling: f64,
}

impl Default for SegmentGeometry {
    fn default() -> Self {
        // Calibrated against the design-family orderings; see the
        // family_orderings tests.
        Self {
            expansion_coeff: 3.6,
            saturation_sharpness: 2.4,
            center_coupling: 0.8,
        }
    }
}

/// State of one chamber segment at equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentState {
    /// Bending contribution, degrees.
    pub theta_deg: f64,
    /// Outer-fiber wall stretch.
    pub wall_stretch: f64,
    /// Uniaxial nominal stress at the wall stretch, same units as the Yeoh
    /// coefficients (kPa).
    pub stress_proxy: f64,
}

impl SegmentState {
    fn relaxed() -> Self {
        Self {
            theta_deg: 0.0,
            wall_stretch: 1.0,
            stress_proxy: 0.0,
        }
    }
}

/// Dynamic parameters of the plant surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    /// First-order fill lag of the internal pressure, seconds. Zero disables
    /// the lag (internal pressure tracks the command exactly).
    pub fill_time_constant_s: f64,
    /// Strength of the backlash superposition; zero disables it.
    pub hysteresis_weight: f64,
    /// Play-operator thresholds, kPa.
    pub hysteresis_backlash_widths_kpa: Vec<f64>,
    pub geometry: SegmentGeometry,
}

impl Default for PlantParams {
    fn default() -> Self {
        // hysteresis_weight calibrated with `pneunet sim calibrate` so the
        // original design at 0.0625 Hz / 55 kPa peak-to-peak lands at a
        // hysteresis ratio of ~0.28.
        Self {
            fill_time_constant_s: 1.2,
            hysteresis_weight: 0.35,
            hysteresis_backlash_widths_kpa: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            geometry: SegmentGeometry::default(),
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fill_time_constant_s >= 0.0) || !self.fill_time_constant_s.is_finite() {
            return Err(CoreError::InvalidValue {
                parameter: "fill_time_constant_s",
                value: format!("{}", self.fill_time_constant_s),
                constraint: "must be non-negative (zero disables the lag)",
            });
        }
        if !(self.hysteresis_weight >= 0.0) {
            return Err(CoreError::InvalidValue {
                parameter: "hysteresis_weight",
                value: format!("{}", self.hysteresis_weight),
                constraint: "must be non-negative",
            });
        }
        if self
            .hysteresis_backlash_widths_kpa
            .iter()
            .any(|r| !(*r > 0.0))
        {
            return Err(CoreError::InvalidValue {
                parameter: "hysteresis_backlash_widths_kpa",
                value: format!("{:?}", self.hysteresis_backlash_widths_kpa),
                constraint: "all thresholds must be positive",
            });
        }
        Ok(())
    }
}

/// Full dynamic state of the plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub internal_pressure_kpa: f64,
    pub segments: Vec<SegmentState>,
    /// One play-operator memory per backlash threshold.
    pub hysteresis_memory: Vec<f64>,
}

impl PlantState {
    /// Total bending angle, degrees.
    pub fn bending_angle_deg(&self) -> f64 {
        self.segments.iter().map(|s| s.theta_deg).sum()
    }
}

/// Center-weighted load factors for an `n`-chamber chain: 1 at the ends,
/// `1 + coupling` at the center, linear in between.
pub fn chain_load_factors(n: usize, coupling: f64) -> Vec<f64> {
    let d_max = if n % 2 == 0 { n / 2 - 1 } else { (n - 1) / 2 };
    (0..n)
        .map(|i| {
            let d = i.min(n - 1 - i).min(d_max);
            if d_max == 0 {
                1.0 + coupling
            } else {
                1.0 + coupling * d as f64 / d_max as f64
            }
        })
        .collect()
}

fn stretch_gain(ch: &ChamberDims) -> f64 {
    (ch.height + ch.top_thickness) / (2.0 * ch.length)
}

fn wall_volume(ch: &ChamberDims) -> f64 {
    2.0 * ch.height * ch.length * ch.side_thickness + ch.width * ch.length * ch.top_thickness
}

fn solve_segment(
    ch: &ChamberDims,
    pressure_kpa: f64,
    c: &YeohCoefficients,
    geo: &SegmentGeometry,
) -> Result<SegmentState> {
    if !(pressure_kpa >= 0.0) || !pressure_kpa.is_finite() {
        return Err(CoreError::InvalidInput(format!(
            "segment pressure {pressure_kpa} kPa must be non-negative"
        )));
    }
    if pressure_kpa == 0.0 {
        return Ok(SegmentState::relaxed());
    }

    let g = stretch_gain(ch);
    let v_wall = wall_volume(ch);
    let drive = pressure_kpa * geo.expansion_coeff * ch.width * ch.height * ch.height;

    // Elastic moment minus expansion moment; strictly increasing in theta.
    let residual = |theta: f64| -> Result<f64> {
        let elastic = v_wall * g * uniaxial_nominal_stress(1.0 + g * theta, c)?;
        let moment_arg = geo.saturation_sharpness * theta;
        let expansion = if moment_arg >= std::f64::consts::FRAC_PI_2 {
            0.0
        } else {
            drive * moment_arg.cos()
        };
        Ok(elastic - expansion)
    };

    let cap = (std::f64::consts::FRAC_PI_2 / geo.saturation_sharpness)
        .min(std::f64::consts::FRAC_PI_2);
    if residual(cap)? < 0.0 {
        return Err(CoreError::Saturation {
            pressure_kpa,
            limit_deg: cap.to_degrees(),
        });
    }

    let mut lo = 0.0_f64;
    let mut hi = cap;
    for _ in 0..MAX_BISECT {
        if hi - lo <= THETA_TOL_RAD {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if residual(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let stretch = 1.0 + g * theta;
    Ok(SegmentState {
        theta_deg: theta.to_degrees(),
        wall_stretch: stretch,
        stress_proxy: uniaxial_nominal_stress(stretch, c)?,
    })
}

/// Quasi-static bending contribution of a single chamber under pressure,
/// degrees, with the default segment geometry.
pub fn static_segment_angle(ch: &ChamberDims, pressure_kpa: f64, c: &YeohCoefficients) -> Result<f64> {
    static_segment_angle_with(ch, pressure_kpa, c, &SegmentGeometry::default())
}

/// Same as [`static_segment_angle`] with explicit tuning constants.
pub fn static_segment_angle_with(
    ch: &ChamberDims,
    pressure_kpa: f64,
    c: &YeohCoefficients,
    geo: &SegmentGeometry,
) -> Result<f64> {
    Ok(solve_segment(ch, pressure_kpa, c, geo)?.theta_deg)
}

/// Equilibrium state of every segment of a design at a common pressure.
pub fn static_segments_with(
    design: &ActuatorDesign,
    pressure_kpa: f64,
    c: &YeohCoefficients,
    geo: &SegmentGeometry,
) -> Result<Vec<SegmentState>> {
    let factors = chain_load_factors(design.chambers.len(), geo.center_coupling);
    design
        .chambers
        .iter()
        .zip(factors)
        .map(|(ch, a)| solve_segment(ch, a * pressure_kpa, c, geo))
        .collect()
}

/// Quasi-static bending angle of a whole design, degrees: the sum of the
/// per-chamber segment angles.
pub fn static_angle(design: &ActuatorDesign, pressure_kpa: f64, c: &YeohCoefficients) -> Result<f64> {
    static_angle_with(design, pressure_kpa, c, &SegmentGeometry::default())
}

/// Same as [`static_angle`] with explicit tuning constants.
pub fn static_angle_with(
    design: &ActuatorDesign,
    pressure_kpa: f64,
    c: &YeohCoefficients,
    geo: &SegmentGeometry,
) -> Result<f64> {
    Ok(static_segments_with(design, pressure_kpa, c, geo)?
        .iter()
        .map(|s| s.theta_deg)
        .sum())
}

/// Per-segment stress proxies resampled onto [`STRESS_SLICES`] equal
/// longitudinal bins. Bin values are overlap-weighted means of the chamber
/// stresses; a bin that only covers gap takes the nearest chamber's value.
pub fn stress_slices_proxy(
    design: &ActuatorDesign,
    pressure_kpa: f64,
    c: &YeohCoefficients,
) -> Result<Vec<f64>> {
    stress_slices_proxy_with(design, pressure_kpa, c, &SegmentGeometry::default())
}

/// Same as [`stress_slices_proxy`] with explicit tuning constants.
pub fn stress_slices_proxy_with(
    design: &ActuatorDesign,
    pressure_kpa: f64,
    c: &YeohCoefficients,
    geo: &SegmentGeometry,
) -> Result<Vec<f64>> {
    let segments = static_segments_with(design, pressure_kpa, c, geo)?;
    let spans = chamber_spans(design);
    let total = design.longitudinal_span();
    let bin_w = total / STRESS_SLICES as f64;

    let mut out = Vec::with_capacity(STRESS_SLICES);
    for b in 0..STRESS_SLICES {
        let lo = b as f64 * bin_w;
        let hi = lo + bin_w;
        let mut weighted = 0.0;
        let mut weight = 0.0;
        for (i, (start, end)) in spans.iter().enumerate() {
            let overlap = (hi.min(*end) - lo.max(*start)).max(0.0);
            weighted += overlap * segments[i].stress_proxy;
            weight += overlap;
        }
        if weight > 0.0 {
            out.push(weighted / weight);
        } else {
            let mid = 0.5 * (lo + hi);
            let nearest = spans
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    let da = (0.5 * (a.0 + a.1) - mid).abs();
                    let db = (0.5 * (b.0 + b.1) - mid).abs();
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            out.push(segments[nearest].stress_proxy);
        }
    }
    Ok(out)
}

fn chamber_spans(design: &ActuatorDesign) -> Vec<(f64, f64)> {
    let mut spans = Vec::with_capacity(design.chambers.len());
    let mut cursor = 0.0;
    for (i, ch) in design.chambers.iter().enumerate() {
        if i > 0 {
            cursor += design.base.chamber_gap;
        }
        spans.push((cursor, cursor + ch.length));
        cursor += ch.length;
    }
    spans
}

/// Export the equilibrium as a per-element stress field in the layout the
/// post-processing module ingests. Each chamber contributes
/// `elements_per_chamber` extensible elements spread over its span, plus one
/// inextensible base-layer element carrying an order-of-magnitude higher
/// stress (those get filtered out downstream).
pub fn stress_field(
    design: &ActuatorDesign,
    pressure_kpa: f64,
    c: &YeohCoefficients,
    elements_per_chamber: usize,
) -> Result<StressField> {
    stress_field_with(
        design,
        pressure_kpa,
        c,
        &SegmentGeometry::default(),
        elements_per_chamber,
    )
}

/// Same as [`stress_field`] with explicit tuning constants.
pub fn stress_field_with(
    design: &ActuatorDesign,
    pressure_kpa: f64,
    c: &YeohCoefficients,
    geo: &SegmentGeometry,
    elements_per_chamber: usize,
) -> Result<StressField> {
    if elements_per_chamber == 0 {
        return Err(CoreError::InvalidInput(
            "elements_per_chamber must be at least 1".into(),
        ));
    }
    let segments = static_segments_with(design, pressure_kpa, c, geo)?;
    let spans = chamber_spans(design);
    let mut elements = Vec::new();
    for (i, (start, end)) in spans.iter().enumerate() {
        let seg = &segments[i];
        let stress_mpa = seg.stress_proxy / 1000.0;
        let strain = seg.wall_stretch - 1.0;
        for k in 0..elements_per_chamber {
            let frac = (k as f64 + 0.5) / elements_per_chamber as f64;
            let y = start + frac * (end - start);
            elements.push(StressElement {
                centroid_mm: [0.0, y, design.chambers[i].height * 0.5],
                von_mises_mpa: stress_mpa,
                max_principal_nominal_strain: strain,
                layer: Layer::Extensible,
            });
        }
        elements.push(StressElement {
            centroid_mm: [0.0, 0.5 * (start + end), -1.0],
            von_mises_mpa: 10.0 * stress_mpa.max(0.1),
            max_principal_nominal_strain: 0.0,
            layer: Layer::Inextensible,
        });
    }
    StressField::new(elements)
}

/// Backlash superposition: updates the play memories in place and returns
/// the effective pressure `x + weight * mean_j(play_j(x) - x)`, clamped to
/// be non-negative.
pub fn hysteresis_effective_pressure(
    memory: &mut [f64],
    input_kpa: f64,
    widths_kpa: &[f64],
    weight: f64,
) -> f64 {
    debug_assert_eq!(memory.len(), widths_kpa.len());
    if widths_kpa.is_empty() || weight == 0.0 {
        for (m, _) in memory.iter_mut().zip(widths_kpa) {
            *m = input_kpa;
        }
        return input_kpa.max(0.0);
    }
    let mut deviation = 0.0;
    for (m, r) in memory.iter_mut().zip(widths_kpa) {
        *m = (input_kpa - r).max((input_kpa + r).min(*m));
        deviation += *m - input_kpa;
    }
    let effective = input_kpa + weight * deviation / widths_kpa.len() as f64;
    effective.max(0.0)
}

/// The plant: a design, its material, and the dynamic parameters.
#[derive(Debug, Clone)]
pub struct Plant {
    pub design: ActuatorDesign,
    pub material: YeohCoefficients,
    pub params: PlantParams,
}

impl Plant {
    pub fn new(design: ActuatorDesign, material: YeohCoefficients, params: PlantParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            design,
            material,
            params,
        })
    }

    /// Relaxed state at zero pressure.
    pub fn initial_state(&self) -> PlantState {
        PlantState {
            internal_pressure_kpa: 0.0,
            segments: vec![SegmentState::relaxed(); self.design.chambers.len()],
            hysteresis_memory: vec![0.0; self.params.hysteresis_backlash_widths_kpa.len()],
        }
    }

    /// Advance the plant by `dt_s` toward `commanded_pressure_kpa`: exact
    /// first-order fill update, backlash superposition, then the quasi-static
    /// segment equilibria at the effective pressure.
    pub fn step_dynamics(
        &self,
        state: &mut PlantState,
        commanded_pressure_kpa: f64,
        dt_s: f64,
    ) -> Result<()> {
        if !(dt_s > 0.0) {
            return Err(CoreError::InvalidInput(format!(
                "dt {dt_s} must be positive"
            )));
        }
        let tau = self.params.fill_time_constant_s;
        if tau > 0.0 {
            let alpha = 1.0 - (-dt_s / tau).exp();
            state.internal_pressure_kpa +=
                alpha * (commanded_pressure_kpa - state.internal_pressure_kpa);
        } else {
            state.internal_pressure_kpa = commanded_pressure_kpa;
        }
        state.internal_pressure_kpa = state.internal_pressure_kpa.max(0.0);

        let effective = hysteresis_effective_pressure(
            &mut state.hysteresis_memory,
            state.internal_pressure_kpa,
            &self.params.hysteresis_backlash_widths_kpa,
            self.params.hysteresis_weight,
        );

        state.segments =
            static_segments_with(&self.design, effective, &self.material, &self.params.geometry)?;
        Ok(())
    }
}
