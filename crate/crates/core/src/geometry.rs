//! Parametric pneu-net design family.
//!
//! A design is a chain of box-shaped air chambers over a central air channel.
//! Variants vary exactly one of five parameters (chamber length, width,
//! height, side-wall thickness, top-wall thickness) piecewise-linearly and
//! symmetrically along the chain: the value ramps with constant slope from
//! each end to the center. Chamber-dimension variants are rescaled so the
//! total internal air volume equals the unvaried design's.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Baseline dimensions shared by every chamber of the unvaried design.
/// All lengths in mm, the channel cross-section in mm².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseDims {
    pub chamber_length: f64,
    pub chamber_width: f64,
    pub chamber_height: f64,
    pub side_thickness: f64,
    pub top_thickness: f64,
    pub chamber_count: usize,
    /// Cross-section of the central air channel connecting the chambers.
    pub channel_cross_section: f64,
    /// Longitudinal gap between adjacent chambers.
    pub chamber_gap: f64,
}

impl BaseDims {
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 6] = [
            ("chamber_length", self.chamber_length),
            ("chamber_width", self.chamber_width),
            ("chamber_height", self.chamber_height),
            ("side_thickness", self.side_thickness),
            ("top_thickness", self.top_thickness),
            ("chamber_gap", self.chamber_gap),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidValue {
                    parameter: name,
                    value: format!("{v}"),
                    constraint: "must be strictly positive",
                });
            }
        }
        if !(self.channel_cross_section >= 0.0) || !self.channel_cross_section.is_finite() {
            return Err(CoreError::InvalidValue {
                parameter: "channel_cross_section",
                value: format!("{}", self.channel_cross_section),
                constraint: "must be non-negative",
            });
        }
        if self.chamber_count < 3 {
            return Err(CoreError::InvalidValue {
                parameter: "chamber_count",
                value: format!("{}", self.chamber_count),
                constraint: "need at least 3 chambers so a center exists",
            });
        }
        Ok(())
    }
}

/// Which of the five geometric parameters a variant changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariedParameter {
    Length,
    Width,
    Height,
    SideThickness,
    TopThickness,
    None,
}

impl VariedParameter {
    /// True for length/width/height, which change the air volume and
    /// therefore require the volume-conserving rescale.
    pub fn is_chamber_dimension(&self) -> bool {
        matches!(self, Self::Length | Self::Width | Self::Height)
    }
}

/// Whether the varied value shrinks or grows toward the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    MidSmaller,
    MidLarger,
    None,
}

/// One variant of the design family: the varied parameter, the direction of
/// variation, and the center-to-end ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationSpec {
    pub parameter: VariedParameter,
    pub direction: Direction,
    pub center_ratio: f64,
}

impl VariationSpec {
    /// The unvaried design.
    pub fn original() -> Self {
        Self {
            parameter: VariedParameter::None,
            direction: Direction::None,
            center_ratio: 1.0,
        }
    }

    /// Variant with the conventional default ratio: one half toward the
    /// center for shrinking chamber dimensions, double for growing ones, and
    /// 1.5x for thickened walls.
    pub fn with_default_ratio(parameter: VariedParameter, direction: Direction) -> Self {
        let center_ratio = match (parameter.is_chamber_dimension(), direction) {
            (_, Direction::None) => 1.0,
            (true, Direction::MidSmaller) => 0.5,
            (true, Direction::MidLarger) => 2.0,
            (false, Direction::MidSmaller) => 1.0 / 1.5,
            (false, Direction::MidLarger) => 1.5,
        };
        Self {
            parameter,
            direction,
            center_ratio,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_ratio > 0.0) || !self.center_ratio.is_finite() {
            return Err(CoreError::InvalidValue {
                parameter: "center_ratio",
                value: format!("{}", self.center_ratio),
                constraint: "must be strictly positive",
            });
        }
        let param_none = self.parameter == VariedParameter::None;
        let dir_none = self.direction == Direction::None;
        if param_none != dir_none {
            return Err(CoreError::InvalidValue {
                parameter: "variation",
                value: format!("{:?}/{:?}", self.parameter, self.direction),
                constraint: "parameter None exactly when direction None",
            });
        }
        match self.direction {
            Direction::None if self.center_ratio != 1.0 => Err(CoreError::InvalidValue {
                parameter: "center_ratio",
                value: format!("{}", self.center_ratio),
                constraint: "must be 1.0 for the unvaried design",
            }),
            Direction::MidSmaller if self.center_ratio > 1.0 => Err(CoreError::InvalidValue {
                parameter: "center_ratio",
                value: format!("{}", self.center_ratio),
                constraint: "mid-smaller variation needs ratio <= 1",
            }),
            Direction::MidLarger if self.center_ratio < 1.0 => Err(CoreError::InvalidValue {
                parameter: "center_ratio",
                value: format!("{}", self.center_ratio),
                constraint: "mid-larger variation needs ratio >= 1",
            }),
            _ => Ok(()),
        }
    }
}

/// Dimensions of one chamber. All mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamberDims {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub side_thickness: f64,
    pub top_thickness: f64,
}

impl ChamberDims {
    pub fn validate(&self) -> Result<()> {
        let fields: [(&'static str, f64); 5] = [
            ("length", self.length),
            ("width", self.width),
            ("height", self.height),
            ("side_thickness", self.side_thickness),
            ("top_thickness", self.top_thickness),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidValue {
                    parameter: name,
                    value: format!("{v}"),
                    constraint: "chamber dimension must be strictly positive",
                });
            }
        }
        Ok(())
    }

    /// Internal box volume, mm³.
    pub fn box_volume(&self) -> f64 {
        self.length * self.width * self.height
    }
}

/// A fully resolved design variant: the per-chamber dimensions from end to
/// end plus the base and variation that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorDesign {
    pub name: String,
    /// Plot legend identity.
    pub color_tag: String,
    pub chambers: Vec<ChamberDims>,
    pub base: BaseDims,
    pub variation: VariationSpec,
}

impl ActuatorDesign {
    /// Longitudinal extent of the chamber chain: chamber lengths plus gaps.
    pub fn longitudinal_span(&self) -> f64 {
        let lengths: f64 = self.chambers.iter().map(|c| c.length).sum();
        lengths + (self.chambers.len().saturating_sub(1)) as f64 * self.base.chamber_gap
    }

    /// Total internal air volume: chamber boxes plus the channel prism
    /// spanning the chain.
    pub fn internal_volume(&self) -> f64 {
        chamber_volume_total(&self.chambers)
            + self.base.channel_cross_section * self.longitudinal_span()
    }
}

/// Sum of chamber box volumes, mm³.
pub fn chamber_volume_total(chambers: &[ChamberDims]) -> f64 {
    chambers.iter().map(ChamberDims::box_volume).sum()
}

/// Per-chamber multipliers of the varied parameter: 1 at both ends,
/// `center_ratio` at the center, constant slope in between. Symmetric; for an
/// even count the two middle chambers share the center value.
pub fn variation_profile(chamber_count: usize, center_ratio: f64) -> Vec<f64> {
    let n = chamber_count;
    let d_max = if n % 2 == 0 { n / 2 - 1 } else { (n - 1) / 2 };
    (0..n)
        .map(|i| {
            let d = i.min(n - 1 - i).min(d_max);
            if d_max == 0 {
                center_ratio
            } else {
                1.0 + (center_ratio - 1.0) * d as f64 / d_max as f64
            }
        })
        .collect()
}

/// End value of the varied chamber dimension such that the variant's chamber
/// volume total equals the unvaried design's.
///
/// Volume is linear in the varied dimension at fixed profile shape, so the
/// answer is the original chamber volume total divided by the
/// profile-weighted sum of the other two dimensions. (The channel term needs
/// no correction: for length variation the channel span rescales with the
/// same factor on both sides of the balance, and width/height variation does
/// not touch it.)
pub fn solve_base_for_volume(base: &BaseDims, variation: &VariationSpec) -> Result<f64> {
    base.validate()?;
    variation.validate()?;
    if !variation.parameter.is_chamber_dimension() {
        return Err(CoreError::InvalidInput(format!(
            "{:?} is not a chamber dimension; only length/width/height need a volume solve",
            variation.parameter
        )));
    }
    let profile = variation_profile(base.chamber_count, variation.center_ratio);
    let other_product = match variation.parameter {
        VariedParameter::Length => base.chamber_width * base.chamber_height,
        VariedParameter::Width => base.chamber_length * base.chamber_height,
        VariedParameter::Height => base.chamber_length * base.chamber_width,
        _ => unreachable!(),
    };
    let weighted: f64 = profile.iter().map(|w| w * other_product).sum();
    let original_total = base.chamber_count as f64
        * base.chamber_length
        * base.chamber_width
        * base.chamber_height;
    let end_value = original_total / weighted;
    if !(end_value > 0.0) || !end_value.is_finite() {
        return Err(CoreError::ConstraintInfeasible {
            parameter: "chamber dimension",
            value: end_value,
        });
    }
    Ok(end_value)
}

fn variant_label(variation: &VariationSpec) -> (&'static str, &'static str) {
    use Direction as D;
    use VariedParameter as P;
    match (variation.parameter, variation.direction) {
        (P::None, _) => ("original", "red"),
        (P::SideThickness, D::MidLarger) => ("mid_side_walls_thicker", "pink"),
        (P::SideThickness, D::MidSmaller) => ("mid_side_walls_thinner", "pink"),
        (P::TopThickness, D::MidLarger) => ("mid_top_wall_thicker", "yellow"),
        (P::TopThickness, D::MidSmaller) => ("mid_top_wall_thinner", "yellow"),
        (P::Length, D::MidSmaller) => ("mid_length_smaller", "green"),
        (P::Width, D::MidSmaller) => ("mid_width_smaller", "purple"),
        (P::Height, D::MidSmaller) => ("mid_height_smaller", "brown"),
        (P::Length, D::MidLarger) => ("mid_length_larger", "blue"),
        (P::Width, D::MidLarger) => ("mid_width_larger", "black"),
        (P::Height, D::MidLarger) => ("mid_height_larger", "orange"),
        _ => ("custom", "gray"),
    }
}

/// Build one design variant.
///
/// Chamber-dimension variants first solve for the end value that conserves
/// the internal volume, then apply the symmetric profile. Wall-thickness
/// variants apply the profile to the base thickness directly, leaving every
/// chamber volume untouched.
pub fn generate_design(base: &BaseDims, variation: &VariationSpec) -> Result<ActuatorDesign> {
    base.validate()?;
    variation.validate()?;

    let n = base.chamber_count;
    let profile = variation_profile(n, variation.center_ratio);

    let end_value = match variation.parameter {
        VariedParameter::None => 0.0,
        p if p.is_chamber_dimension() => solve_base_for_volume(base, variation)?,
        VariedParameter::SideThickness => base.side_thickness,
        VariedParameter::TopThickness => base.top_thickness,
        _ => unreachable!(),
    };

    let chambers: Vec<ChamberDims> = (0..n)
        .map(|i| {
            let mut ch = ChamberDims {
                length: base.chamber_length,
                width: base.chamber_width,
                height: base.chamber_height,
                side_thickness: base.side_thickness,
                top_thickness: base.top_thickness,
            };
            let v = end_value * profile[i];
            match variation.parameter {
                VariedParameter::Length => ch.length = v,
                VariedParameter::Width => ch.width = v,
                VariedParameter::Height => ch.height = v,
                VariedParameter::SideThickness => ch.side_thickness = v,
                VariedParameter::TopThickness => ch.top_thickness = v,
                VariedParameter::None => {}
            }
            ch
        })
        .collect();

    for ch in &chambers {
        ch.validate()?;
    }

    let (name, color) = variant_label(variation);
    Ok(ActuatorDesign {
        name: name.to_string(),
        color_tag: color.to_string(),
        chambers,
        base: *base,
        variation: *variation,
    })
}

/// The nine-member family: the original, the two wall-thickened variants,
/// and the six chamber-dimension variants (each of length/width/height,
/// shrinking and growing toward the center) at the default ratios.
pub fn design_family(base: &BaseDims) -> Result<Vec<ActuatorDesign>> {
    use Direction::*;
    use VariedParameter::*;
    let variants = [
        VariationSpec::original(),
        VariationSpec::with_default_ratio(SideThickness, MidLarger),
        VariationSpec::with_default_ratio(TopThickness, MidLarger),
        VariationSpec::with_default_ratio(Length, MidSmaller),
        VariationSpec::with_default_ratio(Width, MidSmaller),
        VariationSpec::with_default_ratio(Height, MidSmaller),
        VariationSpec::with_default_ratio(Length, MidLarger),
        VariationSpec::with_default_ratio(Width, MidLarger),
        VariationSpec::with_default_ratio(Height, MidLarger),
    ];
    variants
        .iter()
        .map(|v| generate_design(base, v))
        .collect()
}
