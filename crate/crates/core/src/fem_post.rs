//! Post-processing of exported per-element FEM fields: longitudinal slicing,
//! per-slice stress distributions, center-slice maximum, and peak nominal
//! strain.
//!
//! Field CSV schema: `x_mm,y_mm,z_mm,von_mises_MPa,max_prin_nominal_strain,layer`
//! with `layer` either `extensible` or `inextensible`. Inextensible-layer
//! elements are excluded from every stress statistic (their stresses sit an
//! order of magnitude above the silicone and would drown the scales).

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Which layer an element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Extensible,
    Inextensible,
}

/// One exported element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressElement {
    pub centroid_mm: [f64; 3],
    pub von_mises_mpa: f64,
    pub max_principal_nominal_strain: f64,
    pub layer: Layer,
}

/// A full exported field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressField {
    pub elements: Vec<StressElement>,
}

impl StressField {
    pub fn new(elements: Vec<StressElement>) -> Result<Self> {
        for (i, e) in elements.iter().enumerate() {
            if !(e.von_mises_mpa >= 0.0) {
                return Err(CoreError::InvalidInput(format!(
                    "element {i}: von Mises stress {} must be non-negative",
                    e.von_mises_mpa
                )));
            }
            if !(e.max_principal_nominal_strain >= -1.0) {
                return Err(CoreError::InvalidInput(format!(
                    "element {i}: nominal strain {} below -1",
                    e.max_principal_nominal_strain
                )));
            }
        }
        Ok(Self { elements })
    }

    pub fn extensible(&self) -> impl Iterator<Item = &StressElement> {
        self.elements
            .iter()
            .filter(|e| e.layer == Layer::Extensible)
    }
}

/// Slicing axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    #[default]
    Y,
    Z,
}

impl Axis {
    fn index(&self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Quantiles of one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceStats {
    pub p5: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
    pub max: f64,
}

/// Summary of one longitudinal slice. `stats` is absent for empty slices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceSummary {
    pub slice_index: usize,
    pub count: usize,
    pub stats: Option<SliceStats>,
}

/// Parse a field CSV.
pub fn load_field<R: BufRead>(reader: R) -> Result<StressField> {
    const HEADER: &str = "x_mm,y_mm,z_mm,von_mises_MPa,max_prin_nominal_strain,layer";
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == HEADER => {}
        Some((_, Ok(h))) => {
            return Err(CoreError::Parse {
                line: 1,
                message: format!("header must be {HEADER:?}, got {h:?}"),
            })
        }
        Some((_, Err(e))) => {
            return Err(CoreError::Parse {
                line: 1,
                message: e.to_string(),
            })
        }
        None => {
            return Err(CoreError::Parse {
                line: 1,
                message: "missing header".into(),
            })
        }
    }

    let mut elements = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| CoreError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 6 {
            return Err(CoreError::Parse {
                line: line_no,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| CoreError::Parse {
                line: line_no,
                message: format!("bad {what}: {s:?}"),
            })
        };
        let x = parse_f(fields[0], "x_mm")?;
        let y = parse_f(fields[1], "y_mm")?;
        let z = parse_f(fields[2], "z_mm")?;
        let vm = parse_f(fields[3], "von_mises_MPa")?;
        let strain = parse_f(fields[4], "max_prin_nominal_strain")?;
        let layer = match fields[5].trim() {
            "extensible" => Layer::Extensible,
            "inextensible" => Layer::Inextensible,
            other => {
                return Err(CoreError::Parse {
                    line: line_no,
                    message: format!("layer must be extensible|inextensible, got {other:?}"),
                })
            }
        };
        if !(vm >= 0.0) {
            return Err(CoreError::Parse {
                line: line_no,
                message: format!("negative von Mises stress {vm}"),
            });
        }
        if !(strain >= -1.0) {
            return Err(CoreError::Parse {
                line: line_no,
                message: format!("nominal strain {strain} below -1"),
            });
        }
        elements.push(StressElement {
            centroid_mm: [x, y, z],
            von_mises_mpa: vm,
            max_principal_nominal_strain: strain,
            layer,
        });
    }
    StressField::new(elements)
}

/// Emit a field in the same CSV schema `load_field` reads.
pub fn write_field_csv(field: &StressField) -> String {
    use crate::kinematics::fmt_f64;
    let mut out = String::from("x_mm,y_mm,z_mm,von_mises_MPa,max_prin_nominal_strain,layer\n");
    for e in &field.elements {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(e.centroid_mm[0]),
            fmt_f64(e.centroid_mm[1]),
            fmt_f64(e.centroid_mm[2]),
            fmt_f64(e.von_mises_mpa),
            fmt_f64(e.max_principal_nominal_strain),
            match e.layer {
                Layer::Extensible => "extensible",
                Layer::Inextensible => "inextensible",
            }
        ));
    }
    out
}

/// Quantile by linear interpolation between order statistics on a sorted
/// slice (`q` in [0, 1]).
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Bin index over `[lo, hi]` split into `n` equal slices, with exact
/// boundary values assigned to the lower bin.
fn bin_index(value: f64, lo: f64, hi: f64, n: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let w = (hi - lo) / n as f64;
    if value <= lo {
        return 0;
    }
    let idx = ((value - lo) / w).ceil() as usize;
    idx.saturating_sub(1).min(n - 1)
}

/// Split the extensible elements into `n_slices` equal-width bins along
/// `axis` and summarize each bin's stress distribution.
pub fn slice_longitudinal(
    field: &StressField,
    n_slices: usize,
    axis: Axis,
) -> Result<Vec<SliceSummary>> {
    if n_slices == 0 {
        return Err(CoreError::InvalidInput("n_slices must be positive".into()));
    }
    let coords: Vec<(f64, f64)> = field
        .extensible()
        .map(|e| (e.centroid_mm[axis.index()], e.von_mises_mpa))
        .collect();
    if coords.is_empty() {
        return Err(CoreError::InvalidInput(
            "no extensible elements to slice".into(),
        ));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (c, _) in &coords {
        lo = lo.min(*c);
        hi = hi.max(*c);
    }
    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); n_slices];
    for (c, vm) in coords {
        bins[bin_index(c, lo, hi, n_slices)].push(vm);
    }
    Ok(bins
        .into_iter()
        .enumerate()
        .map(|(i, mut values)| {
            let count = values.len();
            let stats = if count == 0 {
                None
            } else {
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                Some(SliceStats {
                    p5: quantile_sorted(&values, 0.05),
                    p25: quantile_sorted(&values, 0.25),
                    p50: quantile_sorted(&values, 0.50),
                    p75: quantile_sorted(&values, 0.75),
                    p95: quantile_sorted(&values, 0.95),
                    max: *values.last().unwrap(),
                })
            };
            SliceSummary {
                slice_index: i,
                count,
                stats,
            }
        })
        .collect())
}

/// Maximum stress of the center region: the combined max of the two middle
/// slices of a 20-slice division.
pub fn center_slice_max(field: &StressField) -> Result<f64> {
    let slices = slice_longitudinal(field, 20, Axis::Y)?;
    let center = slices[9..=10]
        .iter()
        .filter_map(|s| s.stats.map(|st| st.max))
        .fold(f64::NEG_INFINITY, f64::max);
    if center.is_finite() {
        Ok(center)
    } else {
        Err(CoreError::InvalidInput(
            "center slices contain no extensible elements".into(),
        ))
    }
}

/// Peak max-principal nominal strain over the extensible elements.
pub fn max_nominal_strain(field: &StressField) -> Result<f64> {
    field
        .extensible()
        .map(|e| e.max_principal_nominal_strain)
        .fold(None, |acc: Option<f64>, s| {
            Some(acc.map_or(s, |a| a.max(s)))
        })
        .ok_or_else(|| CoreError::InvalidInput("no extensible elements".into()))
}
