//! Bending-angle extraction, either from tracked 2D keypoints (experimental
//! path) or from end-face normal vectors (simulation/FEM path).
//!
//! The bending angle is the angle between the fixed-end direction (first two
//! keypoints) and the moving-end direction (last two keypoints), reported in
//! `[0, 360)` degrees. Angles beyond 180 are resolved by the sign of the 2D
//! cross product against a configurable bending orientation.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Rotation direction that counts as positive bending in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BendOrientation {
    #[default]
    CounterClockwise,
    Clockwise,
}

/// One tracked point with its tracker confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub likelihood: f64,
}

/// One frame of tracked keypoints, ordered from the fixed end to the moving
/// end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointFrame {
    pub timestamp_s: f64,
    pub points: Vec<Keypoint>,
    /// Set when any point's likelihood fell below the parse threshold. The
    /// frame is kept; downstream analysis decides the policy.
    pub flagged: bool,
}

impl KeypointFrame {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 4 {
            return Err(CoreError::InvalidInput(format!(
                "keypoint frame needs at least 4 points, got {}",
                self.points.len()
            )));
        }
        Ok(())
    }
}

/// A timestamped angle sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSample {
    pub timestamp_s: f64,
    pub angle_deg: f64,
}

fn wrap_to_positive(deg: f64) -> f64 {
    if deg < 0.0 {
        deg + 360.0
    } else {
        deg
    }
}

/// Angle in `[0, 360)` degrees between the fixed-end vector and the
/// moving-end vector of a frame.
pub fn angle_from_keypoints(frame: &KeypointFrame, orientation: BendOrientation) -> Result<f64> {
    frame.validate()?;
    let n = frame.points.len();
    let (p0, p1) = (&frame.points[0], &frame.points[1]);
    let (q0, q1) = (&frame.points[n - 2], &frame.points[n - 1]);
    let v1 = (p1.x - p0.x, p1.y - p0.y);
    let v2 = (q1.x - q0.x, q1.y - q0.y);
    for (name, v) in [("fixed-end", v1), ("moving-end", v2)] {
        if v.0 == 0.0 && v.1 == 0.0 {
            return Err(CoreError::InvalidInput(format!(
                "degenerate frame: coincident {name} point pair"
            )));
        }
    }
    let cross = v1.0 * v2.1 - v1.1 * v2.0;
    let dot = v1.0 * v2.0 + v1.1 * v2.1;
    let mut signed = cross.atan2(dot).to_degrees();
    if orientation == BendOrientation::Clockwise {
        signed = -signed;
    }
    Ok(wrap_to_positive(signed) % 360.0)
}

/// Angle in `[0, 360)` degrees between two end-face normals, resolved as a
/// rotation about `bending_axis`.
pub fn angle_from_end_normals(
    n_fixed: [f64; 3],
    n_moving: [f64; 3],
    bending_axis: [f64; 3],
) -> Result<f64> {
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    for (name, v) in [
        ("fixed normal", n_fixed),
        ("moving normal", n_moving),
        ("bending axis", bending_axis),
    ] {
        if norm(v) == 0.0 {
            return Err(CoreError::InvalidInput(format!("zero {name} vector")));
        }
    }
    let axis_n = norm(bending_axis);
    let u = [
        bending_axis[0] / axis_n,
        bending_axis[1] / axis_n,
        bending_axis[2] / axis_n,
    ];
    // Project both normals onto the plane perpendicular to the axis.
    let project = |v: [f64; 3]| -> [f64; 3] {
        let d = v[0] * u[0] + v[1] * u[1] + v[2] * u[2];
        [v[0] - d * u[0], v[1] - d * u[1], v[2] - d * u[2]]
    };
    let a = project(n_fixed);
    let b = project(n_moving);
    if norm(a) < 1e-12 || norm(b) < 1e-12 {
        return Err(CoreError::InvalidInput(
            "normal parallel to the bending axis".into(),
        ));
    }
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin_term = cross[0] * u[0] + cross[1] * u[1] + cross[2] * u[2];
    let cos_term = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let signed = sin_term.atan2(cos_term).to_degrees();
    Ok(wrap_to_positive(signed) % 360.0)
}

/// Parsed keypoint stream.
///
/// CSV schema: header `frame,time_s,x0,y0,l0,x1,y1,l1,...`, one frame per
/// row. Frames with any likelihood below `likelihood_threshold` come back
/// flagged rather than dropped.
pub fn parse_keypoint_csv<R: BufRead>(
    reader: R,
    likelihood_threshold: f64,
) -> Result<Vec<KeypointFrame>> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
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
    };
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 2 + 3 * 4 || cols[0] != "frame" || cols[1] != "time_s" {
        return Err(CoreError::Parse {
            line: 1,
            message: format!(
                "header must be frame,time_s,x0,y0,l0,... with at least 4 points (got {} columns)",
                cols.len()
            ),
        });
    }
    if (cols.len() - 2) % 3 != 0 {
        return Err(CoreError::Parse {
            line: 1,
            message: "point columns must come in x,y,likelihood triples".into(),
        });
    }
    let n_points = (cols.len() - 2) / 3;

    let mut frames = Vec::new();
    let mut prev_t = f64::NEG_INFINITY;
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
        if fields.len() != cols.len() {
            return Err(CoreError::Parse {
                line: line_no,
                message: format!("expected {} fields, got {}", cols.len(), fields.len()),
            });
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| CoreError::Parse {
                line: line_no,
                message: format!("bad {what}: {s:?}"),
            })
        };
        let t = parse_f(fields[1], "time_s")?;
        if t <= prev_t {
            return Err(CoreError::Parse {
                line: line_no,
                message: format!("timestamps must be strictly increasing (got {t})"),
            });
        }
        prev_t = t;
        let mut points = Vec::with_capacity(n_points);
        let mut flagged = false;
        for p in 0..n_points {
            let x = parse_f(fields[2 + 3 * p], "x")?;
            let y = parse_f(fields[3 + 3 * p], "y")?;
            let l = parse_f(fields[4 + 3 * p], "likelihood")?;
            if l < likelihood_threshold {
                flagged = true;
            }
            points.push(Keypoint {
                x,
                y,
                likelihood: l,
            });
        }
        frames.push(KeypointFrame {
            timestamp_s: t,
            points,
            flagged,
        });
    }
    Ok(frames)
}

/// Emit frames in the same CSV schema `parse_keypoint_csv` reads.
pub fn write_keypoint_csv(frames: &[KeypointFrame]) -> Result<String> {
    let n_points = match frames.first() {
        Some(f) => f.points.len(),
        None => return Err(CoreError::InvalidInput("no frames to write".into())),
    };
    let mut out = String::from("frame,time_s");
    for p in 0..n_points {
        out.push_str(&format!(",x{p},y{p},l{p}"));
    }
    out.push('\n');
    for (i, f) in frames.iter().enumerate() {
        if f.points.len() != n_points {
            return Err(CoreError::InvalidInput(format!(
                "frame {i} has {} points, expected {n_points}",
                f.points.len()
            )));
        }
        out.push_str(&format!("{i},{}", fmt_f64(f.timestamp_s)));
        for p in &f.points {
            out.push_str(&format!(
                ",{},{},{}",
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_f64(p.likelihood)
            ));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Angle track CSV: `time_s,angle_deg`.
pub fn write_angle_csv(samples: &[AngleSample]) -> String {
    let mut out = String::from("time_s,angle_deg\n");
    for s in samples {
        out.push_str(&format!("{},{}\n", fmt_f64(s.timestamp_s), fmt_f64(s.angle_deg)));
    }
    out
}

/// Shortest round-trippable decimal representation.
pub(crate) fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}
