//! Temporary calibration probe (removed once defaults are frozen).

use pneunet_core::actuator_sim::{
    static_angle_with, stress_slices_proxy_with, SegmentGeometry,
};
use pneunet_core::config::WorkbenchConfig;
use pneunet_core::geometry::design_family;

fn main() {
    let mut cfg = WorkbenchConfig::default();
    let args: Vec<String> = std::env::args().collect();
    let geo = SegmentGeometry {
        expansion_coeff: args.get(1).map(|s| s.parse().unwrap()).unwrap_or(3.6),
        saturation_sharpness: args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2.4),
        center_coupling: args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.8),
    };
    if let Some(ts) = args.get(4) {
        cfg.base.side_thickness = ts.parse().unwrap();
    }
    if let Some(tt) = args.get(5) {
        cfg.base.top_thickness = tt.parse().unwrap();
    }
    let yeoh = cfg.material.yeoh_kpa().unwrap();
    let family = design_family(&cfg.base).unwrap();
    println!("geo = {geo:?} side={} top={}", cfg.base.side_thickness, cfg.base.top_thickness);

    println!("\nstatic angle at 50 kPa:");
    let mut angles = Vec::new();
    for d in &family {
        let a = static_angle_with(d, 50.0, &yeoh, &geo).unwrap();
        println!("  {:>24}  {:>8.2} deg", d.name, a);
        angles.push((d.name.clone(), a));
    }

    // Matched-angle stress comparison for the width designs.
    let target = angles
        .iter()
        .filter(|(n, _)| n == "mid_width_larger")
        .map(|(_, a)| *a)
        .next()
        .unwrap();
    println!("\ncenter-slice stress at matched angle {target:.1} deg:");
    for name in ["mid_width_smaller", "original", "mid_width_larger"] {
        let d = family.iter().find(|d| d.name == name).unwrap();
        // Bisect pressure to reach the target angle.
        let (mut lo, mut hi) = (0.0, 200.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if static_angle_with(d, mid, &yeoh, &geo).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = 0.5 * (lo + hi);
        let slices = stress_slices_proxy_with(d, p, &yeoh, &geo).unwrap();
        let center = slices[9].max(slices[10]);
        let peak = slices.iter().cloned().fold(0.0_f64, f64::max);
        println!("  {name:>24}  p={p:>7.2} kPa  center={center:>8.2} kPa  peak={peak:>8.2} kPa");
    }
}
