//! Hyperelastic material model for the silicone body and the linear-elastic
//! parameters of the fabric limiting layer.
//!
//! The silicone is modeled as an incompressible third-order polynomial in the
//! first strain invariant:
//!
//! ```text
//! W(I1) = C10 (I1 - 3) + C20 (I1 - 3)^2 + C30 (I1 - 3)^3
//! ```
//!
//! Stress and pressure must share units with the coefficients; everything in
//! this crate runs in kPa internally and the config layer converts.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Coefficients of the third-order strain-energy polynomial.
///
/// `c10` must be positive: the small-strain shear modulus is `2 * c10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YeohCoefficients {
    pub c10: f64,
    pub c20: f64,
    pub c30: f64,
}

impl YeohCoefficients {
    pub fn new(c10: f64, c20: f64, c30: f64) -> Result<Self> {
        if !(c10 > 0.0) || !c10.is_finite() || !c20.is_finite() || !c30.is_finite() {
            return Err(CoreError::InvalidValue {
                parameter: "c10",
                value: format!("{c10}"),
                constraint: "c10 must be positive and all coefficients finite",
            });
        }
        Ok(Self { c10, c20, c30 })
    }

    /// Small-strain shear modulus, `2 * c10`.
    pub fn shear_modulus(&self) -> f64 {
        2.0 * self.c10
    }
}

/// Isotropic linear-elastic parameters of the fabric layer.
///
/// Only carried as metadata: stress post-processing filters fabric elements
/// out rather than computing with them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FabricElastic {
    pub youngs_modulus_gpa: f64,
    pub poisson_ratio: f64,
}

impl FabricElastic {
    pub fn new(youngs_modulus_gpa: f64, poisson_ratio: f64) -> Result<Self> {
        if !(youngs_modulus_gpa > 0.0) {
            return Err(CoreError::InvalidValue {
                parameter: "youngs_modulus_gpa",
                value: format!("{youngs_modulus_gpa}"),
                constraint: "must be positive",
            });
        }
        if !(0.0..0.5).contains(&poisson_ratio) {
            return Err(CoreError::InvalidValue {
                parameter: "poisson_ratio",
                value: format!("{poisson_ratio}"),
                constraint: "must lie in [0, 0.5)",
            });
        }
        Ok(Self {
            youngs_modulus_gpa,
            poisson_ratio,
        })
    }
}

/// Strain-energy density at first invariant `i1`.
///
/// `i1 >= 3` is required; lower values are unreachable for an isochoric
/// deformation.
pub fn yeoh_energy(i1: f64, c: &YeohCoefficients) -> Result<f64> {
    if !(i1 >= 3.0) {
        return Err(CoreError::Domain(format!(
            "first invariant {i1} below incompressible minimum 3"
        )));
    }
    let x = i1 - 3.0;
    // Horner form.
    Ok(x * (c.c10 + x * (c.c20 + x * c.c30)))
}

/// Derivative of the strain energy with respect to the first invariant.
pub fn yeoh_energy_derivative(i1: f64, c: &YeohCoefficients) -> Result<f64> {
    if !(i1 >= 3.0) {
        return Err(CoreError::Domain(format!(
            "first invariant {i1} below incompressible minimum 3"
        )));
    }
    let x = i1 - 3.0;
    Ok(c.c10 + x * (2.0 * c.c20 + x * 3.0 * c.c30))
}

/// First strain invariant of an incompressible uniaxial stretch:
/// `I1 = lambda^2 + 2 / lambda`.
pub fn uniaxial_first_invariant(stretch: f64) -> Result<f64> {
    if !(stretch > 0.0) {
        return Err(CoreError::Domain(format!(
            "stretch {stretch} must be positive"
        )));
    }
    Ok(stretch * stretch + 2.0 / stretch)
}

/// Nominal (first Piola-Kirchhoff) stress of incompressible uniaxial tension:
/// `P = 2 (lambda - lambda^-2) dW/dI1`.
pub fn uniaxial_nominal_stress(stretch: f64, c: &YeohCoefficients) -> Result<f64> {
    let i1 = uniaxial_first_invariant(stretch)?;
    let dw = yeoh_energy_derivative(i1, c)?;
    Ok(2.0 * (stretch - stretch.powi(-2)) * dw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_like() -> YeohCoefficients {
        YeohCoefficients::new(1.9e2, 9e-4, -4.75e-6).unwrap()
    }

    #[test]
    fn energy_is_zero_in_reference_state() {
        let c = paper_like();
        assert_eq!(yeoh_energy(3.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn energy_reduces_to_neo_hookean_first_term() {
        let c = YeohCoefficients::new(2.0, 0.0, 0.0).unwrap();
        assert_eq!(yeoh_energy(4.0, &c).unwrap(), 2.0);
    }

    #[test]
    fn horner_matches_naive_polynomial() {
        // Two independent evaluation routes of the same cubic.
        let c = paper_like();
        let i1 = 5.0;
        let x: f64 = i1 - 3.0;
        let naive = c.c10 * x + c.c20 * x.powi(2) + c.c30 * x.powi(3);
        let horner = yeoh_energy(i1, &c).unwrap();
        assert!((horner - naive).abs() <= 1e-12 * naive.abs().max(1.0));
    }

    #[test]
    fn invariant_identity_and_large_stretch() {
        assert_eq!(uniaxial_first_invariant(1.0).unwrap(), 3.0);
        assert_eq!(uniaxial_first_invariant(2.0).unwrap(), 5.0);
        // lambda = 6 is the 500% strain regime.
        let i1 = uniaxial_first_invariant(6.0).unwrap();
        assert!((i1 - (36.0 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn stress_free_reference_and_neo_hookean_value() {
        let c = paper_like();
        assert_eq!(uniaxial_nominal_stress(1.0, &c).unwrap(), 0.0);

        let nh = YeohCoefficients::new(1.0, 0.0, 0.0).unwrap();
        let p = uniaxial_nominal_stress(1.5, &nh).unwrap();
        let expected = 2.0 * (1.5 - 1.0 / 2.25);
        assert!((p - expected).abs() < 1e-12);
    }

    #[test]
    fn energy_derivative_matches_finite_differences() {
        let c = paper_like();
        let mut i1 = 3.0_f64;
        while i1 <= 40.0 {
            let h = 1e-5 * i1.max(1.0);
            let (lo, hi) = (i1.max(3.0), i1 + h);
            // One-sided at the domain edge, central elsewhere.
            let fd = if i1 - h < 3.0 {
                (yeoh_energy(hi, &c).unwrap() - yeoh_energy(lo, &c).unwrap()) / h
            } else {
                (yeoh_energy(i1 + h, &c).unwrap() - yeoh_energy(i1 - h, &c).unwrap()) / (2.0 * h)
            };
            let analytic = yeoh_energy_derivative(i1, &c).unwrap();
            let denom = analytic.abs().max(fd.abs()).max(1e-9);
            assert!(
                ((analytic - fd) / denom).abs() <= 1e-5,
                "i1={i1}: analytic {analytic} vs fd {fd}"
            );
            i1 += 0.5;
        }
    }

    #[test]
    fn nominal_stress_matches_energy_rate_along_uniaxial_path() {
        let c = paper_like();
        let energy_at = |l: f64| yeoh_energy(uniaxial_first_invariant(l).unwrap(), &c).unwrap();
        let mut lambda = 1.0_f64;
        let scale = uniaxial_nominal_stress(6.0, &c).unwrap();
        while lambda <= 6.0 {
            let h = 6e-6 * lambda.max(1.0);
            let fd = (energy_at(lambda + h) - energy_at((lambda - h).max(1e-9))) / (2.0 * h);
            let analytic = uniaxial_nominal_stress(lambda, &c).unwrap();
            assert!(
                (analytic - fd).abs() <= 1e-6 * analytic.abs().max(1e-3 * scale),
                "lambda={lambda}: analytic {analytic} vs fd {fd}"
            );
            lambda += 0.05;
        }
    }

    #[test]
    fn positive_initial_stiffness() {
        let c = paper_like();
        let h = 1e-6;
        let slope = (uniaxial_nominal_stress(1.0 + h, &c).unwrap()
            - uniaxial_nominal_stress(1.0 - h, &c).unwrap())
            / (2.0 * h);
        assert!(slope > 0.0);
    }

    #[test]
    fn domain_errors() {
        let c = paper_like();
        assert!(yeoh_energy(2.9, &c).is_err());
        assert!(uniaxial_first_invariant(0.0).is_err());
        assert!(YeohCoefficients::new(0.0, 0.0, 0.0).is_err());
        assert!(FabricElastic::new(6.5, 0.5).is_err());
        assert!(FabricElastic::new(6.5, 0.2).is_ok());
    }
}
