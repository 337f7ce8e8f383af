//! Closed-form ring-cavity response: phase-dependent transmissivity and
//! reflectivity, per-photon-number phases, and resonance finding.
//!
//! The ring of two mirrors and two equal beam splitters (transmissivity tau)
//! acts on its input modes with reflectivity kappa(phi) and transmissivity
//! sigma(phi), where phi is the total round-trip phase. With the cross-Kerr
//! coupling, a signal Fock component |n> sets phi_n = psi - chi_t * n.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fockspace::FockTruncation;
use crate::{Error, Result};

/// Ring-cavity configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Beam-splitter transmissivity, both splitters equal; tau in (0, 1].
    pub tau: f64,
    /// Tunable phase shift, radians.
    pub psi: f64,
    /// Cross-Kerr phase per signal photon, radians/photon.
    pub chi_t: f64,
}

impl CavityParams {
    pub fn new(tau: f64, psi: f64, chi_t: f64) -> Result<Self> {
        // tau = 0 makes sigma = 0/0 at resonance; tau = 1 is a transparent cavity.
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidTau(tau));
        }
        if !psi.is_finite() {
            return Err(Error::NonFinite("psi"));
        }
        if !chi_t.is_finite() {
            return Err(Error::NonFinite("chi_t"));
        }
        Ok(Self { tau, psi, chi_t })
    }
}

/// Cavity coefficients precomputed for every retained photon number.
#[derive(Debug, Clone)]
pub struct CavityResponse {
    pub kappa: Vec<Complex64>,
    pub sigma: Vec<Complex64>,
    pub sigma_abs_sq: Vec<f64>,
}

/// Round-trip phase seen by the cavity mode when the signal carries n
/// photons: phi_n = psi - chi_t * n. No range reduction; downstream trig
/// is exactly periodic.
pub fn fock_phase(n: usize, params: &CavityParams) -> f64 {
    params.psi - params.chi_t * n as f64
}

/// Reflectivity and transmissivity of the ring at round-trip phase `phi`:
/// kappa = sqrt(1-tau)(e^{i phi} - 1) / (1 - e^{i phi}(1-tau)),
/// sigma = tau / (1 - e^{i phi}(1-tau)).
pub fn cavity_coefficients(phi: f64, tau: f64) -> Result<(Complex64, Complex64)> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidTau(tau));
    }
    let e = Complex64::from_polar(1.0, phi);
    let denom = Complex64::ONE - e * (1.0 - tau);
    let kappa = (1.0 - tau).sqrt() * (e - Complex64::ONE) / denom;
    let sigma = tau / denom;
    Ok((kappa, sigma))
}

/// |sigma(phi)|^2 = 1 / (1 + 4 (1-tau)/tau^2 sin^2(phi/2)).
///
/// Closed form rather than |sigma|^2 of the complex quotient: the quotient's
/// denominator cancels catastrophically near resonance at tau ~ 1e-6.
pub fn sigma_abs_sq(phi: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidTau(tau));
    }
    let s = (0.5 * phi).sin();
    Ok(1.0 / (1.0 + 4.0 * (1.0 - tau) / (tau * tau) * s * s))
}

/// Phase of sigma: theta(phi) = arctan[(1-tau) sin phi / (1 - (1-tau) cos phi)].
pub fn sigma_argument(phi: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidTau(tau));
    }
    let t = 1.0 - tau;
    Ok((t * phi.sin()).atan2(1.0 - t * phi.cos()))
}

/// kappa_n, sigma_n, |sigma_n|^2 for n = 0..=n_max.
pub fn cavity_response(params: &CavityParams, trunc: FockTruncation) -> Result<CavityResponse> {
    let d = trunc.dim();
    let mut kappa = Vec::with_capacity(d);
    let mut sigma = Vec::with_capacity(d);
    let mut abs_sq = Vec::with_capacity(d);
    for n in 0..d {
        let phi = fock_phase(n, params);
        let (k, s) = cavity_coefficients(phi, params.tau)?;
        kappa.push(k);
        sigma.push(s);
        abs_sq.push(sigma_abs_sq(phi, params.tau)?);
    }
    Ok(CavityResponse { kappa, sigma, sigma_abs_sq: abs_sq })
}

/// Photon numbers n <= n_max with |sigma_n|^2 >= threshold, ascending.
/// Ideal resonances sit at n = n* + (2 pi / chi_t) j.
pub fn resonant_numbers(
    params: &CavityParams,
    trunc: FockTruncation,
    threshold: f64,
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for n in 0..trunc.dim() {
        if sigma_abs_sq(fock_phase(n, params), params.tau)? >= threshold {
            out.push(n);
        }
    }
    Ok(out)
}

/// Default half-maximum resonance threshold.
pub const RESONANCE_THRESHOLD: f64 = 0.5;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn fock_phase_examples() {
        let p = CavityParams::new(0.5, 0.04, 0.01).unwrap();
        assert_eq!(fock_phase(0, &p), 0.04);
        assert_abs_diff_eq!(fock_phase(4, &p), 0.0, epsilon = 1e-15);
        let p = CavityParams::new(0.5, 0.0, PI / 5.0).unwrap();
        assert_abs_diff_eq!(fock_phase(10, &p), -2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn coefficients_at_resonance() {
        let (k, s) = cavity_coefficients(0.0, 0.5).unwrap();
        assert_abs_diff_eq!(k.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((s - Complex64::ONE).norm(), 0.0, epsilon = 1e-15);
        let (k, s) = cavity_coefficients(2.0 * PI, 0.3).unwrap();
        assert_abs_diff_eq!(k.norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((s - Complex64::ONE).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn antiresonance_value() {
        // phi = pi, tau = 0.1: |sigma|^2 = 1/(1 + 4*0.9/0.01) = 1/361
        let expected = 1.0 / 361.0;
        assert_abs_diff_eq!(sigma_abs_sq(PI, 0.1).unwrap(), expected, epsilon = 1e-15);
        let (_, s) = cavity_coefficients(PI, 0.1).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), expected, epsilon = 1e-15);
    }

    #[test]
    fn half_width_is_of_order_tau() {
        // solve 4(1-tau)/tau^2 sin^2(phi/2) = 1 near phi = tau for tiny tau
        let tau = 1e-4;
        let v = sigma_abs_sq(tau, tau).unwrap();
        assert!((v - 0.5).abs() < 0.01, "sigma_abs_sq at phi = tau was {v}");
    }

    #[test]
    fn sigma_argument_examples() {
        assert_eq!(sigma_argument(0.0, 0.2).unwrap(), 0.0);
        assert_abs_diff_eq!(sigma_argument(PI, 0.2).unwrap(), 0.0, epsilon = 1e-15);
        let expected = (0.8 * 0.5f64.sin()).atan2(1.0 - 0.8 * 0.5f64.cos());
        assert_abs_diff_eq!(sigma_argument(0.5, 0.2).unwrap(), expected, epsilon = 1e-15);
        let (_, s) = cavity_coefficients(0.5, 0.2).unwrap();
        assert_abs_diff_eq!(sigma_argument(0.5, 0.2).unwrap(), s.arg(), epsilon = 1e-12);
    }

    #[test]
    fn response_peaks_where_designed() {
        let p = CavityParams::new(1e-4, 0.04, 0.01).unwrap();
        let r = cavity_response(&p, FockTruncation::new(10)).unwrap();
        let peak = r
            .sigma_abs_sq
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(peak.0, 4);
        assert_abs_diff_eq!(*peak.1, 1.0, epsilon = 1e-12);

        let p = CavityParams::new(1e-3, 0.0, PI / 5.0).unwrap();
        let r = cavity_response(&p, FockTruncation::new(35)).unwrap();
        for n in [0usize, 10, 20, 30] {
            assert_abs_diff_eq!(r.sigma_abs_sq[n], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn transparent_cavity() {
        let p = CavityParams::new(1.0, 0.7, 0.3).unwrap();
        let r = cavity_response(&p, FockTruncation::new(20)).unwrap();
        for v in r.sigma_abs_sq {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn resonant_numbers_examples() {
        let p = CavityParams::new(1e-4, 0.04, 0.01).unwrap();
        assert_eq!(
            resonant_numbers(&p, FockTruncation::new(100), 0.5).unwrap(),
            vec![4]
        );
        let p = CavityParams::new(1e-3, 0.0, PI / 5.0).unwrap();
        assert_eq!(
            resonant_numbers(&p, FockTruncation::new(35), 0.5).unwrap(),
            vec![0, 10, 20, 30]
        );
        let p = CavityParams::new(0.3, 0.0, 0.0).unwrap();
        assert_eq!(
            resonant_numbers(&p, FockTruncation::new(7), 0.5).unwrap(),
            (0..=7).collect::<Vec<_>>()
        );
    }

    #[test]
    fn rejects_invalid_tau() {
        assert!(CavityParams::new(0.0, 0.0, 0.0).is_err());
        assert!(CavityParams::new(1.1, 0.0, 0.0).is_err());
        assert!(cavity_coefficients(0.3, 0.0).is_err());
        assert!(sigma_abs_sq(0.3, -0.1).is_err());
    }

    #[test]
    fn sharp_peak_at_small_tau() {
        let tau = 1e-4;
        for i in 0..2000 {
            let phi = 0.1 + (PI - 0.1) * i as f64 / 1999.0;
            assert!(sigma_abs_sq(phi, tau).unwrap() < 1e-4);
            assert!(sigma_abs_sq(-phi, tau).unwrap() < 1e-4);
        }
    }

    proptest! {
        #[test]
        fn unitarity(phi in -10.0f64..10.0, tau in 1e-6f64..1.0) {
            let (k, s) = cavity_coefficients(phi, tau).unwrap();
            prop_assert!((k.norm_sqr() + s.norm_sqr() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn periodicity(phi in -6.0f64..6.0, tau in 1e-4f64..1.0) {
            let (k1, s1) = cavity_coefficients(phi, tau).unwrap();
            let (k2, s2) = cavity_coefficients(phi + 2.0 * PI, tau).unwrap();
            prop_assert!((k1 - k2).norm() <= 1e-12);
            prop_assert!((s1 - s2).norm() <= 1e-12);
        }

        #[test]
        fn closed_form_matches_definition(phi in -10.0f64..10.0, tau in 1e-6f64..1.0) {
            let (_, s) = cavity_coefficients(phi, tau).unwrap();
            prop_assert!((sigma_abs_sq(phi, tau).unwrap() - s.norm_sqr()).abs() <= 1e-12);
        }

        #[test]
        fn argument_matches_complex_arg(phi in -3.1f64..3.1, tau in 1e-4f64..1.0) {
            let (_, s) = cavity_coefficients(phi, tau).unwrap();
            let d = sigma_argument(phi, tau).unwrap() - s.arg();
            let wrapped = (d + PI).rem_euclid(2.0 * PI) - PI;
            prop_assert!(wrapped.abs() <= 1e-12);
        }
    }
}
