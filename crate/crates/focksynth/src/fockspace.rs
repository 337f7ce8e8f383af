//! Truncated-Fock-basis numerics: coherent-state coefficients, pure state
//! vectors and density matrices, with log-domain bookkeeping so that large
//! coherent amplitudes never overflow.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Largest retained photon number; the basis is {|0>, ..., |n_max>}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockTruncation {
    pub n_max: usize,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    /// Basis dimension, `n_max + 1`.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// ln(n!), exact for n <= 20 and via log-gamma beyond.
pub fn log_factorial(n: usize) -> f64 {
    if n <= 20 {
        let mut f: u128 = 1;
        for k in 2..=n as u128 {
            f *= k;
        }
        (f as f64).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// State vector over the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    coefficients: Vec<Complex64>,
}

impl PureStateVector {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidDensityMatrix("empty state vector".into()));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("state vector coefficient"));
        }
        Ok(Self { coefficients })
    }

    /// Basis vector |n>.
    pub fn fock(n: usize, trunc: FockTruncation) -> Result<Self> {
        if n > trunc.n_max {
            return Err(Error::DimensionMismatch(n, trunc.n_max));
        }
        let mut c = vec![Complex64::ZERO; trunc.dim()];
        c[n] = Complex64::ONE;
        Ok(Self { coefficients: c })
    }

    /// Equal-weight superposition of the listed Fock states.
    pub fn equal_superposition(ns: &[usize], trunc: FockTruncation) -> Result<Self> {
        if ns.is_empty() {
            return Err(Error::NoResonance);
        }
        let mut c = vec![Complex64::ZERO; trunc.dim()];
        let w = (ns.len() as f64).sqrt().recip();
        for &n in ns {
            if n > trunc.n_max {
                return Err(Error::DimensionMismatch(n, trunc.n_max));
            }
            c[n] = Complex64::new(w, 0.0);
        }
        Ok(Self { coefficients: c })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn truncation(&self) -> FockTruncation {
        FockTruncation::new(self.coefficients.len() - 1)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Rescales to unit norm.
    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            for c in &mut self.coefficients {
                *c /= n;
            }
        }
    }
}

/// Truncated coherent-state expansion c_n = e^{-|a|^2/2} a^n / sqrt(n!).
///
/// Each coefficient is accumulated as (log-magnitude, phase) and
/// exponentiated once, so |amp| up to 25 and n_max up to 700 stay finite.
pub fn coherent_coefficients(amp: Complex64, trunc: FockTruncation) -> PureStateVector {
    let r = amp.norm();
    let mut c = vec![Complex64::ZERO; trunc.dim()];
    if r == 0.0 {
        c[0] = Complex64::ONE;
        return PureStateVector { coefficients: c };
    }
    let theta = amp.arg();
    let ln_r = r.ln();
    for (n, cn) in c.iter_mut().enumerate() {
        let log_mag = -0.5 * r * r + n as f64 * ln_r - 0.5 * log_factorial(n);
        *cn = Complex64::from_polar(log_mag.exp(), theta * n as f64);
    }
    PureStateVector { coefficients: c }
}

/// Density matrix over the truncated Fock basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Vec<Complex64>,
    truncation: FockTruncation,
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    n_max: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl DensityMatrix {
    pub fn from_entries(entries: Vec<Complex64>, trunc: FockTruncation) -> Result<Self> {
        let d = trunc.dim();
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch(entries.len(), d * d));
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("density matrix entry"));
        }
        Ok(Self { entries, truncation: trunc })
    }

    /// Rank-1 projector |psi><psi|.
    pub fn from_pure(psi: &PureStateVector) -> Self {
        let d = psi.dim();
        let c = psi.coefficients();
        let mut entries = Vec::with_capacity(d * d);
        for n in 0..d {
            for m in 0..d {
                entries.push(c[n] * c[m].conj());
            }
        }
        Self { entries, truncation: FockTruncation::new(d - 1) }
    }

    pub fn truncation(&self) -> FockTruncation {
        self.truncation
    }

    pub fn dim(&self) -> usize {
        self.truncation.dim()
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.entries[n * self.dim() + m]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.get(n, n).re).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|n| self.get(n, n).re).sum()
    }

    pub fn trace_defect(&self) -> f64 {
        1.0 - self.trace()
    }

    /// Largest relative deviation from rho = rho^dagger.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for n in 0..d {
            for m in n..d {
                let a = self.get(n, m);
                let b = self.get(m, n).conj();
                let dev = (a - b).norm() / f64::max(1.0, a.norm());
                worst = worst.max(dev);
            }
        }
        worst
    }

    /// trace(rho^2); equals 1 for pure states.
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for n in 0..d {
            for m in 0..d {
                acc += (self.get(n, m) * self.get(m, n)).re;
            }
        }
        acc
    }

    /// Eigenvalues of the Hermitized matrix (rho + rho^dagger)/2, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let herm = DMatrix::from_fn(d, d, |n, m| {
            0.5 * (self.get(n, m) + self.get(m, n).conj())
        });
        let mut ev: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Checks Hermiticity, trace range, and positive semidefiniteness
    /// within the stated tolerances.
    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_defect() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity defect {:.3e} exceeds 1e-12",
                self.hermiticity_defect()
            )));
        }
        let tr = self.trace();
        if !(0.0..=1.0 + 1e-9).contains(&tr) {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} outside [0, 1 + 1e-9]"
            )));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < -1e-9 * tr.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidDensityMatrix(format!(
                "minimum eigenvalue {min_ev:.3e} below -1e-9 * trace"
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.dim();
        let entries: Vec<Vec<[f64; 2]>> = (0..d)
            .map(|n| (0..d).map(|m| [self.get(n, m).re, self.get(n, m).im]).collect())
            .collect();
        serde_json::to_value(DensityMatrixJson { n_max: self.truncation.n_max, entries })
            .expect("density matrix serialization")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let parsed: DensityMatrixJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidDensityMatrix(e.to_string()))?;
        let d = parsed.n_max + 1;
        if parsed.entries.len() != d {
            return Err(Error::InvalidDensityMatrix(format!(
                "expected {d} rows for n_max {}, found {}",
                parsed.n_max,
                parsed.entries.len()
            )));
        }
        if parsed.entries.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidDensityMatrix("matrix is not square".into()));
        }
        let entries = parsed
            .entries
            .iter()
            .flatten()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        Self::from_entries(entries, FockTruncation::new(parsed.n_max))
    }
}

/// Rank-1 density matrix of the truncated coherent state |amp>.
pub fn coherent_density_matrix(amp: Complex64, trunc: FockTruncation) -> DensityMatrix {
    DensityMatrix::from_pure(&coherent_coefficients(amp, trunc))
}

/// Overlap <psi|rho|psi> with a normalized target, clamped to [0, 1].
pub fn fidelity_to_pure(rho: &DensityMatrix, target: &PureStateVector) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), target.dim()));
    }
    let c = target.coefficients();
    let d = rho.dim();
    let mut acc = Complex64::ZERO;
    for n in 0..d {
        for m in 0..d {
            acc += c[n].conj() * rho.get(n, m) * c[m];
        }
    }
    Ok(acc.re.clamp(0.0, 1.0))
}

/// trace(rho^2).
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Independent oracle for the examples: exact integer factorial.
    fn exact_factorial(n: u64) -> u128 {
        (1..=n as u128).product::<u128>().max(1)
    }

    #[test]
    fn log_factorial_small_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        let expected = (exact_factorial(20) as f64).ln();
        assert_abs_diff_eq!(log_factorial(20), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(log_factorial(20), 42.335616460753485, epsilon = 1e-10);
    }

    #[test]
    fn log_factorial_recurrence() {
        for n in 1..=300 {
            let lhs = log_factorial(n) - log_factorial(n - 1);
            assert_abs_diff_eq!(lhs, (n as f64).ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_vacuum() {
        let v = coherent_coefficients(Complex64::ZERO, FockTruncation::new(5));
        assert_eq!(v.coefficients()[0], Complex64::ONE);
        assert!(v.coefficients()[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn coherent_matches_poisson_pmf() {
        // |c_4|^2 for amp = 2 equals the Poisson pmf e^{-4} 4^4 / 4!
        let v = coherent_coefficients(Complex64::new(2.0, 0.0), FockTruncation::new(30));
        let expected = (-4.0f64).exp() * 4.0f64.powi(4) / 24.0;
        assert_abs_diff_eq!(v.coefficients()[4].norm_sqr(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(v.coefficients()[4].norm_sqr(), 0.19536681481316454, epsilon = 1e-9);
    }

    #[test]
    fn coherent_norm_captures_poisson_tail() {
        let v = coherent_coefficients(Complex64::new(3.9024, 0.0), FockTruncation::new(60));
        assert!(v.norm_sq() >= 1.0 - 1e-12);
    }

    #[test]
    fn coherent_survives_large_amplitude() {
        let v = coherent_coefficients(Complex64::new(25.0, 0.0), FockTruncation::new(700));
        assert!(v.coefficients().iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        // n_max = 700 is mean + 3 sigma for mean 625; most mass is retained
        assert!(v.norm_sq() > 0.99 && v.norm_sq() <= 1.0 + 1e-12);
        let w = coherent_coefficients(Complex64::new(25.0, 0.0), FockTruncation::new(900));
        assert!(w.norm_sq() >= 1.0 - 1e-9);
    }

    #[test]
    fn coherent_density_matrix_is_rank_one() {
        let rho = coherent_density_matrix(Complex64::new(2.0, 0.0), FockTruncation::new(30));
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-10);
        rho.validate().unwrap();
        let expected = (-4.0f64).exp() * 4.0f64.powi(4) / 24.0;
        assert_abs_diff_eq!(rho.get(4, 4).re, expected, epsilon = 1e-12);
        // rank-1: |rho_34| = sqrt(rho_33 rho_44)
        let off = rho.get(3, 4);
        assert_abs_diff_eq!(off.norm(), (rho.get(3, 3).re * rho.get(4, 4).re).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!((off - rho.get(4, 3).conj()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_against_basis_states() {
        let t = FockTruncation::new(10);
        let rho4 = DensityMatrix::from_pure(&PureStateVector::fock(4, t).unwrap());
        assert_eq!(fidelity_to_pure(&rho4, &PureStateVector::fock(4, t).unwrap()).unwrap(), 1.0);
        assert_eq!(fidelity_to_pure(&rho4, &PureStateVector::fock(5, t).unwrap()).unwrap(), 0.0);

        let rho = coherent_density_matrix(Complex64::new(2.0, 0.0), FockTruncation::new(30));
        let target = PureStateVector::fock(4, FockTruncation::new(30)).unwrap();
        assert_abs_diff_eq!(
            fidelity_to_pure(&rho, &target).unwrap(),
            rho.get(4, 4).re,
            epsilon = 1e-14
        );
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let rho = coherent_density_matrix(Complex64::ZERO, FockTruncation::new(4));
        let target = PureStateVector::fock(0, FockTruncation::new(5)).unwrap();
        assert!(fidelity_to_pure(&rho, &target).is_err());
    }

    #[test]
    fn purity_of_mixture() {
        let t = FockTruncation::new(1);
        let mut entries = vec![Complex64::ZERO; 4];
        entries[0] = Complex64::new(0.5, 0.0);
        entries[3] = Complex64::new(0.5, 0.0);
        let rho = DensityMatrix::from_entries(entries, t).unwrap();
        assert_abs_diff_eq!(rho.purity(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.min_eigenvalue(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let rho = coherent_density_matrix(Complex64::new(1.0, 0.5), FockTruncation::new(6));
        let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
        assert_eq!(rho, back);

        let bad = serde_json::json!({
            "n_max": 1,
            "entries": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0]]]
        });
        assert!(DensityMatrix::from_json(&bad).is_err());
    }
}
