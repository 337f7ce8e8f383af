//! Closed-form detection probability and conditional output state for the
//! synthesizer, for ideal and imperfect on-off detection, plus design
//! helpers: resonance tuning, equal-weight superposition amplitudes, and
//! transmissivity calibration against a target click probability.

use num_complex::Complex64;

use crate::cavity::{
    self, CavityParams, RESONANCE_THRESHOLD,
};
use crate::fockspace::{log_factorial, DensityMatrix, FockTruncation, PureStateVector};
use crate::{Error, Result};

/// Full device configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesizerParams {
    pub cavity: CavityParams,
    /// Coherent amplitude feeding the cavity input mode.
    pub alpha: Complex64,
    /// Detector quantum efficiency, in (0, 1].
    pub eta: f64,
    pub trunc: FockTruncation,
}

impl SynthesizerParams {
    pub fn new(
        cavity: CavityParams,
        alpha: Complex64,
        eta: f64,
        trunc: FockTruncation,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidEta(eta));
        }
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::NonFinite("alpha"));
        }
        Ok(Self { cavity, alpha, eta, trunc })
    }
}

/// Outcome probabilities of the on-off detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickReport {
    /// Probability of outcome 1, detector on.
    pub p_click: f64,
    /// Probability of outcome 0, detector off.
    pub p_no_click: f64,
    pub params: SynthesizerParams,
}

/// Diagonal weight (1 - eta)^k of the no-click POM element; eta = 1
/// recovers the ideal vacuum projector.
pub fn pom_no_click_weight(k: usize, eta: f64) -> f64 {
    (1.0 - eta).powi(k as i32)
}

/// 1 - e^{-z} for complex z, via a short series when |z| is tiny so the
/// off-resonance factors (|z| ~ 1e-6) keep full relative precision.
pub(crate) fn one_minus_exp_neg(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        // z (1 - z/2 + z^2/6 - z^3/24), relative error below |z|^4 / 120
        z * (Complex64::ONE - z / 2.0 + z * z / 6.0 - z * z * z / 24.0)
    } else {
        Complex64::ONE - (-z).exp()
    }
}

/// Click probability P1 = sum_n nu_nn (1 - e^{-eta |alpha|^2 |sigma_n|^2}).
pub fn detection_probability(
    nu_in: &DensityMatrix,
    params: &SynthesizerParams,
) -> Result<ClickReport> {
    if nu_in.dim() != params.trunc.dim() {
        return Err(Error::DimensionMismatch(nu_in.dim(), params.trunc.dim()));
    }
    let a2 = params.alpha.norm_sqr();
    let mut p = 0.0;
    for n in 0..nu_in.dim() {
        let phi = cavity::fock_phase(n, &params.cavity);
        let s2 = cavity::sigma_abs_sq(phi, params.cavity.tau)?;
        p += nu_in.get(n, n).re * (-(-params.eta * a2 * s2).exp_m1());
    }
    let p = p.clamp(0.0, 1.0);
    Ok(ClickReport { p_click: p, p_no_click: 1.0 - p, params: *params })
}

/// Conditional output state given a click, Hermitian and trace-normalized:
///
/// nu_out[n][m] = nu_in[n][m] e^{|a|^2 (k_n k*_m + s_n s*_m - 1)}
///               (1 - e^{-eta |a|^2 s_n s*_m}) / P1.
///
/// The two exponentials are never split: the combined exponent has
/// non-positive real part by Cauchy-Schwarz, so alpha = 20 stays finite.
pub fn conditional_state(
    nu_in: &DensityMatrix,
    params: &SynthesizerParams,
) -> Result<(DensityMatrix, ClickReport)> {
    let report = detection_probability(nu_in, params)?;
    if report.p_click <= 1e-15 {
        return Err(Error::NoClickProbability(report.p_click));
    }
    let d = nu_in.dim();
    let a2 = params.alpha.norm_sqr();
    let response = cavity::cavity_response(&params.cavity, params.trunc)?;
    let mut entries = vec![Complex64::ZERO; d * d];
    for n in 0..d {
        // diagonal through the same closed form as P1, so the identity
        // nu_out[n][n] = nu_nn (1 - e^{-eta|a|^2 |s_n|^2}) / P1 is exact
        let w = -(-params.eta * a2 * response.sigma_abs_sq[n]).exp_m1();
        entries[n * d + n] =
            Complex64::new(nu_in.get(n, n).re * w / report.p_click, 0.0);
        for m in (n + 1)..d {
            let cross = response.kappa[n] * response.kappa[m].conj()
                + response.sigma[n] * response.sigma[m].conj();
            let envelope = (a2 * (cross - Complex64::ONE)).exp();
            let click = one_minus_exp_neg(
                params.eta * a2 * response.sigma[n] * response.sigma[m].conj(),
            );
            let v = nu_in.get(n, m) * envelope * click / report.p_click;
            entries[n * d + m] = v;
            entries[m * d + n] = v.conj();
        }
    }
    let out = DensityMatrix::from_entries(entries, params.trunc)?;
    Ok((out, report))
}

/// Small-tau prediction of the filtered state.
#[derive(Debug, Clone)]
pub enum FilterPrediction {
    /// A single resonant photon number: the Fock state |n*>.
    Pure(PureStateVector),
    /// Several resonances: the input block on the resonant set, renormalized.
    Mixed(DensityMatrix),
}

impl FilterPrediction {
    pub fn into_density_matrix(self) -> DensityMatrix {
        match self {
            FilterPrediction::Pure(v) => DensityMatrix::from_pure(&v),
            FilterPrediction::Mixed(m) => m,
        }
    }
}

/// Ideal-limit (tau -> 0) filtering: keeps only the resonant photon numbers.
pub fn ideal_filter_prediction(
    nu_in: &DensityMatrix,
    params: &CavityParams,
    trunc: FockTruncation,
    threshold: f64,
) -> Result<FilterPrediction> {
    if nu_in.dim() != trunc.dim() {
        return Err(Error::DimensionMismatch(nu_in.dim(), trunc.dim()));
    }
    let resonant = cavity::resonant_numbers(params, trunc, threshold)?;
    match resonant.as_slice() {
        [] => Err(Error::NoResonance),
        [n_star] => Ok(FilterPrediction::Pure(PureStateVector::fock(*n_star, trunc)?)),
        set => {
            let weight: f64 = set.iter().map(|&n| nu_in.get(n, n).re).sum();
            if weight <= 1e-15 {
                return Err(Error::NoClickProbability(weight));
            }
            let d = trunc.dim();
            let mut entries = vec![Complex64::ZERO; d * d];
            for &n in set {
                for &m in set {
                    entries[n * d + m] = nu_in.get(n, m) / weight;
                }
            }
            Ok(FilterPrediction::Mixed(DensityMatrix::from_entries(entries, trunc)?))
        }
    }
}

/// Coherent amplitude giving equal weight to |n1> and |n2>:
/// |beta|^2 = (n1! / n2!)^{1/(n1 - n2)}.
pub fn equal_weight_amplitude(n1: usize, n2: usize) -> Result<f64> {
    if n1 == n2 {
        return Err(Error::EqualPhotonNumbers(n1));
    }
    let log_b2 = (log_factorial(n1) - log_factorial(n2)) / (n1 as f64 - n2 as f64);
    Ok((0.5 * log_b2).exp())
}

/// Phase shift putting |n*> on resonance: psi = n* chi_t (mod 2 pi).
/// Results within 1e-9 of the branch cut report as 0.
pub fn design_phase(n_star: usize, chi_t: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let psi = (n_star as f64 * chi_t).rem_euclid(two_pi);
    if psi < 1e-9 || two_pi - psi < 1e-9 {
        0.0
    } else {
        psi
    }
}

const CALIBRATION_SAMPLES: usize = 32;
const CALIBRATION_TOL: f64 = 1e-6;

/// Recovers the beam-splitter transmissivity giving a target click
/// probability, by bisection over a bracket where P1 is monotone in tau.
/// Monotonicity is checked on 32 log-spaced sample points first.
pub fn tau_calibration(
    nu_in: &DensityMatrix,
    params: &SynthesizerParams,
    target_p_click: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi <= 1.0 && lo < hi) {
        return Err(Error::InvalidTau(if lo <= 0.0 { lo } else { hi }));
    }
    let p_at = |tau: f64| -> Result<f64> {
        let mut p = *params;
        p.cavity.tau = tau;
        Ok(detection_probability(nu_in, &p)?.p_click)
    };
    let log_lo = lo.ln();
    let log_hi = hi.ln();
    let mut samples = Vec::with_capacity(CALIBRATION_SAMPLES);
    for i in 0..CALIBRATION_SAMPLES {
        let t = log_lo + (log_hi - log_lo) * i as f64 / (CALIBRATION_SAMPLES - 1) as f64;
        samples.push(p_at(t.exp())?);
    }
    let increasing = samples.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = samples.windows(2).all(|w| w[1] <= w[0]);
    if !increasing && !decreasing {
        return Err(Error::NonMonotoneBracket);
    }
    let (p_lo, p_hi) = (samples[0], samples[CALIBRATION_SAMPLES - 1]);
    let (p_min, p_max) = (p_lo.min(p_hi), p_lo.max(p_hi));
    if target_p_click < p_min || target_p_click > p_max {
        return Err(Error::TargetOutOfRange {
            target: target_p_click,
            lo: p_min,
            hi: p_max,
        });
    }
    // bisect in log tau
    let (mut a, mut b) = (log_lo, log_hi);
    let sign = if increasing { 1.0 } else { -1.0 };
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let p_mid = p_at(mid.exp())?;
        if (p_mid - target_p_click).abs() <= CALIBRATION_TOL {
            return Ok(mid.exp());
        }
        if sign * (p_mid - target_p_click) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let tau = (0.5 * (a + b)).exp();
    if (p_at(tau)? - target_p_click).abs() <= CALIBRATION_TOL {
        Ok(tau)
    } else {
        Err(Error::NonMonotoneBracket)
    }
}

/// Default resonance threshold re-exported for callers of
/// [`ideal_filter_prediction`].
pub const DEFAULT_THRESHOLD: f64 = RESONANCE_THRESHOLD;

/// Truncation heuristic: retains the resonant photon numbers, the input
/// mean, and a ten-sigma Poisson tail above them.
pub fn default_truncation(cavity: &CavityParams, input_mean: f64) -> FockTruncation {
    let mean = input_mean.max(0.0);
    let scan = (mean + 10.0 * mean.sqrt()).ceil() as usize + 10;
    let resonant =
        cavity::resonant_numbers(cavity, FockTruncation::new(scan), RESONANCE_THRESHOLD)
            .unwrap_or_default();
    let top = resonant.last().copied().unwrap_or(0) as f64;
    let base = top.max(mean).ceil();
    let pad = f64::max(15.0, (10.0 * mean.sqrt()).ceil());
    FockTruncation::new((base + pad) as usize)
}
