//! Brute-force verifier for the closed forms: builds the explicit
//! three-mode output state in truncated Fock space, applies the on-off POM
//! on the detected mode by summing its Fock ladder term by term, and traces
//! out the cavity output modes numerically. No use of the synthesizer's
//! closed-form probability or conditional state.

use num_complex::Complex64;

use crate::cavity;
use crate::fockspace::{coherent_coefficients, DensityMatrix, FockTruncation, PureStateVector};
use crate::synthesizer::{pom_no_click_weight, SynthesizerParams};
use crate::{Error, Result};

/// Output state over modes (b1, b2, c2) in the coherent-dyad form
/// sum_{n,m} nu_nm |k_n a><k_m a| (x) |s_n a><s_m a| (x) |n><m|.
///
/// The coherent factors are stored as truncated Fock expansions per signal
/// photon number; every contraction over them is an explicit sum over Fock
/// indices. Materializing the dense tripartite matrix would need
/// ((J K N))^2 entries, so callers must not assume cheap cloning either.
#[derive(Debug, Clone)]
pub struct TripartiteState {
    nu: DensityMatrix,
    /// Truncated expansion of |kappa_n alpha> on mode b1, per n.
    b1: Vec<PureStateVector>,
    /// Truncated expansion of |sigma_n alpha> on mode b2, per n.
    b2: Vec<PureStateVector>,
}

impl TripartiteState {
    /// Trace computed by explicit summation over all three Fock ladders;
    /// truncation deficits show up as a trace below one.
    pub fn trace(&self) -> f64 {
        (0..self.nu.dim())
            .map(|n| self.nu.get(n, n).re * self.b1[n].norm_sq() * self.b2[n].norm_sq())
            .sum()
    }

    pub fn signal_truncation(&self) -> FockTruncation {
        self.nu.truncation()
    }

    /// Overlap <b2: sigma_m alpha | sigma_n alpha> summed over the ladder.
    pub fn detected_mode_overlap(&self, n: usize, m: usize) -> Complex64 {
        gram_entry(&self.b2[n], &self.b2[m])
    }
}

fn gram_entry(vn: &PureStateVector, vm: &PureStateVector) -> Complex64 {
    vn.coefficients()
        .iter()
        .zip(vm.coefficients())
        .map(|(a, b)| a * b.conj())
        .sum()
}

/// Assembles the explicit output state. The cross-Kerr unitary enters as
/// the per-Fock-component phase phi_n = psi - chi_t n on the cavity path.
pub fn build_output_state(
    nu_in: &DensityMatrix,
    params: &SynthesizerParams,
    cavity_trunc: (FockTruncation, FockTruncation),
) -> Result<TripartiteState> {
    if nu_in.dim() != params.trunc.dim() {
        return Err(Error::DimensionMismatch(nu_in.dim(), params.trunc.dim()));
    }
    let (j_trunc, k_trunc) = cavity_trunc;
    let response = cavity::cavity_response(&params.cavity, params.trunc)?;
    let mut b1 = Vec::with_capacity(nu_in.dim());
    let mut b2 = Vec::with_capacity(nu_in.dim());
    let mut undersized = false;
    for n in 0..nu_in.dim() {
        let amp_b1 = response.kappa[n] * params.alpha;
        let amp_b2 = response.sigma[n] * params.alpha;
        for (amp, limit) in [(amp_b1, j_trunc.n_max), (amp_b2, k_trunc.n_max)] {
            let mean = amp.norm_sqr();
            if mean + 8.0 * mean.sqrt() > limit as f64 {
                undersized = true;
            }
        }
        b1.push(coherent_coefficients(amp_b1, j_trunc));
        b2.push(coherent_coefficients(amp_b2, k_trunc));
    }
    let state = TripartiteState { nu: nu_in.clone(), b1, b2 };
    if undersized {
        return Err(Error::TruncationTooSmall(1.0 - state.trace()));
    }
    Ok(state)
}

/// Applies Pi_1 = I - sum_k (1-eta)^k |k><k| on mode b2 and traces out both
/// cavity modes by explicit Fock-index summation.
pub fn oracle_condition(
    state: &TripartiteState,
    eta: f64,
) -> Result<(DensityMatrix, f64)> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidEta(eta));
    }
    let d = state.nu.dim();
    let k_dim = state.b2[0].dim();
    let weights: Vec<f64> = (0..k_dim).map(|k| pom_no_click_weight(k, eta)).collect();

    // click[n][m] = <s_m a|s_n a> - sum_k (1-eta)^k v_n[k] v_m[k]*
    let mut p_click = 0.0;
    for n in 0..d {
        let no_click: f64 = state.b2[n]
            .coefficients()
            .iter()
            .zip(&weights)
            .map(|(c, w)| c.norm_sqr() * w)
            .sum();
        let click = state.b2[n].norm_sq() - no_click;
        p_click += state.nu.get(n, n).re * state.b1[n].norm_sq() * click;
    }
    if p_click <= 1e-15 {
        return Err(Error::NoClickProbability(p_click));
    }

    let mut entries = vec![Complex64::ZERO; d * d];
    for n in 0..d {
        for m in 0..d {
            let g_b1 = gram_entry(&state.b1[n], &state.b1[m]);
            let g_b2 = gram_entry(&state.b2[n], &state.b2[m]);
            let no_click: Complex64 = state.b2[n]
                .coefficients()
                .iter()
                .zip(state.b2[m].coefficients())
                .zip(&weights)
                .map(|((a, b), w)| a * b.conj() * w)
                .sum();
            entries[n * d + m] = state.nu.get(n, m) * g_b1 * (g_b2 - no_click) / p_click;
        }
    }
    let out = DensityMatrix::from_entries(entries, state.nu.truncation())?;
    Ok((out, p_click))
}
