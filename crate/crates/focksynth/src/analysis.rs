//! State diagnostics and parameter sweeps over tau/eta/alpha/psi/chi_t/beta
//! for figure reproduction and design studies.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fockspace::{
    coherent_density_matrix, fidelity_to_pure, DensityMatrix, PureStateVector,
};
use crate::synthesizer::{conditional_state, SynthesizerParams};
use crate::{Error, Result};

/// Diagnostics of a conditional output state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMetrics {
    /// Overlap with the target pure state, when one was given.
    pub fidelity: Option<f64>,
    pub purity: f64,
    pub trace_defect: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    /// Diagonal of the state: the photon-number distribution.
    pub number_distribution: Vec<f64>,
}

/// All metrics of `rho`; purity and the minimum eigenvalue come from the
/// eigenvalues of the Hermitized matrix so floating-point asymmetry is
/// treated uniformly.
pub fn metrics(rho: &DensityMatrix, target: Option<&PureStateVector>) -> Result<StateMetrics> {
    let fidelity = match target {
        Some(t) => Some(fidelity_to_pure(rho, t)?),
        None => None,
    };
    let eigenvalues = rho.eigenvalues();
    Ok(StateMetrics {
        fidelity,
        purity: eigenvalues.iter().map(|l| l * l).sum(),
        trace_defect: rho.trace_defect(),
        hermiticity_defect: rho.hermiticity_defect(),
        min_eigenvalue: eigenvalues[0],
        number_distribution: rho.diagonal(),
    })
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    Tau,
    Eta,
    Alpha,
    Psi,
    ChiT,
    Beta,
}

impl SweptParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweptParameter::Tau => "tau",
            SweptParameter::Eta => "eta",
            SweptParameter::Alpha => "alpha",
            SweptParameter::Psi => "psi",
            SweptParameter::ChiT => "chi_t",
            SweptParameter::Beta => "beta",
        }
    }
}

/// Where the signal input state comes from.
#[derive(Debug, Clone)]
pub enum NuInSource {
    /// Coherent state with the given amplitude.
    CoherentAmplitude(Complex64),
    /// Explicit density matrix.
    Explicit(DensityMatrix),
}

/// A one-parameter grid study around a fixed configuration.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweptParameter,
    pub grid: Vec<f64>,
    pub base: SynthesizerParams,
    pub nu_in: NuInSource,
    pub target: Option<PureStateVector>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidSweep("empty grid".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("non-finite grid value".into()));
        }
        let increasing = self.grid.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.grid.windows(2).all(|w| w[1] < w[0]);
        if self.grid.len() > 1 && !increasing && !decreasing {
            return Err(Error::InvalidSweep("grid must be strictly monotone".into()));
        }
        if matches!(self.parameter, SweptParameter::Beta)
            && matches!(self.nu_in, NuInSource::Explicit(_))
        {
            return Err(Error::InvalidSweep(
                "beta sweep needs a coherent input, not an explicit matrix".into(),
            ));
        }
        Ok(())
    }
}

/// One grid point of a sweep; failures are carried in-row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub p_click: Option<f64>,
    pub metrics: Option<StateMetrics>,
    pub error: Option<String>,
}

fn evaluate_point(spec: &SweepSpec, value: f64) -> Result<(f64, StateMetrics)> {
    let mut params = spec.base;
    let mut nu_source = spec.nu_in.clone();
    match spec.parameter {
        SweptParameter::Tau => params.cavity.tau = value,
        SweptParameter::Eta => params.eta = value,
        SweptParameter::Alpha => params.alpha = Complex64::new(value, 0.0),
        SweptParameter::Psi => params.cavity.psi = value,
        SweptParameter::ChiT => params.cavity.chi_t = value,
        SweptParameter::Beta => nu_source = NuInSource::CoherentAmplitude(Complex64::new(value, 0.0)),
    }
    let nu_in = match &nu_source {
        NuInSource::CoherentAmplitude(beta) => coherent_density_matrix(*beta, params.trunc),
        NuInSource::Explicit(m) => m.clone(),
    };
    let (rho, report) = conditional_state(&nu_in, &params)?;
    let m = metrics(&rho, spec.target.as_ref())?;
    Ok((report.p_click, m))
}

/// Runs the grid; points evaluate independently (in parallel) and rows come
/// back in grid order. A failing point yields an error row, not an abort.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec
        .grid
        .par_iter()
        .map(|&value| match evaluate_point(spec, value) {
            Ok((p_click, metrics)) => SweepRow {
                value,
                p_click: Some(p_click),
                metrics: Some(metrics),
                error: None,
            },
            Err(e) => SweepRow { value, p_click: None, metrics: None, error: Some(e.to_string()) },
        })
        .collect())
}

fn csv_field(v: Option<f64>) -> String {
    match v {
        // 12 significant digits
        Some(x) => format!("{x:.11e}"),
        None => "nan".into(),
    }
}

/// CSV rendering: `param,value,p_click,fidelity,purity,trace_defect,min_eig,error`
/// with 12 significant digits; the error column is empty on success.
pub fn sweep_csv(parameter: SweptParameter, rows: &[SweepRow]) -> String {
    let mut out = String::from("param,value,p_click,fidelity,purity,trace_defect,min_eig,error\n");
    for row in rows {
        let m = row.metrics.as_ref();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            parameter.name(),
            csv_field(Some(row.value)),
            csv_field(row.p_click),
            csv_field(m.and_then(|m| m.fidelity)),
            csv_field(m.map(|m| m.purity)),
            csv_field(m.map(|m| m.trace_defect)),
            csv_field(m.map(|m| m.min_eigenvalue)),
            row.error.as_deref().unwrap_or(""),
        ));
    }
    out
}
