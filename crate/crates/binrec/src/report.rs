//! JSON and CSV shapes written by the subcommands.

use binrec_core::certificate::{kernel_witness, robustness_margin, Certification};
use binrec_core::complexity::{ComplexityReport, Family};
use binrec_core::fourier::FrequencyMask;
use binrec_core::probability::RecoveryExperiment;
use binrec_core::solver::SolveReport;
use binrec_core::BinarySignal;
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructReport {
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
    pub converged: bool,
    pub tol: f64,
}

impl From<&SolveReport> for ReconstructReport {
    fn from(r: &SolveReport) -> Self {
        ReconstructReport { iterations: r.iterations, residual: r.residual, seconds: r.seconds, converged: r.converged, tol: r.tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// A strict certificate exists.
    Unique,
    /// A kernel direction keeps `u₀ + t·v` feasible.
    NotUnique,
    /// Neither was found.
    Undecided,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub certifiable: bool,
    /// Optimal sign margin (the best achievable one when not certifiable).
    pub margin: f64,
    /// Noise radius that cannot change the thresholded solution; null unless certified.
    pub h: Option<f64>,
    pub lp_iterations: usize,
    pub verdict: Verdict,
}

impl CertifyReport {
    /// Binary-signal uniqueness; the kernel search runs only when the
    /// certificate fails.
    pub fn binary(c: &Certification, u0: &BinarySignal, mask: &FrequencyMask) -> Result<Self> {
        let (h, verdict) = match c.certificate() {
            Some(cert) => (Some(robustness_margin(cert)?), Verdict::Unique),
            None if kernel_witness(u0, mask)?.is_some() => (None, Verdict::NotUnique),
            None => (None, Verdict::Undecided),
        };
        Ok(CertifyReport { certifiable: c.is_certified(), margin: c.optimum(), h, lp_iterations: c.lp_iterations(), verdict })
    }

    /// Nonnegative-signal uniqueness; no kernel search.
    pub fn nonneg(c: &Certification) -> Result<Self> {
        let h = c.certificate().map(robustness_margin).transpose()?;
        let verdict = if c.is_certified() { Verdict::Unique } else { Verdict::Undecided };
        Ok(CertifyReport { certifiable: c.is_certified(), margin: c.optimum(), h, lp_iterations: c.lp_iterations(), verdict })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleEntry {
    pub p: i64,
    pub q: i64,
    /// `horizontal` or `vertical` grating family.
    pub family: &'static str,
    pub theta: f64,
    pub k_theta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityJson {
    pub k_theta: Vec<f64>,
    pub theta: Vec<f64>,
    pub angles: Vec<AngleEntry>,
    pub max: f64,
    pub perimeter: f64,
    pub d_lower_bound: f64,
}

impl From<&ComplexityReport> for ComplexityJson {
    fn from(r: &ComplexityReport) -> Self {
        let angles = r
            .k_theta
            .iter()
            .map(|k| AngleEntry {
                p: k.grating.p,
                q: k.grating.q,
                family: match k.grating.family {
                    Family::Horizontal => "horizontal",
                    Family::Vertical => "vertical",
                },
                theta: k.theta,
                k_theta: k.k,
            })
            .collect();
        ComplexityJson {
            k_theta: r.k_theta.iter().map(|k| k.k).collect(),
            theta: r.k_theta.iter().map(|k| k.theta).collect(),
            angles,
            max: r.max_k_theta,
            perimeter: r.perimeter,
            d_lower_bound: r.d_lower_bound,
        }
    }
}

pub const MONTECARLO_HEADER: &str = "N,r,trials,empirical,predicted,ci_low,ci_high";

pub fn montecarlo_row(e: &RecoveryExperiment) -> String {
    format!("{},{},{},{},{},{},{}", e.n, e.r, e.trials, e.empirical, e.predicted, e.ci_low, e.ci_high)
}
