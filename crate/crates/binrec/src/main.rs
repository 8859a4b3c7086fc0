use std::path::PathBuf;
use std::process::ExitCode;

use binrec::config::{parse_constraint, ExperimentConfig, SolverMode, SolverSettings};
use binrec::error::{Error, Result};
use binrec::io::{
    load_binary, load_measurements, load_real, load_support, save_binary, save_measurements, save_real, write_json, write_output,
};
use binrec::mask::parse_mask;
use binrec::report::{montecarlo_row, CertifyReport, ComplexityJson, ReconstructReport, MONTECARLO_HEADER};
use binrec::scenario::{run_scenario, Outcome};
use binrec::source::make_signal;
use binrec_core::certificate::{certify_nonneg, certify_unique};
use binrec_core::complexity::{complexity_image, GratingSpec};
use binrec_core::fourier::{blur, default_hsize, gaussian_filter, measure, MeasurementSet};
use binrec_core::generate::{add_measurement_noise, add_noise};
use binrec_core::probability::{hoeffding_tail, hoeffding_tail_unhalved, montecarlo_recovery, orthant_count_formula, p_rn_exact, p_rn_gauss, MatrixKind};
use binrec_core::solver::{Problem, Solver};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Binary signal reconstruction from partial Fourier data.
#[derive(Parser)]
#[command(name = "binrec", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated binary signal.
    Generate {
        /// intervals:d, barcode:<bits>, disk:R, square:side
        #[arg(long)]
        signal: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// .csv (1D), .pgm or .txt (2D)
        #[arg(long)]
        out: PathBuf,
    },
    /// Fourier coefficients of a signal on a mask.
    Measure {
        #[arg(long)]
        signal: PathBuf,
        /// low:d, disk:d, list:<path>, rand:r:seed, full
        #[arg(long)]
        mask: String,
        /// Leave out the DC coefficient.
        #[arg(long)]
        no_dc: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convolve a signal with a periodic Gaussian.
    Blur {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        sigma: f64,
        /// Window size; default 2·ceil(3σ)+1.
        #[arg(long)]
        hsize: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add Gaussian noise to a signal or to a measurement file.
    Noise {
        /// Signal file (spatial noise).
        #[arg(long, conflicts_with = "meas", required_unless_present = "meas")]
        signal: Option<PathBuf>,
        /// Measurement file (noise on real and imaginary parts).
        #[arg(long)]
        meas: Option<PathBuf>,
        #[arg(long)]
        std: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a binary signal from measurements or from a blurred signal.
    Reconstruct(ReconstructArgs),
    /// Decide whether a signal is the only binary one with its measurements.
    Certify {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        mask: String,
        /// Certify among nonnegative signals supported on --support.
        #[arg(long, requires = "support")]
        nonneg: bool,
        /// 1-based positions, `x` or `row,col` per line.
        #[arg(long)]
        support: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grating complexity and perimeter of a binary image.
    Complexity {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 32)]
        angles: usize,
        /// Largest slope denominator.
        #[arg(long, default_value_t = 8)]
        q_max: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// P_{r,N} = 2^{−N} Σ_{i≤r} C(N, i): recovery probability for r+1 generic
    /// measurements of N+1 unknowns.
    Prob {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        n: u64,
    },
    /// Empirical recovery rate for r random measurements of N unknowns,
    /// against P_{r−1,N−1}.
    Montecarlo {
        #[arg(long)]
        n: usize,
        /// One or more ranks, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Kind::Gaussian)]
        kind: Kind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment from a config file or a preset.
    Scenario {
        /// key = value file whose first key is `scenario`.
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Extra `key=value` overrides, applied in order.
        #[arg(long = "set")]
        overrides: Vec<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Report file; stdout by default.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gaussian,
    Fourier,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Measurement file `# geometry h N` + `k1[,k2],re,im`.
    #[arg(long, conflicts_with = "blurred", required_unless_present = "blurred")]
    meas: Option<PathBuf>,
    /// Blurred real signal; needs --sigma.
    #[arg(long, requires = "sigma")]
    blurred: Option<PathBuf>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    hsize: Option<usize>,
    /// Use only these frequencies (a subset of --meas, or of the blurred spectrum).
    #[arg(long)]
    mask: Option<String>,
    /// Settings for noisy data: no add-back, stop when the iterate stalls.
    #[arg(long)]
    noisy: bool,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Tolerance relative to max(1, ‖b‖²).
    #[arg(long, conflicts_with = "tol")]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    step_tol: Option<f64>,
    #[arg(long, default_value = "box", value_parser = parse_constraint)]
    constraint: binrec_core::solver::Constraint,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("binrec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Generate { signal, n, dim, seed, out } => save_binary(&out, &make_signal(&signal, dim, n, seed)?),
        Cmd::Measure { signal, mask, no_dc, out } => {
            let u = load_real(&signal)?;
            let b = measure(&u, &parse_mask(&mask, u.geometry(), no_dc)?)?;
            match out {
                Some(p) => save_measurements(&p, &b),
                None => write_output(None, &binrec::io::format_measurements(&b)),
            }
        }
        Cmd::Blur { signal, sigma, hsize, out } => {
            let u = load_real(&signal)?;
            let k = gaussian_filter(sigma, hsize.unwrap_or_else(|| default_hsize(sigma)), u.geometry())?;
            save_real(&out, &blur(&u, &k)?)
        }
        Cmd::Noise { signal, meas, std, seed, out } => match (signal, meas) {
            (Some(s), _) => save_real(&out, &add_noise(&load_real(&s)?, std, seed)?),
            (None, Some(m)) => save_measurements(&out, &add_measurement_noise(&load_measurements(&m)?, std, seed)?),
            (None, None) => unreachable!("clap requires one input"),
        },
        Cmd::Reconstruct(a) => reconstruct(a),
        Cmd::Certify { signal, mask, nonneg, support, out } => {
            let u0 = load_binary(&signal)?;
            let mask = parse_mask(&mask, u0.geometry(), false)?;
            let report = match (nonneg, support) {
                (true, Some(s)) => CertifyReport::nonneg(&certify_nonneg(&load_support(&s, u0.geometry())?, &mask)?)?,
                _ => CertifyReport::binary(&certify_unique(&u0, &mask)?, &u0, &mask)?,
            };
            write_json(out.as_ref(), &report)
        }
        Cmd::Complexity { image, angles, q_max, out } => {
            let u = load_binary(&image)?;
            if angles == 0 || q_max < 1 {
                return Err(Error::Input("--angles and --q-max must be at least 1".into()));
            }
            let report = complexity_image(&u, &GratingSpec::angle_set(angles, q_max))?;
            write_json(out.as_ref(), &ComplexityJson::from(&report))
        }
        Cmd::Prob { r, n } => prob(r, n),
        Cmd::Montecarlo { n, r, trials, seed, kind, out } => {
            let kind = match kind {
                Kind::Gaussian => MatrixKind::Gaussian,
                Kind::Fourier => MatrixKind::PartialFourier,
            };
            let mut csv = format!("{MONTECARLO_HEADER}\n");
            for r in r {
                let e = montecarlo_recovery(n, r, trials, seed, kind)?;
                if e.lp_failures > 0 {
                    eprintln!("binrec: N={n} r={r}: {} trials hit the LP pivot limit and were left out", e.lp_failures);
                }
                csv += &montecarlo_row(&e);
                csv.push('\n');
            }
            write_output(out.as_ref(), &csv)
        }
        Cmd::Scenario { config, preset, overrides, out_dir, report } => {
            let mut cfg = match (config, preset) {
                (Some(p), _) => ExperimentConfig::load(&p)?,
                (None, Some(id)) => ExperimentConfig::preset(&id)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            for kv in &overrides {
                let (k, v) = kv.split_once('=').ok_or_else(|| Error::Input(format!("--set wants key=value, got {kv:?}")))?;
                cfg.set(k.trim(), v.trim()).map_err(|m| Error::Input(format!("--set {kv}: {m}")))?;
            }
            if out_dir.is_some() {
                cfg.out_dir = out_dir;
            }
            let r = run_scenario(&cfg)?;
            write_json(report.as_ref(), &r)?;
            match &r.outcome {
                Outcome::Single(s) if !s.converged => Err(Error::Numerical(format!("scenario {}: solver did not converge", cfg.scenario))),
                _ => Ok(()),
            }
        }
    }
}

fn restrict(b: &MeasurementSet, spec: &str) -> Result<MeasurementSet> {
    let mask = parse_mask(spec, b.geometry(), false)?;
    let values = mask
        .frequencies()
        .iter()
        .map(|k| b.get(&k[..b.geometry().h()]).ok_or_else(|| Error::Input(format!("--mask frequency {k:?} is not in the measurement file"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementSet::new(mask, values)?)
}

fn reconstruct(a: ReconstructArgs) -> Result<()> {
    let mut settings = if a.noisy { SolverSettings::noisy() } else { SolverSettings::exact() };
    settings.lambda = a.lambda;
    settings.tol = a.tol;
    settings.rel_tol = a.rel_tol;
    settings.max_iters = a.max_iters;
    settings.step_tol = a.step_tol;
    settings.constraint = a.constraint;
    let mut precondition = None;
    let problem = match (&a.meas, &a.blurred) {
        (Some(m), _) => {
            let b = load_measurements(m)?;
            let b = match &a.mask {
                Some(spec) => restrict(&b, spec)?,
                None => b,
            };
            Problem::masked(&b)?
        }
        (None, Some(y)) => {
            let y = load_real(y)?;
            let sigma = a.sigma.expect("clap requires --sigma");
            let k = gaussian_filter(sigma, a.hsize.unwrap_or_else(|| default_hsize(sigma)), y.geometry())?;
            if settings.mode == SolverMode::Noisy {
                precondition = Some(k.power());
            }
            match &a.mask {
                Some(spec) => Problem::masked_blurred(&y, &k, &parse_mask(spec, y.geometry(), false)?)?,
                None => Problem::blurred(&y, &k)?,
            }
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let mut config = settings.for_problem(problem.data_energy());
    config.preconditioner = precondition;
    let rec = Solver::new(problem, config)?.solve();
    save_binary(&a.out, &rec.binary)?;
    write_json(a.report.as_ref(), &ReconstructReport::from(&rec.report))?;
    if !rec.report.converged {
        return Err(Error::Numerical(format!(
            "no convergence after {} iterations (residual {:.3e}, tol {:.3e})",
            rec.report.iterations, rec.report.residual, rec.report.tol
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ProbReport {
    r: u64,
    n: u64,
    /// `numerator / 2^exponent`.
    exact: String,
    probability: f64,
    gaussian_approximation: f64,
    hoeffding_lower: f64,
    hoeffding_upper: f64,
    hoeffding_unhalved_lower: f64,
    hoeffding_unhalved_upper: f64,
    /// `2Σ_{i<r} C(N−1, i)` for `r + 1` measurements; null outside `1 ≤ r+1 ≤ N ≤ 127`.
    orthant_count: Option<String>,
}

fn prob(r: u64, n: u64) -> Result<()> {
    let p = p_rn_exact(r, n)?;
    let (lo, hi) = hoeffding_tail(r, n);
    let (ulo, uhi) = hoeffding_tail_unhalved(r, n);
    let report = ProbReport {
        r,
        n,
        exact: format!("{}/2^{}", p.numerator, p.exponent),
        probability: p.to_f64(),
        gaussian_approximation: p_rn_gauss(r as f64, n),
        hoeffding_lower: lo,
        hoeffding_upper: hi,
        hoeffding_unhalved_lower: ulo,
        hoeffding_unhalved_upper: uhi,
        orthant_count: orthant_count_formula(r + 1, n + 1).ok().map(|c| c.to_string()),
    };
    write_json(None, &report)
}
