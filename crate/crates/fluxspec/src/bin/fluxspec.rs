//! Command-line driver for the eigenvalue solvers and the experiment
//! harness.
//!
//! Exit codes: 0 all checks passed, 2 at least one verification row failed,
//! 1 execution error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fluxspec::certificates;
use fluxspec::geometry::{make_eccentric_annulus, reduce_flux, AnnulusSpec, StarDomain};
use fluxspec::harness::{
    self, default_config, ExperimentConfig, ExperimentKind, OutputFormat,
};
use fluxspec::planar::{self, ProblemKind};
use fluxspec::radial::{self, InnerBc};
use fluxspec::Error;

#[derive(Parser)]
#[command(
    name = "fluxspec",
    version,
    about = "Eigenvalues and shape-comparison certificates for planar magnetic Laplacians"
)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for reports.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Mesh resolution as <n_s>x<n_t>, e.g. 96x192.
    #[arg(long, global = true)]
    resolution: Option<String>,
    /// Eigensolver residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Suppress the timestamp header line in CSV output.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DomainArgs {
    /// Domain description file (JSON); `-` reads stdin.
    #[arg(long)]
    domain: Option<String>,
    /// Eccentric annulus shortcut: r0,r1,delta.
    #[arg(long, value_delimiter = ',')]
    eccentric: Option<Vec<f64>>,
}

impl DomainArgs {
    fn resolve(&self) -> Result<StarDomain, Error> {
        if let Some(vals) = &self.eccentric {
            if vals.len() != 3 {
                return Err(Error::InvalidArgument(
                    "--eccentric needs r0,r1,delta".into(),
                ));
            }
            return make_eccentric_annulus(vals[0], vals[1], vals[2]);
        }
        match self.domain.as_deref() {
            Some("-") => {
                let mut text = String::new();
                std::io::Read::read_to_string(&mut std::io::stdin(), &mut text)?;
                Ok(serde_json::from_str(&text)?)
            }
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                Ok(serde_json::from_str(&text)?)
            }
            None => Err(Error::InvalidArgument(
                "give --domain <file> or --eccentric r0,r1,delta".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Radial mode scan on a concentric annulus.
    Annulus {
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value = "dirichlet", value_parser = ["dirichlet", "neumann"])]
        bc: String,
        /// Radial elements.
        #[arg(long, default_value_t = radial::DEFAULT_ELEMENTS)]
        n: usize,
        #[arg(long, default_value_t = radial::DEFAULT_M_WINDOW)]
        m_window: i64,
    },
    /// Two-dimensional eigenvalue of one domain.
    Solve {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value = "perforated_dirichlet_inner",
              value_parser = ["perforated_dirichlet_inner", "perforated_neumann_inner",
                              "punctured_friedrichs", "localized_field"])]
        kind: String,
        /// Artificial core radius (punctured kind only).
        #[arg(long)]
        core_radius: Option<f64>,
        /// Write the eigenvector as CSV (s,theta,re_u,im_u).
        #[arg(long)]
        dump_eigenvector: Option<PathBuf>,
    },
    /// Trial-state certificate of a domain against its matched annulus.
    Certify {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value = "dirichlet", value_parser = ["dirichlet", "neumann"])]
        bc: String,
        /// Angular quadrature points.
        #[arg(long, default_value_t = certificates::DEFAULT_QUAD_N)]
        quad_n: usize,
        /// Also solve the domain in 2D and check the full sandwich.
        #[arg(long)]
        with_2d: bool,
    },
    /// Flux sweeps, shrinking-hole and large-flux ladders (config-driven).
    Sweep,
    /// Shape-inequality verification runs (config-driven; defaults to the
    /// eccentric family when no config is given).
    Verify {
        /// Which theorem family to verify without a config file.
        #[arg(long, default_value = "dirichlet", value_parser = ["dirichlet", "neumann"])]
        bc: String,
    },
    /// Exploratory conjecture probe for the localized field.
    Probe,
}

fn parse_resolution(text: &str) -> Result<(usize, usize), Error> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::InvalidArgument(format!("bad resolution '{text}'")))?;
    let n_s = a
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad n_s '{a}'")))?;
    let n_t = b
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad n_t '{b}'")))?;
    Ok((n_s, n_t))
}

fn parse_kind(text: &str) -> ProblemKind {
    match text {
        "perforated_neumann_inner" => ProblemKind::PerforatedNeumannInner,
        "punctured_friedrichs" => ProblemKind::PuncturedFriedrichs,
        "localized_field" => ProblemKind::LocalizedField,
        _ => ProblemKind::PerforatedDirichletInner,
    }
}

fn out_writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Load the config, fold global flag overrides into it.
fn effective_config(cli: &Cli, fallback: ExperimentKind) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => default_config(fallback),
    };
    if let Some(res) = &cli.resolution {
        let (n_s, n_t) = parse_resolution(res)?;
        cfg.resolution = harness::Resolution { n_s, n_t };
    }
    if let Some(tol) = cli.tol {
        cfg.eig_tol = tol;
    }
    if let Some(fmt) = &cli.format {
        cfg.format = if fmt == "json" {
            OutputFormat::Json
        } else {
            OutputFormat::Csv
        };
    }
    if cli.no_timestamp {
        cfg.no_timestamp = true;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    Ok(cfg)
}

fn emit_report(
    cfg: &ExperimentConfig,
    report: &harness::VerificationReport,
) -> Result<(), Error> {
    let mut out = out_writer(&cfg.out)?;
    match cfg.format {
        OutputFormat::Csv => report.write_csv(&mut out, !cfg.no_timestamp)?,
        OutputFormat::Json => report.write_json(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn run_report_command(cli: &Cli, fallback: ExperimentKind) -> Result<bool, Error> {
    let cfg = effective_config(cli, fallback)?;
    let report = harness::run_experiment(&cfg)?;
    emit_report(&cfg, &report)?;
    eprintln!(
        "{}: {} rows, {} checked, {} passed, {} failed{}",
        report.experiment,
        report.summary.total_rows,
        report.summary.checked,
        report.summary.passed,
        report.summary.failed,
        if report.summary.errors.is_empty() {
            String::new()
        } else {
            format!(", {} solver errors", report.summary.errors.len())
        }
    );
    Ok(report.all_passed())
}

fn run(cli: &Cli) -> Result<bool, Error> {
    match &cli.command {
        Command::Annulus {
            r0,
            r1,
            phi,
            bc,
            n,
            m_window,
        } => {
            let annulus = AnnulusSpec::new(*r0, *r1)?;
            let flux = reduce_flux(*phi)?;
            let inner_bc = if bc == "neumann" {
                InnerBc::Neumann
            } else {
                InnerBc::Dirichlet
            };
            let res =
                radial::annulus_eigenvalue(&annulus, &flux, inner_bc, *n, *m_window)?;
            let mut out = out_writer(&cli.out)?;
            writeln!(out, "R0,R1,phi,m,bc,n,mu,err")?;
            for mode in &res.per_mode {
                writeln!(
                    out,
                    "{}",
                    radial::mode_csv_row(&annulus, &flux, inner_bc, *n, mode)
                )?;
            }
            writeln!(
                out,
                "# lambda = {:.12e} (mode {}, est_error {:.3e})",
                res.lambda, res.minimizing_mode, res.estimated_error
            )?;
            out.flush()?;
            Ok(true)
        }
        Command::Solve {
            domain,
            phi,
            kind,
            core_radius,
            dump_eigenvector,
        } => {
            let dom = domain.resolve()?;
            let kind = parse_kind(kind);
            let (n_s, n_t) = match &cli.resolution {
                Some(r) => parse_resolution(r)?,
                None => (planar::DEFAULT_N_S, planar::DEFAULT_N_T),
            };
            let tol = cli.tol.unwrap_or(planar::DEFAULT_EIG_TOL);
            let res = match kind {
                ProblemKind::LocalizedField => {
                    planar::solve_localized_with_error(&dom, *phi, n_s, n_t, tol)?
                }
                _ => {
                    let flux = reduce_flux(*phi)?;
                    planar::solve_ab_with_error(
                        &dom,
                        &flux,
                        kind,
                        n_s,
                        n_t,
                        *core_radius,
                        tol,
                    )?
                }
            };
            if let Some(path) = dump_eigenvector {
                let dof_map = planar::DofMap {
                    n_s,
                    n_t,
                    dirichlet_inner: kind.dirichlet_inner(),
                };
                let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
                planar::dump_eigenvector_csv(&res, &dof_map, &mut f)?;
            }
            let mut out = out_writer(&cli.out)?;
            writeln!(
                out,
                "lambda = {:.12e}\nresidual = {:.3e}\nest_error = {:.3e}\niterations = {}",
                res.lambda, res.residual, res.estimated_error, res.iterations
            )?;
            out.flush()?;
            Ok(true)
        }
        Command::Certify {
            domain,
            phi,
            bc,
            quad_n,
            with_2d,
        } => {
            let dom = domain.resolve()?;
            let flux = reduce_flux(*phi)?;
            let inner_bc = if bc == "neumann" {
                InnerBc::Neumann
            } else {
                InnerBc::Dirichlet
            };
            let trial = certificates::build_trial_state(
                &dom,
                &flux,
                inner_bc,
                certificates::DEFAULT_PROFILE_ELEMENTS,
            )?;
            let mut report = certificates::rayleigh_quotient(&trial, &dom, *quad_n)?;
            if *with_2d {
                let kind = match inner_bc {
                    InnerBc::Dirichlet => ProblemKind::PerforatedDirichletInner,
                    InnerBc::Neumann => ProblemKind::PerforatedNeumannInner,
                };
                let (n_s, n_t) = match &cli.resolution {
                    Some(r) => parse_resolution(r)?,
                    None => (planar::DEFAULT_N_S, planar::DEFAULT_N_T),
                };
                let tol = cli.tol.unwrap_or(planar::DEFAULT_EIG_TOL);
                let two_d = planar::solve_ab_with_error(
                    &dom,
                    &flux.canonical(),
                    kind,
                    n_s,
                    n_t,
                    None,
                    tol,
                )?;
                report =
                    report.with_domain_eigenvalue(two_d.lambda, two_d.estimated_error);
            }
            let mut out = out_writer(&cli.out)?;
            if cli.format.as_deref() == Some("json") {
                serde_json::to_writer_pretty(&mut out, &report)?;
                writeln!(out)?;
            } else {
                writeln!(
                    out,
                    "rq,lambda_annulus,lambda_domain,mass_gap,energy_gap,rq_error,upper_bound_ok,sandwich_ok"
                )?;
                writeln!(out, "{}", report.csv_row())?;
            }
            out.flush()?;
            Ok(report.upper_bound_ok && report.sandwich_ok.unwrap_or(true))
        }
        Command::Sweep => run_report_command(cli, ExperimentKind::FluxSweep),
        Command::Verify { bc } => {
            let fallback = if bc == "neumann" {
                ExperimentKind::VerifyNeumann
            } else {
                ExperimentKind::VerifyTheorem
            };
            run_report_command(cli, fallback)
        }
        Command::Probe => run_report_command(cli, ExperimentKind::ConjectureProbe),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
