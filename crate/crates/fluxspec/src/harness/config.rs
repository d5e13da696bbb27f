//! JSON experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{make_eccentric_annulus, make_perturbed_disk, StarDomain};
use crate::planar::ProblemKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FluxSweep,
    ShapeFamily,
    ShrinkingHole,
    LargeFlux,
    VerifyTheorem,
    VerifyNeumann,
    ConjectureProbe,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ExperimentKind::FluxSweep => "flux_sweep",
            ExperimentKind::ShapeFamily => "shape_family",
            ExperimentKind::ShrinkingHole => "shrinking_hole",
            ExperimentKind::LargeFlux => "large_flux",
            ExperimentKind::VerifyTheorem => "verify_theorem",
            ExperimentKind::VerifyNeumann => "verify_neumann",
            ExperimentKind::ConjectureProbe => "conjecture_probe",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_s: usize,
    pub n_t: usize,
}

fn default_resolution() -> Resolution {
    Resolution {
        n_s: crate::planar::DEFAULT_N_S,
        n_t: crate::planar::DEFAULT_N_T,
    }
}

/// Parametric domain families expanded into explicit domains at run time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    Eccentric {
        r0: f64,
        r1: f64,
        deltas: Vec<f64>,
    },
    PerturbedDisk {
        r1: f64,
        r0: f64,
        harmonic: usize,
        amplitudes: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LargeFluxSpec {
    /// Fractional part of the flux ladder.
    pub nu: f64,
    /// Integer offsets n; the ladder is Φ = nu + n.
    pub n_values: Vec<u32>,
    /// Angular cells per unit of flux (the eigenstate winds ~Φ times).
    #[serde(default = "default_cells_per_flux")]
    pub angular_cells_per_flux: usize,
}

impl Default for LargeFluxSpec {
    fn default() -> Self {
        Self {
            nu: 0.5,
            n_values: vec![0, 2, 4, 8, 12],
            angular_cells_per_flux: default_cells_per_flux(),
        }
    }
}

fn default_cells_per_flux() -> usize {
    48
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_true() -> bool {
    true
}
fn default_radial_elements() -> usize {
    crate::radial::DEFAULT_ELEMENTS
}
fn default_m_window() -> i64 {
    crate::radial::DEFAULT_M_WINDOW
}
fn default_eig_tol() -> f64 {
    crate::planar::DEFAULT_EIG_TOL
}
fn default_pass_margin() -> f64 {
    10.0
}
fn default_shrink_rel_tol() -> f64 {
    0.02
}

/// One experiment description. Unknown keys are rejected so config typos
/// surface instead of silently using defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub domains: Vec<StarDomain>,
    #[serde(default)]
    pub families: Vec<FamilySpec>,
    /// Add the matched concentric control domain to verify runs.
    #[serde(default = "default_true")]
    pub include_control: bool,
    #[serde(default)]
    pub flux_grid: Vec<f64>,
    /// Problem kind for sweeps and probes; verify experiments fix their own.
    #[serde(default)]
    pub kind: Option<ProblemKind>,
    #[serde(default = "default_resolution")]
    pub resolution: Resolution,
    #[serde(default = "default_radial_elements")]
    pub radial_elements: usize,
    #[serde(default = "default_m_window")]
    pub m_window: i64,
    #[serde(default = "default_eig_tol")]
    pub eig_tol: f64,
    /// Safety factor k: a strict inequality passes when gap > k·est_error.
    #[serde(default = "default_pass_margin")]
    pub pass_margin: f64,
    /// Core radii ladder for shrinking-hole runs, strictly decreasing.
    #[serde(default)]
    pub core_radii: Vec<f64>,
    /// Relative agreement demanded between the smallest-core eigenvalue and
    /// the closed-form limit, when one exists.
    #[serde(default = "default_shrink_rel_tol")]
    pub shrink_rel_tol: f64,
    #[serde(default)]
    pub large_flux: LargeFluxSpec,
    /// Worker threads; 0 uses the process default. The environment variable
    /// `FLUXSPEC_WORKERS` overrides this.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub no_timestamp: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.flux_grid_or_default().is_empty() {
            return Err(Error::Config("empty flux grid".into()));
        }
        if !(self.pass_margin > 0.0) {
            return Err(Error::Config("pass_margin must be positive".into()));
        }
        for w in self.core_radii.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Config(
                    "core_radii must be strictly decreasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// Flux grid with per-experiment defaults when the config omits one.
    pub fn flux_grid_or_default(&self) -> Vec<f64> {
        if !self.flux_grid.is_empty() {
            return self.flux_grid.clone();
        }
        match self.experiment {
            ExperimentKind::VerifyTheorem | ExperimentKind::ShapeFamily => {
                vec![0.1, 0.25, 0.5]
            }
            ExperimentKind::VerifyNeumann => vec![0.25, 0.5],
            ExperimentKind::FluxSweep => {
                let mut g: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
                g.extend_from_slice(&[-0.2, 1.2, 1.7]);
                g
            }
            ExperimentKind::ShrinkingHole => vec![0.5],
            ExperimentKind::LargeFlux => vec![self.large_flux.nu],
            ExperimentKind::ConjectureProbe => vec![0.1, 0.25, 0.5, 0.75, 1.0],
        }
    }

    pub fn core_radii_or_default(&self) -> Vec<f64> {
        if self.core_radii.is_empty() {
            vec![0.04, 0.02, 0.01, 0.005]
        } else {
            self.core_radii.clone()
        }
    }

    /// Expand families and explicit domains; optionally append a concentric
    /// control matched to the first entry.
    pub fn resolve_domains(&self) -> Result<Vec<StarDomain>> {
        let mut out = self.domains.clone();
        for fam in &self.families {
            match fam {
                FamilySpec::Eccentric { r0, r1, deltas } => {
                    for &d in deltas {
                        let mut dom = make_eccentric_annulus(*r0, *r1, d)?;
                        dom.label = format!("eccentric delta={d}");
                        out.push(dom);
                    }
                }
                FamilySpec::PerturbedDisk {
                    r1,
                    r0,
                    harmonic,
                    amplitudes,
                } => {
                    if *harmonic == 0 {
                        return Err(Error::Config("harmonic must be ≥ 1".into()));
                    }
                    for &a in amplitudes {
                        let mut cos = vec![0.0; *harmonic];
                        cos[*harmonic - 1] = a;
                        let mut dom = make_perturbed_disk(*r1, *r0, &cos, &[], true)?;
                        dom.label = format!("perturbed k={harmonic} a={a}");
                        out.push(dom);
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::Config("no domains configured".into()));
        }
        if self.include_control {
            let matched = out[0].matched_annulus()?;
            let mut control = make_eccentric_annulus(matched.r0, matched.r1, 0.0)?;
            control.label = "control".into();
            out.push(control);
        }
        Ok(out)
    }

    pub fn worker_count(&self) -> usize {
        std::env::var("FLUXSPEC_WORKERS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(self.workers)
    }
}

/// Built-in configuration for an experiment kind: the default families used
/// when the CLI is invoked without a config file.
pub fn default_config(experiment: ExperimentKind) -> ExperimentConfig {
    let base = ExperimentConfig {
        experiment,
        domains: vec![],
        families: vec![],
        include_control: true,
        flux_grid: vec![],
        kind: None,
        resolution: default_resolution(),
        radial_elements: default_radial_elements(),
        m_window: default_m_window(),
        eig_tol: default_eig_tol(),
        pass_margin: default_pass_margin(),
        core_radii: vec![],
        shrink_rel_tol: default_shrink_rel_tol(),
        large_flux: LargeFluxSpec::default(),
        workers: 0,
        no_timestamp: false,
        out: None,
        format: OutputFormat::Csv,
    };
    match experiment {
        ExperimentKind::VerifyTheorem
        | ExperimentKind::VerifyNeumann
        | ExperimentKind::ShapeFamily => ExperimentConfig {
            families: vec![FamilySpec::Eccentric {
                r0: 1.0,
                r1: 2.0,
                deltas: vec![0.1, 0.3, 0.5],
            }],
            ..base
        },
        ExperimentKind::FluxSweep => ExperimentConfig {
            families: vec![FamilySpec::Eccentric {
                r0: 1.0,
                r1: 2.0,
                deltas: vec![0.3],
            }],
            include_control: false,
            ..base
        },
        ExperimentKind::ShrinkingHole => ExperimentConfig {
            families: vec![FamilySpec::Eccentric {
                r0: 0.005,
                r1: 1.0,
                deltas: vec![0.0],
            }],
            include_control: false,
            resolution: Resolution { n_s: 128, n_t: 48 },
            ..base
        },
        ExperimentKind::LargeFlux | ExperimentKind::ConjectureProbe => ExperimentConfig {
            families: vec![FamilySpec::Eccentric {
                r0: 0.5,
                r1: 2.0,
                deltas: vec![0.3],
            }],
            include_control: false,
            ..base
        },
    }
}
