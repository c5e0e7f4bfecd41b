//! Run configuration: a sectioned `key = value` file (TOML syntax) or the
//! equivalent JSON document.
//!
//! ```toml
//! seed = 20240917
//! output_dir = "fracvexp-out"
//!
//! [exponent]
//! dimension = 1
//! order = 0.5
//! m = 0.5
//! q_kind = "example_ii"      # constant | example_i | example_ii | table
//! q_params = []              # constant: [p]; table: [t0, q0, t1, q1, ...]
//!
//! [quadrature]
//! tail_tolerance = 1e-8
//!
//! [solver]
//! nodes = 201
//! tol_res = 1e-6
//!
//! [sweep]
//! directions = 8
//! ```
//!
//! Every section and key is optional; omitted keys take their defaults and
//! unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exponents::{ExponentSpec, QFunction};
use crate::moving_planes::SweepConfig;
use crate::operator::QuadratureConfig;
use crate::solver::SolverConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentSection {
    pub dimension: usize,
    pub order: f64,
    pub m: f64,
    pub q_kind: String,
    pub q_params: Vec<f64>,
}

impl Default for ExponentSection {
    fn default() -> Self {
        ExponentSection {
            dimension: 1,
            order: 0.5,
            m: 0.5,
            q_kind: "example_ii".into(),
            q_params: Vec::new(),
        }
    }
}

impl ExponentSection {
    pub fn build(&self) -> Result<ExponentSpec> {
        let params = |n: usize| -> Result<()> {
            if self.q_params.len() != n {
                return Err(Error::Parse(format!(
                    "q_kind {} takes {n} q_params, got {}",
                    self.q_kind,
                    self.q_params.len()
                )));
            }
            Ok(())
        };
        let q = match self.q_kind.as_str() {
            "constant" => {
                params(1)?;
                QFunction::Constant(self.q_params[0])
            }
            "example_i" => {
                params(0)?;
                QFunction::ExampleI { m: self.m }
            }
            "example_ii" => {
                params(0)?;
                QFunction::ExampleII { m: self.m }
            }
            "table" => {
                if self.q_params.len() < 2 || self.q_params.len() % 2 == 1 {
                    return Err(Error::Parse("table q_params must be (t, Q) pairs".into()));
                }
                QFunction::Table(self.q_params.chunks(2).map(|c| (c[0], c[1])).collect())
            }
            other => return Err(Error::Parse(format!("unknown q_kind {other:?}"))),
        };
        ExponentSpec::new(self.dimension, self.order, self.m, q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Manufactured,
    Power,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub mode: SolveMode,
    /// Nodes per axis on `[−half_width, half_width]^N`.
    pub nodes: usize,
    pub half_width: f64,
    /// Manufactured profile `a(1 − |x|²)₊^β`.
    pub amplitude: f64,
    /// `β`; defaults to the order `s`.
    pub profile_exponent: Option<f64>,
    /// Amplitude of the asymmetric perturbation of the initial guess.
    pub perturbation: f64,
    /// Constant exponent of the power nonlinearity.
    pub q: f64,
    pub tol_res: f64,
    pub max_iters: usize,
    pub eta: f64,
    pub tau0: Option<f64>,
    pub checkpoint_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let it = SolverConfig::default();
        SolverSection {
            mode: SolveMode::Manufactured,
            nodes: 201,
            half_width: 1.5,
            amplitude: 0.5,
            profile_exponent: None,
            perturbation: 0.05,
            q: 2.0,
            tol_res: 1e-6,
            max_iters: it.max_iters,
            eta: it.eta,
            tau0: it.tau0,
            checkpoint_every: it.checkpoint_every,
        }
    }
}

impl SolverSection {
    pub fn iteration(&self) -> SolverConfig {
        SolverConfig {
            tol_res: self.tol_res,
            max_iters: self.max_iters,
            eta: self.eta,
            tau0: self.tau0,
            checkpoint_every: self.checkpoint_every,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub directions: usize,
    pub lambda_points: usize,
    pub refine_factor: usize,
    pub tol: f64,
    pub tol_lambda: Option<f64>,
    pub decay_tol: f64,
    pub radial_tol: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let s = SweepConfig::default();
        SweepSection {
            directions: 8,
            lambda_points: s.lambda_points,
            refine_factor: s.refine_factor,
            tol: s.tol,
            tol_lambda: s.tol_lambda,
            decay_tol: s.decay_tol,
            radial_tol: s.radial_tol,
        }
    }
}

impl SweepSection {
    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            lambda_points: self.lambda_points,
            refine_factor: self.refine_factor,
            tol: self.tol,
            tol_lambda: self.tol_lambda,
            lambda_range: None,
            decay_tol: self.decay_tol,
            radial_tol: self.radial_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSection {
    pub mean_value_samples: usize,
    pub kernel_samples: usize,
    pub g_prime_samples: usize,
}

impl Default for LemmaSection {
    fn default() -> Self {
        LemmaSection {
            mean_value_samples: 100_000,
            kernel_samples: 10_000,
            g_prime_samples: 100_000,
        }
    }
}

/// Sizes of the operator and maximum-principle checks of `reproduce-all`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksSection {
    pub nodes_1d: usize,
    pub nodes_2d: usize,
    pub oddness_cases: usize,
    pub strong_mp_functions: usize,
    pub probe_levels: (i32, i32),
    pub probe_plane: f64,
}

impl Default for ChecksSection {
    fn default() -> Self {
        ChecksSection {
            nodes_1d: 401,
            nodes_2d: 101,
            oddness_cases: 1000,
            strong_mp_functions: 20,
            probe_levels: (3, 10),
            probe_plane: -0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: String,
    pub exponent: ExponentSection,
    pub quadrature: QuadratureConfig,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub lemmas: LemmaSection,
    pub checks: ChecksSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 20240917,
            output_dir: "fracvexp-out".into(),
            exponent: ExponentSection::default(),
            quadrature: QuadratureConfig::default(),
            solver: SolverSection::default(),
            sweep: SweepSection::default(),
            lemmas: LemmaSection::default(),
            checks: ChecksSection::default(),
        }
    }
}

impl RunConfig {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.exponent.build()?;
        self.quadrature.validate()?;
        self.solver.iteration().validate()?;
        self.sweep.sweep().validate()?;
        if self.solver.nodes < 5 || !(self.solver.half_width > 1.0) {
            return Err(Error::invalid("solver grid needs at least 5 nodes and half_width > 1"));
        }
        if !(self.solver.amplitude > 0.0 && self.solver.amplitude < 1.0) {
            return Err(Error::invalid("solver amplitude must lie in (0, 1)"));
        }
        if self.sweep.directions == 0 {
            return Err(Error::invalid("at least one sweep direction is required"));
        }
        if i64::try_from(self.seed).is_err() {
            return Err(Error::invalid("seed must not exceed 2^63 - 1 (the TOML integer range)"));
        }
        if self.checks.probe_levels.0 > self.checks.probe_levels.1 {
            return Err(Error::invalid("probe_levels must be increasing"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// SHA-256 of the canonical JSON form, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = String::new();
        let json = serde_json::to_string(&c).expect("configuration serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml_and_json() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
        assert_eq!(RunConfig::parse(&serde_json::to_string(&c).unwrap()).unwrap(), c);
    }

    #[test]
    fn sections_are_partial_and_strict() {
        let c = RunConfig::parse("seed = 3\n[exponent]\nq_kind = \"constant\"\nq_params = [3.0]\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.exponent.build().unwrap().p_plus(), 3.0);
        assert!(matches!(
            RunConfig::parse("[exponent]\nbogus = 1\n"),
            Err(Error::Parse(_))
        ));
        assert!(RunConfig::parse("[exponent]\nq_kind = \"constant\"\n").is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
