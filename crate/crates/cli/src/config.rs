//! Experiment configuration: a single TOML document with a strict schema.

use ptchain_core::entanglement::{Prescription, Tolerances as SpectrumTolerances};
use ptchain_core::fits::{log_spaced, CasimirShift, TrimPolicy};
use ptchain_core::model::{Boundary, ChainSpec, InterfaceSpec};
use ptchain_core::topology::DEFAULT_TOL_SYM;
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed for anything random. Realization `r` uses `seed + r`.
    #[serde(default)]
    pub seed: u64,
    pub model: Model,
    pub task: Task,
    pub output: Output,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Model {
    Chain {
        alpha: usize,
        v: f64,
        w: f64,
        /// Defaults to the critical value `|v - w|`.
        u: Option<f64>,
        #[serde(default)]
        detuning: f64,
        cells: usize,
        boundary: Boundary,
    },
    Interface {
        v1: f64,
        v2: f64,
        w: f64,
        u: f64,
        cells_left: usize,
        cells_right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Ells {
    List(Vec<usize>),
    /// Distinct log-spaced values; `hi` defaults to half the chain.
    Log { lo: usize, hi: Option<usize>, count: usize },
    /// `lo, lo + step, ...` up to `hi` (default half the chain).
    Range {
        lo: usize,
        hi: Option<usize>,
        #[serde(default = "one")]
        step: usize,
    },
}

fn one() -> usize {
    1
}

impl Ells {
    pub fn resolve(&self, cells: usize) -> Result<Vec<usize>, RunError> {
        let half = (cells / 2).max(1);
        match self {
            Ells::List(v) => Ok(v.clone()),
            Ells::Log { lo, hi, count } => {
                log_spaced(*lo, hi.unwrap_or(half), *count).map_err(|e| RunError::Config(e.to_string()))
            }
            Ells::Range { lo, hi, step } => {
                if *step == 0 {
                    return Err(RunError::Config("range step must be positive".into()));
                }
                Ok((*lo..=hi.unwrap_or(half)).step_by(*step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Sizes {
    List(Vec<usize>),
    Range { lo: usize, hi: usize, step: usize },
}

impl Sizes {
    pub fn resolve(&self) -> Result<Vec<usize>, RunError> {
        match self {
            Sizes::List(v) => Ok(v.clone()),
            Sizes::Range { lo, hi, step } if *step > 0 => Ok((*lo..=*hi).step_by(*step).collect()),
            Sizes::Range { .. } => Err(RunError::Config("range step must be positive".into())),
        }
    }
}

fn default_prescription() -> Prescription {
    Prescription::BranchCut
}

fn default_trim() -> TrimPolicy {
    TrimPolicy::FixedCount(0)
}

fn default_nk() -> usize {
    4096
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    /// Dense single-particle spectrum.
    Spectrum,
    EntropyScan {
        ells: Ells,
        #[serde(default = "default_prescription")]
        prescription: Prescription,
    },
    /// Entropy scan plus the Calabrese-Cardy fit matching the boundary.
    CcFit {
        ells: Ells,
        #[serde(default = "default_prescription")]
        prescription: Prescription,
        #[serde(default = "default_trim")]
        trim: TrimPolicy,
    },
    Casimir {
        sizes: Sizes,
        shift: CasimirShift,
    },
    Winding {
        #[serde(default = "default_nk")]
        n_k: usize,
    },
    Zak {
        #[serde(default = "default_nk")]
        n_k: usize,
    },
    /// Continuum and lattice interface bound states.
    Interface,
    Disorder {
        bound: f64,
        realizations: usize,
        ells: Ells,
        #[serde(default = "default_trim")]
        trim: TrimPolicy,
    },
    /// Ground-state site densities (chain) or the interface-mode density.
    Density {
        ipr_threshold: Option<f64>,
    },
    SymmetryCheck {
        ell: usize,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::EntropyScan { .. } => "entropy-scan",
            Task::CcFit { .. } => "cc-fit",
            Task::Casimir { .. } => "casimir",
            Task::Winding { .. } => "winding",
            Task::Zak { .. } => "zak",
            Task::Interface => "interface",
            Task::Disorder { .. } => "disorder",
            Task::Density { .. } => "density",
            Task::SymmetryCheck { .. } => "symmetry-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: String,
    #[serde(default = "default_stem")]
    pub stem: String,
}

fn default_stem() -> String {
    "run".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_real: f64,
    pub tol_edge: f64,
    pub tol_pair: f64,
    pub tol_sym: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = SpectrumTolerances::default();
        Self {
            tol_real: s.tol_real,
            tol_edge: s.tol_edge,
            tol_pair: s.tol_pair,
            tol_sym: DEFAULT_TOL_SYM,
        }
    }
}

impl Tolerances {
    pub fn spectrum(&self) -> SpectrumTolerances {
        SpectrumTolerances {
            tol_real: self.tol_real,
            tol_edge: self.tol_edge,
            tol_pair: self.tol_pair,
        }
    }
}

impl Model {
    pub fn chain(&self) -> Result<ChainSpec, RunError> {
        match *self {
            Model::Chain {
                alpha,
                v,
                w,
                u,
                detuning,
                cells,
                boundary,
            } => {
                let spec = ChainSpec::new(alpha, v, w, u.unwrap_or((v - w).abs()), cells, boundary).with_detuning(detuning);
                spec.validate().map_err(|e| RunError::Config(e.to_string()))?;
                Ok(spec)
            }
            Model::Interface { .. } => Err(RunError::Config("task needs a chain model".into())),
        }
    }

    pub fn interface(&self) -> Result<InterfaceSpec, RunError> {
        match *self {
            Model::Interface {
                v1,
                v2,
                w,
                u,
                cells_left,
                cells_right,
            } => {
                let spec = InterfaceSpec::new(v1, v2, w, u, cells_left, cells_right);
                spec.validate().map_err(|e| RunError::Config(e.to_string()))?;
                Ok(spec)
            }
            Model::Chain { .. } => Err(RunError::Config("task needs an interface model".into())),
        }
    }

    /// Divide every length by `k`, keeping enough cells for the hopping range.
    pub fn scaled(&self, k: usize) -> Self {
        let mut m = self.clone();
        match &mut m {
            Model::Chain { cells, alpha, .. } => *cells = (*cells / k).max(*alpha + 1),
            Model::Interface {
                cells_left,
                cells_right,
                ..
            } => {
                *cells_left = (*cells_left / k).max(2);
                *cells_right = (*cells_right / k).max(2);
            }
        }
        m
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        let config: Self = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks that need more than the schema: model/task pairing and ranges.
    pub fn validate(&self) -> Result<(), RunError> {
        let interface_task = matches!(self.task, Task::Interface);
        match (&self.model, interface_task) {
            (Model::Chain { .. }, true) => return Err(RunError::Config("interface task needs an interface model".into())),
            (Model::Interface { .. }, false) if !matches!(self.task, Task::Density { .. } | Task::Spectrum) => {
                return Err(RunError::Config(format!("task {} needs a chain model", self.task.name())))
            }
            (Model::Chain { .. }, _) => {
                self.model.chain()?;
            }
            (Model::Interface { .. }, _) => {
                self.model.interface()?;
            }
        }
        let tol = &self.tolerances;
        if ![tol.tol_real, tol.tol_edge, tol.tol_pair, tol.tol_sym].iter().all(|t| *t > 0.0 && t.is_finite()) {
            return Err(RunError::Config("tolerances must be positive and finite".into()));
        }
        if let Task::Disorder { bound, realizations, .. } = self.task {
            if !(0.0..1.0).contains(&bound) || realizations == 0 {
                return Err(RunError::Config("disorder needs 0 <= bound < 1 and at least one realization".into()));
            }
        }
        if self.output.stem.is_empty() || self.output.stem.contains(['/', '\\']) {
            return Err(RunError::Config("output stem must be a plain file name".into()));
        }
        Ok(())
    }

    /// Same experiment with every length divided by `k`. Casimir sizes are
    /// divided too; log-spaced subsystem grids keep their count.
    pub fn scaled(&self, k: usize) -> Self {
        if k <= 1 {
            return self.clone();
        }
        let mut c = self.clone();
        c.model = self.model.scaled(k);
        let shrink = |e: &Ells| match e {
            Ells::List(v) => {
                let mut v: Vec<usize> = v.iter().map(|x| (x / k).max(1)).collect();
                v.dedup();
                Ells::List(v)
            }
            Ells::Log { lo, hi, count } => Ells::Log {
                lo: *lo,
                hi: hi.map(|h| (h / k).max(*lo + 1)),
                count: *count,
            },
            Ells::Range { lo, hi, step } => Ells::Range {
                lo: *lo,
                hi: hi.map(|h| (h / k).max(*lo)),
                step: *step,
            },
        };
        match &mut c.task {
            Task::EntropyScan { ells, .. } | Task::CcFit { ells, .. } | Task::Disorder { ells, .. } => *ells = shrink(ells),
            Task::Casimir { sizes, .. } => {
                if let Sizes::Range { lo, hi, step } = sizes {
                    *sizes = Sizes::Range {
                        lo: (*lo / k).max(4),
                        hi: (*hi / k).max(4),
                        step: (*step / k).max(1),
                    };
                } else if let Sizes::List(v) = sizes {
                    let mut v: Vec<usize> = v.iter().map(|x| (x / k).max(4)).collect();
                    v.dedup();
                    *sizes = Sizes::List(v);
                }
            }
            Task::SymmetryCheck { ell } => *ell = (*ell / k).max(1),
            _ => {}
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
seed = 3
[model]
kind = "chain"
alpha = 1
v = 1.0
w = 2.0
detuning = 1e-12
cells = 200
boundary = "pbc"

[task]
kind = "entropy-scan"
ells = { log = { lo = 1, count = 10 } }

[output]
dir = "out"
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse(BASIC).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.output.stem, "run");
        assert_eq!(c.tolerances, Tolerances::default());
        let spec = c.model.chain().unwrap();
        assert_eq!(spec.u, 1.0);
        let Task::EntropyScan { ells, prescription } = &c.task else { panic!() };
        assert_eq!(*prescription, Prescription::BranchCut);
        assert_eq!(ells.resolve(200).unwrap().last(), Some(&100));
    }

    #[test]
    fn rejects_unknown_keys_everywhere() {
        for (from, to) in [
            ("seed = 3", "seed = 3\nextra = 1"),
            ("alpha = 1", "alpha = 1\ngamma = 2"),
            ("kind = \"entropy-scan\"", "kind = \"entropy-scan\"\nwindow = 4"),
            ("dir = \"out\"", "dir = \"out\"\nformat = \"x\""),
            ("count = 10", "count = 10, base = 2"),
        ] {
            let text = BASIC.replace(from, to);
            assert!(matches!(ExperimentConfig::parse(&text), Err(RunError::Config(_))), "{to}");
        }
    }

    #[test]
    fn rejects_negative_cells() {
        let text = BASIC.replace("cells = 200", "cells = -200");
        assert!(matches!(ExperimentConfig::parse(&text), Err(RunError::Config(_))));
    }

    #[test]
    fn rejects_mismatched_model() {
        let text = BASIC.replace("kind = \"entropy-scan\"\nells = { log = { lo = 1, count = 10 } }", "kind = \"interface\"");
        assert!(matches!(ExperimentConfig::parse(&text), Err(RunError::Config(_))));
    }

    #[test]
    fn scaling_divides_lengths() {
        let c = ExperimentConfig::parse(BASIC).unwrap().scaled(4);
        assert_eq!(c.model.chain().unwrap().cells, 50);
    }
}
