//! Bundled configurations that regenerate the published figures.

use ptchain_core::entanglement::Prescription;
use ptchain_core::fits::{CasimirShift, TrimPolicy};
use ptchain_core::model::Boundary;

use crate::config::{Ells, ExperimentConfig, Model, Output, Sizes, Task, Tolerances};
use crate::RunError;

pub const FIGURES: &[&str] = &[
    "fig2a", "fig2b", "fig2c", "fig2d", "fig4a", "sm-s1", "sm-s2", "sm-s2-abs", "sm-s4a", "sm-s4b", "sm-s4c", "sm-s4d",
    "sm-s4e", "sm-s4f", "sm-s5a", "sm-s5b", "sm-s5c", "sm-s5d", "sm-s5e", "sm-s5f", "sm-s6a", "sm-s6b", "sm-s6d",
];

/// Bare family names resolve to their first or headline panel.
fn alias(name: &str) -> &str {
    match name {
        "sm-s4" => "sm-s4c",
        "sm-s5" => "sm-s5a",
        "sm-s6" => "sm-s6b",
        other => other,
    }
}

fn chain(alpha: usize, v: f64, w: f64, u: f64, detuning: f64, cells: usize, boundary: Boundary) -> Model {
    Model::Chain {
        alpha,
        v,
        w,
        u: Some(u),
        detuning,
        cells,
        boundary,
    }
}

/// Critical chain written as `u = 1 - detuning` with `|v - w| = 1`.
fn qcp(alpha: usize, v: f64, w: f64, cells: usize, boundary: Boundary) -> Model {
    chain(alpha, v, w, (v - w).abs(), 1e-12, cells, boundary)
}

fn log_grid() -> Ells {
    Ells::Log {
        lo: 1,
        hi: None,
        count: 24,
    }
}

fn cc(model: Model, trim: TrimPolicy) -> (Model, Task) {
    let task = Task::CcFit {
        ells: log_grid(),
        prescription: Prescription::BranchCut,
        trim,
    };
    (model, task)
}

fn obc_panel(alpha: usize, v: f64, w: f64) -> (Model, Task) {
    let task = Task::CcFit {
        ells: Ells::Range {
            lo: 1,
            hi: None,
            step: 1,
        },
        prescription: Prescription::Regularized,
        trim: TrimPolicy::UntilRmse(1e-4),
    };
    (chain(alpha, v, w, (v - w).abs(), 1e-12, 200, Boundary::Obc), task)
}

fn interface(v1: f64) -> (Model, Task) {
    let model = Model::Interface {
        v1,
        v2: 0.5,
        w: 1.0,
        u: 0.5,
        cells_left: 20,
        cells_right: 20,
    };
    (model, Task::Density { ipr_threshold: None })
}

pub fn figure_cookbook(name: &str) -> Result<ExperimentConfig, RunError> {
    let name = alias(name);
    let big = 10_000;
    let (model, task) = match name {
        "fig2a" => cc(qcp(1, 2.0, 1.0, big, Boundary::Pbc), TrimPolicy::FixedCount(0)),
        "fig2b" => cc(qcp(1, 1.0, 2.0, big, Boundary::Pbc), TrimPolicy::FixedCount(0)),
        "fig2c" => cc(qcp(2, 1.0, 2.0, big, Boundary::Pbc), TrimPolicy::UntilSse(1e-4)),
        "fig2d" => (
            qcp(1, 1.0, 2.0, 64, Boundary::Pbc),
            Task::Casimir {
                sizes: Sizes::Range {
                    lo: 64,
                    hi: 512,
                    step: 32,
                },
                shift: CasimirShift::Scan,
            },
        ),
        "fig4a" => (
            chain(1, 1.0, 2.0, 1.0, 1e-10, 1000, Boundary::Pbc),
            Task::Disorder {
                bound: 0.999,
                realizations: 1000,
                ells: log_grid(),
                trim: TrimPolicy::FixedCount(0),
            },
        ),
        "sm-s1" => (
            qcp(1, 1.0, 2.0, big, Boundary::Pbc),
            Task::EntropyScan {
                ells: log_grid(),
                prescription: Prescription::Principal,
            },
        ),
        "sm-s2" | "sm-s2-abs" => (
            chain(1, 2.0, 1.0, 1.0, 1e-7, big, Boundary::Pbc),
            Task::EntropyScan {
                ells: Ells::Range {
                    lo: 1,
                    hi: Some(40),
                    step: 1,
                },
                prescription: if name == "sm-s2" {
                    Prescription::BranchCut
                } else {
                    Prescription::AbsoluteValue
                },
            },
        ),
        "sm-s4a" => cc(qcp(2, 2.0, 1.0, big, Boundary::Pbc), TrimPolicy::FixedCount(0)),
        "sm-s4b" => cc(qcp(3, 2.0, 1.0, big, Boundary::Pbc), TrimPolicy::FixedCount(0)),
        "sm-s4c" => cc(qcp(3, 1.0, 2.0, big, Boundary::Pbc), TrimPolicy::UntilSse(1e-4)),
        "sm-s4d" => cc(qcp(4, 2.0, 1.0, big, Boundary::Pbc), TrimPolicy::FixedCount(0)),
        "sm-s4e" => cc(qcp(4, 1.0, 2.0, big, Boundary::Pbc), TrimPolicy::UntilSse(1e-4)),
        "sm-s4f" => cc(qcp(5, 2.0, 1.0, big, Boundary::Pbc), TrimPolicy::FixedCount(0)),
        "sm-s5a" => obc_panel(1, 2.0, 1.0),
        "sm-s5b" => obc_panel(1, 10.0, 9.0),
        "sm-s5c" => obc_panel(1, 1.0, 2.0),
        "sm-s5d" => obc_panel(1, 9.0, 10.0),
        "sm-s5e" => obc_panel(2, 2.0, 1.0),
        "sm-s5f" => obc_panel(2, 1.0, 2.0),
        "sm-s6a" => interface(100.0),
        "sm-s6b" => interface(1.5),
        "sm-s6d" => interface(1.1),
        _ => return Err(RunError::UnknownFigure(name.to_string())),
    };
    Ok(ExperimentConfig {
        seed: 0,
        model,
        task,
        output: Output {
            dir: format!("figures/{name}"),
            stem: name.to_string(),
        },
        tolerances: Tolerances::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_validates() {
        for name in FIGURES.iter().chain(&["sm-s4", "sm-s5", "sm-s6"]) {
            let c = figure_cookbook(name).unwrap();
            c.validate().unwrap();
            // Bundled configs survive a TOML round trip.
            let text = toml::to_string(&c).unwrap();
            assert_eq!(ExperimentConfig::parse(&text).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn named_examples() {
        let c = figure_cookbook("fig2d").unwrap();
        assert!(matches!(c.task, Task::Casimir { shift: CasimirShift::Scan, .. }));
        assert!(matches!(c.model, Model::Chain { boundary: Boundary::Pbc, .. }));

        let c = figure_cookbook("sm-s6b").unwrap();
        assert_eq!(c.model.interface().unwrap(), ptchain_core::model::InterfaceSpec::new(1.5, 0.5, 1.0, 0.5, 20, 20));
        assert!(matches!(c.task, Task::Density { .. }));

        assert!(matches!(figure_cookbook("nope"), Err(RunError::UnknownFigure(_))));
    }
}
