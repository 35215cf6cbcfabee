//! Task execution. Every task computes all of its artifacts in memory first;
//! files are written only after the computation succeeded.

use num_complex::Complex64;
use ptchain_core::edge::{default_ipr_threshold, interface_continuum, interface_density, interface_lattice_solve, BoundState};
use ptchain_core::entanglement::{correlation_k_space, correlation_matrix, entropy_profile, ProfileRow};
use ptchain_core::fits::{casimir_fit, cc_fit_obc, cc_fit_pbc, disorder_ensemble, FitResult};
use ptchain_core::model::{build_interface, build_real_space, Boundary, ChainSpec};
use ptchain_core::spectral::{
    biorthogonal_diagonalize, density_profile, ground_state_energy, select_half_filling, sorted_eigenvalues,
    DensityProfile,
};
use ptchain_core::topology::{symmetry_closure_with_tol, topology, winding_number};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Model, Task};
use crate::RunError;

/// One output table.
pub struct Table {
    pub suffix: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Artifacts {
    pub tables: Vec<Table>,
    pub summary: Value,
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cjson(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn fit_json(f: &FitResult) -> Value {
    json!({
        "coefficients": f.coefficients,
        "standard_errors": f.standard_errors,
        "sse": f.sse,
        "rmse": f.rmse,
        "trim_count": f.trim_count,
        "n_points": f.n_points,
        "delta_l": f.delta_l,
    })
}

fn bound_state_json(s: &BoundState) -> Value {
    json!({
        "energy": cjson(s.energy),
        "a": s.a,
        "kappa1": cjson(s.kappa1),
        "kappa2": cjson(s.kappa2),
        "beta_l": s.beta_l.map(cjson),
        "beta_r": s.beta_r.map(cjson),
        "sublattice_ratio": cjson(s.sublattice_ratio),
        "residual": s.residual,
        "warnings": s.warnings,
    })
}

fn entropy_table(rows: &[ProfileRow]) -> Table {
    Table {
        suffix: "entropy",
        header: vec!["ell", "re_S", "im_S", "n_edge_pairs", "n_quartets", "n_residual"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.cells.to_string(),
                    num(r.entropy.value.re),
                    num(r.entropy.value.im),
                    r.counts.edge_pairs.to_string(),
                    r.counts.quartets.to_string(),
                    r.counts.residual_pairs.to_string(),
                ]
            })
            .collect(),
    }
}

fn density_table(d: &DensityProfile) -> Table {
    Table {
        suffix: "density",
        header: vec!["site", "cell", "sublattice", "re_n", "im_n"],
        rows: d
            .sites
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let sub = if i % 2 == 0 { "A" } else { "B" };
                vec![i.to_string(), (i / 2).to_string(), sub.into(), num(z.re), num(z.im)]
            })
            .collect(),
    }
}

fn profile(spec: &ChainSpec, ells: &[usize], config: &ExperimentConfig, p: ptchain_core::entanglement::Prescription) -> Result<Vec<ProfileRow>, RunError> {
    Ok(entropy_profile(spec, ells, p, &config.tolerances.spectrum())?)
}

pub fn execute(config: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let task = config.task.name();
    let model = &config.model;
    let mut tables = Vec::new();
    let summary = match &config.task {
        Task::Spectrum => {
            let h = match model {
                Model::Chain { .. } => build_real_space(&model.chain()?)?,
                Model::Interface { .. } => build_interface(&model.interface()?)?,
            };
            let e = sorted_eigenvalues(h.as_ref())?;
            tables.push(Table {
                suffix: "spectrum",
                header: vec!["index", "re_E", "im_E"],
                rows: e.iter().enumerate().map(|(i, z)| vec![i.to_string(), num(z.re), num(z.im)]).collect(),
            });
            json!({ "dimension": e.len() })
        }
        Task::EntropyScan { ells, prescription } => {
            let spec = model.chain()?;
            let rows = profile(&spec, &ells.resolve(spec.cells)?, config, *prescription)?;
            tables.push(entropy_table(&rows));
            json!({ "points": rows.len(), "prescription": prescription })
        }
        Task::CcFit { ells, prescription, trim } => {
            let spec = model.chain()?;
            let rows = profile(&spec, &ells.resolve(spec.cells)?, config, *prescription)?;
            let table: Vec<(f64, f64)> = rows.iter().map(|r| (r.cells as f64, r.entropy.value.re)).collect();
            let fit = match spec.boundary {
                Boundary::Pbc => cc_fit_pbc(&table, spec.cells as f64, *trim)?,
                Boundary::Obc => cc_fit_obc(&table, spec.cells as f64, *trim)?,
            };
            tables.push(entropy_table(&rows));
            json!({ "points": rows.len(), "prescription": prescription, "trim": trim, "fit": fit_json(&fit) })
        }
        Task::Casimir { sizes, shift } => {
            let base = model.chain()?;
            let mut table = Vec::new();
            let mut rows = Vec::new();
            for l in sizes.resolve()? {
                let e = ground_state_energy(&base.clone().with_cells(l))?;
                table.push((l as f64, e.re));
                rows.push(vec![l.to_string(), num(e.re), num(e.im)]);
            }
            let fit = casimir_fit(&table, base.boundary == Boundary::Pbc, *shift)?;
            tables.push(Table {
                suffix: "casimir",
                header: vec!["L", "re_E0", "im_E0"],
                rows,
            });
            json!({ "shift": shift, "fit": fit_json(&fit) })
        }
        Task::Winding { n_k } => json!({ "n_k": n_k, "winding": winding_number(&model.chain()?, *n_k)? }),
        Task::Zak { n_k } => {
            let t = topology(&model.chain()?, *n_k)?;
            json!({
                "n_k": n_k,
                "zak": cjson(t.zak),
                "winding": t.winding,
                "re_zak_deviation": t.re_zak_deviation,
                "pt_class": t.pt_class,
            })
        }
        Task::Interface => {
            let spec = model.interface()?;
            let continuum = match interface_continuum(spec.w - spec.v1, spec.u) {
                Ok(s) => bound_state_json(&s),
                Err(e) => json!({ "error": e.name(), "message": e.to_string() }),
            };
            let lattice = interface_lattice_solve(&spec)?;
            if let Some(psi) = &lattice.profile {
                tables.push(Table {
                    suffix: "profile",
                    header: vec!["site", "cell", "sublattice", "re_psi", "im_psi"],
                    rows: psi
                        .iter()
                        .enumerate()
                        .map(|(i, z)| {
                            let sub = if i % 2 == 0 { "A" } else { "B" };
                            vec![i.to_string(), (i / 2).to_string(), sub.into(), num(z.re), num(z.im)]
                        })
                        .collect(),
                });
            }
            json!({ "continuum": continuum, "lattice": bound_state_json(&lattice) })
        }
        Task::Disorder {
            bound,
            realizations,
            ells,
            trim,
        } => {
            let spec = model.chain()?;
            let ells = ells.resolve(spec.cells)?;
            let stats = disorder_ensemble(&spec, *bound, *realizations, config.seed, &ells, &config.tolerances.spectrum())?;
            let table: Vec<(f64, f64)> = ells.iter().zip(&stats.mean_re).map(|(&l, &s)| (l as f64, s)).collect();
            let fit = match spec.boundary {
                Boundary::Pbc => cc_fit_pbc(&table, spec.cells as f64, *trim),
                Boundary::Obc => cc_fit_obc(&table, spec.cells as f64, *trim),
            };
            tables.push(Table {
                suffix: "ensemble",
                header: vec!["ell", "mean_re_S", "sem_re_S", "mean_im_S", "sem_im_S"],
                rows: (0..ells.len())
                    .map(|i| {
                        vec![
                            ells[i].to_string(),
                            num(stats.mean_re[i]),
                            num(stats.sem_re[i]),
                            num(stats.mean_im[i]),
                            num(stats.sem_im[i]),
                        ]
                    })
                    .collect(),
            });
            tables.push(Table {
                suffix: "realizations",
                header: vec!["realization", "seed", "ell", "im_S"],
                rows: stats
                    .im_per_realization
                    .iter()
                    .enumerate()
                    .flat_map(|(r, ims)| {
                        let seed = config.seed.wrapping_add(r as u64);
                        ells.iter().zip(ims).map(move |(l, im)| vec![r.to_string(), seed.to_string(), l.to_string(), num(*im)])
                    })
                    .collect(),
            });
            json!({
                "realizations": realizations,
                "base_seed": config.seed,
                "bound": bound,
                "fit": fit.as_ref().map(fit_json).unwrap_or_else(|e| json!({ "error": e.name(), "message": e.to_string() })),
            })
        }
        Task::Density { ipr_threshold } => match model {
            Model::Chain { .. } => {
                let spec = model.chain()?;
                let sys = biorthogonal_diagonalize(build_real_space(&spec)?.as_ref())?;
                let occ = select_half_filling(&sys)?;
                let d = density_profile(&sys, &occ);
                let total: Complex64 = d.sites.iter().sum();
                tables.push(density_table(&d));
                json!({ "total": cjson(total), "bell_pairs": occ.bell_pairs() })
            }
            Model::Interface { .. } => {
                let spec = model.interface()?;
                let threshold = ipr_threshold.unwrap_or_else(|| default_ipr_threshold(2 * spec.cells()));
                let d = interface_density(&spec, threshold)?;
                tables.push(density_table(&d.density));
                json!({
                    "energy": cjson(d.energy),
                    "ipr": d.ipr,
                    "ipr_threshold": threshold,
                    "predicted": bound_state_json(&d.predicted),
                })
            }
        },
        Task::SymmetryCheck { ell } => {
            let spec = model.chain()?;
            let c = if spec.boundary == Boundary::Pbc && spec.is_translation_invariant() {
                correlation_k_space(&spec, *ell)?
            } else {
                let sys = biorthogonal_diagonalize(build_real_space(&spec)?.as_ref())?;
                let occ = select_half_filling(&sys)?;
                correlation_matrix(&sys, &occ, *ell)?
            };
            let r = symmetry_closure_with_tol(c.matrix.as_ref(), config.tolerances.tol_sym)?;
            json!({
                "ell": ell,
                "t_plus_residual": r.t_plus_residual,
                "ph_residual": r.ph_residual,
                "t_plus_ok": r.t_plus_ok,
                "ph_ok": r.ph_ok,
                "tol_sym": config.tolerances.tol_sym,
            })
        }
    };
    Ok(Artifacts {
        tables,
        summary: json!({ "task": task, "result": summary }),
    })
}
