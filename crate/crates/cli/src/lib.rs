//! Scenario registry and runner behind the `fitcheck` binary.
//!
//! Every scenario is a pure function of [`RunConfig`]; `run_all` may execute
//! them concurrently but assembles the aggregate report in name order, so
//! identical configs give byte-identical JSON.

use std::collections::BTreeMap;
use std::path::PathBuf;

use fitcheck_core::fermion::{build_modes, check_car, footnote_check, ModeSet};
use fitcheck_core::gpt::{
    build_instance, holistic_subspace, is_locally_tomographic, product_span, prop1_check,
    prop2_witness, witness_exists_for_sample, CompositeModel, InstanceKind, RANK_REL_TOL,
};
use fitcheck_core::independence::{
    bell_projector, counterexample_scenario, independence_verdict, rho_ab, twirl, TwirlGroup,
};
use fitcheck_core::linops::{herm_eigen, kron_all, sigma_y, sigma_z, Matrix, QuantumState};
use fitcheck_core::{Check, Report};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown scenario '{0}' (see `fitcheck list`)")]
    UnknownScenario(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Core(#[from] fitcheck_core::Error),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_status(&self) -> i32 {
        match self {
            CliError::UnknownScenario(_) | CliError::InvalidConfig(_) => EXIT_USAGE,
            CliError::Core(_) | CliError::Io(_) => EXIT_FAIL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tolerance: f64,
    pub seed: u64,
    pub format: Format,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            seed: 0,
            format: Format::Text,
            output_path: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(CliError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }

    /// Renders a report in the configured format.
    pub fn render(&self, report: &Report) -> String {
        match self.format {
            Format::Text => report.to_text(),
            Format::Json => {
                let mut s = report.to_json();
                s.push('\n');
                s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioDescriptor {
    pub name: String,
    pub module: String,
    pub parameters: BTreeMap<String, String>,
    pub description: String,
}

type Runner = fn(&RunConfig) -> Result<Report, CliError>;

struct Entry {
    name: &'static str,
    module: &'static str,
    parameters: &'static [(&'static str, &'static str)],
    description: &'static str,
    runner: Runner,
}

const CAR_MODES: [usize; 5] = [2, 3, 4, 5, 6];
const PROP1_TRIALS: usize = 100;
const CROSS_CHECK_SAMPLES: usize = 20;

/// Registry in name order.
const SCENARIOS: &[Entry] = &[
    Entry {
        name: "car-check",
        module: "fermion",
        parameters: &[("modes", "2,3,4,5,6")],
        description: "Anticommutation relations of the Jordan-Wigner operators",
        runner: run_car,
    },
    Entry {
        name: "counterexample",
        module: "independence",
        parameters: &[],
        description: "Bell mixture: operationally independent yet not independently preparable",
        runner: run_counterexample,
    },
    Entry {
        name: "cross-check",
        module: "gpt+independence",
        parameters: &[("instance", "fermi-two-modes"), ("base", "I/4")],
        description: "Holistic witness fed back through the independence verdict",
        runner: run_cross_check,
    },
    Entry {
        name: "footnote",
        module: "fermion",
        parameters: &[],
        description: "Sign of (f_B + f_B^+) on |1>_A ^ |1>_B versus the per-factor action",
        runner: run_footnote,
    },
    Entry {
        name: "gpt-tomography-complex",
        module: "gpt",
        parameters: &[("instance", "complex-qubit-pair")],
        description: "Dimension table and local tomography of the complex qubit pair",
        runner: |cfg| run_tomography(InstanceKind::ComplexQubitPair, cfg),
    },
    Entry {
        name: "gpt-tomography-fermi",
        module: "gpt",
        parameters: &[("instance", "fermi-two-modes")],
        description: "Dimension table and local tomography of two parity-restricted modes",
        runner: |cfg| run_tomography(InstanceKind::FermiTwoModes, cfg),
    },
    Entry {
        name: "gpt-tomography-real",
        module: "gpt",
        parameters: &[("instance", "real-qubit-pair")],
        description: "Dimension table and local tomography of the real qubit pair",
        runner: |cfg| run_tomography(InstanceKind::RealQubitPair, cfg),
    },
    Entry {
        name: "prop1",
        module: "gpt",
        parameters: &[("instance", "complex-qubit-pair"), ("trials", "100")],
        description: "Independence iff product of marginals on a locally tomographic model",
        runner: run_prop1,
    },
    Entry {
        name: "prop2-witness-fermi",
        module: "gpt",
        parameters: &[("instance", "fermi-two-modes"), ("base", "I/4")],
        description: "Locally invisible, non-product perturbation of I/4 for two modes",
        runner: |cfg| run_prop2(InstanceKind::FermiTwoModes, cfg),
    },
    Entry {
        name: "prop2-witness-real",
        module: "gpt",
        parameters: &[("instance", "real-qubit-pair"), ("base", "I/4")],
        description: "Locally invisible, non-product perturbation of I/4 for real qubits",
        runner: |cfg| run_prop2(InstanceKind::RealQubitPair, cfg),
    },
    Entry {
        name: "tomography-equivalence",
        module: "gpt",
        parameters: &[("samples", "20")],
        description: "Local tomography iff no holistic witness over sampled product states",
        runner: run_equivalence,
    },
    Entry {
        name: "twirl-identity",
        module: "independence",
        parameters: &[],
        description: "Local-parity twirl of the Bell mixture is I/4, exactly",
        runner: run_twirl,
    },
];

pub fn list_scenarios() -> Vec<ScenarioDescriptor> {
    SCENARIOS
        .iter()
        .map(|e| ScenarioDescriptor {
            name: e.name.to_string(),
            module: e.module.to_string(),
            parameters: e
                .parameters
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            description: e.description.to_string(),
        })
        .collect()
}

/// Maps `gpt-tomography` / `prop2-witness` plus an instance to a registry name.
pub fn resolve_name(name: &str, instance: Option<InstanceKind>) -> String {
    match instance {
        None => name.to_string(),
        Some(kind) => {
            let suffix = match kind {
                InstanceKind::ComplexQubitPair => "complex",
                InstanceKind::RealQubitPair => "real",
                InstanceKind::FermiTwoModes => "fermi",
            };
            format!("{name}-{suffix}")
        }
    }
}

pub fn run(name: &str, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let entry = SCENARIOS
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CliError::UnknownScenario(name.to_string()))?;
    let mut report = (entry.runner)(cfg)?;
    report.scenario = entry.name.to_string();
    report.tol = cfg.tolerance;
    report.seed = cfg.seed;
    Ok(report)
}

/// Runs every scenario; one summary check per scenario plus the nested reports.
pub fn run_all(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let reports: Vec<Result<Report, CliError>> =
        SCENARIOS.par_iter().map(|e| run(e.name, cfg)).collect();
    let mut aggregate = Report::new("run-all", cfg.tolerance, cfg.seed);
    for r in reports {
        let r = r?;
        aggregate.push(Check::new(r.scenario.clone(), r.passed(), r.max_residual()));
        aggregate.reports.push(r);
    }
    Ok(aggregate)
}

pub fn exit_status(report: &Report) -> i32 {
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn run_car(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new("car-check", cfg.tolerance, cfg.seed);
    for n in CAR_MODES {
        let sub = check_car(&build_modes(n)?, cfg.tolerance);
        report.push(Check::new(
            format!("car n={n}"),
            sub.passed(),
            sub.max_residual(),
        ));
    }
    Ok(report)
}

fn run_footnote(_cfg: &RunConfig) -> Result<Report, CliError> {
    Ok(footnote_check(&build_modes(2)?)?)
}

fn run_counterexample(cfg: &RunConfig) -> Result<Report, CliError> {
    Ok(counterexample_scenario(cfg.tolerance))
}

fn run_twirl(cfg: &RunConfig) -> Result<Report, CliError> {
    let ms = build_modes(2)?;
    let group = TwirlGroup::local_parity_group(&ms, &ModeSet::single(0), &ModeSet::single(1))?;
    let quarter = Matrix::identity(4).scale(0.25);
    let tol = cfg.tolerance;
    let mut report = Report::new("twirl-identity", tol, cfg.seed);

    let tw = twirl(&rho_ab(), &group)?;
    let r = tw.op().max_abs_diff(&quarter);
    report.push(Check::new("rho_ab -> I/4", r <= tol, r));

    let mm = QuantumState::new(quarter.clone(), vec![2, 2])?;
    let r = twirl(&mm, &group)?.op().max_abs_diff(&quarter);
    report.push(Check::new("I/4 invariant", r <= tol, r));

    // phi+ -> (phi+ + phi-)/2 = diag(1/2, 0, 0, 1/2) with no coherences.
    let phi = QuantumState::new(bell_projector(true), vec![2, 2])?;
    let expected = Matrix::diag(&[0.5, 0.0, 0.0, 0.5]);
    let r = twirl(&phi, &group)?.op().max_abs_diff(&expected);
    report.push(Check::new("phi+ -> (phi+ + phi-)/2", r <= tol, r));

    let r = twirl(&tw, &group)?.op().max_abs_diff(tw.op());
    report.push(Check::new("idempotent", r <= tol, r));
    Ok(report)
}

/// Reference values: (composite dim, product-span rank, holistic dim, locally tomographic).
fn expected_table(kind: InstanceKind) -> (usize, usize, usize, bool) {
    match kind {
        InstanceKind::ComplexQubitPair => (16, 16, 0, true),
        InstanceKind::RealQubitPair => (10, 9, 1, false),
        InstanceKind::FermiTwoModes => (8, 4, 4, false),
    }
}

fn count_check(name: &str, got: usize, want: usize) -> Check {
    Check::new(name, got == want, got.abs_diff(want) as f64)
        .with_witness(json!({"value": got, "expected": want}))
}

fn run_tomography(kind: InstanceKind, cfg: &RunConfig) -> Result<Report, CliError> {
    let cm = build_instance(kind);
    let (dim, rank, hol_dim, tomo) = expected_table(kind);
    let span = product_span(&cm)?;
    let hol = holistic_subspace(&cm)?;
    let mut report = Report::new(format!("gpt-tomography/{kind}"), cfg.tolerance, cfg.seed);
    report
        .push(count_check("composite_dim", cm.composite_dim(), dim))
        .push(count_check("product_span_rank", span.dim(), rank))
        .push(count_check("holistic_dim", hol.dim(), hol_dim))
        .push(count_check(
            "decomposition_complete",
            span.dim() + hol.dim(),
            cm.composite_dim(),
        ));

    let invisible = hol
        .vectors
        .iter()
        .flat_map(|h| {
            cm.local_effect_functionals()
                .into_iter()
                .map(move |e| e.iter().zip(h).map(|(a, b)| a * b).sum::<f64>().abs())
        })
        .fold(0.0, f64::max);
    report.push(Check::new(
        "holistic_invisible",
        invisible <= cfg.tolerance,
        invisible,
    ));

    for (side, sys) in [("a", cm.sys_a()), ("b", cm.sys_b())] {
        report.push(count_check(
            &format!("single_system_tomographic_{side}"),
            sys.effect_rank(RANK_REL_TOL),
            sys.ambient_dim(),
        ));
    }

    let lt = is_locally_tomographic(&cm, RANK_REL_TOL);
    report.push(
        Check::new(
            "locally_tomographic",
            lt == tomo,
            if lt == tomo { 0.0 } else { 1.0 },
        )
        .with_witness(json!({"value": lt, "expected": tomo})),
    );
    Ok(report)
}

fn run_prop1(cfg: &RunConfig) -> Result<Report, CliError> {
    let cm = build_instance(InstanceKind::ComplexQubitPair);
    Ok(prop1_check(&cm, PROP1_TRIALS, cfg.seed, cfg.tolerance)?)
}

fn maximally_mixed(cm: &CompositeModel) -> Result<Vec<f64>, CliError> {
    Ok(cm.embed(&Matrix::identity(4).scale(0.25), 1e-12)?)
}

fn run_prop2(kind: InstanceKind, cfg: &RunConfig) -> Result<Report, CliError> {
    let cm = build_instance(kind);
    let (tilde, mut report) = prop2_witness(&cm, &maximally_mixed(&cm)?, cfg.tolerance)?;
    let op = cm
        .operator(&tilde)
        .expect("reference instances carry a frame");
    let expected = match kind {
        InstanceKind::FermiTwoModes => rho_ab().into_op(),
        InstanceKind::RealQubitPair => {
            let yy = kron_all(&[sigma_y(), sigma_y()]);
            (&Matrix::identity(4).to_complex() + &yy).scale(0.25)
        }
        InstanceKind::ComplexQubitPair => unreachable!("no holistic directions"),
    };
    let r = op.max_abs_diff(&expected);
    report.push(Check::new(
        "witness_matches_reference",
        r <= cfg.tolerance,
        r,
    ));

    let ev = herm_eigen(&op)?;
    let r = ev
        .iter()
        .zip([0.0, 0.0, 0.5, 0.5])
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    report.push(Check::new("spectrum {0,0,1/2,1/2}", r <= cfg.tolerance, r));
    Ok(report)
}

fn run_cross_check(cfg: &RunConfig) -> Result<Report, CliError> {
    let cm = build_instance(InstanceKind::FermiTwoModes);
    let (tilde, _) = prop2_witness(&cm, &maximally_mixed(&cm)?, cfg.tolerance)?;
    let op = cm
        .operator(&tilde)
        .expect("reference instances carry a frame");
    let s = QuantumState::new(op, vec![2, 2])?;
    let ms = build_modes(2)?;
    let v = independence_verdict(
        &ms,
        &s,
        (&ModeSet::single(0), &ModeSet::single(1)),
        cfg.tolerance,
    )?;
    let flag = |ok: bool| if ok { 0.0 } else { 1.0 };
    let mut report = Report::new("cross-check", cfg.tolerance, cfg.seed);
    report
        .push(Check::new(
            "operationally_independent",
            v.operationally_independent,
            v.max_residual,
        ))
        .push(Check::new(
            "not_product_state",
            !v.product_state,
            flag(!v.product_state),
        ))
        .push(Check::new(
            "not_independently_preparable",
            !v.independently_preparable,
            flag(!v.independently_preparable),
        ));
    // Parity of the witness matches the counterexample: it commutes with Z (x) Z.
    let zz = kron_all(&[sigma_z(), sigma_z()]);
    let r = fitcheck_core::linops::commutator_norm(s.op(), &zz)?;
    report.push(Check::new("ssr_valid_witness", r <= cfg.tolerance, r));
    Ok(report)
}

fn run_equivalence(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new("tomography-equivalence", cfg.tolerance, cfg.seed);
    for kind in InstanceKind::ALL {
        let cm = build_instance(kind);
        let tomographic = is_locally_tomographic(&cm, RANK_REL_TOL);
        let witness = witness_exists_for_sample(&cm, CROSS_CHECK_SAMPLES, cfg.seed, cfg.tolerance)?;
        let ok = tomographic != witness;
        report.push(
            Check::new(format!("{kind}"), ok, if ok { 0.0 } else { 1.0 }).with_witness(
                json!({"locally_tomographic": tomographic, "witness_found": witness}),
            ),
        );
    }
    Ok(report)
}
