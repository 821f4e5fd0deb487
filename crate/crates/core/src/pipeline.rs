//! The end-to-end pipeline: decompose, explore and minimise the components,
//! recombine them over the minimised state spaces, and compare against the
//! monolithic state space.
//!
//! Every stage is deterministic, so two runs over the same inputs produce
//! byte-identical state-space files and tables (timing aside).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::cleave::{
    auto_cleave, check_cleave_oracle, context_over_leaves, induce_component, CleaveOracleReport,
    CleavePlan, Side,
};
use crate::compose::{explore_composition, ProcessLeaf};
use crate::data::{Environment, Expression};
use crate::explore::{explore_lpe, ExploreError, Limits};
use crate::invariant::{check_invariant, restrict_components, Invariant, InvariantError};
use crate::lpe::{project, validate_lpe, Lpe, ProcessInstance};
use crate::lts::{check_bisim, minimise_bisim, write_aut, Lts, MultiActionValue};
use crate::parse::SpecFile;

/// Options for [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub limits: Limits,
    /// Extend independent summands with the fresh `tag` action. Disabling
    /// this reproduces the spurious multi-action overlap the tag exists to
    /// prevent; only useful for demonstration.
    pub use_tag: bool,
    /// Continue past a failed requirements check; the output is then marked
    /// unverified.
    pub force: bool,
    pub invariant: Option<Expression>,
    /// Apply the invariant to the update expressions instead of the
    /// parameters, avoiding deadlock states in restricted components.
    pub invariant_on_update: bool,
    /// Where to write the generated state spaces; nothing is written when
    /// unset.
    pub out_dir: Option<PathBuf>,
    /// Called after each stage to sample peak memory, if the caller tracks
    /// it.
    pub mem_probe: Option<fn() -> u64>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            limits: Limits::default(),
            use_tag: true,
            force: false,
            invariant: None,
            invariant_on_update: false,
            out_dir: None,
            mem_probe: None,
        }
    }
}

/// Metrics for one generated state space, before and after minimisation.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    /// Stable key for machine-readable output.
    pub key: &'static str,
    pub name: String,
    pub states_original: usize,
    pub transitions_original: usize,
    pub states_minimised: usize,
    pub transitions_minimised: usize,
    pub seconds: f64,
    pub peak_mem_bytes: Option<u64>,
}

/// Everything the pipeline produced.
#[derive(Debug)]
pub struct PipelineOutcome {
    pub rows: Vec<MetricsRow>,
    /// The recombined minimised components are strongly bisimilar to the
    /// monolithic state space. Anything but `true` is a correctness bug (or
    /// a deliberately broken run, e.g. without tags).
    pub bisimilar: bool,
    pub witness: Option<Vec<MultiActionValue>>,
    pub oracle: CleaveOracleReport,
    pub plan: CleavePlan,
    /// Set when `force` skipped a failed check.
    pub unverified: bool,
    pub artefacts: Vec<PathBuf>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{stage}: {message}")]
    Validation { stage: &'static str, message: String },

    #[error("cleave requirements not satisfied:\n{report}")]
    OracleFailed { report: Box<CleaveOracleReport> },

    #[error("{stage}: {source}")]
    Explore {
        stage: &'static str,
        #[source]
        source: ExploreError,
    },

    #[error("writing artefacts: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// Exit code classification: 1 usage, 2 validation/oracle, 3 limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation { .. } | PipelineError::OracleFailed { .. } => 2,
            PipelineError::Explore { source, .. } => match source {
                ExploreError::LimitExceeded { .. } => 3,
                _ => 2,
            },
            PipelineError::Io(_) => 1,
        }
    }
}

fn validation(stage: &'static str, message: impl ToString) -> PipelineError {
    PipelineError::Validation {
        stage,
        message: message.to_string(),
    }
}

// Explores and minimises one artefact, recording a metrics row.
fn run_stage(
    rows: &mut Vec<MetricsRow>,
    mem_probe: Option<fn() -> u64>,
    key: &'static str,
    name: String,
    stage_name: &'static str,
    explore: impl FnOnce() -> Result<Lts, ExploreError>,
) -> Result<(Lts, Lts), PipelineError> {
    let start = Instant::now();
    let lts = explore().map_err(|source| PipelineError::Explore {
        stage: stage_name,
        source,
    })?;
    let (minimised, _) = minimise_bisim(&lts);
    rows.push(MetricsRow {
        key,
        name,
        states_original: lts.num_states,
        transitions_original: lts.num_transitions(),
        states_minimised: minimised.num_states,
        transitions_minimised: minimised.num_transitions(),
        seconds: start.elapsed().as_secs_f64(),
        peak_mem_bytes: mem_probe.map(|probe| probe()),
    });
    Ok((lts, minimised))
}

/// Runs the whole pipeline for a specification and a parameter partition:
/// validate, derive the decomposition plan, check its requirements,
/// (optionally) verify and apply a state invariant, explore and minimise
/// both components, recombine the minimised components, explore and
/// minimise the monolithic process, and check strong bisimilarity of the
/// two results.
pub fn run_pipeline(
    spec: &SpecFile,
    v_names: &[String],
    w_names: &[String],
    options: &PipelineOptions,
) -> Result<PipelineOutcome, PipelineError> {
    let lpe = &spec.process;
    let init = &spec.init.init;
    let limits = options.limits;
    let mut unverified = false;

    let report = validate_lpe(lpe);
    if !report.is_valid() {
        return Err(validation("validate", report));
    }

    let plan =
        auto_cleave(lpe, v_names, w_names).map_err(|e| validation("cleave", e))?;

    let oracle = check_cleave_oracle(lpe, &plan, limits.nat_bound)
        .map_err(|e| validation("cleave-oracle", e))?;
    if !oracle.passed() {
        if options.force {
            unverified = true;
        } else {
            return Err(PipelineError::OracleFailed {
                report: Box::new(oracle),
            });
        }
    }

    // Induce the components, restricted by the invariant when one is given.
    let (lpe_v, lpe_w) = match &options.invariant {
        None => (
            induce_component(lpe, &plan.tuple_v, Side::V, &plan.names, options.use_tag)
                .map_err(|e| validation("induce", e))?,
            induce_component(lpe, &plan.tuple_w, Side::W, &plan.names, options.use_tag)
                .map_err(|e| validation("induce", e))?,
        ),
        Some(psi) => {
            let invariant = Invariant::for_lpe(lpe, psi.clone())
                .map_err(|e| validation("check-invariant", e))?;
            let report = check_invariant(lpe, &invariant, limits.nat_bound)
                .map_err(|e| validation("check-invariant", e))?;
            if !report.holds() {
                let first = &report.violations[0];
                let env: Vec<String> = first
                    .env
                    .iter()
                    .map(|(n, v)| format!("{n} = {v}"))
                    .collect();
                let message = format!(
                    "not a state invariant: summand {} breaks it under {}",
                    first.summand,
                    env.join(", ")
                );
                if options.force {
                    unverified = true;
                } else {
                    return Err(validation("check-invariant", message));
                }
            }
            let mut at_init = Environment::new();
            for ((name, _), value) in lpe.params.iter().zip(init) {
                at_init.bind(name.clone(), value.clone());
            }
            let holds_at_init = invariant
                .psi
                .eval_bool(&at_init)
                .map_err(|e| validation("check-invariant", e))?;
            if !holds_at_init {
                return Err(validation(
                    "check-invariant",
                    InvariantError::ViolatedAtInit,
                ));
            }
            restrict_components(
                lpe,
                &plan,
                &invariant,
                options.use_tag,
                options.invariant_on_update,
            )
            .map_err(|e| validation("restrict", e))?
        }
    };

    let instance = |component: &Lpe, owned: &std::collections::BTreeSet<usize>| {
        let values = project(init, owned).expect("partition indices in range");
        ProcessInstance::new(component.clone().into(), values)
            .map_err(|e| validation("induce", e))
    };
    let instance_v = instance(&lpe_v, &plan.tuple_v.params)?;
    let instance_w = instance(&lpe_w, &plan.tuple_w.params)?;

    let mut rows = Vec::new();
    let probe = options.mem_probe;

    // Components first, then their recombination over the minimised
    // component state spaces, then the monolithic state space.
    let (lts_v, min_v) = run_stage(
        &mut rows,
        probe,
        "component_v",
        lpe_v.name.clone(),
        "explore component V",
        || explore_lpe(&instance_v, limits),
    )?;
    let (lts_w, min_w) = run_stage(
        &mut rows,
        probe,
        "component_w",
        lpe_w.name.clone(),
        "explore component W",
        || explore_lpe(&instance_w, limits),
    )?;

    let context = context_over_leaves(
        lpe,
        &plan,
        options.use_tag,
        ProcessLeaf::Lts(min_v.clone().into()),
        ProcessLeaf::Lts(min_w.clone().into()),
    );
    let (lts_composed, min_composed) = run_stage(
        &mut rows,
        probe,
        "composition",
        format!("{} || {}", lpe_v.name, lpe_w.name),
        "explore composition",
        || explore_composition(&context, limits),
    )?;
    let (lts_mono, min_mono) = run_stage(
        &mut rows,
        probe,
        "monolithic",
        lpe.name.clone(),
        "explore monolithic",
        || explore_lpe(&spec.init, limits),
    )?;

    // Table order: monolithic, components, composition.
    rows.rotate_right(1);

    let comparison = check_bisim(&min_composed, &min_mono);

    let explored = [
        ("monolithic.aut", &lts_mono),
        ("monolithic_min.aut", &min_mono),
        ("component_v.aut", &lts_v),
        ("component_v_min.aut", &min_v),
        ("component_w.aut", &lts_w),
        ("component_w_min.aut", &min_w),
        ("composition.aut", &lts_composed),
        ("composition_min.aut", &min_composed),
    ];

    let mut artefacts = Vec::new();
    if let Some(dir) = &options.out_dir {
        fs::create_dir_all(dir)?;
        for (file, lts) in &explored {
            let path = dir.join(file);
            let mut sink = fs::File::create(&path)?;
            write_aut(lts, &mut sink)?;
            artefacts.push(path);
        }
    }

    Ok(PipelineOutcome {
        rows,
        bisimilar: comparison.bisimilar,
        witness: comparison.witness,
        oracle,
        plan,
        unverified,
        artefacts,
    })
}

/// Renders the metrics as an aligned text table. Timing and memory columns
/// are the only non-deterministic part of the output and can be omitted.
pub fn render_metrics_text(outcome: &PipelineOutcome, include_timing: bool) -> String {
    let mut out = String::new();
    if outcome.unverified {
        out.push_str("!! UNVERIFIED: a requirements check failed and was forced past !!\n");
    }
    let mut header = vec![
        "model".to_string(),
        "states".to_string(),
        "trans".to_string(),
        "min.states".to_string(),
        "min.trans".to_string(),
    ];
    if include_timing {
        header.push("time(s)".to_string());
        header.push("peak-mem".to_string());
    }
    let mut table = vec![header];
    for row in &outcome.rows {
        let mut cells = vec![
            row.name.clone(),
            row.states_original.to_string(),
            row.transitions_original.to_string(),
            row.states_minimised.to_string(),
            row.transitions_minimised.to_string(),
        ];
        if include_timing {
            cells.push(format!("{:.3}", row.seconds));
            cells.push(match row.peak_mem_bytes {
                Some(bytes) => format!("{:.1}MB", bytes as f64 / (1024.0 * 1024.0)),
                None => "-".to_string(),
            });
        }
        table.push(cells);
    }
    let columns = table[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    for row in &table {
        let mut line = String::new();
        for (cell, width) in row.iter().zip(&widths) {
            write!(line, "{cell:<width$}  ").unwrap();
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    writeln!(out, "bisimilar: {}", outcome.bisimilar).unwrap();
    if let Some(witness) = &outcome.witness {
        let rendered: Vec<String> = witness.iter().map(|l| l.to_string()).collect();
        writeln!(out, "distinguished by: {}", rendered.join(" . ")).unwrap();
    }
    out
}

/// Renders the metrics as a machine-readable key-value document.
pub fn render_metrics_kv(outcome: &PipelineOutcome, include_timing: bool) -> String {
    let mut out = String::new();
    if outcome.unverified {
        writeln!(out, "unverified = true").unwrap();
    }
    for row in &outcome.rows {
        writeln!(out, "{}.name = {}", row.key, row.name).unwrap();
        writeln!(out, "{}.states_original = {}", row.key, row.states_original).unwrap();
        writeln!(
            out,
            "{}.transitions_original = {}",
            row.key, row.transitions_original
        )
        .unwrap();
        writeln!(out, "{}.states_minimised = {}", row.key, row.states_minimised).unwrap();
        writeln!(
            out,
            "{}.transitions_minimised = {}",
            row.key, row.transitions_minimised
        )
        .unwrap();
        if include_timing {
            writeln!(out, "{}.seconds = {:.3}", row.key, row.seconds).unwrap();
            if let Some(bytes) = row.peak_mem_bytes {
                writeln!(out, "{}.peak_mem_bytes = {bytes}", row.key).unwrap();
            }
        }
    }
    writeln!(out, "bisimilar = {}", outcome.bisimilar).unwrap();
    if let Some(witness) = &outcome.witness {
        let rendered: Vec<String> = witness.iter().map(|l| l.to_string()).collect();
        writeln!(out, "witness = {}", rendered.join(" . ")).unwrap();
    }
    out
}
