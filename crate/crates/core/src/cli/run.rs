use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{self, Config, Instance, Model};
use super::report::{csv_line, jsonl, num, num_or_inf, write};
use super::CliError;
use crate::constants::{
    dual_weight, dyadic_fujii_wilson_within, fujii_wilson_constant, grid_report, grid_structure, r_exponent,
    space_report, ConstantsReport, Weight,
};
use crate::czd::{cz_decompose, localization_check, threshold, verify_cz, CzConfig};
use crate::space::{Ball, Cube, DyadicGrid, LocalBasis, QuasiMetricSpace};
use crate::verify::{
    basis_inclusion_all_balls, buckley_mixed_bound, check_rhi_maximal_dyadic, check_sharp_rhi_cubes,
    default_testset, open_property, probe_dyadic_rhi, probe_local_rhi, probe_sharp_rhi, rhi_local_all_balls,
    weak_rhi_all_balls, weak_type_bound, CheckResult, ProbeResult,
};
use crate::{corpus, Result as CoreResult};

/// What a run produced, for the exit code.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    /// Gating check failures.
    pub failures: usize,
    /// Lines of the summary table.
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        u8::from(self.failures > 0)
    }
}

#[derive(Serialize)]
struct ConstantsRow<'a> {
    instance_id: &'a str,
    #[serde(flatten)]
    report: &'a ConstantsReport,
}

const CONSTANTS_HEADER: [&str; 13] = [
    "instance_id",
    "family",
    "p",
    "kappa",
    "d_mu",
    "ap",
    "ainf_fw",
    "ainf_exp",
    "fw_exp_ratio",
    "tau",
    "r_w",
    "sigma_ainf",
    "eps_open",
];

fn constants_of(inst: &Instance) -> CoreResult<Vec<ConstantsReport>> {
    inst.p
        .iter()
        .map(|&p| match &inst.model {
            Model::Space(s) => space_report(s, &inst.weight, p),
            Model::Grid(g, family) => grid_report(g, &inst.weight, p, *family),
        })
        .collect()
}

/// Writes `constants.csv` and `constants.json`: one row per (weight, p).
pub fn run_constants(cfg: &Config, out: &Path) -> Result<Outcome, CliError> {
    let all: Vec<Vec<ConstantsReport>> = cfg
        .instances
        .par_iter()
        .map(constants_of)
        .collect::<CoreResult<_>>()?;
    let mut csv = String::new();
    csv_line(&mut csv, &CONSTANTS_HEADER.map(String::from));
    let mut rows = Vec::new();
    for (inst, reports) in cfg.instances.iter().zip(&all) {
        for r in reports {
            csv_line(
                &mut csv,
                &[
                    inst.id.clone(),
                    r.family.clone(),
                    num(r.p),
                    num(r.kappa),
                    num(r.d_mu),
                    num(r.ap),
                    num(r.ainf_fw),
                    num(r.ainf_exp),
                    num(r.fw_exp_ratio),
                    num(r.tau),
                    num(r.r_w),
                    num(r.sigma_ainf),
                    num(r.eps_open),
                ],
            );
            rows.push(ConstantsRow {
                instance_id: &inst.id,
                report: r,
            });
        }
    }
    write(out, "constants.csv", &csv)?;
    let mut json = serde_json::to_string_pretty(&rows).expect("report types serialize");
    json.push('\n');
    write(out, "constants.json", &json)?;
    Ok(Outcome {
        failures: 0,
        summary: format!("{} rows\n", rows.len()),
    })
}

fn wants(inst: &Instance, name: &str) -> bool {
    inst.checks.iter().any(|c| c == name)
}

fn grid_checks(inst: &Instance, grid: &DyadicGrid, probe: bool) -> CoreResult<(Vec<CheckResult>, Vec<ProbeResult>)> {
    let (w, id, root) = (&inst.weight, inst.id.as_str(), Cube::root());
    let mut checks = Vec::new();
    let mut probes = Vec::new();
    let dyadic = wants(inst, "rhi-maximal-dyadic");
    let sharp = wants(inst, "sharp-rhi-cubes");
    if !(dyadic || sharp) {
        return Ok((checks, probes));
    }
    let ainf = dyadic_fujii_wilson_within(grid, w, &root)?;
    let rho = grid.dyadic_doubling();
    if dyadic {
        let eps = crate::constants::dyadic_rhi_epsilon(rho, ainf);
        checks.push(check_rhi_maximal_dyadic(grid, w, &root, eps, ainf, id)?);
    }
    if sharp {
        let eps = crate::constants::sharp_rhi_epsilon(rho, ainf);
        checks.push(check_sharp_rhi_cubes(grid, w, &root, eps, ainf, id)?);
    }
    if probe && dyadic {
        probes.push(probe_dyadic_rhi(grid, w, &root, ainf, id)?);
    }
    if probe && sharp {
        probes.push(probe_sharp_rhi(grid, w, &root, ainf, id)?);
    }
    Ok((checks, probes))
}

fn cz_checks(inst: &Instance, space: &QuasiMetricSpace) -> Result<Vec<CheckResult>, CliError> {
    let (w, id) = (inst.weight.values(), inst.id.as_str());
    let (post, local) = (wants(inst, "cz-postconditions"), wants(inst, "localization"));
    if !(post || local) {
        return Ok(Vec::new());
    }
    if space.d_mu() == 0.0 {
        let note = "no decomposition: D_mu = 0";
        let mut out = Vec::new();
        if post {
            out.push(CheckResult::vacuous("cz-postconditions", id).provenance(note));
        }
        if local {
            out.push(CheckResult::vacuous("localization", id).provenance(note));
        }
        return Ok(out);
    }
    let n_scale = inst.cz.n_scale.unwrap_or(2.0 * space.kappa());
    let delta = inst.cz.delta.unwrap_or(inst.delta);
    let mut out = Vec::new();
    for base in config::cz_bases(space, &inst.cz)? {
        let basis = LocalBasis::new(space, base, delta)?;
        let t = threshold(space, &basis, w, n_scale)?;
        for &factor in &inst.cz.lambda_factors {
            let czc = CzConfig::new(space, &basis, n_scale, factor * t)?;
            let dec = cz_decompose(space, &basis, w, &czc)?;
            let tag = |r: CheckResult| {
                r.param("base_center", base.center as f64)
                    .param("base_radius", base.radius)
                    .param("lambda_factor", factor)
                    .param("n_scale", n_scale)
            };
            if post {
                out.extend(verify_cz(space, &basis, w, &dec, id)?.into_iter().map(tag));
            }
            if local {
                let loc = localization_check(space, &basis, w, &dec, id)?;
                if loc.is_empty() {
                    out.push(tag(CheckResult::vacuous("localization", id)));
                } else {
                    out.extend(loc.into_iter().map(tag));
                }
            }
        }
    }
    Ok(out)
}

fn space_checks(
    inst: &Instance,
    space: &QuasiMetricSpace,
    probe: bool,
) -> Result<(Vec<CheckResult>, Vec<ProbeResult>), CliError> {
    let (w, id) = (&inst.weight, inst.id.as_str());
    let mut checks = Vec::new();
    let mut probes = Vec::new();
    let probe = probe && wants(inst, "rhi-maximal-local");
    let needs_ainf = probe || ["rhi-maximal-local", "weak-rhi"].iter().any(|c| wants(inst, c));
    let ainf = if needs_ainf { fujii_wilson_constant(space, w)? } else { 0.0 };
    if wants(inst, "rhi-maximal-local") {
        checks.push(rhi_local_all_balls(space, w, inst.delta, ainf, id)?);
    }
    if wants(inst, "weak-rhi") {
        let (_, r_w) = r_exponent(ainf, space.kappa(), space.d_mu());
        checks.push(weak_rhi_all_balls(space, w, r_w, id)?);
        checks.push(basis_inclusion_all_balls(space, id)?);
    }
    for &p in &inst.p {
        let needs_sigma = wants(inst, "open-property") || wants(inst, "buckley");
        let sigma_ainf = if needs_sigma {
            fujii_wilson_constant(space, &dual_weight(w, p)?)?
        } else {
            0.0
        };
        if wants(inst, "open-property") {
            checks.push(open_property(space, w, p, sigma_ainf, id)?.1);
        }
        if wants(inst, "weak-type") || wants(inst, "buckley") {
            let tests = default_testset(space, w, p)?;
            if wants(inst, "weak-type") {
                checks.push(weak_type_bound(space, w, p, &tests, id)?);
            }
            if wants(inst, "buckley") {
                checks.push(buckley_mixed_bound(space, w, p, sigma_ainf, &tests, id)?);
            }
        }
    }
    checks.extend(cz_checks(inst, space)?);
    if probe {
        let far = space.canonical_radii(0).last().copied().unwrap_or(1.0);
        let basis = LocalBasis::new(space, Ball { center: 0, radius: far }, inst.delta)?;
        probes.push(probe_local_rhi(space, &basis, w, ainf, id)?);
    }
    Ok((checks, probes))
}

/// Writes `checks.jsonl` and `summary.csv`, plus `probes.jsonl` when
/// probing; fails the outcome iff a gating check fails.
pub fn run_verify(cfg: &Config, out: &Path, probe: bool) -> Result<Outcome, CliError> {
    let per: Vec<(Vec<CheckResult>, Vec<ProbeResult>)> = cfg
        .instances
        .par_iter()
        .map(|inst| match &inst.model {
            Model::Grid(g, _) => grid_checks(inst, g, probe).map_err(CliError::from),
            Model::Space(s) => space_checks(inst, s, probe),
        })
        .collect::<Result<_, _>>()?;
    let checks: Vec<CheckResult> = per.iter().flat_map(|(c, _)| c.iter().cloned()).collect();
    let probes: Vec<ProbeResult> = per.into_iter().flat_map(|(_, p)| p).collect();
    write(out, "checks.jsonl", &jsonl(&checks))?;
    if probe {
        write(out, "probes.jsonl", &jsonl(&probes))?;
    }
    let summary = summarize(&checks);
    write(out, "summary.csv", &summary)?;
    Ok(Outcome {
        failures: checks.iter().filter(|c| c.fails_run()).count(),
        summary,
    })
}

#[derive(Default)]
struct Tally {
    kind: String,
    results: usize,
    passed: usize,
    vacuous: usize,
    min_slack: f64,
}

fn summarize(checks: &[CheckResult]) -> String {
    let mut order: Vec<&str> = Vec::new();
    let mut tallies: BTreeMap<&str, Tally> = BTreeMap::new();
    for c in checks {
        let t = tallies.entry(&c.name).or_insert_with(|| {
            order.push(&c.name);
            Tally {
                kind: serde_json::to_value(c.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                min_slack: f64::INFINITY,
                ..Tally::default()
            }
        });
        t.results += 1;
        t.passed += usize::from(c.pass);
        t.vacuous += usize::from(c.vacuous);
        if !c.vacuous {
            t.min_slack = t.min_slack.min(c.slack);
        }
    }
    let mut s = String::new();
    csv_line(
        &mut s,
        &["check", "kind", "results", "passed", "failed", "vacuous", "min_slack"].map(String::from),
    );
    for name in order {
        let t = &tallies[name];
        csv_line(
            &mut s,
            &[
                name.to_string(),
                t.kind.clone(),
                t.results.to_string(),
                t.passed.to_string(),
                (t.results - t.passed).to_string(),
                t.vacuous.to_string(),
                if t.min_slack.is_finite() { num(t.min_slack) } else { String::new() },
            ],
        );
    }
    s
}

struct SweepRow {
    parameter: f64,
    ainf: f64,
    r_minus_1: f64,
    dyadic: ProbeResult,
    sharp: ProbeResult,
}

fn sweep_weight(family: &str, grid: &DyadicGrid, value: f64, seed: u64) -> Result<Weight, CliError> {
    Ok(match family {
        "power" => corpus::power_weight(grid, value)?,
        "cascade" => corpus::cascade_weight(grid, value, seed)?,
        other => {
            return Err(CliError::Config(format!(
                "sweep.family: unknown family `{other}`; expected power or cascade"
            )))
        }
    })
}

/// Writes `sweep.csv`: per parameter value, `[w]_{A_∞}` (dyadic, over the
/// root), `r(w) − 1`, and the theoretical and observed largest `ε` for the
/// dyadic maximal and sharp reverse Hölder displays.
pub fn run_sweep(cfg: &Config, out: &Path) -> Result<Outcome, CliError> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing field `sweep`".into()))?;
    let grid = match config::build_model(&spec.space, None, &cfg.base_dir, spec.seed)
        .map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("sweep.space: {m}")),
            other => other,
        })? {
        Model::Grid(g, _) => g,
        Model::Space(_) => return Err(CliError::Config("sweep.space: a sweep needs a grid".into())),
    };
    let seed = spec.seed.unwrap_or(0);
    let root = Cube::root();
    let rows: Vec<SweepRow> = spec
        .values
        .par_iter()
        .map(|&v| {
            let w = sweep_weight(&spec.family, &grid, v, seed)?;
            let id = format!("{}={v}", spec.family);
            let ainf = dyadic_fujii_wilson_within(&grid, &w, &root)?;
            let (kappa, d) = grid_structure(&grid);
            let (_, r) = r_exponent(ainf, kappa, d);
            Ok(SweepRow {
                parameter: v,
                ainf,
                r_minus_1: r - 1.0,
                dyadic: probe_dyadic_rhi(&grid, &w, &root, ainf, &id)?,
                sharp: probe_sharp_rhi(&grid, &w, &root, ainf, &id)?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let mut csv = String::new();
    csv_line(
        &mut csv,
        &[
            "parameter",
            "ainf",
            "r_minus_1",
            "eps_theory",
            "eps_observed",
            "ratio",
            "sharp_eps_theory",
            "sharp_eps_observed",
            "sharp_ratio",
        ]
        .map(String::from),
    );
    for r in &rows {
        csv_line(
            &mut csv,
            &[
                num(r.parameter),
                num(r.ainf),
                num(r.r_minus_1),
                num(r.dyadic.eps_theory),
                num_or_inf(r.dyadic.eps_observed),
                num_or_inf(r.dyadic.ratio),
                num(r.sharp.eps_theory),
                num_or_inf(r.sharp.eps_observed),
                num_or_inf(r.sharp.ratio),
            ],
        );
    }
    write(out, "sweep.csv", &csv)?;
    let short = rows.iter().filter(|r| !r.dyadic.dominates || !r.sharp.dominates).count();
    Ok(Outcome {
        failures: 0,
        summary: format!("{} rows, {short} with observed ε below theory\n", rows.len()),
    })
}
