use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use heralded::compare::compare_protocols;
use heralded::model::{FourLevelConfig, NodeParams};
use heralded::optimize::{
    flatness_optimize, optimal_kappa, optimize_siv_detuning, phase_encoding_ratio, FlatnessProblem, FreeParameters,
    Kappa1Mode, SivOptimum,
};
use heralded::protocol::{classify_encoding, evaluate_protocol, fidelity_taylor, Encoding, Port, DEFAULT_ENCODING_TOL};
use heralded::pulse::{node_grid, spectrum_of, PulseSpec, Spectrum, DEFAULT_GRID_POINTS};
use heralded::readout::phase_readout_on;
use heralded::spectral::{d2_modsq, default_step, transfer_pair, Component};
use heralded::timedomain::{integrate_scattering, IntegrationConfig};
use heralded::Error as CoreError;

use crate::config::{Kappa1Choice, NodeBlock, Param, ScenarioConfig, ScenarioKind};
use crate::output::{config_hash, json_num, write_json, Cell, Table};
use crate::{CliError, EXIT_NOT_CONVERGED};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub extra_paths: Vec<PathBuf>,
    pub rows: usize,
    pub converged: bool,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            EXIT_NOT_CONVERGED
        }
    }
}

pub fn run_scenario(path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    run_config_text(&text, stem, opts)
}

/// One sweep point before keyword resolution.
#[derive(Debug, Clone)]
struct Point {
    curve: usize,
    a: NodeBlock,
    b: NodeBlock,
    kappa_factor: Option<f64>,
    sigma: Option<f64>,
    pulse_delta: f64,
    eta: f64,
    omega: f64,
}

impl Point {
    fn set(&mut self, param: &str, v: f64) {
        match param {
            "omega" => self.omega = v,
            "sigma" => self.sigma = Some(v),
            "pulse_delta" => self.pulse_delta = v,
            "eta" => self.eta = v,
            "delta_b" => self.b.delta = v,
            "kappa_factor" => self.kappa_factor = Some(v),
            _ => {
                for n in [&mut self.a, &mut self.b] {
                    match param {
                        "cooperativity" => n.cooperativity = v,
                        "kappa" => n.kappa = Param::Value(v),
                        "kappa1" => {
                            n.kappa1 = Some(Param::Value(v));
                            n.coupling_ratio = None;
                        }
                        _ => unreachable!("sweep parameter validated against the scenario"),
                    }
                }
            }
        }
    }

    fn blocks(&self) -> Result<(NodeBlock, NodeBlock), CliError> {
        let (mut a, mut b) = (self.a.clone(), self.b.clone());
        if let Some(f) = self.kappa_factor {
            for (n, prefix) in [(&mut a, "node_a"), (&mut b, "node_b")] {
                let k = optimal_kappa(n.cooperativity)
                    .map_err(|e| CliError::config(format!("{prefix}.cooperativity"), e.to_string()))?;
                n.kappa = Param::Value(f * k * n.gamma);
            }
        }
        Ok((a, b))
    }
}

/// A point with every parameter checked and converted to library types.
#[derive(Debug, Clone)]
struct Resolved {
    point: Point,
    a: NodeParams,
    b: NodeParams,
    pulse: Option<PulseSpec>,
    siv: Option<(FourLevelConfig, Kappa1Mode)>,
}

fn expand_points(cfg: &ScenarioConfig) -> Result<Vec<Point>, CliError> {
    let coops = cfg.series.cooperativity.clone().map_or(vec![None], |v| v.into_iter().map(Some).collect());
    let kappas: Vec<(Option<f64>, Option<f64>)> = match (&cfg.series.kappa_factor, &cfg.series.kappa) {
        (Some(f), _) => f.iter().map(|&x| (Some(x), None)).collect(),
        (None, Some(k)) => k.iter().map(|&x| (None, Some(x))).collect(),
        (None, None) => vec![(None, None)],
    };
    let sweep = cfg.sweep.as_ref().map(|s| (s.parameter.clone(), s.values()));
    let base = Point {
        curve: 0,
        a: cfg.node_a.clone(),
        b: cfg.node_b().clone(),
        kappa_factor: None,
        sigma: cfg.pulse.as_ref().and_then(|p| p.sigma),
        pulse_delta: cfg.pulse.as_ref().map_or(0.0, |p| p.delta),
        eta: cfg.eta,
        omega: 0.0,
    };
    let mut points = Vec::new();
    let mut curve = 0;
    for c in &coops {
        for (kf, k) in &kappas {
            let mut p = base.clone();
            p.curve = curve;
            if let Some(c) = c {
                p.set("cooperativity", *c);
            }
            if let Some(k) = k {
                p.set("kappa", *k);
            }
            p.kappa_factor = *kf;
            match &sweep {
                Some((param, values)) => {
                    for &v in values {
                        let mut q = p.clone();
                        q.set(param, v);
                        points.push(q);
                    }
                }
                None => points.push(p),
            }
            curve += 1;
        }
    }
    Ok(points)
}

fn resolve(cfg: &ScenarioConfig, points: Vec<Point>, sampled: &Option<PulseSpec>) -> Result<Vec<Resolved>, CliError> {
    let b_prefix = if cfg.node_b.is_some() { "node_b" } else { "node_a" };
    points
        .into_iter()
        .map(|point| {
            let (a_block, b_block) = point.blocks()?;
            if !(0.0..=1.0).contains(&point.eta) {
                return Err(CliError::config("sweep.max", format!("eta = {} outside [0, 1]", point.eta)));
            }
            let pulse = match (&cfg.pulse, sampled) {
                (_, Some(s)) => Some(s.clone()),
                (Some(block), None) => Some(block.resolve(point.sigma, point.pulse_delta)?),
                (None, None) => None,
            };
            if cfg.scenario == ScenarioKind::SivSweep {
                let four = a_block.four_level("node_a")?;
                let mode = match a_block.kappa1_choice("node_a")? {
                    Kappa1Choice::Phase => Kappa1Mode::EnforcePhaseEncoding,
                    _ => Kappa1Mode::FixedRatio(four.kappa1 / four.kappa()),
                };
                let node =
                    heralded::model::expand_four_level(&four).map_err(|e| CliError::config("node_a", e.to_string()))?;
                return Ok(Resolved { point, a: node, b: node, pulse, siv: Some((four, mode)) });
            }
            let a = a_block.resolve("node_a")?;
            let b = b_block.resolve(b_prefix)?;
            Ok(Resolved { point, a, b, pulse, siv: None })
        })
        .collect()
}

pub fn run_config_text(text: &str, stem: &str, opts: &RunOptions) -> Result<RunReport, CliError> {
    let cfg = ScenarioConfig::parse(text)?;
    let grid_points = opts.grid_points.or(cfg.grid_points).unwrap_or(DEFAULT_GRID_POINTS);
    if grid_points < heralded::pulse::MIN_GRID_POINTS {
        return Err(CliError::config("grid_points", format!("need at least {}", heralded::pulse::MIN_GRID_POINTS)));
    }
    let sampled = match &cfg.pulse {
        Some(p) if p.file.is_some() => Some(p.resolve(None, 0.0)?),
        _ => None,
    };
    if sampled.is_some() && cfg.scenario == ScenarioKind::TimedomainCheck {
        return Err(CliError::config("pulse.file", "timedomain-check needs a Gaussian pulse"));
    }
    if sampled.is_some() && cfg.sweep.as_ref().is_some_and(|s| s.parameter == "sigma" || s.parameter == "pulse_delta") {
        return Err(CliError::config("sweep.parameter", "a sampled pulse has no sigma or center to sweep"));
    }
    let resolved = resolve(&cfg, expand_points(&cfg)?, &sampled)?;

    let ctx = Context { cfg: &cfg, grid_points };
    let outcome = match cfg.scenario {
        ScenarioKind::TransferSweep => ctx.transfer(&resolved),
        ScenarioKind::Protocol => ctx.protocol(&resolved),
        ScenarioKind::Optimize => ctx.optimize(&resolved),
        ScenarioKind::TimedomainCheck => ctx.timedomain(&resolved),
        ScenarioKind::Compare => ctx.compare(&resolved),
        ScenarioKind::SivSweep => ctx.siv(&resolved),
        ScenarioKind::Readout => ctx.readout(&resolved),
    }?;

    let name = cfg.output.clone().unwrap_or_else(|| format!("{}.csv", cfg.name.as_deref().unwrap_or(stem)));
    fs::create_dir_all(&opts.out_dir)?;
    let csv_path = opts.out_dir.join(&name);
    let base = csv_path.with_extension("");
    let hash = config_hash(text);
    let label = cfg.scenario.label();
    outcome.table.write_file(&csv_path, &hash, label)?;
    let mut extra_paths = Vec::new();
    for (suffix, table) in &outcome.extra {
        let p = PathBuf::from(format!("{}_{suffix}.csv", base.display()));
        table.write_file(&p, &hash, label)?;
        extra_paths.push(p);
    }

    let summary_path = PathBuf::from(format!("{}.summary.json", base.display()));
    let mut summary = Map::new();
    summary.insert("scenario".into(), json!(label));
    summary.insert("name".into(), json!(cfg.name.as_deref().unwrap_or(stem)));
    summary.insert("config_hash".into(), json!(hash));
    summary.insert("csv".into(), json!(name));
    summary.insert("rows".into(), json!(outcome.table.rows.len()));
    summary.insert("grid_points".into(), json!(grid_points));
    summary.insert("converged".into(), json!(outcome.converged));
    summary.insert("derived".into(), derived_constants(&cfg.node_a));
    summary.insert("results".into(), outcome.summary);
    write_json(&summary_path, &Value::Object(summary))?;

    Ok(RunReport { csv_path, summary_path, extra_paths, rows: outcome.table.rows.len(), converged: outcome.converged })
}

/// Closed-form constants of the first node block, when they apply.
fn derived_constants(node: &NodeBlock) -> Value {
    let c = node.cooperativity;
    if node.model != crate::config::NodeModel::ThreeLevel || !(c > 0.0) {
        return json!({});
    }
    let (Ok(k), Ok(r)) = (optimal_kappa(c), phase_encoding_ratio(c)) else {
        return json!({});
    };
    json!({
        "cooperativity": json_num(c),
        "kappa_opt": json_num(k * node.gamma),
        "phase_encoding_ratio": json_num(r),
        "resonant_r_minus_sq_scaled": json_num(c * c / ((c + 1.0) * (c + 1.0))),
    })
}

struct Outcome {
    table: Table,
    extra: Vec<(&'static str, Table)>,
    summary: Value,
    converged: bool,
}

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    grid_points: usize,
}

fn rows<F>(resolved: &[Resolved], f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    F: Fn(&Resolved) -> Result<Vec<Cell>, CliError> + Sync + Send,
{
    resolved.par_iter().map(f).collect()
}

fn column(table: &Table, name: &str) -> Vec<f64> {
    let i = table.column(name).expect("known column");
    table.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect()
}

fn encoding_label(e: Encoding) -> &'static str {
    match e {
        Encoding::Phase => "phase",
        Encoding::Intensity => "intensity",
        Encoding::Generic => "generic",
    }
}

impl Context<'_> {
    fn spectrum(&self, r: &Resolved) -> Result<Spectrum, CliError> {
        let pulse = r.pulse.as_ref().expect("validated pulse");
        let grid = node_grid(pulse, &[&r.a, &r.b], self.grid_points)?;
        Ok(spectrum_of(pulse, &grid)?)
    }

    fn transfer(&self, resolved: &[Resolved]) -> Result<Outcome, CliError> {
        let mut table = Table::new(vec![
            "omega",
            "C",
            "kappa",
            "kappa1",
            "r_minus_sq",
            "r_plus_sq",
            "r0_sq",
            "r1_sq",
            "r_minus_sq_scaled",
        ]);
        table.rows = rows(resolved, |r| {
            let t = transfer_pair(&r.a, r.point.omega);
            let scale = (r.a.kappa() / r.a.kappa1).powi(2);
            Ok(vec![
                r.point.omega.into(),
                r.point.a.cooperativity.into(),
                r.a.kappa().into(),
                r.a.kappa1.into(),
                t.r_minus.norm_sqr().into(),
                t.r_plus.norm_sqr().into(),
                t.r0.norm_sqr().into(),
                t.r1.norm_sqr().into(),
                (t.r_minus.norm_sqr() * scale).into(),
            ])
        })?;
        let mut curves = Vec::new();
        let mut seen = None;
        for r in resolved {
            if seen == Some(r.point.curve) {
                continue;
            }
            seen = Some(r.point.curve);
            let h = default_step(0.0);
            let scale = (r.a.kappa() / r.a.kappa1).powi(2);
            curves.push(json!({
                "C": json_num(r.point.a.cooperativity),
                "kappa": json_num(r.a.kappa()),
                "kappa1": json_num(r.a.kappa1),
                "d2_r_minus_sq_scaled_at_0": json_num(d2_modsq(&r.a, Component::Minus, 0.0, h)? * scale),
                "d2_r_plus_sq_at_0": json_num(d2_modsq(&r.a, Component::Plus, 0.0, h)?),
            }));
        }
        Ok(Outcome { table, extra: Vec::new(), summary: json!({ "curves": curves }), converged: true })
    }

    fn protocol(&self, resolved: &[Resolved]) -> Result<Outcome, CliError> {
        let mut table = Table::new(vec![
            "sigma",
            "pulse_delta",
            "eta",
            "C",
            "kappa",
            "kappa1",
            "delta_b",
            "p_a",
            "p_b",
            "p_a_over_eta",
            "p_b_over_eta",
            "f_a",
            "f_b",
            "f_a_taylor",
            "f_b_taylor",
            "encoding",
        ]);
        table.rows = rows(resolved, |r| {
            let u = self.spectrum(r)?;
            let o = evaluate_protocol(&r.a, &r.b, &u, r.point.eta);
            let pulse = r.pulse.as_ref().expect("validated pulse");
            let ratio = |p: f64| (r.point.eta > 0.0).then(|| p / r.point.eta);
            Ok(vec![
                r.point.sigma.into(),
                r.point.pulse_delta.into(),
                r.point.eta.into(),
                r.point.a.cooperativity.into(),
                r.a.kappa().into(),
                r.a.kappa1.into(),
                r.b.transitions[0].delta.into(),
                o.p_a.into(),
                o.p_b.into(),
                ratio(o.p_a).into(),
                ratio(o.p_b).into(),
                o.f_a.into(),
                o.f_b.into(),
                fidelity_taylor(&r.a, &r.b, pulse, Port::A).ok().into(),
                fidelity_taylor(&r.a, &r.b, pulse, Port::B).ok().into(),
                Cell::Text(encoding_label(classify_encoding(&r.a, &u, DEFAULT_ENCODING_TOL)).into()),
            ])
        })?;
        let fa = column(&table, "f_a");
        let fb = column(&table, "f_b");
        let summary = json!({
            "min_f_a": json_num(fa.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min)),
            "min_f_b": json_num(fb.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min)),
            "max_p_b": json_num(column(&table, "p_b").into_iter().fold(0.0, f64::max)),
        });
        Ok(Outcome { table, extra: Vec::new(), summary, converged: true })
    }

    fn optimize(&self, resolved: &[Resolved]) -> Result<Outcome, CliError> {
        let mut table = Table::new(vec![
            "C",
            "kappa_opt_closed",
            "phase_ratio_closed",
            "kappa_minus_numeric",
            "kappa_plus_numeric",
            "phase_ratio_numeric",
            "d2_minus_at_opt",
            "d2_plus_at_opt",
            "evaluations",
            "converged",
        ]);
        table.rows = rows(resolved, |r| {
            let c = r.point.a.cooperativity;
            let gamma = r.a.transitions[0].gamma;
            let delta = r.a.transitions[0].delta;
            let k = optimal_kappa(c).map_err(|e| CliError::config("node_a.cooperativity", e.to_string()))? * gamma;
            let ratio = phase_encoding_ratio(c)?;
            let problem = FlatnessProblem { cooperativity: c, gamma, delta, coupling_ratio: ratio, omega: 0.0 };
            let minus = flatness_optimize(&problem, Component::Minus, FreeParameters::Kappa, &[(0.1 * k, 10.0 * k)]);
            let plus = flatness_optimize(
                &problem,
                Component::Plus,
                FreeParameters::KappaAndPhaseEncodedRatio,
                &[(0.2 * k, 5.0 * k), (0.5, 1.0)],
            );
            let node = NodeParams::three_level(c, k, ratio * k, gamma, delta)?;
            let h = default_step(0.0);
            let converged = minus.is_ok() && plus.is_ok();
            let evaluations = minus.as_ref().map_or(0, |m| m.evaluations) + plus.as_ref().map_or(0, |p| p.evaluations);
            for res in [&minus, &plus] {
                if let Err(e) = res {
                    if !matches!(e, CoreError::NotConverged { .. }) {
                        return Err(e.clone().into());
                    }
                }
            }
            Ok(vec![
                c.into(),
                k.into(),
                ratio.into(),
                minus.as_ref().ok().map(|m| m.argument[0]).into(),
                plus.as_ref().ok().map(|p| p.argument[0]).into(),
                plus.as_ref().ok().map(|p| p.argument[1]).into(),
                d2_modsq(&node, Component::Minus, 0.0, h)?.into(),
                d2_modsq(&node, Component::Plus, 0.0, h)?.into(),
                evaluations.into(),
                converged.into(),
            ])
        })?;
        let converged = all_true(&table, "converged");
        let optima: Vec<Value> = table
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (name, cell) in table.columns.iter().zip(row) {
                    m.insert((*name).into(), cell_json(cell));
                }
                Value::Object(m)
            })
            .collect();
        Ok(Outcome { table, extra: Vec::new(), summary: json!({ "optima": optima }), converged })
    }

    fn timedomain(&self, resolved: &[Resolved]) -> Result<Outcome, CliError> {
        let mut table = Table::new(vec![
            "C",
            "kappa",
            "kappa1",
            "sigma",
            "pulse_delta",
            "error_branch0",
            "error_branch1",
            "output_norm_branch0",
            "output_norm_branch1",
            "max_norm_increase",
            "norm_monotone",
            "steps",
            "rejected_steps",
        ]);
        let cfg = IntegrationConfig { grid_points: self.grid_points, ..IntegrationConfig::default() };
        let runs: Vec<_> = resolved
            .par_iter()
            .map(|r| -> Result<_, CliError> {
                let pulse = r.pulse.as_ref().expect("validated pulse");
                let run = integrate_scattering(&r.a, pulse, &cfg)?;
                let u = self.spectrum(r)?;
                let errors = [run.spectral_error(&r.a, &u, 0), run.spectral_error(&r.a, &u, 1)];
                Ok((run, errors))
            })
            .collect::<Result<_, _>>()?;
        for (r, (run, errors)) in resolved.iter().zip(&runs) {
            let fin = run.final_state();
            let out = |k: usize| fin.branches[k].alpha_v0.norm_sqr() + fin.branches[k].alpha_v1.norm_sqr();
            table.rows.push(vec![
                r.point.a.cooperativity.into(),
                r.a.kappa().into(),
                r.a.kappa1.into(),
                r.point.sigma.into(),
                r.point.pulse_delta.into(),
                errors[0].into(),
                errors[1].into(),
                out(0).into(),
                out(1).into(),
                run.max_norm_increase.into(),
                run.is_norm_monotone(1e-9).into(),
                run.trajectory.len().into(),
                run.rejected_steps.into(),
            ]);
        }
        let mut extra = Vec::new();
        if self.cfg.write_trajectory {
            if let Some((run, _)) = runs.first() {
                extra.push(("trajectory", trajectory_table(run)));
            }
        }
        let max_err = runs.iter().flat_map(|(_, e)| e.iter().copied()).fold(0.0, f64::max);
        let summary = json!({
            "max_relative_l2_error": json_num(max_err),
            "all_norm_monotone": all_true(&table, "norm_monotone"),
        });
        Ok(Outcome { table, extra, summary, converged: true })
    }

    fn compare(&self, resolved: &[Resolved]) -> Result<Outcome, CliError> {
        let mut table = Table::new(vec![
            "C",
            "kappa",
            "kappa1",
            "sigma",
            "eta",
            "theta_prep",
            "p_em",
            "p_barrett_kok",
            "p_single_click",
            "p_reflection_single_port",
            "p_reflection_two_port",
            "narrow_emitter",
            "narrow_pulse",
            "relative_gap",
            "rates_match",
        ]);
        let theta = self.cfg.theta_prep;
        table.rows = rows(resolved, |r| {
            let pulse = r.pulse.as_ref().expect("validated pulse");
            let rep = compare_protocols(&r.a, pulse, r.point.eta, theta)?;
            Ok(vec![
                r.point.a.cooperativity.into(),
                r.a.kappa().into(),
                r.a.kappa1.into(),
                r.point.sigma.into(),
                r.point.eta.into(),
                theta.into(),
                rep.p_em.into(),
                rep.p_barrett_kok.into(),
                rep.p_single_click.into(),
                rep.p_reflection_single_port.into(),
                rep.p_reflection_two_port.into(),
                rep.narrow_emitter.into(),
                rep.narrow_pulse.into(),
                rep.relative_gap.into(),
                rep.rates_match().map_or(Cell::Missing, Cell::Bool),
            ])
        })?;
        let i = table.column("rates_match").expect("known column");
        let in_regime = table.rows.iter().filter(|r| r[i] != Cell::Missing).count();
        let matched = table.rows.iter().filter(|r| r[i] == Cell::Bool(true)).count();
        let summary = json!({ "rows_in_regime": in_regime, "rows_matching": matched });
        Ok(Outcome { table, extra: Vec::new(), summary, converged: true })
    }

    fn siv(&self, resolved: &[Resolved]) -> Result<Outcome, CliError> {
        let mut table = Table::new(vec![
            "C",
            "kappa",
            "zeta",
            "delta_o",
            "omega_o",
            "coupling_ratio",
            "kappa1_o",
            "peak",
            "peak_scaled",
            "r_plus_sq",
            "phase_condition_met",
            "d2_minus",
            "d2_plus",
            "evaluations",
            "converged",
        ]);
        let optima: Vec<(FourLevelConfig, Option<SivOptimum>)> = resolved
            .par_iter()
            .map(|r| {
                let (four, mode) = r.siv.expect("siv scenario");
                match optimize_siv_detuning(&four, mode) {
                    Ok(o) => Ok((four, Some(o))),
                    Err(CoreError::NotConverged { .. }) => Ok((four, None)),
                    Err(e) => Err(CliError::from(e)),
                }
            })
            .collect::<Result<_, _>>()?;
        for (four, o) in &optima {
            let mut row: Vec<Cell> = vec![four.cooperativity().into(), four.kappa().into(), four.zeta.into()];
            match o {
                Some(o) => row.extend([
                    o.delta_o.into(),
                    o.omega_o.into(),
                    o.coupling_ratio.into(),
                    (o.coupling_ratio * four.kappa()).into(),
                    o.peak.into(),
                    o.peak_scaled.into(),
                    o.r_plus_sq.into(),
                    o.phase_condition_met.into(),
                    o.d2_minus.into(),
                    o.d2_plus.into(),
                    o.search.evaluations.into(),
                    o.search.converged.into(),
                ]),
                None => {
                    row.extend(std::iter::repeat_n(Cell::Missing, 11));
                    row.push(false.into());
                }
            }
            table.rows.push(row);
        }
        let mut extra = Vec::new();
        if let Some(map) = &self.cfg.map {
            let mut t = Table::new(vec!["C", "omega", "r_minus_sq", "r_plus_sq", "r_minus_sq_scaled"]);
            let step = (map.omega_max - map.omega_min) / (map.points - 1) as f64;
            for (four, o) in &optima {
                let Some(o) = o else { continue };
                let cfg = four.with_delta(o.delta_o).with_coupling_ratio(o.coupling_ratio);
                let node = heralded::model::expand_four_level(&cfg)?;
                for i in 0..map.points {
                    let w = map.omega_min + i as f64 * step;
                    let tr = transfer_pair(&node, w);
                    t.rows.push(vec![
                        four.cooperativity().into(),
                        w.into(),
                        tr.r_minus.norm_sqr().into(),
                        tr.r_plus.norm_sqr().into(),
                        (tr.r_minus.norm_sqr() / (o.coupling_ratio * o.coupling_ratio)).into(),
                    ]);
                }
            }
            extra.push(("map", t));
        }
        let converged = all_true(&table, "converged");
        let list: Vec<Value> = optima
            .iter()
            .map(|(four, o)| match o {
                Some(o) => json!({
                    "C": json_num(four.cooperativity()),
                    "delta_o": json_num(o.delta_o),
                    "omega_o": json_num(o.omega_o),
                    "coupling_ratio": json_num(o.coupling_ratio),
                    "peak_scaled": json_num(o.peak_scaled),
                    "converged": o.search.converged,
                }),
                None => json!({ "C": json_num(four.cooperativity()), "converged": false }),
            })
            .collect();
        Ok(Outcome { table, extra, summary: json!({ "optima": list }), converged })
    }

    fn readout(&self, resolved: &[Resolved]) -> Result<Outcome, CliError> {
        let mut table = Table::new(vec![
            "sigma",
            "pulse_delta",
            "C",
            "kappa",
            "kappa1",
            "p_reflect_state0",
            "p_reflect_state1",
            "contrast",
            "p0_a",
            "p0_b",
            "p1_a",
            "p1_b",
            "error",
            "worst_case_error",
        ]);
        table.rows = rows(resolved, |r| {
            let rep = phase_readout_on(&r.a, &self.spectrum(r)?);
            let p = rep.port_probs.expect("phase readout fills port probabilities");
            Ok(vec![
                r.point.sigma.into(),
                r.point.pulse_delta.into(),
                r.point.a.cooperativity.into(),
                r.a.kappa().into(),
                r.a.kappa1.into(),
                rep.p_reflect_state0.into(),
                rep.p_reflect_state1.into(),
                rep.contrast.into(),
                p[0][0].into(),
                p[0][1].into(),
                p[1][0].into(),
                p[1][1].into(),
                rep.error.into(),
                rep.worst_case_error.into(),
            ])
        })?;
        let summary = json!({
            "max_contrast": json_num(column(&table, "contrast").into_iter().fold(0.0, f64::max)),
            "min_error": json_num(column(&table, "error").into_iter().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min)),
        });
        Ok(Outcome { table, extra: Vec::new(), summary, converged: true })
    }
}

fn all_true(table: &Table, name: &str) -> bool {
    let i = table.column(name).expect("known column");
    table.rows.iter().all(|r| r[i] == Cell::Bool(true))
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(v) => json_num(*v),
        Cell::Int(v) => json!(v),
        Cell::Bool(v) => json!(v),
        Cell::Text(s) => json!(s),
        Cell::Missing => Value::Null,
    }
}

fn trajectory_table(run: &heralded::timedomain::ScatteringRun) -> Table {
    let mut t = Table::new(vec![
        "t",
        "branch",
        "re_alpha_u",
        "im_alpha_u",
        "re_alpha_c",
        "im_alpha_c",
        "re_alpha_e",
        "im_alpha_e",
        "re_alpha_v0",
        "im_alpha_v0",
        "re_alpha_v1",
        "im_alpha_v1",
    ]);
    for s in &run.trajectory {
        for (k, b) in s.branches.iter().enumerate() {
            let mut row: Vec<Cell> = vec![s.t.into(), k.into()];
            for z in [b.alpha_u, b.alpha_c, b.alpha_e, b.alpha_v0, b.alpha_v1] {
                row.push(z.re.into());
                row.push(z.im.into());
            }
            t.rows.push(row);
        }
    }
    t
}
