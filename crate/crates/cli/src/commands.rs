//! Subcommand implementations. Each returns an [`Emission`] for the caller
//! to deliver.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{read_initial_conditions, Format, RunConfig, StateSel};
use crate::output::{csv, json as to_json, num, pgm, Emission};
use crate::CliError;
use quasiweb::classical::{default_ensemble, section_symmetry_error, ClassicalState, Integrator, SectionSet};
use quasiweb::floquet::{edge_spacing, overlap, packet_width_quasiclassical};
use quasiweb::husimi::{
    find_maxima, mirror_x_error, normalization_integral, rotational_symmetry_error, HusimiField, Maximum,
};
use quasiweb::{
    build_cell_hamiltonian, cell_boundaries, gaussian_ansatz, ground_states, husimi_qe, parity_transform, solve_cell,
    Cell, GaussianAnsatz, Params, PolarGrid, QEState,
};

fn config_value(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serialises")
}

fn all_cells(cfg: &RunConfig) -> Result<Vec<Cell>, CliError> {
    let p = &cfg.params;
    let m_max = (p.n_max - p.mu - cfg.ladder) / p.mu;
    Ok(cell_boundaries(p, cfg.ladder, m_max)?)
}

fn pick_cell(cfg: &RunConfig) -> Result<Cell, CliError> {
    let cells = all_cells(cfg)?;
    cells.iter().find(|c| c.index == cfg.cell).copied().ok_or_else(|| {
        CliError::Config(format!(
            "cell {} not found: {} cell(s) fit below nmax = {}",
            cfg.cell,
            cells.len(),
            cfg.params.n_max
        ))
    })
}

#[derive(Serialize)]
struct CellInfo {
    index: usize,
    ladder: usize,
    m_lo: usize,
    m_hi: usize,
    n_lo: usize,
    n_hi: usize,
    r_lo: f64,
    r_hi: f64,
    states: usize,
    truncated: bool,
}

fn cell_info(p: &Params, c: &Cell) -> CellInfo {
    let (n_lo, n_hi) = (c.level(p.mu, c.m_lo), c.level(p.mu, c.m_hi));
    CellInfo {
        index: c.index,
        ladder: c.ladder,
        m_lo: c.m_lo,
        m_hi: c.m_hi,
        n_lo,
        n_hi,
        r_lo: p.level_radius(n_lo as f64),
        r_hi: p.level_radius(n_hi as f64),
        states: c.n_states(),
        truncated: c.truncated,
    }
}

pub fn cmd_cells(cfg: &RunConfig) -> Result<Emission, CliError> {
    let p = &cfg.params;
    let infos: Vec<CellInfo> = all_cells(cfg)?.iter().map(|c| cell_info(p, c)).collect();
    let main = match cfg.format {
        Format::Json => to_json(&json!({ "config": config_value(cfg), "cells": infos }))?,
        _ => csv(
            &config_value(cfg),
            &["index", "ladder", "m_lo", "m_hi", "n_lo", "n_hi", "r_lo", "r_hi", "states", "truncated"],
            infos.iter().map(|c| {
                vec![
                    c.index.to_string(),
                    c.ladder.to_string(),
                    c.m_lo.to_string(),
                    c.m_hi.to_string(),
                    c.n_lo.to_string(),
                    c.n_hi.to_string(),
                    num(c.r_lo),
                    num(c.r_hi),
                    c.states.to_string(),
                    c.truncated.to_string(),
                ]
            }),
        ),
    };
    Ok(Emission { main, companion: None, failure: None })
}

struct Solved {
    cell: Cell,
    states: Vec<QEState>,
    upper: QEState,
    lower: QEState,
}

fn solve(cfg: &RunConfig) -> Result<Solved, CliError> {
    let cell = pick_cell(cfg)?;
    let states = solve_cell(&build_cell_hamiltonian(&cfg.params, &cell)?)?;
    let (upper, lower) = ground_states(&states)?;
    Ok(Solved { cell, states, upper, lower })
}

fn ansatz_value(p: &Params, a: &GaussianAnsatz) -> Value {
    let bessel = packet_width_quasiclassical(p, a.r_e);
    json!({
        "n_e": a.n_e,
        "r_e": a.r_e,
        "a_e_discrete": a.a_e,
        "a_e_bessel": bessel.as_ref().ok(),
        "a_e_bessel_error": bessel.err().map(|e| e.to_string()),
        "width_levels": a.width,
        "delta_m": a.delta_m,
        "half_width_action": a.half_width_action(),
    })
}

fn parity_defects(s: &Solved) -> Result<(f64, f64), CliError> {
    let e: Vec<f64> = s.states.iter().map(|q| q.energy).collect();
    let n = e.len();
    let pair = (0..n).map(|i| (e[i] + e[n - 1 - i]).abs()).fold(0.0, f64::max);
    let ov = overlap(&parity_transform(&s.upper), &s.lower)?.abs();
    Ok((pair, ov))
}

pub fn cmd_qe(cfg: &RunConfig) -> Result<Emission, CliError> {
    let p = &cfg.params;
    let s = solve(cfg)?;
    let energies: Vec<f64> = s.states.iter().map(|q| q.energy).collect();
    let gaps = (s.states.len() - 1).min(3);
    let spacing = edge_spacing(&s.states, gaps)?;
    let (pair_defect, parity_overlap) = parity_defects(&s)?;
    let ansatz = match gaussian_ansatz(p, &s.cell) {
        Ok(a) => ansatz_value(p, &a),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let summary = json!({
        "config": config_value(cfg),
        "cell": cell_info(p, &s.cell),
        "ansatz": ansatz,
        "edge_spacing": { "gaps": gaps, "mean": spacing.mean, "rel_std": spacing.rel_std },
        "parity": { "pair_defect": pair_defect, "overlap": parity_overlap },
        "upper_energy": s.upper.energy,
        "lower_energy": s.lower.energy,
    });
    let main = match cfg.format {
        Format::Json => {
            let mut v = summary;
            v["energies"] = json!(energies);
            v["upper"] = json!(s.upper.coeffs);
            v["lower"] = json!(s.lower.coeffs);
            return Ok(Emission { main: to_json(&v)?, companion: None, failure: None });
        }
        _ => csv(
            &config_value(cfg),
            &["k", "m", "n", "energy", "upper", "lower"],
            (0..s.states.len()).map(|k| {
                let m = s.cell.m_lo + k;
                vec![
                    k.to_string(),
                    m.to_string(),
                    s.cell.level(p.mu, m).to_string(),
                    num(energies[k]),
                    num(s.upper.coeffs[k]),
                    num(s.lower.coeffs[k]),
                ]
            }),
        ),
    };
    Ok(Emission { main, companion: Some(to_json(&summary)?), failure: None })
}

fn grid_for(cfg: &RunConfig, cell: &Cell) -> Result<PolarGrid, CliError> {
    let p = &cfg.params;
    let r_max = cfg.r_max.unwrap_or_else(|| 1.5 * p.level_radius(cell.level(p.mu, cell.m_hi) as f64));
    Ok(PolarGrid::new(r_max, cfg.nr, cfg.nphi)?)
}

fn fold_error(field: &HusimiField, fold: usize) -> Value {
    match rotational_symmetry_error(field, fold) {
        Ok(v) => json!(v),
        Err(_) => Value::Null,
    }
}

fn maxima_value(m: &[Maximum]) -> Value {
    json!(m
        .iter()
        .map(|x| json!({ "r": x.r, "phi": x.phi, "value": x.value, "plateau": x.plateau }))
        .collect::<Vec<_>>())
}

fn field_report(cfg: &RunConfig, field: &HusimiField) -> Result<Value, CliError> {
    let n_phi = field.grid.n_phi();
    if !n_phi.is_multiple_of(cfg.fold) {
        return Err(CliError::Config(format!("nphi = {n_phi} is not divisible by fold {}", cfg.fold)));
    }
    let maxima = find_maxima(field).map(|m| maxima_value(&m)).unwrap_or(Value::Null);
    Ok(json!({
        "maxima": maxima,
        "symmetry": {
            "fold": cfg.fold,
            "fold_error": fold_error(field, cfg.fold),
            "control_fold": cfg.control_fold,
            "control_error": fold_error(field, cfg.control_fold),
            "double_fold_error": fold_error(field, 2 * cfg.params.mu),
            "mirror_x_error": mirror_x_error(field).ok(),
        },
        "normalization": normalization_integral(field).ok(),
        "peak": field.peak(),
    }))
}

pub fn cmd_husimi(cfg: &RunConfig) -> Result<Emission, CliError> {
    let p = &cfg.params;
    let s = solve(cfg)?;
    let grid = grid_for(cfg, &s.cell)?;
    let mut fields: Vec<(&str, HusimiField)> = Vec::new();
    if cfg.state != StateSel::Lower {
        fields.push(("upper", husimi_qe(p, &s.upper, &grid, cfg.s)?));
    }
    if cfg.state != StateSel::Upper {
        fields.push(("lower", husimi_qe(p, &s.lower, &grid, cfg.s)?));
    }
    let combined = match fields.as_slice() {
        [(_, a), (_, b)] => a.combined(b)?,
        [(_, a)] => a.clone(),
        _ => unreachable!(),
    };
    let mut reports = serde_json::Map::new();
    for (name, f) in &fields {
        reports.insert(name.to_string(), field_report(cfg, f)?);
    }
    if fields.len() == 2 {
        reports.insert("combined".into(), field_report(cfg, &combined)?);
    }
    let grid_value = json!({ "r_max": grid.r_max(), "nr": grid.n_r(), "nphi": grid.n_phi() });
    let summary = json!({
        "config": config_value(cfg),
        "cell": cell_info(p, &s.cell),
        "grid": grid_value,
        "reports": reports,
    });
    let main = match cfg.format {
        Format::Json => {
            let mut v = summary;
            let values: serde_json::Map<String, Value> =
                fields.iter().map(|(n, f)| (n.to_string(), json!(f.values))).collect();
            v["values"] = Value::Object(values);
            return Ok(Emission { main: to_json(&v)?, companion: None, failure: None });
        }
        Format::Csv => {
            let mut header = vec!["r", "phi"];
            if fields.len() == 1 {
                header.push("value");
            } else {
                header.extend(fields.iter().map(|(n, _)| *n));
            }
            let rows = (0..grid.n_r()).flat_map(|i| {
                let fields = &fields;
                let grid = &grid;
                (0..grid.n_phi()).map(move |j| {
                    let mut row = vec![num(grid.r_values()[i]), num(grid.phi_values()[j])];
                    row.extend(fields.iter().map(|(_, f)| num(f.at(i, j))));
                    row
                })
            });
            csv(&config_value(cfg), &header, rows)
        }
        Format::Pgm => pgm(&combined, &config_value(cfg), 2 * cfg.nr),
    };
    Ok(Emission { main, companion: Some(to_json(&summary)?), failure: None })
}

fn integrator(cfg: &RunConfig, eps: f64) -> Result<Integrator, CliError> {
    let it = Integrator { steps_per_period: cfg.steps_per_period, ..Integrator::new(cfg.params.mu, eps)? };
    Ok(it.validated()?)
}

fn section_report(cfg: &RunConfig, set: &SectionSet) -> Value {
    let mu = cfg.params.mu;
    let metric = |fold: usize| section_symmetry_error(set, fold, 128).ok();
    let escaped: Vec<Value> = set
        .orbits
        .iter()
        .enumerate()
        .filter_map(|(id, o)| o.escaped_at.map(|s| json!({ "orbit_id": id, "period": s })))
        .collect();
    json!({
        "points": set.n_points(),
        "escaped": escaped,
        "bins": 128,
        "fold": cfg.classical_fold,
        "fold_error": metric(cfg.classical_fold),
        "control_fold": cfg.control_fold,
        "control_error": metric(cfg.control_fold),
        "double_fold_error": metric(2 * mu),
    })
}

/// Round trip over up to ten periods from the first initial condition.
fn reversibility(it: &Integrator, start: (f64, f64), periods: usize) -> Value {
    let n = periods.clamp(1, 10);
    let t = n as f64 * it.period();
    let s0 = ClassicalState::new(start.0, start.1);
    let steps = n * it.steps_per_period;
    let back = it.evolve(it.evolve(s0, t, steps), -t, steps);
    let err = (back.x - s0.x).hypot(back.p - s0.p);
    json!({ "periods": n, "error": err, "reversible": err < 1e-8 })
}

pub fn cmd_classical(cfg: &RunConfig) -> Result<Emission, CliError> {
    let it = integrator(cfg, cfg.params.eps)?;
    let initial = match &cfg.ic_file {
        Some(path) => read_initial_conditions(path)?,
        None => default_ensemble(cfg.params.mu),
    };
    let set = it.poincare_section(&initial, cfg.periods);
    let mut report = section_report(cfg, &set);
    report["reversibility"] = reversibility(&it, initial[0], cfg.periods);
    let escaped = set.orbits.iter().filter(|o| o.escaped_at.is_some()).count();
    let failure = (escaped > 0).then(|| format!("{escaped} of {} orbits escaped", set.orbits.len()));
    let summary = json!({ "config": config_value(cfg), "report": report });
    let main = match cfg.format {
        Format::Json => {
            let mut v = summary;
            v["orbits"] = json!(set
                .orbits
                .iter()
                .enumerate()
                .map(|(id, o)| json!({ "orbit_id": id, "x0": o.x0, "p0": o.p0, "escaped_at": o.escaped_at, "points": o.points }))
                .collect::<Vec<_>>());
            return Ok(Emission { main: to_json(&v)?, companion: None, failure });
        }
        _ => csv(
            &config_value(cfg),
            &["orbit_id", "s", "X", "P"],
            set.orbits.iter().enumerate().flat_map(|(id, o)| {
                o.points
                    .iter()
                    .enumerate()
                    .map(move |(s, (x, p))| vec![id.to_string(), s.to_string(), num(*x), num(*p)])
            }),
        ),
    };
    Ok(Emission { main, companion: Some(to_json(&summary)?), failure })
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

fn check(name: &str, value: f64, threshold: f64, pass: bool) -> Check {
    Check { name: name.into(), value, threshold, pass }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

pub fn cmd_report(cfg: &RunConfig) -> Result<Emission, CliError> {
    let p = &cfg.params;
    let mu = p.mu;
    let s = solve(cfg)?;
    let ansatz = gaussian_ansatz(p, &s.cell)?;
    let grid = grid_for(cfg, &s.cell)?;
    let upper = husimi_qe(p, &s.upper, &grid, cfg.s)?;
    let lower = husimi_qe(p, &s.lower, &grid, cfg.s)?;
    let combined = upper.combined(&lower)?;
    let mut checks = Vec::new();

    let (pair, ov) = parity_defects(&s)?;
    checks.push(check("parity_pair_defect", pair, 1e-10, pair < 1e-10));
    checks.push(check("parity_overlap_defect", 1.0 - ov, 1e-10, 1.0 - ov < 1e-10));

    let mut maxima = Vec::new();
    for (name, field) in [("upper", &upper), ("lower", &lower)] {
        let m = find_maxima(field)?;
        checks.push(check(&format!("{name}_maxima_count"), m.len() as f64, mu as f64, m.len() == mu));
        let worst = m.iter().map(|x| (x.r - ansatz.r_e).abs() / ansatz.r_e).fold(0.0, f64::max);
        checks.push(check(&format!("{name}_maxima_radius_rel"), worst, 0.02, worst < 0.02));
        let e = rotational_symmetry_error(field, cfg.fold)?;
        let c = rotational_symmetry_error(field, cfg.control_fold)?;
        checks.push(check(&format!("{name}_fold_error"), e, c / cfg.min_ratio, c >= cfg.min_ratio * e));
        maxima.push(m);
    }
    let off = maxima[0]
        .iter()
        .map(|u| {
            let nearest = maxima[1].iter().map(|l| angle_gap(u.phi, l.phi)).fold(f64::INFINITY, f64::min);
            (nearest - PI / mu as f64).abs().to_degrees()
        })
        .fold(0.0, f64::max);
    checks.push(check("interleave_offset_deg", off, 5.0, off < 5.0));

    let it = integrator(cfg, cfg.classical_eps)?;
    let set = it.poincare_section(&default_ensemble(mu), cfg.periods);
    let ce = section_symmetry_error(&set, cfg.classical_fold, 128)?;
    let cc = section_symmetry_error(&set, cfg.control_fold, 128)?;
    checks.push(check("classical_fold_error", ce, cfg.classical_max, ce < cfg.classical_max));
    checks.push(check("classical_control_ratio", cc / ce, cfg.min_ratio, cc >= cfg.min_ratio * ce));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let failure = (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", ")));
    let v = json!({
        "config": config_value(cfg),
        "cell": cell_info(p, &s.cell),
        "r_e": ansatz.r_e,
        "quantum": {
            "upper_maxima": maxima_value(&maxima[0]),
            "lower_maxima": maxima_value(&maxima[1]),
            "fold_mu_upper": fold_error(&upper, mu),
            "fold_mu_lower": fold_error(&lower, mu),
            "fold_2mu_combined": fold_error(&combined, 2 * mu),
            "mirror_x_combined": mirror_x_error(&combined).ok(),
        },
        "classical": {
            "eps": cfg.classical_eps,
            "points": set.n_points(),
            "fold_2mu_error": section_symmetry_error(&set, 2 * mu, 128)?,
        },
        "checks": checks,
        "pass": failed.is_empty(),
    });
    Ok(Emission { main: to_json(&v)?, companion: None, failure })
}

pub fn run(cfg: &RunConfig) -> Result<Emission, CliError> {
    match cfg.command.as_str() {
        "cells" => cmd_cells(cfg),
        "qe" => cmd_qe(cfg),
        "husimi" => cmd_husimi(cfg),
        "classical" => cmd_classical(cfg),
        "report" => cmd_report(cfg),
        other => Err(CliError::Config(format!("unknown command {other}"))),
    }
}
