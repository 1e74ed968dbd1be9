//! The pipelines behind each command. Every function returns tables,
//! threshold checks and a JSON summary; nothing here touches the disk.

use std::f64::consts::PI;

use flathilbert::curves::{check_all, check_theorem_conditions, default_grid, Condition};
use flathilbert::fit::linear_fit;
use flathilbert::kernels::{schur_row_integral, KernelLevel, RowGrid, RowMode};
use flathilbert::opnorm::{
    apply_h2d, coefficient_ensemble, norm_cell, plancherel_crosscheck, summarize, GaussianMixture, NormOptions,
    SweepCell,
};
use flathilbert::oscquad::{solve_omega, upsilon, verify_jr_envelope, JrCase, JrRow, OscOptions, PhaseSpec, SweepEntry};
use flathilbert::poly::{compute_ek, sum_ek_alpha};
use flathilbert::rng::seeded;
use flathilbert::{fit_decay, Curve, Polynomial, Status};
use rand::Rng;
use serde_json::{json, Value};

use crate::config::{
    CheckCurveParams, EkParams, JrParams, KernelParams, OpnormParams, Params, PlancherelParams, UpsilonParams,
};
use crate::par::par_map;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&'static str]) -> Self {
        Table { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Extra JSON artifacts, `(file name, content)`.
    pub json: Vec<(String, Value)>,
    pub checks: Vec<Check>,
    /// Set when nonconvergence left a check without enough data.
    pub numeric_failure: Option<String>,
    pub summary: Value,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.numeric_failure.is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn numeric(&mut self, msg: String) {
        match &mut self.numeric_failure {
            Some(m) => {
                m.push_str("; ");
                m.push_str(&msg);
            }
            None => self.numeric_failure = Some(msg),
        }
    }
}

/// A numerical routine failed outright.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericError(pub String);

impl std::fmt::Display for NumericError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericError {}

impl From<flathilbert::Error> for NumericError {
    fn from(e: flathilbert::Error) -> Self {
        NumericError(e.to_string())
    }
}

type Run = Result<Outcome, NumericError>;

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn run(params: &Params) -> Run {
    match params {
        Params::CheckCurve(p) => check_curve(p),
        Params::EkMeasure(p) => ek_measure(p),
        Params::UpsilonSweep(p) => upsilon_sweep(p),
        Params::JrBounds(p) => jr_bounds(p),
        Params::KernelDecay(p) => kernel_decay(p),
        Params::OpnormSweep(p) => opnorm_sweep(p),
        Params::PlancherelCheck(p) => plancherel_check(p),
    }
}

fn status_label(s: Option<Status>) -> &'static str {
    match s {
        Some(Status::Pass) => "pass",
        Some(Status::Fail) => "fail",
        Some(Status::Indeterminate) => "indeterminate",
        None => "not-run",
    }
}

pub fn check_curve(p: &CheckCurveParams) -> Run {
    let mut out = Outcome::default();
    let mut conds = Table::new("conditions.csv", &["curve", "condition", "status", "witness_t", "witness_value"]);
    let mut consts =
        Table::new("constants.csv", &["curve", "c1", "lambda_d", "eps0", "cz_lambda", "wcz_lambda", "zero_steps_ii"]);
    let mut summary = Vec::new();
    for curve in &p.curves {
        let rep = check_all(curve, &p.grid)?;
        for c in Condition::ALL {
            let w = rep.witnesses_for(c).next();
            conds.push(vec![
                curve.name.clone(),
                c.label().to_string(),
                status_label(rep.status(c)).to_string(),
                w.map(|w| num(w.t)).unwrap_or_default(),
                w.map(|w| num(w.magnitude)).unwrap_or_default(),
            ]);
        }
        consts.push(vec![
            curve.name.clone(),
            num(rep.c1),
            num(rep.lambda_d),
            num(rep.eps0),
            num(rep.cz_lambda),
            num(rep.wcz_lambda),
            rep.zero_steps_ii.to_string(),
        ]);
        let theorem = [Condition::I, Condition::II, Condition::III, Condition::IV].iter().all(|c| rep.passes(*c));
        let doubling = rep.passes(Condition::D) && rep.passes(Condition::Id);
        out.checks.push(check(
            format!("doubling:{}", curve.name),
            !theorem || doubling,
            if theorem {
                format!("(i)-(iv) hold; (D) {} and (ID) {}", status_label(rep.status(Condition::D)), status_label(rep.status(Condition::Id)))
            } else {
                "(i)-(iv) do not all hold; nothing implied".to_string()
            },
        ));
        let statuses: serde_json::Map<String, Value> =
            Condition::ALL.iter().map(|c| (c.label().to_string(), json!(status_label(rep.status(*c))))).collect();
        summary.push(json!({ "curve": curve.name, "c1": rep.c1, "status": statuses }));
    }
    out.tables = vec![conds, consts];
    out.summary = json!({ "curves": summary });
    Ok(out)
}

pub fn ek_measure(p: &EkParams) -> Run {
    let mut out = Outcome::default();
    let sum = sum_ek_alpha(&p.poly, p.alpha, p.k_max, p.c1, p.resolution)?;
    let mut table = Table::new("ek.csv", &["k", "measure", "term", "intervals"]);
    let mut sets = Vec::new();
    for k in 0..=p.k_max {
        let ek = compute_ek(&p.poly, k, p.c1, p.resolution)?;
        let m = ek.measure();
        let spans: Vec<String> = ek.intervals().iter().map(|(a, b)| format!("{a}:{b}")).collect();
        table.push(vec![
            k.to_string(),
            num(m),
            num(if m > 0.0 { m.powf(p.alpha) } else { 0.0 }),
            spans.join(";"),
        ]);
        sets.push(json!({ "k": k, "intervals": ek.intervals() }));
    }
    let all_empty = sum.measures.iter().all(|m| *m == 0.0);
    let ok = all_empty || (sum.partial_sum.is_finite() && sum.tail_ratio < 1.0);
    out.checks.push(check(
        "ek-sum",
        ok,
        format!("partial sum {} with last-quartile ratio {}", sum.partial_sum, sum.tail_ratio),
    ));
    out.tables.push(table);
    out.json.push(("ek.json".to_string(), json!({ "poly": p.poly.to_string(), "c1": p.c1, "sets": sets })));
    out.summary = json!({
        "poly": p.poly.to_string(),
        "alpha": p.alpha,
        "partial_sum": sum.partial_sum,
        "tail_ratio": sum.tail_ratio,
        "all_empty": all_empty,
    });
    Ok(out)
}

pub fn upsilon_sweep(p: &UpsilonParams) -> Run {
    let mut out = Outcome::default();
    let mut c1s = Vec::with_capacity(p.curves.len());
    for c in &p.curves {
        c1s.push(check_theorem_conditions(c, &p.c1_grid)?.c1);
    }
    let mut rng = seeded(p.seed);
    let (lmin, lmax) = (p.omega_min.log10(), p.omega_max.log10());
    let mut table = Table::new("upsilon.csv", &["sample", "curve", "omega", "k", "x", "y", "z", "upsilon", "bound"]);
    let (mut decreases, mut above, mut degenerate) = (0usize, 0usize, 0usize);
    let mut worst_ratio: f64 = 0.0;
    for s in 0..p.samples {
        let ci = rng.gen_range(0..p.curves.len());
        let omega = if lmax > lmin { 10f64.powf(rng.gen_range(lmin..lmax)) } else { p.omega_min };
        let k = rng.gen_range(0..=p.k_max);
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y = x + rng.gen_range(1e-3..1.0);
        let curve = &p.curves[ci];
        let bound = 2.0 / c1s[ci];
        let spec = PhaseSpec::new(curve.clone(), omega, k, Polynomial::monomial(2), x, y)?;
        let (lo, hi) = (y + 1.0, x + 2.0);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..p.z_points {
            let z = lo + (hi - lo) * i as f64 / (p.z_points - 1) as f64;
            let v = match upsilon(&spec, z) {
                Ok(v) => v,
                Err(_) => {
                    degenerate += 1;
                    f64::NAN
                }
            };
            if v < prev * (1.0 - 1e-9) {
                decreases += 1;
            }
            if v > bound * (1.0 + 1e-9) {
                above += 1;
            }
            if v.is_finite() {
                prev = v;
                worst_ratio = worst_ratio.max(v / bound);
            }
            table.push(vec![
                s.to_string(),
                curve.name.clone(),
                num(omega),
                k.to_string(),
                num(x),
                num(y),
                num(z),
                num(v),
                num(bound),
            ]);
        }
    }
    out.checks.push(check("upsilon-monotone", decreases == 0, format!("{decreases} decreasing steps")));
    out.checks.push(check(
        "upsilon-bound",
        above == 0,
        format!("{above} points above 2/C1; largest Υ·C1/2 = {worst_ratio}"),
    ));
    if degenerate > 0 {
        out.numeric(format!("{degenerate} degenerate Υ evaluations"));
    }
    out.tables.push(table);
    let c1_json: Vec<Value> = p.curves.iter().zip(&c1s).map(|(c, v)| json!({ "curve": c.name, "c1": v })).collect();
    out.summary = json!({ "samples": p.samples, "c1": c1_json, "max_upsilon_over_bound": worst_ratio });
    Ok(out)
}

fn resolve_c1(curve: &Curve, c1: Option<f64>) -> Result<f64, NumericError> {
    match c1 {
        Some(v) => Ok(v),
        None => {
            let v = check_theorem_conditions(curve, &default_grid())?.c1;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(NumericError(format!("curve {} has no positive C1 on the default grid; set c1", curve.name)))
            }
        }
    }
}

/// Running-max trend of one case over the upper half of the k range.
fn trend(rows: &[JrRow], case: JrCase, k_max: u32, tol: f64) -> (Check, Option<String>, Value) {
    let name = format!("jr-trend:{}", case.label());
    let top = k_max.div_ceil(2);
    let mut running = f64::NEG_INFINITY;
    let mut points = Vec::new();
    let mut missing = Vec::new();
    let mut overall: Option<f64> = None;
    for k in 0..=k_max {
        let at_k: Vec<&JrRow> = rows.iter().filter(|r| r.entry.k == k && r.case == case).collect();
        if at_k.is_empty() {
            continue;
        }
        let conv: Vec<f64> = at_k.iter().filter(|r| r.converged).map(|r| r.normalized).collect();
        if conv.is_empty() {
            if k >= top {
                missing.push(k);
            }
            continue;
        }
        running = conv.iter().copied().fold(running, f64::max);
        overall = Some(running);
        if k >= top && running > 0.0 {
            points.push((k as f64, running.log2()));
        }
    }
    let detail_json = json!({ "case": case.label(), "max": overall, "top_half_points": points.len(), "levels_without_converged_entries": missing });
    if !missing.is_empty() {
        let msg = format!("{}: no converged entry at k = {:?}", case.label(), missing);
        return (check(name, false, msg.clone()), Some(msg), detail_json);
    }
    if points.len() < 2 {
        let detail = match overall {
            Some(m) => format!("max {m}; fewer than two upper-half levels to fit"),
            None => "no entries of this case".to_string(),
        };
        return (check(name, overall.map_or(true, f64::is_finite), detail), None, detail_json);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    let slope = linear_fit(&xs, &ys).0;
    (
        check(name, slope <= tol && overall.is_some_and(f64::is_finite), format!("running-max log2 slope {slope} (limit {tol})")),
        None,
        detail_json,
    )
}

pub fn jr_bounds(p: &JrParams) -> Run {
    let mut out = Outcome::default();
    let n = p.poly.degree();
    let omega = solve_omega(p.u, p.poly.leading(), n, &p.curve)?;
    let c1 = resolve_c1(&p.curve, p.c1)?;
    let opts = OscOptions { tol: p.tol, max_panels: p.max_panels };
    let mut levels: Vec<u32> = p.sweep.iter().map(|e| e.k).collect();
    levels.sort_unstable();
    levels.dedup();
    let results = par_map(&levels, p.threads, |&k| {
        let sweep: Vec<SweepEntry> = p.sweep.iter().filter(|e| e.k == k).copied().collect();
        verify_jr_envelope(&p.curve, &p.poly, omega, c1, &sweep, opts)
    });
    let mut rows = Vec::new();
    let mut skipped = 0;
    for r in results {
        let r = r?;
        skipped += r.skipped;
        rows.extend(r.rows);
    }
    let mut table = Table::new("jr.csv", &["k", "dist", "case", "jr_abs", "normalized", "converged", "panels"]);
    for r in &rows {
        table.push(vec![
            r.entry.k.to_string(),
            num(r.entry.y - r.entry.x),
            r.case.label().to_string(),
            num(r.jr_abs),
            num(r.normalized),
            r.converged.to_string(),
            r.panels.to_string(),
        ]);
    }
    let mut cases = Vec::new();
    for case in [JrCase::Ratio, JrCase::Slope] {
        let (c, numeric, j) = trend(&rows, case, p.k_max, p.trend_tol);
        out.checks.push(c);
        if let Some(m) = numeric {
            out.numeric(m);
        }
        cases.push(j);
    }
    let unconverged = rows.iter().filter(|r| !r.converged).count();
    out.tables.push(table);
    out.summary = json!({
        "omega": omega,
        "c1": c1,
        "entries": rows.len(),
        "unconverged": unconverged,
        "unclassified": skipped,
        "cases": cases,
        "warning": if 2 * skipped > rows.len() { Some("more than half of the entries fit neither case") } else { None },
    });
    Ok(out)
}

pub fn kernel_decay(p: &KernelParams) -> Run {
    let mut out = Outcome::default();
    let n = p.poly.degree();
    let omega = solve_omega(p.u, p.poly.leading(), n, &p.curve)?;
    let c1 = resolve_c1(&p.curve, p.c1)?;
    let opts = OscOptions { tol: p.tol, max_panels: p.max_panels };
    let grid = RowGrid { geometric: p.row_geometric, uniform: p.row_uniform, d_min: p.row_d_min };
    let tasks: Vec<(u32, f64)> = (0..=p.k_max).flat_map(|k| p.ys.iter().map(move |&y| (k, y))).collect();
    let results = par_map(&tasks, p.threads, |&(k, y)| -> Result<_, NumericError> {
        let level = KernelLevel::new(&p.poly, &p.curve, omega, k, c1, opts)?;
        let osc = schur_row_integral(&level, y, RowMode::Oscillatory, &grid)?;
        let off = schur_row_integral(&level, y, RowMode::PhaseOff, &grid)?;
        Ok((osc, off))
    });
    let mut table =
        Table::new("rows.csv", &["k", "y", "row_integral", "unconverged_count", "samples", "phase_off_integral"]);
    let mut envelope: Vec<Option<f64>> = vec![Some(0.0); p.k_max as usize + 1];
    let mut off_vals = Vec::new();
    for r in results {
        let (osc, off) = r?;
        table.push(vec![
            osc.k.to_string(),
            num(osc.anchor),
            num(osc.value),
            osc.unconverged.to_string(),
            osc.samples.to_string(),
            num(off.value),
        ]);
        let slot = &mut envelope[osc.k as usize];
        *slot = match (*slot, osc.converged) {
            (Some(m), true) => Some(m.max(osc.value)),
            _ => None,
        };
        off_vals.push(off.value);
    }
    let series: Vec<(i64, f64)> =
        envelope.iter().enumerate().filter_map(|(k, v)| v.filter(|v| *v > 0.0).map(|v| (k as i64, v))).collect();
    let bound = -(n as f64) / (2.0 * (n as f64 + 2.0));
    let limit = bound + p.slope_slack;
    let fit = fit_decay(&series).ok();
    let converged = series.len();
    let slope_ok = fit.is_some_and(|f| f.slope <= limit);
    let mut detail = match fit {
        Some(f) => format!("slope {} over {} converged levels (limit {limit})", f.slope, converged),
        None => format!("{converged} converged levels; no fit"),
    };
    if converged < p.min_points {
        detail.push_str(&format!("; needs {} converged levels", p.min_points));
        out.numeric(format!(
            "kernel rows converged at {converged} of {} levels (k = {:?}), below the required {}",
            envelope.len(),
            series.iter().map(|s| s.0).collect::<Vec<_>>(),
            p.min_points
        ));
    }
    out.checks.push(check("kernel-slope", slope_ok && converged >= p.min_points, detail));
    let lo = off_vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = off_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.checks.push(check("phase-off-k-independent", hi - lo <= 1e-8, format!("phase-off rows spread {}", hi - lo)));
    out.tables.push(table);
    let fit_json = json!({
        "slope": fit.map(|f| f.slope),
        "intercept": fit.map(|f| f.intercept),
        "residual": fit.map(|f| f.residual),
        "k_range": fit.map(|f| [f.k_range.0, f.k_range.1]),
        "converged_levels": series.iter().map(|s| s.0).collect::<Vec<_>>(),
        "excluded_levels": envelope.len() - converged,
        "bound": bound,
        "limit": limit,
    });
    out.json.push(("fit.json".to_string(), fit_json.clone()));
    out.summary = json!({ "omega": omega, "c1": c1, "fit": fit_json, "phase_off": [lo, hi] });
    Ok(out)
}

pub fn opnorm_sweep(p: &OpnormParams) -> Run {
    let mut out = Outcome::default();
    let opts = NormOptions { method: p.method, tol: p.norm_tol, max_iter: p.max_iter, seed: p.seed };
    let mut tasks: Vec<(usize, usize, Vec<f64>, f64)> = Vec::new();
    for &n in &p.degrees {
        for (id, coeffs) in coefficient_ensemble(n, p.samples, p.seed).into_iter().enumerate() {
            for &u in &p.u_values {
                tasks.push((n, id, coeffs.clone(), u));
            }
        }
    }
    // The u = 0 cell does not depend on P.
    tasks.push((0, 0, vec![1.0], 0.0));
    let mut results = par_map(&tasks, p.threads, |(_, _, coeffs, u)| norm_cell(&p.curve, coeffs, *u, p.grid, opts));
    let h = results.pop().expect("u = 0 task is always present")?;
    let mut table = Table::new("sweep.csv", &["n", "coeff_id", "coeffs", "u", "norm", "converged", "iterations"]);
    let mut cells = Vec::new();
    for (t, r) in tasks.iter().zip(results) {
        let est = r?;
        let coeffs: Vec<String> = t.2.iter().map(|c| num(*c)).collect();
        table.push(vec![
            t.0.to_string(),
            t.1.to_string(),
            coeffs.join(";"),
            num(t.3),
            num(est.value),
            est.converged.to_string(),
            est.iterations.to_string(),
        ]);
        cells.push(SweepCell { n: t.0, coeff_id: t.1, coeffs: t.2.clone(), u: t.3, norm: est.value, converged: est.converged });
    }
    let mut summary_table = Table::new("summary.csv", &["n", "cells", "excluded", "min", "max", "ratio"]);
    let mut per_n = Vec::new();
    for &n in &p.degrees {
        let s = summarize(cells.iter().filter(|c| c.n == n).cloned().collect());
        let good: Vec<f64> = s.cells.iter().filter(|c| c.converged && c.norm > 0.0).map(|c| c.norm).collect();
        let min = good.iter().copied().fold(f64::INFINITY, f64::min);
        let max = good.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        summary_table.push(vec![n.to_string(), s.cells.len().to_string(), s.excluded.to_string(), num(min), num(max), num(s.ratio)]);
        if good.is_empty() {
            out.numeric(format!("n = {n}: every norm estimate failed to converge"));
        }
        out.checks.push(check(
            format!("uniformity:n={n}"),
            s.ratio <= p.max_ratio,
            format!("max/min = {} over {} cells ({} excluded); limit {}", s.ratio, good.len(), s.excluded, p.max_ratio),
        ));
        per_n.push(json!({ "n": n, "ratio": s.ratio, "min": min, "max": max, "excluded": s.excluded }));
    }
    let rel = h.value / PI - 1.0;
    out.checks.push(check(
        "hilbert-u0",
        rel.abs() <= p.hilbert_tol && h.converged,
        format!("‖S_0‖ = {} = π·(1 + {rel})", h.value),
    ));
    out.tables.push(table);
    out.tables.push(summary_table);
    out.summary = json!({ "per_degree": per_n, "u0_norm": h.value, "grid_nodes": p.grid.len() });
    Ok(out)
}

pub fn plancherel_check(p: &PlancherelParams) -> Run {
    let mut out = Outcome::default();
    let mut rng = seeded(p.seed);
    let mut table =
        Table::new("plancherel.csv", &["sample", "poly", "direct", "sliced", "rel_diff", "tail_mass", "f_norm"]);
    let mut worst: f64 = 0.0;
    let mut worst_zero: f64 = 0.0;
    let zero = Polynomial::zero();
    for s in 0..p.samples {
        let f = GaussianMixture::random(&mut rng).sample(&p.grid);
        let fnorm = f.l2(&p.grid);
        let polys: Vec<&Polynomial> = if s == 0 { vec![&p.poly, &zero] } else { vec![&p.poly] };
        for q in polys {
            let (direct, sliced) = plancherel_crosscheck(&f, q, &p.curve, &p.grid)?;
            let tail = apply_h2d(&f, q, &p.curve, &p.grid)?.tail_mass;
            let rel = if direct > 0.0 { (direct - sliced).abs() / direct } else { (direct - sliced).abs() };
            if q.is_zero() {
                worst_zero = worst_zero.max(rel);
            } else {
                worst = worst.max(rel);
            }
            let label = if q.is_zero() { "0".to_string() } else { q.to_string() };
            table.push(vec![s.to_string(), label, num(direct), num(sliced), num(rel), num(tail), num(fnorm)]);
        }
    }
    out.checks.push(check(
        "plancherel-agreement",
        worst <= p.agreement_tol,
        format!("largest relative gap {worst} (limit {})", p.agreement_tol),
    ));
    out.checks.push(check("plancherel-zero-poly", worst_zero <= 1e-6, format!("relative gap {worst_zero} for P ≡ 0")));
    out.tables.push(table);
    out.summary = json!({ "max_rel_diff": worst, "zero_poly_rel_diff": worst_zero });
    Ok(out)
}
