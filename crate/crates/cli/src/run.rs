use std::path::Path;

use num_rational::Ratio;
use serde_json::{json, Value};

use frobcount_core::correlations::{
    correlation_sum_parallel, scale, ConstraintSet, LatticeBox, DEFAULT_POINT_BUDGET,
};
use frobcount_core::families::{
    brauer_delta, brauer_zero_locus_count, count_conic_bundle_threaded, count_multinorm,
    detector_lower_count, pencil_counterexample_search, pencil_detector_sum, DeltaExponent,
};
use frobcount_core::local_densities::{
    alpha_beta_identity_check, LinearForm, LinearFormSystem,
};
use frobcount_core::report::{emit_report, Report, ReportPaths};
use frobcount_core::{Error, Result};

use crate::config::{Family, RunConfig};

pub struct RunContext {
    pub threads: usize,
    pub seed: u64,
}

/// Dispatches one config to its pipeline and writes the artifacts.
pub fn run(cfg: &RunConfig, out_dir: &Path, ctx: &RunContext) -> Result<(ReportPaths, Value)> {
    let report = match cfg.command.as_str() {
        "count" => run_count(cfg, ctx)?,
        "sum" => run_sum(cfg, ctx)?,
        "fit" => run_fit(cfg, ctx)?,
        "densities" => run_densities(cfg)?,
        "detect" => run_detect(cfg, ctx)?,
        "search" => run_search(cfg)?,
        other => return Err(Error::config(format!("unknown command: {other}"))),
    };
    let paths = emit_report(&report, out_dir, &cfg.label)?;
    Ok((paths, report.summary))
}

fn point_budget(cfg: &RunConfig) -> Result<u128> {
    if let Ok(v) = std::env::var("FROBCOUNT_POINT_BUDGET") {
        return v
            .parse::<u128>()
            .map_err(|_| Error::config("FROBCOUNT_POINT_BUDGET must be an unsigned integer"));
    }
    Ok(cfg.point_budget.unwrap_or(DEFAULT_POINT_BUDGET))
}

fn heights(cfg: &RunConfig) -> Result<Vec<i64>> {
    match (&cfg.grid, cfg.b) {
        (Some(g), None) => g.heights(),
        (None, Some(b)) if b >= 1 => Ok(vec![b]),
        _ => Err(Error::config("need exactly one of `grid` or `b` (≥ 1)")),
    }
}

fn check_budget(needed: u128, budget: u128, what: &'static str) -> Result<()> {
    if needed > budget {
        return Err(Error::Capacity {
            what,
            needed,
            budget,
        });
    }
    Ok(())
}

fn projective_points(b: i64, dim: usize) -> u128 {
    (2 * b as u128 + 1).pow(dim as u32 + 1)
}

fn ratio_str(r: Ratio<i64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn delta_json(d: &DeltaExponent) -> Value {
    json!({
        "total": ratio_str(d.total),
        "total_f64": ratio_f64(d.total),
        "exact": d.exact,
        "per_divisor": d.per_divisor.iter().map(|x| json!({
            "label": x.label,
            "delta": ratio_str(x.delta),
            "contribution": ratio_str(x.contribution),
        })).collect::<Vec<_>>(),
    })
}

fn family_of(cfg: &RunConfig) -> Result<Family> {
    cfg.family
        .as_ref()
        .ok_or_else(|| Error::config("this command needs a `family` section"))?
        .build()
}

/// One (b, count, undetermined, skipped) row per height.
fn count_rows(cfg: &RunConfig, ctx: &RunContext) -> Result<(Value, Vec<(i64, u64, u64, u64)>)> {
    let family = family_of(cfg)?;
    let budget = point_budget(cfg)?;
    let hs = heights(cfg)?;
    let mut rows = Vec::new();
    let delta = match &family {
        Family::Conic(f) => {
            for &b in &hs {
                check_budget(projective_points(b, 1), budget, "conic fibre count")?;
                eprintln!("count: conic B = {b}");
                let c = count_conic_bundle_threaded(f, b, ctx.threads)?;
                rows.push((b, c.soluble, 0, c.skipped_degenerate));
            }
            f.delta_pi()
        }
        Family::Multinorm(f) => {
            for &b in &hs {
                check_budget(projective_points(b, 1), budget, "multinorm fibre count")?;
                eprintln!("count: multinorm B = {b}");
                let c = count_multinorm(f, b)?;
                rows.push((b, c.certified, c.undetermined, c.skipped_degenerate));
            }
            f.delta_pi()?
        }
        Family::Brauer(f) => {
            for &b in &hs {
                check_budget(projective_points(b, f.dimension()), budget, "brauer count")?;
                eprintln!("count: brauer B = {b}");
                let n = brauer_zero_locus_count(f, b)?;
                rows.push((b, n, 0, 0));
            }
            brauer_delta(f)
        }
        Family::Pencil(_) => {
            return Err(Error::config("`count` expects a conic, multinorm, or brauer family"))
        }
    };
    Ok((delta_json(&delta), rows))
}

fn run_count(cfg: &RunConfig, ctx: &RunContext) -> Result<Report> {
    let (delta, rows) = count_rows(cfg, ctx)?;
    let mut report = Report::new(
        vec!["b".into(), "count".into(), "undetermined".into(), "skipped_degenerate".into()],
        Value::Null,
    );
    for &(b, n, u, s) in &rows {
        report.push_row(vec![b.to_string(), n.to_string(), u.to_string(), s.to_string()]);
    }
    report.summary = json!({
        "command": "count",
        "label": cfg.label,
        "threads": ctx.threads,
        "seed": ctx.seed,
        "delta": delta,
        "rows": rows.iter().map(|&(b, n, u, s)| json!({
            "b": b, "count": n, "undetermined": u, "skipped_degenerate": s,
        })).collect::<Vec<_>>(),
    });
    Ok(report)
}

fn run_fit(cfg: &RunConfig, ctx: &RunContext) -> Result<Report> {
    let (delta, rows) = count_rows(cfg, ctx)?;
    let fit_cfg = cfg.fit.as_ref();
    let d = fit_cfg.and_then(|f| f.dimension).unwrap_or(2.0);
    let delta_val = match fit_cfg.and_then(|f| f.delta) {
        Some(v) => v,
        None => delta["total_f64"].as_f64().unwrap(),
    };
    let samples: Vec<(f64, f64)> = rows.iter().map(|&(b, n, _, _)| (b as f64, n as f64)).collect();
    let fit = frobcount_core::correlations::fit_asymptotic(&samples, d, delta_val)?;
    let mut report = Report::new(vec!["b".into(), "count".into(), "ratio".into()], Value::Null);
    for (&(b, n, _, _), &(_, r)) in rows.iter().zip(&fit.ratios) {
        report.push_row(vec![b.to_string(), n.to_string(), format!("{r}")]);
    }
    report.summary = json!({
        "command": "fit",
        "label": cfg.label,
        "threads": ctx.threads,
        "seed": ctx.seed,
        "dimension": d,
        "delta": delta_val,
        "delta_source": delta,
        "c_est": fit.c_est,
        "spread": fit.spread,
        "delta_est": fit.delta_est,
        "drift": fit.drift,
    });
    Ok(report)
}

fn run_sum(cfg: &RunConfig, ctx: &RunContext) -> Result<Report> {
    let sum_cfg = cfg
        .sum
        .as_ref()
        .ok_or_else(|| Error::config("`sum` needs a `sum` section"))?;
    let forms: Vec<LinearForm> = sum_cfg
        .forms
        .iter()
        .map(|f| LinearForm::new(f.coeffs.clone(), f.constant))
        .collect();
    let system = LinearFormSystem::new(forms)?;
    let specs = sum_cfg
        .specs
        .iter()
        .map(|s| s.build())
        .collect::<Result<Vec<_>>>()?;
    let budget = point_budget(cfg)?;
    let mut report = Report::new(
        vec!["b".into(), "value".into(), "exact".into()],
        Value::Null,
    );
    let mut rows = Vec::new();
    for b in heights(cfg)? {
        let bx = match sum_cfg.box_shape.as_str() {
            "unit" => LatticeBox::unit_cube(sum_cfg.dimension, scale(b))?,
            "symmetric" => LatticeBox::symmetric_cube(sum_cfg.dimension, scale(b))?,
            other => return Err(Error::config(format!("unknown box shape: {other}"))),
        };
        check_budget(bx.cube_size(), budget, "correlation sum enumeration")?;
        eprintln!("sum: B = {b}");
        let slab = sum_cfg.slab_width.unwrap_or((b / 8).max(1));
        let v = correlation_sum_parallel(&bx, &system, &specs, slab, ctx.threads)?;
        let exact = v.exact_real().map(ratio_str).unwrap_or_default();
        report.push_row(vec![b.to_string(), format!("{}", v.to_c64().re), exact.clone()]);
        rows.push(json!({"b": b, "value": v.to_c64().re, "exact": exact}));
    }
    report.summary = json!({
        "command": "sum",
        "label": cfg.label,
        "threads": ctx.threads,
        "seed": ctx.seed,
        "rows": rows,
    });
    Ok(report)
}

fn run_densities(cfg: &RunConfig) -> Result<Report> {
    if let Some(grid) = &cfg.identity_grid {
        return run_identity_grid(cfg, grid);
    }
    let family = family_of(cfg)?;
    let delta = match &family {
        Family::Conic(f) => f.delta_pi(),
        Family::Multinorm(f) => f.delta_pi()?,
        Family::Brauer(f) => brauer_delta(f),
        Family::Pencil(_) => {
            return Err(Error::config("`densities` expects a family with a Δ-exponent"))
        }
    };
    let mut report = Report::new(
        vec!["label".into(), "delta".into(), "contribution".into()],
        Value::Null,
    );
    for d in &delta.per_divisor {
        report.push_row(vec![
            d.label.clone(),
            ratio_str(d.delta),
            ratio_str(d.contribution),
        ]);
    }
    report.summary = json!({
        "command": "densities",
        "label": cfg.label,
        "delta": delta_json(&delta),
    });
    Ok(report)
}

fn run_identity_grid(
    cfg: &RunConfig,
    grid: &crate::config::IdentityGridConfig,
) -> Result<Report> {
    if grid.max_r == 0 || grid.max_r > 3 || grid.max_a == 0 {
        return Err(Error::config("identity grid needs 1 ≤ max_r ≤ 3 and max_a ≥ 1"));
    }
    let library = [
        LinearForm::new(vec![1, 0], 0),
        LinearForm::new(vec![0, 1], 0),
        LinearForm::new(vec![1, 1], 0),
    ];
    let mut report = Report::new(
        vec![
            "p".into(),
            "r".into(),
            "a".into(),
            "c".into(),
            "lhs".into(),
            "mid".into(),
            "rhs".into(),
            "equal".into(),
        ],
        Value::Null,
    );
    let mut all_passed = true;
    let mut checks = 0u64;
    for &p in &grid.primes {
        for r in 1..=grid.max_r {
            let system = LinearFormSystem::new(library[..r].to_vec())?;
            let mut c = vec![0u32; r];
            loop {
                if c.iter().any(|&ci| ci > 0) {
                    for a in 1..=grid.max_a {
                        eprintln!("densities: identity p={p} r={r} a={a} c={c:?}");
                        let chk = alpha_beta_identity_check(&system, p, a, &c)?;
                        all_passed &= chk.equal;
                        checks += 1;
                        report.push_row(vec![
                            p.to_string(),
                            r.to_string(),
                            a.to_string(),
                            c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                            ratio_str(chk.lhs),
                            ratio_str(chk.mid),
                            ratio_str(chk.rhs),
                            chk.equal.to_string(),
                        ]);
                    }
                }
                // odometer over c ∈ [0, max_c]^r
                let mut i = 0;
                loop {
                    if i == r {
                        c.clear();
                        break;
                    }
                    c[i] += 1;
                    if c[i] <= grid.max_c {
                        break;
                    }
                    c[i] = 0;
                    i += 1;
                }
                if c.is_empty() {
                    break;
                }
            }
        }
    }
    report.summary = json!({
        "command": "densities",
        "label": cfg.label,
        "all_passed": all_passed,
        "checks": checks,
    });
    Ok(report)
}

fn run_detect(cfg: &RunConfig, ctx: &RunContext) -> Result<Report> {
    let family = family_of(cfg)?;
    let budget = point_budget(cfg)?;
    let mut report = Report::new(vec!["b".into(), "value".into()], Value::Null);
    let mut rows = Vec::new();
    match &family {
        Family::Conic(f) => {
            let d = cfg
                .detect
                .as_ref()
                .ok_or_else(|| Error::config("`detect` on a conic family needs a `detect` section"))?;
            let constraints = ConstraintSet::new(
                true,
                d.anchor.clone(),
                Ratio::new(d.delta.0, d.delta.1),
                d.primes.clone(),
            )?;
            for b in heights(cfg)? {
                check_budget(projective_points(b, 1), budget, "detector sum")?;
                eprintln!("detect: conic B = {b}");
                let v = detector_lower_count(f, b, &constraints)?;
                let s = v
                    .exact_real()
                    .map(ratio_str)
                    .unwrap_or_else(|| format!("{}", v.to_c64().re));
                report.push_row(vec![b.to_string(), s.clone()]);
                rows.push(json!({"b": b, "value": s}));
            }
        }
        Family::Pencil(p) => {
            for b in heights(cfg)? {
                check_budget(projective_points(b, 1), budget, "detector sum")?;
                eprintln!("detect: pencil B = {b}");
                let v = pencil_detector_sum(p, b)?;
                report.push_row(vec![b.to_string(), v.to_string()]);
                rows.push(json!({"b": b, "value": v}));
            }
        }
        _ => return Err(Error::config("`detect` expects a conic or pencil family")),
    }
    report.summary = json!({
        "command": "detect",
        "label": cfg.label,
        "threads": ctx.threads,
        "rows": rows,
    });
    Ok(report)
}

fn run_search(cfg: &RunConfig) -> Result<Report> {
    let s = cfg
        .search
        .as_ref()
        .ok_or_else(|| Error::config("`search` needs a `search` section"))?;
    eprintln!("search: pencil counterexamples, primes ≤ {}", s.prime_bound);
    let witnesses = pencil_counterexample_search(s.prime_bound)?;
    let mut report = Report::new(
        vec![
            "p".into(),
            "t0".into(),
            "t1".into(),
            "soluble_plus".into(),
            "soluble_minus".into(),
        ],
        Value::Null,
    );
    for w in &witnesses {
        report.push_row(vec![
            w.p.to_string(),
            w.t0.to_string(),
            w.t1.to_string(),
            w.soluble_plus.to_string(),
            w.soluble_minus.to_string(),
        ]);
    }
    report.summary = json!({
        "command": "search",
        "label": cfg.label,
        "prime_bound": s.prime_bound,
        "witnesses": witnesses.len(),
    });
    Ok(report)
}
