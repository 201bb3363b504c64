//! The six subcommands. Each validates its configuration, computes (grid
//! points in parallel), and writes through a [`Sink`].

use std::path::PathBuf;

use anyhow::{bail, Context};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use thinfilm_core::linear::{self, EigenSearch, LinearOptions, MIN_FIT_SAMPLES};
use thinfilm_core::nonlinear::{self, BranchOptions};
use thinfilm_core::oscillatory::{self, OscOptions, OscParams, Periodicity};
use thinfilm_core::radial::IntegrateOptions;
use thinfilm_core::regularity::{self, TRACE_CONSTANT_NOTE};
use thinfilm_core::wkbj::{self, MatchOptions};
use thinfilm_core::Sign;

use crate::config::*;
use crate::output::{Cell, Sink, Table};
use crate::usage;

/// What a command reports back: lines for stdout and the files it wrote.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

fn check(ok: bool, msg: &str) -> anyhow::Result<()> {
    if ok {
        Ok(())
    } else {
        usage(msg)
    }
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn finite_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn window_ok(w: [f64; 2]) -> bool {
    finite_positive(w[0]) && w[1].is_finite() && w[1] > w[0]
}

fn opt_num(v: Option<f64>) -> Cell {
    Cell::Num(v.unwrap_or(f64::NAN))
}

// ---------------------------------------------------------------- linear-scan

impl LinearScanConfig {
    pub fn grid(&self) -> Vec<f64> {
        if !self.alphas.is_empty() {
            return self.alphas.clone();
        }
        if !(self.alpha_step > 0.0) || !(self.alpha_stop >= self.alpha_start) {
            return Vec::new();
        }
        let count = ((self.alpha_stop - self.alpha_start) / self.alpha_step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.alpha_start + i as f64 * self.alpha_step).collect()
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        check(self.dim >= 1, "dim must be at least 1")?;
        let grid = self.grid();
        check(!grid.is_empty(), "alpha grid is empty")?;
        check(grid.iter().all(|&a| finite_positive(a)), "alpha grid values must be positive")?;
        check(increasing(&grid), "alpha grid must be strictly increasing")?;
        check(window_ok(self.window), "window must satisfy 0 < lo < hi")?;
        check(self.samples >= MIN_FIT_SAMPLES, "samples must be at least 50")?;
        check(finite_positive(self.rel_tol) && finite_positive(self.abs_tol), "tolerances must be positive")?;
        check((0.0..=1.0).contains(&self.max_fail_fraction), "max_fail_fraction must lie in [0, 1]")
    }

    fn shot(&self) -> LinearOptions {
        LinearOptions {
            window: (self.window[0], self.window[1]),
            samples: self.samples,
            integrate: IntegrateOptions { rel_tol: self.rel_tol, abs_tol: self.abs_tol, ..IntegrateOptions::default() },
            ..LinearOptions::default()
        }
    }
}

pub fn linear_scan(cfg: &LinearScanConfig, mut sink: Sink) -> anyhow::Result<Report> {
    cfg.validate()?;
    let grid = cfg.grid();
    let opts = cfg.shot();
    let fits: Vec<_> = grid.par_iter().map(|&a| (a, linear::shoot_and_fit(cfg.dim, cfg.kind, a, &opts))).collect();

    let mut table = Table::new(&["alpha", "c1", "c2", "residual", "condition", "status"]);
    let mut failures = Vec::new();
    for (alpha, fit) in &fits {
        match fit {
            Ok(f) => table.push(vec![(*alpha).into(), f.c1.into(), f.c2.into(), f.residual.into(), f.condition.into(), "ok".into()]),
            Err(e) => {
                failures.push(json!({ "alpha": alpha, "error": e.to_string() }));
                let nan = Cell::Num(f64::NAN);
                table.push(vec![(*alpha).into(), nan.clone(), nan.clone(), nan.clone(), nan, e.to_string().into()]);
            }
        }
    }
    let ok: Vec<(f64, f64, f64)> = fits.iter().filter_map(|(a, f)| f.as_ref().ok().map(|f| (*a, f.c1, f.c2))).collect();
    let changes = |sel: fn(&(f64, f64, f64)) -> f64| -> Vec<[f64; 2]> {
        ok.windows(2).filter(|w| sel(&w[0]) * sel(&w[1]) < 0.0).map(|w| [w[0].0, w[1].0]).collect()
    };
    let (z1, z2) = (changes(|r| r.1), changes(|r| r.2));

    sink.csv("linear_scan", &table)?;
    let results: Vec<Value> = fits
        .iter()
        .map(|(a, f)| match f {
            Ok(f) => json!({ "alpha": a, "fit": f }),
            Err(_) => json!({ "alpha": a, "fit": null }),
        })
        .collect();
    let fraction = failures.len() as f64 / grid.len() as f64;
    sink.json(
        "linear_scan",
        json!({ "dim": cfg.dim, "kind": cfg.kind, "rows": results, "c1_sign_changes": z1, "c2_sign_changes": z2 }),
        json!({ "failures": failures, "failed_fraction": fraction }),
    )?;
    sink.plot("linear_scan", format!("far-field constants, N = {}, {}", cfg.dim, cfg.kind.name()), "alpha", &["c1", "c2"]);
    let files = sink.finish()?;
    if fraction > cfg.max_fail_fraction {
        bail!("{} of {} grid points failed (allowed fraction {})", failures.len(), grid.len(), cfg.max_fail_fraction);
    }
    let lines = vec![
        format!("{} points, {} failed", grid.len(), failures.len()),
        format!("C1 sign changes: {z1:?}"),
        format!("C2 sign changes: {z2:?}"),
    ];
    Ok(Report { lines, files })
}

// --------------------------------------------------------------- linear-eigen

impl LinearEigenConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        check(!self.dims.is_empty() && self.dims.iter().all(|&d| d >= 1), "dims must be a non-empty list of positive integers")?;
        check(self.k_max >= 1, "k_max must be at least 1")?;
        check(finite_positive(self.step) && finite_positive(self.offset), "step and offset must be positive")?;
        check(finite_positive(self.coincidence) && finite_positive(self.x_tol), "tolerances must be positive")?;
        check(window_ok(self.window), "window must satisfy 0 < lo < hi")?;
        check(self.samples >= MIN_FIT_SAMPLES, "samples must be at least 50")
    }

    fn search(&self) -> EigenSearch {
        EigenSearch {
            shot: LinearOptions { window: (self.window[0], self.window[1]), samples: self.samples, ..LinearOptions::default() },
            step: self.step,
            offset: self.offset,
            coincidence: self.coincidence,
            x_tol: self.x_tol,
            ..EigenSearch::default()
        }
    }
}

pub fn linear_eigen(cfg: &LinearEigenConfig, mut sink: Sink) -> anyhow::Result<Report> {
    cfg.validate()?;
    let search = cfg.search();
    let found: Vec<_> = cfg
        .dims
        .par_iter()
        .map(|&d| linear::find_linear_eigenvalues(d, cfg.k_max, &search).with_context(|| format!("N = {d}")))
        .collect::<anyhow::Result<_>>()?;

    let mut table = Table::new(&["dim", "k", "alpha", "exact", "error", "kind", "zero_c1", "zero_c2", "abs_c1", "abs_c2"]);
    let mut lines = Vec::new();
    let mut worst: f64 = 0.0;
    for (&d, eig) in cfg.dims.iter().zip(&found) {
        for e in eig {
            let exact = 0.5 * e.k as f64;
            worst = worst.max((e.alpha - exact).abs());
            table.push(vec![
                d.into(),
                e.k.into(),
                e.alpha.into(),
                exact.into(),
                (e.alpha - exact).into(),
                e.kind.name().into(),
                e.zero_c1.into(),
                e.zero_c2.into(),
                e.abs_c1.into(),
                e.abs_c2.into(),
            ]);
        }
        let alphas: Vec<String> = eig.iter().map(|e| format!("{:.8}", e.alpha)).collect();
        lines.push(format!("N = {d}: alpha_k = {}", alphas.join(", ")));
    }
    lines.push(format!("max |alpha_k - k/2| = {worst:.3e}"));
    sink.csv("linear_eigen", &table)?;
    let results: Vec<Value> = cfg.dims.iter().zip(&found).map(|(d, e)| json!({ "dim": d, "eigenvalues": e })).collect();
    sink.json("linear_eigen", json!(results), json!({ "max_abs_error_vs_half_integers": worst }))?;
    sink.plot("linear_eigen", "linear eigenvalues", "k", &["alpha"]);
    Ok(Report { lines, files: sink.finish()? })
}

// ----------------------------------------------------------- nonlinear-branch

impl BranchConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        check(!self.ks.is_empty() && self.ks.iter().all(|&k| k >= 1), "ks must be a non-empty list of positive integers")?;
        check(!self.dims.is_empty() && self.dims.iter().all(|&d| d >= 1), "dims must be a non-empty list of positive integers")?;
        check(!self.n_grid.is_empty(), "n grid is empty")?;
        check(self.n_grid.iter().all(|n| n.is_finite()), "n grid values must be finite")?;
        check(increasing(&self.n_grid), "n grid must be strictly increasing")?;
        check(self.n_grid[0] > 0.0 && self.n_grid[0] <= 1e-3, "n grid must start in (0, 1e-3]")?;
        check(*self.n_grid.last().unwrap() < 2.0, "n must stay below 2")?;
        check(finite_positive(self.delta) && finite_positive(self.y_star), "delta and y_star must be positive")?;
        check(finite_positive(self.threshold), "threshold must be positive")?;
        check(self.radius_check >= 0.0 && self.radius_check < 1.0, "radius_check must lie in [0, 1)")?;
        check(finite_positive(self.radius_tol), "radius_tol must be positive")
    }

    fn options(&self) -> BranchOptions {
        BranchOptions {
            delta: self.delta,
            y_star: self.y_star,
            threshold: self.threshold,
            check_delta: self.check_delta,
            radius_check: (self.radius_check > 0.0).then_some(self.radius_check),
            radius_tol: self.radius_tol,
            ..BranchOptions::default()
        }
    }
}

pub fn nonlinear_branch(cfg: &BranchConfig, mut sink: Sink) -> anyhow::Result<Report> {
    cfg.validate()?;
    let opts = cfg.options();
    let jobs: Vec<(u32, u32)> = cfg.ks.iter().flat_map(|&k| cfg.dims.iter().map(move |&d| (k, d))).collect();
    let branches: Vec<_> = jobs
        .par_iter()
        .map(|&(k, d)| nonlinear::trace_branch(d, k, &cfg.n_grid, &opts).with_context(|| format!("k = {k}, N = {d}")))
        .collect::<anyhow::Result<_>>()?;

    let mut table = Table::new(&[
        "k",
        "dim",
        "n",
        "alpha",
        "approximation",
        "kind",
        "residual",
        "y_star",
        "mu",
        "local_exponent",
        "delta_shift",
        "radius_shift",
    ]);
    let mut lines = Vec::new();
    let mut summaries = Vec::new();
    for b in &branches {
        for p in &b.points {
            table.push(vec![
                b.k.into(),
                b.dim.into(),
                p.n.into(),
                p.alpha.into(),
                nonlinear::branch_approximation(b.k, p.n).into(),
                p.kind.name().into(),
                p.residual.into(),
                p.y_star.into(),
                p.mu.into(),
                p.local_exponent.into(),
                opt_num(p.delta_shift),
                opt_num(p.radius_shift),
            ]);
        }
        let terminated = b.terminated.as_ref().map(|(n, e)| json!({ "n": n, "reason": e.to_string() }));
        let comparison = b.slope_estimate.map(|s| nonlinear::compare_slope(b.k, s));
        let monotone = b.points.windows(2).all(|w| w[1].alpha > w[0].alpha);
        summaries.push(json!({
            "k": b.k, "dim": b.dim, "points": b.points.len(), "monotone": monotone,
            "slope_estimate": b.slope_estimate, "slope_comparison": comparison, "terminated": terminated,
        }));
        let mut line = format!("k = {}, N = {}: {} of {} points", b.k, b.dim, b.points.len(), cfg.n_grid.len());
        if let Some(s) = b.slope_estimate {
            line += &format!(", slope {s:.6}");
        }
        if let Some((n, e)) = &b.terminated {
            line += &format!(", stopped at n = {n}: {e}");
        }
        lines.push(line);
    }
    sink.csv("nonlinear_branch", &table)?;
    sink.json("nonlinear_branch", json!(branches), json!(summaries))?;
    sink.plot("nonlinear_branch", "nonlinear branches alpha_k(n)", "n", &["alpha", "approximation"]);
    Ok(Report { lines, files: sink.finish()? })
}

// ------------------------------------------------------------------------ osc

impl OscConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        check(self.n > 0.0 && self.n < 2.0, "n must lie in (0, 2)")?;
        check(self.dim >= 1, "dim must be at least 1")?;
        check(finite_positive(self.alpha), "alpha must be positive")?;
        check(finite_positive(self.s_hat_end), "s_hat_end must be positive")?;
        check(finite_positive(self.ds_hat) && self.ds_hat < self.s_hat_end, "ds_hat must lie in (0, s_hat_end)")?;
        check(finite_positive(self.floor) && finite_positive(self.rel_tol), "floor and rel_tol must be positive")?;
        check(self.stride >= 1, "stride must be at least 1")?;
        check(self.scan.iter().all(|&n| n > 0.0 && n < 2.0), "scan values must lie in (0, 2)")?;
        check(increasing(&self.scan), "scan must be strictly increasing")
    }

    fn options(&self) -> OscOptions {
        OscOptions { floor: self.floor, rel_tol: self.rel_tol, ..OscOptions::default() }
    }
}

fn periodicity_json(p: &Periodicity) -> Value {
    serde_json::to_value(p).unwrap_or(Value::Null)
}

fn periodicity_text(p: &Periodicity) -> String {
    match p {
        Periodicity::Periodic { period, confidence } => format!("periodic, period {period:.4} (r = {confidence:.3})"),
        Periodicity::Lost { best } => format!("lost (best r = {best:.3})"),
        Periodicity::Undetermined => "undetermined".into(),
    }
}

pub fn osc(cfg: &OscConfig, mut sink: Sink) -> anyhow::Result<Report> {
    cfg.validate()?;
    let opts = cfg.options();
    let p = OscParams::new(cfg.n, cfg.dim, cfg.alpha)?;
    let orbit = oscillatory::phi_orbit(&p, cfg.s_hat_end / p.mu, (p.mu / cfg.ds_hat).round().max(1.0) as usize, &opts)?;

    let mut table = Table::new(&["s", "t_phi", "sign", "ln_abs_phi", "s_hat", "ln_abs_phi_hat"]);
    for i in (0..orbit.samples.len()).step_by(cfg.stride) {
        let (phi, hat) = (orbit.phi(i), orbit.phi_hat(i));
        table.push(vec![
            orbit.s(i).into(),
            phi.transformed().into(),
            phi.sign.into(),
            phi.ln_abs.into(),
            orbit.samples[i].s_hat.into(),
            hat.ln_abs.into(),
        ]);
    }
    let tail = orbit.normalised_phi_hat(orbit.samples.len() / 2);
    let step = orbit.samples.get(1).map_or(cfg.ds_hat, |s| s.s_hat - orbit.samples[0].s_hat);
    let own = oscillatory::detect_periodicity(&tail, step);
    let mut lines = vec![format!("n = {}, alpha = {}, N = {}: {}", cfg.n, cfg.alpha, cfg.dim, periodicity_text(&own))];
    sink.csv("osc", &table)?;
    sink.plot("osc", format!("t(phi) against s, n = {}", cfg.n), "s", &["t_phi"]);

    let mut results = json!({
        "n": cfg.n, "alpha": cfg.alpha, "dim": cfg.dim, "mu": p.mu, "log_amplitude": orbit.log_amplitude,
        "samples": orbit.samples.len(), "zero_crossings": orbit.crossings.len(), "periodicity": periodicity_json(&own),
    });

    if !cfg.scan.is_empty() {
        let scan: Vec<(f64, Periodicity)> = cfg
            .scan
            .par_iter()
            .map(|&n| {
                let out = OscParams::new(n, cfg.dim, cfg.alpha)
                    .and_then(|q| oscillatory::classify_orbit(&q, cfg.s_hat_end, cfg.ds_hat, &opts))
                    .unwrap_or(Periodicity::Undetermined);
                (n, out)
            })
            .collect();
        let bracket = oscillatory::loss_bracket(&scan);
        let mut st = Table::new(&["n", "outcome", "period", "confidence"]);
        for (n, out) in &scan {
            let (name, period, conf) = match out {
                Periodicity::Periodic { period, confidence } => ("periodic", *period, *confidence),
                Periodicity::Lost { best } => ("lost", f64::NAN, *best),
                Periodicity::Undetermined => ("undetermined", f64::NAN, f64::NAN),
            };
            st.push(vec![(*n).into(), name.into(), period.into(), conf.into()]);
            lines.push(format!("  scan n = {n}: {}", periodicity_text(out)));
        }
        lines.push(match bracket {
            Some((a, b)) => format!("periodicity lost between n = {a} and n = {b}"),
            None => "no loss bracket on this scan".into(),
        });
        sink.csv("osc_scan", &st)?;
        sink.plot("osc_scan", "period of the late orbit against n", "n", &["period"]);
        let entries: Vec<Value> = scan.iter().map(|(n, o)| json!({ "n": n, "periodicity": periodicity_json(o) })).collect();
        results["scan"] = json!({ "points": entries, "bracket": bracket });
    }

    if cfg.limit {
        let lim = oscillatory::phihat_orbit(0.0, cfg.s_hat_end, cfg.ds_hat, &opts)?;
        let slope = lim.envelope_exponent(lim.samples.len() / 4)?;
        let expected = oscillatory::phihat_envelope_exponent();
        let mut lt = Table::new(&["s_hat", "sign", "ln_abs_phi_hat"]);
        for i in (0..lim.samples.len()).step_by(cfg.stride) {
            let v = lim.phi_hat(i);
            lt.push(vec![lim.samples[i].s_hat.into(), v.sign.into(), v.ln_abs.into()]);
        }
        sink.csv("osc_limit", &lt)?;
        sink.plot("osc_limit", "n = 0 rescaled orbit", "s_hat", &["ln_abs_phi_hat"]);
        lines.push(format!("n = 0 limit: envelope slope {slope:.6} (expected {expected:.7})"));
        results["limit"] = json!({ "envelope_slope": slope, "expected": expected });
    }

    sink.json("osc", results, json!({ "floor": cfg.floor, "rel_tol": cfg.rel_tol }))?;
    Ok(Report { lines, files: sink.finish()? })
}

// ------------------------------------------------------------------ wkbj-check

impl WkbjConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        check(self.dim >= 1, "dim must be at least 1")?;
        check(finite_positive(self.alpha), "alpha must be positive")?;
        check(self.ns.iter().all(|&n| n > 0.0 && n <= 0.05), "ns values must lie in (0, 0.05]")?;
        check(window_ok(self.band), "band must satisfy 0 < lo < hi")?;
        check(self.samples >= 2, "samples must be at least 2")?;
        check(self.k1.iter().all(|v| v.is_finite()) && (self.k1[0] != 0.0 || self.k1[1] != 0.0), "k1 must be finite and nonzero")
    }
}

/// `Y` grid on which the outer eikonal identity is checked.
pub const EIKONAL_GRID: (f64, f64, usize) = (1e-2, 1e2, 401);

pub fn wkbj_check(cfg: &WkbjConfig, mut sink: Sink) -> anyhow::Result<Report> {
    cfg.validate()?;
    let roots = linear::char_roots(Sign::Focusing);
    let (lo, hi, count) = EIKONAL_GRID;
    let mut et = Table::new(&["big_y", "eikonal_residual", "outer_transport_residual"]);
    let (mut eik, mut otr) = (0.0f64, 0.0f64);
    for i in 0..count {
        let y = lo * (hi / lo).powf(i as f64 / (count - 1) as f64);
        let e = wkbj::eikonal_residual(y, roots.a1, roots.c0).norm();
        let t = wkbj::outer_transport_residual(y, cfg.dim, cfg.alpha, 0.0, roots.c0).abs();
        eik = eik.max(e);
        otr = otr.max(t);
        et.push(vec![y.into(), e.into(), t.into()]);
    }
    let inner: Vec<_> = [roots.a1, roots.a2].iter().map(|&a| wkbj::wkbj_amplitude_ode_check(a, cfg.dim, cfg.alpha)).collect();
    let transport = inner.iter().map(|c| c.transport.norm()).fold(0.0, f64::max);
    let printed = inner.iter().map(|c| c.eikonal_printed.norm()).fold(0.0, f64::max);

    let opts = MatchOptions {
        k1: Complex64::new(cfg.k1[0], cfg.k1[1]),
        convention: cfg.convention,
        root: cfg.root,
        band: (cfg.band[0], cfg.band[1]),
        samples: cfg.samples,
    };
    let reports: Vec<_> = cfg.ns.iter().map(|&n| wkbj::match_inner_outer(n, cfg.dim, cfg.alpha, &opts)).collect::<Result<_, _>>()?;
    let mut mt = Table::new(&["n", "y", "big_y", "ln_inner", "ln_outer", "phase_inner", "phase_outer"]);
    for r in &reports {
        for p in &r.points {
            mt.push(vec![
                r.n.into(),
                p.y.into(),
                p.big_y.into(),
                p.ln_inner.into(),
                p.ln_outer.into(),
                p.phase_inner.into(),
                p.phase_outer.into(),
            ]);
        }
    }

    let mut lines = vec![
        format!("outer eikonal residual max on Y in [{lo}, {hi}]: {eik:.3e}"),
        format!("outer transport residual max: {otr:.3e}"),
        format!("inner transport residual: {transport:.3e}"),
        format!("inner eikonal with the opposite sign on y/4: residual {printed:.3e} at y = 1"),
    ];
    for r in &reports {
        lines.push(format!(
            "n = {}: ln-amplitude mismatch {:.3e} (relative {:.3e}), phase mismatch {:.3e}",
            r.n, r.max_log_mismatch, r.relative_mismatch, r.max_phase_mismatch
        ));
    }
    sink.csv("wkbj_eikonal", &et)?;
    sink.csv("wkbj_match", &mt)?;
    sink.plot("wkbj_eikonal", "outer eikonal and transport residuals", "big_y", &["eikonal_residual", "outer_transport_residual"]);
    sink.plot("wkbj_match", "inner and outer log-amplitudes on the overlap band", "y", &["ln_inner", "ln_outer"]);
    sink.json(
        "wkbj_check",
        json!({
            "eikonal_max_residual": eik, "outer_transport_max_residual": otr,
            "inner_transport_max_residual": transport, "inner_checks": inner, "matches": reports,
        }),
        json!({ "printed_sign_eikonal_residual": printed, "eikonal_grid": [lo, hi, count] }),
    )?;
    Ok(Report { lines, files: sink.finish()? })
}

// ------------------------------------------------------------------ regularity

impl RegularityConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        check(self.n >= 0.0 && self.n < 2.0, "n must lie in [0, 2)")?;
        check(self.dim >= 1, "dim must be at least 1")?;
        check(!self.alphas.is_empty() || self.k_max >= 1, "k_max must be at least 1")?;
        check(self.alphas.iter().all(|&a| finite_positive(a)), "alphas must be positive")
    }
}

/// `n` grid from `10⁻³` up to `n` used to trace a branch for the report.
fn trace_grid(n: f64) -> Vec<f64> {
    if n <= 1e-3 {
        return vec![n];
    }
    let steps = ((n / 1e-3).ln() / 1.5f64.ln()).ceil().max(1.0) as usize;
    (0..=steps).map(|i| 1e-3 * (n / 1e-3).powf(i as f64 / steps as f64)).collect()
}

pub fn regularity(cfg: &RegularityConfig, mut sink: Sink) -> anyhow::Result<Report> {
    cfg.validate()?;
    let mut untraced: Vec<String> = Vec::new();
    let branches: Vec<(u32, f64)> = if !cfg.alphas.is_empty() {
        cfg.alphas.iter().enumerate().map(|(i, &a)| (i as u32 + 1, a)).collect()
    } else if cfg.n == 0.0 {
        (1..=cfg.k_max).map(|k| (k, 0.5 * k as f64)).collect()
    } else {
        let grid = trace_grid(cfg.n);
        let traced: Vec<Result<(u32, f64), String>> = (1..=cfg.k_max)
            .into_par_iter()
            .map(|k| match nonlinear::trace_branch(cfg.dim, k, &grid, &BranchOptions::default()) {
                Err(e) => Err(format!("k = {k}: {e}")),
                Ok(b) => match (b.points.last(), &b.terminated) {
                    (Some(p), None) => Ok((k, p.alpha)),
                    (_, Some((n, e))) => Err(format!("k = {k}: stopped at n = {n}: {e}")),
                    (None, None) => Err(format!("k = {k}: no points")),
                },
            })
            .collect();
        traced.into_iter().filter_map(|r| r.map_err(|e| untraced.push(e)).ok()).collect()
    };
    let report = regularity::regularity_report(cfg.n, cfg.dim, &branches)?;

    let mut table = Table::new(&["k", "alpha_k", "mu_k", "epsilon", "holder", "classical", "p_star", "t_exponent_bound"]);
    let mut lines = vec![format!("n = {}, N = {}", cfg.n, cfg.dim)];
    for r in &report.rows {
        table.push(vec![
            r.k.into(),
            r.alpha_k.into(),
            r.mu_k.into(),
            r.epsilon.into(),
            r.holder_label.to_string().into(),
            (if r.classical { "yes" } else { "no" }).into(),
            opt_num(r.p_star),
            r.t_exponent_bound.into(),
        ]);
        lines.push(format!("k = {}: alpha = {:.8}, mu = {:.8}, {}, {}", r.k, r.alpha_k, r.mu_k, r.holder_label, r.statement()));
    }
    lines.push(TRACE_CONSTANT_NOTE.into());
    sink.csv("regularity", &table)?;
    let statements: Vec<String> = report.rows.iter().map(|r| r.statement().to_string()).collect();
    sink.json("regularity", json!(report), json!({ "statements": statements, "note": TRACE_CONSTANT_NOTE, "untraced": untraced }))?;
    sink.plot("regularity", "trace exponents", "k", &["mu_k"]);
    let files = sink.finish()?;
    if !untraced.is_empty() {
        bail!("branches not traced to n = {}: {}", cfg.n, untraced.join("; "));
    }
    Ok(Report { lines, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_grid_endpoints() {
        let c = LinearScanConfig { alpha_start: 0.3, alpha_stop: 0.7, alpha_step: 0.1, ..Default::default() };
        let g = c.grid();
        assert_eq!(g.len(), 5);
        assert!((g[4] - 0.7).abs() < 1e-12);
        let empty = LinearScanConfig { alpha_start: 0.7, alpha_stop: 0.3, ..Default::default() };
        assert!(empty.grid().is_empty());
        assert!(empty.validate().is_err());
    }

    #[test]
    fn trace_grid_spans_request() {
        let g = trace_grid(0.2);
        assert_eq!(g[0], 1e-3);
        assert!((g.last().unwrap() - 0.2).abs() < 1e-12);
        assert!(increasing(&g));
        assert_eq!(trace_grid(5e-4), vec![5e-4]);
    }

    #[test]
    fn branch_limits_are_usage_errors() {
        let c = BranchConfig { n_grid: vec![1e-3, 1.0, 2.0], ..Default::default() };
        assert!(c.validate().unwrap_err().downcast_ref::<crate::UsageError>().is_some());
        assert!(BranchConfig::default().validate().is_ok());
    }
}
