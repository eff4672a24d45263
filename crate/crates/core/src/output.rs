//! CSV and SVG artifacts of runs, sweeps and convergence studies.
//!
//! CSV values use 17 significant digits; missing optional values are empty
//! fields. Given the same configuration the CSV bytes are reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::harness::{ConvergenceStudy, RunResult, SweepCell};
use crate::series::Column;
use crate::svg::{Chart, Line};

pub const SERIES_HEADER: &str = "t,y,chi,v,k_hat,V,W,eta_l2";
pub const SNAPSHOT_HEADER: &str = "x,u,u_hat,u_bar";
pub const SWEEP_HEADER: &str = "value,status,y_end,chi_end,k_hat_end,k_rel_err,sigma_V,r2_V,eta_l2_end,message";
pub const CONVERGENCE_HEADER: &str = "study,n,h,error";

pub const SERIES_FILE: &str = "timeseries.csv";
pub const SNAPSHOT_FILE: &str = "snapshot.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn series_csv(result: &RunResult) -> String {
    let mut s = String::with_capacity(160 * (result.series.len() + 1));
    s.push_str(SERIES_HEADER);
    s.push('\n');
    for r in &result.series.samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.y),
            fmt_f64(r.chi),
            fmt_f64(r.v),
            opt(r.k_hat),
            opt(r.lyap_v),
            opt(r.lyap_w),
            opt(r.eta_l2)
        );
    }
    if let Some(a) = &result.alarm {
        let _ = writeln!(s, "# truncated: {}", a.replace('\n', " "));
    }
    s
}

pub fn snapshot_csv(result: &RunResult) -> String {
    let snap = &result.snapshot;
    let mut s = String::from(SNAPSHOT_HEADER);
    s.push('\n');
    for i in 0..snap.x.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(snap.x[i]),
            fmt_f64(snap.u[i]),
            opt(snap.u_hat.as_ref().map(|f| f[i])),
            fmt_f64(snap.u_bar[i])
        );
    }
    if let Some(a) = &result.alarm {
        let _ = writeln!(s, "# truncated: {}", a.replace('\n', " "));
    }
    s
}

fn summary(result: &RunResult, cfg: &RunConfig) -> String {
    let mut s = String::new();
    let c = &result.certificate;
    let last = result.final_sample();
    let _ = writeln!(s, "steps completed: {}", result.steps);
    let _ = writeln!(s, "wall clock: {:.3} s", result.wall_clock.as_secs_f64());
    if let Some(a) = &result.alarm {
        let _ = writeln!(s, "ALARM: {a}");
    }
    let _ = writeln!(s, "t_end: {}", last.t);
    let _ = writeln!(s, "y(t_end): {}", last.y);
    let _ = writeln!(s, "chi(t_end): {}", last.chi);
    if let Some(k) = last.k_hat {
        let _ = writeln!(s, "k_hat(t_end): {k}  (k = {})", cfg.params.k_true);
    }
    if let Some(t) = result.clamp_release_time() {
        let _ = writeln!(s, "clamp release time: {t}");
    }
    let _ = writeln!(
        s,
        "certificate: valid = {}, epsilon = {}, epsilon_star = {}, lambda_max(Psi) = {}, lambda_max(Psi(2 eps)) = {}, lambda_min(Q) = {}",
        c.valid, c.epsilon, c.epsilon_star, c.psi_max_eig, c.dissipation_max_eig, c.q_min_eig
    );
    for (col, fit) in &result.fits {
        match fit {
            Ok(f) => {
                let _ = writeln!(s, "decay fit {col:?}: C = {}, sigma = {}, r2 = {}", f.c, f.sigma, f.r2);
            }
            Err(e) => {
                let _ = writeln!(s, "decay fit {col:?}: unavailable ({e})");
            }
        }
    }
    s
}

/// Writes the time series, final snapshot, summary and (unless disabled)
/// one SVG per figure panel into `cfg.out_dir`. Returns the written paths.
pub fn emit_outputs(result: &RunResult, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.out_dir;
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, contents: String| -> Result<()> {
        let p = dir.join(name);
        write(&p, &contents)?;
        written.push(p);
        Ok(())
    };
    put(SERIES_FILE, series_csv(result))?;
    put(SNAPSHOT_FILE, snapshot_csv(result))?;
    put("config.cfg", cfg.to_config_string())?;
    put(SUMMARY_FILE, summary(result, cfg))?;
    if cfg.plots {
        for (name, chart) in charts(result, cfg) {
            put(name, chart.render())?;
        }
    }
    Ok(written)
}

fn charts(result: &RunResult, cfg: &RunConfig) -> Vec<(&'static str, Chart)> {
    let ts = &result.series;
    let t = ts.times();
    let t_span = vec![t[0], *t.last().unwrap()];
    let col = |c: Column| ts.column(c);
    let mut out = vec![(
        "tracking.svg",
        Chart {
            title: "Boundary output".into(),
            x_label: "t".into(),
            y_label: "y(t) = u(1, t)".into(),
            log_y: false,
            lines: vec![
                Line::new("y", t.clone(), col(Column::Y).unwrap()),
                Line::new("y_r", t_span.clone(), vec![cfg.params.y_r; 2]).dashed(),
            ],
        },
    )];
    if let Some(k) = col(Column::KHat) {
        out.push((
            "estimate.svg",
            Chart {
                title: "Reaction coefficient estimate".into(),
                x_label: "t".into(),
                y_label: "k_hat(t)".into(),
                log_y: false,
                lines: vec![
                    Line::new("k_hat", t.clone(), k),
                    Line::new("k", t_span, vec![cfg.params.k_true; 2]).dashed(),
                ],
            },
        ));
    }
    let snap = &result.snapshot;
    let mut profiles = vec![Line::new("u", snap.x.clone(), snap.u.to_vec())];
    if let Some(u_hat) = &snap.u_hat {
        profiles.push(Line::new("u_hat", snap.x.clone(), u_hat.to_vec()));
    }
    profiles.push(Line::new("u_bar", snap.x.clone(), snap.u_bar.to_vec()).dashed());
    out.push((
        "profiles.svg",
        Chart {
            title: "Final profiles".into(),
            x_label: "x".into(),
            y_label: "u(x, t_end)".into(),
            log_y: false,
            lines: profiles,
        },
    ));
    let mut lyap = Vec::new();
    let v = col(Column::LyapV);
    let w = col(Column::LyapW);
    if let Some(v) = &v {
        lyap.push(Line::new("V", t.clone(), v.clone()));
    }
    if let Some(w) = &w {
        lyap.push(Line::new("W", t.clone(), w.clone()));
    }
    if let (Some(v), Some(w)) = (&v, &w) {
        let u: Vec<f64> = v.iter().zip(w).map(|(v, w)| v + cfg.theta * w).collect();
        lyap.push(Line::new("U = V + theta W", t.clone(), u));
    }
    if !lyap.is_empty() {
        out.push((
            "lyapunov.svg",
            Chart {
                title: "Lyapunov functionals".into(),
                x_label: "t".into(),
                y_label: "value (log scale)".into(),
                log_y: true,
                lines: lyap,
            },
        ));
    }
    out
}

pub fn sweep_csv(cells: &[SweepCell], k_true: f64, axis: &str) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for cell in cells {
        match &cell.result {
            Ok(r) => {
                let last = r.final_sample();
                // the reaction coefficient of this cell when sweeping k
                let k = if axis == "k" { cell.value } else { k_true };
                let fit = r.fit(Column::LyapV);
                let _ = writeln!(
                    s,
                    "{},ok,{},{},{},{},{},{},{},",
                    fmt_f64(cell.value),
                    fmt_f64(last.y),
                    fmt_f64(last.chi),
                    opt(last.k_hat),
                    opt(last.k_hat.map(|kh| (kh - k).abs() / k)),
                    opt(fit.map(|f| f.sigma)),
                    opt(fit.map(|f| f.r2)),
                    opt(last.eta_l2)
                );
            }
            Err(e) => {
                let _ = writeln!(
                    s,
                    "{},failed,,,,,,,,\"{}\"",
                    fmt_f64(cell.value),
                    e.replace('"', "'")
                );
            }
        }
    }
    s
}

/// Sweep summary table plus each successful run's outputs in its own
/// `<axis>=<value>` subdirectory.
pub fn emit_sweep(cells: &[SweepCell], base: &RunConfig, axis: &str) -> Result<Vec<PathBuf>> {
    ensure_dir(&base.out_dir)?;
    let mut written = Vec::new();
    let table = base.out_dir.join("sweep.csv");
    write(&table, &sweep_csv(cells, base.params.k_true, axis))?;
    written.push(table);
    for cell in cells {
        if let Ok(r) = &cell.result {
            let mut cfg = base.clone();
            // validated when the cell ran
            let _ = cfg.set(axis, &cell.value.to_string());
            cfg.out_dir = base.out_dir.join(format!("{axis}={}", cell.value));
            written.extend(emit_outputs(r, &cfg)?);
        }
    }
    Ok(written)
}

pub fn convergence_csv(studies: &[(&str, &ConvergenceStudy)]) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    s.push('\n');
    for (name, study) in studies {
        for r in &study.rows {
            let _ = writeln!(s, "{name},{},{},{}", r.n, fmt_f64(r.h), fmt_f64(r.error));
        }
    }
    s
}

pub fn emit_convergence(dir: &Path, studies: &[(&str, &ConvergenceStudy)]) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let p = dir.join("convergence.csv");
    write(&p, &convergence_csv(studies))?;
    Ok(p)
}
