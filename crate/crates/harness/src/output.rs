//! On-disk layout of profiles, runs, sweeps and check reports.

use std::fs;
use std::path::{Path, PathBuf};

use fracburgers::diagnostics::EntropyLedger;
use fracburgers::run::RunResult;
use fracburgers::ViscousProfile;
use serde::Serialize;

use crate::error::HarnessResult;
use crate::plot::{Chart, Scale, Series};

pub fn profile_dir(root: &Path, id: &str) -> PathBuf {
    root.join("profiles").join(id)
}

pub fn run_dir(root: &Path, id: &str) -> PathBuf {
    root.join("runs").join(id)
}

pub fn sweep_dir(root: &Path, id: &str) -> PathBuf {
    root.join("sweeps").join(id)
}

pub fn check_dir(root: &Path, id: &str) -> PathBuf {
    root.join("checks").join(id)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> HarnessResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> HarnessResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ProfileRow {
    xi: f64,
    #[serde(rename = "S1")]
    s1: f64,
}

/// `profile.csv` with columns `xi,S1` and `profile.json` with the metadata.
pub fn write_profile(dir: &Path, profile: &ViscousProfile) -> HarnessResult<()> {
    fs::create_dir_all(dir)?;
    let rows = profile.xi().iter().zip(profile.samples()).map(|(&xi, &s1)| ProfileRow { xi, s1 });
    write_csv(&dir.join("profile.csv"), rows)?;
    write_json(&dir.join("profile.json"), &profile.metadata())?;
    let chart = Chart { title: "shock layer", x_label: "xi", y_label: "S1", x_scale: Scale::Linear, y_scale: Scale::Linear };
    let window = 8.0 * (profile.u_minus() - profile.u_plus()).max(1.0);
    let points = profile
        .xi()
        .iter()
        .zip(profile.samples())
        .filter(|(x, _)| x.abs() <= window)
        .map(|(&x, &s)| (x, s))
        .collect();
    write_plot(dir, "profile.svg", &chart, &[Series { label: "S1", points }])
}

#[derive(Serialize)]
struct LedgerCsvRow {
    delta: f64,
    t: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "H1")]
    h1: f64,
    #[serde(rename = "H2")]
    h2: f64,
    #[serde(rename = "P")]
    p: f64,
    #[serde(rename = "dH_fd")]
    dh_fd: f64,
    #[serde(rename = "X")]
    x: f64,
    #[serde(rename = "Xdot")]
    xdot: f64,
    dist: f64,
}

#[derive(Serialize)]
struct ShiftCsvRow {
    t: f64,
    #[serde(rename = "X")]
    x: f64,
    #[serde(rename = "Xdot")]
    xdot: f64,
}

#[derive(Serialize)]
struct MonitorCsvRow {
    t: f64,
    max_norm: f64,
    positive_slope_l2: f64,
    mass: f64,
    dist: f64,
}

/// Series files of one run: `ledger.csv` (one block per cutoff width),
/// `shift.csv`, `monitor.csv` and the plots.
pub fn write_series(dir: &Path, result: &RunResult) -> HarnessResult<()> {
    fs::create_dir_all(dir.join("plots"))?;
    let ledger_rows = result.ledgers.iter().flat_map(|l| {
        l.rows.iter().map(move |r| LedgerCsvRow {
            delta: l.family.delta,
            t: r.t,
            h: r.h,
            h1: r.h1,
            h2: r.h2,
            p: r.p,
            dh_fd: r.dh_fd,
            x: r.x,
            xdot: r.xdot,
            dist: r.dist,
        })
    });
    write_csv(&dir.join("ledger.csv"), ledger_rows)?;
    write_csv(&dir.join("shift.csv"), result.shift.iter().map(|s| ShiftCsvRow { t: s.t, x: s.x, xdot: s.xdot }))?;
    let monitor_rows = result.monitors.iter().zip(&result.dist).map(|(m, d)| MonitorCsvRow {
        t: m.t,
        max_norm: m.max_norm,
        positive_slope_l2: m.positive_slope_l2,
        mass: m.mass,
        dist: d.1,
    });
    write_csv(&dir.join("monitor.csv"), monitor_rows)?;
    write_run_plots(&dir.join("plots"), result)
}

fn write_plot(dir: &Path, name: &str, chart: &Chart<'_>, series: &[Series<'_>]) -> HarnessResult<()> {
    fs::write(dir.join(name), chart.render(series))?;
    Ok(())
}

fn write_run_plots(dir: &Path, result: &RunResult) -> HarnessResult<()> {
    let linear = |title, y_label| Chart { title, x_label: "t", y_label, x_scale: Scale::Linear, y_scale: Scale::Linear };
    write_plot(dir, "dist.svg", &linear("shifted distance to the inviscid shock", "dist"), &[Series {
        label: "dist",
        points: result.dist.clone(),
    }])?;
    write_plot(dir, "shift.svg", &linear("shift", "X"), &[Series {
        label: "X",
        points: result.shift.iter().map(|s| (s.t, s.x)).collect(),
    }])?;
    write_plot(dir, "monitors.svg", &linear("monitors", "norm"), &[
        Series { label: "sup norm", points: result.monitors.iter().map(|m| (m.t, m.max_norm)).collect() },
        Series { label: "positive slope", points: result.monitors.iter().map(|m| (m.t, m.positive_slope_l2)).collect() },
    ])?;
    for ledger in &result.ledgers {
        write_ledger_plot(dir, ledger)?;
    }
    Ok(())
}

fn write_ledger_plot(dir: &Path, ledger: &EntropyLedger) -> HarnessResult<()> {
    let pick = |f: fn(&fracburgers::diagnostics::LedgerRow) -> f64| ledger.rows.iter().map(|r| (r.t, f(r))).collect();
    let title = format!("entropy budget, delta = {}", ledger.family.delta);
    let chart = Chart { title: &title, x_label: "t", y_label: "rate", x_scale: Scale::Linear, y_scale: Scale::Linear };
    write_plot(dir, &format!("ledger_delta_{}.svg", ledger.family.delta), &chart, &[
        Series { label: "dH/dt (finite difference)", points: pick(|r| r.dh_fd) },
        Series { label: "H1 + H2 + P", points: pick(|r| r.h1 + r.h2 + r.p) },
        Series { label: "H1", points: pick(|r| r.h1) },
        Series { label: "H2", points: pick(|r| r.h2) },
        Series { label: "P", points: pick(|r| r.p) },
    ])
}

/// Log-log chart of the sweep aggregates against the viscosity.
pub fn write_sweep_plot(dir: &Path, rows: &[(f64, f64, f64, f64)]) -> HarnessResult<()> {
    fs::create_dir_all(dir)?;
    let chart = Chart { title: "rates", x_label: "epsilon", y_label: "value", x_scale: Scale::Log, y_scale: Scale::Log };
    write_plot(dir, "rates.svg", &chart, &[
        Series { label: "sup dist", points: rows.iter().map(|r| (r.0, r.1)).collect() },
        Series { label: "excess", points: rows.iter().map(|r| (r.0, r.2)).collect() },
        Series { label: "psi", points: rows.iter().map(|r| (r.0, r.3)).collect() },
    ])
}
