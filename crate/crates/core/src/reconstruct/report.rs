//! Report bundle of a reconstruction: versioned text summary, CSV tables and
//! an SVG scatter of one chart. Everything here is a function of the
//! reconstruction alone, so identical datasets give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Matrix2;

use super::{Chart, ReconstructedManifold};
use crate::error::{Error, Result};

pub const REPORT_MAGIC: &str = "geotime-report v1";

pub fn summary_text(rec: &ReconstructedManifold) -> String {
    let d = &rec.diagnostics;
    let n = rec.sources.len();
    let mut s = String::new();
    let _ = writeln!(s, "{REPORT_MAGIC}");
    let _ = writeln!(s, "sources={} sensors={}", n, rec.gamma.u.len());
    let _ = writeln!(s, "tol_grad={} tol_T={} h_src={} mean_sensor_spacing={}", d.tol_grad, d.tol_t, d.h_src, d.mean_spacing);
    let _ = writeln!(s, "\n[gamma]");
    let _ = writeln!(s, "gamma_sources={} recovered_length={}", d.gamma_sources, rec.gamma.arc.last().copied().unwrap_or(0.0));
    let _ = writeln!(s, "\n[gradients]");
    let _ = writeln!(s, "incomplete_rows={} smooth_fraction={:.6}", d.incomplete_rows, d.smooth_fraction);
    let _ = writeln!(s, "\n[sigma]");
    let _ = writeln!(
        s,
        "sets={} thin_sets={} undersampled_sets={}",
        rec.sigma_grid.len(),
        d.thin_sigma_sets,
        d.undersampled_sigma_sets
    );
    let _ = writeln!(s, "\n[boundary]");
    let _ = writeln!(s, "classified={} boundary={} interior={}", n, d.boundary_count, n - d.boundary_count);
    let _ = writeln!(s, "\n[charts]");
    let alpha = rec.sources.iter().filter(|r| matches!(r.chart, Ok(Chart::Alpha { .. }))).count();
    let beta = rec.sources.iter().filter(|r| matches!(r.chart, Ok(Chart::Beta { .. }))).count();
    let _ = writeln!(s, "alpha={} beta={} unavailable={}", alpha, beta, n - d.charted);
    for (name, count) in error_histogram(rec.sources.iter().filter_map(|r| r.chart.as_ref().err())) {
        let _ = writeln!(s, "  {name}: {count}");
    }
    let _ = writeln!(s, "\n[metric]");
    let attempted = rec.sources.iter().filter(|r| r.metric.is_some()).count();
    let _ = writeln!(s, "attempted={} fitted={}", attempted, d.metric_fitted);
    for (name, count) in error_histogram(rec.sources.iter().filter_map(|r| r.metric.as_ref()?.as_ref().err())) {
        let _ = writeln!(s, "  {name}: {count}");
    }
    let mut dev: Vec<f64> =
        rec.sources.iter().filter_map(|r| r.metric.as_ref()?.as_ref().ok()).map(|m| m.cosphere_dev).collect();
    if !dev.is_empty() {
        dev.sort_by(|a, b| a.total_cmp(b));
        let _ = writeln!(s, "cosphere_deviation_median={} max={}", dev[dev.len() / 2], dev[dev.len() - 1]);
    }
    let _ = writeln!(s, "\n[embedding]");
    let _ = writeln!(s, "min_sup_gap={}", d.min_embedding_gap);
    let _ = writeln!(s, "near_duplicate_pairs={}", d.near_duplicates.len());
    if !d.near_duplicates.is_empty() {
        let _ = writeln!(s, "data_degeneracy=near-duplicate rows detected");
        for (a, b, g) in d.near_duplicates.iter().take(20) {
            let _ = writeln!(s, "  rows {a} {b} gap {g}");
        }
    }
    s
}

fn error_histogram<'a>(errs: impl Iterator<Item = &'a crate::Error>) -> Vec<(String, usize)> {
    let mut h: std::collections::BTreeMap<String, usize> = Default::default();
    for e in errs {
        let name = format!("{e:?}");
        let name = name.split([' ', '(', '{']).next().unwrap_or("").to_string();
        *h.entry(name).or_default() += 1;
    }
    h.into_iter().collect()
}

pub fn boundary_csv(rec: &ReconstructedManifold) -> String {
    let mut s = String::from("source,boundary\n");
    for (i, r) in rec.sources.iter().enumerate() {
        let _ = writeln!(s, "{i},{}", r.boundary as u8);
    }
    s
}

pub fn charts_csv(rec: &ReconstructedManifold) -> String {
    let mut s = String::from("source,chart,base,c1,c2\n");
    for (i, r) in rec.sources.iter().enumerate() {
        match r.chart {
            Ok(Chart::Alpha { base, v, r }) => {
                let _ = writeln!(s, "{i},alpha,{base},{v},{r}");
            }
            Ok(Chart::Beta { base, eta, tau, .. }) => {
                let _ = writeln!(s, "{i},beta,{base},{eta},{tau}");
            }
            Err(_) => {
                let _ = writeln!(s, "{i},none,,,");
            }
        }
    }
    s
}

pub fn metric_csv(rec: &ReconstructedManifold) -> String {
    let mut s = String::from("source,base,g11,g12,g22,residual,condition,covectors,cosphere_dev\n");
    for (i, r) in rec.sources.iter().enumerate() {
        if let (Some(Ok(m)), Ok(c)) = (&r.metric, &r.chart) {
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{},{},{},{}",
                c.base(),
                m.g[(0, 0)],
                m.g[(0, 1)],
                m.g[(1, 1)],
                m.residual,
                m.condition,
                m.covectors,
                m.cosphere_dev
            );
        }
    }
    s
}

pub fn gamma_csv(rec: &ReconstructedManifold) -> String {
    let mut s = String::from("sensor,u,lambda,arc,gamma_row\n");
    let g = &rec.gamma;
    for j in 0..g.u.len() {
        let row = g.gamma_rows[j].map(|r| r.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{j},{},{},{},{row}", g.u[j], g.lambda[j], g.arc[j]);
    }
    s
}

/// Scatter of the most used base sensor's chart, interior in blue, boundary in red.
pub fn chart_svg(rec: &ReconstructedManifold) -> String {
    let mut uses = vec![0usize; rec.gamma.u.len()];
    for r in &rec.sources {
        if let Ok(c) = &r.chart {
            uses[c.base()] += 1;
        }
    }
    let base = (0..uses.len()).max_by_key(|&j| (uses[j], std::cmp::Reverse(j))).unwrap_or(0);
    let pts: Vec<(f64, f64, bool)> = rec
        .sources
        .iter()
        .filter_map(|r| match r.chart {
            Ok(Chart::Alpha { base: b, v, r: rr }) if b == base => Some((v, rr, false)),
            Ok(Chart::Beta { base: b, eta, r: rr, .. }) if b == base => Some((eta, rr, true)),
            _ => None,
        })
        .collect();
    let (w, h, pad) = (480.0, 480.0, 30.0);
    let r_max = pts.iter().map(|p| p.1).fold(1e-9, f64::max);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<title>alpha chart at sensor {base}: v horizontal, r vertical</title>"#);
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##);
    for (v, r, b) in pts {
        let x = pad + (v + 1.0) * 0.5 * (w - 2.0 * pad);
        let y = pad + r / r_max * (h - 2.0 * pad);
        let color = if b { "#c0392b" } else { "#2e86c1" };
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{color}"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_report(rec: &ReconstructedManifold, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.txt"), summary_text(rec))?;
    std::fs::write(dir.join("boundary.csv"), boundary_csv(rec))?;
    std::fs::write(dir.join("charts.csv"), charts_csv(rec))?;
    std::fs::write(dir.join("metric.csv"), metric_csv(rec))?;
    std::fs::write(dir.join("gamma.csv"), gamma_csv(rec))?;
    std::fs::write(dir.join("chart.svg"), chart_svg(rec))?;
    Ok(())
}

/// The tables of a written report, read back for verification.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub boundary: Vec<bool>,
    /// `(source, base, v, r, g)` for every α-charted source with a fitted metric.
    pub metrics: Vec<(usize, usize, f64, f64, Matrix2<f64>)>,
    /// Recovered arc length at each sensor.
    pub arc: Vec<f64>,
}

fn csv_rows<'a>(name: &str, text: &'a str, header: &str) -> Result<Vec<Vec<&'a str>>> {
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(Error::Format { offset: 0, msg: format!("{name}: expected header '{header}'") });
    }
    Ok(lines.filter(|l| !l.is_empty()).map(|l| l.split(',').collect()).collect())
}

fn field<T: std::str::FromStr>(name: &str, row: &[&str], k: usize) -> Result<T> {
    row.get(k)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format { offset: 0, msg: format!("{name}: bad field {k} in '{}'", row.join(",")) })
}

impl ReportBundle {
    pub fn read(dir: &Path) -> Result<Self> {
        let read = |f: &str| std::fs::read_to_string(dir.join(f));
        let text = read("report.txt")?;
        if text.lines().next() != Some(REPORT_MAGIC) {
            return Err(Error::Format { offset: 0, msg: format!("report.txt: expected '{REPORT_MAGIC}'") });
        }
        let mut boundary = Vec::new();
        for row in csv_rows("boundary.csv", &read("boundary.csv")?, "source,boundary")? {
            boundary.push(field::<u8>("boundary.csv", &row, 1)? == 1);
        }
        let charts = read("charts.csv")?;
        let mut alpha = std::collections::HashMap::new();
        for row in csv_rows("charts.csv", &charts, "source,chart,base,c1,c2")? {
            if row.get(1) == Some(&"alpha") {
                let i: usize = field("charts.csv", &row, 0)?;
                alpha.insert(i, (field::<f64>("charts.csv", &row, 3)?, field::<f64>("charts.csv", &row, 4)?));
            }
        }
        let mut metrics = Vec::new();
        let header = "source,base,g11,g12,g22,residual,condition,covectors,cosphere_dev";
        for row in csv_rows("metric.csv", &read("metric.csv")?, header)? {
            let i: usize = field("metric.csv", &row, 0)?;
            let Some(&(v, r)) = alpha.get(&i) else { continue };
            let (a, b, c): (f64, f64, f64) =
                (field("metric.csv", &row, 2)?, field("metric.csv", &row, 3)?, field("metric.csv", &row, 4)?);
            metrics.push((i, field("metric.csv", &row, 1)?, v, r, Matrix2::new(a, b, b, c)));
        }
        let mut arc = Vec::new();
        for row in csv_rows("gamma.csv", &read("gamma.csv")?, "sensor,u,lambda,arc,gamma_row")? {
            arc.push(field("gamma.csv", &row, 3)?);
        }
        Ok(Self { boundary, metrics, arc })
    }
}
