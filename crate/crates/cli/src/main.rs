//! `geotime` command line: simulate travel time datasets, reconstruct from
//! them, and check reconstructions and geometric claims against truth.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::seq::index::sample;
use rand::SeedableRng;
use sha2::{Digest, Sha256};

use geotime::config::ExperimentConfig;
use geotime::data::io::{read_dataset, read_truth, write_dataset, write_truth};
use geotime::data::{generate_dataset, Oracle, TravelTimeDataset, TruthSidecar};
use geotime::geodesic::GeodesicSolver;
use geotime::manifold::frame::DEFAULT_MARGIN_FLOOR;
use geotime::manifold::{check_strict_convexity, Point};
use geotime::reconstruct::report::{write_report, ReportBundle};
use geotime::reconstruct::{reconstruct_all, ReconstructOptions};
use geotime::verify::{
    self, boundary_confusion, bundle_metric_errors, counterexample_horseshoe, cutlocus_report, embedding_check,
    embedding_truth_check, CollapseOptions, CutLocusOptions,
};
use geotime::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Sampled pairs for the triangle check when no closed-form distance exists.
const SHOOTING_PAIRS: usize = 2000;

#[derive(Parser)]
#[command(name = "geotime", version, about = "Travel time simulation and reconstruction on Riemannian surfaces")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a travel time dataset and its truth sidecar from a config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        h_src: Option<f64>,
        #[arg(long)]
        sensors: Option<usize>,
        /// Simulate even if the boundary fails the strict convexity check.
        #[arg(long)]
        allow_nonconvex: bool,
    },
    /// Reconstruct boundary, charts and metric from a dataset.
    Reconstruct {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Never read the truth sidecar.
        #[arg(long)]
        blind: bool,
        /// Declared source spacing.
        #[arg(long)]
        h_src: Option<f64>,
    },
    /// Score a written reconstruction against the truth sidecar.
    Verify {
        recon: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample and classify the cut locus of one point.
    Cutlocus {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true)]
        point: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 512)]
        directions: usize,
    },
    /// Build the horseshoe example where Γ data fails to separate points.
    Counterexample {
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure with the exit code it maps to.
enum Failure {
    Config(String),
    Data(String),
    Run(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Run(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Data(m) | Failure::Run(m) => m,
        }
    }
}

fn config_err(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn data_err(e: Error) -> Failure {
    match e {
        Error::Config { .. } => Failure::Config(e.to_string()),
        _ => Failure::Data(e.to_string()),
    }
}

fn run_err(e: Error) -> Failure {
    match e {
        Error::Config { .. } | Error::InvalidArgument(_) => Failure::Config(e.to_string()),
        Error::Format { .. } => Failure::Data(e.to_string()),
        _ => Failure::Run(e.to_string()),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Run(format!("cannot write {}: {e}", path.display()))
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn load_config(path: &Path) -> Result<(ExperimentConfig, String), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::Config(format!("{} is not UTF-8", path.display())))?;
    let cfg = ExperimentConfig::parse(&text).map_err(config_err)?;
    Ok((cfg, hex_sha256(&bytes)))
}

fn manifest_header(command: &str) -> String {
    let mut s = String::from("geotime-manifest v1\n");
    let _ = writeln!(s, "command={command}");
    let _ = writeln!(s, "version={VERSION}");
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Simulate { config, out, seed, h_src, sensors, allow_nonconvex } => {
            simulate(&config, &out, seed, h_src, sensors, allow_nonconvex)
        }
        Command::Reconstruct { dataset, out, blind, h_src } => reconstruct(&dataset, &out, blind, h_src),
        Command::Verify { recon, data, config, out } => verify_cmd(&recon, &data, &config, out.as_deref()),
        Command::Cutlocus { config, point, out, directions } => cutlocus(&config, &point, &out, directions),
        Command::Counterexample { out } => counterexample(&out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn simulate(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    h_src: Option<f64>,
    sensors: Option<usize>,
    allow_nonconvex: bool,
) -> Result<(), Failure> {
    let (mut cfg, hash) = load_config(config)?;
    if let Some(s) = seed {
        cfg.generate.seed = s;
    }
    if let Some(h) = h_src {
        if !(h > 0.0) {
            return Err(Failure::Config(format!("--h-src must be positive, got {h}")));
        }
        cfg.sources.h_src = h;
    }
    if let Some(m) = sensors {
        cfg.sensors.count = m;
    }
    let convexity = check_strict_convexity(&cfg.domain, &cfg.metric, 4096, DEFAULT_MARGIN_FLOOR).map_err(run_err)?;
    if !convexity.pass {
        if !allow_nonconvex {
            return Err(Failure::Config(format!(
                "boundary is not strictly convex: convexity margin {:.6} at arc parameter {:.6}; pass --allow-nonconvex to simulate anyway",
                convexity.margin(),
                convexity.at_s
            )));
        }
        if matches!(cfg.generate.oracle, Oracle::Shooting(_)) {
            return Err(Failure::Config(
                "non-convex domains need 'oracle = eikonal'; geodesic shooting assumes interior minimizers".into(),
            ));
        }
    }

    let g = generate_dataset(&cfg.metric, &cfg.domain, &cfg.sources, &cfg.sensors, &cfg.generate).map_err(run_err)?;
    create_dir(out)?;
    let path = out.join("dataset.bin");
    write_dataset(&g.dataset, &path).map_err(run_err)?;
    write_truth(&g.truth, &path).map_err(run_err)?;

    let oracle = match cfg.generate.oracle {
        Oracle::Shooting(f) => format!("shooting directions={} root_tol={:e} horizon={}", f.directions, f.root_tol, f.horizon),
        Oracle::Eikonal(e) => format!("eikonal h={} second_order={} init_cells={}", e.h, e.second_order, e.init_cells),
    };
    let t = cfg.generate.tolerances;
    let mut m = manifest_header("simulate");
    let _ = writeln!(m, "config_sha256={hash}");
    let _ = writeln!(m, "seed={}", cfg.generate.seed);
    let _ = writeln!(m, "h_src={}", cfg.sources.h_src);
    let _ = writeln!(m, "sources={} sensors={}", g.dataset.n, g.dataset.m);
    let _ = writeln!(m, "oracle={oracle}");
    let _ = writeln!(m, "integrator abs={:e} rel={:e} event={:e} h_max={}", t.abs, t.rel, t.event, t.h_max);
    let _ = writeln!(m, "convexity_pass={} convexity_margin={}", convexity.pass, convexity.margin());
    let _ = writeln!(m, "failed_rows={}", g.failed_rows.len());
    write(&out.join("manifest.txt"), &m)?;

    println!("N={} m={}", g.dataset.n, g.dataset.m);
    println!("oracle: {oracle}");
    println!("integrator: abs={:e} rel={:e}", t.abs, t.rel);
    println!("convexity margin: {:.6} ({})", convexity.margin(), if convexity.pass { "pass" } else { "fail" });
    if !g.failed_rows.is_empty() {
        println!("rows with oracle failures: {}", g.failed_rows.len());
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn reconstruct(dataset: &Path, out: &Path, blind: bool, h_src: Option<f64>) -> Result<(), Failure> {
    let bytes = fs::read(dataset).map_err(|e| Failure::Data(format!("cannot read {}: {e}", dataset.display())))?;
    let ds = geotime::data::io::decode_dataset(&bytes).map_err(data_err)?;
    let mut opts = ReconstructOptions::default();
    if let Some(h) = h_src {
        if !(h > 0.0) {
            return Err(Failure::Config(format!("--h-src must be positive, got {h}")));
        }
        opts.h_src = h;
    }
    let rec = reconstruct_all(&ds, &opts).map_err(run_err)?;
    write_report(&rec, out).map_err(run_err)?;

    let mut m = manifest_header("reconstruct");
    let _ = writeln!(m, "dataset_sha256={}", hex_sha256(&bytes));
    let _ = writeln!(m, "h_src={} tol_grad={} tol_T={}", opts.h_src, rec.diagnostics.tol_grad, rec.diagnostics.tol_t);
    let _ = writeln!(m, "kappa_spike={} k_cont={} kappa_cont={}", opts.kappa_spike, opts.k_cont, opts.kappa_cont);
    let _ = writeln!(m, "directions={} v_max={} chart_neighbors={}", opts.directions, opts.v_max, opts.chart_neighbors);
    write(&out.join("manifest.txt"), &m)?;

    let d = &rec.diagnostics;
    println!("sources={} sensors={}", ds.n, ds.m);
    println!("gamma sources={} recovered arc length={:.6}", d.gamma_sources, rec.gamma.arc.last().copied().unwrap_or(0.0));
    println!("boundary={} interior={}", d.boundary_count, ds.n - d.boundary_count);
    println!("charted={} metric fitted={}", d.charted, d.metric_fitted);
    if !d.near_duplicates.is_empty() {
        println!("near-duplicate rows: {}", d.near_duplicates.len());
    }

    if !blind {
        if let Some(truth) = read_truth(dataset, false).map_err(data_err)? {
            let text = truth_check(&truth, &rec.boundary_flags(), opts.h_src);
            write(&out.join("truth_check.txt"), &text)?;
            print!("{text}");
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

/// Boundary scoring that needs only the sidecar. The margin is three default
/// collar depths of the declared spacing.
fn truth_check(truth: &TruthSidecar, flags: &[bool], h_src: f64) -> String {
    let margin = 6.0 * h_src;
    let (c, inside) = boundary_confusion(flags, truth, margin);
    let (p, r) = c.precision_recall_all(inside);
    let mut s = String::from("geotime-truth-check v1\n");
    let _ = writeln!(s, "decision_margin={margin}");
    let _ = writeln!(
        s,
        "boundary true={} interior true={} false_boundary={} false_interior={} (away from margin)",
        c.true_boundary, c.true_interior, c.false_boundary, c.false_interior
    );
    let _ = writeln!(s, "margin agree={} disagree={}", c.margin_true, c.margin_false);
    let _ = writeln!(s, "precision_all={p:.4} recall_all={r:.4}");
    s
}

fn read_data_pair(data: &Path) -> Result<(TravelTimeDataset, TruthSidecar), Failure> {
    let ds = read_dataset(data).map_err(data_err)?;
    let truth = read_truth(data, false)
        .map_err(data_err)?
        .ok_or_else(|| Failure::Data(format!("no truth sidecar next to {}", data.display())))?;
    if truth.sources.len() != ds.n || truth.sensor_params.len() != ds.m {
        return Err(Failure::Data("truth sidecar does not match the dataset shape".into()));
    }
    Ok((ds, truth))
}

fn verify_cmd(recon: &Path, data: &Path, config: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let (cfg, _) = load_config(config)?;
    let bundle = ReportBundle::read(recon).map_err(data_err)?;
    let (ds, truth) = read_data_pair(data)?;
    if bundle.boundary.len() != ds.n || bundle.arc.len() != ds.m {
        return Err(Failure::Data("reconstruction does not match the dataset shape".into()));
    }
    let solver = GeodesicSolver::new(&cfg.metric, &cfg.domain);

    let (errs, missing) = bundle_metric_errors(&bundle, &truth, &solver);
    let margin = verify::decision_margin(&cfg.sources);
    let (c, inside) = boundary_confusion(&bundle.boundary, &truth, margin);
    let (precision, recall) = c.precision_recall_all(inside);
    let arc_err = verify::gamma_arc_error(&bundle.arc, &truth, &solver).map_err(run_err)?;
    let emb = embedding_check(&ds, 0.0);

    let dist = verify::truth::truth_distance(&solver);
    let closed = verify::truth::closed_form_distance(&cfg.metric).is_some();
    let sampled: Vec<(usize, usize)>;
    let pairs = if closed || ds.n < 2 {
        None
    } else {
        let total = ds.n * (ds.n - 1) / 2;
        let mut rng = rand::rngs::StdRng::seed_from_u64(0);
        sampled = sample(&mut rng, total, SHOOTING_PAIRS.min(total)).into_iter().map(|k| pair_at(k, ds.n)).collect();
        Some(sampled.as_slice())
    };
    let tri = embedding_truth_check(&ds, &truth, &dist, pairs, 1e-6);

    let mut s = String::from("geotime-verify v1\n");
    let _ = writeln!(s, "\n[metric]");
    let _ = writeln!(s, "fitted_interior={} missing_interior={}", errs.len(), missing);
    let sm = verify::summarize(errs.iter().map(|e| e.1), 0.02);
    let _ = writeln!(s, "relative_frobenius median={:.6} p90={:.6}", sm.median, sm.p90);
    for tol in [0.02, 0.05, 0.10] {
        let within = verify::summarize(errs.iter().map(|e| e.1), tol).within;
        let _ = writeln!(s, "within_{:.0}pct={within:.4}", tol * 100.0);
    }
    let _ = writeln!(s, "\n[boundary]");
    let _ = writeln!(s, "decision_margin={margin}");
    let _ = writeln!(
        s,
        "true_boundary={} true_interior={} false_boundary={} false_interior={}",
        c.true_boundary, c.true_interior, c.false_boundary, c.false_interior
    );
    let _ = writeln!(s, "margin_agree={} margin_disagree={}", c.margin_true, c.margin_false);
    let _ = writeln!(s, "precision_all={precision:.4} recall_all={recall:.4}");
    let _ = writeln!(s, "\n[gamma]");
    let _ = writeln!(s, "max_relative_arc_error={arc_err:e}");
    let _ = writeln!(s, "\n[embedding]");
    let _ = writeln!(s, "rows={} min_gap={} duplicates={}", emb.rows, emb.min_gap, emb.duplicates.len());
    let _ = writeln!(
        s,
        "triangle pairs={} skipped={} violations={} worst_excess={:e} distance={}",
        tri.pairs,
        tri.skipped,
        tri.violations,
        tri.worst_excess,
        if closed { "closed_form" } else { "shooting" }
    );
    print!("{s}");
    if let Some(dir) = out {
        create_dir(dir)?;
        write(&dir.join("verify.txt"), &s)?;
        let mut csv = String::from("source,relative_error\n");
        for (i, e) in &errs {
            let _ = writeln!(csv, "{i},{e}");
        }
        write(&dir.join("metric_errors.csv"), &csv)?;
    }
    Ok(())
}

/// The `k`-th pair `(a, b)`, `a < b`, in row-major order over `n` items.
fn pair_at(mut k: usize, n: usize) -> (usize, usize) {
    let mut a = 0;
    while k >= n - 1 - a {
        k -= n - 1 - a;
        a += 1;
    }
    (a, a + 1 + k)
}

fn cutlocus(config: &Path, point: &[f64], out: &Path, directions: usize) -> Result<(), Failure> {
    let (cfg, hash) = load_config(config)?;
    let p = Point::new(point[0], point[1]);
    if !cfg.domain.contains(&p) {
        return Err(Failure::Config(format!("point ({}, {}) is outside the domain", p.x, p.y)));
    }
    let opts = CutLocusOptions { directions, ..Default::default() };
    let rep = cutlocus_report(&cfg.metric, &cfg.domain, &p, &opts).map_err(run_err)?;
    create_dir(out)?;
    let text = rep.summary_text();
    write(&out.join("report.txt"), &text)?;
    write(&out.join("samples.csv"), rep.samples_csv())?;
    write(&out.join("cutlocus.svg"), rep.svg(&cfg.domain))?;
    let mut m = manifest_header("cutlocus");
    let _ = writeln!(m, "config_sha256={hash}");
    let _ = writeln!(m, "point={} {}", p.x, p.y);
    let _ = writeln!(m, "directions={directions}");
    write(&out.join("manifest.txt"), &m)?;
    print!("{text}");
    Ok(())
}

fn counterexample(out: &Path) -> Result<(), Failure> {
    let opts = CollapseOptions::default();
    let rep = counterexample_horseshoe(&opts).map_err(run_err)?;
    let (_, domain) = geotime::manifold::catalog::Preset::Horseshoe.build().map_err(run_err)?;
    create_dir(out)?;
    let text = rep.summary_text();
    write(&out.join("collapse.txt"), &text)?;
    write(&out.join("points.csv"), rep.points_csv())?;
    write(&out.join("collapse.svg"), rep.svg(&domain))?;
    let mut m = manifest_header("counterexample");
    let _ = writeln!(m, "involute_count={} gamma_sensors={} h={}", opts.involute_count, opts.gamma_sensors, opts.h);
    write(&out.join("manifest.txt"), &m)?;
    print!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_enumeration_is_row_major() {
        let n = 5;
        let all: Vec<_> = (0..n * (n - 1) / 2).map(|k| pair_at(k, n)).collect();
        let want: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        assert_eq!(all, want);
    }

    #[test]
    fn hash_is_lowercase_hex() {
        assert_eq!(hex_sha256(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
