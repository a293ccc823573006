use std::sync::OnceLock;

use geotime::config::ExperimentConfig;
use geotime::data::io::{read_dataset, read_truth, write_dataset, write_truth};
use geotime::data::{generate_dataset, Generated};
use geotime::geodesic::GeodesicSolver;
use geotime::reconstruct::report::{write_report, ReportBundle};
use geotime::reconstruct::{reconstruct_all, Chart, ReconstructOptions};
use geotime::verify::{self, boundary_confusion, bundle_metric_errors, metric_errors};
use geotime::Error;

const CONFIG: &str = "geotime-config v1\npreset = disk\nsources.h_src = 0.16\nsensors = 32\nseed = 4\n";

fn coarse() -> &'static (ExperimentConfig, Generated) {
    static F: OnceLock<(ExperimentConfig, Generated)> = OnceLock::new();
    F.get_or_init(|| {
        let c = ExperimentConfig::parse(CONFIG).unwrap();
        let g = generate_dataset(&c.metric, &c.domain, &c.sources, &c.sensors, &c.generate).unwrap();
        (c, g)
    })
}

fn options() -> ReconstructOptions {
    ReconstructOptions { h_src: 0.16, ..Default::default() }
}

#[test]
fn coarse_disk_reconstructs_consistently() {
    let (cfg, g) = coarse();
    let rec = reconstruct_all(&g.dataset, &options()).unwrap();
    let margin = verify::decision_margin(&cfg.sources);
    let (c, _) = boundary_confusion(&rec.boundary_flags(), &g.truth, margin);
    assert_eq!(c.away_errors(), 0, "{c:?}");
    for (s, t) in rec.sources.iter().zip(&g.truth.sources) {
        match s.chart {
            Ok(Chart::Alpha { .. }) => assert!(!s.boundary),
            Ok(Chart::Beta { .. }) => assert!(s.boundary),
            Err(_) => {}
        }
        if t.kind.on_boundary() {
            assert!(s.metric.is_none());
        }
    }
    let solver = GeodesicSolver::new(&cfg.metric, &cfg.domain);
    let arc = verify::gamma_arc_error(&rec.gamma.arc, &g.truth, &solver).unwrap();
    assert!(arc < 1e-3, "arc error {arc}");
    let errs: Vec<f64> = metric_errors(&rec, &g.truth, &solver).into_iter().flatten().collect();
    let s = verify::summarize(errs, 0.05);
    assert!(s.median < 0.05, "{s:?}");
}

#[test]
fn reconstruction_is_deterministic_and_round_trips() {
    let (cfg, g) = coarse();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.bin");
    write_dataset(&g.dataset, &path).unwrap();
    write_truth(&g.truth, &path).unwrap();
    let ds = read_dataset(&path).unwrap();
    assert_eq!(ds, g.dataset);
    assert!(read_truth(&path, true).unwrap().is_none());
    let truth = read_truth(&path, false).unwrap().unwrap();

    let a = reconstruct_all(&ds, &options()).unwrap();
    let b = reconstruct_all(&ds, &options()).unwrap();
    write_report(&a, &dir.path().join("a")).unwrap();
    write_report(&b, &dir.path().join("b")).unwrap();
    for f in ["report.txt", "boundary.csv", "charts.csv", "metric.csv", "gamma.csv", "chart.svg"] {
        let x = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }

    let bundle = ReportBundle::read(&dir.path().join("a")).unwrap();
    assert_eq!(bundle.boundary, a.boundary_flags());
    let solver = GeodesicSolver::new(&cfg.metric, &cfg.domain);
    let (from_disk, missing) = bundle_metric_errors(&bundle, &truth, &solver);
    let direct: Vec<f64> = metric_errors(&a, &truth, &solver).into_iter().flatten().filter(|e| e.is_finite()).collect();
    assert_eq!(from_disk.len(), direct.len());
    assert_eq!(missing + from_disk.len(), truth.sources.iter().filter(|t| !t.kind.on_boundary()).count());
}

#[test]
fn corrupted_report_is_a_format_error() {
    let (_, g) = coarse();
    let dir = tempfile::tempdir().unwrap();
    let rec = reconstruct_all(&g.dataset, &options()).unwrap();
    write_report(&rec, dir.path()).unwrap();
    std::fs::write(dir.path().join("metric.csv"), "source,oops\n").unwrap();
    assert!(matches!(ReportBundle::read(dir.path()), Err(Error::Format { .. })));
}

#[test]
fn too_few_gamma_sources_is_reported() {
    let (_, g) = coarse();
    let rows: Vec<usize> = (0..g.dataset.n).filter(|&i| !g.truth.sources[i].kind.on_boundary()).collect();
    let times: Vec<f64> = rows.iter().flat_map(|&i| g.dataset.row(i).to_vec()).collect();
    let ds = geotime::data::TravelTimeDataset::new(g.dataset.u.clone(), times).unwrap();
    let err = reconstruct_all(&ds, &options()).unwrap_err();
    assert!(matches!(err, Error::TooFewGammaSources { .. }), "{err}");
}
