//! Experiment configuration files.
//!
//! ```text
//! geotime-config v1
//! # comment
//! preset = mild_bump
//! gamma = 0 0.3333333333333333
//! sources.h_src = 0.08
//! sensors = 48
//! seed = 1
//! ```
//!
//! Geometry comes either from `preset` or from explicit `metric`, `chart`,
//! `boundary` and `gamma` keys. `gamma` is given as perimeter fractions.
//! Polynomial tables (`metric.g11` etc.) are `;`-separated `a b c` triples
//! for the term `c·x^a·y^b`; Fourier tables are whitespace-separated lists.

use std::collections::BTreeMap;

use crate::data::{GenerateOptions, Oracle, SensorLayout, SensorPlan, SourcePlan};
use crate::distance::{EikonalOptions, FanOptions};
use crate::error::{Error, Result};
use crate::manifold::catalog::{Horseshoe, Preset};
use crate::manifold::{ChartRect, DomainSpec, FourierCurve, MetricKind, MetricSpec, Point, Poly2};

pub const CONFIG_MAGIC: &str = "geotime-config v1";

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub preset: Option<Preset>,
    pub metric: MetricSpec,
    pub domain: DomainSpec,
    pub sources: SourcePlan,
    pub sensors: SensorPlan,
    pub generate: GenerateOptions,
}

struct Entry {
    line: usize,
    value: String,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

struct Table {
    entries: BTreeMap<String, Entry>,
    used: std::cell::RefCell<Vec<String>>,
}

impl Table {
    fn get(&self, key: &str) -> Option<&Entry> {
        let e = self.entries.get(key);
        if e.is_some() {
            self.used.borrow_mut().push(key.to_string());
        }
        e
    }

    fn floats(&self, key: &str, n: Option<usize>) -> Result<Option<(usize, Vec<f64>)>> {
        let Some(e) = self.get(key) else { return Ok(None) };
        let v = parse_floats(e.line, &e.value)?;
        if let Some(n) = n {
            if v.len() != n {
                return Err(err(e.line, format!("{key} expects {n} numbers, got {}", v.len())));
            }
        }
        Ok(Some((e.line, v)))
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        Ok(self.floats(key, Some(1))?.map(|(_, v)| v[0]))
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.float(key)? {
            Some(x) if !(x > 0.0) => Err(err(self.entries[key].line, format!("{key} must be positive, got {x}"))),
            v => Ok(v),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        let Some(e) = self.get(key) else { return Ok(None) };
        e.value
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| err(e.line, format!("{key} expects a non-negative integer, got '{}'", e.value)))
    }

    fn point(&self, key: &str) -> Result<Option<Point>> {
        Ok(self.floats(key, Some(2))?.map(|(_, v)| Point::new(v[0], v[1])))
    }
}

fn parse_floats(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(line, format!("'{t}' is not a finite number")))
        })
        .collect()
}

fn parse_poly(line: usize, s: &str) -> Result<Poly2> {
    let mut terms = Vec::new();
    for chunk in s.split(';').filter(|c| !c.trim().is_empty()) {
        let t: Vec<&str> = chunk.split_whitespace().collect();
        if t.len() != 3 {
            return Err(err(line, format!("polynomial term '{}' must be 'a b c'", chunk.trim())));
        }
        let a = t[0].parse().map_err(|_| err(line, format!("bad exponent '{}'", t[0])))?;
        let b = t[1].parse().map_err(|_| err(line, format!("bad exponent '{}'", t[1])))?;
        let c = parse_floats(line, t[2])?[0];
        terms.push((a, b, c));
    }
    Ok(Poly2 { terms })
}

fn parse_points(line: usize, s: &str) -> Result<Vec<Point>> {
    s.split(';')
        .filter(|c| !c.trim().is_empty())
        .map(|c| {
            let v = parse_floats(line, c)?;
            if v.len() != 2 {
                return Err(err(line, format!("point '{}' must be 'x y'", c.trim())));
            }
            Ok(Point::new(v[0], v[1]))
        })
        .collect()
}

const KNOWN_KEYS: &[&str] = &[
    "preset",
    "metric",
    "metric.center",
    "metric.amplitude",
    "metric.width",
    "metric.curvature",
    "metric.g11",
    "metric.g12",
    "metric.g22",
    "chart",
    "boundary",
    "boundary.x_cos",
    "boundary.x_sin",
    "boundary.y_cos",
    "boundary.y_sin",
    "gamma",
    "sources.gamma",
    "sources.h_src",
    "sources.boundary",
    "sources.collar",
    "sources.collar_depth",
    "sources.lattice_min_depth",
    "sources.rotation",
    "sources.offset",
    "sources.ring_phase",
    "sources.extra",
    "sources.involute",
    "sensors",
    "sensors.layout",
    "sensors.max_spacing",
    "oracle",
    "oracle.h",
    "oracle.directions",
    "seed",
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == CONFIG_MAGIC => {}
            Some((_, l)) => return Err(err(1, format!("expected header '{CONFIG_MAGIC}', found '{}'", l.trim()))),
            None => return Err(err(1, "empty config")),
        }
        let mut entries = BTreeMap::new();
        for (i, raw) in lines {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let Some((k, v)) = l.split_once('=') else {
                return Err(err(line, format!("expected 'key = value', found '{l}'")));
            };
            let k = k.trim().to_string();
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(err(line, format!("unknown key '{k}'")));
            }
            if let Some(prev) = entries.get(&k) {
                let prev: &Entry = prev;
                return Err(err(line, format!("duplicate key '{k}' (first set on line {})", prev.line)));
            }
            entries.insert(k, Entry { line, value: v.trim().to_string() });
        }
        let t = Table { entries, used: Default::default() };
        Self::from_table(&t)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn from_table(t: &Table) -> Result<Self> {
        let preset = match t.get("preset") {
            Some(e) => Some(Preset::from_name(&e.value).map_err(|_| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                err(e.line, format!("unknown preset '{}' (known: {})", e.value, names.join(", ")))
            })?),
            None => None,
        };
        let gamma = t.floats("gamma", Some(2))?;
        let (metric, domain) = match preset {
            Some(p) => {
                for key in ["metric", "chart", "boundary"] {
                    if let Some(e) = t.get(key) {
                        return Err(err(e.line, format!("'{key}' conflicts with 'preset'")));
                    }
                }
                match gamma {
                    Some((line, g)) if p != Preset::Horseshoe => {
                        p.build_with_gamma((g[0], g[1])).map_err(|e| err(line, e.to_string()))?
                    }
                    Some((line, _)) => return Err(err(line, "the horseshoe measurement arc is fixed")),
                    None => p.build().map_err(|e| err(1, e.to_string()))?,
                }
            }
            None => explicit_geometry(t, gamma)?,
        };

        let mut sources = SourcePlan::default();
        if let Some(e) = t.get("sources.gamma") {
            if e.value != "true" {
                return Err(err(e.line, "sources on the measurement arc are required to recover its metric"));
            }
        }
        if let Some(h) = t.positive("sources.h_src")? {
            sources.h_src = h;
        }
        if let Some(n) = t.count("sources.boundary")? {
            sources.boundary_count = n;
        }
        if let Some(n) = t.count("sources.collar")? {
            sources.collar_count = n;
        }
        sources.collar_depth = t.positive("sources.collar_depth")?;
        sources.lattice_min_depth = t.positive("sources.lattice_min_depth")?;
        if let Some(r) = t.float("sources.rotation")? {
            sources.rotation = r;
        }
        if let Some(o) = t.point("sources.offset")? {
            sources.lattice_offset = o;
        }
        if let Some(r) = t.float("sources.ring_phase")? {
            sources.ring_phase = r;
        }
        if let Some(e) = t.get("sources.extra") {
            sources.extra = parse_points(e.line, &e.value)?;
        }
        if let Some(e) = t.get("sources.involute") {
            if preset != Some(Preset::Horseshoe) {
                return Err(err(e.line, "sources.involute needs preset = horseshoe"));
            }
            let n: usize = e.value.parse().map_err(|_| err(e.line, "sources.involute expects a count"))?;
            sources.extra.extend(Horseshoe::default().involute_set(n));
        }

        let mut sensors = SensorPlan::uniform(48);
        if let Some(n) = t.count("sensors")? {
            sensors.count = n;
        }
        if let Some(e) = t.get("sensors.layout") {
            let parts: Vec<&str> = e.value.split_whitespace().collect();
            sensors.layout = match parts.as_slice() {
                ["uniform"] => SensorLayout::Uniform,
                ["warped", a] => {
                    let a: f64 = a.parse().map_err(|_| err(e.line, format!("bad warp amplitude '{a}'")))?;
                    if !(a.abs() < 1.0) {
                        return Err(err(e.line, "warp amplitude must lie in (-1, 1)"));
                    }
                    SensorLayout::Warped(a)
                }
                _ => return Err(err(e.line, format!("sensors.layout must be 'uniform' or 'warped <a>', got '{}'", e.value))),
            };
        }
        sensors.max_spacing = t.positive("sensors.max_spacing")?;

        let mut generate = GenerateOptions::default();
        let oracle_line = t.get("oracle").map(|e| (e.line, e.value.clone()));
        generate.oracle = match oracle_line.as_ref().map(|(l, v)| (*l, v.as_str())) {
            None | Some((_, "shooting")) => {
                let mut fan = FanOptions::default();
                if let Some(n) = t.count("oracle.directions")? {
                    fan.directions = n;
                }
                Oracle::Shooting(fan)
            }
            Some((_, "eikonal")) => {
                let mut eo = EikonalOptions::default();
                if let Some(h) = t.positive("oracle.h")? {
                    eo.h = h;
                }
                Oracle::Eikonal(eo)
            }
            Some((l, v)) => return Err(err(l, format!("oracle must be 'shooting' or 'eikonal', got '{v}'"))),
        };
        if let Some(e) = t.get("seed") {
            generate.seed = e.value.parse().map_err(|_| err(e.line, format!("seed must be an unsigned integer, got '{}'", e.value)))?;
        }
        for (k, e) in &t.entries {
            if !t.used.borrow().contains(k) {
                return Err(err(e.line, format!("key '{k}' does not apply to this configuration")));
            }
        }
        Ok(Self { preset, metric, domain, sources, sensors, generate })
    }
}

fn explicit_geometry(t: &Table, gamma: Option<(usize, Vec<f64>)>) -> Result<(MetricSpec, DomainSpec)> {
    let chart = match t.floats("chart", Some(4))? {
        Some((line, c)) => {
            if !(c[0] < c[1] && c[2] < c[3]) {
                return Err(err(line, "chart must be 'x_min x_max y_min y_max' with min < max"));
            }
            ChartRect::new(c[0], c[1], c[2], c[3])
        }
        None => return Err(err(1, "missing 'chart' (or 'preset')")),
    };
    let Some(me) = t.get("metric") else { return Err(err(1, "missing 'metric' (or 'preset')")) };
    let need = |key: &str| -> Result<f64> {
        t.float(key)?.ok_or_else(|| err(me.line, format!("metric '{}' needs '{key}'", me.value)))
    };
    let kind = match me.value.as_str() {
        "euclidean" => MetricKind::Euclidean,
        "conformal_bump" => MetricKind::ConformalBump {
            center: t.point("metric.center")?.ok_or_else(|| err(me.line, "conformal_bump needs 'metric.center'"))?,
            amplitude: need("metric.amplitude")?,
            width: need("metric.width")?,
        },
        "constant_curvature" => MetricKind::ConstantCurvature { curvature: need("metric.curvature")? },
        "custom_spd" => {
            let poly = |key: &str| -> Result<Poly2> {
                let e = t.get(key).ok_or_else(|| err(me.line, format!("custom_spd needs '{key}'")))?;
                parse_poly(e.line, &e.value)
            };
            MetricKind::CustomSpd { g11: poly("metric.g11")?, g12: poly("metric.g12")?, g22: poly("metric.g22")? }
        }
        other => return Err(err(me.line, format!("unknown metric '{other}'"))),
    };
    let metric = MetricSpec::new(kind, chart);

    let Some(be) = t.get("boundary") else { return Err(err(1, "missing 'boundary' (or 'preset')")) };
    let parts: Vec<&str> = be.value.split_whitespace().collect();
    let nums = |xs: &[&str]| parse_floats(be.line, &xs.join(" "));
    let curve = match parts.first().copied() {
        Some("circle") if parts.len() == 4 => {
            let v = nums(&parts[1..])?;
            if !(v[2] > 0.0) {
                return Err(err(be.line, "circle radius must be positive"));
            }
            FourierCurve::circle(Point::new(v[0], v[1]), v[2])
        }
        Some("ellipse") if parts.len() == 5 => {
            let v = nums(&parts[1..])?;
            if !(v[2] > 0.0 && v[3] > 0.0) {
                return Err(err(be.line, "ellipse semi-axes must be positive"));
            }
            FourierCurve::ellipse(Point::new(v[0], v[1]), v[2], v[3])
        }
        Some("fourier") if parts.len() == 1 => {
            let table = |key: &str| -> Result<Vec<f64>> {
                Ok(t.floats(key, None)?.map(|x| x.1).unwrap_or_default())
            };
            let c = FourierCurve {
                x_cos: table("boundary.x_cos")?,
                x_sin: table("boundary.x_sin")?,
                y_cos: table("boundary.y_cos")?,
                y_sin: table("boundary.y_sin")?,
            };
            if c.modes() == 0 {
                return Err(err(be.line, "fourier boundary needs coefficient tables"));
            }
            c
        }
        _ => {
            return Err(err(
                be.line,
                format!("boundary must be 'circle cx cy r', 'ellipse cx cy a b' or 'fourier', got '{}'", be.value),
            ))
        }
    };
    let (gline, g) = gamma.unwrap_or((be.line, vec![0.0, 1.0 / 3.0]));
    let domain = DomainSpec::with_gamma_fraction(curve, (g[0], g[1])).map_err(|e| err(gline, e.to_string()))?;
    if let Some(p) = domain.polyline().iter().find(|p| !chart.contains(p)) {
        return Err(err(be.line, format!("boundary leaves the chart near ({:.3}, {:.3})", p.x, p.y)));
    }
    Ok((metric, domain))
}
