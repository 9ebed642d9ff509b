//! Experiment configuration: a flat `key = value` text format with dotted
//! section names and `#` comments.
//!
//! Parsing is two-phase: the raw text becomes a key/value map, then typed
//! extraction collects *every* problem (unknown keys, missing keys, bad
//! values, cross-field contradictions) before reporting, so a user fixes a
//! config in one round trip. Serialization emits a canonical resolved form
//! (defaults filled in, fixed key order, shortest-round-trip floats), and
//! `parse(serialize(parse(text)))` equals `parse(text)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Experiment kind selected by `tier`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Kinetic,
    Closure,
    Vortex,
    Validate,
    SpecfunTable,
    MaxslopeDemo,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Kinetic => "kinetic",
            Tier::Closure => "closure",
            Tier::Vortex => "vortex",
            Tier::Validate => "validate",
            Tier::SpecfunTable => "specfun-table",
            Tier::MaxslopeDemo => "maxslope-demo",
        }
    }

    /// Whether this tier runs a field solver on a node grid.
    pub fn is_field_tier(self) -> bool {
        matches!(self, Tier::Kinetic | Tier::Closure)
    }
}

/// Node grid specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

/// Dirichlet boundary data for the order-parameter phase.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    /// Constant director angle; the order-parameter phase is twice this.
    UniformAngle(f64),
    /// Phase winding `degree` around the boundary; with anchors the phase is
    /// `sum_k d_k arg(z - a_k)` and the anchor degrees must sum to `degree`.
    Winding { degree: i32, anchors: Vec<(f64, f64, i32)> },
    /// Explicit phase samples, one per boundary node in path order.
    Sampled(PathBuf),
}

impl BoundarySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            BoundarySpec::UniformAngle(_) => "uniform_angle",
            BoundarySpec::Winding { .. } => "winding",
            BoundarySpec::Sampled(_) => "sampled",
        }
    }

    /// Winding of the boundary phase, when it is known without reading files.
    pub fn known_winding(&self) -> Option<i32> {
        match self {
            BoundarySpec::UniformAngle(_) => Some(0),
            BoundarySpec::Winding { degree, .. } => Some(*degree),
            BoundarySpec::Sampled(_) => None,
        }
    }
}

/// Initial condition of a field or vortex run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// Uniform nematic equilibrium matching a uniform boundary.
    Equilibrium,
    /// Zero order parameter everywhere.
    Isotropic,
    /// Vortices as `(x, y, degree)` triples.
    Multivortex(Vec<(f64, f64, i32)>),
    /// Binary field snapshot to resume from.
    Snapshot(PathBuf),
}

impl InitialSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialSpec::Equilibrium => "equilibrium",
            InitialSpec::Isotropic => "isotropic",
            InitialSpec::Multivortex(_) => "multivortex",
            InitialSpec::Snapshot(_) => "snapshot",
        }
    }
}

/// Time-stepping parameters; `rescaled` selects the slow clock (rates divided
/// by `epsilon^2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
    pub rescaled: bool,
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub tier: Tier,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub grid: Option<GridSpec>,
    pub boundary: Option<BoundarySpec>,
    pub initial: Option<InitialSpec>,
    pub time: Option<TimeSpec>,
    /// Snapshot cadence in steps (0 = only first and last states).
    pub output_every: usize,
    /// Diagnostics cadence in steps.
    pub diagnostics_every: usize,
    /// Highest retained hierarchy mode (tier `kinetic` and `validate`).
    pub k_max: u32,
    /// Hierarchy truncation: `zero` or `equilibrium`.
    pub truncation_equilibrium: bool,
    /// Tier-2 flow: `maxent` or `ldg`.
    pub flow_maxent: bool,
    /// Boundary polygon vertex count for tier-3.
    pub m_b: usize,
    /// Seed for every randomized sub-experiment.
    pub seed: u64,
}

const KNOWN_KEYS: &[&str] = &[
    "tier",
    "params.gamma",
    "params.epsilon",
    "grid.nx",
    "grid.ny",
    "grid.lx",
    "grid.ly",
    "boundary.kind",
    "boundary.angle",
    "boundary.degree",
    "boundary.anchors",
    "boundary.file",
    "initial.kind",
    "initial.vortices",
    "initial.file",
    "time.dt",
    "time.t_end",
    "time.rescaled",
    "output.every",
    "output.diagnostics_every",
    "kinetic.k_max",
    "kinetic.truncation",
    "closure.flow",
    "vortex.m_b",
    "seed",
];

/// Collects problems; every entry names the offending key.
struct Problems(Vec<String>);

impl Problems {
    fn push(&mut self, key: &str, what: impl AsRef<str>) {
        self.0.push(format!("{key}: {}", what.as_ref()));
    }
}

fn parse_lines(text: &str) -> Result<BTreeMap<String, String>, Vec<String>> {
    let mut map = BTreeMap::new();
    let mut errors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("line {}: expected `key = value`, got `{line}`", lineno + 1));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), value).is_some() {
            errors.push(format!("{key}: duplicate assignment (line {})", lineno + 1));
        }
    }
    if errors.is_empty() {
        Ok(map)
    } else {
        Err(errors)
    }
}

fn take_f64(map: &BTreeMap<String, String>, key: &str, problems: &mut Problems) -> Option<f64> {
    let raw = map.get(key)?;
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => {
            problems.push(key, format!("invalid number `{raw}`"));
            None
        }
    }
}

fn take_int<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
    problems: &mut Problems,
) -> Option<T> {
    let raw = map.get(key)?;
    match raw.parse::<T>() {
        Ok(v) => Some(v),
        Err(_) => {
            problems.push(key, format!("invalid integer `{raw}`"));
            None
        }
    }
}

fn take_bool(map: &BTreeMap<String, String>, key: &str, problems: &mut Problems) -> Option<bool> {
    let raw = map.get(key)?;
    match raw.as_str() {
        "true" => Some(true),
        "false" => Some(false),
        other => {
            problems.push(key, format!("expected true or false, got `{other}`"));
            None
        }
    }
}

/// Parse `x,y,d; x,y,d; ...` triples.
fn parse_triples(raw: &str, key: &str, problems: &mut Problems) -> Option<Vec<(f64, f64, i32)>> {
    let mut out = Vec::new();
    for (idx, chunk) in raw.split(';').enumerate() {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        let parts: Vec<&str> = chunk.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            problems.push(key, format!("entry {} (`{chunk}`) is not `x,y,degree`", idx + 1));
            return None;
        }
        let x = parts[0].parse::<f64>();
        let y = parts[1].parse::<f64>();
        let d = parts[2].parse::<i32>();
        match (x, y, d) {
            (Ok(x), Ok(y), Ok(d)) => out.push((x, y, d)),
            _ => {
                problems.push(key, format!("entry {} (`{chunk}`) has a malformed component", idx + 1));
                return None;
            }
        }
    }
    Some(out)
}

fn fmt_triples(list: &[(f64, f64, i32)]) -> String {
    list.iter()
        .map(|(x, y, d)| format!("{x},{y},{d}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parse a configuration, reporting **all** problems at once. File existence
/// for referenced snapshot/boundary files is part of validation.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<String>> {
    let map = parse_lines(text)?;
    let mut problems = Problems(Vec::new());

    for key in map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            problems.push(key, "unknown key");
        }
    }

    let tier = match map.get("tier").map(String::as_str) {
        Some("kinetic") => Some(Tier::Kinetic),
        Some("closure") => Some(Tier::Closure),
        Some("vortex") => Some(Tier::Vortex),
        Some("validate") => Some(Tier::Validate),
        Some("specfun-table") => Some(Tier::SpecfunTable),
        Some("maxslope-demo") => Some(Tier::MaxslopeDemo),
        Some(other) => {
            problems.push(
                "tier",
                format!(
                    "unknown tier `{other}` (expected kinetic, closure, vortex, validate, \
                     specfun-table, or maxslope-demo)"
                ),
            );
            None
        }
        None => {
            problems.push("tier", "missing (required)");
            None
        }
    };

    let gamma = take_f64(&map, "params.gamma", &mut problems);
    if let Some(g) = gamma {
        if g <= 0.0 {
            problems.push("params.gamma", format!("must be positive, got {g}"));
        }
    }
    let epsilon = take_f64(&map, "params.epsilon", &mut problems);
    if let Some(e) = epsilon {
        if !(e > 0.0 && e < 1.0) {
            problems.push("params.epsilon", format!("must lie in (0, 1), got {e}"));
        }
    }

    let grid = {
        let nx = take_int::<usize>(&map, "grid.nx", &mut problems);
        let ny = take_int::<usize>(&map, "grid.ny", &mut problems);
        let lx = take_f64(&map, "grid.lx", &mut problems);
        let ly = take_f64(&map, "grid.ly", &mut problems);
        if let Some(n) = nx {
            if n < 3 {
                problems.push("grid.nx", format!("needs at least 3 nodes, got {n}"));
            }
        }
        if let Some(n) = ny {
            if n < 3 {
                problems.push("grid.ny", format!("needs at least 3 nodes, got {n}"));
            }
        }
        if let Some(l) = lx {
            if !(l > 0.0) {
                problems.push("grid.lx", format!("must be positive, got {l}"));
            }
        }
        if let Some(l) = ly {
            if !(l > 0.0) {
                problems.push("grid.ly", format!("must be positive, got {l}"));
            }
        }
        match (nx, ny, lx, ly) {
            (Some(nx), Some(ny), Some(lx), Some(ly)) if nx >= 3 && ny >= 3 && lx > 0.0 && ly > 0.0 => {
                Some(GridSpec { nx, ny, lx, ly })
            }
            _ => None,
        }
    };

    let boundary = parse_boundary(&map, &mut problems);
    let initial = parse_initial(&map, &mut problems);

    let time = {
        let dt = take_f64(&map, "time.dt", &mut problems);
        let t_end = take_f64(&map, "time.t_end", &mut problems);
        let rescaled = take_bool(&map, "time.rescaled", &mut problems);
        if let Some(v) = dt {
            if !(v > 0.0) {
                problems.push("time.dt", format!("must be positive, got {v}"));
            }
        }
        if let Some(v) = t_end {
            if !(v >= 0.0) {
                problems.push("time.t_end", format!("must be nonnegative, got {v}"));
            }
        }
        match (dt, t_end) {
            (Some(dt), Some(t_end)) if dt > 0.0 && t_end >= 0.0 => {
                Some(TimeSpec { dt, t_end, rescaled: rescaled.unwrap_or(true) })
            }
            _ => None,
        }
    };

    let output_every = take_int::<usize>(&map, "output.every", &mut problems).unwrap_or(0);
    let diagnostics_every =
        take_int::<usize>(&map, "output.diagnostics_every", &mut problems).unwrap_or(1);
    if map.contains_key("output.diagnostics_every") && diagnostics_every == 0 {
        problems.push("output.diagnostics_every", "must be at least 1");
    }

    let k_max = take_int::<u32>(&map, "kinetic.k_max", &mut problems).unwrap_or(8);
    if map.contains_key("kinetic.k_max") && !(2..=63).contains(&k_max) {
        problems.push("kinetic.k_max", format!("must lie in 2..=63, got {k_max}"));
    }
    let truncation_equilibrium = match map.get("kinetic.truncation").map(String::as_str) {
        None | Some("equilibrium") => true,
        Some("zero") => false,
        Some(other) => {
            problems.push("kinetic.truncation", format!("expected zero or equilibrium, got `{other}`"));
            true
        }
    };
    let flow_maxent = match map.get("closure.flow").map(String::as_str) {
        None | Some("maxent") => true,
        Some("ldg") => false,
        Some(other) => {
            problems.push("closure.flow", format!("expected maxent or ldg, got `{other}`"));
            true
        }
    };
    let m_b = take_int::<usize>(&map, "vortex.m_b", &mut problems).unwrap_or(512);
    if map.contains_key("vortex.m_b") && m_b < 8 {
        problems.push("vortex.m_b", format!("needs at least 8 vertices, got {m_b}"));
    }
    let seed = take_int::<u64>(&map, "seed", &mut problems).unwrap_or(0);

    let mut cfg = ExperimentConfig {
        tier: tier.unwrap_or(Tier::Validate),
        gamma,
        epsilon,
        grid,
        boundary,
        initial,
        time,
        output_every,
        diagnostics_every,
        k_max,
        truncation_equilibrium,
        flow_maxent,
        m_b,
        seed,
    };

    if let Some(t) = tier {
        check_tier_requirements(t, &cfg, &map, &mut problems);
    }

    if problems.0.is_empty() {
        // canonical invariant: irrelevant sections are dropped so serialize
        // reflects exactly what the run will use
        if !matches!(cfg.tier, Tier::Kinetic | Tier::Closure | Tier::Vortex) {
            cfg.boundary = cfg.boundary.filter(|_| cfg.tier == Tier::Validate);
            cfg.initial = cfg.initial.filter(|_| cfg.tier == Tier::Validate);
        }
        Ok(cfg)
    } else {
        Err(problems.0)
    }
}

fn parse_boundary(map: &BTreeMap<String, String>, problems: &mut Problems) -> Option<BoundarySpec> {
    let kind = map.get("boundary.kind").map(String::as_str);
    let has = |k: &str| map.contains_key(k);
    match kind {
        None => {
            for key in ["boundary.angle", "boundary.degree", "boundary.anchors", "boundary.file"] {
                if has(key) {
                    problems.push(key, "set without boundary.kind");
                }
            }
            None
        }
        Some("uniform_angle") => {
            for key in ["boundary.degree", "boundary.anchors", "boundary.file"] {
                if has(key) {
                    problems.push(key, "only valid for a different boundary.kind");
                }
            }
            match take_f64(map, "boundary.angle", problems) {
                Some(a) => Some(BoundarySpec::UniformAngle(a)),
                None => {
                    if !has("boundary.angle") {
                        problems.push("boundary.angle", "required when boundary.kind = uniform_angle");
                    }
                    None
                }
            }
        }
        Some("winding") => {
            for key in ["boundary.angle", "boundary.file"] {
                if has(key) {
                    problems.push(key, "only valid for a different boundary.kind");
                }
            }
            let degree = take_int::<i32>(map, "boundary.degree", problems);
            if degree.is_none() && !has("boundary.degree") {
                problems.push("boundary.degree", "required when boundary.kind = winding");
            }
            let anchors = match map.get("boundary.anchors") {
                Some(raw) => parse_triples(raw, "boundary.anchors", problems)?,
                None => Vec::new(),
            };
            let degree = degree?;
            if !anchors.is_empty() {
                let total: i32 = anchors.iter().map(|(_, _, d)| d).sum();
                if total != degree {
                    problems.push(
                        "boundary.anchors",
                        format!("anchor degrees sum to {total}, but boundary.degree = {degree}"),
                    );
                }
            }
            Some(BoundarySpec::Winding { degree, anchors })
        }
        Some("sampled") => {
            for key in ["boundary.angle", "boundary.degree", "boundary.anchors"] {
                if has(key) {
                    problems.push(key, "only valid for a different boundary.kind");
                }
            }
            match map.get("boundary.file") {
                Some(raw) => {
                    let path = PathBuf::from(raw);
                    if !path.exists() {
                        problems.push("boundary.file", format!("file `{raw}` does not exist"));
                    }
                    Some(BoundarySpec::Sampled(path))
                }
                None => {
                    problems.push("boundary.file", "required when boundary.kind = sampled");
                    None
                }
            }
        }
        Some(other) => {
            problems.push(
                "boundary.kind",
                format!("unknown kind `{other}` (expected uniform_angle, winding, or sampled)"),
            );
            None
        }
    }
}

fn parse_initial(map: &BTreeMap<String, String>, problems: &mut Problems) -> Option<InitialSpec> {
    let kind = map.get("initial.kind").map(String::as_str);
    let has = |k: &str| map.contains_key(k);
    match kind {
        None => {
            for key in ["initial.vortices", "initial.file"] {
                if has(key) {
                    problems.push(key, "set without initial.kind");
                }
            }
            None
        }
        Some("equilibrium") | Some("isotropic") => {
            for key in ["initial.vortices", "initial.file"] {
                if has(key) {
                    problems.push(key, "only valid for a different initial.kind");
                }
            }
            Some(if kind == Some("equilibrium") {
                InitialSpec::Equilibrium
            } else {
                InitialSpec::Isotropic
            })
        }
        Some("multivortex") => {
            if has("initial.file") {
                problems.push("initial.file", "only valid when initial.kind = snapshot");
            }
            match map.get("initial.vortices") {
                Some(raw) => {
                    let list = parse_triples(raw, "initial.vortices", problems)?;
                    if list.is_empty() {
                        problems.push("initial.vortices", "needs at least one x,y,degree triple");
                        return None;
                    }
                    if let Some((_, _, d)) = list.iter().find(|(_, _, d)| *d != 1 && *d != -1) {
                        problems.push("initial.vortices", format!("degree {d} outside {{+1, -1}}"));
                    }
                    for a in 0..list.len() {
                        for b in a + 1..list.len() {
                            let dx = list[a].0 - list[b].0;
                            let dy = list[a].1 - list[b].1;
                            if (dx * dx + dy * dy).sqrt() < 1e-12 {
                                problems.push(
                                    "initial.vortices",
                                    format!("entries {} and {} coincide", a + 1, b + 1),
                                );
                            }
                        }
                    }
                    Some(InitialSpec::Multivortex(list))
                }
                None => {
                    problems.push("initial.vortices", "required when initial.kind = multivortex");
                    None
                }
            }
        }
        Some("snapshot") => {
            if has("initial.vortices") {
                problems.push("initial.vortices", "only valid when initial.kind = multivortex");
            }
            match map.get("initial.file") {
                Some(raw) => {
                    let path = PathBuf::from(raw);
                    if !path.exists() {
                        problems.push("initial.file", format!("file `{raw}` does not exist"));
                    }
                    Some(InitialSpec::Snapshot(path))
                }
                None => {
                    problems.push("initial.file", "required when initial.kind = snapshot");
                    None
                }
            }
        }
        Some(other) => {
            problems.push(
                "initial.kind",
                format!(
                    "unknown kind `{other}` (expected equilibrium, isotropic, multivortex, or snapshot)"
                ),
            );
            None
        }
    }
}

/// Per-tier required keys and cross-field consistency.
fn check_tier_requirements(
    tier: Tier,
    cfg: &ExperimentConfig,
    map: &BTreeMap<String, String>,
    problems: &mut Problems,
) {
    let has = |k: &str| map.contains_key(k);
    let need = |problems: &mut Problems, key: &str| {
        if !has(key) {
            problems.push(key, format!("required for tier = {}", tier.as_str()));
        }
    };
    match tier {
        Tier::Kinetic | Tier::Closure | Tier::Vortex => {
            for key in [
                "params.gamma",
                "params.epsilon",
                "grid.nx",
                "grid.ny",
                "grid.lx",
                "grid.ly",
                "boundary.kind",
                "initial.kind",
                "time.dt",
                "time.t_end",
            ] {
                need(problems, key);
            }
            if tier == Tier::Vortex {
                if let Some(g) = cfg.gamma {
                    // the vortex-clock bookkeeping needs tau_gamma > 0
                    if g <= 2.0 {
                        problems.push(
                            "params.gamma",
                            format!("tier vortex needs gamma > 2 (nematic regime), got {g}"),
                        );
                    }
                }
                if let Some(init) = &cfg.initial {
                    if !matches!(init, InitialSpec::Multivortex(_)) {
                        problems.push(
                            "initial.kind",
                            format!("tier vortex requires multivortex, got {}", init.kind()),
                        );
                    }
                }
            }
            // topological compatibility checkable without running
            if let (Some(b), Some(InitialSpec::Multivortex(list))) = (&cfg.boundary, &cfg.initial) {
                if let Some(w) = b.known_winding() {
                    let total: i32 = list.iter().map(|(_, _, d)| d).sum();
                    if total != w {
                        problems.push(
                            "initial.vortices",
                            format!("total degree {total} but the boundary phase winds {w} times"),
                        );
                    }
                }
            }
            if let (Some(b), Some(InitialSpec::Equilibrium)) = (&cfg.boundary, &cfg.initial) {
                if b.known_winding().map(|w| w != 0).unwrap_or(false) {
                    problems.push(
                        "initial.kind",
                        "equilibrium initial data needs a zero-winding boundary",
                    );
                }
            }
        }
        Tier::Validate => {
            for key in [
                "params.gamma",
                "params.epsilon",
                "grid.nx",
                "grid.ny",
                "grid.lx",
                "grid.ly",
                "time.dt",
                "time.t_end",
            ] {
                need(problems, key);
            }
            if let Some(g) = cfg.gamma {
                if g <= 2.0 {
                    problems.push(
                        "params.gamma",
                        format!("tier validate needs gamma > 2 (nematic regime), got {g}"),
                    );
                }
            }
        }
        Tier::SpecfunTable => {
            need(problems, "params.gamma");
        }
        Tier::MaxslopeDemo => {}
    }
}

/// Serialize the resolved configuration in canonical key order.
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    line("tier", cfg.tier.as_str().into());
    if let Some(v) = cfg.gamma {
        line("params.gamma", format!("{v}"));
    }
    if let Some(v) = cfg.epsilon {
        line("params.epsilon", format!("{v}"));
    }
    if let Some(g) = cfg.grid {
        line("grid.nx", format!("{}", g.nx));
        line("grid.ny", format!("{}", g.ny));
        line("grid.lx", format!("{}", g.lx));
        line("grid.ly", format!("{}", g.ly));
    }
    match &cfg.boundary {
        Some(BoundarySpec::UniformAngle(a)) => {
            line("boundary.kind", "uniform_angle".into());
            line("boundary.angle", format!("{a}"));
        }
        Some(BoundarySpec::Winding { degree, anchors }) => {
            line("boundary.kind", "winding".into());
            line("boundary.degree", format!("{degree}"));
            if !anchors.is_empty() {
                line("boundary.anchors", fmt_triples(anchors));
            }
        }
        Some(BoundarySpec::Sampled(path)) => {
            line("boundary.kind", "sampled".into());
            line("boundary.file", path.display().to_string());
        }
        None => {}
    }
    match &cfg.initial {
        Some(InitialSpec::Equilibrium) => line("initial.kind", "equilibrium".into()),
        Some(InitialSpec::Isotropic) => line("initial.kind", "isotropic".into()),
        Some(InitialSpec::Multivortex(list)) => {
            line("initial.kind", "multivortex".into());
            line("initial.vortices", fmt_triples(list));
        }
        Some(InitialSpec::Snapshot(path)) => {
            line("initial.kind", "snapshot".into());
            line("initial.file", path.display().to_string());
        }
        None => {}
    }
    if let Some(t) = cfg.time {
        line("time.dt", format!("{}", t.dt));
        line("time.t_end", format!("{}", t.t_end));
        line("time.rescaled", format!("{}", t.rescaled));
    }
    line("output.every", format!("{}", cfg.output_every));
    line("output.diagnostics_every", format!("{}", cfg.diagnostics_every));
    line("kinetic.k_max", format!("{}", cfg.k_max));
    line(
        "kinetic.truncation",
        if cfg.truncation_equilibrium { "equilibrium" } else { "zero" }.into(),
    );
    line("closure.flow", if cfg.flow_maxent { "maxent" } else { "ldg" }.into());
    line("vortex.m_b", format!("{}", cfg.m_b));
    line("seed", format!("{}", cfg.seed));
    out
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![format!("config file `{}`: {e}", path.display())])?;
    parse_config(&text)
}
