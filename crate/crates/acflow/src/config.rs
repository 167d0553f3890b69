//! Experiment configuration: a flat `key = value` file with dotted keys.
//!
//! ```text
//! scenario = concentric
//! scenario.r0 = 0.6
//! solver.eps = 0.03
//! solver.t_end = 0.1
//! probe.1.y = 0.9, 0.0
//! probe.1.s = 0.11
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key is checked; an
//! unknown or malformed one is reported with its line number.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use acflow_core::{Interface, Scheme, SolverConfig, Vec2};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Concentric {
        r0: f64,
    },
    Diameter,
    Chord {
        b: f64,
    },
    /// Standing wave on an interval, a solver self-check.
    SelfTest1d,
}

impl Scenario {
    pub fn interface(&self) -> Option<Interface> {
        match *self {
            Scenario::Concentric { r0 } => Some(Interface::Concentric { r0 }),
            Scenario::Diameter => Some(Interface::Diameter),
            Scenario::Chord { b } => Some(Interface::Chord { b }),
            Scenario::SelfTest1d => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Concentric { .. } => "concentric",
            Scenario::Diameter => "diameter",
            Scenario::Chord { .. } => "chord",
            Scenario::SelfTest1d => "selftest-1d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpec {
    pub y: Vec2,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrakkeTest {
    One,
    RadialCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSpec {
    Constant,
    Tangential,
    RadialBump,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub radius: f64,
    pub nr: Option<usize>,
    pub ntheta: Option<usize>,
    pub eps: f64,
    /// `None` selects `0.2ε²`.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
    pub save_every: u64,
    pub checkpoints: Vec<f64>,
    pub measures: bool,
    pub interface: bool,
    /// Contact-angle fit band in units of `ε`.
    pub angle_band: f64,
    pub angle_tol: Option<f64>,
    pub angle_from: Option<f64>,
    pub radius_times: Vec<f64>,
    pub energy_length_time: Option<f64>,
    pub probes: Vec<ProbeSpec>,
    pub c3: f64,
    pub c4: Option<f64>,
    pub brakke: Vec<BrakkeTest>,
    pub brakke_window: (f64, f64),
    pub fields: Vec<FieldSpec>,
    pub variation_time: f64,
    pub density_samples: usize,
    pub density_time: Option<f64>,
    pub kernel_mass_samples: usize,
    pub semidecreasing: bool,
    pub seed: u64,
    pub snapshot_times: Vec<f64>,
}

impl ExperimentConfig {
    /// Defaults for a scenario; `eps` and `t_end` still have to be set.
    pub fn new(scenario: Scenario, eps: f64, t_end: f64) -> Self {
        ExperimentConfig {
            scenario,
            radius: 1.0,
            nr: None,
            ntheta: None,
            eps,
            dt: None,
            t_end,
            scheme: Scheme::ImexAdi,
            save_every: 1,
            checkpoints: Vec::new(),
            measures: true,
            interface: true,
            angle_band: 5.0,
            angle_tol: None,
            angle_from: None,
            radius_times: Vec::new(),
            energy_length_time: None,
            probes: Vec::new(),
            c3: 1.0,
            c4: None,
            brakke: Vec::new(),
            brakke_window: (0.02, 0.08),
            fields: Vec::new(),
            variation_time: 0.05,
            density_samples: 0,
            density_time: None,
            kernel_mass_samples: 0,
            semidecreasing: false,
            seed: 1,
            snapshot_times: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        text.parse()
    }

    /// `Nr = ⌈4R/ε⌉` unless set explicitly.
    pub fn resolved_nr(&self) -> usize {
        self.nr.unwrap_or_else(|| auto_nr(self.radius, self.eps))
    }

    /// Smallest power of two with `RΔθ ≤ ε/2`, at least 64, unless set.
    pub fn resolved_ntheta(&self) -> usize {
        self.ntheta
            .unwrap_or_else(|| auto_ntheta(self.radius, self.eps))
    }

    pub fn resolved_dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| SolverConfig::auto_dt(self.eps))
    }

    /// Solver settings; every time a check needs is added as a checkpoint so
    /// that a diagnostics row lands on it exactly.
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.eps, self.t_end);
        cfg.dt = self.resolved_dt();
        cfg.scheme = self.scheme;
        cfg.save_every = self.save_every;
        let mut cps = self.checkpoints.clone();
        cps.extend(&self.radius_times);
        cps.extend(&self.snapshot_times);
        cps.extend(self.energy_length_time);
        cps.extend(self.density_time);
        if !self.fields.is_empty() {
            cps.push(self.variation_time);
        }
        if !self.brakke.is_empty() {
            cps.push(self.brakke_window.0);
            cps.push(self.brakke_window.1);
        }
        if let Some(t) = self.angle_from {
            cps.push(t);
        }
        cps.retain(|&t| t > 0.0 && t < self.t_end);
        cps.sort_by(f64::total_cmp);
        cps.dedup();
        cfg.checkpoints = cps;
        cfg
    }

    /// Same experiment at another `ε`, with the grid rescaled to it.
    pub fn with_eps(&self, eps: f64) -> Self {
        let mut c = self.clone();
        c.eps = eps;
        c.nr = None;
        c.ntheta = None;
        c.dt = None;
        c
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err("geometry.R must be positive".into());
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err("solver.eps must be positive".into());
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err("solver.t_end must be nonnegative".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err("solver.dt must be positive".into());
            }
        }
        if self.save_every == 0 {
            return Err("solver.save_every must be at least 1".into());
        }
        for p in &self.probes {
            if p.y.norm() > self.radius {
                return Err(format!(
                    "probe center {:?} lies outside the disk",
                    p.y.to_array()
                ));
            }
            if p.s <= self.t_end {
                return Err(format!(
                    "probe time s = {} must exceed t_end = {}",
                    p.s, self.t_end
                ));
            }
        }
        let (t1, t2) = self.brakke_window;
        if !self.brakke.is_empty() && !(0.0 <= t1 && t1 < t2 && t2 <= self.t_end) {
            return Err("brakke window must satisfy 0 <= t1 < t2 <= t_end".into());
        }
        if !(self.angle_band > 0.0) {
            return Err("diagnostics.angle_band must be positive".into());
        }
        Ok(())
    }
}

pub fn auto_nr(radius: f64, eps: f64) -> usize {
    (4.0 * radius / eps).ceil() as usize
}

pub fn auto_ntheta(radius: f64, eps: f64) -> usize {
    let need = (2.0 * std::f64::consts::PI * radius / (0.5 * eps)).ceil() as usize;
    need.next_power_of_two().max(64)
}

struct Entry {
    line: usize,
    value: String,
}

struct Entries(BTreeMap<String, Entry>);

fn key_err(key: &str, line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Key {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(key: &str, e: &Entry) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| key_err(key, e.line, format!("cannot parse `{}`", e.value)))
}

fn parse_list(key: &str, e: &Entry) -> Result<Vec<f64>> {
    if e.value.is_empty() {
        return Ok(Vec::new());
    }
    e.value
        .split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                key_err(
                    key,
                    e.line,
                    format!("cannot parse `{}` as a number", s.trim()),
                )
            })
        })
        .collect()
}

fn parse_bool(key: &str, e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        v => Err(key_err(
            key,
            e.line,
            format!("expected true or false, got `{v}`"),
        )),
    }
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(String, Entry)> {
        self.0.remove_entry(key)
    }

    fn num<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.take(key).map(|(k, e)| parse_value(&k, &e)).transpose()
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.take(key).map(|(k, e)| parse_list(&k, &e)).transpose()
    }

    fn flag(&mut self, key: &str) -> Result<Option<bool>> {
        self.take(key).map(|(k, e)| parse_bool(&k, &e)).transpose()
    }

    /// Removes all `prefix.<k>.<field>` keys and groups them by `k`.
    fn indexed(
        &mut self,
        prefix: &str,
    ) -> Result<BTreeMap<u32, BTreeMap<String, (String, Entry)>>> {
        let keys: Vec<String> = self
            .0
            .keys()
            .filter(|k| k.starts_with(&format!("{prefix}.")))
            .cloned()
            .collect();
        let mut out: BTreeMap<u32, BTreeMap<String, (String, Entry)>> = BTreeMap::new();
        for key in keys {
            let rest = &key[prefix.len() + 1..];
            let Some((idx, field)) = rest.split_once('.') else {
                continue;
            };
            let (k, e) = self.0.remove_entry(&key).expect("key listed above");
            let idx: u32 = idx
                .parse()
                .map_err(|_| key_err(&k, e.line, "index must be a positive integer"))?;
            out.entry(idx)
                .or_default()
                .insert(field.to_string(), (k, e));
        }
        Ok(out)
    }
}

fn required<'a>(
    group: &'a BTreeMap<String, (String, Entry)>,
    prefix: &str,
    idx: u32,
    field: &str,
) -> Result<&'a (String, Entry)> {
    group
        .get(field)
        .ok_or_else(|| HarnessError::Invalid(format!("missing key `{prefix}.{idx}.{field}`")))
}

fn unknown_fields(group: &BTreeMap<String, (String, Entry)>, known: &[&str]) -> Result<()> {
    for (field, (key, e)) in group {
        if !known.contains(&field.as_str()) {
            return Err(key_err(key, e.line, "unknown key"));
        }
    }
    Ok(())
}

impl FromStr for ExperimentConfig {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| HarnessError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(HarnessError::Parse {
                    line,
                    message: format!("malformed key `{key}`"),
                });
            }
            if let Some(prev) = map.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            ) {
                return Err(key_err(
                    key,
                    line,
                    format!("duplicate key, first set on line {}", prev.line),
                ));
            }
        }
        let mut m = Entries(map);

        let eps = m
            .num::<f64>("solver.eps")?
            .ok_or_else(|| HarnessError::Invalid("missing key `solver.eps`".into()))?;
        let t_end = m
            .num::<f64>("solver.t_end")?
            .ok_or_else(|| HarnessError::Invalid("missing key `solver.t_end`".into()))?;
        let r0 = m.num::<f64>("scenario.r0")?;
        let b = m.num::<f64>("scenario.b")?;
        let scenario = match m.take("scenario") {
            None => return Err(HarnessError::Invalid("missing key `scenario`".into())),
            Some((k, e)) => match e.value.as_str() {
                "concentric" => Scenario::Concentric {
                    r0: r0.unwrap_or(0.6),
                },
                "diameter" => Scenario::Diameter,
                "chord" => Scenario::Chord {
                    b: b.unwrap_or(0.3),
                },
                "selftest-1d" => Scenario::SelfTest1d,
                other => return Err(key_err(&k, e.line, format!("unknown scenario `{other}`"))),
            },
        };
        let mut c = ExperimentConfig::new(scenario, eps, t_end);

        if let Some(v) = m.num("geometry.R")? {
            c.radius = v;
        }
        c.nr = m.num("grid.nr")?;
        c.ntheta = m.num("grid.ntheta")?;
        if let Some((k, e)) = m.take("solver.dt") {
            c.dt = if e.value == "auto" {
                None
            } else {
                Some(parse_value(&k, &e)?)
            };
        }
        if let Some((k, e)) = m.take("solver.scheme") {
            c.scheme = match e.value.as_str() {
                "imex-adi" => Scheme::ImexAdi,
                "explicit" => Scheme::Explicit,
                other => return Err(key_err(&k, e.line, format!("unknown scheme `{other}`"))),
            };
        }
        if let Some(v) = m.num("solver.save_every")? {
            c.save_every = v;
        }
        if let Some(v) = m.list("solver.checkpoints")? {
            c.checkpoints = v;
        }
        if let Some(v) = m.flag("diagnostics.measures")? {
            c.measures = v;
        }
        if let Some(v) = m.flag("diagnostics.interface")? {
            c.interface = v;
        }
        if let Some(v) = m.num("diagnostics.angle_band")? {
            c.angle_band = v;
        }
        c.angle_tol = m.num("check.angle_tol")?;
        c.angle_from = m.num("check.angle_from")?;
        if let Some(v) = m.list("check.radius_times")? {
            c.radius_times = v;
        }
        c.energy_length_time = m.num("check.energy_length_time")?;
        if let Some(v) = m.num("diagnostics.density_samples")? {
            c.density_samples = v;
        }
        c.density_time = m.num("diagnostics.density_time")?;
        if let Some(v) = m.num("diagnostics.kernel_mass_samples")? {
            c.kernel_mass_samples = v;
        }
        if let Some(v) = m.flag("diagnostics.semidecreasing")? {
            c.semidecreasing = v;
        }
        if let Some(v) = m.num("diagnostics.seed")? {
            c.seed = v;
        }
        if let Some(v) = m.num("monotonicity.c3")? {
            c.c3 = v;
        }
        c.c4 = m.num("monotonicity.c4")?;
        let t1 = m.num("brakke.t1")?;
        let t2 = m.num("brakke.t2")?;
        c.brakke_window = (
            t1.unwrap_or(c.brakke_window.0),
            t2.unwrap_or(c.brakke_window.1),
        );
        if let Some(v) = m.num("varifold.time")? {
            c.variation_time = v;
        }
        if let Some(v) = m.list("snapshot.times")? {
            c.snapshot_times = v;
        }

        for (idx, group) in m.indexed("probe")? {
            unknown_fields(&group, &["y", "s"])?;
            let (k, e) = required(&group, "probe", idx, "y")?;
            let y = parse_list(k, e)?;
            if y.len() != 2 {
                return Err(key_err(k, e.line, "expected two coordinates"));
            }
            let (k, e) = required(&group, "probe", idx, "s")?;
            let s = parse_value(k, e)?;
            c.probes.push(ProbeSpec {
                y: Vec2::new(y[0], y[1]),
                s,
            });
        }
        for (idx, group) in m.indexed("brakke")? {
            unknown_fields(&group, &["phi"])?;
            let (k, e) = required(&group, "brakke", idx, "phi")?;
            c.brakke.push(match e.value.as_str() {
                "one" => BrakkeTest::One,
                "radial-cosine" => BrakkeTest::RadialCosine,
                other => {
                    return Err(key_err(
                        k,
                        e.line,
                        format!("unknown test function `{other}`"),
                    ))
                }
            });
        }
        for (idx, group) in m.indexed("varifold")? {
            unknown_fields(&group, &["field"])?;
            let (k, e) = required(&group, "varifold", idx, "field")?;
            c.fields.push(match e.value.as_str() {
                "constant" => FieldSpec::Constant,
                "tangential" => FieldSpec::Tangential,
                "radial-bump" => FieldSpec::RadialBump,
                other => {
                    return Err(key_err(
                        k,
                        e.line,
                        format!("unknown vector field `{other}`"),
                    ))
                }
            });
        }

        if let Some((key, e)) = m.0.into_iter().next() {
            return Err(key_err(&key, e.line, "unknown key"));
        }
        c.check().map_err(HarnessError::Invalid)?;
        Ok(c)
    }
}
