//! Pipeline spec files: a flat TOML table whose keys name the generator,
//! force-field, thermostat and run parameters. One key may hold a list, which
//! expands the spec into a sweep.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use polybead_core::topogen::{GeneratorSpec, PolymerShape};
use polybead_core::{Architecture, InteractionParams, RunSpec, ThermostatSpec};
use toml::Value;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Text,
    Count,
    Real,
}

/// Every key a spec file may contain, in display order.
pub const KEYS: [&str; 23] = [
    "architecture",
    "N",
    "N_b",
    "sigma_g",
    "N_s",
    "N_a",
    "m",
    "G",
    "b",
    "B",
    "n_s",
    "eps_pp",
    "eps_ss",
    "eps_sp",
    "thermostat",
    "T",
    "gamma",
    "Q",
    "steps",
    "dt",
    "dump_every",
    "seed",
    "out",
];

fn kind(key: &str) -> Option<Kind> {
    Some(match key {
        "architecture" | "thermostat" | "out" => Kind::Text,
        "N" | "N_b" | "N_s" | "N_a" | "m" | "G" | "b" | "steps" | "dump_every" | "seed" => Kind::Count,
        "sigma_g" | "B" | "n_s" | "eps_pp" | "eps_ss" | "eps_sp" | "T" | "gamma" | "Q" | "dt" => Kind::Real,
        _ => return None,
    })
}

/// Defaults for keys that are not architecture parameters.
pub fn default_value(key: &str) -> Option<Value> {
    Some(match key {
        "B" => Value::Float(30.0),
        "n_s" => Value::Float(0.0),
        "eps_pp" | "eps_ss" | "eps_sp" | "T" | "gamma" => Value::Float(1.0),
        "thermostat" => Value::String("langevin".into()),
        "steps" => Value::Integer(10_000),
        "dt" => Value::Float(0.01),
        "dump_every" => Value::Integer(100),
        "seed" => Value::Integer(0),
        "out" => Value::String("polybead_out".into()),
        _ => return None,
    })
}

/// Keys describing the polymer for each architecture.
pub fn shape_keys(a: Architecture) -> &'static [&'static str] {
    match a {
        Architecture::Linear | Architecture::Ring => &["N"],
        Architecture::Brush => &["N_b", "sigma_g", "N_s"],
        Architecture::Star => &["N_a", "m"],
        Architecture::Dendrimer => &["G", "b", "N_s"],
    }
}

/// A fully resolved, validated single run.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineSpec {
    pub shape: PolymerShape,
    pub box_side: f64,
    pub solvent_density: f64,
    pub params: InteractionParams,
    pub thermostat: ThermostatSpec,
    pub run: RunSpec,
    pub out: PathBuf,
}

impl PipelineSpec {
    pub fn generator(&self) -> GeneratorSpec {
        GeneratorSpec::new(self.shape, self.box_side, self.solvent_density, self.run.seed)
    }

    pub fn architecture(&self) -> Architecture {
        self.shape.architecture()
    }
}

/// One sub-run of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub key: String,
    pub value: Value,
    /// Directory name below the sweep output directory.
    pub label: String,
    pub spec: PipelineSpec,
}

/// The raw key/value table of a spec file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpecFile {
    table: BTreeMap<String, Value>,
}

fn show_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Float(f) => format!("{f:?}"),
        other => other.to_string(),
    }
}

fn type_ok(k: Kind, v: &Value) -> bool {
    match (k, v) {
        (Kind::Text, Value::String(_)) => true,
        (Kind::Count, Value::Integer(i)) => *i >= 0,
        (Kind::Real, Value::Integer(_) | Value::Float(_)) => true,
        _ => false,
    }
}

fn type_name(k: Kind) -> &'static str {
    match k {
        Kind::Text => "a string",
        Kind::Count => "a non-negative integer",
        Kind::Real => "a number",
    }
}

impl SpecFile {
    pub fn new() -> Self {
        SpecFile::default()
    }

    /// Parses TOML text; unknown keys and ill-typed values are errors, all
    /// of them reported together.
    pub fn parse(text: &str) -> Result<SpecFile> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Spec(vec![e.to_string()]))?;
        let mut spec = SpecFile::new();
        let mut errors = Vec::new();
        for (key, value) in table {
            if let Err(e) = spec.check_entry(&key, &value) {
                errors.push(e);
            } else {
                spec.table.insert(key, value);
            }
        }
        if !errors.is_empty() {
            return Err(Error::Spec(errors));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<SpecFile> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        SpecFile::parse(&text)
    }

    fn check_entry(&self, key: &str, value: &Value) -> std::result::Result<(), String> {
        let Some(k) = kind(key) else {
            return Err(format!("{key}: unknown key"));
        };
        match value {
            Value::Array(items) => {
                if items.is_empty() {
                    return Err(format!("{key}: sweep list is empty"));
                }
                if let Some(bad) = items.iter().find(|v| !type_ok(k, v)) {
                    return Err(format!("{key}: expected {}, got {bad}", type_name(k)));
                }
            }
            v if !type_ok(k, v) => return Err(format!("{key}: expected {}, got {v}", type_name(k))),
            _ => {}
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.table.get(key)
    }

    /// Sets `key`, returning the previous value. Values are type-checked but
    /// range checks wait for [`SpecFile::resolve`].
    pub fn set(&mut self, key: &str, value: Value) -> Result<Option<Value>> {
        self.check_entry(key, &value).map_err(|e| Error::Spec(vec![e]))?;
        Ok(self.table.insert(key.to_string(), value))
    }

    /// Parses `text` as a TOML value, falling back to a bare string.
    pub fn parse_value(text: &str) -> Value {
        let doc = format!("v = {text}");
        match doc.parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").unwrap_or(Value::String(text.into())),
            Err(_) => Value::String(text.into()),
        }
    }

    /// The value used for `key`: the explicit entry or the default.
    pub fn effective(&self, key: &str) -> Option<Value> {
        self.table.get(key).cloned().or_else(|| default_value(key))
    }

    /// `key = value` lines in [`KEYS`] order, marking defaults.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            match (self.table.get(key), default_value(key)) {
                (Some(v), _) => {
                    let _ = writeln!(s, "{key} = {}", show_value(v));
                }
                (None, Some(d)) => {
                    let _ = writeln!(s, "{key} = {} (default)", show_value(&d));
                }
                (None, None) => {}
            }
        }
        s
    }

    /// The single list-valued key, if any.
    pub fn sweep(&self) -> Result<Option<(String, Vec<Value>)>> {
        let lists: Vec<(&String, &Vec<Value>)> = self
            .table
            .iter()
            .filter_map(|(k, v)| match v {
                Value::Array(a) => Some((k, a)),
                _ => None,
            })
            .collect();
        match lists.as_slice() {
            [] => Ok(None),
            [(k, a)] => Ok(Some(((*k).clone(), (*a).clone()))),
            many => Err(Error::Spec(vec![format!(
                "only one key may be a sweep list, found {}",
                many.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(", ")
            )])),
        }
    }

    /// Resolves a spec without sweep lists into a validated [`PipelineSpec`],
    /// reporting every offending field at once.
    pub fn resolve(&self) -> Result<PipelineSpec> {
        let mut errors: Vec<String> = Vec::new();
        let mut bad_keys: Vec<&'static str> = Vec::new();
        let fail = |errors: &mut Vec<String>, bad: &mut Vec<&'static str>, key: &'static str, msg: String| {
            if !bad.contains(&key) {
                bad.push(key);
                errors.push(format!("{key}: {msg}"));
            }
        };
        for (k, v) in &self.table {
            if matches!(v, Value::Array(_)) {
                errors.push(format!("{k}: sweep lists are only accepted by the pipeline run"));
            }
        }
        let text = |key: &str| match self.effective(key) {
            Some(Value::String(s)) => Some(s),
            _ => None,
        };
        let count = |key: &str| match self.effective(key) {
            Some(Value::Integer(i)) => Some(i as u64),
            _ => None,
        };
        let real = |key: &str| match self.effective(key) {
            Some(Value::Integer(i)) => Some(i as f64),
            Some(Value::Float(f)) => Some(f),
            _ => None,
        };

        let architecture = match text("architecture") {
            None => {
                fail(&mut errors, &mut bad_keys, "architecture", "missing; one of linear, ring, brush, star, dendrimer".into());
                None
            }
            Some(a) => match Architecture::from_name(&a.to_ascii_lowercase()) {
                Some(a) => Some(a),
                None => {
                    fail(&mut errors, &mut bad_keys, "architecture", format!("unknown architecture '{a}'"));
                    None
                }
            },
        };

        let need_count = |errors: &mut Vec<String>, bad: &mut Vec<&'static str>, key: &'static str, min: u64| {
            match count(key) {
                None => {
                    fail(errors, bad, key, format!("missing (required for {})", architecture.map_or("this architecture", |a| a.name())));
                    None
                }
                Some(v) if v < min => {
                    fail(errors, bad, key, format!("must be at least {min}, got {v}"));
                    None
                }
                Some(v) => Some(v as usize),
            }
        };
        let shape = match architecture {
            None => None,
            Some(Architecture::Linear) => need_count(&mut errors, &mut bad_keys, "N", 1).map(|n| PolymerShape::Linear { n }),
            Some(Architecture::Ring) => need_count(&mut errors, &mut bad_keys, "N", 3).map(|n| PolymerShape::Ring { n }),
            Some(Architecture::Brush) => {
                let nb = need_count(&mut errors, &mut bad_keys, "N_b", 2);
                let sg = match real("sigma_g") {
                    None => {
                        fail(&mut errors, &mut bad_keys, "sigma_g", "missing (required for brush)".into());
                        None
                    }
                    Some(s) if !(0.0..=1.0).contains(&s) => {
                        fail(&mut errors, &mut bad_keys, "sigma_g", format!("grafting density must lie in [0, 1], got {s}"));
                        None
                    }
                    Some(s) => Some(s),
                };
                let ns = need_count(&mut errors, &mut bad_keys, "N_s", 1);
                match (nb, sg, ns) {
                    (Some(backbone), Some(grafting_density), Some(side_chain)) => Some(PolymerShape::Brush {
                        backbone,
                        grafting_density,
                        side_chain,
                    }),
                    _ => None,
                }
            }
            Some(Architecture::Star) => {
                let na = need_count(&mut errors, &mut bad_keys, "N_a", 1);
                let m = need_count(&mut errors, &mut bad_keys, "m", 1);
                na.zip(m).map(|(arm_length, arms)| PolymerShape::Star { arm_length, arms })
            }
            Some(Architecture::Dendrimer) => {
                let g = need_count(&mut errors, &mut bad_keys, "G", 1);
                let b = need_count(&mut errors, &mut bad_keys, "b", 2);
                let ns = need_count(&mut errors, &mut bad_keys, "N_s", 1);
                match (g, b, ns) {
                    (Some(g), Some(branching), Some(spacer)) => Some(PolymerShape::Dendrimer {
                        generations: g as u32,
                        branching,
                        spacer,
                    }),
                    _ => None,
                }
            }
        };

        let positive = |errors: &mut Vec<String>, bad: &mut Vec<&'static str>, key: &'static str, allow_zero: bool| {
            let v = real(key).unwrap_or(f64::NAN);
            let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
            if !ok {
                let rule = if allow_zero { ">= 0" } else { "> 0" };
                fail(errors, bad, key, format!("must be finite and {rule}, got {v}"));
            }
            v
        };
        let box_side = positive(&mut errors, &mut bad_keys, "B", false);
        let solvent_density = positive(&mut errors, &mut bad_keys, "n_s", true);
        let eps_pp = positive(&mut errors, &mut bad_keys, "eps_pp", true);
        let eps_ss = positive(&mut errors, &mut bad_keys, "eps_ss", true);
        let eps_sp = positive(&mut errors, &mut bad_keys, "eps_sp", true);
        let temperature = positive(&mut errors, &mut bad_keys, "T", false);
        let dt = positive(&mut errors, &mut bad_keys, "dt", false);

        let thermostat = match text("thermostat").map(|t| t.to_ascii_lowercase()).as_deref() {
            Some("langevin") => Some(ThermostatSpec::Langevin {
                gamma: positive(&mut errors, &mut bad_keys, "gamma", false),
                temperature,
            }),
            Some("nose-hoover" | "nose_hoover" | "nosehoover") => {
                let q = match self.table.get("Q") {
                    None => None,
                    Some(_) => Some(positive(&mut errors, &mut bad_keys, "Q", false)),
                };
                Some(ThermostatSpec::NoseHoover { temperature, q })
            }
            other => {
                fail(
                    &mut errors,
                    &mut bad_keys,
                    "thermostat",
                    format!("expected 'langevin' or 'nose-hoover', got '{}'", other.unwrap_or("")),
                );
                None
            }
        };

        let steps = count("steps").unwrap_or(0);
        if steps == 0 {
            fail(&mut errors, &mut bad_keys, "steps", "must be at least 1".into());
        }
        let dump_every = count("dump_every").unwrap_or(0);
        if dump_every == 0 {
            fail(&mut errors, &mut bad_keys, "dump_every", "must be at least 1".into());
        }
        let seed = count("seed").unwrap_or(0);
        let out = PathBuf::from(text("out").unwrap_or_default());
        if out.as_os_str().is_empty() {
            fail(&mut errors, &mut bad_keys, "out", "must not be empty".into());
        }

        let params = InteractionParams::new(eps_pp, eps_ss, eps_sp);
        let run = RunSpec {
            steps,
            dt,
            dump_every,
            seed,
        };
        let box_ok = !bad_keys.contains(&"B") && !bad_keys.contains(&"n_s");
        // cross-field rules (ring fits the box, packing capacity, cutoff)
        let mut core_check = |r: polybead_core::Result<()>| {
            if let Err(e) = r {
                match e {
                    polybead_core::Error::InvalidParameter { name, reason } => {
                        let known = KEYS.iter().copied().find(|k| *k == name).unwrap_or("spec");
                        fail(&mut errors, &mut bad_keys, known, reason);
                    }
                    other => errors.push(other.to_string()),
                }
            }
        };
        if let Some(shape) = shape {
            if box_ok {
                core_check(GeneratorSpec::new(shape, box_side, solvent_density, seed).validate());
            }
        }
        core_check(params.validate());
        if let Some(t) = thermostat {
            core_check(t.validate());
        }
        core_check(run.validate());

        if !errors.is_empty() {
            return Err(Error::Spec(errors));
        }
        Ok(PipelineSpec {
            shape: shape.expect("shape resolved when no errors"),
            box_side,
            solvent_density,
            params,
            thermostat: thermostat.expect("thermostat resolved when no errors"),
            run,
            out,
        })
    }

    /// Expands a sweep into one resolved spec per value, each writing into
    /// `<out>/<key>_<value>`. A spec without a list yields a single point
    /// whose output directory is `out` itself.
    pub fn expand(&self) -> Result<Vec<SweepPoint>> {
        let Some((key, values)) = self.sweep()? else {
            let spec = self.resolve()?;
            return Ok(vec![SweepPoint {
                key: String::new(),
                value: Value::String(String::new()),
                label: String::new(),
                spec,
            }]);
        };
        let base_out = PathBuf::from(match self.effective("out") {
            Some(Value::String(s)) => s,
            _ => String::new(),
        });
        let mut points = Vec::new();
        let mut errors = Vec::new();
        for value in values {
            let mut single = self.clone();
            single.table.insert(key.clone(), value.clone());
            let label = format!("{key}_{}", show_value(&value));
            match single.resolve() {
                Ok(mut spec) => {
                    spec.out = base_out.join(&label);
                    points.push(SweepPoint {
                        key: key.clone(),
                        value,
                        label,
                        spec,
                    });
                }
                Err(Error::Spec(es)) => errors.extend(es.into_iter().map(|e| format!("[{label}] {e}"))),
                Err(e) => return Err(e),
            }
        }
        if !errors.is_empty() {
            return Err(Error::Spec(errors));
        }
        Ok(points)
    }

    /// TOML text that parses back to this spec.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            if let Some(v) = self.table.get(key) {
                let _ = writeln!(s, "{key} = {v}");
            }
        }
        s
    }
}

pub fn show(v: &Value) -> String {
    show_value(v)
}
