//! Switching system description: mode matrices plus constraint automaton,
//! the on-disk file format, and the canonical fingerprint that binds
//! certificates to a system.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::automata::{Automaton, Transition};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Mode matrices {A_1..A_N} with the constraint automaton restricting
/// their order of application.
#[derive(Debug, Clone)]
pub struct SwitchingSystem {
    dim: usize,
    modes: BTreeMap<usize, Matrix>,
    automaton: Automaton,
    language: Option<Automaton>,
}

impl SwitchingSystem {
    pub fn new(
        dim: usize,
        modes: BTreeMap<usize, Matrix>,
        automaton: Automaton,
        language: Option<Automaton>,
    ) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidInput("at least one mode is required".into()));
        }
        let n_modes = modes.len();
        for label in 1..=n_modes {
            if !modes.contains_key(&label) {
                return Err(Error::InvalidInput(format!(
                    "mode labels must be contiguous 1..{n_modes}; label {label} missing"
                )));
            }
        }
        for (label, a) in &modes {
            if a.rows() != dim || a.cols() != dim {
                return Err(Error::InvalidInput(format!(
                    "mode {label} is {}x{}, expected {dim}x{dim}",
                    a.rows(),
                    a.cols()
                )));
            }
        }
        if automaton.alphabet_size() != n_modes {
            return Err(Error::InvalidInput(format!(
                "automaton alphabet size {} does not match mode count {n_modes}",
                automaton.alphabet_size()
            )));
        }
        if let Some(lang) = &language {
            if lang.alphabet_size() != n_modes {
                return Err(Error::AlphabetMismatch(format!(
                    "language alphabet size {} does not match mode count {n_modes}",
                    lang.alphabet_size()
                )));
            }
        }
        Ok(SwitchingSystem { dim, modes, automaton, language })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn mode(&self, label: usize) -> Result<&Matrix> {
        self.modes
            .get(&label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown mode label {label}")))
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn language(&self) -> Option<&Automaton> {
        self.language.as_ref()
    }

    /// Same system with the automaton trimmed to its bi-infinite core.
    pub fn trimmed(&self) -> Result<SwitchingSystem> {
        Ok(SwitchingSystem {
            dim: self.dim,
            modes: self.modes.clone(),
            automaton: self.automaton.trim_core()?,
            language: self.language.clone(),
        })
    }

    /// Canonical textual form: sorted keys, 17-significant-digit decimals,
    /// no whitespace. Cosmetic edits to the source file do not change it.
    pub fn canonical_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n={};", self.dim));
        for (label, a) in &self.modes {
            out.push_str(&format!("mode{label}="));
            let entries: Vec<String> = a.entries().iter().map(|x| format_f64(*x)).collect();
            out.push_str(&entries.join(","));
            out.push(';');
        }
        out.push_str("automaton=");
        out.push_str(&canonical_automaton(&self.automaton));
        if let Some(lang) = &self.language {
            out.push_str(";language=");
            out.push_str(&canonical_automaton(lang));
        }
        out
    }

    /// SHA-256 of the canonical form, hex-encoded.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("system file: {e}")))?;
        Self::from_value(&value)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    fn from_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("system file must be a JSON object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "n" | "modes" | "automaton" | "language") {
                return Err(Error::Parse(format!("unknown key `{key}` in system file")));
            }
        }
        let dim = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing or invalid `n`".into()))? as usize;
        let modes_obj = obj
            .get("modes")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("missing `modes` map".into()))?;
        let mut modes = BTreeMap::new();
        for (key, rows) in modes_obj {
            let label: usize = key
                .parse()
                .map_err(|_| Error::Parse(format!("mode label `{key}` is not an integer")))?;
            modes.insert(label, parse_matrix(rows, dim, key)?);
        }
        let automaton = parse_automaton(
            obj.get("automaton")
                .ok_or_else(|| Error::Parse("missing `automaton`".into()))?,
            modes.len(),
        )?;
        let language = obj
            .get("language")
            .map(|v| parse_automaton(v, modes.len()))
            .transpose()?;
        SwitchingSystem::new(dim, modes, automaton, language)
    }
}

/// Render a system to the JSON file format (pretty-printed); parsing the
/// result reproduces the fingerprint.
pub fn to_json_string(system: &SwitchingSystem) -> Result<String> {
    use serde_json::{json, Map};
    let mut modes = Map::new();
    for (label, a) in &system.modes {
        let rows: Vec<Value> = (0..a.rows())
            .map(|i| {
                Value::Array((0..a.cols()).map(|j| json!(a[(i, j)])).collect())
            })
            .collect();
        modes.insert(label.to_string(), Value::Array(rows));
    }
    let automaton_value = |aut: &Automaton| {
        json!({
            "states": aut.states(),
            "transitions": aut
                .transitions()
                .iter()
                .map(|t| json!([t.from, t.label, t.to]))
                .collect::<Vec<_>>(),
        })
    };
    let mut root = Map::new();
    root.insert("n".into(), json!(system.dim));
    root.insert("modes".into(), Value::Object(modes));
    root.insert("automaton".into(), automaton_value(&system.automaton));
    if let Some(lang) = &system.language {
        root.insert("language".into(), automaton_value(lang));
    }
    serde_json::to_string_pretty(&Value::Object(root)).map_err(|e| Error::Parse(e.to_string()))
}

/// Parse a standalone automaton file: `{"states": [...], "transitions":
/// [[from, label, to], ...]}` with optional `alphabet_size`.
pub fn automaton_from_path(path: &Path) -> Result<Automaton> {
    let text = std::fs::read_to_string(path)?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("automaton file: {e}")))?;
    // Accept either a bare automaton object or a full system file.
    if value.get("modes").is_some() {
        let system = SwitchingSystem::from_value(&value)?;
        return Ok(system.automaton().clone());
    }
    let declared = value.get("alphabet_size").and_then(Value::as_u64).map(|v| v as usize);
    let max_label = value
        .get("transitions")
        .and_then(Value::as_array)
        .map(|ts| {
            ts.iter()
                .filter_map(|t| t.as_array())
                .filter_map(|t| t.get(1))
                .filter_map(Value::as_u64)
                .max()
                .unwrap_or(0) as usize
        })
        .unwrap_or(0);
    parse_automaton(&value, declared.unwrap_or(max_label))
}

fn parse_automaton(value: &Value, alphabet_size: usize) -> Result<Automaton> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("automaton must be a JSON object".into()))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "states" | "transitions" | "alphabet_size") {
            return Err(Error::Parse(format!("unknown key `{key}` in automaton")));
        }
    }
    let states = obj
        .get("states")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("automaton needs a `states` array".into()))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(String::from)
                .ok_or_else(|| Error::Parse("state names must be strings".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let transitions = obj
        .get("transitions")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("automaton needs a `transitions` array".into()))?
        .iter()
        .map(|t| {
            let triple = t
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::Parse("transitions are [from, label, to] triples".into()))?;
            let from = triple[0]
                .as_str()
                .ok_or_else(|| Error::Parse("transition `from` must be a string".into()))?;
            let label = triple[1]
                .as_u64()
                .ok_or_else(|| Error::Parse("transition label must be a positive integer".into()))?
                as usize;
            let to = triple[2]
                .as_str()
                .ok_or_else(|| Error::Parse("transition `to` must be a string".into()))?;
            Ok(Transition::new(from, label, to))
        })
        .collect::<Result<Vec<_>>>()?;
    Automaton::new(states, alphabet_size, transitions)
}

fn parse_matrix(value: &Value, dim: usize, label: &str) -> Result<Matrix> {
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Parse(format!("mode {label} must be an array of rows")))?;
    if rows.len() != dim {
        return Err(Error::Parse(format!(
            "mode {label} has {} rows, expected {dim}",
            rows.len()
        )));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for row in rows {
        let cells = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("mode {label}: rows must be arrays")))?;
        if cells.len() != dim {
            return Err(Error::Parse(format!(
                "mode {label} has a row of length {}, expected {dim}",
                cells.len()
            )));
        }
        for cell in cells {
            entries.push(parse_scalar(cell)?);
        }
    }
    Matrix::new(dim, dim, entries)
}

/// Scalar literal: JSON number, decimal string, or simple fraction "p/q".
pub fn parse_scalar(value: &Value) -> Result<f64> {
    match value {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("number {n} is not representable"))),
        Value::String(s) => parse_scalar_str(s),
        other => Err(Error::Parse(format!("expected a number, got {other}"))),
    }
}

pub fn parse_scalar_str(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad fraction numerator in `{s}`")))?;
        let den: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad fraction denominator in `{s}`")))?;
        if den == 0.0 {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        Ok(num / den)
    } else {
        s.parse()
            .map_err(|_| Error::Parse(format!("`{s}` is not a number or fraction")))
    }
}

/// 17 significant digits: enough for exact f64 round-trips.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn canonical_automaton(aut: &Automaton) -> String {
    let states = aut.states().join(",");
    let transitions: Vec<String> = aut
        .transitions()
        .iter()
        .map(|t| format!("{},{},{}", t.from, t.label, t.to))
        .collect();
    format!("states:{states}|delta:{}", transitions.join("|"))
}

/// Ready-made systems used in examples and tests.
pub mod fixtures {
    use super::*;
    use crate::automata::fixtures as auto_fixtures;

    /// Two diagonal scaling modes under strict alternation; path 1-dominant
    /// with witness forms diag(-1, 8) and diag(-1/2, 1/4) at uniform rate 1.
    pub fn alternating() -> SwitchingSystem {
        let mut modes = BTreeMap::new();
        modes.insert(1, Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap());
        modes.insert(2, Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.125]]).unwrap());
        SwitchingSystem::new(2, modes, auto_fixtures::strict_alternation(), None).unwrap()
    }

    /// Two-population bacterial culture with gene-insertion, gene-removal
    /// and antibiotic modes; the automaton allows the antibiotic only after
    /// insertion.
    pub fn bacterial() -> SwitchingSystem {
        let mut modes = BTreeMap::new();
        modes.insert(1, Matrix::from_rows(&[vec![1.0, 0.9], vec![0.0, 0.1]]).unwrap());
        modes.insert(2, Matrix::from_rows(&[vec![0.1, 0.0], vec![0.9, 1.0]]).unwrap());
        modes.insert(3, Matrix::from_rows(&[vec![1.0, -0.5], vec![0.0, 0.5]]).unwrap());
        SwitchingSystem::new(2, modes, auto_fixtures::bacterial(), None).unwrap()
    }

    /// A single rotation mode on a self-loop: equal eigenvalue magnitudes,
    /// so no dominance degree admits a rate gap.
    pub fn rotation_loop(theta: f64) -> SwitchingSystem {
        let mut modes = BTreeMap::new();
        modes.insert(1, crate::linalg::rotation(theta));
        let aut = Automaton::new(
            vec!["a".into()],
            1,
            vec![Transition::new("a", 1, "a")],
        )
        .unwrap();
        SwitchingSystem::new(2, modes, aut, None).unwrap()
    }
}
