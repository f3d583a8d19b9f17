//! Input files: JSON matrices, edge lists and system descriptions.
//!
//! Matrix: `{"rows": r, "cols": c, "data": [...]}` with `r*c` row-major
//! entries, each a number or `{"re": x, "im": y}`.
//!
//! Edge list: a first line `m=<agents>`, then one `i,j,w` line per edge
//! (1-based, agent `i` listens to agent `j` with weight `w`). Blank lines
//! and lines starting with `#` are skipped.
//!
//! System: an object with `A`, `L` (a matrix, or a path to a matrix or
//! edge-list file relative to the system file), `c`, and either `Gamma` or
//! the output pair `F`, `C` (`C` alone is allowed for gain design).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use consensus_core::coupling::{laplacian_from_edges, validate_coupling, CouplingMatrix, EdgeList};
use consensus_core::linalg::{ComplexMatrix, Matrix};
use consensus_core::Complex64;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Collects the bytes of every file read, in order, for the report digest.
#[derive(Default)]
pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    pub fn digest(&self) -> String {
        format!("{:x}", self.hasher.clone().finalize())
    }
}

fn entry(v: &Value, k: usize) -> Result<Complex64> {
    let num = |x: &Value, what: &str| -> Result<f64> {
        x.as_f64()
            .ok_or_else(|| anyhow!("data[{k}].{what} is not a number"))
    };
    match v {
        Value::Number(n) => Ok(Complex64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Object(o) => {
            let re = o.get("re").ok_or_else(|| anyhow!("data[{k}] lacks \"re\""))?;
            let im = o.get("im").ok_or_else(|| anyhow!("data[{k}] lacks \"im\""))?;
            Ok(Complex64::new(num(re, "re")?, num(im, "im")?))
        }
        _ => bail!("data[{k}] must be a number or an {{re, im}} object"),
    }
}

fn dim(v: &Value, key: &str) -> Result<usize> {
    v.get(key)
        .and_then(Value::as_u64)
        .filter(|&d| d > 0)
        .map(|d| d as usize)
        .ok_or_else(|| anyhow!("matrix field \"{key}\" must be a positive integer"))
}

pub fn complex_matrix_from_value(v: &Value) -> Result<ComplexMatrix> {
    let (rows, cols) = (dim(v, "rows")?, dim(v, "cols")?);
    let data = v
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("matrix field \"data\" must be an array"))?;
    if data.len() != rows * cols {
        bail!(
            "matrix data has {} entries, expected rows*cols = {}",
            data.len(),
            rows * cols
        );
    }
    let entries = data
        .iter()
        .enumerate()
        .map(|(k, x)| entry(x, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexMatrix::new(rows, cols, entries)?)
}

pub fn matrix_from_value(v: &Value) -> Result<Matrix> {
    let m = complex_matrix_from_value(v)?;
    if m.as_slice().iter().any(|z| z.im != 0.0) {
        bail!("expected a real matrix, found complex entries");
    }
    Ok(m.real_part())
}

pub fn parse_json(text: &str, origin: &Path) -> Result<Value> {
    serde_json::from_str(text).with_context(|| format!("{} is not valid JSON", origin.display()))
}

pub fn read_matrix(inputs: &mut Inputs, path: &Path) -> Result<Matrix> {
    let text = inputs.read(path)?;
    matrix_from_value(&parse_json(&text, path)?)
        .with_context(|| format!("invalid matrix in {}", path.display()))
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or_else(|| anyhow!("edge list is empty"))?;
    let agents: usize = header
        .strip_prefix("m=")
        .and_then(|m| m.trim().parse().ok())
        .ok_or_else(|| anyhow!("edge list must start with a line \"m=<agents>\", found {header:?}"))?;
    let mut edges = Vec::new();
    for (line, text) in lines {
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        let [i, j, w] = fields.as_slice() else {
            bail!("edge list line {line}: expected \"i,j,w\", found {text:?}");
        };
        let bad = |what: &str| anyhow!("edge list line {line}: invalid {what} in {text:?}");
        edges.push((
            i.parse().map_err(|_| bad("source index"))?,
            j.parse().map_err(|_| bad("target index"))?,
            w.parse().map_err(|_| bad("weight"))?,
        ));
    }
    Ok(EdgeList::new(agents, edges)?)
}

/// A coupling matrix from either file format, told apart by the first
/// non-blank character.
pub fn parse_coupling(text: &str, origin: &Path) -> Result<CouplingMatrix> {
    if text.trim_start().starts_with('{') {
        let m = matrix_from_value(&parse_json(text, origin)?)
            .with_context(|| format!("invalid matrix in {}", origin.display()))?;
        validate_coupling(&m).with_context(|| origin.display().to_string())
    } else {
        let g = parse_edge_list(text)
            .with_context(|| format!("invalid edge list in {}", origin.display()))?;
        Ok(laplacian_from_edges(&g))
    }
}

pub fn read_coupling(inputs: &mut Inputs, path: &Path) -> Result<CouplingMatrix> {
    let text = inputs.read(path)?;
    parse_coupling(&text, path)
}

/// Parsed system file; `gamma` is absent when only an output matrix is
/// given.
pub struct SystemFile {
    pub a: Matrix,
    pub gamma: Option<Matrix>,
    pub f: Option<Matrix>,
    pub c_out: Option<Matrix>,
    pub c: Option<f64>,
    pub coupling: CouplingMatrix,
}

const SYSTEM_KEYS: [&str; 6] = ["A", "C", "F", "Gamma", "L", "c"];

pub fn read_system(inputs: &mut Inputs, path: &Path) -> Result<SystemFile> {
    let text = inputs.read(path)?;
    let v = parse_json(&text, path)?;
    let obj = v
        .as_object()
        .ok_or_else(|| anyhow!("{} must hold a JSON object", path.display()))?;
    if let Some(k) = obj.keys().find(|k| !SYSTEM_KEYS.contains(&k.as_str())) {
        bail!("unknown system field {k:?}; expected some of {SYSTEM_KEYS:?}");
    }
    let field = |key: &str| -> Result<Option<Matrix>> {
        obj.get(key)
            .map(|m| matrix_from_value(m).with_context(|| format!("invalid system field {key:?}")))
            .transpose()
    };
    let a = field("A")?.ok_or_else(|| anyhow!("system field \"A\" is required"))?;
    let (gamma, f, c_out) = (field("Gamma")?, field("F")?, field("C")?);
    if gamma.is_some() && (f.is_some() || c_out.is_some()) {
        bail!("give either \"Gamma\" or the output pair \"F\", \"C\", not both");
    }
    if f.is_some() && c_out.is_none() {
        bail!("system field \"F\" needs \"C\"");
    }
    let c = match obj.get("c") {
        None => None,
        Some(x) => Some(x.as_f64().ok_or_else(|| anyhow!("system field \"c\" must be a number"))?),
    };
    let coupling = match obj.get("L") {
        Some(Value::String(rel)) => {
            let target: PathBuf = path.parent().unwrap_or(Path::new(".")).join(rel);
            read_coupling(inputs, &target)?
        }
        Some(m) => validate_coupling(&matrix_from_value(m).context("invalid system field \"L\"")?)
            .context("invalid system field \"L\"")?,
        None => bail!("system field \"L\" is required"),
    };
    Ok(SystemFile {
        a,
        gamma,
        f,
        c_out,
        c,
        coupling,
    })
}
