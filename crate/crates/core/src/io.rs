//! On-disk formats: JSON schemas for rule tables (1D and 2D), Hamiltonian
//! specifications and exponential fits; a binary container for MPO/MPS
//! tensors (JSON header plus raw little-endian complex-double payloads);
//! and CSV emission with round-trip-safe numeric formatting.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::expfit::ExpSum;
use crate::hamiltonians;
use crate::mpo::{Mpo, Rule, RuleTable, SiteRules};
use crate::mps::Mps;
use crate::peps::{Boundary2D, Rule2D, RuleTable2D};
use crate::tensor::{DenseTensor, C64};
use crate::timeevo::EvolutionRecord;
use crate::{Error, Result};

/// d x d matrix as nested arrays of [re, im] pairs.
pub type OpMatrix = Vec<Vec<[f64; 2]>>;

fn op_to_file(op: &DenseTensor) -> Result<OpMatrix> {
    if op.rank() != 2 || op.shape()[0] != op.shape()[1] {
        return Err(Error::Shape("rule operator must be a square matrix".into()));
    }
    let d = op.shape()[0];
    Ok((0..d)
        .map(|r| (0..d).map(|c| {
            let z = op.data()[r * d + c];
            [z.re, z.im]
        }).collect())
        .collect())
}

fn op_from_file(m: &OpMatrix) -> Result<DenseTensor> {
    let d = m.len();
    if d == 0 || m.iter().any(|row| row.len() != d) {
        return Err(Error::Config("rule operator must be a square matrix".into()));
    }
    let data: Vec<C64> = m
        .iter()
        .flatten()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    Ok(DenseTensor::from_data(&[d, d], data))
}

// ---------------------------------------------------------------------
// 1D rule tables

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleFile {
    pub left: String,
    pub right: String,
    pub weight_re: f64,
    pub weight_im: f64,
    pub op: OpMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTableFile {
    pub alphabet: Vec<String>,
    pub rules: Vec<RuleFile>,
    pub left_boundary: String,
    pub right_boundary: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, Vec<RuleFile>>,
}

fn rule_to_file(r: &Rule) -> Result<RuleFile> {
    Ok(RuleFile {
        left: r.left.clone(),
        right: r.right.clone(),
        weight_re: r.weight.re,
        weight_im: r.weight.im,
        op: op_to_file(&r.op)?,
    })
}

fn rule_from_file(r: &RuleFile) -> Result<Rule> {
    Ok(Rule {
        left: r.left.clone(),
        right: r.right.clone(),
        weight: C64::new(r.weight_re, r.weight_im),
        op: op_from_file(&r.op)?,
    })
}

pub fn rule_table_to_file(t: &RuleTable) -> Result<RuleTableFile> {
    let mut overrides = BTreeMap::new();
    for (&site, sr) in &t.overrides {
        overrides.insert(site, sr.rules.iter().map(rule_to_file).collect::<Result<_>>()?);
    }
    Ok(RuleTableFile {
        alphabet: t.alphabet.clone(),
        rules: t.rules.iter().map(rule_to_file).collect::<Result<_>>()?,
        left_boundary: t.left_boundary.clone(),
        right_boundary: t.right_boundary.clone(),
        overrides,
    })
}

pub fn rule_table_from_file(f: &RuleTableFile) -> Result<RuleTable> {
    let mut overrides = BTreeMap::new();
    for (&site, rules) in &f.overrides {
        overrides.insert(
            site,
            SiteRules {
                left_alphabet: None,
                right_alphabet: None,
                rules: rules.iter().map(rule_from_file).collect::<Result<_>>()?,
            },
        );
    }
    Ok(RuleTable {
        alphabet: f.alphabet.clone(),
        rules: f.rules.iter().map(rule_from_file).collect::<Result<_>>()?,
        left_boundary: f.left_boundary.clone(),
        right_boundary: f.right_boundary.clone(),
        overrides,
    })
}

// ---------------------------------------------------------------------
// 2D rule tables: same rule schema plus top/bottom fields

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule2DFile {
    pub left: String,
    pub right: String,
    pub top: String,
    pub bottom: String,
    pub weight_re: f64,
    pub weight_im: f64,
    pub op: OpMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary2DFile {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub top: Vec<String>,
    pub bottom: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTable2DFile {
    pub rows: usize,
    pub cols: usize,
    pub d: usize,
    pub h_labels: Vec<String>,
    pub v_labels: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub v_labels_by_col: BTreeMap<usize, Vec<String>>,
    pub site_rules: Vec<Vec<Rule2DFile>>,
    pub boundary: Boundary2DFile,
}

pub fn rule_table_2d_to_file(t: &RuleTable2D) -> Result<RuleTable2DFile> {
    let site_rules = t
        .site_rules
        .iter()
        .map(|rules| {
            rules
                .iter()
                .map(|r| {
                    Ok(Rule2DFile {
                        left: r.left.clone(),
                        right: r.right.clone(),
                        top: r.top.clone(),
                        bottom: r.bottom.clone(),
                        weight_re: r.weight.re,
                        weight_im: r.weight.im,
                        op: op_to_file(&r.op)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RuleTable2DFile {
        rows: t.rows,
        cols: t.cols,
        d: t.d,
        h_labels: t.h_labels.clone(),
        v_labels: t.v_labels.clone(),
        v_labels_by_col: t.v_labels_by_col.clone(),
        site_rules,
        boundary: Boundary2DFile {
            left: t.boundary.left.clone(),
            right: t.boundary.right.clone(),
            top: t.boundary.top.clone(),
            bottom: t.boundary.bottom.clone(),
        },
    })
}

pub fn rule_table_2d_from_file(f: &RuleTable2DFile) -> Result<RuleTable2D> {
    let site_rules = f
        .site_rules
        .iter()
        .map(|rules| {
            rules
                .iter()
                .map(|r| {
                    Ok(Rule2D {
                        left: r.left.clone(),
                        right: r.right.clone(),
                        top: r.top.clone(),
                        bottom: r.bottom.clone(),
                        weight: C64::new(r.weight_re, r.weight_im),
                        op: op_from_file(&r.op)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RuleTable2D {
        rows: f.rows,
        cols: f.cols,
        d: f.d,
        h_labels: f.h_labels.clone(),
        v_labels: f.v_labels.clone(),
        v_labels_by_col: f.v_labels_by_col.clone(),
        site_rules,
        boundary: Boundary2D {
            left: f.boundary.left.clone(),
            right: f.boundary.right.clone(),
            top: f.boundary.top.clone(),
            bottom: f.boundary.bottom.clone(),
        },
    })
}

// ---------------------------------------------------------------------
// Hamiltonian specification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ModelParams {
    pub name: String,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Declarative model description consumed by the command-line driver.
///
/// `kind` selects the builder: "nearest_neighbor", "fixed_range" (uses
/// `range`), "exp_decay" (uses `beta`), "exp_sum" (uses `b_coeffs` as
/// prefactors and `alpha_coeffs` as decay bases), "general_two_body"
/// (uses `couplings`, row-major upper-triangular), or "model" with a
/// named physical model in `model` (ising, xxz, rydberg, spin_glass).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub kind: String,
    pub n_sites: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelParams>,
}

fn default_d() -> usize {
    2
}

fn missing(field: &str, kind: &str) -> Error {
    Error::Config(format!("field `{field}` is required for kind `{kind}`"))
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<Mpo> {
        let n = self.n_sites;
        let x = hamiltonians::pauli('X');
        let z = hamiltonians::pauli('Z');
        match self.kind.as_str() {
            "nearest_neighbor" => hamiltonians::nearest_neighbor(&x, &x, n),
            "fixed_range" => {
                let r = self.range.ok_or_else(|| missing("range", "fixed_range"))?;
                hamiltonians::fixed_range(&x, &x, r, n)
            }
            "exp_decay" => {
                let beta = self.beta.ok_or_else(|| missing("beta", "exp_decay"))?;
                hamiltonians::exp_decay(&x, &x, beta, n, false)
            }
            "exp_sum" => {
                let lambdas = self
                    .b_coeffs
                    .as_ref()
                    .ok_or_else(|| missing("b_coeffs", "exp_sum"))?;
                let betas = self
                    .alpha_coeffs
                    .as_ref()
                    .ok_or_else(|| missing("alpha_coeffs", "exp_sum"))?;
                if lambdas.len() != betas.len() {
                    return Err(Error::Config(
                        "b_coeffs and alpha_coeffs must have equal length".into(),
                    ));
                }
                let es = ExpSum {
                    terms: lambdas.iter().cloned().zip(betas.iter().cloned()).collect(),
                };
                crate::expfit::expsum_mpo(&es, &z, &z, n)
            }
            "general_two_body" => {
                let c = self
                    .couplings
                    .as_ref()
                    .ok_or_else(|| missing("couplings", "general_two_body"))?;
                if c.len() != n * (n - 1) / 2 {
                    return Err(Error::Config(format!(
                        "couplings must hold n(n-1)/2 = {} upper-triangular entries",
                        n * (n - 1) / 2
                    )));
                }
                let zz = crate::tensor::kron(&z, &z);
                let mut full = vec![0.0; n * n];
                let mut it = c.iter();
                for i in 0..n {
                    for j in i + 1..n {
                        full[i * n + j] = *it.next().unwrap();
                    }
                }
                hamiltonians::fixed_type(&zz, &full, &[], 2, n)
            }
            "model" => {
                let m = self.model.as_ref().ok_or_else(|| missing("model", "model"))?;
                let need = |v: Option<f64>, f: &str| {
                    v.ok_or_else(|| {
                        Error::Config(format!("model `{}` needs field `{f}`", m.name))
                    })
                };
                match m.name.as_str() {
                    "ising" => hamiltonians::ising(n, need(m.b, "B")?),
                    "xxz" => {
                        hamiltonians::xxz(n, need(m.theta, "theta")?, need(m.delta, "delta")?)
                    }
                    "rydberg" => {
                        let positions = match (self.positions.as_ref(), m.sigma) {
                            (Some(p), _) => Some(p.clone()),
                            (None, Some(sigma)) => Some(hamiltonians::randomize_positions(
                                n,
                                sigma,
                                m.seed.unwrap_or(0),
                            )),
                            (None, None) => None,
                        };
                        hamiltonians::rydberg(
                            n,
                            need(m.omega, "omega")?,
                            need(m.delta, "delta")?,
                            need(m.beta0, "beta0")?,
                            positions.as_deref(),
                        )
                    }
                    "spin_glass" => {
                        hamiltonians::spin_glass(n, need(m.b, "B")?, m.seed.unwrap_or(0))
                    }
                    other => Err(Error::Config(format!("unknown model `{other}`"))),
                }
            }
            other => Err(Error::Config(format!("unknown hamiltonian kind `{other}`"))),
        }
    }
}

// ---------------------------------------------------------------------
// exponential sums

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSumEntry {
    pub lambda: f64,
    pub beta: f64,
}

pub fn expsum_to_file(es: &ExpSum) -> Vec<ExpSumEntry> {
    es.terms
        .iter()
        .map(|&(lambda, beta)| ExpSumEntry { lambda, beta })
        .collect()
}

pub fn expsum_from_file(entries: &[ExpSumEntry]) -> ExpSum {
    ExpSum {
        terms: entries.iter().map(|e| (e.lambda, e.beta)).collect(),
    }
}

// ---------------------------------------------------------------------
// MPO/MPS container: one-line JSON header, then raw little-endian
// complex-double payloads in site order

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerHeader {
    /// "mpo" or "mps".
    pub object: String,
    pub shapes: Vec<Vec<usize>>,
    pub dtype: String,
    pub endianness: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn write_container(
    path: &Path,
    object: &str,
    sites: &[DenseTensor],
    seed: Option<u64>,
) -> Result<()> {
    let header = ContainerHeader {
        object: object.into(),
        shapes: sites.iter().map(|t| t.shape().to_vec()).collect(),
        dtype: "complex128".into(),
        endianness: "little".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
    };
    let mut out = serde_json::to_string(&header)?.into_bytes();
    out.push(b'\n');
    for t in sites {
        for z in t.data() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn read_container(path: &Path, object: &str) -> Result<Vec<DenseTensor>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Config("container is missing its header line".into()))?;
    let header: ContainerHeader = serde_json::from_slice(&bytes[..nl])?;
    if header.object != object {
        return Err(Error::Config(format!(
            "container holds `{}`, expected `{object}`",
            header.object
        )));
    }
    if header.dtype != "complex128" || header.endianness != "little" {
        return Err(Error::Config("unsupported container dtype or endianness".into()));
    }
    let mut offset = nl + 1;
    let mut sites = Vec::with_capacity(header.shapes.len());
    for shape in &header.shapes {
        let count: usize = shape.iter().product();
        let need = count * 16;
        if offset + need > bytes.len() {
            return Err(Error::Config("container payload is truncated".into()));
        }
        let data: Vec<C64> = (0..count)
            .map(|k| {
                let at = offset + k * 16;
                let re = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
                let im = f64::from_le_bytes(bytes[at + 8..at + 16].try_into().unwrap());
                C64::new(re, im)
            })
            .collect();
        sites.push(DenseTensor::from_data(shape, data));
        offset += need;
    }
    if offset != bytes.len() {
        return Err(Error::Config("container has trailing bytes".into()));
    }
    Ok(sites)
}

pub fn write_mpo(path: &Path, op: &Mpo, seed: Option<u64>) -> Result<()> {
    write_container(path, "mpo", &op.sites, seed)
}

pub fn read_mpo(path: &Path) -> Result<Mpo> {
    Ok(Mpo { sites: read_container(path, "mpo")? })
}

pub fn write_mps(path: &Path, state: &Mps, seed: Option<u64>) -> Result<()> {
    write_container(path, "mps", &state.sites, seed)
}

pub fn read_mps(path: &Path) -> Result<Mps> {
    Ok(Mps { sites: read_container(path, "mps")? })
}

// ---------------------------------------------------------------------
// CSV emission

/// 17 significant digits: enough to round-trip any double exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn truncation_study_csv(rows: &[crate::compress::TruncationRow]) -> String {
    let mut out = String::from("target_D, op_error, gs_fidelity_error, energy_rel_error, converged\n");
    for r in rows {
        out.push_str(&format!(
            "{}, {}, {}, {}, {}\n",
            r.target_d,
            fmt_f64(r.op_error),
            fmt_f64(r.gs_fidelity_error),
            fmt_f64(r.energy_rel_error),
            r.converged
        ));
    }
    out
}

/// One row per time step: t, norm, energy, then one column per requested
/// correlation pair.
pub fn evolution_csv(rec: &EvolutionRecord, pair_labels: &[String]) -> String {
    let mut out = String::from("t, norm, energy");
    for label in pair_labels {
        out.push_str(", ");
        out.push_str(label);
    }
    out.push('\n');
    for (k, &t) in rec.times.iter().enumerate() {
        out.push_str(&fmt_f64(t));
        out.push_str(", ");
        out.push_str(&fmt_f64(rec.norms[k]));
        out.push_str(", ");
        out.push_str(&fmt_f64(rec.energies[k]));
        for row in &rec.correlations {
            out.push_str(", ");
            out.push_str(&fmt_f64(row[k]));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------
// JSON result records

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeTracePoint {
    #[serde(rename = "D_cut")]
    pub d_cut: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeResult {
    pub model: String,
    pub n: usize,
    #[serde(rename = "D_exact")]
    pub d_exact: usize,
    pub trace: Vec<ProbeTracePoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutRankFile {
    pub cut: usize,
    pub schmidt_rank: usize,
    pub mpo_bond: usize,
    pub borderline: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankReportFile {
    pub per_cut: Vec<CutRankFile>,
    pub tolerance: f64,
    pub optimal: bool,
}

impl From<&crate::optimality::RankReport> for RankReportFile {
    fn from(r: &crate::optimality::RankReport) -> Self {
        RankReportFile {
            per_cut: r
                .per_cut
                .iter()
                .map(|c| CutRankFile {
                    cut: c.cut,
                    schmidt_rank: c.schmidt_rank,
                    mpo_bond: c.mpo_bond,
                    borderline: c.borderline,
                })
                .collect(),
            tolerance: r.tolerance,
            optimal: r.optimal,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundResultFile {
    pub energy: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub chi: usize,
    pub seed: u64,
}

/// Serialize any JSON-compatible record with a stable field order and a
/// trailing newline, so identical runs produce byte-identical files.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    let text = serde_json::to_string_pretty(value)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
