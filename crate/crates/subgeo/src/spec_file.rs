//! Chain specification files (TOML).

use std::path::Path;

use serde::Deserialize;
use subgeo_core::certify::{drift_constants, fit_beta, DriftCertificate, StateSet};
use subgeo_core::chain::{FiniteKernel, KernelSequence, SequenceMode};
use subgeo_core::constants::DriftConstants;
use subgeo_core::ratefn::PhiSpec;
use subgeo_core::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing chain spec: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("chain spec: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] subgeo_core::Error),
}

fn schema(msg: impl Into<String>) -> SpecError {
    SpecError::Schema(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Homogeneous,
    Cycle,
    List,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub mode: ModeName,
    pub kernels: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiSection {
    pub alpha: f64,
    pub beta: Option<f64>,
    #[serde(default)]
    pub fit_beta: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub start: Option<[usize; 2]>,
    /// `ε_b` for the certificate; must not exceed the admissible maximum.
    pub eps_b: Option<f64>,
    /// `ε_b` requested of rescaled certificates.
    pub rescale_eps_b: Option<f64>,
    pub tol: Option<f64>,
    /// Horizon of the marginal check.
    pub marginal_steps: Option<usize>,
}

/// Drift constants given directly, bypassing certification.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    pub b_v: f64,
    pub c_v: f64,
    pub eps_b: f64,
    pub eps_nu: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpecFile {
    pub schema_version: u32,
    pub id: String,
    pub states: Option<usize>,
    pub v: Option<Vec<f64>>,
    pub small_set: Option<Vec<usize>>,
    pub f: Option<Vec<f64>>,
    #[serde(default = "default_xi")]
    pub xi: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    pub sequence: Option<SequenceSection>,
    pub phi: PhiSection,
    #[serde(default)]
    pub run: RunSection,
    pub certificate: Option<CertificateSection>,
}

fn default_xi() -> Vec<f64> {
    vec![0.5]
}

/// A parsed and validated chain specification.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub file: ChainSpecFile,
    pub chain: Option<ChainData>,
}

#[derive(Debug, Clone)]
pub struct ChainData {
    pub seq: KernelSequence,
    pub v: Vec<f64>,
    pub small_set: StateSet,
}

impl ChainSpec {
    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let file: ChainSpecFile = toml::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(schema(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        if file.phi.fit_beta == file.phi.beta.is_some() {
            return Err(schema(
                "[phi] needs exactly one of `beta` or `fit_beta = true`",
            ));
        }
        let chain = match &file.sequence {
            None => None,
            Some(sec) => Some(build_chain(&file, sec)?),
        };
        if chain.is_none() && file.certificate.is_none() {
            return Err(schema("need a [sequence] or a [certificate] section"));
        }
        if file.phi.fit_beta && chain.is_none() {
            return Err(schema("fit_beta needs a [sequence]"));
        }
        Ok(ChainSpec { file, chain })
    }

    pub fn id(&self) -> &str {
        &self.file.id
    }

    pub fn chain(&self) -> Result<&ChainData, SpecError> {
        self.chain
            .as_ref()
            .ok_or_else(|| schema(format!("{}: no [sequence] section", self.file.id)))
    }

    /// `φ`, with `β` fitted to the chain when requested.
    pub fn phi(&self) -> Result<PhiSpec, SpecError> {
        let alpha = self.file.phi.alpha;
        let beta = match self.file.phi.beta {
            Some(b) => b,
            None => {
                let c = self.chain()?;
                fit_beta(&c.seq, &c.v, alpha, &c.small_set)?
            }
        };
        Ok(PhiSpec::polynomial(alpha, beta)?)
    }

    pub fn certificate(&self, tol: &Tolerances) -> Result<DriftCertificate, SpecError> {
        let c = self.chain()?;
        Ok(drift_constants(
            &c.seq,
            &c.v,
            self.phi()?,
            &c.small_set,
            self.file.run.eps_b,
            tol,
        )?)
    }

    /// Constants from the `[certificate]` section when present, otherwise
    /// from certifying the chain.
    pub fn drift_constants(&self, tol: &Tolerances) -> Result<DriftConstants, SpecError> {
        match self.file.certificate {
            Some(c) => Ok(DriftConstants::new(
                self.phi()?,
                c.b_v,
                c.c_v,
                c.eps_b,
                c.eps_nu,
            )?),
            None => Ok(self.certificate(tol)?.constants),
        }
    }

    pub fn f(&self) -> Result<&[f64], SpecError> {
        self.file
            .f
            .as_deref()
            .ok_or_else(|| schema(format!("{}: no `f` values", self.file.id)))
    }

    /// Defaults with the file's `tol` applied to the relative truncation
    /// tolerances.
    pub fn tolerances(&self, override_tol: Option<f64>) -> Tolerances {
        let mut t = Tolerances::DEFAULT;
        if let Some(tol) = override_tol.or(self.file.run.tol) {
            t.dp_rel = tol;
            t.series_rel = tol;
        }
        t
    }
}

fn build_chain(file: &ChainSpecFile, sec: &SequenceSection) -> Result<ChainData, SpecError> {
    let n = file
        .states
        .ok_or_else(|| schema("`states` is required with [sequence]"))?;
    if sec.kernels.is_empty() {
        return Err(schema("[sequence] lists no kernels"));
    }
    let mut kernels = Vec::with_capacity(sec.kernels.len());
    for (k, rows) in sec.kernels.iter().enumerate() {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(schema(format!("kernel {k} is not {n} x {n}")));
        }
        kernels.push(FiniteKernel::new(rows.clone(), k, &Tolerances::DEFAULT)?);
    }
    let mode = match sec.mode {
        ModeName::Homogeneous => SequenceMode::Homogeneous,
        ModeName::Cycle => SequenceMode::Cycle,
        ModeName::List => SequenceMode::List,
    };
    let seq = KernelSequence::new(mode, kernels)?;
    let v = file
        .v
        .clone()
        .ok_or_else(|| schema("`v` is required with [sequence]"))?;
    if v.len() != n {
        return Err(schema(format!("`v` has {} entries, expected {n}", v.len())));
    }
    let small_set = match &file.small_set {
        Some(ix) => StateSet::from_indices(n, ix)?,
        None => StateSet::all(n),
    };
    if let Some(f) = &file.f {
        if f.len() != n {
            return Err(schema(format!("`f` has {} entries, expected {n}", f.len())));
        }
    }
    if let Some([x, y]) = file.run.start {
        if x >= n || y >= n {
            return Err(schema(format!("start ({x}, {y}) is outside 0..{n}")));
        }
    }
    Ok(ChainData { seq, v, small_set })
}
