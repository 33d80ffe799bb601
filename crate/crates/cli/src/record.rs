//! Persistent fixed-point documents: JSON-shaped, schema-checked on
//! read, carrying enough provenance (version + config) to seed future
//! continuations and to re-verify the recorded residual.

use std::fs;
use std::path::{Path, PathBuf};

use renormlab_core as core;
use renormlab_core::{
    pair_dist, renormalize, ChebPoly, FixedPointRecord, Pair, PolyDiffeo, SpectralReport,
};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SigmaSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub config: RunConfig,
}

/// On-disk form of a solved fixed point together with its linearization
/// summary. Unknown fields are rejected so a stale or foreign document
/// fails loudly instead of deserializing into nonsense.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointDocument {
    pub alpha: f64,
    pub sigma: SigmaSpec,
    pub degree: usize,
    pub t_star: f64,
    pub coeffs: Vec<f64>,
    pub residual: f64,
    /// (re, im) at the highest truncation degree, modulus-descending.
    pub eigenvalues: Vec<(f64, f64)>,
    pub delta: f64,
    pub expanding_count: usize,
    pub provenance: Provenance,
}

impl FixedPointDocument {
    pub fn new(record: &FixedPointRecord, report: &SpectralReport, config: &RunConfig) -> Self {
        FixedPointDocument {
            alpha: record.alpha,
            sigma: SigmaSpec {
                name: config.sigma.name.clone(),
                period: record.sigma.period(),
            },
            degree: record.degree,
            t_star: record.t_star,
            coeffs: record.phi_star.coeffs().to_vec(),
            residual: record.residual,
            eigenvalues: report.eigenvalues.clone(),
            delta: report.delta,
            expanding_count: report.expanding_count,
            provenance: Provenance {
                version: env!("CARGO_PKG_VERSION").into(),
                config: config.clone(),
            },
        }
    }

    /// Deterministic document path under the configured output directory.
    pub fn path_for(config: &RunConfig) -> PathBuf {
        config.out_dir.join(format!(
            "fixed_point_alpha{:.4}_deg{}.json",
            config.alpha, config.degree
        ))
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
            }
        }
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| format!("serializing document: {e}"))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
    }

    /// Read and schema-check; the error names the offending field.
    pub fn read(path: &Path) -> Result<Self, String> {
        let text =
            fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("document schema: {e}"))
    }

    /// Rebuild the solver record; a corrupted coefficient list fails the
    /// diffeomorphism validation here.
    pub fn to_record(&self) -> Result<FixedPointRecord, String> {
        let sigma = match (self.sigma.name.as_str(), self.sigma.period) {
            ("doubling", 2) => core::UnimodalPermutation::doubling(),
            (name, period) => {
                return Err(format!(
                    "document names combinatorics '{name}' of period {period}; only doubling/2 is known"
                ))
            }
        };
        let phi = PolyDiffeo::new(ChebPoly::from_coeffs(self.coeffs.clone()))
            .map_err(|e| format!("document coeffs: {e}"))?;
        Ok(FixedPointRecord {
            alpha: self.alpha,
            t_star: self.t_star,
            phi_star: phi,
            residual: self.residual,
            degree: self.degree,
            sigma,
        })
    }

    /// One more operator application measured in the pair metric: the
    /// round-trip displacement of the recorded fixed point.
    pub fn reverify(&self) -> Result<f64, String> {
        let record = self.to_record()?;
        let pair = record.pair().map_err(|e| e.to_string())?;
        let (next, _) = renormalize(&pair, &record.sigma).map_err(|e| e.to_string())?;
        Ok(pair_dist(&next, &pair))
    }
}

/// Rebuild the solved pair directly from a document.
pub fn pair_of_document(doc: &FixedPointDocument) -> Result<Pair, String> {
    let record = doc.to_record()?;
    record.pair().map_err(|e| e.to_string())
}
