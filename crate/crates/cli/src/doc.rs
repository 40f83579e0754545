//! JSON document written by `fit` and read back by `filter`, `premium` and
//! `simulate`.

use anyhow::{bail, Context};
use rsbekk::estimation::EstimationResult;
use rsbekk::{ModelParams, ModelSpec};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub t_stat: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub model: ModelSpec,
    pub n_obs: usize,
    pub loglik: f64,
    pub converged: bool,
    pub n_iterations: usize,
    pub n_restarts: usize,
    /// Free parameters with robust standard errors.
    pub parameters: Vec<ParamEntry>,
    /// Full parameter blocks.
    pub params: ModelParams,
}

impl ResultDocument {
    pub fn new(result: &EstimationResult, n_obs: usize) -> Self {
        let values = result.values();
        let parameters = result
            .param_names
            .iter()
            .zip(&values)
            .enumerate()
            .map(|(i, (name, &value))| {
                let se = result.std_errors.as_ref().map(|s| s[i]);
                ParamEntry {
                    name: name.clone(),
                    value,
                    std_error: se,
                    t_stat: se.filter(|s| *s > 0.0).map(|s| value / s),
                }
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            model: result.spec,
            n_obs,
            loglik: result.loglik,
            converged: result.converged,
            n_iterations: result.n_iterations,
            n_restarts: result.n_restarts,
            parameters,
            params: result.params,
        }
    }

    pub fn read(path: &std::path::Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: Self =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if doc.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {}", doc.schema_version);
        }
        Ok(doc)
    }
}
