use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::transport::TraceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Path tracing only.
    #[default]
    Pt,
    /// Path tracing followed by path-graph refinement.
    Pg,
    /// High sample-count path tracing without records.
    Reference,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pt" => Ok(Mode::Pt),
            "pg" => Ok(Mode::Pg),
            "reference" => Ok(Mode::Reference),
            _ => Err(Error::Config(format!("unknown mode '{s}', expected pt, pg or reference"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub mode: Mode,
    pub spp: u32,
    pub seed: u64,
    pub cluster_size: usize,
    pub iterations: u32,
    pub tol: f64,
    pub trace: TraceConfig,
    pub extra_direct: u32,
    /// Use the aggregated direct radiance at the first vertex.
    pub aggregate_direct: bool,
    pub dump_records: Option<PathBuf>,
    pub residual_csv: Option<PathBuf>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Pt,
            spp: 1,
            seed: 0,
            cluster_size: 32,
            iterations: 10,
            tol: 1e-3,
            trace: TraceConfig::default(),
            extra_direct: 0,
            aggregate_direct: false,
            dump_records: None,
            residual_csv: None,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.spp == 0 {
            return Err(Error::Config("spp must be at least 1".into()));
        }
        if self.cluster_size == 0 {
            return Err(Error::Config("cluster size must be at least 1".into()));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tolerance {} must be finite and non-negative", self.tol)));
        }
        if !(self.trace.rr_floor > 0.0 && self.trace.rr_floor <= 1.0) {
            return Err(Error::Config(format!("rr floor {} outside (0, 1]", self.trace.rr_floor)));
        }
        Ok(())
    }
}
