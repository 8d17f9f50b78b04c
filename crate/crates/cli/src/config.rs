//! Run configuration: JSON ingestion with pointer-style validation errors,
//! and construction of the chain it describes.

use serde::{Deserialize, Serialize};
use superchain_core::reps::{cyclic_power_module, vector_rep, wedge_rep, ChainSpec};
use superchain_core::C64;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SiteConfig {
    /// "vector", "wedge:<k>" or "cyclic:<power>" (cyclic tensor power of the
    /// vector representation generated from v1⊗…⊗v1).
    pub rep: String,
    /// Evaluation point as `[re, im]`.
    pub z: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub m: usize,
    pub n: usize,
    pub sites: Vec<SiteConfig>,
    /// Diagonal twist entries as `[re, im]` pairs (Q for spectral chains, K
    /// for Gaudin systems).
    pub twist: Vec<[f64; 2]>,
    /// Excitation profile, one entry per nesting level.
    pub xi: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
}

fn c(pair: [f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

/// Parse and validate a configuration file. Errors name the offending field
/// with a JSON pointer.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("parse error: {e}")))?;
    let obj = value.as_object().ok_or_else(|| ConfigError("top level must be an object".into()))?;
    let fetch = |key: &str| -> Result<&serde_json::Value, ConfigError> {
        obj.get(key).ok_or_else(|| ConfigError(format!("missing field /{key}")))
    };
    let m = fetch("m")?
        .as_u64()
        .ok_or_else(|| ConfigError("/m must be a nonnegative integer".into()))? as usize;
    let n = fetch("n")?
        .as_u64()
        .ok_or_else(|| ConfigError("/n must be a nonnegative integer".into()))? as usize;
    if m + n == 0 {
        return Err(ConfigError("/m and /n cannot both be zero".into()));
    }
    let sites_val = fetch("sites")?
        .as_array()
        .ok_or_else(|| ConfigError("/sites must be an array".into()))?;
    if sites_val.is_empty() {
        return Err(ConfigError("/sites must be nonempty".into()));
    }
    let mut sites = Vec::with_capacity(sites_val.len());
    for (i, sv) in sites_val.iter().enumerate() {
        let site: SiteConfig = serde_json::from_value(sv.clone())
            .map_err(|e| ConfigError(format!("/sites/{i}: {e}")))?;
        parse_rep(&site.rep).map_err(|e| ConfigError(format!("/sites/{i}/rep: {e}")))?;
        sites.push(site);
    }
    let twist_val = fetch("twist")?
        .as_array()
        .ok_or_else(|| ConfigError("/twist must be an array of [re, im] pairs".into()))?;
    if twist_val.len() != m + n {
        return Err(ConfigError(format!(
            "/twist has {} entries, expected {}",
            twist_val.len(),
            m + n
        )));
    }
    let mut twist = Vec::with_capacity(twist_val.len());
    for (i, tv) in twist_val.iter().enumerate() {
        let pair: [f64; 2] = serde_json::from_value(tv.clone())
            .map_err(|e| ConfigError(format!("/twist/{i}: {e}")))?;
        twist.push(pair);
    }
    let xi_val = fetch("xi")?
        .as_array()
        .ok_or_else(|| ConfigError("/xi must be an array of nonnegative integers".into()))?;
    if xi_val.len() != (m + n).saturating_sub(1) {
        return Err(ConfigError(format!(
            "/xi has {} levels, expected {}",
            xi_val.len(),
            m + n - 1
        )));
    }
    let mut xi = Vec::with_capacity(xi_val.len());
    for (i, xv) in xi_val.iter().enumerate() {
        xi.push(
            xv.as_u64().ok_or_else(|| ConfigError(format!("/xi/{i} must be a nonnegative integer")))?
                as usize,
        );
    }
    let seed = obj.get("seed").map(|v| v.as_u64().unwrap_or(7)).unwrap_or(7);
    let tol = obj.get("tol").and_then(|v| v.as_f64()).unwrap_or(1e-9);
    if tol <= 0.0 {
        return Err(ConfigError("/tol must be positive".into()));
    }
    let samples = obj.get("samples").map(|v| v.as_u64().unwrap_or(3)).unwrap_or(3) as usize;
    if samples == 0 {
        return Err(ConfigError("/samples must be positive".into()));
    }
    Ok(RunConfig { m, n, sites, twist, xi, seed, tol, samples })
}

enum RepKind {
    Vector,
    Wedge(usize),
    Cyclic(usize),
}

fn parse_rep(rep: &str) -> Result<RepKind, String> {
    if rep == "vector" {
        return Ok(RepKind::Vector);
    }
    if let Some(rest) = rep.strip_prefix("wedge:") {
        let k: usize = rest.parse().map_err(|_| format!("bad wedge degree {rest:?}"))?;
        if k == 0 {
            return Err("wedge degree must be positive".into());
        }
        return Ok(RepKind::Wedge(k));
    }
    if let Some(rest) = rep.strip_prefix("cyclic:") {
        let p: usize = rest.parse().map_err(|_| format!("bad cyclic power {rest:?}"))?;
        if p == 0 {
            return Err("cyclic power must be positive".into());
        }
        return Ok(RepKind::Cyclic(p));
    }
    Err(format!("unknown representation {rep:?} (expected vector, wedge:<k> or cyclic:<p>)"))
}

/// Build the chain the configuration describes.
pub fn build_chain(config: &RunConfig) -> Result<ChainSpec, ConfigError> {
    let mut sites = Vec::with_capacity(config.sites.len());
    for (i, site) in config.sites.iter().enumerate() {
        let module = match parse_rep(&site.rep).map_err(|e| ConfigError(format!("/sites/{i}/rep: {e}")))? {
            RepKind::Vector => vector_rep(config.m, config.n),
            RepKind::Wedge(k) => wedge_rep(k, config.m, config.n)
                .map_err(|e| ConfigError(format!("/sites/{i}/rep: {e}")))?,
            RepKind::Cyclic(p) => cyclic_power_module(config.m, config.n, p)
                .map_err(|e| ConfigError(format!("/sites/{i}/rep: {e}")))?,
        };
        sites.push((module, c(site.z)));
    }
    let twist: Vec<C64> = config.twist.iter().map(|&t| c(t)).collect();
    ChainSpec::new(config.m, config.n, sites, twist)
        .map_err(|e| ConfigError(format!("/sites: {e}")))
}

/// Enforce pairwise distinct evaluation points (required by Gaudin systems).
pub fn require_distinct_points(config: &RunConfig) -> Result<(), ConfigError> {
    for i in 0..config.sites.len() {
        for j in (i + 1)..config.sites.len() {
            let zi = c(config.sites[i].z);
            let zj = c(config.sites[j].z);
            if (zi - zj).norm() < 1e-12 {
                return Err(ConfigError(format!(
                    "/sites/{j}/z collides with /sites/{i}/z (pairwise distinct points required)"
                )));
            }
        }
    }
    Ok(())
}
