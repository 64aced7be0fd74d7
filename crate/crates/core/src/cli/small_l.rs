use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{prepare_output, Status};
use crate::error::{config, Result};
use crate::experiments::{neumann_small_l_check, write_json, SmallLReport};
use crate::numfmt::json_f64;

fn default_t() -> f64 {
    1.0
}
fn default_ls() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.5]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallLConfig {
    #[serde(default = "default_t", serialize_with = "json_f64")]
    pub t: f64,
    #[serde(rename = "Ls", default = "default_ls")]
    pub ls: Vec<f64>,
    pub report: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallLOutput {
    pub config: SmallLConfig,
    pub checks: Vec<SmallLReport>,
    pub passed: bool,
}

pub fn run(cfg: &SmallLConfig) -> Result<Status> {
    if cfg.ls.is_empty() {
        return Err(config("Ls must not be empty"));
    }
    let checks = cfg
        .ls
        .iter()
        .map(|&l| neumann_small_l_check(cfg.t, l))
        .collect::<Result<Vec<_>>>()?;
    for c in &checks {
        println!(
            "{} t={} L={} second_moment={:.6e} lower_bound={:.6e}",
            if c.passes { "PASS" } else { "FAIL" },
            c.t,
            c.l,
            c.second_moment,
            c.lower_bound
        );
    }
    let passed = checks.iter().all(|c| c.passes);
    prepare_output(&cfg.report)?;
    write_json(
        &SmallLOutput {
            config: cfg.clone(),
            checks,
            passed,
        },
        &cfg.report,
    )?;
    Ok(Status::from_pass(passed))
}
