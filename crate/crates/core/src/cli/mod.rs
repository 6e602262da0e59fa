//! The `wfs` command-line front end: one JSON configuration per run, flags
//! only for command selection and output control.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::conditions::{check_condition, ConditionId, ConditionReport};
use crate::error::Error;
use crate::exponents::ExponentSet;
use crate::functions::FunctionSpec;
use crate::grid::{Cube, CubeFamily, GridFunction, GridSpec};
use crate::operators::RieszKernel;
use crate::spaces::{
    amalgam_norm, bmo_ls_norm, bmo_norm, lp_norm, lp_norm_on, morrey_norm, weak_amalgam_norm,
    weak_lp_norm, weak_morrey_norm, NormId, NormResult,
};
use crate::verify::{
    find_preset, run_verification, CubeFamilySpec, EllSpec, FamilyKind, FunctionFamily, TheoremId,
    VerificationReport, VerifyConfig, WeightTriple, DEFAULT_BAND, SCHEMA_VERSION,
};
use crate::weights::{Weight, WeightSpec};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "WFS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wfs", version, about = "Weighted fractional integral toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one norm functional on a function.
    Norm(CommonArgs),
    /// Apply the Riesz potential or a commutator and emit the result as CSV.
    Apply(CommonArgs),
    /// Scan a two-weight condition over the cube family.
    CheckCondition {
        #[command(flatten)]
        common: CommonArgs,
        /// Condition id, overriding the configuration.
        #[arg(long)]
        condition: Option<String>,
        /// Keep the per-scale suprema in the report.
        #[arg(long)]
        scale_trend: bool,
    },
    /// Estimate the best observed constant of a theorem.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Repeat the run on the grid with twice the resolution.
        #[arg(long)]
        refine: bool,
    },
    /// Run `verify` over the cartesian product of parameter lists.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        refine: bool,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit CSV instead of JSON.
    #[arg(long)]
    pub csv: bool,
    /// Seed, overriding the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Weight selection: a named preset, explicit constructors, or both (the
/// explicit ones override the preset).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<WeightSpec>,
}

impl WeightsConfig {
    pub fn resolve(&self, e: &ExponentSet) -> crate::Result<(String, WeightTriple)> {
        let (mut id, mut t) = match &self.preset {
            Some(p) => {
                let preset = find_preset(p, e)?;
                (preset.id, preset.weights)
            }
            None => ("unit".to_string(), WeightTriple::unit()),
        };
        let mut custom = false;
        for (slot, spec) in [
            (&mut t.w, &self.w),
            (&mut t.nu, &self.nu),
            (&mut t.mu, &self.mu),
        ] {
            if let Some(s) = spec {
                *slot = s.clone();
                custom = true;
            }
        }
        if custom {
            id = format!("{id}+custom");
        }
        Ok((id, t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSection {
    pub id: NormId,
    pub f: FunctionSpec,
    /// Integrability exponent; defaults to `exponents.p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::exponents::ext_real::option"
    )]
    pub s: Option<f64>,
    /// Restrict `lp` and `weak_lp` to one cube.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restrict: Option<Cube>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Riesz,
    Commutator,
    CommutatorDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplySection {
    pub operator: OperatorKind,
    pub f: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSection {
    pub id: ConditionId,
}

fn default_band() -> f64 {
    DEFAULT_BAND
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub theorem_id: TheoremId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<FunctionSpec>,
    #[serde(default = "default_band")]
    pub band: f64,
}

fn yes() -> bool {
    true
}

/// Parameter lists for `sweep`; an empty list keeps the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub kappa: Vec<f64>,
    #[serde(default)]
    pub preset: Vec<String>,
    #[serde(default)]
    pub seed: Vec<u64>,
    /// Recompute `q` from `1/q = 1/p − γ/n` for each combination.
    #[serde(default = "yes")]
    pub sobolev: bool,
}

fn default_family() -> FunctionFamily {
    FunctionFamily::new(FamilyKind::Indicators, 20)
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub seed: u64,
    pub exponents: ExponentSet,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default = "default_family")]
    pub family: FunctionFamily,
    #[serde(default)]
    pub cube_family: CubeFamilySpec,
    #[serde(default)]
    pub ell_grid: EllSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apply: Option<ApplySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("malformed configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read configuration {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> crate::Result<()> {
        self.grid.validate()?;
        self.exponents.validate(self.grid.dim)?;
        self.weights.resolve(&self.exponents)?;
        Ok(())
    }

    fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        s.as_ref()
            .ok_or_else(|| CliError::Config(format!("the configuration has no '{name}' section")))
    }

    fn weights(&self) -> crate::Result<(Weight, Weight, Weight)> {
        let (_, t) = self.weights.resolve(&self.exponents)?;
        Ok((
            t.w.build(self.grid)?,
            t.nu.build(self.grid)?,
            t.mu.build(self.grid)?,
        ))
    }

    fn cubes(&self) -> CubeFamily {
        self.cube_family.build(&self.grid)
    }

    /// The verify configuration this run describes.
    pub fn verify_config(&self) -> Result<VerifyConfig, CliError> {
        let v = Self::section(&self.verify, "verify")?;
        let (preset_id, weights) = self.weights.resolve(&self.exponents)?;
        Ok(VerifyConfig {
            theorem_id: v.theorem_id,
            grid: self.grid,
            exponents: self.exponents.clone(),
            weights,
            preset_id,
            family: self.family.clone(),
            cubes: self.cube_family,
            ell: self.ell_grid.clone(),
            symbol: v.b.clone(),
            seed: self.seed,
            band: v.band,
        })
    }
}

/// Emitted JSON documents carry the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub result: T,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(e) if e.is_config() => EXIT_CONFIG,
            CliError::Core(_) => EXIT_NUMERIC,
            CliError::Output(_) => EXIT_CONFIG,
        }
    }
}

/// Applies `WFS_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{THREADS_ENV} must be a positive integer, got '{v}'"
        ))
    })?;
    // A second initialization in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn envelope<T: Serialize>(command: &str, cfg: &RunConfig, result: T) -> Result<String, CliError> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        config: cfg.clone(),
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn load(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Runs one parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Norm(common) => {
            let cfg = load(common)?;
            let r = cmd_norm(&cfg)?;
            let text = if common.csv {
                format!(
                    "norm_id,value\n{},{}\n",
                    serde_json::to_value(r.norm_id)
                        .unwrap()
                        .as_str()
                        .unwrap_or(""),
                    r.value
                )
            } else {
                envelope("norm", &cfg, &r)?
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Apply(common) => {
            let cfg = load(common)?;
            let g = cmd_apply(&cfg)?;
            emit(common.out.as_deref(), &g.to_csv())
        }
        Command::CheckCondition {
            common,
            condition,
            scale_trend,
        } => {
            let mut cfg = load(common)?;
            if let Some(id) = condition {
                cfg.condition = Some(ConditionSection { id: id.parse()? });
            }
            let mut r = cmd_check_condition(&cfg)?;
            if !scale_trend {
                r.scale_trend.clear();
            }
            let text = if common.csv {
                let mut s = String::from("scale,sup,count\n");
                for p in &r.scale_trend {
                    let _ = writeln!(s, "{},{},{}", p.scale, p.sup, p.count);
                }
                s
            } else {
                envelope("check-condition", &cfg, &r)?
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Verify { common, refine } => {
            let cfg = load(common)?;
            let r = cmd_verify(&cfg, *refine)?;
            let text = if common.csv {
                ratios_csv(&r)
            } else {
                envelope("verify", &cfg, &r)?
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Sweep { common, refine } => {
            let cfg = load(common)?;
            emit(common.out.as_deref(), &cmd_sweep(&cfg, *refine)?)
        }
    }
}

pub fn cmd_norm(cfg: &RunConfig) -> Result<NormResult, CliError> {
    let n = RunConfig::section(&cfg.norm, "norm")?;
    let (w, nu, mu) = cfg.weights()?;
    let f = n.f.rasterize(cfg.grid)?;
    let e = &cfg.exponents;
    let p = n.p.unwrap_or(e.p);
    let need = |v: Option<f64>, fallback: crate::Result<f64>| v.map_or(fallback, Ok);
    let r = match n.id {
        NormId::Lp => {
            let v = match &n.restrict {
                Some(q) => lp_norm_on(&f, &w, p, q)?,
                None => lp_norm(&f, &w, p)?,
            };
            simple(NormId::Lp, v, p)
        }
        NormId::WeakLp => simple(
            NormId::WeakLp,
            weak_lp_norm(&f, &w, p, n.restrict.as_ref())?,
            p,
        ),
        NormId::Morrey => morrey_norm(&f, &nu, &w, p, need(n.kappa, e.kappa())?, &cfg.cubes())?,
        NormId::WeakMorrey => weak_morrey_norm(&f, &w, p, need(n.kappa, e.kappa())?, &cfg.cubes())?,
        NormId::Amalgam => amalgam_norm(
            &f,
            &nu,
            &w,
            &mu,
            p,
            need(n.s, e.s())?,
            need(n.alpha, e.alpha())?,
            &cfg.ell_grid.build(&cfg.grid),
        )?,
        NormId::WeakAmalgam => weak_amalgam_norm(
            &f,
            &w,
            &mu,
            p,
            need(n.s, e.s())?,
            need(n.alpha, e.alpha())?,
            &cfg.ell_grid.build(&cfg.grid),
        )?,
        NormId::Bmo => bmo_norm(&f, &cfg.cubes())?,
        NormId::BmoLs => bmo_ls_norm(&f, &mu, need(n.s, e.s())?, &cfg.ell_grid.build(&cfg.grid))?,
    };
    Ok(r)
}

fn simple(id: NormId, value: f64, p: f64) -> NormResult {
    let mut params = std::collections::BTreeMap::new();
    params.insert("p".to_string(), serde_json::Value::from(p));
    NormResult {
        value,
        norm_id: id,
        params,
        family_meta: Default::default(),
        witness: None,
    }
}

pub fn cmd_apply(cfg: &RunConfig) -> Result<GridFunction, CliError> {
    let a = RunConfig::section(&cfg.apply, "apply")?;
    let kernel = RieszKernel::new(cfg.grid, cfg.exponents.gamma)?;
    let f = a.f.rasterize(cfg.grid)?;
    let symbol = || -> Result<GridFunction, CliError> {
        let b = a.b.as_ref().ok_or_else(|| {
            CliError::Config("commutators need a symbol 'b' in the apply section".into())
        })?;
        Ok(b.rasterize(cfg.grid)?)
    };
    Ok(match a.operator {
        OperatorKind::Riesz => kernel.apply(&f)?,
        OperatorKind::Commutator => kernel.commutator(&symbol()?, &f, a.m.unwrap_or(1))?,
        OperatorKind::CommutatorDifference => kernel.commutator_difference(&symbol()?, &f)?,
    })
}

pub fn cmd_check_condition(cfg: &RunConfig) -> Result<ConditionReport, CliError> {
    let c = RunConfig::section(&cfg.condition, "condition")?;
    let (w, nu, _) = cfg.weights()?;
    let kernel = match c.id {
        ConditionId::SawyerDagger => Some(RieszKernel::new(cfg.grid, cfg.exponents.gamma)?),
        _ => None,
    };
    Ok(check_condition(
        c.id,
        &w,
        &nu,
        &cfg.exponents,
        kernel.as_ref(),
        &cfg.cubes(),
    )?)
}

pub fn cmd_verify(cfg: &RunConfig, refine: bool) -> Result<VerificationReport, CliError> {
    Ok(run_verification(&cfg.verify_config()?, refine)?)
}

/// Ratio table of a verification report.
pub fn ratios_csv(r: &VerificationReport) -> String {
    let mut s = String::from("index,ratio\n");
    for (i, v) in r.ratios.iter().enumerate() {
        match v {
            Some(v) => {
                let _ = writeln!(s, "{i},{v}");
            }
            None => {
                let _ = writeln!(s, "{i},");
            }
        }
    }
    s
}

pub fn cmd_sweep(cfg: &RunConfig, refine: bool) -> Result<String, CliError> {
    let sw = RunConfig::section(&cfg.sweep, "sweep")?;
    let base = &cfg.exponents;
    let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
    let gammas = or(&sw.gamma, base.gamma);
    let ps = or(&sw.p, base.p);
    let kappas: Vec<Option<f64>> = if sw.kappa.is_empty() {
        vec![base.kappa]
    } else {
        sw.kappa.iter().map(|k| Some(*k)).collect()
    };
    let presets: Vec<Option<String>> = if sw.preset.is_empty() {
        vec![cfg.weights.preset.clone()]
    } else {
        sw.preset.iter().cloned().map(Some).collect()
    };
    let seeds = if sw.seed.is_empty() {
        vec![cfg.seed]
    } else {
        sw.seed.clone()
    };

    let mut out = String::from(
        "theorem_id,gamma,p,q,kappa,preset_id,seed,samples_used,c_obs,trend_growing,c_obs_2n,stable\n",
    );
    for &gamma in &gammas {
        for &p in &ps {
            for &kappa in &kappas {
                for preset in &presets {
                    for &seed in &seeds {
                        let mut run = cfg.clone();
                        let mut e = ExponentSet {
                            gamma,
                            p,
                            kappa,
                            ..base.clone()
                        };
                        if sw.sobolev {
                            e.q = ExponentSet::sobolev(gamma, p, cfg.grid.dim)?.q;
                        }
                        e.validate(cfg.grid.dim)?;
                        run.exponents = e;
                        run.weights.preset = preset.clone();
                        run.seed = seed;
                        let r = cmd_verify(&run, refine)?;
                        let fmt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{},{},{},{},{},{}",
                            r.theorem_id,
                            gamma,
                            p,
                            r.params.q,
                            fmt(kappa),
                            r.preset_id,
                            seed,
                            r.samples_used,
                            fmt(r.c_obs),
                            r.trend_growing,
                            fmt(r.refinement.and_then(|x| x.c_obs_2n)),
                            r.refinement.map_or(String::new(), |x| x.stable.to_string()),
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}
