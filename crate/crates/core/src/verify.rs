//! Theorem-level harness: for a family of test functions it computes the
//! ratio of the target (weak) norm of `T f` to the source norm of `f`, for
//! `T` the Riesz potential or a commutator, and reports the largest ratio,
//! its per-scale breakdown and its stability under one grid refinement.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{check_condition, ConditionId, ConditionReport};
use crate::error::{Error, Result};
use crate::exponents::ExponentSet;
use crate::functions::{power_cell_average, smooth_bump, FunctionSpec};
use crate::grid::{default_ell_grid, make_cube_family, Cube, CubeFamily, GridFunction, GridSpec};
use crate::operators::RieszKernel;
use crate::spaces::{
    amalgam_norm, bmo_ls_norm, bmo_norm, lp_norm, morrey_norm, weak_amalgam_norm, weak_lp_norm,
    weak_morrey_norm,
};
use crate::trend::{scale_trend, trend_growing, ScalePoint};
use crate::weights::{ainfty_fit, AinftyFit, Weight, WeightSpec};

pub const SCHEMA_VERSION: u32 = 1;
/// Default refinement band: `|C(2N)/C(N) − 1| ≤ 0.2`.
pub const DEFAULT_BAND: f64 = 0.2;
/// Test functions live on a lattice of this many cells per axis covering
/// the middle half of the domain, so every grid resolves them identically.
pub const LATTICE: usize = 32;
const SIZE_CLASSES: [usize; 5] = [1, 2, 4, 8, 16];
const AINFTY_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "WeakLp_I")]
    WeakLpI,
    #[serde(rename = "WeakLp_Comm")]
    WeakLpComm,
    #[serde(rename = "Morrey_I")]
    MorreyI,
    #[serde(rename = "Amalgam_I")]
    AmalgamI,
    #[serde(rename = "Morrey_Comm")]
    MorreyComm,
    #[serde(rename = "Amalgam_Comm")]
    AmalgamComm,
    #[serde(rename = "Endpoint_BMO")]
    EndpointBmo,
    #[serde(rename = "Endpoint_BMOLs")]
    EndpointBmoLs,
    #[serde(rename = "Morrey_CommM")]
    MorreyCommM,
    #[serde(rename = "Amalgam_CommM")]
    AmalgamCommM,
}

/// Operator a theorem is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Riesz,
    Commutator(u32),
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::WeakLpI,
        TheoremId::WeakLpComm,
        TheoremId::MorreyI,
        TheoremId::AmalgamI,
        TheoremId::MorreyComm,
        TheoremId::AmalgamComm,
        TheoremId::EndpointBmo,
        TheoremId::EndpointBmoLs,
        TheoremId::MorreyCommM,
        TheoremId::AmalgamCommM,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::WeakLpI => "WeakLp_I",
            TheoremId::WeakLpComm => "WeakLp_Comm",
            TheoremId::MorreyI => "Morrey_I",
            TheoremId::AmalgamI => "Amalgam_I",
            TheoremId::MorreyComm => "Morrey_Comm",
            TheoremId::AmalgamComm => "Amalgam_Comm",
            TheoremId::EndpointBmo => "Endpoint_BMO",
            TheoremId::EndpointBmoLs => "Endpoint_BMOLs",
            TheoremId::MorreyCommM => "Morrey_CommM",
            TheoremId::AmalgamCommM => "Amalgam_CommM",
        }
    }

    fn operator(&self, e: &ExponentSet) -> OpKind {
        match self {
            TheoremId::WeakLpComm | TheoremId::MorreyComm | TheoremId::AmalgamComm => {
                OpKind::Commutator(1)
            }
            TheoremId::MorreyCommM | TheoremId::AmalgamCommM => {
                OpKind::Commutator(e.m.unwrap_or(2))
            }
            _ => OpKind::Riesz,
        }
    }

    fn is_commutator(&self) -> bool {
        matches!(
            self,
            TheoremId::WeakLpComm
                | TheoremId::MorreyComm
                | TheoremId::AmalgamComm
                | TheoremId::MorreyCommM
                | TheoremId::AmalgamCommM
        )
    }

    /// Exponent relations a run of this theorem requires.
    pub fn validate(&self, e: &ExponentSet, dim: usize) -> Result<()> {
        e.validate(dim)?;
        match self {
            TheoremId::WeakLpI | TheoremId::WeakLpComm => Ok(()),
            TheoremId::MorreyI | TheoremId::MorreyComm | TheoremId::MorreyCommM => {
                e.check_morrey_range()
            }
            TheoremId::AmalgamI | TheoremId::AmalgamComm | TheoremId::AmalgamCommM => {
                e.check_amalgam_range()
            }
            TheoremId::EndpointBmo => e.check_endpoint_kappa(),
            TheoremId::EndpointBmoLs => {
                e.check_endpoint_s()?;
                let (a, s) = (e.alpha()?, e.s()?);
                if e.p <= a && a <= s {
                    Ok(())
                } else {
                    Err(Error::ExponentRelation(format!(
                        "amalgam exponents must satisfy p <= alpha <= s, got p = {}, alpha = {a}, s = {s}",
                        e.p
                    )))
                }
            }
        }?;
        if let OpKind::Commutator(m) = self.operator(e) {
            let needs_higher = matches!(self, TheoremId::MorreyCommM | TheoremId::AmalgamCommM);
            if needs_higher && m < 2 {
                return Err(Error::InvalidParameter(format!(
                    "{} is the higher-order commutator run and needs m >= 2, got {m}",
                    self.as_str()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown theorem id '{s}'; expected one of {}",
                    TheoremId::ALL.map(|t| t.as_str()).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Indicators of random lattice boxes.
    Indicators,
    /// Random values on the lattice cells of a random box.
    Piecewise,
    /// `|x − x₀|^{−θ} χ_B` with `x₀` the center of a random box `B`.
    PowerBumps,
    /// `(1 − |x − x₀|²/ρ²)²_+` sampled at cell centers.
    SmoothBumps,
}

fn default_theta_max() -> f64 {
    0.4
}

/// Reproducible family of test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFamily {
    pub kind: FamilyKind,
    pub count: usize,
    /// Allow negative values (random signs or values in `[-1, 1]`).
    #[serde(default)]
    pub signed: bool,
    /// Upper bound for `θ` in power bumps.
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
}

impl FunctionFamily {
    pub fn new(kind: FamilyKind, count: usize) -> Self {
        Self {
            kind,
            count,
            signed: false,
            theta_max: default_theta_max(),
        }
    }

    /// The `index`-th member on `spec`, with its support side length. The
    /// random stream depends only on `(seed, index)`.
    pub fn member(&self, spec: &GridSpec, seed: u64, index: usize) -> Result<(GridFunction, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let dim = spec.dim;
        let unit = spec.half_width / LATTICE as f64;
        let k = SIZE_CLASSES[index % SIZE_CLASSES.len()];
        let side = k as f64 * unit;
        let mut lo = vec![0.0; dim];
        for x in lo.iter_mut() {
            let start = rng.random_range(0..=LATTICE - k);
            *x = -0.5 * spec.half_width + start as f64 * unit;
        }
        let hi: Vec<f64> = lo.iter().map(|x| x + side).collect();
        let center: Vec<f64> = lo.iter().map(|x| x + 0.5 * side).collect();
        let sign = |rng: &mut ChaCha8Rng| {
            if self.signed && rng.random_bool(0.5) {
                -1.0
            } else {
                1.0
            }
        };
        let f = match self.kind {
            FamilyKind::Indicators => {
                let s = sign(&mut rng);
                GridFunction::box_indicator(*spec, &lo, &hi).scale(s)
            }
            FamilyKind::Piecewise => {
                let cells = k.pow(dim as u32);
                let vals: Vec<f64> = (0..cells)
                    .map(|_| {
                        if self.signed {
                            rng.random_range(-1.0..1.0)
                        } else {
                            rng.random_range(0.0..1.0) + f64::EPSILON
                        }
                    })
                    .collect();
                let mut acc = vec![0.0; spec.n_cells()];
                for (c, v) in vals.iter().enumerate() {
                    let (ci, cj) = (c % k, c / k);
                    let blo: Vec<f64> = (0..dim)
                        .map(|a| lo[a] + if a == 0 { ci } else { cj } as f64 * unit)
                        .collect();
                    let bhi: Vec<f64> = blo.iter().map(|x| x + unit).collect();
                    let chi = GridFunction::box_indicator(*spec, &blo, &bhi);
                    for (a, b) in acc.iter_mut().zip(chi.values()) {
                        *a += v * b;
                    }
                }
                GridFunction::new(*spec, acc)?
            }
            FamilyKind::PowerBumps => {
                let theta = rng.random_range(0.05..self.theta_max.max(0.05 + 1e-9));
                let s = sign(&mut rng);
                let f = power_cell_average(*spec, &center, -theta)?;
                let chi = GridFunction::box_indicator(*spec, &lo, &hi);
                f.zip_with(&chi, |a, b| a * b * s)?
            }
            FamilyKind::SmoothBumps => {
                let s = sign(&mut rng);
                smooth_bump(*spec, &center, 0.5 * side)?.scale(s)
            }
        };
        Ok((f, side))
    }
}

/// The three weights of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTriple {
    pub w: WeightSpec,
    pub nu: WeightSpec,
    pub mu: WeightSpec,
}

impl WeightTriple {
    pub fn unit() -> Self {
        Self {
            w: WeightSpec::unit(),
            nu: WeightSpec::unit(),
            mu: WeightSpec::unit(),
        }
    }
}

/// A named weight triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPreset {
    pub id: String,
    pub weights: WeightTriple,
}

/// Shipped presets: unit weights, and `(|x|^a, |x|^{a q/p})` pairs for a few
/// small `a`, each with `μ ≡ 1` or `μ = |x|^{0.3}`.
pub fn weight_presets(e: &ExponentSet) -> Vec<WeightPreset> {
    let mut out = vec![WeightPreset {
        id: "unit".into(),
        weights: WeightTriple::unit(),
    }];
    for a in [0.05, 0.1, 0.2, 0.3] {
        out.push(WeightPreset {
            id: format!("power-{a}"),
            weights: WeightTriple {
                w: WeightSpec::power(a),
                nu: WeightSpec::power(a * e.q / e.p),
                mu: WeightSpec::unit(),
            },
        });
    }
    out.push(WeightPreset {
        id: "unit-mu-0.3".into(),
        weights: WeightTriple {
            mu: WeightSpec::power(0.3),
            ..WeightTriple::unit()
        },
    });
    out.push(WeightPreset {
        id: "power-0.1-mu-0.3".into(),
        weights: WeightTriple {
            w: WeightSpec::power(0.1),
            nu: WeightSpec::power(0.1 * e.q / e.p),
            mu: WeightSpec::power(0.3),
        },
    });
    out
}

pub fn find_preset(id: &str, e: &ExponentSet) -> Result<WeightPreset> {
    let all = weight_presets(e);
    all.iter().find(|p| p.id == id).cloned().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "unknown weight preset '{id}'; expected one of {}",
            all.iter()
                .map(|p| p.id.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        ))
    })
}

/// Dyadic family parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeFamilySpec {
    pub depth: usize,
    #[serde(default = "one")]
    pub translations: usize,
}

fn one() -> usize {
    1
}

impl Default for CubeFamilySpec {
    fn default() -> Self {
        Self {
            depth: 4,
            translations: 2,
        }
    }
}

impl CubeFamilySpec {
    pub fn build(&self, spec: &GridSpec) -> CubeFamily {
        make_cube_family(spec, self.depth, self.translations)
    }
}

/// Side-length grid: explicit values or the default geometric grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllSpec {
    #[serde(default = "twelve")]
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn twelve() -> usize {
    12
}

impl Default for EllSpec {
    fn default() -> Self {
        Self {
            points: 12,
            values: None,
        }
    }
}

impl EllSpec {
    pub fn build(&self, spec: &GridSpec) -> Vec<f64> {
        match &self.values {
            Some(v) => v.clone(),
            None => default_ell_grid(spec, self.points),
        }
    }
}

/// Everything that determines a theorem run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub theorem_id: TheoremId,
    pub grid: GridSpec,
    pub exponents: ExponentSet,
    pub weights: WeightTriple,
    pub preset_id: String,
    pub family: FunctionFamily,
    pub cubes: CubeFamilySpec,
    pub ell: EllSpec,
    /// Commutator symbol `b`.
    pub symbol: Option<FunctionSpec>,
    pub seed: u64,
    pub band: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub n: usize,
    pub c_obs_n: Option<f64>,
    pub c_obs_2n: Option<f64>,
    pub band: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub theorem_id: TheoremId,
    pub params: ExponentSet,
    pub preset_id: String,
    pub seed: u64,
    pub grid: GridSpec,
    pub family: FunctionFamily,
    /// One entry per family member; `null` for skipped members.
    pub ratios: Vec<Option<f64>>,
    pub samples_used: usize,
    pub samples_skipped: usize,
    /// Largest ratio; `null` when every member was skipped.
    pub c_obs: Option<f64>,
    pub scale_trend: Vec<ScalePoint>,
    pub trend_growing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<Refinement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ainfty: Option<AinftyFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Finite constant, no growth across scales, and (when refined) stable.
    pub fn verified(&self) -> bool {
        self.c_obs.is_some_and(f64::is_finite)
            && !self.trend_growing
            && self.refinement.is_none_or(|r| r.stable)
    }
}

/// Per-level evaluation result.
struct Level {
    ratios: Vec<Option<f64>>,
    scales: Vec<f64>,
}

fn c_obs(ratios: &[Option<f64>]) -> Option<f64> {
    ratios
        .iter()
        .flatten()
        .copied()
        .fold(None, |m, r| Some(m.map_or(r, |x: f64| x.max(r))))
}

/// Grid-level objects of a run.
struct Setup {
    spec: GridSpec,
    w: Weight,
    nu: Weight,
    mu: Weight,
    kernel: RieszKernel,
    family: CubeFamily,
    ell: Vec<f64>,
    b: Option<GridFunction>,
}

impl Setup {
    fn new(cfg: &VerifyConfig, spec: GridSpec, family: &CubeFamily, ell: &[f64]) -> Result<Self> {
        let b = match (&cfg.symbol, cfg.theorem_id.is_commutator()) {
            (Some(s), true) => Some(s.rasterize(spec)?),
            (None, true) => {
                return Err(Error::InvalidParameter(format!(
                    "{} needs a symbol b",
                    cfg.theorem_id
                )))
            }
            _ => None,
        };
        Ok(Self {
            spec,
            w: cfg.weights.w.build(spec)?,
            nu: cfg.weights.nu.build(spec)?,
            mu: cfg.weights.mu.build(spec)?,
            kernel: RieszKernel::new(spec, cfg.exponents.gamma)?,
            family: family.clone(),
            ell: ell.to_vec(),
            b,
        })
    }

    fn operator(&self, cfg: &VerifyConfig, f: &GridFunction) -> Result<GridFunction> {
        match cfg.theorem_id.operator(&cfg.exponents) {
            OpKind::Riesz => self.kernel.apply(f),
            OpKind::Commutator(m) => self
                .kernel
                .commutator(self.b.as_ref().expect("symbol"), f, m),
        }
    }

    /// `(numerator, denominator)` for one member.
    fn sides(&self, cfg: &VerifyConfig, f: &GridFunction) -> Result<(f64, f64)> {
        let e = &cfg.exponents;
        let (p, q) = (e.p, e.q);
        let den = match cfg.theorem_id {
            TheoremId::WeakLpI | TheoremId::WeakLpComm => lp_norm(f, &self.nu, p)?,
            TheoremId::MorreyI
            | TheoremId::MorreyComm
            | TheoremId::MorreyCommM
            | TheoremId::EndpointBmo => {
                morrey_norm(f, &self.nu, &self.w, p, e.kappa()?, &self.family)?.value
            }
            TheoremId::AmalgamI
            | TheoremId::AmalgamComm
            | TheoremId::AmalgamCommM
            | TheoremId::EndpointBmoLs => {
                amalgam_norm(
                    f,
                    &self.nu,
                    &self.w,
                    &self.mu,
                    p,
                    e.s()?,
                    e.alpha()?,
                    &self.ell,
                )?
                .value
            }
        };
        if !(den > 0.0) {
            return Ok((0.0, 0.0));
        }
        let tf = self.operator(cfg, f)?;
        let num = match cfg.theorem_id {
            TheoremId::WeakLpI | TheoremId::WeakLpComm => weak_lp_norm(&tf, &self.w, q, None)?,
            TheoremId::MorreyI | TheoremId::MorreyComm | TheoremId::MorreyCommM => {
                weak_morrey_norm(&tf, &self.w, q, e.kappa()? * q / p, &self.family)?.value
            }
            TheoremId::AmalgamI | TheoremId::AmalgamComm | TheoremId::AmalgamCommM => {
                weak_amalgam_norm(&tf, &self.w, &self.mu, q, e.s()?, e.beta()?, &self.ell)?.value
            }
            TheoremId::EndpointBmo => bmo_norm(&tf, &self.family)?.value,
            TheoremId::EndpointBmoLs => bmo_ls_norm(&tf, &self.mu, e.s()?, &self.ell)?.value,
        };
        Ok((num, den))
    }

    fn evaluate(&self, cfg: &VerifyConfig) -> Result<Level> {
        let out = (0..cfg.family.count)
            .into_par_iter()
            .map(|i| {
                let (f, scale) = cfg.family.member(&self.spec, cfg.seed, i)?;
                let (num, den) = self.sides(cfg, &f)?;
                let ratio = if den > 0.0 { Some(num / den) } else { None };
                Ok((ratio, scale))
            })
            .collect::<Result<Vec<_>>>()?;
        let (ratios, scales) = out.into_iter().unzip();
        Ok(Level { ratios, scales })
    }
}

/// Runs a theorem check at `cfg.grid`, and at the refined grid when
/// `refine` is set (same family, cube family and side-length grid).
pub fn run_verification(cfg: &VerifyConfig, refine: bool) -> Result<VerificationReport> {
    let spec = cfg.grid;
    spec.validate()?;
    cfg.theorem_id.validate(&cfg.exponents, spec.dim)?;
    if cfg.family.count == 0 {
        return Err(Error::EmptyFamily("function family has no members".into()));
    }
    if !(cfg.band > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "band must be positive, got {}",
            cfg.band
        )));
    }
    let family = cfg.cubes.build(&spec);
    if family.is_empty() {
        return Err(Error::EmptyFamily("cube family is empty".into()));
    }
    let ell = cfg.ell.build(&spec);
    let setup = Setup::new(cfg, spec, &family, &ell)?;
    let mut notes = Vec::new();
    if let Some(b) = &setup.b {
        let bmo = bmo_norm(b, &family)?.value;
        if bmo == 0.0 {
            notes.push("symbol has zero mean oscillation on the cube family".to_string());
        }
    }
    let level = setup.evaluate(cfg)?;
    let pairs: Vec<(f64, f64)> = level
        .ratios
        .iter()
        .zip(&level.scales)
        .filter_map(|(r, s)| r.map(|r| (*s, r)))
        .collect();
    let trend = scale_trend(&pairs);
    let c = c_obs(&level.ratios);

    let refinement = if refine {
        let fine = spec.refined();
        let fine_setup = Setup::new(cfg, fine, &family, &ell)?;
        let fine_level = fine_setup.evaluate(cfg)?;
        let c2 = c_obs(&fine_level.ratios);
        let stable = match (c, c2) {
            (Some(a), Some(b)) if a > 0.0 => (b / a - 1.0).abs() <= cfg.band,
            (Some(a), Some(b)) => a == b,
            _ => false,
        };
        Some(Refinement {
            n: spec.cells_per_axis,
            c_obs_n: c,
            c_obs_2n: c2,
            band: cfg.band,
            stable,
        })
    } else {
        None
    };

    let cond_id = if cfg.theorem_id.is_commutator() {
        ConditionId::orlicz_for(&cfg.exponents)
    } else {
        ConditionId::power_for(&cfg.exponents)
    };
    let condition =
        match check_condition(cond_id, &setup.w, &setup.nu, &cfg.exponents, None, &family) {
            Ok(r) => Some(r),
            Err(e) => {
                notes.push(format!("condition {cond_id} not evaluated: {e}"));
                None
            }
        };
    let ainfty = if cfg.theorem_id.is_commutator() {
        notes.push("A_inf membership of w is fitted on the family, not certified".to_string());
        Some(ainfty_fit(&setup.w, &family, AINFTY_LEVELS)?)
    } else {
        None
    };
    let used = level.ratios.iter().filter(|r| r.is_some()).count();
    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        theorem_id: cfg.theorem_id,
        params: cfg.exponents.clone(),
        preset_id: cfg.preset_id.clone(),
        seed: cfg.seed,
        grid: spec,
        family: cfg.family.clone(),
        samples_used: used,
        samples_skipped: level.ratios.len() - used,
        ratios: level.ratios,
        c_obs: c,
        trend_growing: trend_growing(&trend, cfg.band),
        scale_trend: trend,
        refinement,
        condition,
        ainfty,
        notes,
    })
}

/// Diagnostics for the two BMO estimates used with commutators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmoLemmaReport {
    pub bmo: f64,
    /// `|b_{2^{j+1}Q} − b_Q| / ((j+1)‖b‖_*)` for `j = 0..=j_max`.
    pub mean_drift: Vec<f64>,
    pub mean_drift_max: f64,
    /// `(∫_Q |b − b_Q|^p w)^{1/p} / (‖b‖_* w(Q)^{1/p})`
    pub weighted_oscillation: f64,
}

pub fn bmo_lemma_check(
    b: &GridFunction,
    q: &Cube,
    j_max: usize,
    w: &Weight,
    p: f64,
    family: &CubeFamily,
) -> Result<BmoLemmaReport> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p must be at least 1, got {p}"
        )));
    }
    b.spec().check_same(w.grid())?;
    let bmo = bmo_norm(b, family)?.value;
    let spec = *b.spec();
    let bq = b.mean(q)?;
    let mut drift = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let big = q.dilate(2f64.powi(j as i32 + 1));
        let d = (b.mean(&big)? - bq).abs();
        drift.push(if bmo > 0.0 {
            d / ((j as f64 + 1.0) * bmo)
        } else {
            0.0
        });
    }
    let ov = spec.overlap(q).ok_or(Error::EmptyIntersection)?;
    let wv = w.values();
    let mut acc = 0.0;
    ov.for_each(|i, v| acc += (b.values()[i] - bq).abs().powf(p) * wv[i] * v);
    let wq = ov.integrate(&wv);
    let weighted = if bmo > 0.0 {
        acc.powf(1.0 / p) / (bmo * wq.powf(1.0 / p))
    } else {
        0.0
    };
    Ok(BmoLemmaReport {
        bmo,
        mean_drift_max: drift.iter().copied().fold(0.0, f64::max),
        mean_drift: drift,
        weighted_oscillation: weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::half_space_indicator;

    fn base(theorem: TheoremId, e: ExponentSet) -> VerifyConfig {
        VerifyConfig {
            theorem_id: theorem,
            grid: GridSpec::new(1, 4.0, 64).unwrap(),
            exponents: e,
            weights: WeightTriple::unit(),
            preset_id: "unit".into(),
            family: FunctionFamily::new(FamilyKind::Indicators, 10),
            cubes: CubeFamilySpec {
                depth: 3,
                translations: 2,
            },
            ell: EllSpec::default(),
            symbol: None,
            seed: 11,
            band: DEFAULT_BAND,
        }
    }

    #[test]
    fn members_are_reproducible_and_nonnegative() {
        let fam = FunctionFamily::new(FamilyKind::Piecewise, 6);
        let g = GridSpec::new(1, 4.0, 64).unwrap();
        for i in 0..6 {
            let (a, sa) = fam.member(&g, 5, i).unwrap();
            let (b, sb) = fam.member(&g, 5, i).unwrap();
            assert_eq!(a, b);
            assert_eq!(sa, sb);
            assert!(a.values().iter().all(|v| *v >= 0.0));
        }
        let (a, _) = fam.member(&g, 5, 0).unwrap();
        let (c, _) = fam.member(&g, 6, 0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn members_agree_across_refinement() {
        // integrals over lattice boxes are identical on N and 2N
        let g = GridSpec::new(1, 4.0, 64).unwrap();
        for kind in [
            FamilyKind::Indicators,
            FamilyKind::Piecewise,
            FamilyKind::PowerBumps,
        ] {
            let fam = FunctionFamily::new(kind, 5);
            for i in 0..5 {
                let (a, _) = fam.member(&g, 3, i).unwrap();
                let (b, _) = fam.member(&g.refined(), 3, i).unwrap();
                assert!(
                    (a.total() - b.total()).abs() < 1e-12 * a.total().abs().max(1.0),
                    "{kind:?} {i}"
                );
            }
        }
    }

    #[test]
    fn accounting_covers_every_member() {
        let e = ExponentSet::sobolev(0.25, 2.0, 1).unwrap();
        let mut cfg = base(TheoremId::WeakLpI, e);
        cfg.family = FunctionFamily::new(FamilyKind::Piecewise, 3);
        let r = run_verification(&cfg, false).unwrap();
        assert_eq!(r.samples_used + r.samples_skipped, 3);
        assert_eq!(r.c_obs, c_obs(&r.ratios));
    }

    #[test]
    fn constant_symbol_gives_zero_ratios() {
        let e = ExponentSet::sobolev(0.25, 2.0, 1).unwrap().with_kappa(0.25);
        let mut cfg = base(TheoremId::MorreyComm, e);
        cfg.symbol = Some(FunctionSpec::Constant { c: 2.0 });
        let r = run_verification(&cfg, false).unwrap();
        assert!(r.ratios.iter().flatten().all(|x| *x == 0.0));
        assert!(r.ainfty.is_some());
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn kappa_zero_matches_weak_lebesgue() {
        let e = ExponentSet::sobolev(0.25, 2.0, 1).unwrap().with_kappa(0.0);
        let a = run_verification(&base(TheoremId::MorreyI, e.clone()), false).unwrap();
        let b = run_verification(&base(TheoremId::WeakLpI, e), false).unwrap();
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            let (x, y) = (x.unwrap(), y.unwrap());
            assert!((x - y).abs() <= 1e-10 * y);
        }
    }

    #[test]
    fn endpoint_relation_is_enforced() {
        let e = ExponentSet::sobolev(0.25, 2.0, 1).unwrap().with_kappa(0.25);
        let err = run_verification(&base(TheoremId::EndpointBmo, e), false).unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("kappa = p/q"));
    }

    #[test]
    fn bmo_lemma_for_step_and_constant() {
        let g = GridSpec::new(1, 8.0, 128).unwrap();
        let fam = make_cube_family(&g, 4, 2);
        let w = Weight::unit(g);
        let q = Cube::new(vec![0.25], 0.5);
        let c = bmo_lemma_check(&GridFunction::constant(g, 1.0), &q, 3, &w, 2.0, &fam).unwrap();
        assert_eq!(c.mean_drift_max, 0.0);
        assert_eq!(c.weighted_oscillation, 0.0);
        let s = bmo_lemma_check(&half_space_indicator(g, 0), &q, 3, &w, 2.0, &fam).unwrap();
        for (j, d) in s.mean_drift.iter().enumerate() {
            assert!(*d <= 1.0 / ((j as f64 + 1.0) * 0.5) + 1e-12);
        }
    }
}
