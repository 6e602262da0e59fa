//! Young functions, Luxemburg mean norms over cubes, and the generalized
//! Hölder and John–Nirenberg checks built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cube, CubeFamily, GridFunction};
use crate::spaces::bmo_norm;

/// Above this argument `e^t − 1` is evaluated in log space.
const EXP_OVERFLOW_GUARD: f64 = 700.0;
/// Above this argument the power-type variants are evaluated in log space.
const POWER_OVERFLOW_GUARD: f64 = 1e30;
const MAX_ITERATIONS: usize = 200;
const REL_TOL: f64 = 1e-14;

/// The shipped Young functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum YoungFunction {
    /// `t^p`, `p > 1`.
    Power { p: f64 },
    /// `t^{p'} (1 + log⁺t)^{m·p'}`.
    #[serde(rename = "logbump")]
    LogBump { pprime: f64, m: u32 },
    /// `e^t − 1`.
    #[serde(rename = "expm1")]
    ExpM1,
}

impl YoungFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            YoungFunction::Power { p } if !(p > 1.0) => Err(Error::InvalidParameter(format!(
                "power Young function needs p > 1, got {p}"
            ))),
            YoungFunction::LogBump { pprime, m } if !(pprime > 1.0) || m < 1 => {
                Err(Error::InvalidParameter(format!(
                    "log bump needs p' > 1 and m ≥ 1, got p' = {pprime}, m = {m}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `Φ(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Young functions are defined on [0, ∞), got {t}"
            )));
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        match *self {
            YoungFunction::Power { p } => t.powf(p),
            YoungFunction::LogBump { pprime, m } => {
                let lp = if t > 1.0 { t.ln() } else { 0.0 };
                t.powf(pprime) * (1.0 + lp).powf(m as f64 * pprime)
            }
            YoungFunction::ExpM1 => t.exp_m1(),
        }
    }

    /// `ln Φ(t)` for `t > 0`, free of overflow.
    pub fn ln_eval(&self, t: f64) -> f64 {
        match *self {
            YoungFunction::Power { p } => p * t.ln(),
            YoungFunction::LogBump { pprime, m } => {
                let lp = if t > 1.0 { t.ln() } else { 0.0 };
                pprime * t.ln() + m as f64 * pprime * lp.ln_1p()
            }
            YoungFunction::ExpM1 => t + (-(-t).exp()).ln_1p(),
        }
    }

    fn overflows(&self, t: f64) -> bool {
        match self {
            YoungFunction::ExpM1 => t > EXP_OVERFLOW_GUARD,
            _ => t > POWER_OVERFLOW_GUARD,
        }
    }
}

/// `|f|` and overlap volumes over `Q ∩ domain`.
struct CubeSample {
    abs: Vec<f64>,
    vol: Vec<f64>,
    total: f64,
}

impl CubeSample {
    fn new(f: &GridFunction, q: &Cube) -> Result<Self> {
        let ov = f.spec().overlap(q).ok_or(Error::EmptyIntersection)?;
        let (mut abs, mut vol) = (Vec::new(), Vec::new());
        ov.for_each(|i, v| {
            abs.push(f.values()[i].abs());
            vol.push(v);
        });
        Ok(Self {
            abs,
            vol,
            total: ov.volume(),
        })
    }

    /// `(1/|Q|) ∫_Q Φ(|f|/λ)`, short-circuiting to `+∞` once it exceeds 1
    /// through an overflowing term.
    fn mean(&self, phi: &YoungFunction, lambda: f64) -> f64 {
        let mut acc = 0.0;
        for (a, v) in self.abs.iter().zip(&self.vol) {
            if *a == 0.0 {
                continue;
            }
            let t = a / lambda;
            if phi.overflows(t) {
                let l = phi.ln_eval(t) + (v / self.total).ln();
                if l > 0.0 {
                    return f64::INFINITY;
                }
                acc += l.exp();
            } else {
                acc += v * phi.eval_unchecked(t) / self.total;
            }
        }
        acc
    }
}

/// `‖f‖_{Φ,Q} = inf{λ > 0 : (1/|Q|)∫_Q Φ(|f|/λ) ≤ 1}` by bracketing and
/// bisection; `0` when `f` vanishes on `Q`.
pub fn luxemburg_norm(f: &GridFunction, q: &Cube, phi: &YoungFunction) -> Result<f64> {
    phi.validate()?;
    let sample = CubeSample::new(f, q)?;
    let top = sample.abs.iter().fold(0.0f64, |m, a| m.max(*a));
    if top == 0.0 {
        return Ok(0.0);
    }
    let feasible = |lambda: f64| sample.mean(phi, lambda) <= 1.0;

    let mut hi = top;
    let mut iterations = 0;
    while !feasible(hi) {
        hi *= 2.0;
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                iterations,
                lo: top,
                hi,
            });
        }
    }
    let mut lo = hi / 2.0;
    while feasible(lo) {
        hi = lo;
        lo /= 2.0;
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations, lo, hi });
        }
    }
    let mut steps = 0;
    while hi - lo > REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
        if steps > MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                iterations: steps,
                lo,
                hi,
            });
        }
    }
    Ok(hi)
}

/// A Young triple `(𝒜, ℬ, 𝒞)` for `‖fg‖_𝒞 ≤ 2‖f‖_𝒜‖g‖_ℬ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungTriple {
    pub a: YoungFunction,
    pub b: YoungFunction,
    pub c: YoungFunction,
    /// False for user-declared triples, whose compatibility is not checked.
    pub shipped: bool,
}

impl YoungTriple {
    /// `(t^{p'}(1+log⁺t)^{p'}, e^t − 1, t^{p'})`.
    pub fn log_exp(pprime: f64) -> Self {
        Self {
            a: YoungFunction::LogBump { pprime, m: 1 },
            b: YoungFunction::ExpM1,
            c: YoungFunction::Power { p: pprime },
            shipped: true,
        }
    }

    pub fn user(a: YoungFunction, b: YoungFunction, c: YoungFunction) -> Self {
        log::warn!(
            "user Young triple {a:?}, {b:?}, {c:?} is trusted without a compatibility check"
        );
        Self {
            a,
            b,
            c,
            shipped: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Slack for the generalized Hölder comparison.
pub const HOLDER_SLACK: f64 = 1e-8;

/// Evaluates both sides of `‖f·g‖_{𝒞,Q} ≤ 2‖f‖_{𝒜,Q}‖g‖_{ℬ,Q}`.
pub fn generalized_holder_check(
    f: &GridFunction,
    g: &GridFunction,
    q: &Cube,
    triple: &YoungTriple,
) -> Result<HolderCheck> {
    let fg = f.zip_with(g, |a, b| a * b)?;
    let lhs = luxemburg_norm(&fg, q, &triple.c)?;
    let rhs = 2.0 * luxemburg_norm(f, q, &triple.a)? * luxemburg_norm(g, q, &triple.b)?;
    Ok(HolderCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + HOLDER_SLACK),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JohnNirenbergCheck {
    /// `‖b − b_Q‖_{exp L, Q}`
    pub exp_l: f64,
    /// `‖b‖_*` over the working family.
    pub bmo: f64,
    pub ratio: f64,
}

/// Compares the exponential-class oscillation of `b` on `Q` with its BMO
/// norm over `family`.
pub fn john_nirenberg_check(
    b: &GridFunction,
    q: &Cube,
    family: &CubeFamily,
) -> Result<JohnNirenbergCheck> {
    let mean = b.mean(q)?;
    let centered = b.map(|v| v - mean);
    let exp_l = luxemburg_norm(&centered, q, &YoungFunction::ExpM1)?;
    let bmo = bmo_norm(b, family)?.value;
    let ratio = if bmo > 0.0 { exp_l / bmo } else { 0.0 };
    Ok(JohnNirenbergCheck { exp_l, bmo, ratio })
}
