//! Strictly positive grid weights and numerical estimates of their doubling,
//! reverse doubling, `A_p` and `A_∞` characteristics over cube families.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{power_cell_average, power_product_cell_average, PowerTerm};
use crate::grid::{Cube, CubeFamily, GridFunction, GridSpec};

/// Constructor description of a weight, as named in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant {
        c: f64,
    },
    /// `|x - center|^a`.
    Power {
        a: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// `Π |x - center_k|^{a_k}`.
    Product {
        factors: Vec<PowerTerm>,
    },
    Table {
        values: Vec<f64>,
    },
}

impl WeightSpec {
    pub fn unit() -> Self {
        WeightSpec::Constant { c: 1.0 }
    }

    pub fn power(a: f64) -> Self {
        WeightSpec::Power { a, center: vec![] }
    }

    pub fn build(&self, grid: GridSpec) -> Result<Weight> {
        Weight::new(grid, self.clone())
    }

    fn label(&self) -> String {
        match self {
            WeightSpec::Constant { c } => format!("const({c})"),
            WeightSpec::Power { a, center } if center.iter().all(|c| *c == 0.0) => {
                format!("|x|^{a}")
            }
            WeightSpec::Power { a, center } => format!("|x-{center:?}|^{a}"),
            WeightSpec::Product { factors } => format!("product({})", factors.len()),
            WeightSpec::Table { .. } => "table".into(),
        }
    }
}

/// A weight on the grid: cell averages of a strictly positive function.
///
/// Power-type weights remember their closed form so that `w^e` is formed by
/// exact cell averages of `|x|^{a·e}` instead of powering the averages.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    kind: WeightSpec,
    factor: f64,
    values: GridFunction,
}

impl Weight {
    pub fn new(grid: GridSpec, kind: WeightSpec) -> Result<Self> {
        let values = match &kind {
            WeightSpec::Constant { c } => {
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(Error::InvalidWeight(format!(
                        "constant weight must be positive, got {c}"
                    )));
                }
                GridFunction::constant(grid, *c)
            }
            WeightSpec::Power { a, center } => {
                let mut c = center.clone();
                c.resize(grid.dim, 0.0);
                power_cell_average(grid, &c, *a)?
            }
            WeightSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidWeight("empty product".into()));
                }
                power_product_cell_average(grid, factors)?
            }
            WeightSpec::Table { values } => GridFunction::new(grid, values.clone())?,
        };
        if let Some(i) = values.values().iter().position(|v| !(*v > 0.0)) {
            return Err(Error::InvalidWeight(format!(
                "weight must be strictly positive; cell {i} has {}",
                values.values()[i]
            )));
        }
        Ok(Self {
            kind,
            factor: 1.0,
            values,
        })
    }

    pub fn unit(grid: GridSpec) -> Self {
        Self::new(grid, WeightSpec::unit()).expect("unit weight")
    }

    pub fn power(grid: GridSpec, a: f64) -> Result<Self> {
        Self::new(grid, WeightSpec::power(a))
    }

    pub fn kind(&self) -> &WeightSpec {
        &self.kind
    }

    pub fn label(&self) -> String {
        if self.factor == 1.0 {
            self.kind.label()
        } else {
            format!("{}·{}", self.factor, self.kind.label())
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.values.spec()
    }

    pub fn function(&self) -> GridFunction {
        self.values.scale(self.factor)
    }

    /// Cell values (including any scale factor).
    pub fn values(&self) -> Vec<f64> {
        self.values
            .values()
            .iter()
            .map(|v| v * self.factor)
            .collect()
    }

    /// `c · w` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidWeight(format!(
                "scale must be positive, got {c}"
            )));
        }
        Ok(Self {
            kind: self.kind.clone(),
            factor: self.factor * c,
            values: self.values.clone(),
        })
    }

    /// `w(Q ∩ domain)`.
    pub fn measure(&self, cube: &Cube) -> Result<f64> {
        Ok(self.factor * self.values.integrate(cube)?)
    }

    /// `w^e`. Power-type weights are re-averaged from the exact power, which
    /// fails when `|x|^{a·e}` is not locally integrable.
    pub fn powf(&self, e: f64) -> Result<Self> {
        let grid = *self.grid();
        let factor = self.factor.powf(e);
        let (kind, values) = match &self.kind {
            WeightSpec::Constant { c } => {
                let k = WeightSpec::Constant { c: c.powf(e) };
                let v = GridFunction::constant(grid, c.powf(e));
                (k, v)
            }
            WeightSpec::Power { a, center } => {
                let k = WeightSpec::Power {
                    a: a * e,
                    center: center.clone(),
                };
                let mut c = center.clone();
                c.resize(grid.dim, 0.0);
                (k, power_cell_average(grid, &c, a * e)?)
            }
            WeightSpec::Product { factors } => {
                let f: Vec<PowerTerm> = factors
                    .iter()
                    .map(|t| PowerTerm {
                        center: t.center.clone(),
                        a: t.a * e,
                    })
                    .collect();
                let v = power_product_cell_average(grid, &f)?;
                (WeightSpec::Product { factors: f }, v)
            }
            WeightSpec::Table { .. } => {
                let v = self.values.map(|x| x.powf(e));
                (
                    WeightSpec::Table {
                        values: v.values().to_vec(),
                    },
                    v,
                )
            }
        };
        Ok(Self {
            kind,
            factor,
            values,
        })
    }
}

/// Ratios `w(2Q ∩ domain)/w(Q)` over a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationScan {
    pub max: f64,
    pub argmax: Cube,
    pub min: f64,
    pub argmin: Cube,
    pub cubes_used: usize,
    /// Cubes whose dilation leaves the domain.
    pub cubes_flagged: usize,
}

/// Scans `w(2Q)/w(Q)`; cubes whose dilation exits the domain are counted as
/// flagged and skipped unless `include_flagged` (then `2Q` is clipped).
pub fn dilation_scan(
    w: &Weight,
    family: &CubeFamily,
    include_flagged: bool,
) -> Result<DilationScan> {
    if family.is_empty() {
        return Err(Error::EmptyFamily("cube family is empty".into()));
    }
    let grid = *w.grid();
    let mut best: Option<(f64, Cube, f64, Cube)> = None;
    let (mut used, mut flagged) = (0, 0);
    for q in family.iter() {
        let q2 = q.dilate(2.0);
        if !q2.inside_domain(&grid) {
            flagged += 1;
            if !include_flagged {
                continue;
            }
        }
        let wq = w.measure(q)?;
        let r = w.measure(&q2)? / wq;
        used += 1;
        best = Some(match best {
            None => (r, q.clone(), r, q.clone()),
            Some((mx, qa, mn, qb)) => {
                let (mx, qa) = if r > mx { (r, q.clone()) } else { (mx, qa) };
                let (mn, qb) = if r < mn { (r, q.clone()) } else { (mn, qb) };
                (mx, qa, mn, qb)
            }
        });
    }
    let (max, argmax, min, argmin) = best.ok_or_else(|| {
        Error::EmptyFamily("no cube in the family has its dilation inside the domain".into())
    })?;
    Ok(DilationScan {
        max,
        argmax,
        min,
        argmin,
        cubes_used: used,
        cubes_flagged: flagged,
    })
}

/// `max_Q w(2Q)/w(Q)` over cubes whose dilation stays in the domain.
pub fn doubling_constant(w: &Weight, family: &CubeFamily) -> Result<f64> {
    Ok(dilation_scan(w, family, false)?.max)
}

/// `min_Q w(2Q)/w(Q)` over cubes whose dilation stays in the domain.
pub fn reverse_doubling_constant(w: &Weight, family: &CubeFamily) -> Result<f64> {
    Ok(dilation_scan(w, family, false)?.min)
}

/// `max_Q (⨍_Q w)^{1/p} (⨍_Q w^{-p'/p})^{1/p'}`; `+∞` when `w^{-p'/p}` is
/// not locally integrable.
pub fn ap_constant(w: &Weight, p: f64, family: &CubeFamily) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("A_p needs p > 1, got {p}")));
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily("cube family is empty".into()));
    }
    let pp = p / (p - 1.0);
    let dual = match w.powf(-pp / p) {
        Ok(d) => d,
        Err(Error::InvalidWeight(_)) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let grid = *w.grid();
    let mut best = 0.0f64;
    for q in family.iter() {
        let ov = grid.overlap(q).ok_or(Error::EmptyIntersection)?;
        let vol = ov.volume();
        let a = w.measure(q)? / vol;
        let b = dual.measure(q)? / vol;
        best = best.max(a.powf(1.0 / p) * b.powf(1.0 / pp));
    }
    Ok(best)
}

/// Fitted `A_∞` comparability pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AinftyFit {
    pub delta: f64,
    pub c: f64,
}

/// Relative increase of the fitted constant allowed when the finest subset
/// level is added.
const AINFTY_GROWTH_TOL: f64 = 1e-6;

/// Candidate exponents `0.05, 0.10, …, 1.0`.
pub fn ainfty_delta_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

/// Fits `w(E)/w(Q) ≤ C (|E|/|Q|)^δ` with `E` ranging over the dyadic
/// sub-boxes of each `Q` at levels `1..=subsets_per_cube`.
///
/// For each candidate `δ` the constant `C(δ)` is the largest sampled
/// `ratio/(|E|/|Q|)^δ`. A finite sample always yields some `C`, so a `δ` is
/// accepted only if adding the finest level does not raise `C(δ)`; the fit
/// returns the largest accepted `δ` (or `(0, 1)`, which every weight
/// satisfies, if none is accepted).
pub fn ainfty_fit(w: &Weight, family: &CubeFamily, subsets_per_cube: usize) -> Result<AinftyFit> {
    if subsets_per_cube < 1 {
        return Err(Error::InvalidParameter(
            "subsets_per_cube must be ≥ 1".into(),
        ));
    }
    let samples = ainfty_samples(w, family, subsets_per_cube)?;
    let deepest = subsets_per_cube;
    let mut fit = AinftyFit { delta: 0.0, c: 1.0 };
    for delta in ainfty_delta_grid() {
        let mut coarse = 1.0f64;
        let mut all = 1.0f64;
        for s in &samples {
            let v = s.ratio / s.fraction.powf(delta);
            all = all.max(v);
            if s.level < deepest {
                coarse = coarse.max(v);
            }
        }
        if all <= coarse * (1.0 + AINFTY_GROWTH_TOL) {
            fit = AinftyFit { delta, c: all };
        }
    }
    Ok(fit)
}

/// One sampled `(E, Q)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AinftySample {
    pub cube: Cube,
    pub subset: Cube,
    pub level: usize,
    /// `|E|/|Q|`
    pub fraction: f64,
    /// `w(E)/w(Q)`
    pub ratio: f64,
}

pub fn ainfty_samples(w: &Weight, family: &CubeFamily, levels: usize) -> Result<Vec<AinftySample>> {
    let grid = *w.grid();
    let mut out = Vec::new();
    for q in family.iter() {
        let qv = grid.overlap(q).ok_or(Error::EmptyIntersection)?.volume();
        let wq = w.measure(q)?;
        for level in 1..=levels {
            for e in dyadic_children(q, level) {
                let Some(ov) = grid.overlap(&e) else { continue };
                out.push(AinftySample {
                    cube: q.clone(),
                    fraction: ov.volume() / qv,
                    ratio: w.measure(&e)? / wq,
                    subset: e,
                    level,
                });
            }
        }
    }
    Ok(out)
}

/// The `2^{level·dim}` dyadic sub-cubes of `q` at the given level.
pub fn dyadic_children(q: &Cube, level: usize) -> Vec<Cube> {
    let k = 1usize << level;
    let side = q.side / k as f64;
    let origin: Vec<f64> = q.center.iter().map(|c| c - 0.5 * q.side).collect();
    let mut out = Vec::with_capacity(k.pow(q.dim() as u32));
    if q.dim() == 1 {
        for i in 0..k {
            out.push(Cube::new(vec![origin[0] + (i as f64 + 0.5) * side], side));
        }
    } else {
        for j in 0..k {
            for i in 0..k {
                out.push(Cube::new(
                    vec![
                        origin[0] + (i as f64 + 0.5) * side,
                        origin[1] + (j as f64 + 0.5) * side,
                    ],
                    side,
                ));
            }
        }
    }
    out
}

/// Summary of every characteristic of one weight over one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightCharacteristics {
    pub weight: String,
    pub doubling_sup: f64,
    pub reverse_doubling_inf: f64,
    /// Set when the observed reverse doubling constant is not above 1.
    pub reverse_doubling_degenerate: bool,
    pub ap_constant: BTreeMap<String, f64>,
    pub ainfty_delta: f64,
    pub ainfty_c: f64,
    pub cubes_used: usize,
    pub cubes_flagged: usize,
}

pub fn characterize(
    w: &Weight,
    family: &CubeFamily,
    ps: &[f64],
    subsets_per_cube: usize,
) -> Result<WeightCharacteristics> {
    let scan = dilation_scan(w, family, false)?;
    let mut ap = BTreeMap::new();
    for &p in ps {
        ap.insert(format!("{p}"), ap_constant(w, p, family)?);
    }
    let fit = ainfty_fit(w, family, subsets_per_cube)?;
    Ok(WeightCharacteristics {
        weight: w.label(),
        doubling_sup: scan.max,
        reverse_doubling_inf: scan.min,
        reverse_doubling_degenerate: scan.min <= 1.0,
        ap_constant: ap,
        ainfty_delta: fit.delta,
        ainfty_c: fit.c,
        cubes_used: scan.cubes_used,
        cubes_flagged: scan.cubes_flagged,
    })
}
