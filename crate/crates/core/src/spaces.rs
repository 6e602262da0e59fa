//! Norm functionals: weighted Lebesgue and weak Lebesgue, weighted (weak)
//! Morrey, weighted (weak) amalgam, BMO and its `L^s(μ)`-in-center variant.
//!
//! Supremum-type norms are maxima over finite declared families of cubes or
//! side lengths, and every result records the family it was taken over.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ext_real;
use crate::grid::{mostly_inside, Cube, CubeFamily, GridFunction};
use crate::weights::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormId {
    Lp,
    WeakLp,
    Morrey,
    WeakMorrey,
    Amalgam,
    WeakAmalgam,
    Bmo,
    BmoLs,
}

/// What a supremum was taken over.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FamilyMeta {
    pub tag: String,
    /// Cubes evaluated.
    pub cubes: usize,
    /// Distinct side lengths.
    pub scales: usize,
    /// Centers dropped because their cube lies mostly outside the domain.
    pub excluded: usize,
}

/// The maximizing cube and/or side length.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cube: Option<Cube>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub norm_id: NormId,
    pub params: BTreeMap<String, serde_json::Value>,
    pub family_meta: FamilyMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl NormResult {
    fn new(norm_id: NormId, value: f64) -> Self {
        Self {
            value,
            norm_id,
            params: BTreeMap::new(),
            family_meta: FamilyMeta::default(),
            witness: None,
        }
    }

    fn param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_string(), ext_real::to_value(v));
        self
    }
}

fn check_weight(f: &GridFunction, w: &Weight) -> Result<()> {
    f.spec().check_same(w.grid())
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "p must satisfy 1 <= p < inf, got {p}"
        )))
    }
}

fn check_family(family: &CubeFamily) -> Result<()> {
    if family.is_empty() {
        Err(Error::EmptyFamily(format!(
            "cube family '{}' has no cubes",
            family.tag
        )))
    } else {
        Ok(())
    }
}

fn check_ell_grid(ell_grid: &[f64]) -> Result<()> {
    if ell_grid.is_empty() {
        return Err(Error::EmptyFamily("the side-length grid is empty".into()));
    }
    if let Some(l) = ell_grid.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "side lengths must be positive, got {l}"
        )));
    }
    Ok(())
}

/// `(∫ |f|^p w dx)^{1/p}` over the grid domain.
pub fn lp_norm(f: &GridFunction, w: &Weight, p: f64) -> Result<f64> {
    check_weight(f, w)?;
    check_p(p)?;
    let wv = w.values();
    let s: f64 = f
        .values()
        .iter()
        .zip(&wv)
        .map(|(v, wi)| v.abs().powf(p) * wi)
        .sum::<f64>()
        * f.spec().cell_volume();
    Ok(s.powf(1.0 / p))
}

/// `(∫_{Q∩domain} |f|^p w dx)^{1/p}`.
pub fn lp_norm_on(f: &GridFunction, w: &Weight, p: f64, q: &Cube) -> Result<f64> {
    check_weight(f, w)?;
    check_p(p)?;
    Ok(lp_power_on(f.values(), &w.values(), p, f, q)?.powf(1.0 / p))
}

fn lp_power_on(fv: &[f64], wv: &[f64], p: f64, f: &GridFunction, q: &Cube) -> Result<f64> {
    let ov = f.spec().overlap(q).ok_or(Error::EmptyIntersection)?;
    let mut acc = 0.0;
    ov.for_each(|i, v| acc += fv[i].abs().powf(p) * wv[i] * v);
    Ok(acc)
}

/// `w({|f| > λ})`.
pub fn distribution(f: &GridFunction, w: &Weight, lambda: f64) -> Result<f64> {
    check_weight(f, w)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let cv = f.spec().cell_volume();
    Ok(f.values()
        .iter()
        .zip(w.values())
        .filter(|(v, _)| v.abs() > lambda)
        .map(|(_, wi)| wi * cv)
        .sum())
}

/// Exact `sup_λ λ·w({|f| > λ})^{1/p}` for a list of `(|f|, w-mass)` pairs:
/// the supremum of the step function is approached as `λ ↑ v` for each
/// distinct value `v`, giving `max_v v·w({|f| ≥ v})^{1/p}`.
fn weak_sup(mut pairs: Vec<(f64, f64)>, p: f64) -> f64 {
    pairs.retain(|(a, m)| *a > 0.0 && *m > 0.0);
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    let mut mass = 0.0;
    let mut k = 0;
    while k < pairs.len() {
        let v = pairs[k].0;
        while k < pairs.len() && pairs[k].0 == v {
            mass += pairs[k].1;
            k += 1;
        }
        best = best.max(v * mass.powf(1.0 / p));
    }
    best
}

fn weak_pairs(
    fv: &[f64],
    wv: &[f64],
    f: &GridFunction,
    restrict: Option<&Cube>,
) -> Result<Vec<(f64, f64)>> {
    match restrict {
        None => {
            let cv = f.spec().cell_volume();
            Ok(fv.iter().zip(wv).map(|(a, w)| (a.abs(), w * cv)).collect())
        }
        Some(q) => {
            let ov = f.spec().overlap(q).ok_or(Error::EmptyIntersection)?;
            let mut out = Vec::new();
            ov.for_each(|i, v| out.push((fv[i].abs(), wv[i] * v)));
            Ok(out)
        }
    }
}

/// `sup_{λ>0} λ·w({|f| > λ})^{1/p}`, computed exactly on the grid,
/// optionally restricted to `Q ∩ domain`.
pub fn weak_lp_norm(f: &GridFunction, w: &Weight, p: f64, restrict: Option<&Cube>) -> Result<f64> {
    check_weight(f, w)?;
    check_p(p)?;
    Ok(weak_sup(
        weak_pairs(f.values(), &w.values(), f, restrict)?,
        p,
    ))
}

fn check_kappa(kappa: f64) -> Result<()> {
    if (0.0..1.0).contains(&kappa) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "kappa must satisfy 0 <= kappa < 1 (weighted Morrey range), got {kappa}"
        )))
    }
}

/// Deterministic arg-max: first index attaining the maximum.
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.iter().enumerate() {
        if *v > best.1 {
            best = (i, *v);
        }
    }
    best
}

fn family_meta(family: &CubeFamily) -> FamilyMeta {
    FamilyMeta {
        tag: family.tag.clone(),
        cubes: family.len(),
        scales: family.scales().len(),
        excluded: 0,
    }
}

fn sup_over_family<F>(family: &CubeFamily, eval: F) -> Result<(usize, f64)>
where
    F: Fn(&Cube) -> Result<f64> + Sync,
{
    check_family(family)?;
    let values = family
        .cubes
        .par_iter()
        .map(&eval)
        .collect::<Result<Vec<f64>>>()?;
    Ok(argmax(&values))
}

/// `sup_{Q∈F} (w(Q)^{−κ} ∫_Q |f|^p ν dx)^{1/p}`.
pub fn morrey_norm(
    f: &GridFunction,
    nu: &Weight,
    w: &Weight,
    p: f64,
    kappa: f64,
    family: &CubeFamily,
) -> Result<NormResult> {
    check_weight(f, nu)?;
    check_weight(f, w)?;
    check_p(p)?;
    check_kappa(kappa)?;
    let (nv, wv) = (nu.values(), w.values());
    let (k, value) = sup_over_family(family, |q| {
        let wq = f
            .spec()
            .overlap(q)
            .ok_or(Error::EmptyIntersection)?
            .integrate(&wv);
        Ok((wq.powf(-kappa) * lp_power_on(f.values(), &nv, p, f, q)?).powf(1.0 / p))
    })?;
    let mut r = NormResult::new(NormId::Morrey, value)
        .param("p", p)
        .param("kappa", kappa);
    r.family_meta = family_meta(family);
    r.witness = Some(Witness {
        cube: Some(family.cubes[k].clone()),
        ell: None,
    });
    Ok(r)
}

/// `sup_{Q∈F} w(Q)^{−κ/p} ‖f χ_Q‖_{WL^p(w)}`.
pub fn weak_morrey_norm(
    f: &GridFunction,
    w: &Weight,
    p: f64,
    kappa: f64,
    family: &CubeFamily,
) -> Result<NormResult> {
    check_weight(f, w)?;
    check_p(p)?;
    check_kappa(kappa)?;
    let wv = w.values();
    let (k, value) = sup_over_family(family, |q| {
        let wq = f
            .spec()
            .overlap(q)
            .ok_or(Error::EmptyIntersection)?
            .integrate(&wv);
        Ok(wq.powf(-kappa / p) * weak_sup(weak_pairs(f.values(), &wv, f, Some(q))?, p))
    })?;
    let mut r = NormResult::new(NormId::WeakMorrey, value)
        .param("p", p)
        .param("kappa", kappa);
    r.family_meta = family_meta(family);
    r.witness = Some(Witness {
        cube: Some(family.cubes[k].clone()),
        ell: None,
    });
    Ok(r)
}

/// Shared amalgam scan: for each `ℓ`, the `L^s(μ)` norm over cell centers
/// `y` of `inner(Q(y, ℓ))`, maximized over `ℓ`.
fn amalgam_scan<F>(
    f: &GridFunction,
    mu: &Weight,
    s: f64,
    ell_grid: &[f64],
    inner: F,
) -> Result<(f64, f64, usize, usize)>
where
    F: Fn(&Cube) -> Result<f64> + Sync,
{
    check_weight(f, mu)?;
    check_ell_grid(ell_grid)?;
    if !(s >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "s must satisfy s >= 1, got {s}"
        )));
    }
    let spec = *f.spec();
    let muv = mu.values();
    let cv = spec.cell_volume();
    let mut per_ell = Vec::with_capacity(ell_grid.len());
    let mut excluded = 0;
    let mut cubes = 0;
    for &ell in ell_grid {
        let vals = (0..spec.n_cells())
            .into_par_iter()
            .map(|idx| {
                let c = spec.center(idx);
                let q = Cube::new(c[..spec.dim].to_vec(), ell);
                if !mostly_inside(&spec, &q) {
                    return Ok(None);
                }
                inner(&q).map(|v| Some((idx, v)))
            })
            .collect::<Result<Vec<Option<(usize, f64)>>>>()?;
        let mut acc = 0.0f64;
        for item in &vals {
            match item {
                None => excluded += 1,
                Some((idx, v)) => {
                    cubes += 1;
                    if s.is_infinite() {
                        acc = acc.max(*v);
                    } else {
                        acc += v.powf(s) * muv[*idx] * cv;
                    }
                }
            }
        }
        per_ell.push(if s.is_infinite() {
            acc
        } else {
            acc.powf(1.0 / s)
        });
    }
    let (k, value) = argmax(&per_ell);
    Ok((value, ell_grid[k], cubes, excluded))
}

fn amalgam_meta(ell_grid: &[f64], cubes: usize, excluded: usize) -> FamilyMeta {
    FamilyMeta {
        tag: "centers-by-side".into(),
        cubes,
        scales: ell_grid.len(),
        excluded,
    }
}

/// `sup_ℓ ‖ w(Q(y,ℓ))^{1/α − 1/p − 1/s} ‖f χ_{Q(y,ℓ)}‖_{L^p(ν)} ‖_{L^s(μ)}`.
#[allow(clippy::too_many_arguments)]
pub fn amalgam_norm(
    f: &GridFunction,
    nu: &Weight,
    w: &Weight,
    mu: &Weight,
    p: f64,
    s: f64,
    alpha: f64,
    ell_grid: &[f64],
) -> Result<NormResult> {
    check_weight(f, nu)?;
    check_weight(f, w)?;
    check_p(p)?;
    if !(p <= alpha && alpha <= s) {
        return Err(Error::InvalidParameter(format!(
            "amalgam exponents must satisfy p <= alpha <= s, got p = {p}, alpha = {alpha}, s = {s}"
        )));
    }
    let e = 1.0 / alpha - 1.0 / p - if s.is_infinite() { 0.0 } else { 1.0 / s };
    let (nv, wv) = (nu.values(), w.values());
    let (value, ell, cubes, excluded) = amalgam_scan(f, mu, s, ell_grid, |q| {
        let wq = f
            .spec()
            .overlap(q)
            .ok_or(Error::EmptyIntersection)?
            .integrate(&wv);
        Ok(wq.powf(e) * lp_power_on(f.values(), &nv, p, f, q)?.powf(1.0 / p))
    })?;
    let mut r = NormResult::new(NormId::Amalgam, value)
        .param("p", p)
        .param("s", s)
        .param("alpha", alpha);
    r.family_meta = amalgam_meta(ell_grid, cubes, excluded);
    r.witness = Some(Witness {
        cube: None,
        ell: Some(ell),
    });
    Ok(r)
}

/// `sup_ℓ ‖ w(Q(y,ℓ))^{1/β − 1/q − 1/s} ‖f χ_{Q(y,ℓ)}‖_{WL^q(w)} ‖_{L^s(μ)}`.
pub fn weak_amalgam_norm(
    f: &GridFunction,
    w: &Weight,
    mu: &Weight,
    q: f64,
    s: f64,
    beta: f64,
    ell_grid: &[f64],
) -> Result<NormResult> {
    check_weight(f, w)?;
    check_p(q)?;
    if !(q <= beta && beta <= s) {
        return Err(Error::InvalidParameter(format!(
            "weak amalgam exponents must satisfy q <= beta <= s, got q = {q}, beta = {beta}, s = {s}"
        )));
    }
    let e = 1.0 / beta - 1.0 / q - if s.is_infinite() { 0.0 } else { 1.0 / s };
    let wv = w.values();
    let (value, ell, cubes, excluded) = amalgam_scan(f, mu, s, ell_grid, |cube| {
        let wq = f
            .spec()
            .overlap(cube)
            .ok_or(Error::EmptyIntersection)?
            .integrate(&wv);
        Ok(wq.powf(e) * weak_sup(weak_pairs(f.values(), &wv, f, Some(cube))?, q))
    })?;
    let mut r = NormResult::new(NormId::WeakAmalgam, value)
        .param("q", q)
        .param("s", s)
        .param("beta", beta);
    r.family_meta = amalgam_meta(ell_grid, cubes, excluded);
    r.witness = Some(Witness {
        cube: None,
        ell: Some(ell),
    });
    Ok(r)
}

/// `(1/|Q|) ∫_Q |b − b_Q| dx` over `Q ∩ domain`.
pub fn mean_oscillation(b: &GridFunction, q: &Cube) -> Result<f64> {
    let ov = b.spec().overlap(q).ok_or(Error::EmptyIntersection)?;
    let vol = ov.volume();
    let mean = ov.integrate(b.values()) / vol;
    let mut acc = 0.0;
    ov.for_each(|i, v| acc += (b.values()[i] - mean).abs() * v);
    Ok(acc / vol)
}

/// `sup_{Q∈F} (1/|Q|) ∫_Q |b − b_Q| dx`.
pub fn bmo_norm(b: &GridFunction, family: &CubeFamily) -> Result<NormResult> {
    let (k, value) = sup_over_family(family, |q| mean_oscillation(b, q))?;
    let mut r = NormResult::new(NormId::Bmo, value);
    r.family_meta = family_meta(family);
    r.witness = Some(Witness {
        cube: Some(family.cubes[k].clone()),
        ell: None,
    });
    Ok(r)
}

/// `sup_ℓ ‖ (1/|Q(y,ℓ)|) ∫_{Q(y,ℓ)} |f − f_Q| dx ‖_{L^s(μ)}`.
pub fn bmo_ls_norm(f: &GridFunction, mu: &Weight, s: f64, ell_grid: &[f64]) -> Result<NormResult> {
    let (value, ell, cubes, excluded) =
        amalgam_scan(f, mu, s, ell_grid, |q| mean_oscillation(f, q))?;
    let mut r = NormResult::new(NormId::BmoLs, value).param("s", s);
    r.family_meta = amalgam_meta(ell_grid, cubes, excluded);
    r.witness = Some(Witness {
        cube: None,
        ell: Some(ell),
    });
    Ok(r)
}
