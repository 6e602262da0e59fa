//! The Riesz potential on the grid, its commutators, and the estimates used
//! in the proofs of the boundedness results: the annulus tail sum, the
//! kernel-over-a-cube bound, the Hölder step on dilated cubes and the
//! geometric series in the reverse doubling constant.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};
use crate::grid::{Cube, GridFunction, GridSpec};
use crate::quadrature::{interval_power, rect_power};
use crate::weights::Weight;

/// `ζ(γ) = π^{n/2} 2^γ Γ(γ/2) / Γ((n − γ)/2)`.
pub fn zeta(gamma: f64, dim: usize) -> f64 {
    let n = dim as f64;
    PI.powf(n / 2.0) * 2f64.powf(gamma) * gamma_fn(gamma / 2.0) / gamma_fn((n - gamma) / 2.0)
}

/// Cell-averaged Riesz kernel on a fixed grid.
///
/// `table[d]` holds `∫_{cell at offset d} |x_0 − y|^{γ−n} dy` for the
/// center `x_0` of a reference cell; by translation invariance it depends
/// only on `|Δi|` (and `|Δj|` in two dimensions). Integrals are exact: the
/// antiderivative of `|t|^{γ−1}` in one dimension, the rectangle formula
/// for `|z|^{γ−2}` in two, the singular self-cell included.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    spec: GridSpec,
    gamma: f64,
    zeta: f64,
    table: Vec<f64>,
}

impl RieszKernel {
    pub fn new(spec: GridSpec, gamma: f64) -> Result<Self> {
        spec.validate()?;
        let n = spec.dim as f64;
        if !(gamma > 0.0 && gamma < n) {
            return Err(Error::InvalidParameter(format!(
                "gamma must satisfy 0 < gamma < n = {}, got {gamma}",
                spec.dim
            )));
        }
        let h = spec.h();
        let a = gamma - n;
        let m = spec.cells_per_axis;
        let table = if spec.dim == 1 {
            (0..m)
                .map(|d| {
                    let d = d as f64;
                    interval_power((d - 0.5) * h, (d + 0.5) * h, 0.0, a)
                })
                .collect()
        } else {
            let mut t = vec![0.0; m * m];
            for dj in 0..m {
                for di in 0..=dj {
                    let (x, y) = (di as f64, dj as f64);
                    let v = rect_power(
                        (x - 0.5) * h,
                        (x + 0.5) * h,
                        (y - 0.5) * h,
                        (y + 0.5) * h,
                        [0.0, 0.0],
                        a,
                    );
                    t[di + m * dj] = v;
                    t[dj + m * di] = v;
                }
            }
            t
        };
        Ok(Self {
            spec,
            gamma,
            zeta: zeta(gamma, spec.dim),
            table,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// `∫_{cell j} |x_i − y|^{γ−n} dy` (without the `1/ζ` normalization).
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let m = self.spec.cells_per_axis;
        let a = self.spec.unflatten(i);
        let b = self.spec.unflatten(j);
        let di = a[0].abs_diff(b[0]);
        let dj = a[1].abs_diff(b[1]);
        self.table[di + m * dj]
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        self.spec.check_same(f.spec())
    }

    /// `out_i = (1/ζ) Σ_j K_ij · g(i, j)` over the support of `f`.
    fn sum_over_support<G>(&self, f: &GridFunction, g: G) -> GridFunction
    where
        G: Fn(usize, usize, f64) -> f64 + Sync,
    {
        let support: Vec<(usize, f64)> = f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        let inv = 1.0 / self.zeta;
        let values = (0..self.spec.n_cells())
            .into_par_iter()
            .map(|i| {
                support
                    .iter()
                    .map(|&(j, fj)| self.weight(i, j) * g(i, j, fj))
                    .sum::<f64>()
                    * inv
            })
            .collect();
        GridFunction::from_raw(self.spec, values)
    }

    /// `I_γ f` at every cell center.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        Ok(self.sum_over_support(f, |_, _, fj| fj))
    }

    /// `I_γ f(x)` at an arbitrary point, integrating the kernel exactly over
    /// every cell.
    pub fn potential_at(&self, f: &GridFunction, x: &[f64]) -> Result<f64> {
        self.check(f)?;
        if x.len() != self.spec.dim {
            return Err(Error::InvalidParameter(format!(
                "point has {} coordinates, grid has {}",
                x.len(),
                self.spec.dim
            )));
        }
        let a = self.gamma - self.spec.dim as f64;
        let mut acc = 0.0;
        for (j, fj) in f.values().iter().enumerate() {
            if *fj == 0.0 {
                continue;
            }
            let idx = self.spec.unflatten(j);
            let (x0, x1) = self.spec.axis_cell_bounds(idx[0]);
            let k = if self.spec.dim == 1 {
                interval_power(x0, x1, x[0], a)
            } else {
                let (y0, y1) = self.spec.axis_cell_bounds(idx[1]);
                rect_power(x0, x1, y0, y1, [x[0], x[1]], a)
            };
            acc += k * fj;
        }
        Ok(acc / self.zeta)
    }

    /// `[b, I_γ]_m f(x) = (1/ζ) ∫ (b(x) − b(y))^m f(y) |x − y|^{γ−n} dy`.
    pub fn commutator(&self, b: &GridFunction, f: &GridFunction, m: u32) -> Result<GridFunction> {
        self.check(f)?;
        self.check(b)?;
        if m == 0 {
            return Err(Error::InvalidParameter(
                "commutator order m must be at least 1".into(),
            ));
        }
        let bv = b.values();
        let m = m as i32;
        Ok(self.sum_over_support(f, |i, j, fj| (bv[i] - bv[j]).powi(m) * fj))
    }

    /// `b · I_γ f − I_γ(b f)`.
    pub fn commutator_difference(
        &self,
        b: &GridFunction,
        f: &GridFunction,
    ) -> Result<GridFunction> {
        let bf = b.zip_with(f, |x, y| x * y)?;
        let i_f = self.apply(f)?;
        let i_bf = self.apply(&bf)?;
        let bif = b.zip_with(&i_f, |x, y| x * y)?;
        bif.zip_with(&i_bf, |x, y| x - y)
    }
}

/// Sides of the annulus estimate for `f₂ = f·χ_{(2Q)^c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    /// `max_{x ∈ Q} |I_γ f₂(x)|`
    pub lhs_max: f64,
    /// `Σ_{j=1}^{J} |2^{j+1}Q|^{γ/n − 1} ∫_{2^{j+1}Q} |f₂|`
    pub rhs: f64,
}

impl TailBound {
    pub fn ratio(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs_max / self.rhs
        } else {
            0.0
        }
    }
}

/// Evaluates both sides of the pointwise bound for the far part of `f`.
pub fn annulus_tail_bound(
    f: &GridFunction,
    q: &Cube,
    k: &RieszKernel,
    j_max: usize,
) -> Result<TailBound> {
    if j_max < 1 {
        return Err(Error::InvalidParameter("j_max must be at least 1".into()));
    }
    let spec = *k.spec();
    spec.check_same(f.spec())?;
    let f2 = f.restrict_complement(&q.dilate(2.0));
    let i_f2 = k.apply(&f2)?;
    let ov = spec.overlap(q).ok_or(Error::EmptyIntersection)?;
    let mut lhs_max = 0.0f64;
    ov.for_each(|i, _| lhs_max = lhs_max.max(i_f2.values()[i].abs()));
    let abs = f2.abs();
    let expo = k.gamma() / spec.dim as f64 - 1.0;
    let mut rhs = 0.0;
    for j in 1..=j_max {
        let big = q.dilate(2f64.powi(j as i32 + 1));
        if let Some(ov) = spec.overlap(&big) {
            rhs += ov.volume().powf(expo) * ov.integrate(abs.values());
        }
    }
    Ok(TailBound { lhs_max, rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelCubeBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `∫_Q |x − y|^{γ−n} dx` against `ω_{n−1}·(1/γ)·(5nℓ/2)^γ` for `y ∈ 4Q`,
/// with `ω₀ = 2`, `ω₁ = 2π`. The left side is integrated exactly.
pub fn kernel_cube_bound_check(q: &Cube, y: &[f64], gamma: f64) -> Result<KernelCubeBound> {
    let dim = q.dim();
    if !(dim == 1 || dim == 2) || y.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "cube and point dimensions must agree and be 1 or 2, got {dim} and {}",
            y.len()
        )));
    }
    let n = dim as f64;
    if !(gamma > 0.0 && gamma < n) {
        return Err(Error::InvalidParameter(format!(
            "gamma must satisfy 0 < gamma < n = {dim}, got {gamma}"
        )));
    }
    if !q.dilate(4.0).contains(y) {
        return Err(Error::InvalidParameter(format!(
            "point {y:?} is not in 4Q for {}",
            q.label()
        )));
    }
    let half = 0.5 * q.side;
    let a = gamma - n;
    let lhs = if dim == 1 {
        interval_power(q.center[0] - half, q.center[0] + half, y[0], a)
    } else {
        rect_power(
            q.center[0] - half,
            q.center[0] + half,
            q.center[1] - half,
            q.center[1] + half,
            [y[0], y[1]],
            a,
        )
    };
    let omega = if dim == 1 { 2.0 } else { 2.0 * PI };
    let rhs = omega / gamma * (2.5 * n * q.side).powf(gamma);
    Ok(KernelCubeBound {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-8),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderStep {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `w(P) ≤ |P|^{1/r'} (∫_P w^r)^{1/r}` for `P = 2^{j+1}Q ∩ domain`.
pub fn holder_step_check(w: &Weight, q: &Cube, j: u32, r: f64) -> Result<HolderStep> {
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!("r must exceed 1, got {r}")));
    }
    let big = q.dilate(2f64.powi(j as i32 + 1));
    let ov = w.grid().overlap(&big).ok_or(Error::EmptyIntersection)?;
    let wv = w.values();
    let lhs = ov.integrate(&wv);
    let wr: Vec<f64> = wv.iter().map(|x| x.powf(r)).collect();
    let rp = r / (r - 1.0);
    let rhs = ov.volume().powf(1.0 / rp) * ov.integrate(&wr).powf(1.0 / r);
    Ok(HolderStep {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-10),
    })
}

/// Partial sums `Σ_{j=1}^{J} D^{−e(j+1)}` for `J = 1..=j_max` and the bound
/// `1/(D^e − 1)` they stay under when `D > 1`.
pub fn geometric_tail(d: f64, e: f64, j_max: usize) -> Result<(Vec<f64>, f64)> {
    if !(d > 1.0 && e > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "geometric tail needs D > 1 and e > 0, got D = {d}, e = {e}"
        )));
    }
    let mut sums = Vec::with_capacity(j_max);
    let mut acc = 0.0;
    for j in 1..=j_max {
        acc += d.powf(-e * (j as f64 + 1.0));
        sums.push(acc);
    }
    Ok((sums, 1.0 / (d.powf(e) - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_closed_forms() {
        // n = 1, γ = 1/2: Γ(1/4) cancels, ζ = √π·√2
        assert!((zeta(0.5, 1) - (2.0 * PI).sqrt()).abs() < 1e-12);
        // n = 2, γ = 1: π·2·Γ(1/2)/Γ(1/2) = 2π
        assert!((zeta(1.0, 2) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn point_value_on_unit_interval() {
        let g = GridSpec::new(1, 4.0, 128).unwrap();
        let k = RieszKernel::new(g, 0.5).unwrap();
        let f = GridFunction::box_indicator(g, &[-1.0], &[1.0]);
        let v = k.potential_at(&f, &[0.0]).unwrap();
        let expect = 4.0 / (2.0 * PI).sqrt();
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn kernel_table_sums_match_direct_integral() {
        // Σ_j K(0, j) over the whole grid = ∫_{[-L,L]} |x_0 − y|^{γ−1} dy
        let g = GridSpec::new(1, 2.0, 32).unwrap();
        let k = RieszKernel::new(g, 0.3).unwrap();
        let x0 = g.axis_center(5);
        let s: f64 = (0..32).map(|j| k.weight(5, j)).sum();
        let exact = interval_power(-2.0, 2.0, x0, 0.3 - 1.0);
        assert!((s - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn two_dimensional_table_is_symmetric() {
        let g = GridSpec::new(2, 1.0, 8).unwrap();
        let k = RieszKernel::new(g, 0.8).unwrap();
        for i in 0..g.n_cells() {
            for j in 0..g.n_cells() {
                assert_eq!(k.weight(i, j), k.weight(j, i));
            }
        }
        // total over the domain from a corner-free center matches rect_power
        let c = g.center(27);
        let s: f64 = (0..g.n_cells()).map(|j| k.weight(27, j)).sum();
        let exact = rect_power(-1.0, 1.0, -1.0, 1.0, c, 0.8 - 2.0);
        assert!((s - exact).abs() < 1e-11 * exact);
    }

    #[test]
    fn commutator_forms_agree() {
        let g = GridSpec::new(1, 2.0, 64).unwrap();
        let k = RieszKernel::new(g, 0.4).unwrap();
        let b = GridFunction::from_centers(g, |x| x[0].sin()).unwrap();
        let f = GridFunction::from_centers(g, |x| (x[0] * x[0]).cos()).unwrap();
        let a = k.commutator(&b, &f, 1).unwrap();
        let d = k.commutator_difference(&b, &f).unwrap();
        let scale = f.max_abs();
        for (x, y) in a.values().iter().zip(d.values()) {
            assert!((x - y).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn kernel_cube_bound_center_example() {
        // y at the center: lhs = 2·2√(ℓ/2), rhs = 2·2·(5ℓ/2)^{1/2}
        let ell = 0.8;
        let r = kernel_cube_bound_check(&Cube::new(vec![0.3], ell), &[0.3], 0.5).unwrap();
        assert!((r.lhs - 4.0 * (ell / 2.0).sqrt()).abs() < 1e-14);
        assert!((r.rhs - 4.0 * (2.5 * ell).sqrt()).abs() < 1e-14);
        assert!(r.holds);
        assert!(kernel_cube_bound_check(&Cube::new(vec![0.0], 1.0), &[2.5], 0.5).is_err());
    }

    #[test]
    fn tail_vanishes_for_local_data() {
        let g = GridSpec::new(1, 4.0, 128).unwrap();
        let k = RieszKernel::new(g, 0.5).unwrap();
        let q = Cube::new(vec![0.0], 0.5);
        let f = GridFunction::indicator(g, &q.dilate(2.0));
        let t = annulus_tail_bound(&f, &q, &k, 3).unwrap();
        assert_eq!(t.lhs_max, 0.0);
        assert_eq!(t.rhs, 0.0);
        assert_eq!(t.ratio(), 0.0);
    }

    #[test]
    fn geometric_tail_bounded() {
        let (sums, bound) = geometric_tail(1.5, 0.7, 40).unwrap();
        assert!(sums.windows(2).all(|w| w[1] > w[0]));
        assert!(*sums.last().unwrap() < bound);
    }
}
