//! Uniform grids on `[-L, L]^dim`, piecewise-constant grid functions, cubes,
//! and exact integration over cube/domain intersections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Snap distance, in cell units, below which a coordinate is treated as lying
/// exactly on a cell boundary.
const SNAP: f64 = 1e-9;

/// A uniform grid with `cells_per_axis` cells per axis over `[-L, L]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub cells_per_axis: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, cells_per_axis: usize) -> Result<Self> {
        let spec = Self {
            dim,
            half_width,
            cells_per_axis,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidGrid(format!(
                "dim must be 1 or 2, got {}",
                self.dim
            )));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half_width must be positive, got {}",
                self.half_width
            )));
        }
        if self.cells_per_axis < 2 || !self.cells_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "cells_per_axis must be even and at least 2, got {}",
                self.cells_per_axis
            )));
        }
        Ok(())
    }

    /// Cell side length `2L/N`.
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.cells_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn n_cells(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    /// Same domain with twice as many cells per axis.
    pub fn refined(&self) -> Self {
        Self {
            cells_per_axis: 2 * self.cells_per_axis,
            ..*self
        }
    }

    /// Center of cell `i` along one axis.
    pub fn axis_center(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h()
    }

    /// Per-axis indices of a flat cell index (axis 0 varies fastest).
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        let n = self.cells_per_axis;
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % n, idx / n]
        }
    }

    pub fn flatten(&self, i: [usize; 2]) -> usize {
        i[0] + if self.dim == 2 {
            i[1] * self.cells_per_axis
        } else {
            0
        }
    }

    /// Cell center; the second coordinate is 0 in one dimension.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let i = self.unflatten(idx);
        let y = if self.dim == 2 {
            self.axis_center(i[1])
        } else {
            0.0
        };
        [self.axis_center(i[0]), y]
    }

    /// The cell as a cube.
    pub fn cell_cube(&self, idx: usize) -> Cube {
        let c = self.center(idx);
        Cube::new(c[..self.dim].to_vec(), self.h())
    }

    /// Bounds `[lo, hi]` of cell `i` along one axis.
    pub fn axis_cell_bounds(&self, i: usize) -> (f64, f64) {
        let lo = -self.half_width + i as f64 * self.h();
        (lo, lo + self.h())
    }

    /// The whole domain box as a cube.
    pub fn domain_cube(&self) -> Cube {
        Cube::new(vec![0.0; self.dim], 2.0 * self.half_width)
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }

    fn cell_coord(&self, x: f64) -> f64 {
        let t = (x + self.half_width) / self.h();
        let r = t.round();
        if (t - r).abs() < SNAP {
            r
        } else {
            t
        }
    }

    fn axis_overlap(&self, lo: f64, hi: f64) -> Option<(usize, Vec<f64>)> {
        let n = self.cells_per_axis as f64;
        let a = self.cell_coord(lo).max(0.0);
        let b = self.cell_coord(hi).min(n);
        if b <= a {
            return None;
        }
        let start = a.floor() as usize;
        let end = (b.ceil() as usize).min(self.cells_per_axis);
        let fracs = (start..end)
            .map(|i| {
                let i = i as f64;
                (b.min(i + 1.0) - a.max(i)).max(0.0)
            })
            .collect();
        Some((start, fracs))
    }

    /// Cells meeting `cube ∩ domain` together with their overlap volumes.
    /// `None` when the intersection has zero measure.
    pub fn overlap(&self, cube: &Cube) -> Option<Overlap> {
        debug_assert_eq!(cube.dim(), self.dim);
        let half = 0.5 * cube.side;
        let lo: Vec<f64> = cube.center.iter().map(|c| c - half).collect();
        let hi: Vec<f64> = cube.center.iter().map(|c| c + half).collect();
        self.overlap_box(&lo, &hi)
    }

    /// As [`Self::overlap`] for the box `Π [lo_k, hi_k]`.
    pub fn overlap_box(&self, lo: &[f64], hi: &[f64]) -> Option<Overlap> {
        let (s0, f0) = self.axis_overlap(lo[0], hi[0])?;
        let (s1, f1) = if self.dim == 2 {
            self.axis_overlap(lo[1], hi[1])?
        } else {
            (0, vec![1.0])
        };
        Some(Overlap {
            start: [s0, s1],
            fracs: [f0, f1],
            n: self.cells_per_axis,
            cell_volume: self.cell_volume(),
        })
    }
}

/// Cells covered by a cube, with fractional overlaps per axis.
#[derive(Debug, Clone)]
pub struct Overlap {
    start: [usize; 2],
    fracs: [Vec<f64>; 2],
    n: usize,
    cell_volume: f64,
}

impl Overlap {
    /// Calls `f(cell_index, overlap_volume)` for every covered cell.
    pub fn for_each<F: FnMut(usize, f64)>(&self, mut f: F) {
        for (j, fy) in self.fracs[1].iter().enumerate() {
            let row = (self.start[1] + j) * self.n;
            for (i, fx) in self.fracs[0].iter().enumerate() {
                let v = fx * fy * self.cell_volume;
                if v > 0.0 {
                    f(row + self.start[0] + i, v);
                }
            }
        }
    }

    /// Lebesgue measure of `cube ∩ domain`.
    pub fn volume(&self) -> f64 {
        self.fracs[0].iter().sum::<f64>() * self.fracs[1].iter().sum::<f64>() * self.cell_volume
    }

    /// `Σ values[i] · vol_i`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.for_each(|i, v| acc += values[i] * v);
        acc
    }
}

/// An axis-parallel cube `Q(y, ℓ)` centered at `y` with side `ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Self {
        Self { center, side }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `|Q| = ℓ^dim`.
    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    /// `λQ(y, ℓ) := Q(y, λ√dim·ℓ)`.
    pub fn dilate(&self, lambda: f64) -> Cube {
        let factor = lambda * (self.dim() as f64).sqrt();
        Cube::new(self.center.clone(), factor * self.side)
    }

    /// Closed containment test for a point.
    pub fn contains(&self, x: &[f64]) -> bool {
        let half = 0.5 * self.side;
        self.center
            .iter()
            .zip(x)
            .all(|(c, xi)| (xi - c).abs() <= half * (1.0 + 1e-12))
    }

    /// True when the cube lies inside `[-L, L]^dim`.
    pub fn inside_domain(&self, spec: &GridSpec) -> bool {
        let half = 0.5 * self.side;
        let tol = 1e-12 * spec.half_width;
        self.center
            .iter()
            .all(|c| c - half >= -spec.half_width - tol && c + half <= spec.half_width + tol)
    }

    pub fn label(&self) -> String {
        let c: Vec<String> = self.center.iter().map(|x| format!("{x:.6}")).collect();
        format!("Q([{}], {:.6})", c.join(", "), self.side)
    }
}

/// A piecewise-constant function on the cells of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.n_cells() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                spec.n_cells(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value {} at cell {i}",
                values[i]
            )));
        }
        Ok(Self { spec, values })
    }

    /// Construction without the finiteness scan, for internal results whose
    /// inputs were already validated.
    pub(crate) fn from_raw(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.n_cells());
        Self { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, 0.0)
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        Self::from_raw(spec, vec![c; spec.n_cells()])
    }

    /// Samples `f` at cell centers.
    pub fn from_centers<F: Fn([f64; 2]) -> f64>(spec: GridSpec, f: F) -> Result<Self> {
        let values = (0..spec.n_cells()).map(|i| f(spec.center(i))).collect();
        Self::new(spec, values)
    }

    /// Cell-average of the indicator of a cube (fractional overlap).
    pub fn indicator(spec: GridSpec, cube: &Cube) -> Self {
        Self::box_indicator(
            spec,
            &cube
                .center
                .iter()
                .map(|c| c - 0.5 * cube.side)
                .collect::<Vec<_>>(),
            &cube
                .center
                .iter()
                .map(|c| c + 0.5 * cube.side)
                .collect::<Vec<_>>(),
        )
    }

    /// Cell-average of the indicator of the box `Π [lo_k, hi_k]`.
    pub fn box_indicator(spec: GridSpec, lo: &[f64], hi: &[f64]) -> Self {
        let mut values = vec![0.0; spec.n_cells()];
        if let Some(ov) = spec.overlap_box(lo, hi) {
            let cv = spec.cell_volume();
            ov.for_each(|i, v| values[i] = v / cv);
        }
        Self::from_raw(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self::from_raw(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, f: F) -> Result<Self> {
        self.spec.check_same(&other.spec)?;
        Ok(Self::from_raw(
            self.spec,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `f · χ_Q` with boundary cells weighted by their overlap fraction.
    pub fn restrict(&self, cube: &Cube) -> Self {
        let chi = Self::indicator(self.spec, cube);
        Self::from_raw(
            self.spec,
            self.values
                .iter()
                .zip(&chi.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    /// `f · χ_{Q^c}`.
    pub fn restrict_complement(&self, cube: &Cube) -> Self {
        let chi = Self::indicator(self.spec, cube);
        Self::from_raw(
            self.spec,
            self.values
                .iter()
                .zip(&chi.values)
                .map(|(a, b)| a * (1.0 - b))
                .collect(),
        )
    }

    /// `∫_{Q∩domain} f dx`.
    pub fn integrate(&self, cube: &Cube) -> Result<f64> {
        integrate(self, cube)
    }

    /// Mean of `f` over `Q∩domain`.
    pub fn mean(&self, cube: &Cube) -> Result<f64> {
        let ov = self.spec.overlap(cube).ok_or(Error::EmptyIntersection)?;
        Ok(ov.integrate(&self.values) / ov.volume())
    }

    /// Integral over the whole domain.
    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_volume()
    }

    /// CSV rows `x[,y],value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.spec.dim == 1 {
            "x,value\n"
        } else {
            "x,y,value\n"
        });
        for (i, v) in self.values.iter().enumerate() {
            let c = self.spec.center(i);
            if self.spec.dim == 1 {
                out.push_str(&format!("{},{}\n", c[0], v));
            } else {
                out.push_str(&format!("{},{},{}\n", c[0], c[1], v));
            }
        }
        out
    }
}

/// `∫_Q f dx` over `Q ∩ [-L, L]^dim`; exact for piecewise-constant `f`.
pub fn integrate(f: &GridFunction, cube: &Cube) -> Result<f64> {
    let ov = f.spec.overlap(cube).ok_or(Error::EmptyIntersection)?;
    Ok(ov.integrate(&f.values))
}

/// A finite, deterministic list of cubes standing in for "all cubes".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeFamily {
    pub tag: String,
    pub cubes: Vec<Cube>,
}

impl CubeFamily {
    pub fn new(tag: impl Into<String>, cubes: Vec<Cube>) -> Self {
        Self {
            tag: tag.into(),
            cubes,
        }
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Cube> {
        self.cubes.iter()
    }

    /// Distinct side lengths, largest first.
    pub fn scales(&self) -> Vec<f64> {
        let mut sides: Vec<f64> = self.cubes.iter().map(|c| c.side).collect();
        sides.sort_by(|a, b| b.total_cmp(a));
        sides.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        sides
    }

    /// Index of the scale (in [`Self::scales`]) of every cube.
    pub fn scale_index(&self) -> Vec<usize> {
        let scales = self.scales();
        self.cubes
            .iter()
            .map(|c| {
                scales
                    .iter()
                    .position(|s| (s - c.side).abs() <= 1e-12 * s.abs())
                    .unwrap_or(0)
            })
            .collect()
    }

    /// Sub-family of cubes whose dilation `2Q` stays inside the domain.
    pub fn with_interior_doubles(&self, spec: &GridSpec) -> CubeFamily {
        CubeFamily::new(
            format!("{}/interior-2Q", self.tag),
            self.cubes
                .iter()
                .filter(|c| c.dilate(2.0).inside_domain(spec))
                .cloned()
                .collect(),
        )
    }

    /// Cubes `Q(y, ℓ)` at every cell center `y` and every `ℓ` in `ell_grid`,
    /// dropping those with more than half their volume outside the domain.
    pub fn induced(spec: &GridSpec, ell_grid: &[f64]) -> CubeFamily {
        let mut cubes = Vec::new();
        for &ell in ell_grid {
            for idx in 0..spec.n_cells() {
                let c = spec.center(idx);
                let q = Cube::new(c[..spec.dim].to_vec(), ell);
                if mostly_inside(spec, &q) {
                    cubes.push(q);
                }
            }
        }
        CubeFamily::new("induced-centers", cubes)
    }
}

/// True when at least half of `|Q|` lies inside the domain.
pub fn mostly_inside(spec: &GridSpec, cube: &Cube) -> bool {
    spec.overlap(cube)
        .map(|ov| ov.volume() >= 0.5 * cube.volume() * (1.0 - 1e-12))
        .unwrap_or(false)
}

/// Dyadic subcubes of the domain down to `depth`, plus copies of every scale
/// shifted by multiples of `ℓ/translations` along each axis that remain in
/// the domain. Ordered by level, then shift, then position.
pub fn make_cube_family(spec: &GridSpec, depth: usize, translations: usize) -> CubeFamily {
    let translations = translations.max(1);
    let l = spec.half_width;
    let mut cubes = Vec::new();
    for level in 0..=depth {
        let per_axis = 1usize << level;
        let side = 2.0 * l / per_axis as f64;
        let shifts: Vec<[usize; 2]> = if spec.dim == 1 {
            (0..translations).map(|t| [t, 0]).collect()
        } else {
            (0..translations)
                .flat_map(|t1| (0..translations).map(move |t0| [t0, t1]))
                .collect()
        };
        for shift in shifts {
            let offset = [
                side * shift[0] as f64 / translations as f64,
                side * shift[1] as f64 / translations as f64,
            ];
            let rows = if spec.dim == 2 { per_axis } else { 1 };
            for j in 0..rows {
                for i in 0..per_axis {
                    let cx = -l + (i as f64 + 0.5) * side + offset[0];
                    let center = if spec.dim == 2 {
                        vec![cx, -l + (j as f64 + 0.5) * side + offset[1]]
                    } else {
                        vec![cx]
                    };
                    let q = Cube::new(center, side);
                    if q.inside_domain(spec) {
                        cubes.push(q);
                    }
                }
            }
        }
    }
    let tag = if translations > 1 {
        format!("dyadic-depth-{depth}/translated-{translations}")
    } else {
        format!("dyadic-depth-{depth}")
    };
    CubeFamily::new(tag, cubes)
}

/// Default `ℓ` grid: `points` geometric scales from `4h` to `L`, each snapped
/// to a multiple of `h`, deduplicated.
pub fn default_ell_grid(spec: &GridSpec, points: usize) -> Vec<f64> {
    let h = spec.h();
    let lo = 4.0 * h;
    let hi = spec.half_width.max(lo);
    let points = points.max(1);
    let mut grid: Vec<f64> = (0..points)
        .map(|k| {
            let t = if points == 1 {
                1.0
            } else {
                k as f64 / (points - 1) as f64
            };
            let ell = lo * (hi / lo).powf(t);
            (ell / h).round().max(1.0) * h
        })
        .collect();
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}
