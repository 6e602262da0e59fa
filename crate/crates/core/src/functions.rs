//! Cell-average rasterization of the continuous functions used as data,
//! symbols and weights, plus the serializable description of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cube, GridFunction, GridSpec};
use crate::quadrature::{interval_log, interval_power, rect_average, rect_power};

/// Exact cell averages of `|x - center|^a`, `a > -dim`.
pub fn power_cell_average(spec: GridSpec, center: &[f64], a: f64) -> Result<GridFunction> {
    let dim = spec.dim as f64;
    if !(a > -dim) || !a.is_finite() {
        return Err(Error::InvalidWeight(format!(
            "|x|^{a} is not locally integrable in dimension {}",
            spec.dim
        )));
    }
    let c = [
        center.first().copied().unwrap_or(0.0),
        center.get(1).copied().unwrap_or(0.0),
    ];
    let vol = spec.cell_volume();
    let values = (0..spec.n_cells())
        .map(|idx| {
            let i = spec.unflatten(idx);
            let (x0, x1) = spec.axis_cell_bounds(i[0]);
            if spec.dim == 1 {
                interval_power(x0, x1, c[0], a) / vol
            } else {
                let (y0, y1) = spec.axis_cell_bounds(i[1]);
                rect_power(x0, x1, y0, y1, c, a) / vol
            }
        })
        .collect();
    GridFunction::new(spec, values)
}

/// Cell averages of `Π_k |x - c_k|^{a_k}` by refined quadrature.
pub fn power_product_cell_average(spec: GridSpec, terms: &[PowerTerm]) -> Result<GridFunction> {
    if terms.len() == 1 {
        return power_cell_average(spec, &terms[0].center, terms[0].a);
    }
    let dim = spec.dim as f64;
    if let Some(t) = terms.iter().find(|t| !(t.a > -dim)) {
        return Err(Error::InvalidWeight(format!(
            "factor |x - {:?}|^{} is not locally integrable",
            t.center, t.a
        )));
    }
    let centers: Vec<[f64; 2]> = terms
        .iter()
        .map(|t| {
            [
                t.center.first().copied().unwrap_or(0.0),
                t.center.get(1).copied().unwrap_or(0.0),
            ]
        })
        .collect();
    let eval2 = |x: f64, y: f64| {
        centers
            .iter()
            .zip(terms)
            .map(|(c, t)| ((x - c[0]).hypot(y - c[1])).powf(t.a))
            .product::<f64>()
    };
    let singular1: Vec<f64> = centers.iter().map(|c| c[0]).collect();
    let values = (0..spec.n_cells())
        .map(|idx| {
            let i = spec.unflatten(idx);
            let (x0, x1) = spec.axis_cell_bounds(i[0]);
            if spec.dim == 1 {
                crate::quadrature::interval_average(x0, x1, &singular1, 8, &|x| eval2(x, 0.0))
            } else {
                let (y0, y1) = spec.axis_cell_bounds(i[1]);
                rect_average(x0, x1, y0, y1, &centers, 6, &eval2)
            }
        })
        .collect();
    GridFunction::new(spec, values)
}

/// Cell averages of `log|x - center|`; exact in one dimension.
pub fn log_cell_average(spec: GridSpec, center: &[f64]) -> Result<GridFunction> {
    let c = [
        center.first().copied().unwrap_or(0.0),
        center.get(1).copied().unwrap_or(0.0),
    ];
    let h = spec.h();
    let values = (0..spec.n_cells())
        .map(|idx| {
            let i = spec.unflatten(idx);
            let (x0, x1) = spec.axis_cell_bounds(i[0]);
            if spec.dim == 1 {
                interval_log(x0, x1, c[0]) / h
            } else {
                let (y0, y1) = spec.axis_cell_bounds(i[1]);
                rect_average(x0, x1, y0, y1, &[c], 8, &|x, y| {
                    (x - c[0]).hypot(y - c[1]).ln()
                })
            }
        })
        .collect();
    GridFunction::new(spec, values)
}

/// Indicator of the half-space `{x_axis > 0}`.
pub fn half_space_indicator(spec: GridSpec, axis: usize) -> GridFunction {
    let l = spec.half_width;
    let mut lo = vec![-l; spec.dim];
    let hi = vec![l; spec.dim];
    lo[axis.min(spec.dim - 1)] = 0.0;
    GridFunction::box_indicator(spec, &lo, &hi)
}

/// Smooth bump `(1 - |x - c|²/ρ²)²_+` sampled at cell centers.
pub fn smooth_bump(spec: GridSpec, center: &[f64], radius: f64) -> Result<GridFunction> {
    let c = [
        center.first().copied().unwrap_or(0.0),
        center.get(1).copied().unwrap_or(0.0),
    ];
    GridFunction::from_centers(spec, |x| {
        let dx = x[0] - c[0];
        let dy = if spec.dim == 2 { x[1] - c[1] } else { 0.0 };
        let t = 1.0 - (dx * dx + dy * dy) / (radius * radius);
        if t > 0.0 {
            t * t
        } else {
            0.0
        }
    })
}

/// One factor `|x - center|^a` of a power-product weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    #[serde(default)]
    pub center: Vec<f64>,
    pub a: f64,
}

/// A function description that can be rasterized onto any grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        c: f64,
    },
    /// `value · χ_{Π[lo_k, hi_k]}`.
    Indicator {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "one")]
        value: f64,
    },
    /// `χ_{x_axis > 0}`.
    Step {
        #[serde(default)]
        axis: usize,
    },
    /// `log|x - center|`.
    Log {
        #[serde(default)]
        center: Vec<f64>,
    },
    /// `|x - center|^a`, optionally cut off outside `Q(center, cutoff)`.
    Power {
        a: f64,
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default)]
        cutoff: Option<f64>,
    },
    Bump {
        center: Vec<f64>,
        radius: f64,
    },
    Table {
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn padded(center: &[f64], dim: usize) -> Vec<f64> {
    let mut c = center.to_vec();
    c.resize(dim, 0.0);
    c
}

impl FunctionSpec {
    pub fn rasterize(&self, spec: GridSpec) -> Result<GridFunction> {
        match self {
            FunctionSpec::Constant { c } => Ok(GridFunction::constant(spec, *c)),
            FunctionSpec::Indicator { lo, hi, value } => {
                if lo.len() != spec.dim || hi.len() != spec.dim {
                    return Err(Error::InvalidParameter(format!(
                        "indicator bounds must have {} coordinates",
                        spec.dim
                    )));
                }
                Ok(GridFunction::box_indicator(spec, lo, hi).scale(*value))
            }
            FunctionSpec::Step { axis } => Ok(half_space_indicator(spec, *axis)),
            FunctionSpec::Log { center } => log_cell_average(spec, &padded(center, spec.dim)),
            FunctionSpec::Power { a, center, cutoff } => {
                let c = padded(center, spec.dim);
                let f = power_cell_average(spec, &c, *a)?;
                Ok(match cutoff {
                    Some(side) => f.restrict(&Cube::new(c, *side)),
                    None => f,
                })
            }
            FunctionSpec::Bump { center, radius } => {
                smooth_bump(spec, &padded(center, spec.dim), *radius)
            }
            FunctionSpec::Table { values } => GridFunction::new(spec, values.clone()),
        }
    }
}
