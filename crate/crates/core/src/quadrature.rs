//! Gauss–Legendre rules and the closed-form rectangle integrals of radial
//! powers that the kernel and weight constructors are built on.

use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 16-point rule.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Shared 6-point rule used for smooth cell averages.
pub fn gl6() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(6))
}

/// `∫_0^t (c² + s²)^{a/2} ds` for `c > 0`, by Gauss–Legendre on panels that
/// double in length from `c` outwards, so the integrand varies by a bounded
/// factor on each panel.
fn radial_line(c: f64, t: f64, a: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let rule = gl16();
    let g = |s: f64| (c * c + s * s).powf(0.5 * a);
    let first = t.min(c);
    let mut total = rule.integrate(0.0, first, g);
    let mut lo = first;
    while lo < t {
        let hi = (2.0 * lo).min(t);
        total += rule.integrate(lo, hi, g);
        lo = hi;
    }
    total
}

/// `∫_{[0,u]×[0,v]} |z|^a dz` for `u, v ≥ 0` and `a > -2`.
///
/// Polar coordinates split the rectangle along its diagonal; each triangle
/// reduces to a line integral along the far edge.
pub fn corner_rect_power(u: f64, v: f64, a: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    (u * radial_line(u, v, a) + v * radial_line(v, u, a)) / (a + 2.0)
}

/// `∫_{x0}^{x1} |t - p|^a dt` for `a > -1`.
pub fn interval_power(x0: f64, x1: f64, p: f64, a: f64) -> f64 {
    let anti = |s: f64| s.signum() * s.abs().powf(a + 1.0) / (a + 1.0);
    anti(x1 - p) - anti(x0 - p)
}

/// `∫_R |z - p|^a dz` over the rectangle `R = [x0,x1]×[y0,y1]`, `a > -2`,
/// by inclusion–exclusion on rectangles with a corner at `p`.
pub fn rect_power(x0: f64, x1: f64, y0: f64, y1: f64, p: [f64; 2], a: f64) -> f64 {
    let s = |u: f64, v: f64| u.signum() * v.signum() * corner_rect_power(u.abs(), v.abs(), a);
    let (u0, u1) = (x0 - p[0], x1 - p[0]);
    let (v0, v1) = (y0 - p[1], y1 - p[1]);
    s(u1, v1) - s(u0, v1) - s(u1, v0) + s(u0, v0)
}

/// `∫_{x0}^{x1} log|t - p| dt`.
pub fn interval_log(x0: f64, x1: f64, p: f64) -> f64 {
    let anti = |s: f64| {
        if s == 0.0 {
            0.0
        } else {
            s * s.abs().ln() - s
        }
    };
    anti(x1 - p) - anti(x0 - p)
}

/// Average of a 2-D function over a rectangle by tensor Gauss–Legendre,
/// recursively quartering any sub-rectangle that touches one of `singular`
/// (down to `depth` levels).
pub fn rect_average<F: Fn(f64, f64) -> f64>(
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    singular: &[[f64; 2]],
    depth: usize,
    f: &F,
) -> f64 {
    let touches = singular
        .iter()
        .any(|p| p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1);
    if touches && depth > 0 {
        let xm = 0.5 * (x0 + x1);
        let ym = 0.5 * (y0 + y1);
        let parts = [
            (x0, xm, y0, ym),
            (xm, x1, y0, ym),
            (x0, xm, ym, y1),
            (xm, x1, ym, y1),
        ];
        return parts
            .iter()
            .map(|&(a, b, c, d)| rect_average(a, b, c, d, singular, depth - 1, f))
            .sum::<f64>()
            / 4.0;
    }
    let rule = gl6();
    let mut acc = 0.0;
    let (hx, mx) = (0.5 * (x1 - x0), 0.5 * (x0 + x1));
    let (hy, my) = (0.5 * (y1 - y0), 0.5 * (y0 + y1));
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        for (yj, wj) in rule.nodes.iter().zip(&rule.weights) {
            acc += wi * wj * f(mx + hx * xi, my + hy * yj);
        }
    }
    acc / 4.0
}

/// Average of a 1-D function over an interval, with the same refinement
/// rule as [`rect_average`].
pub fn interval_average<F: Fn(f64) -> f64>(
    x0: f64,
    x1: f64,
    singular: &[f64],
    depth: usize,
    f: &F,
) -> f64 {
    let touches = singular.iter().any(|&p| p >= x0 && p <= x1);
    if touches && depth > 0 {
        let xm = 0.5 * (x0 + x1);
        return 0.5
            * (interval_average(x0, xm, singular, depth - 1, f)
                + interval_average(xm, x1, singular, depth - 1, f));
    }
    gl6().integrate(x0, x1, f) / (x1 - x0)
}
