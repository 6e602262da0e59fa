//! The exponent bundle shared by norms, conditions and theorem runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-12;

/// Serde helpers for extended reals: `+∞` is written as the string `"inf"`.
pub mod ext_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn from_repr<E: de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => Err(E::custom(format!(
                    "expected a number or \"inf\", got {other:?}"
                ))),
            },
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
        }
    }

    /// JSON value for a possibly infinite real.
    pub fn to_value(x: f64) -> serde_json::Value {
        if x.is_infinite() && x > 0.0 {
            serde_json::Value::from("inf")
        } else {
            serde_json::Value::from(x)
        }
    }
}

/// `p' = p/(p − 1)`, with `1' = ∞`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// `γ, p, q, κ, α, β, s, r, m` with their admissibility relations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSet {
    pub gamma: f64,
    pub p: f64,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(
        default,
        with = "ext_real::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

impl ExponentSet {
    pub fn new(gamma: f64, p: f64, q: f64) -> Self {
        Self {
            gamma,
            p,
            q,
            kappa: None,
            alpha: None,
            beta: None,
            s: None,
            r: None,
            m: None,
        }
    }

    /// `(γ, p, q)` with `1/q = 1/p − γ/dim`.
    pub fn sobolev(gamma: f64, p: f64, dim: usize) -> Result<Self> {
        let inv_q = 1.0 / p - gamma / dim as f64;
        if !(inv_q > 0.0) {
            return Err(Error::ExponentRelation(format!(
                "1/q = 1/p - gamma/n must be positive, got {inv_q}"
            )));
        }
        Ok(Self::new(gamma, p, 1.0 / inv_q))
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    /// Sets `α` and `s` and derives `β` from `1/β = 1/α − (1/p − 1/q)`.
    pub fn with_amalgam(mut self, alpha: f64, s: f64) -> Self {
        self.alpha = Some(alpha);
        self.s = Some(s);
        let inv_beta = 1.0 / alpha - (1.0 / self.p - 1.0 / self.q);
        self.beta = Some(if inv_beta > 0.0 {
            1.0 / inv_beta
        } else {
            f64::INFINITY
        });
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_m(mut self, m: u32) -> Self {
        self.m = Some(m);
        self
    }

    pub fn pprime(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn qprime(&self) -> f64 {
        conjugate(self.q)
    }

    pub fn r(&self) -> f64 {
        self.r.unwrap_or(2.0)
    }

    pub fn m(&self) -> u32 {
        self.m.unwrap_or(1)
    }

    pub fn kappa(&self) -> Result<f64> {
        self.kappa.ok_or_else(|| {
            Error::InvalidParameter("kappa is required for Morrey-type norms".into())
        })
    }

    pub fn alpha(&self) -> Result<f64> {
        self.alpha.ok_or_else(|| {
            Error::InvalidParameter("alpha is required for amalgam-type norms".into())
        })
    }

    pub fn s(&self) -> Result<f64> {
        self.s
            .ok_or_else(|| Error::InvalidParameter("s is required for amalgam-type norms".into()))
    }

    /// `β`, derived from `α` when absent.
    pub fn beta(&self) -> Result<f64> {
        match self.beta {
            Some(b) => Ok(b),
            None => {
                let alpha = self.alpha()?;
                let inv = 1.0 / alpha - (1.0 / self.p - 1.0 / self.q);
                if inv > 0.0 {
                    Ok(1.0 / inv)
                } else {
                    Err(Error::ExponentRelation(format!(
                        "1/beta = 1/alpha - (1/p - 1/q) must be positive, got {inv}"
                    )))
                }
            }
        }
    }

    /// Checks every relation that involves only the fields present.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let n = dim as f64;
        if !(self.gamma > 0.0 && self.gamma < n) {
            return Err(Error::InvalidParameter(format!(
                "gamma must satisfy 0 < gamma < n = {dim}, got {}",
                self.gamma
            )));
        }
        if !(self.p > 1.0 && self.p <= self.q && self.q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exponents must satisfy 1 < p <= q < inf, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        if let Some(k) = self.kappa {
            if !(k >= 0.0 && k <= self.p / self.q * (1.0 + REL_TOL)) {
                return Err(Error::InvalidParameter(format!(
                    "kappa must satisfy 0 <= kappa <= p/q = {}, got {k}",
                    self.p / self.q
                )));
            }
        }
        if let Some(a) = self.alpha {
            if !(a >= self.p) {
                return Err(Error::InvalidParameter(format!(
                    "alpha must satisfy alpha >= p = {}, got {a}",
                    self.p
                )));
            }
            if let Some(s) = self.s {
                if !(s >= a) {
                    return Err(Error::InvalidParameter(format!(
                        "s must satisfy s >= alpha = {a}, got {s}"
                    )));
                }
            }
        }
        if let Some(b) = self.beta {
            let a = self.alpha()?;
            let lhs = recip(b);
            let rhs = 1.0 / a - (1.0 / self.p - 1.0 / self.q);
            if !close(lhs, rhs) {
                return Err(Error::ExponentRelation(format!(
                    "1/beta = 1/alpha - (1/p - 1/q) fails: 1/beta = {lhs}, right side = {rhs}"
                )));
            }
        }
        if let Some(r) = self.r {
            if !(r > 1.0) {
                return Err(Error::InvalidParameter(format!("r must exceed 1, got {r}")));
            }
        }
        if self.m == Some(0) {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        Ok(())
    }

    /// `1/q = 1/p − γ/n`.
    pub fn check_sobolev(&self, dim: usize) -> Result<()> {
        let lhs = 1.0 / self.q;
        let rhs = 1.0 / self.p - self.gamma / dim as f64;
        if close(lhs, rhs) {
            Ok(())
        } else {
            Err(Error::ExponentRelation(format!(
                "1/q = 1/p - gamma/n fails: 1/q = {lhs}, 1/p - gamma/n = {rhs}"
            )))
        }
    }

    /// `0 ≤ κ < p/q`: the range of the weak-type Morrey estimates, together
    /// with the Lebesgue case `κ = 0`.
    pub fn check_morrey_range(&self) -> Result<()> {
        let k = self.kappa()?;
        let top = self.p / self.q;
        if k >= 0.0 && k < top {
            Ok(())
        } else {
            Err(Error::ExponentRelation(format!(
                "kappa must satisfy 0 <= kappa < p/q = {top}, got {k}"
            )))
        }
    }

    /// `κ = p/q`.
    pub fn check_endpoint_kappa(&self) -> Result<()> {
        let k = self.kappa()?;
        if close(k, self.p / self.q) {
            Ok(())
        } else {
            Err(Error::ExponentRelation(format!(
                "the BMO endpoint needs kappa = p/q = {}, got {k}",
                self.p / self.q
            )))
        }
    }

    /// `p ≤ α < β < s ≤ ∞`.
    pub fn check_amalgam_range(&self) -> Result<()> {
        let (a, b, s) = (self.alpha()?, self.beta()?, self.s()?);
        if self.p <= a && a < b && b < s {
            Ok(())
        } else {
            Err(Error::ExponentRelation(format!(
                "amalgam exponents must satisfy p <= alpha < beta < s, got p = {}, alpha = {a}, beta = {b}, s = {s}",
                self.p
            )))
        }
    }

    /// `1/s = 1/α − (1/p − 1/q)`.
    pub fn check_endpoint_s(&self) -> Result<()> {
        let (a, s) = (self.alpha()?, self.s()?);
        let lhs = recip(s);
        let rhs = 1.0 / a - (1.0 / self.p - 1.0 / self.q);
        if close(lhs, rhs) {
            Ok(())
        } else {
            Err(Error::ExponentRelation(format!(
                "the (BMO, L^s) endpoint needs 1/s = 1/alpha - (1/p - 1/q): 1/s = {lhs}, right side = {rhs}"
            )))
        }
    }
}
