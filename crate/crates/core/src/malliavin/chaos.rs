use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hermite::{gauss_hermite, hermite_values};
use super::SmoothRandomVariable;
use crate::functions::{BaseFunction, Boundedness};
use crate::{Error, Result};

/// Largest supported number of Gaussian variables.
pub const MAX_ARITY: usize = 4;
/// Largest supported degree cap.
pub const MAX_DEGREE: usize = 12;
/// Tail gap above which a polynomial expansion is flagged.
pub const POLYNOMIAL_TAIL_FLAG: f64 = 1e-8;
/// Tail gap above which a non-polynomial expansion is flagged.
pub const ANALYTIC_TAIL_FLAG: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosCoefficient {
    pub alpha: Vec<usize>,
    pub c: f64,
}

/// `F ≈ Σ_{|α| ≤ N} c_α Πᵢ Ĥ_{αᵢ}(ξᵢ)` with `ξᵢ = W(zᵢ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosExpansion {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Graded lexicographic order of `α`.
    pub coeffs: Vec<ChaosCoefficient>,
    /// `E[F²] − Σ c_α²`, the squared `L²` error of the truncation.
    pub tail_gap: f64,
    #[serde(skip)]
    pub second_moment: f64,
    #[serde(skip)]
    pub gradient_moment: f64,
    #[serde(skip)]
    pub nodes_per_axis: usize,
    #[serde(skip)]
    pub flagged: bool,
}

impl ChaosExpansion {
    pub fn coefficient(&self, alpha: &[usize]) -> Option<f64> {
        self.coeffs.iter().find(|c| c.alpha == alpha).map(|c| c.c)
    }

    /// `‖Jₙ F‖² = Σ_{|α| = n} c_α²` for `n = 0..=N`.
    pub fn level_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for c in &self.coeffs {
            out[c.alpha.iter().sum::<usize>()] += c.c * c.c;
        }
        out
    }

    /// `Σₙ n ‖Jₙ F‖²`.
    pub fn weighted_sum(&self) -> f64 {
        self.level_norms().iter().enumerate().map(|(n, v)| n as f64 * v).sum()
    }

    /// `(J₀F, …, J_N F)` evaluated at noise `ξ`.
    pub fn levels(&self, xi: &[f64]) -> Vec<f64> {
        let h: Vec<Vec<f64>> = xi.iter().map(|&x| hermite_values(self.n, x)).collect();
        let mut out = vec![0.0; self.n + 1];
        for c in &self.coeffs {
            let basis: f64 = c.alpha.iter().enumerate().map(|(i, &a)| h[i][a]).product();
            out[c.alpha.iter().sum::<usize>()] += c.c * basis;
        }
        out
    }

    /// Truncated expansion evaluated at noise `ξ`.
    pub fn evaluate(&self, xi: &[f64]) -> f64 {
        self.levels(xi).iter().sum()
    }
}

/// Multi-indices of `m` entries with `|α| ≤ n`, graded lexicographic.
pub fn multi_indices(m: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == m - 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=total).rev() {
            prefix.push(a);
            rec(m, total - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=n {
        rec(m, total, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

/// Gauss–Hermite nodes per axis for degree cap `n` and profile degree `deg`:
/// `⌈(n + deg)/2⌉ + 2`, raised to `deg + 1` for polynomials so that `E[F²]`
/// is integrated exactly too. Non-polynomial profiles use `deg = 2n + 10`.
pub fn nodes_per_axis(n: usize, polynomial_degree: Option<usize>) -> usize {
    match polynomial_degree {
        Some(d) => ((n + d).div_ceil(2) + 2).max(d + 1),
        None => (n + 2 * n + 10).div_ceil(2) + 2,
    }
}

/// Rejects profiles growing faster than `exp(|y|²/4)`, for which Gaussian
/// quadrature of `f` against Hermite polynomials is meaningless.
fn check_growth(base: &dyn BaseFunction) -> Result<()> {
    if base.boundedness() == Boundedness::Bounded || base.polynomial_degree().is_some() {
        return Ok(());
    }
    let m = base.arity();
    let r: f64 = 8.0;
    for i in 0..m {
        for sign in [-1.0, 1.0] {
            let mut y = vec![0.0; m];
            y[i] = sign * r;
            let v = base.value(&y).abs();
            if !v.is_finite() || v.ln() > r * r / 4.0 {
                return Err(Error::InvalidArgument(format!(
                    "profile grows faster than exp(|y|²/4) along axis {i}; Gaussian quadrature is invalid"
                )));
            }
        }
    }
    Ok(())
}

/// Contracts axis `axis` of a row-major tensor of shape `dims` with the
/// matrix `p` (`rows × dims[axis]`, row-major).
fn contract_axis(t: &[f64], dims: &mut [usize], axis: usize, p: &[f64], rows: usize) -> Vec<f64> {
    let d = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * rows * inner];
    for o in 0..outer {
        for a in 0..rows {
            let dst = &mut out[(o * rows + a) * inner..(o * rows + a + 1) * inner];
            for j in 0..d {
                let w = p[a * d + j];
                if w == 0.0 {
                    continue;
                }
                let src = &t[(o * d + j) * inner..(o * d + j + 1) * inner];
                for (x, s) in dst.iter_mut().zip(src) {
                    *x += w * s;
                }
            }
        }
    }
    dims[axis] = rows;
    out
}

/// Chaos coefficients of `F` up to total degree `n` by tensorised
/// Gauss–Hermite quadrature (sum factorisation over the axes).
pub fn chaos_project(f: &SmoothRandomVariable, n: usize) -> Result<ChaosExpansion> {
    let base = f.base().as_ref();
    let m = base.arity();
    if m > MAX_ARITY {
        return Err(Error::InvalidArgument(format!("chaos projection supports at most {MAX_ARITY} variables, got {m}")));
    }
    if n > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!("degree cap must be at most {MAX_DEGREE}, got {n}")));
    }
    check_growth(base)?;
    let poly = base.polynomial_degree();
    let q = nodes_per_axis(n, poly);
    let rule = gauss_hermite(q);
    let total = q.pow(m as u32);
    let with_gradient = base.smoothness() >= 1;

    // (value, |∇f|²) on the tensor grid, row-major with axis 0 slowest
    let samples: Vec<(f64, f64)> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut y = vec![0.0; m];
            let mut rem = flat;
            for i in (0..m).rev() {
                y[i] = rule.nodes[rem % q];
                rem /= q;
            }
            let v = base.value(&y);
            let g2 = if with_gradient {
                let mut g = vec![0.0; m];
                base.gradient(&y, &mut g);
                g.iter().map(|x| x * x).sum()
            } else {
                f64::NAN
            };
            (v, g2)
        })
        .collect();

    let weight = |flat: usize| -> f64 {
        let mut rem = flat;
        let mut w = 1.0;
        for _ in 0..m {
            w *= rule.weights[rem % q];
            rem /= q;
        }
        w
    };
    let mut second_moment = 0.0;
    let mut gradient_moment = 0.0;
    for (i, (v, g2)) in samples.iter().enumerate() {
        let w = weight(i);
        second_moment += w * v * v;
        gradient_moment += w * g2;
    }

    // P[a, j] = w_j Ĥ_a(x_j)
    let rows = n + 1;
    let mut p = vec![0.0; rows * q];
    for j in 0..q {
        let h = hermite_values(n, rule.nodes[j]);
        for a in 0..rows {
            p[a * q + j] = rule.weights[j] * h[a];
        }
    }
    let mut dims = vec![q; m];
    let mut t: Vec<f64> = samples.iter().map(|s| s.0).collect();
    for axis in 0..m {
        t = contract_axis(&t, &mut dims, axis, &p, rows);
    }

    let coeffs: Vec<ChaosCoefficient> = multi_indices(m, n)
        .into_iter()
        .map(|alpha| {
            let idx = alpha.iter().fold(0, |acc, &a| acc * rows + a);
            ChaosCoefficient { c: t[idx], alpha }
        })
        .collect();
    let captured: f64 = coeffs.iter().map(|c| c.c * c.c).sum();
    let tail_gap = second_moment - captured;
    let threshold = if poly.is_some() {
        POLYNOMIAL_TAIL_FLAG
    } else {
        ANALYTIC_TAIL_FLAG
    };
    Ok(ChaosExpansion {
        m,
        n,
        coeffs,
        tail_gap,
        second_moment,
        gradient_moment,
        nodes_per_axis: q,
        flagged: tail_gap.abs() > threshold * second_moment.max(1.0),
    })
}

/// `E‖DF‖²_𝓗` against `Σₙ n‖JₙF‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(|lhs|, 1e-300)`.
    pub relative_gap: f64,
    pub tail_gap: f64,
    pub flagged: bool,
}

pub fn domain_check(f: &SmoothRandomVariable, n: usize) -> Result<DomainCheck> {
    if f.base().smoothness() < 1 {
        return Err(Error::Smoothness {
            name: f.name().to_string(),
            have: f.base().smoothness(),
            need: 1,
        });
    }
    let e = chaos_project(f, n)?;
    let lhs = e.gradient_moment;
    let rhs = e.weighted_sum();
    Ok(DomainCheck {
        lhs,
        rhs,
        relative_gap: (lhs - rhs).abs() / lhs.abs().max(1e-300),
        tail_gap: e.tail_gap,
        flagged: e.flagged,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::DVector;

    use super::*;
    use crate::functions::{Composed, Linear, Outer, Polynomial, Trig};
    use crate::hilbert::{GaussianSpace, SelfAdjointOp};
    use crate::malliavin::Picture;

    fn variable(base: Arc<dyn BaseFunction>) -> SmoothRandomVariable {
        let space = Arc::new(GaussianSpace::new(SelfAdjointOp::diagonal(&[1.5, 0.5, 0.25, 2.0]).unwrap()).unwrap());
        let dirs = (0..base.arity())
            .map(|i| {
                let mut e = DVector::zeros(4);
                e[i] = 1.0;
                e
            })
            .collect();
        SmoothRandomVariable::new("f", space, Picture::Cdp, dirs, base).unwrap()
    }

    #[test]
    fn index_enumeration() {
        let idx = multi_indices(2, 2);
        assert_eq!(idx, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(3, 4).len(), 35);
    }

    #[test]
    fn linear_and_square() {
        let e = chaos_project(&variable(Arc::new(Linear)), 4).unwrap();
        assert!((e.coefficient(&[1]).unwrap() - 1.0).abs() < 1e-14);
        assert!(e.coefficient(&[0]).unwrap().abs() < 1e-14);
        let sq = Polynomial::new(1, vec![(1.0, vec![2])]).unwrap();
        let e = chaos_project(&variable(Arc::new(sq)), 4).unwrap();
        assert!((e.coefficient(&[0]).unwrap() - 1.0).abs() < 1e-14);
        assert!((e.coefficient(&[2]).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let d = domain_check(&variable(Arc::new(Polynomial::new(1, vec![(1.0, vec![2])]).unwrap())), 4).unwrap();
        assert!((d.lhs - 4.0).abs() < 1e-12 && (d.rhs - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cos_coefficients() {
        let f = variable(Arc::new(Trig {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
        }));
        let e = chaos_project(&f, 12).unwrap();
        let mut fact = 1.0;
        for k in 0..=6usize {
            if k > 0 {
                fact *= ((2 * k - 1) * 2 * k) as f64;
            }
            let expect = (-1f64).powi(k as i32) * (-0.5f64).exp() / fact.sqrt();
            assert!((e.coefficient(&[2 * k]).unwrap() - expect).abs() < 1e-12, "k={k}");
            if 2 * k < 12 {
                assert!(e.coefficient(&[2 * k + 1]).unwrap().abs() < 1e-13);
            }
        }
        assert!(!e.flagged);
    }

    #[test]
    fn super_gaussian_growth_rejected() {
        let sq = Arc::new(Polynomial::new(1, vec![(1.0, vec![2])]).unwrap());
        let f = variable(Arc::new(Composed::new(Outer::Exp, sq)));
        assert!(chaos_project(&f, 4).is_err());
        let f = variable(Arc::new(Composed::new(Outer::Exp, Arc::new(Linear))));
        assert!(chaos_project(&f, 4).is_ok());
    }

    #[test]
    fn json_layout() {
        let e = chaos_project(&variable(Arc::new(Linear)), 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&e).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(keys.len(), 4);
        assert!(v["N"] == 1 && v["m"] == 1);
        assert_eq!(v["coeffs"][1]["alpha"][0], 1);
    }
}
