use nalgebra::{DMatrix, SymmetricEigen};

/// Orthonormal probabilists' Hermite polynomials `Ĥ₀(x), …, Ĥₙ(x)`, with
/// `E[Ĥⱼ(ξ)Ĥₖ(ξ)] = δⱼₖ` for `ξ ~ N(0,1)`.
pub fn hermite_values(n: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(1.0);
    if n >= 1 {
        h.push(x);
    }
    for k in 1..n {
        let next = (x * h[k] - (k as f64).sqrt() * h[k - 1]) / ((k + 1) as f64).sqrt();
        h.push(next);
    }
    h
}

/// Gauss–Hermite rule for the standard normal density: `Σ wᵢ g(xᵢ) ≈ E g(ξ)`,
/// exact for polynomials of degree `< 2q`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `q`-point rule via the Golub–Welsch eigenproblem, nodes refined by Newton
/// steps on `Ĥ_q` and weights recomputed from the Christoffel function.
pub fn gauss_hermite(q: usize) -> GaussHermite {
    assert!(q >= 1, "a quadrature rule needs at least one node");
    let mut jacobi = DMatrix::zeros(q, q);
    for k in 1..q {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let h = hermite_values(q, *x);
            let d = (q as f64).sqrt() * h[q - 1];
            if d != 0.0 {
                *x -= h[q] / d;
            }
        }
    }
    // symmetric rule: enforce exact antisymmetry of the nodes
    for i in 0..q / 2 {
        let a = 0.5 * (nodes[q - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[q - 1 - i] = a;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| 1.0 / hermite_values(q - 1, x).iter().map(|h| h * h).sum::<f64>())
        .collect();
    GaussHermite { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_polynomials() {
        let h = hermite_values(3, 2.0);
        // He₂ = x² − 1, He₃ = x³ − 3x, normalised by √(k!)
        assert!((h[2] - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((h[3] - 2.0 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rule_integrates_moments() {
        let rule = gauss_hermite(10);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        // E ξ^{2k} = (2k − 1)!!
        let mut dfact = 1.0;
        for k in 1..10 {
            dfact *= (2 * k - 1) as f64;
            let m: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(2 * k as i32)).sum();
            assert!((m - dfact).abs() < 1e-10 * dfact, "k={k}: {m} vs {dfact}");
        }
    }

    #[test]
    fn orthonormality_under_rule() {
        let rule = gauss_hermite(15);
        for j in 0..12 {
            for k in 0..12 {
                let s: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, w)| {
                        let h = hermite_values(12, x);
                        w * h[j] * h[k]
                    })
                    .sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-11, "({j},{k}) {s}");
            }
        }
    }
}
