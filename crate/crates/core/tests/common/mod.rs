//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

/// `S(t)f(x)` on `H = ℝ`, `R = Id`, by brute force:
/// `sup_h [ min_k f(x − h + k) + k²/(2t) ] − h²/t` with both searches on
/// uniform grids of half-width `reach` and `nodes` points, each followed by
/// a finer grid around the best node.
pub fn nested_grid_ll(f: impl Fn(f64) -> f64, x: f64, t: f64, reach: f64, nodes: usize) -> f64 {
    let inner = |w: f64| refine_extremum(|k| f(w + k) + k * k / (2.0 * t), reach, nodes, false);
    refine_extremum(|h| inner(x - h) - h * h / t, reach, nodes, true)
}

fn refine_extremum(g: impl Fn(f64) -> f64, reach: f64, nodes: usize, max: bool) -> f64 {
    let better = |a: f64, b: f64| if max { a > b } else { a < b };
    let (mut centre, mut half) = (0.0, reach);
    let mut best = g(0.0);
    for _ in 0..3 {
        let step = 2.0 * half / (nodes - 1) as f64;
        let mut arg = centre;
        for i in 0..nodes {
            let s = centre - half + i as f64 * step;
            let v = g(s);
            if better(v, best) {
                best = v;
                arg = s;
            }
        }
        centre = arg;
        half = 2.0 * step;
    }
    best
}

/// One-dimensional cosine battery `(name, f)`.
pub fn cos_battery() -> Vec<(&'static str, fn(f64) -> f64)> {
    vec![
        ("cos(x)", |x: f64| x.cos()),
        ("sin(0.7x)", |x: f64| (0.7 * x).sin()),
        ("cos(2x + 0.3)", |x: f64| (2.0 * x + 0.3).cos()),
    ]
}
