//! Small fixed-order quadrature helpers.

/// 16-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
const GL16_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// Composite 16-point Gauss-Legendre over `[a, b]` split into `panels`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels > 0 && b >= a);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for k in 0..8 {
            acc += GL16_W[k] * (f(mid + half * GL16_X[k]) + f(mid - half * GL16_X[k]));
        }
        total += acc * half;
    }
    total
}

/// Midpoint rule over `[a, b]` with `n` nodes. Exact for trigonometric
/// polynomials of degree < n over a full period, which is what the phase
/// integrals here need.
pub fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n > 0);
    let h = (b - a) / n as f64;
    (0..n).map(|k| f(a + (k as f64 + 0.5) * h)).sum::<f64>() * h
}
