//! Wigner function on a phase-space grid, negativity volume, and the
//! negativity-based non-Markovianity measure.
//!
//! Convention: `W(q, p) = (1/pi) int dy e^{2ipy} <q+y|rho|q-y>`. The more
//! common `1/(2pi)` kernel is the same function after `x = 2y` with the sign
//! of `p` flipped, so this form mirrors the p-axis relative to it: vacuum
//! peaks at `1/pi`, and a coherent state `alpha` peaks at
//! `(q, p) = (sqrt(2) Re alpha, -sqrt(2) Im alpha)`. Negativity measures and
//! ring integrals are insensitive to the mirror.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{cr, DensityMatrix};

/// Rectangular evaluation grid.
#[derive(Copy, Clone, Debug)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub nq: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        GridSpec {
            q_min: -half_width,
            q_max: half_width,
            nq: n,
            p_min: -half_width,
            p_max: half_width,
            np: n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub qs: Vec<f64>,
    pub ps: Vec<f64>,
    /// Row-major: `values[iq * np + ip]`.
    pub values: Vec<f64>,
}

impl WignerGrid {
    #[inline]
    pub fn at(&self, iq: usize, ip: usize) -> f64 {
        self.values[iq * self.ps.len() + ip]
    }

    /// 2-D trapezoid quadrature of `f(W)` over the grid.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (nq, np) = (self.qs.len(), self.ps.len());
        let dq = (self.qs[nq - 1] - self.qs[0]) / (nq - 1) as f64;
        let dp = (self.ps[np - 1] - self.ps[0]) / (np - 1) as f64;
        let mut acc = 0.0;
        for iq in 0..nq {
            let wq = if iq == 0 || iq == nq - 1 { 0.5 } else { 1.0 };
            for ip in 0..np {
                let wp = if ip == 0 || ip == np - 1 { 0.5 } else { 1.0 };
                acc += wq * wp * f(self.at(iq, ip));
            }
        }
        acc * dq * dp
    }
}

/// Wigner function of `|m><n|` summed against `rho[m, n]` at one phase-space
/// point, via the associated-Laguerre closed form of the Fock kernel.
pub fn wigner_point(rho: &DensityMatrix, q: f64, p: f64) -> f64 {
    let d = rho.dim().get();
    let m = rho.mat();
    let s = q * q + p * p;
    let x = 2.0 * s;
    let base = (-s).exp() / std::f64::consts::PI;
    let zeta = C64::new(q, p) * cr(std::f64::consts::SQRT_2);
    let mut w = 0.0;
    // pref(k) at n = 0: zeta^k / sqrt(k!), built incrementally.
    let mut pref_k = cr(1.0);
    for k in 0..d {
        if k > 0 {
            pref_k *= zeta / cr((k as f64).sqrt());
        }
        // Laguerre recurrence in n for fixed superscript k, together with the
        // coefficient chain c_n = (-1)^n sqrt(n!/(n+k)!) zeta^k.
        let mut l_prev = 0.0_f64;
        let mut l_cur = 1.0_f64;
        let mut coeff = pref_k;
        for n in 0..d - k {
            if n > 0 {
                let nf = n as f64;
                let l_next = ((2.0 * (nf - 1.0) + k as f64 + 1.0 - x) * l_cur
                    - (nf - 1.0 + k as f64) * l_prev)
                    / nf;
                l_prev = l_cur;
                l_cur = l_next;
                coeff *= cr(-(nf / (nf + k as f64)).sqrt());
            }
            let term = m[(n + k, n)] * coeff * cr(l_cur * base);
            w += if k == 0 { term.re } else { 2.0 * term.re };
        }
    }
    w
}

/// Wigner function over a grid, normalized so the full-plane integral is 1.
/// Fails with `GridTooSmall` if |W| exceeds 1e-6 anywhere on the boundary.
pub fn wigner(rho: &DensityMatrix, spec: &GridSpec) -> Result<WignerGrid> {
    if spec.nq < 2 || spec.np < 2 || spec.q_max <= spec.q_min || spec.p_max <= spec.p_min {
        return Err(Error::InvalidParam("degenerate Wigner grid".into()));
    }
    let qs: Vec<f64> = (0..spec.nq)
        .map(|i| spec.q_min + (spec.q_max - spec.q_min) * i as f64 / (spec.nq - 1) as f64)
        .collect();
    let ps: Vec<f64> = (0..spec.np)
        .map(|i| spec.p_min + (spec.p_max - spec.p_min) * i as f64 / (spec.np - 1) as f64)
        .collect();
    use rayon::prelude::*;
    let values: Vec<f64> = (0..spec.nq * spec.np)
        .into_par_iter()
        .map(|k| wigner_point(rho, qs[k / spec.np], ps[k % spec.np]))
        .collect();
    let grid = WignerGrid { qs, ps, values };
    let mut boundary_max = 0.0_f64;
    for iq in 0..spec.nq {
        boundary_max = boundary_max
            .max(grid.at(iq, 0).abs())
            .max(grid.at(iq, spec.np - 1).abs());
    }
    for ip in 0..spec.np {
        boundary_max = boundary_max
            .max(grid.at(0, ip).abs())
            .max(grid.at(spec.nq - 1, ip).abs());
    }
    if boundary_max > 1e-6 {
        return Err(Error::GridTooSmall(boundary_max));
    }
    Ok(grid)
}

/// Negativity volume `(int |W| - 1) / 2`, clamped at zero against grid
/// roundoff for non-negative Wigner functions.
pub fn negativity_volume(grid: &WignerGrid) -> f64 {
    let total_abs = grid.integrate(f64::abs);
    (0.5 * (total_abs - 1.0)).max(0.0)
}

/// Ring-integrated negativity `(int dtheta |W(R, theta)| - 1) / 2`,
/// implemented exactly as printed; it can be negative for states with
/// positive Wigner function (e.g. vacuum), since the angular integral of |W|
/// on one ring carries no normalization.
pub fn ring_negativity(rho: &DensityMatrix, radius: f64, n_theta: usize) -> Result<f64> {
    if radius < 0.0 {
        return Err(Error::InvalidParam("ring radius must be >= 0".into()));
    }
    let n = n_theta.max(8);
    let dtheta = 2.0 * std::f64::consts::PI / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let th = (k as f64 + 0.5) * dtheta;
        acc += wigner_point(rho, radius * th.cos(), radius * th.sin()).abs();
    }
    Ok(0.5 * (acc * dtheta - 1.0))
}

/// Degree of non-Markovianity from a negativity-volume time series:
/// `1 - |sum dN| / sum |dN|`; zero for monotone series and for the
/// degenerate all-flat case.
pub fn n_wn(series: &[f64]) -> f64 {
    if series.len() < 2 {
        return 0.0;
    }
    let mut net = 0.0;
    let mut total = 0.0;
    for w in series.windows(2) {
        let d = w[1] - w[0];
        net += d;
        total += d.abs();
    }
    if total == 0.0 {
        0.0
    } else {
        1.0 - net.abs() / total
    }
}
