//! Non-Markovianity quantification: trace-distance series, revival sums,
//! the coherent-pair sweep, and Wigner-negativity-based measures.

pub mod wigner;

pub use wigner::{negativity_volume, n_wn, ring_negativity, wigner, GridSpec, WignerGrid};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{trace_norm, DensityMatrix, FockDim};
use crate::noise::{DephasingFamily, RtnFamily};
use crate::states::{gaussian_state, GaussianParams};

/// Trace distance `tr|rho1 - rho2| / 2`.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimMismatch(format!(
            "trace_distance: {} vs {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    Ok(0.5 * trace_norm(&(rho1.mat() - rho2.mat()))?)
}

#[derive(Clone, Debug)]
pub struct TraceDistanceSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Revival accounting for one state pair: the accumulated positive trace
/// distance increments, the rising intervals, and a geometric tail bound from
/// the decay of successive rise heights.
#[derive(Clone, Debug)]
pub struct RevivalReport {
    pub n_blp_star: f64,
    pub rising_intervals: Vec<(f64, f64)>,
    pub converged: bool,
    pub tail_bound: f64,
}

/// Envelope threshold below which remaining revivals are ignored.
const ENVELOPE_FLOOR: f64 = 1e-4;
/// Refinement resolution for extremum locations.
const EXTREMUM_RES: f64 = 1e-4;

fn refine_extremum<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, is_max: bool) -> f64 {
    while hi - lo > EXTREMUM_RES {
        let mid = 0.5 * (lo + hi);
        let h = (hi - lo) * 1e-3;
        let slope = f(mid + h) - f(mid - h);
        let rising = slope > 0.0;
        // Before a maximum the series rises; before a minimum it falls.
        if rising == is_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Evaluates the trace distance of the dephased pair on a tau grid, refines
/// every extremum bracket by bisection, and sums the positive increments.
///
/// Fails with `NotConverged` when the geometric tail bound at the horizon
/// exceeds 1% of the accumulated value (unless the rise envelope has already
/// fallen below 1e-4).
pub fn blp_star<F: DephasingFamily>(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    family: &F,
    horizon: f64,
    step: f64,
) -> Result<RevivalReport> {
    Ok(blp_star_with_series(rho1, rho2, family, horizon, step)?.1)
}

pub fn blp_star_with_series<F: DephasingFamily>(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    family: &F,
    horizon: f64,
    step: f64,
) -> Result<(TraceDistanceSeries, RevivalReport)> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimMismatch("blp_star pair dims differ".into()));
    }
    if !(horizon > 0.0 && step > 0.0 && step < horizon) {
        return Err(Error::InvalidParam(
            "need 0 < step < horizon for the revival scan".into(),
        ));
    }
    let d = rho1.dim();
    let delta0 = rho1.mat() - rho2.mat();
    // Touch tau=0 once so family errors surface before the parallel scan.
    family.factor(1, 0.0)?;
    let dist = |tau: f64| -> f64 {
        let table = family
            .table(d, tau)
            .expect("dephasing family failed inside scan");
        0.5 * trace_norm(&table.apply_mat(&delta0)).expect("square by construction")
    };

    let n_steps = (horizon / step).ceil() as usize;
    let times: Vec<f64> = (0..=n_steps).map(|k| (k as f64 * step).min(horizon)).collect();
    let values: Vec<f64> = times.par_iter().map(|&t| dist(t)).collect();

    // Locate extrema from discrete slope sign changes, then refine.
    let mut extrema: Vec<(f64, f64, bool)> = Vec::new(); // (tau, D, is_max)
    let mut prev_slope = 0.0_f64;
    for i in 1..values.len() {
        let slope = values[i] - values[i - 1];
        if slope == 0.0 {
            continue;
        }
        if prev_slope != 0.0 && slope.signum() != prev_slope.signum() {
            let is_max = prev_slope > 0.0;
            let lo = times[i.saturating_sub(2)];
            let hi = times[i];
            let t_star = refine_extremum(&dist, lo, hi, is_max);
            extrema.push((t_star, dist(t_star), is_max));
        }
        prev_slope = slope;
    }

    // Sum rises: from each minimum to the following maximum, plus a partial
    // rise still in progress at the horizon.
    let mut rises: Vec<(f64, f64, f64)> = Vec::new(); // (t_start, t_end, increment)
    let mut pending_min: Option<(f64, f64)> = if values.len() > 1 && values[1] > values[0] {
        Some((times[0], values[0]))
    } else {
        None
    };
    for &(t, v, is_max) in &extrema {
        if is_max {
            if let Some((t0, v0)) = pending_min.take() {
                if v > v0 {
                    rises.push((t0, t, v - v0));
                }
            }
        } else {
            pending_min = Some((t, v));
        }
    }
    if let Some((t0, v0)) = pending_min {
        let v_end = *values.last().unwrap();
        if v_end > v0 + 1e-15 {
            rises.push((t0, horizon, v_end - v0));
        }
    }

    let n_blp_star: f64 = rises.iter().map(|r| r.2).sum();

    // Geometric tail estimate: exponential fit to the envelope of refined
    // maxima. Future rises are bounded by future peaks, so a decaying
    // envelope p(t) ~ p_last e^{lambda (t - t_last)} sampled at the mean
    // peak spacing gives tail <= p_last rho / (1 - rho), rho = e^{lambda dt}.
    let peaks: Vec<(f64, f64)> = extrema
        .iter()
        .filter(|e| e.2 && e.1 > 0.0)
        .map(|e| (e.0, e.1))
        .collect();
    let (tail_bound, converged) = if peaks.is_empty() {
        (0.0, true)
    } else {
        let last = peaks[peaks.len() - 1].1;
        if last < ENVELOPE_FLOOR {
            (last, true)
        } else if peaks.len() >= 3 {
            let tailp = &peaks[peaks.len().saturating_sub(6)..];
            let n = tailp.len() as f64;
            let mean_t = tailp.iter().map(|p| p.0).sum::<f64>() / n;
            let mean_l = tailp.iter().map(|p| p.1.ln()).sum::<f64>() / n;
            let cov: f64 = tailp.iter().map(|p| (p.0 - mean_t) * (p.1.ln() - mean_l)).sum();
            let var: f64 = tailp.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
            let lambda = cov / var;
            let spacing = (tailp[tailp.len() - 1].0 - tailp[0].0) / (n - 1.0);
            let rho = (lambda * spacing).exp();
            if rho < 1.0 {
                let tail = last * rho / (1.0 - rho);
                (tail, tail <= 0.01 * n_blp_star)
            } else {
                (f64::INFINITY, false)
            }
        } else {
            (f64::INFINITY, false)
        }
    };

    let report = RevivalReport {
        n_blp_star,
        rising_intervals: rises.iter().map(|r| (r.0, r.1)).collect(),
        converged,
        tail_bound,
    };
    if !converged {
        return Err(Error::NotConverged {
            accumulated: n_blp_star,
            tail_bound,
        });
    }
    Ok((TraceDistanceSeries { times, values }, report))
}

/// Closed-form revival sum for the pair `(|0> +- |l>)/sqrt(2)` under
/// telegraph dephasing in the oscillatory regime:
/// `N_l = 1 / (e^{pi r / W_l} - 1)`, `W_l = sqrt(l^2 - r^2)`.
pub fn analytic_fock_pair_blp(l: u32, r: f64) -> Result<f64> {
    let lf = l as f64;
    if !(r > 0.0 && r < lf) {
        return Err(Error::InvalidParam(format!(
            "closed form needs 0 < r < l, got r = {r}, l = {l}"
        )));
    }
    let omega = (lf * lf - r * r).sqrt();
    Ok(1.0 / ((std::f64::consts::PI * r / omega).exp() - 1.0))
}

/// Revival measure for coherent pairs `(alpha0, -alpha0)` across an amplitude
/// grid; the pair construction follows the phase/squeeze/thermal reduction
/// (phase difference pi, no squeezing, no thermal occupation).
pub fn gaussian_blp_sweep(
    r: f64,
    alpha0_grid: &[f64],
    d: FockDim,
    horizon: f64,
    step: f64,
) -> Result<Vec<(f64, f64)>> {
    let family = RtnFamily { r };
    alpha0_grid
        .iter()
        .map(|&a0| {
            let rho1 = gaussian_state(&GaussianParams::coherent(a0, 0.0), d)?;
            let rho2 = gaussian_state(&GaussianParams::coherent(a0, std::f64::consts::PI), d)?;
            let rep = blp_star(&rho1, &rho2, &family, horizon, step)?;
            Ok((a0, rep.n_blp_star))
        })
        .collect()
}

/// Revival measure for an arbitrary Gaussian pair (ten raw parameters),
/// used by the coordinate-descent validation search.
pub fn gaussian_pair_blp(
    r: f64,
    p1: &GaussianParams,
    p2: &GaussianParams,
    d: FockDim,
    horizon: f64,
    step: f64,
) -> Result<f64> {
    let rho1 = gaussian_state(p1, d)?;
    let rho2 = gaussian_state(p2, d)?;
    Ok(blp_star(&rho1, &rho2, &RtnFamily { r }, horizon, step)?.n_blp_star)
}

/// Coordinate descent over the full ten-parameter Gaussian pair space.
/// Validation tool only; the production sweep uses the reduced coherent-pair
/// form. Returns the best parameter vector
/// `[a01, th1, b01, g1, n1, a02, th2, b02, g2, n2]` and its measure.
pub fn gaussian_blp_optimize(
    r: f64,
    init: [f64; 10],
    d: FockDim,
    horizon: f64,
    step: f64,
    rounds: usize,
) -> ([f64; 10], f64) {
    let eval = |x: &[f64; 10]| -> f64 {
        let mk = |o: usize| GaussianParams::new(x[o], x[o + 1], x[o + 2], x[o + 3], x[o + 4]);
        match (mk(0), mk(5)) {
            (Ok(p1), Ok(p2)) => {
                gaussian_pair_blp(r, &p1, &p2, d, horizon, step).unwrap_or(f64::NEG_INFINITY)
            }
            _ => f64::NEG_INFINITY,
        }
    };
    let mut x = init;
    let mut best = eval(&x);
    let mut steps = [0.5_f64; 10];
    for _ in 0..rounds {
        for k in 0..10 {
            for sgn in [1.0, -1.0] {
                let mut trial = x;
                trial[k] += sgn * steps[k];
                let v = eval(&trial);
                if v > best {
                    best = v;
                    x = trial;
                }
            }
            steps[k] *= 0.6;
        }
    }
    (x, best)
}
