//! Monte-Carlo telegraph-process oracle, independent of the analytic
//! dephasing formulas it cross-checks.
//!
//! RNG streams: every sample `s` of an estimate draws from
//! `ChaCha8Rng::seed_from_u64(seed)` with stream `s + 1`, so results are
//! deterministic under any parallel schedule and estimates with different
//! seeds share no state. Flip waiting times are exponential with rate `r`,
//! which reproduces the telegraph autocorrelation `e^{-2 r |dt|}`; that
//! equivalence is pinned by a test rather than assumed.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::OneOverFParams;

/// One realization of the two-valued telegraph process on `[0, tau_max]`.
#[derive(Clone, Debug)]
pub struct TelegraphPath {
    pub initial_sign: i8,
    pub flip_times: Vec<f64>,
    pub tau_max: f64,
}

impl TelegraphPath {
    pub fn sign_at(&self, tau: f64) -> i8 {
        let flips = self.flip_times.partition_point(|&t| t <= tau);
        if flips % 2 == 0 {
            self.initial_sign
        } else {
            -self.initial_sign
        }
    }
}

/// Samples a path: fair-coin initial sign, exponential(r) waiting times.
pub fn sample_telegraph<R: Rng + ?Sized>(r: f64, tau_max: f64, rng: &mut R) -> TelegraphPath {
    assert!(r > 0.0 && tau_max > 0.0);
    let initial_sign = if rng.random::<bool>() { 1 } else { -1 };
    let exp = Exp::new(r).expect("positive rate");
    let mut flip_times = Vec::new();
    let mut t = exp.sample(rng);
    while t < tau_max {
        flip_times.push(t);
        t += exp.sample(rng);
    }
    TelegraphPath { initial_sign, flip_times, tau_max }
}

/// Deterministic single-path variant (stream 0 of the seed).
pub fn sample_telegraph_seeded(r: f64, tau_max: f64, seed: u64) -> TelegraphPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_telegraph(r, tau_max, &mut rng)
}

/// Exact piecewise-linear integral of the path sign up to `tau`.
pub fn integrate_phase(path: &TelegraphPath, tau: f64) -> Result<f64> {
    if !(0.0..=path.tau_max).contains(&tau) {
        return Err(Error::InvalidParam(format!(
            "tau = {tau} outside the sampled window [0, {}]",
            path.tau_max
        )));
    }
    let mut phase = 0.0;
    let mut sign = path.initial_sign as f64;
    let mut t_prev = 0.0;
    for &tf in &path.flip_times {
        if tf >= tau {
            break;
        }
        phase += sign * (tf - t_prev);
        sign = -sign;
        t_prev = tf;
    }
    phase += sign * (tau - t_prev);
    Ok(phase)
}

/// Monte-Carlo mean with its standard error.
#[derive(Copy, Clone, Debug)]
pub struct McEstimate {
    pub mean: C64,
    /// Standard error of the real part (the dephasing function is real; the
    /// imaginary part vanishes by the sign symmetry of the process).
    pub std_error: f64,
    pub n_samples: usize,
}

fn estimate_from_samples(vals: Vec<C64>) -> McEstimate {
    let n = vals.len();
    let mean: C64 = vals.iter().sum::<C64>() / C64::new(n as f64, 0.0);
    let var_re: f64 =
        vals.iter().map(|z| (z.re - mean.re).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    McEstimate {
        mean,
        std_error: (var_re / n as f64).sqrt(),
        n_samples: n,
    }
}

/// Estimates the telegraph dephasing function `<e^{i a phi(tau)}>` over `n`
/// independent paths.
pub fn mc_dephasing_factor(a: i64, r: f64, tau: f64, n: usize, seed: u64) -> McEstimate {
    assert!(n >= 2);
    if a == 0 || tau == 0.0 {
        return McEstimate { mean: C64::new(1.0, 0.0), std_error: 0.0, n_samples: n };
    }
    let vals: Vec<C64> = (0..n as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s + 1);
            let path = sample_telegraph(r, tau, &mut rng);
            let phi = integrate_phase(&path, tau).expect("tau inside window");
            C64::from_polar(1.0, a as f64 * phi)
        })
        .collect();
    estimate_from_samples(vals)
}

/// Inverse-CDF draw from `P(r) = 1 / (r ln(r_max/r_min))`:
/// `r = r_min (r_max/r_min)^u` for uniform `u`.
pub fn sample_rate(r_min: f64, r_max: f64, u: f64) -> f64 {
    r_min * (r_max / r_min).powf(u)
}

/// Multi-fluctuator estimate: each sample draws `n_f` rates from the 1/rate
/// distribution, simulates `n_f` independent paths, sums their phases, and
/// averages `e^{i a Phi}`. The plain phase sum matches the rate-integral
/// power law `(avg factor)^{n_f}` that the analytic route implements.
pub fn mc_one_over_f_factor(a: i64, p: &OneOverFParams, n: usize, seed: u64) -> McEstimate {
    assert!(n >= 2);
    if a == 0 || p.tau == 0.0 {
        return McEstimate { mean: C64::new(1.0, 0.0), std_error: 0.0, n_samples: n };
    }
    let vals: Vec<C64> = (0..n as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s + 1);
            let mut phi_total = 0.0;
            for _ in 0..p.n_f {
                let u: f64 = rng.random();
                let rate = sample_rate(p.r_min, p.r_max, u);
                let path = sample_telegraph(rate, p.tau, &mut rng);
                phi_total += integrate_phase(&path, p.tau).expect("tau inside window");
            }
            C64::from_polar(1.0, a as f64 * phi_total)
        })
        .collect();
    estimate_from_samples(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{one_over_f_factor, rtn_dephasing_factor};
    use approx::assert_relative_eq;

    #[test]
    fn path_determinism_and_ordering() {
        let p1 = sample_telegraph_seeded(1.5, 10.0, 99);
        let p2 = sample_telegraph_seeded(1.5, 10.0, 99);
        assert_eq!(p1.initial_sign, p2.initial_sign);
        assert_eq!(p1.flip_times, p2.flip_times);
        for w in p1.flip_times.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(p1.flip_times.iter().all(|&t| t > 0.0 && t < 10.0));

        let p3 = sample_telegraph_seeded(1.5, 10.0, 100);
        assert_ne!(p1.flip_times, p3.flip_times);
    }

    #[test]
    fn phase_integral_examples_and_bound() {
        let no_flip = TelegraphPath { initial_sign: 1, flip_times: vec![], tau_max: 3.0 };
        assert_relative_eq!(integrate_phase(&no_flip, 2.0).unwrap(), 2.0);

        let one_flip = TelegraphPath { initial_sign: 1, flip_times: vec![1.0], tau_max: 3.0 };
        assert_relative_eq!(integrate_phase(&one_flip, 2.0).unwrap(), 0.0);

        assert!(integrate_phase(&one_flip, 4.0).is_err());

        for s in 0..1000 {
            let path = sample_telegraph_seeded(0.8, 5.0, s);
            let phi = integrate_phase(&path, 5.0).unwrap();
            assert!(phi.abs() <= 5.0 + 1e-12);
        }
    }

    #[test]
    fn autocorrelation_matches_telegraph_statistics() {
        // <c(t1) c(t2)> = e^{-2 r |t1 - t2|}; lag 0.5 at r = 1.
        let (r, t1, t2) = (1.0, 0.25, 0.75);
        let n = 100_000u64;
        let mut sum = 0.0;
        let mut sum_c = 0.0;
        for s in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(4242);
            rng.set_stream(s + 1);
            let path = sample_telegraph(r, 1.0, &mut rng);
            let prod = (path.sign_at(t1) * path.sign_at(t2)) as f64;
            sum += prod;
            sum_c += path.sign_at(t1) as f64;
        }
        let est = sum / n as f64;
        let want = (-2.0 * r * (t2 - t1)).exp();
        let se = ((1.0 - want * want) / n as f64).sqrt();
        assert!(
            (est - want).abs() <= 3.0 * se,
            "autocorr {est} vs {want} (3se = {})",
            3.0 * se
        );
        let mean_c = sum_c / n as f64;
        assert!(mean_c.abs() <= 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn mc_factor_reference_points() {
        let est0 = mc_dephasing_factor(0, 1.0, 2.0, 1000, 7);
        assert_eq!(est0.mean, C64::new(1.0, 0.0));
        assert_eq!(est0.std_error, 0.0);

        // Oscillatory regime.
        let (a, r, tau) = (1, 0.1, std::f64::consts::PI);
        let est = mc_dephasing_factor(a, r, tau, 100_000, 11);
        let want = rtn_dephasing_factor(a, r, tau);
        assert!(
            (est.mean.re - want).abs() <= 3.0 * est.std_error,
            "{} vs {want} (3se = {})",
            est.mean.re,
            3.0 * est.std_error
        );
        assert!(est.mean.im.abs() <= 4.0 * est.std_error.max(1e-3));

        // Fast-switching regime against the Gaussian-limit value, allowing
        // for the analytic correction between the exact and limiting forms.
        let (a, r, tau) = (2, 10.0, 1.0);
        let est = mc_dephasing_factor(a, r, tau, 100_000, 13);
        let exact = rtn_dephasing_factor(a, r, tau);
        let gauss = (-(a * a) as f64 * tau / (2.0 * r)).exp();
        assert!((est.mean.re - exact).abs() <= 3.0 * est.std_error);
        assert!((est.mean.re - gauss).abs() <= 3.0 * est.std_error + (exact - gauss).abs());
    }

    #[test]
    fn one_over_f_single_rate_limit_and_analytic_agreement() {
        // Degenerate window reproduces the single-fluctuator estimator.
        let p = OneOverFParams::new(1, 0.5 - 1e-12, 0.5 + 1e-12, 1.5).unwrap();
        let est = mc_one_over_f_factor(1, &p, 50_000, 21);
        let single = mc_dephasing_factor(1, 0.5, 1.5, 50_000, 22);
        let se = (est.std_error.powi(2) + single.std_error.powi(2)).sqrt();
        assert!((est.mean.re - single.mean.re).abs() <= 3.0 * se);

        // Analytic rate-integral power law, two fluctuators.
        let p2 = OneOverFParams::new(2, 1e-4, 1e4, 1.0).unwrap();
        let est2 = mc_one_over_f_factor(1, &p2, 100_000, 31);
        let want2 = one_over_f_factor(1, &p2).unwrap();
        assert!(
            (est2.mean.re - want2).abs() <= 3.0 * est2.std_error,
            "{} vs {want2} (3se = {})",
            est2.mean.re,
            3.0 * est2.std_error
        );

        // Ten fluctuators, longer time.
        let p10 = OneOverFParams::new(10, 1e-4, 1e4, 2.0).unwrap();
        let est10 = mc_one_over_f_factor(1, &p10, 100_000, 41);
        let want10 = one_over_f_factor(1, &p10).unwrap();
        assert!(
            (est10.mean.re - want10).abs() <= 3.0 * est10.std_error,
            "{} vs {want10} (3se = {})",
            est10.mean.re,
            3.0 * est10.std_error
        );
    }

    #[test]
    fn rate_histogram_matches_one_over_rate_density() {
        // Chi-squared goodness of fit on 20 log-uniform bins at the 1% level.
        let (r_min, r_max) = (1e-4, 1e4);
        let n = 100_000u64;
        let bins = 20usize;
        let mut counts = vec![0usize; bins];
        let mut rng = ChaCha8Rng::seed_from_u64(314159);
        for _ in 0..n {
            let u: f64 = rng.random();
            let rate = sample_rate(r_min, r_max, u);
            let frac = (rate / r_min).ln() / (r_max / r_min).ln();
            let b = ((frac * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let expected = n as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 1% critical value of chi-squared with 19 degrees of freedom.
        assert!(chi2 < 36.191, "chi2 = {chi2}");
    }
}
