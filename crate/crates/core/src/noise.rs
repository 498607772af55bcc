//! Analytic dephasing and loss channels on the truncated Fock space.
//!
//! All dephasing models act element-wise on Fock off-diagonals: the entry
//! `rho[m, n]` is multiplied by a real factor depending only on `a = m - n`.
//! Factors are tabulated in a [`DephasingTable`]; full superoperator or Kraus
//! forms are built only on request.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{c, cr, eigh, identity, CMat, Channel, FockDim, KRAUS_EIGENVALUE_CUTOFF};

/// Experimentally motivated default switching-rate window for 1/f noise.
pub const DEFAULT_R_MIN: f64 = 1e-4;
pub const DEFAULT_R_MAX: f64 = 1e4;

/* Parameter sets *************************************************************/

/// Single-fluctuator telegraph noise: `r` is the switching-rate to coupling
/// ratio, `tau` the dimensionless time. The bare mode energy drops out in the
/// interaction picture and is not a parameter anywhere in this crate.
#[derive(Copy, Clone, Debug)]
pub struct RTNParams {
    pub r: f64,
    pub tau: f64,
}

impl RTNParams {
    pub fn new(r: f64, tau: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidParam(format!("RTN ratio r must be positive, got {r}")));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidParam(format!("tau must be >= 0, got {tau}")));
        }
        Ok(RTNParams { r, tau })
    }
}

/// Multi-fluctuator 1/f model: `n_f` fluctuators with rate ratios drawn from
/// `P(r) = 1 / (r ln(r_max/r_min))` on `[r_min, r_max]`.
#[derive(Copy, Clone, Debug)]
pub struct OneOverFParams {
    pub n_f: u32,
    pub r_min: f64,
    pub r_max: f64,
    pub tau: f64,
}

impl OneOverFParams {
    pub fn new(n_f: u32, r_min: f64, r_max: f64, tau: f64) -> Result<Self> {
        if n_f == 0 {
            return Err(Error::InvalidParam("n_f must be >= 1".into()));
        }
        if !(r_min.is_finite() && r_min > 0.0 && r_max.is_finite() && r_min < r_max) {
            return Err(Error::InvalidParam(format!(
                "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidParam(format!("tau must be >= 0, got {tau}")));
        }
        Ok(OneOverFParams { n_f, r_min, r_max, tau })
    }
}

/// Gaussian dephasing with phase variance `sigma2 = k_phi * tau`.
#[derive(Copy, Clone, Debug)]
pub struct GaussianDephasingParams {
    pub sigma2: f64,
}

impl GaussianDephasingParams {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(Error::InvalidParam(format!("sigma^2 must be >= 0, got {sigma2}")));
        }
        Ok(GaussianDephasingParams { sigma2 })
    }
}

/// Photon loss over a dimensionless time `kappa_tau`, with Kraus order cutoff
/// `k_max`.
#[derive(Copy, Clone, Debug)]
pub struct LossParams {
    pub kappa_tau: f64,
    pub k_max: usize,
}

impl LossParams {
    pub fn new(kappa_tau: f64, k_max: usize) -> Result<Self> {
        if !(kappa_tau.is_finite() && kappa_tau >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "kappa*tau must be >= 0, got {kappa_tau}"
            )));
        }
        Ok(LossParams { kappa_tau, k_max })
    }
}

/* RTN and Gaussian dephasing factors *****************************************/

/// Real-argument core of the telegraph dephasing function, usable for the
/// non-integer effective differences that show up inside rate integrals.
///
/// `G = e^{-r tau} (cosh(W tau) + (r/W) sinh(W tau))`, `W = sqrt(r^2 - a^2)`,
/// continued across `r < |a|` by `W -> i w`, and by the limit
/// `e^{-r tau}(1 + r tau)` at `r = |a|`.
pub fn rtn_factor_real(a: f64, r: f64, tau: f64) -> f64 {
    let a = a.abs();
    if a == 0.0 || tau == 0.0 {
        return 1.0;
    }
    let disc = r * r - a * a;
    // Near-degenerate window: the two analytic branches agree to ~1e-4 here.
    if disc.abs() < 1e-9 * r * r {
        return (-r * tau).exp() * (1.0 + r * tau);
    }
    if disc > 0.0 {
        let w = disc.sqrt();
        // (1+r/W) e^{-(r-W)tau}/2 + (1-r/W) e^{-(r+W)tau}/2: both exponents
        // are non-positive, so this form cannot overflow for large r tau.
        0.5 * ((1.0 + r / w) * (-(r - w) * tau).exp() + (1.0 - r / w) * (-(r + w) * tau).exp())
    } else {
        let w = (-disc).sqrt();
        (-r * tau).exp() * ((w * tau).cos() + (r / w) * (w * tau).sin())
    }
}

/// Telegraph dephasing function for the Fock off-diagonal `a = m - n`.
pub fn rtn_dephasing_factor(a: i64, r: f64, tau: f64) -> f64 {
    rtn_factor_real(a.unsigned_abs() as f64, r, tau)
}

/// Gaussian dephasing factor `exp(-a^2 sigma^2 / 2)`.
pub fn gaussian_dephasing_factor(a: i64, sigma2: f64) -> f64 {
    let af = a as f64;
    (-0.5 * af * af * sigma2).exp()
}

/* Complex exponential integral ***********************************************/

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Principal-branch exponential integral `E1(z)`.
///
/// Power series for |z| <= 8, modified Lentz continued fraction beyond.
/// The arguments exercised by the 1/f integral all satisfy `Re z >= 0`.
pub fn exp_integral_e1(z: C64) -> Result<C64> {
    if z == cr(0.0) {
        return Err(Error::ExpIntegralAtZero);
    }
    if z.norm() <= 8.0 {
        // E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
        let mut sum = cr(0.0);
        let mut p = cr(1.0);
        for k in 1..=220 {
            p *= -z / cr(k as f64);
            let term = p / cr(k as f64);
            sum += term;
            if term.norm() < 1e-18 * sum.norm().max(1e-30) {
                break;
            }
        }
        Ok(cr(-EULER_GAMMA) - z.ln() - sum)
    } else {
        // E1(z) = e^{-z} / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))
        let tiny = cr(1e-300);
        let mut f = z + cr(1.0);
        if f == cr(0.0) {
            f = tiny;
        }
        let mut cc = f;
        let mut dd = cr(0.0);
        for n in 1..=400 {
            let an = cr(-((n * n) as f64));
            let bn = z + cr(2.0 * n as f64 + 1.0);
            dd = bn + an * dd;
            if dd == cr(0.0) {
                dd = tiny;
            }
            cc = bn + an / cc;
            if cc == cr(0.0) {
                cc = tiny;
            }
            dd = cr(1.0) / dd;
            let delta = cc * dd;
            f *= delta;
            if (delta - cr(1.0)).norm() < 1e-16 {
                break;
            }
        }
        Ok((-z).exp() / f)
    }
}

/* 1/f dephasing **************************************************************/

/// Rate-averaged telegraph factor
/// `I(a) = integral over [r_min, r_max] of dr/r G(a, r, tau)`,
/// in closed form via exponential integrals, split into the three cases
/// set by where `a` sits relative to the integration window.
pub fn one_over_f_integral(a: f64, r_min: f64, r_max: f64, tau: f64) -> Result<f64> {
    if !(a > 0.0 && tau > 0.0 && r_min > 0.0 && r_min < r_max) {
        return Err(Error::InvalidParam(format!(
            "one_over_f_integral needs a > 0, tau > 0, 0 < r_min < r_max; \
             got a={a}, tau={tau}, window=[{r_min}, {r_max}]"
        )));
    }
    // Antiderivative of the integrand in the variable z = r -+ sqrt(r^2-a^2):
    // phi(z) = E1(z tau) - e^{i a tau} E1((z+ia) tau)/2 - e^{-ia tau} E1((z-ia) tau)/2.
    let phi = |z: C64| -> Result<C64> {
        let ia = c(0.0, a);
        let e0 = exp_integral_e1(z * cr(tau))?;
        let ep = exp_integral_e1((z + ia) * cr(tau))?;
        let em = exp_integral_e1((z - ia) * cr(tau))?;
        let rot = C64::from_polar(1.0, a * tau);
        Ok(e0 - rot * ep * cr(0.5) - rot.conj() * em * cr(0.5))
    };
    // Ties a = r_min or a = r_max: both branches are continuous across the
    // boundary; nudge into the adjacent case.
    let mut a = a;
    if (a - r_min).abs() < 1e-12 * a.max(r_min) {
        a = r_min * (1.0 + 1e-12);
    }
    if (a - r_max).abs() < 1e-12 * a.max(r_max) {
        a = r_max * (1.0 - 1e-12);
    }
    let upper = |r: f64| -> (C64, C64) {
        // r >= a: both branch points real
        let w = (r * r - a * a).sqrt();
        (cr(r + w), cr(r - w))
    };
    let lower = |r: f64| -> C64 {
        // r < a: complex pair z, conj(z)
        c(r, -(a * a - r * r).sqrt())
    };
    let val = if a < r_min {
        let (zp_m, zm_m) = upper(r_min);
        let (zp_mx, zm_mx) = upper(r_max);
        phi(zp_mx)? + phi(zm_mx)? - phi(zp_m)? - phi(zm_m)?
    } else if a > r_max {
        let z_m = lower(r_min);
        let z_mx = lower(r_max);
        cr(2.0 * (phi(z_mx)? - phi(z_m)?).re)
    } else {
        let (zp_mx, zm_mx) = upper(r_max);
        let z_m = lower(r_min);
        phi(zp_mx)? + phi(zm_mx)? - cr(2.0 * phi(z_m)?.re)
    };
    Ok(val.re)
}

/// Multi-fluctuator 1/f dephasing factor:
/// `(I(a) / ln(r_max / r_min))^{n_f}`, exactly 1 at `a = 0` or `tau = 0`.
pub fn one_over_f_factor(a: i64, p: &OneOverFParams) -> Result<f64> {
    if a == 0 || p.tau == 0.0 {
        return Ok(1.0);
    }
    let i = one_over_f_integral(a.unsigned_abs() as f64, p.r_min, p.r_max, p.tau)?;
    let x = i / (p.r_max / p.r_min).ln();
    Ok(x.powi(p.n_f as i32))
}

/* Factor tables and channels *************************************************/

/// Per-off-diagonal dephasing factors: `g(a)` for `a = m - n` in
/// `-(d-1) ..= d-1`. The table is the working representation of every
/// dephasing channel in this crate.
#[derive(Clone, Debug)]
pub struct DephasingTable {
    d: FockDim,
    g: Vec<f64>,
}

impl DephasingTable {
    pub fn from_fn(d: FockDim, f: impl Fn(i64) -> f64) -> Self {
        let n = d.get() as i64;
        let g = (-(n - 1)..=(n - 1)).map(f).collect();
        DephasingTable { d, g }
    }

    #[inline]
    pub fn dim(&self) -> FockDim {
        self.d
    }

    #[inline]
    pub fn factor(&self, a: i64) -> f64 {
        let n = self.d.get() as i64;
        debug_assert!(a.abs() < n);
        self.g[(a + n - 1) as usize]
    }

    /// Element-wise action `rho[m,n] -> g(m-n) rho[m,n]`.
    pub fn apply_mat(&self, x: &CMat) -> CMat {
        let n = self.d.get();
        assert_eq!(x.nrows(), n);
        assert_eq!(x.ncols(), n);
        CMat::from_fn(n, n, |m, nn| x[(m, nn)] * cr(self.factor(m as i64 - nn as i64)))
    }

    pub fn apply(&self, rho: &crate::fock::DensityMatrix) -> crate::fock::DensityMatrix {
        crate::fock::DensityMatrix::from_hermitian_unchecked(self.apply_mat(rho.mat()))
    }

    /// Diagonal superoperator form.
    pub fn to_channel(&self) -> Channel {
        let n = self.d.get();
        let mut s = CMat::zeros(n * n, n * n);
        for m in 0..n {
            for nn in 0..n {
                let k = m * n + nn;
                s[(k, k)] = cr(self.factor(m as i64 - nn as i64));
            }
        }
        Channel::from_superop(s, self.d, self.d).expect("diagonal superop dims")
    }

    /// Diagonal Kraus set from the eigendecomposition of the d x d Toeplitz
    /// factor matrix `T[m,n] = g(m-n)`; equivalent to, and much cheaper than,
    /// the d^2 x d^2 Choi route.
    pub fn kraus(&self) -> Result<Vec<CMat>> {
        let n = self.d.get();
        let t = CMat::from_fn(n, n, |m, nn| cr(self.factor(m as i64 - nn as i64)));
        let (vals, vecs) = eigh(&t);
        if vals[0] < -crate::fock::CP_TOL {
            return Err(Error::NotCompletelyPositive(vals[0]));
        }
        let mut ks = Vec::new();
        for (idx, &lam) in vals.iter().enumerate() {
            if lam <= KRAUS_EIGENVALUE_CUTOFF {
                continue;
            }
            let mut k = CMat::zeros(n, n);
            for m in 0..n {
                k[(m, m)] = vecs[(m, idx)] * cr(lam.sqrt());
            }
            ks.push(k);
        }
        if ks.is_empty() {
            ks.push(CMat::zeros(n, n));
        }
        Ok(ks)
    }
}

pub fn rtn_table(p: &RTNParams, d: FockDim) -> DephasingTable {
    DephasingTable::from_fn(d, |a| rtn_dephasing_factor(a, p.r, p.tau))
}

pub fn gaussian_table(p: &GaussianDephasingParams, d: FockDim) -> DephasingTable {
    DephasingTable::from_fn(d, |a| gaussian_dephasing_factor(a, p.sigma2))
}

pub fn one_over_f_table(p: &OneOverFParams, d: FockDim) -> Result<DephasingTable> {
    let n = d.get() as i64;
    let mut g = Vec::with_capacity(2 * n as usize - 1);
    for a in -(n - 1)..=(n - 1) {
        g.push(one_over_f_factor(a, p)?);
    }
    Ok(DephasingTable { d, g })
}

/// Telegraph dephasing channel in diagonal superoperator form.
pub fn rtn_channel(p: &RTNParams, d: FockDim) -> Channel {
    rtn_table(p, d).to_channel()
}

pub fn gaussian_dephasing_channel(p: &GaussianDephasingParams, d: FockDim) -> Channel {
    gaussian_table(p, d).to_channel()
}

pub fn oneoverf_channel(p: &OneOverFParams, d: FockDim) -> Result<Channel> {
    Ok(one_over_f_table(p, d)?.to_channel())
}

/// Applies telegraph dephasing element-wise: diagonal untouched, Hermiticity
/// and trace preserved exactly.
pub fn apply_rtn_dephasing(
    rho: &crate::fock::DensityMatrix,
    p: &RTNParams,
) -> crate::fock::DensityMatrix {
    rtn_table(p, rho.dim()).apply(rho)
}

/* Photon loss ****************************************************************/

/// Loss Kraus operators
/// `A_k = (1 - e^{-kt})^{k/2} / sqrt(k!) e^{-kt n/2} a^k`, `k = 0..=k_max`,
/// built entry-wise: `A_k[m, m+k] = sqrt(C(m+k, k) (1-eta)^k eta^m)` with
/// `eta = e^{-kappa tau}` (diagonal factor folded in).
pub fn loss_kraus(p: &LossParams, d: FockDim) -> Result<Vec<CMat>> {
    let n = d.get();
    if p.k_max >= n {
        return Err(Error::InvalidParam(format!(
            "loss k_max = {} must be below the truncation d = {n}",
            p.k_max
        )));
    }
    if p.kappa_tau == 0.0 {
        return Ok(vec![identity(d)]);
    }
    let eta = (-p.kappa_tau).exp();
    let mut ks = Vec::with_capacity(p.k_max + 1);
    for k in 0..=p.k_max {
        let mut m = CMat::zeros(n, n);
        for row in 0..n.saturating_sub(k) {
            // amplitude^2 = C(row+k, k) (1-eta)^k eta^row
            let mut log_c = 0.0_f64;
            for j in 0..k {
                log_c += ((row + k - j) as f64).ln() - ((j + 1) as f64).ln();
            }
            let amp2 = log_c.exp() * (1.0 - eta).powi(k as i32) * eta.powi(row as i32);
            m[(row, row + k)] = cr(amp2.sqrt());
        }
        ks.push(m);
    }
    Ok(ks)
}

/// Smallest Kraus order whose completeness defect on all levels of the
/// truncated space stays below `tol`.
pub fn loss_kmax_for(kappa_tau: f64, d: FockDim, tol: f64) -> usize {
    if kappa_tau == 0.0 {
        return 0;
    }
    let n = d.get();
    let p_loss = 1.0 - (-kappa_tau).exp();
    let m = n - 1; // worst level
    // tail of Binomial(m, p_loss) beyond k
    let mut pmf = vec![0.0_f64; m + 1];
    for (k, q) in pmf.iter_mut().enumerate() {
        let mut log_c = 0.0_f64;
        for j in 0..k {
            log_c += ((m - j) as f64).ln() - ((j + 1) as f64).ln();
        }
        *q = (log_c + (k as f64) * p_loss.ln() + ((m - k) as f64) * (1.0 - p_loss).ln()).exp();
    }
    let mut tail = 1.0;
    for (k, q) in pmf.iter().enumerate() {
        tail -= q;
        if tail < tol {
            return k.min(n - 1);
        }
    }
    n - 1
}

pub fn loss_channel(p: &LossParams, d: FockDim) -> Result<Channel> {
    Channel::from_kraus(loss_kraus(p, d)?)
}

/* Time-parametrized dephasing families ***************************************/

/// A one-parameter family of element-wise dephasing maps, evolved from tau=0.
pub trait DephasingFamily: Sync {
    fn factor(&self, a: i64, tau: f64) -> Result<f64>;

    fn table(&self, d: FockDim, tau: f64) -> Result<DephasingTable> {
        let n = d.get() as i64;
        let mut g = Vec::with_capacity(2 * n as usize - 1);
        for a in -(n - 1)..=(n - 1) {
            g.push(self.factor(a, tau)?);
        }
        Ok(DephasingTable { d, g })
    }
}

#[derive(Copy, Clone, Debug)]
pub struct RtnFamily {
    pub r: f64,
}

impl DephasingFamily for RtnFamily {
    fn factor(&self, a: i64, tau: f64) -> Result<f64> {
        Ok(rtn_dephasing_factor(a, self.r, tau))
    }
}

/// Gaussian dephasing with variance growing linearly in time,
/// `sigma^2 = k_phi tau`.
#[derive(Copy, Clone, Debug)]
pub struct GaussianFamily {
    pub k_phi: f64,
}

impl DephasingFamily for GaussianFamily {
    fn factor(&self, a: i64, tau: f64) -> Result<f64> {
        Ok(gaussian_dephasing_factor(a, self.k_phi * tau))
    }
}

#[derive(Copy, Clone, Debug)]
pub struct OneOverFFamily {
    pub n_f: u32,
    pub r_min: f64,
    pub r_max: f64,
}

impl DephasingFamily for OneOverFFamily {
    fn factor(&self, a: i64, tau: f64) -> Result<f64> {
        let p = OneOverFParams::new(self.n_f, self.r_min, self.r_max, tau)?;
        one_over_f_factor(a, &p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{random_density_matrix, rotation_operator, trace, DensityMatrix};
    use crate::quad::gauss_legendre;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn fd(d: usize) -> FockDim {
        FockDim::new(d).unwrap()
    }

    #[test]
    fn rtn_factor_special_points() {
        assert_eq!(rtn_dephasing_factor(3, 2.0, 0.0), 1.0);
        assert_eq!(rtn_dephasing_factor(0, 0.3, 7.0), 1.0);
        // r -> 0 limit is cos(a tau)
        let g = rtn_dephasing_factor(1, 1e-12, std::f64::consts::FRAC_PI_2);
        assert!(g.abs() < 1e-9, "got {g}");
    }

    #[test]
    fn rtn_factor_continuous_across_degeneracy() {
        for tau in [0.3, 1.0, 4.0] {
            let below = rtn_factor_real(2.0, 2.0 - 1e-6, tau);
            let above = rtn_factor_real(2.0, 2.0 + 1e-6, tau);
            let at = rtn_factor_real(2.0, 2.0, tau);
            assert!((below - above).abs() < 1e-4);
            assert!((below - at).abs() < 1e-4);
        }
    }

    #[test]
    fn rtn_factor_bounded_by_one() {
        let taus: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
        for a in -10..=10_i64 {
            for &r in &[0.01, 0.1, 1.0, 10.0, 100.0] {
                for &tau in &taus {
                    let g = rtn_dephasing_factor(a, r, tau);
                    assert!(g.abs() <= 1.0 + 1e-12, "G({a},{r},{tau}) = {g}");
                    if tau == 0.0 || a == 0 {
                        assert_eq!(g, 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn gaussian_factor_values() {
        assert_relative_eq!(
            gaussian_dephasing_factor(2, 1.0),
            (-2.0_f64).exp(),
            max_relative = 1e-12
        );
        assert_eq!(gaussian_dephasing_factor(5, 0.0), 1.0);
        assert_eq!(gaussian_dephasing_factor(0, 3.0), 1.0);
    }

    /// Quadrature oracle for E1 on Re z > 0:
    /// E1(z) = e^{-z} * int_0^inf e^{-z s} / (1 + s) ds.
    fn e1_quadrature(z: C64) -> C64 {
        let span = 120.0 / z.re.max(0.05);
        let panels = 600;
        let re = gauss_legendre(
            |s| ((-z * cr(s)).exp() / cr(1.0 + s)).re,
            0.0,
            span,
            panels,
        );
        let im = gauss_legendre(
            |s| ((-z * cr(s)).exp() / cr(1.0 + s)).im,
            0.0,
            span,
            panels,
        );
        (-z).exp() * c(re, im)
    }

    #[test]
    fn e1_at_one_matches_quadrature() {
        let v = exp_integral_e1(cr(1.0)).unwrap();
        assert_relative_eq!(v.re, 0.2193839344, epsilon = 1e-9);
        let q = e1_quadrature(cr(1.0));
        assert_relative_eq!(v.re, q.re, epsilon = 1e-10);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn e1_across_method_switch_matches_quadrature() {
        for &z in &[
            cr(0.3),
            cr(4.0),
            cr(7.9),
            cr(8.1),
            cr(25.0),
            c(2.0, 3.0),
            c(0.5, -6.0),
            c(7.0, 7.0),
            c(12.0, -5.0),
            c(0.01, 1.5),
        ] {
            let v = exp_integral_e1(z).unwrap();
            let q = e1_quadrature(z);
            assert!(
                (v - q).norm() <= 1e-10 * v.norm().max(1e-12),
                "z={z}: {v} vs {q}"
            );
        }
    }

    #[test]
    fn e1_small_argument_series_identity() {
        let x = 1e-3;
        let v = exp_integral_e1(cr(x)).unwrap().re;
        let lhs = v + x.ln() + EULER_GAMMA;
        assert_relative_eq!(lhs, x - x * x / 4.0, epsilon = 1e-10);
    }

    #[test]
    fn e1_conjugation_symmetry() {
        let z = c(1.0, 2.0);
        let a = exp_integral_e1(z.conj()).unwrap();
        let b = exp_integral_e1(z).unwrap().conj();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn e1_domain_error_at_zero() {
        assert!(matches!(
            exp_integral_e1(cr(0.0)),
            Err(Error::ExpIntegralAtZero)
        ));
    }

    /// Direct quadrature of the rate integral in log space.
    fn rate_integral_quadrature(a: f64, r_min: f64, r_max: f64, tau: f64) -> f64 {
        let f = |u: f64| rtn_factor_real(a, u.exp(), tau);
        let (lo, hi) = (r_min.ln(), r_max.ln());
        if a > r_min && a < r_max {
            let split = a.ln();
            gauss_legendre(f, lo, split, 400) + gauss_legendre(f, split, hi, 400)
        } else {
            gauss_legendre(f, lo, hi, 800)
        }
    }

    #[test]
    fn one_over_f_integral_matches_quadrature() {
        let cases = [
            (1.0, 1e-4, 1e4, 1.0),   // r_min < a < r_max
            (3.0, 1e-4, 1e4, 0.7),   // interior, larger a
            (1.0, 2.0, 50.0, 1.3),   // a < r_min
            (5.0, 0.01, 2.0, 0.5),   // a > r_max
            (2.0, 0.3, 6.0, 2.0),    // interior, moderate window
            (1.0, 1.0, 10.0, 0.9),   // tie at lower edge
            (4.0, 0.2, 4.0, 1.1),    // tie at upper edge
        ];
        for (a, rm, rx, tau) in cases {
            let closed = one_over_f_integral(a, rm, rx, tau).unwrap();
            let quad = rate_integral_quadrature(a, rm, rx, tau);
            assert!(
                (closed - quad).abs() <= 1e-8 * quad.abs().max(1.0),
                "a={a} window=[{rm},{rx}] tau={tau}: closed {closed} vs quad {quad}"
            );
        }
    }

    #[test]
    fn one_over_f_factor_trivial_cases_and_power() {
        let p = OneOverFParams::new(2, 1e-4, 1e4, 1.0).unwrap();
        assert_eq!(one_over_f_factor(0, &p).unwrap(), 1.0);
        let p0 = OneOverFParams::new(4, 1e-4, 1e4, 0.0).unwrap();
        assert_eq!(one_over_f_factor(3, &p0).unwrap(), 1.0);

        let p1 = OneOverFParams::new(1, 1e-3, 1e3, 0.8).unwrap();
        let p3 = OneOverFParams::new(3, 1e-3, 1e3, 0.8).unwrap();
        let x1 = one_over_f_factor(2, &p1).unwrap();
        let x3 = one_over_f_factor(2, &p3).unwrap();
        assert_relative_eq!(x3, x1.powi(3), epsilon = 1e-12);

        assert!(OneOverFParams::new(2, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn loss_kraus_identity_completeness_and_mean_photon() {
        let d = fd(30);
        let ks0 = loss_kraus(&LossParams::new(0.0, 5).unwrap(), d).unwrap();
        assert_eq!(ks0.len(), 1);
        assert!((&ks0[0] - identity(d)).norm() < 1e-15);

        let ks = loss_kraus(&LossParams::new(0.01, 12).unwrap(), d).unwrap();
        let mut s = CMat::zeros(30, 30);
        for k in &ks {
            s += k.adjoint() * k;
        }
        assert!((s - identity(d)).map(|z| z.norm()).max() < 1e-8);

        // Coherent state mean photon decays by e^{-kappa tau}.
        let alpha = cr(1.7);
        let kt = 0.35;
        let vec = crate::states::coherent_vector(alpha, d).unwrap();
        let rho = DensityMatrix::pure(&vec).unwrap();
        let kmax = loss_kmax_for(kt, d, 1e-10);
        let ch = loss_channel(&LossParams::new(kt, kmax).unwrap(), d).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert_relative_eq!(
            out.mean_photon(),
            alpha.norm_sqr() * (-kt).exp(),
            epsilon = 1e-6
        );

        assert!(loss_kraus(&LossParams::new(0.1, 30).unwrap(), d).is_err());
    }

    #[test]
    fn rtn_channel_tau_zero_is_identity_superop() {
        let d = fd(8);
        let ch = rtn_channel(&RTNParams::new(0.5, 0.0).unwrap(), d);
        assert!((ch.superop() - CMat::identity(64, 64)).norm() < 1e-14);
    }

    #[test]
    fn rtn_large_r_approaches_gaussian_superop() {
        let d = fd(12);
        let r = 100.0;
        let tau = 1.0;
        let srtn = rtn_channel(&RTNParams::new(r, tau).unwrap(), d).superop();
        let sg = gaussian_dephasing_channel(
            &GaussianDephasingParams::new(tau / r).unwrap(),
            d,
        )
        .superop();
        assert!((srtn - sg).map(|z| z.norm()).max() < 1e-2);
    }

    #[test]
    fn dephasing_choi_is_psd() {
        let d = fd(10);
        for &r in &[0.1, 1.0, 10.0] {
            for &tau in &[0.5, 2.0] {
                let ch = rtn_channel(&RTNParams::new(r, tau).unwrap(), d);
                let min = ch.choi_min_eigenvalue();
                assert!(min > -1e-8, "r={r} tau={tau}: min Choi eig {min}");
            }
        }
    }

    #[test]
    fn dephasing_kraus_reproduce_elementwise_action() {
        let d = fd(9);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let table = rtn_table(&RTNParams::new(0.7, 1.3).unwrap(), d);
        let ks = table.kraus().unwrap();
        let ch = Channel::from_kraus(ks).unwrap();
        for _ in 0..5 {
            let rho = random_density_matrix(d, &mut rng);
            let via_kraus = ch.apply(&rho).unwrap();
            let via_table = table.apply(&rho);
            assert!(
                (via_kraus.mat() - via_table.mat()).map(|z| z.norm()).max() < 1e-8
            );
        }
    }

    #[test]
    fn dephasing_channels_commute_with_each_other_and_rotations() {
        let d = fd(8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let t1 = rtn_table(&RTNParams::new(0.3, 0.9).unwrap(), d);
        let t2 = gaussian_table(&GaussianDephasingParams::new(0.2).unwrap(), d);
        let u = rotation_operator(0.77, d);
        for _ in 0..5 {
            let rho = random_density_matrix(d, &mut rng);
            let ab = t2.apply_mat(&t1.apply_mat(rho.mat()));
            let ba = t1.apply_mat(&t2.apply_mat(rho.mat()));
            assert!((&ab - &ba).map(|z| z.norm()).max() < 1e-10);
            let rot_then = t1.apply_mat(&(&u * rho.mat() * u.adjoint()));
            let then_rot = &u * t1.apply_mat(rho.mat()) * u.adjoint();
            assert!((rot_then - then_rot).map(|z| z.norm()).max() < 1e-10);
        }
    }

    #[test]
    fn diagonal_state_unchanged_and_trace_preserved() {
        let d = fd(6);
        let mut m = CMat::zeros(6, 6);
        for i in 0..6 {
            m[(i, i)] = cr(1.0 / 6.0);
        }
        let rho = DensityMatrix::new(m).unwrap();
        let out = apply_rtn_dephasing(&rho, &RTNParams::new(0.2, 3.0).unwrap());
        assert!((out.mat() - rho.mat()).norm() < 1e-15);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let rho2 = random_density_matrix(d, &mut rng);
        let out2 = apply_rtn_dephasing(&rho2, &RTNParams::new(0.2, 3.0).unwrap());
        assert!((trace(out2.mat()).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_r_two_blob_mixture() {
        // Slow fluctuator: the evolved coherent state is close to the
        // equal mixture of two phase-shifted coherent states.
        let d = fd(30);
        let (alpha0, theta, r, tau) = (2.0, 0.4, 0.01, 0.3);
        let psi = crate::states::coherent_vector(C64::from_polar(alpha0, theta), d).unwrap();
        let rho = DensityMatrix::pure(&psi).unwrap();
        let evolved = apply_rtn_dephasing(&rho, &RTNParams::new(r, tau).unwrap());
        let blob = |th: f64| {
            let v = crate::states::coherent_vector(C64::from_polar(alpha0, th), d).unwrap();
            DensityMatrix::pure(&v).unwrap().into_mat()
        };
        let mix = (blob(theta + tau) + blob(theta - tau)).scale(0.5);
        let dist = 0.5 * crate::fock::trace_norm(&(evolved.mat() - mix)).unwrap();
        assert!(dist < 5e-2, "trace distance to two-blob mixture: {dist}");
    }

    #[test]
    fn large_r_state_matches_gaussian_dephasing() {
        let d = fd(30);
        let psi = crate::states::coherent_vector(cr(2.0), d).unwrap();
        let rho = DensityMatrix::pure(&psi).unwrap();
        let (r, tau) = (100.0, 1.0);
        let via_rtn = apply_rtn_dephasing(&rho, &RTNParams::new(r, tau).unwrap());
        let via_gauss = gaussian_table(&GaussianDephasingParams::new(tau / r).unwrap(), d)
            .apply(&rho);
        let dev = (via_rtn.mat() - via_gauss.mat()).map(|z| z.norm()).max();
        assert!(dev <= 1e-2, "max entrywise deviation {dev}");
    }
}
