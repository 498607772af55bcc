//! Gaussian states and rotation-symmetric bosonic codewords in the
//! truncated Fock basis.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, check_truncation, cr, creation, expm, CMat, CVec,
    DensityMatrix, FockDim,
};

/* Gaussian states *************************************************************/

/// Displaced squeezed thermal state parameters: `alpha = alpha0 e^{i theta}`,
/// `beta = beta0 e^{i gamma}`, thermal occupation `nbar`.
#[derive(Copy, Clone, Debug)]
pub struct GaussianParams {
    pub alpha0: f64,
    pub theta: f64,
    pub beta0: f64,
    pub gamma: f64,
    pub nbar: f64,
}

impl GaussianParams {
    pub fn new(alpha0: f64, theta: f64, beta0: f64, gamma: f64, nbar: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha0", alpha0),
            ("theta", theta),
            ("beta0", beta0),
            ("gamma", gamma),
            ("nbar", nbar),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be finite, got {v}")));
            }
        }
        if alpha0 < 0.0 || beta0 < 0.0 || nbar < 0.0 {
            return Err(Error::InvalidParam(
                "alpha0, beta0 and nbar must be non-negative".into(),
            ));
        }
        Ok(GaussianParams { alpha0, theta, beta0, gamma, nbar })
    }

    pub fn coherent(alpha0: f64, theta: f64) -> Self {
        GaussianParams { alpha0, theta, beta0: 0.0, gamma: 0.0, nbar: 0.0 }
    }
}

/// Displacement operator `exp(alpha a+ - alpha* a)` at the working truncation.
pub fn displacement(alpha: C64, d: FockDim) -> CMat {
    let a = annihilation(d);
    let adag = creation(d);
    expm(&(adag.scale_c(alpha) - a.scale_c(alpha.conj())))
}

/// Squeezing operator `exp((beta a+^2 - beta* a^2)/2)`.
pub fn squeeze(beta: C64, d: FockDim) -> CMat {
    let a = annihilation(d);
    let adag = creation(d);
    let gen = (&adag * &adag).scale_c(beta * cr(0.5)) - (&a * &a).scale_c(beta.conj() * cr(0.5));
    expm(&gen)
}

trait ScaleC {
    fn scale_c(&self, z: C64) -> CMat;
}

impl ScaleC for CMat {
    fn scale_c(&self, z: C64) -> CMat {
        self.map(|w| w * z)
    }
}

/// Thermal state `diag(nbar^n / (nbar+1)^{n+1})`, renormalized on the
/// truncated space after the tail check.
fn thermal_diag(nbar: f64, d: FockDim) -> Result<Vec<f64>> {
    let n = d.get();
    if nbar == 0.0 {
        let mut p = vec![0.0; n];
        p[0] = 1.0;
        return Ok(p);
    }
    let q = nbar / (nbar + 1.0);
    let p: Vec<f64> = (0..n).map(|k| q.powi(k as i32) / (nbar + 1.0)).collect();
    // Precondition: the thermal occupation at level d-3 must already be
    // negligible, otherwise the truncation bites.
    if p[n - 3] > 1e-6 {
        return Err(Error::Truncation { tail: p[n - 3], limit: 1e-6 });
    }
    Ok(p)
}

/// General Gaussian state `D(alpha) S(beta) nu_th S+(beta) D+(alpha)`.
///
/// Built with dense matrix exponentials; the result is renormalized to unit
/// trace after the truncation guard passes.
pub fn gaussian_state(p: &GaussianParams, d: FockDim) -> Result<DensityMatrix> {
    let n = d.get();
    let therm = thermal_diag(p.nbar, d)?;
    let alpha = C64::from_polar(p.alpha0, p.theta);
    let beta = C64::from_polar(p.beta0, p.gamma);
    let disp = displacement(alpha, d);
    let sq = squeeze(beta, d);
    let u = &disp * &sq;
    let mut nu = CMat::zeros(n, n);
    for k in 0..n {
        nu[(k, k)] = cr(therm[k]);
    }
    let raw = &u * nu * u.adjoint();
    let rho = DensityMatrix::from_hermitian_unchecked(raw);
    check_truncation(&rho)?;
    let tr = crate::fock::trace(rho.mat()).re;
    DensityMatrix::new(rho.mat().scale(1.0 / tr))
}

/// Coherent-state amplitude vector, renormalized on the truncation; errors if
/// the truncated tail exceeds 1e-6.
pub fn coherent_vector(alpha: C64, d: FockDim) -> Result<CVec> {
    let n = d.get();
    let mut v = CVec::zeros(n);
    let mut amp = cr((-alpha.norm_sqr() / 2.0).exp());
    v[0] = amp;
    for k in 1..n {
        amp *= alpha / cr((k as f64).sqrt());
        v[k] = amp;
    }
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let tail = 1.0 - norm2;
    if tail > 1e-6 {
        return Err(Error::Truncation { tail, limit: 1e-6 });
    }
    Ok(v.scale(1.0 / norm2.sqrt()))
}

/* Rotation-symmetric codewords ************************************************/

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CodewordLabel {
    Zero,
    One,
    Plus,
    Minus,
}

/// A normalized code-basis vector on the truncated Fock space.
#[derive(Clone, Debug)]
pub struct Codeword {
    pub vec: CVec,
    pub label: CodewordLabel,
}

impl Codeword {
    fn normalized(mut vec: CVec, label: CodewordLabel) -> Result<Self> {
        let norm2: f64 = vec.iter().map(|z| z.norm_sqr()).sum();
        if norm2 < 1e-24 {
            return Err(Error::DegeneratePrimitive);
        }
        vec = vec.scale(1.0 / norm2.sqrt());
        Ok(Codeword { vec, label })
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.vec).expect("codewords are unit norm")
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }
}

/// Dual-basis pair `(|0> +- |1>)/sqrt(2)` from a computational pair.
pub fn dual_pair(zero: &Codeword, one: &Codeword) -> (Codeword, Codeword) {
    let s = cr(std::f64::consts::FRAC_1_SQRT_2);
    let plus = Codeword {
        vec: (&zero.vec + &one.vec).scale_v(s),
        label: CodewordLabel::Plus,
    };
    let minus = Codeword {
        vec: (&zero.vec - &one.vec).scale_v(s),
        label: CodewordLabel::Minus,
    };
    (plus, minus)
}

trait ScaleV {
    fn scale_v(&self, z: C64) -> CVec;
}

impl ScaleV for CVec {
    fn scale_v(&self, z: C64) -> CVec {
        self.map(|w| w * z)
    }
}

/// Binomial codewords: amplitudes `sqrt(C(K, 2k) / 2^{K-1})` on `|2kN>` and
/// `sqrt(C(K, 2k+1) / 2^{K-1})` on `|(2k+1)N>`.
pub fn binomial_codewords(n: u32, k: u32, d: FockDim) -> Result<(Codeword, Codeword)> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParam("need N >= 1 and K >= 1".into()));
    }
    let (n_us, k_us) = (n as usize, k as usize);
    if k_us * n_us + n_us >= d.get() {
        return Err(Error::InvalidParam(format!(
            "binomial code support (K*N + N = {}) does not fit below d = {}",
            k_us * n_us + n_us,
            d
        )));
    }
    let dim = d.get();
    let norm = 0.5_f64.powi(k as i32 - 1);
    let binom = |top: usize, bot: usize| -> f64 {
        let mut log_c = 0.0;
        for j in 0..bot {
            log_c += ((top - j) as f64).ln() - ((j + 1) as f64).ln();
        }
        log_c.exp()
    };
    let mut zero = CVec::zeros(dim);
    for j in 0..=(k_us / 2) {
        zero[2 * j * n_us] = cr((binom(k_us, 2 * j) * norm).sqrt());
    }
    let mut one = CVec::zeros(dim);
    for j in 0..=(k_us.div_ceil(2) - 1) {
        one[(2 * j + 1) * n_us] = cr((binom(k_us, 2 * j + 1) * norm).sqrt());
    }
    Ok((
        Codeword::normalized(zero, CodewordLabel::Zero)?,
        Codeword::normalized(one, CodewordLabel::One)?,
    ))
}

/// Cat codewords: normalized sums of `2N` rotated coherent states,
/// `sum_m (+-1)^m |alpha e^{i m pi / N}>`.
pub fn cat_codewords(n: u32, alpha: C64, d: FockDim) -> Result<(Codeword, Codeword)> {
    if n == 0 {
        return Err(Error::InvalidParam("need N >= 1".into()));
    }
    let dim = d.get();
    let mut zero = CVec::zeros(dim);
    let mut one = CVec::zeros(dim);
    for m in 0..(2 * n as usize) {
        let phase = std::f64::consts::PI * m as f64 / n as f64;
        let vec = coherent_vector(alpha * C64::from_polar(1.0, phase), d)?;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        zero += &vec;
        one += vec.scale_v(cr(sign));
    }
    Ok((
        Codeword::normalized(zero, CodewordLabel::Zero)?,
        Codeword::normalized(one, CodewordLabel::One)?,
    ))
}

/// Codewords from an arbitrary primitive, as the rotated-superposition sums;
/// equivalently, projections of the primitive onto the Fock lattices
/// `n = 0 (mod 2N)` and `n = N (mod 2N)` followed by normalization.
pub fn primitive_to_codewords(
    primitive: &[C64],
    n: u32,
    d: FockDim,
) -> Result<(Codeword, Codeword)> {
    if n == 0 {
        return Err(Error::InvalidParam("need N >= 1".into()));
    }
    if primitive.len() > d.get() {
        return Err(Error::InvalidParam(
            "primitive is longer than the Fock dimension".into(),
        ));
    }
    let dim = d.get();
    let period = 2 * n as usize;
    let mut zero = CVec::zeros(dim);
    let mut one = CVec::zeros(dim);
    for (idx, &cn) in primitive.iter().enumerate() {
        if idx % period == 0 {
            zero[idx] = cn;
        } else if idx % period == n as usize {
            one[idx] = cn;
        }
    }
    let zero = Codeword::normalized(zero, CodewordLabel::Zero)?;
    let one = Codeword::normalized(one, CodewordLabel::One)?;
    Ok((zero, one))
}

/// An order-N rotation-symmetric code with its construction recipe.
#[derive(Clone, Debug)]
pub enum CodeKind {
    Cat { alpha: C64 },
    Binomial { k: u32 },
    Generic { primitive: Vec<C64> },
}

#[derive(Clone, Debug)]
pub struct RSBCode {
    pub kind: CodeKind,
    pub n: u32,
    pub d: FockDim,
}

impl RSBCode {
    pub fn binomial(n: u32, k: u32, d: FockDim) -> Self {
        RSBCode { kind: CodeKind::Binomial { k }, n, d }
    }

    pub fn cat(n: u32, alpha: C64, d: FockDim) -> Self {
        RSBCode { kind: CodeKind::Cat { alpha }, n, d }
    }

    pub fn codewords(&self) -> Result<(Codeword, Codeword)> {
        match &self.kind {
            CodeKind::Binomial { k } => binomial_codewords(self.n, *k, self.d),
            CodeKind::Cat { alpha } => cat_codewords(self.n, *alpha, self.d),
            CodeKind::Generic { primitive } => {
                primitive_to_codewords(primitive, self.n, self.d)
            }
        }
    }

    pub fn dual_codewords(&self) -> Result<(Codeword, Codeword)> {
        let (zero, one) = self.codewords()?;
        Ok(dual_pair(&zero, &one))
    }

    /// d x 2 isometry with the codewords as columns.
    pub fn embedding(&self) -> Result<CMat> {
        let (zero, one) = self.codewords()?;
        let mut s = CMat::zeros(self.d.get(), 2);
        s.set_column(0, &zero.vec);
        s.set_column(1, &one.vec);
        Ok(s)
    }

    /// Mean photon number of the code,
    /// `Tr[(|0><0| + |1><1|) n] / 2`; equals `N K / 2` for binomial codes.
    pub fn mean_photon_code(&self) -> Result<f64> {
        let (zero, one) = self.codewords()?;
        let mp = |w: &Codeword| -> f64 {
            w.vec
                .iter()
                .enumerate()
                .map(|(k, z)| k as f64 * z.norm_sqr())
                .sum()
        };
        Ok(0.5 * (mp(&zero) + mp(&one)))
    }
}

/// `(|0> +- |l>)/sqrt(2)`: the pair whose trace distance under telegraph
/// dephasing is exactly `|G(l, tau)|`.
pub fn fock_pair(l: usize, d: FockDim) -> Result<(DensityMatrix, DensityMatrix)> {
    if l == 0 || l >= d.get() {
        return Err(Error::InvalidParam(format!("need 0 < l < d, got l = {l}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = CVec::zeros(d.get());
    plus[0] = cr(s);
    plus[l] = cr(s);
    let mut minus = CVec::zeros(d.get());
    minus[0] = cr(s);
    minus[l] = cr(-s);
    Ok((DensityMatrix::pure(&plus)?, DensityMatrix::pure(&minus)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::rotation_operator;
    use approx::assert_relative_eq;

    fn fd(d: usize) -> FockDim {
        FockDim::new(d).unwrap()
    }

    #[test]
    fn gaussian_vacuum() {
        let p = GaussianParams::new(0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let rho = gaussian_state(&p, fd(10)).unwrap();
        assert_relative_eq!(rho.population(0), 1.0, epsilon = 1e-12);
        assert!(rho.mat().norm() - 1.0 < 1e-12);
    }

    #[test]
    fn gaussian_thermal_diagonal() {
        let p = GaussianParams::new(0.0, 0.0, 0.0, 0.0, 2.0).unwrap();
        let rho = gaussian_state(&p, fd(40)).unwrap();
        for n in 0..8 {
            let want = 2.0_f64.powi(n) / 3.0_f64.powi(n + 1);
            assert_relative_eq!(rho.population(n as usize), want, max_relative = 1e-6);
        }
        for m in 0..10 {
            for n in 0..10 {
                if m != n {
                    assert!(rho.mat()[(m, n)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gaussian_coherent_mean_photon() {
        let p = GaussianParams::coherent(2.0, 0.0);
        let rho = gaussian_state(&p, fd(30)).unwrap();
        assert_relative_eq!(rho.mean_photon(), 4.0, epsilon = 1e-6);
    }

    #[test]
    fn gaussian_pure_when_not_thermal() {
        let p = GaussianParams::new(1.0, 0.3, 0.4, 1.1, 0.0).unwrap();
        let rho = gaussian_state(&p, fd(30)).unwrap();
        assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn gaussian_truncation_guard() {
        let p = GaussianParams::coherent(4.0, 0.0);
        assert!(matches!(
            gaussian_state(&p, fd(12)),
            Err(Error::Truncation { .. })
        ));
        let pth = GaussianParams::new(0.0, 0.0, 0.0, 0.0, 3.0).unwrap();
        assert!(gaussian_state(&pth, fd(10)).is_err());
    }

    #[test]
    fn binomial_trivial_fock_qubit() {
        let (zero, one) = binomial_codewords(1, 1, fd(6)).unwrap();
        assert_relative_eq!(zero.vec[0].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(one.vec[1].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn binomial_n2_k2_explicit() {
        let (zero, one) = binomial_codewords(2, 2, fd(10)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(zero.vec[0].re, s, epsilon = 1e-12);
        assert_relative_eq!(zero.vec[4].re, s, epsilon = 1e-12);
        assert_relative_eq!(one.vec[2].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn binomial_mean_photon_and_normalization() {
        for (n, k) in [(1u32, 1u32), (2, 2), (3, 4), (2, 5), (4, 2)] {
            let d = fd((n * k + n + 2) as usize + 1);
            let code = RSBCode::binomial(n, k, d);
            assert_relative_eq!(
                code.mean_photon_code().unwrap(),
                (n * k) as f64 / 2.0,
                epsilon = 1e-9
            );
            let (zero, one) = code.codewords().unwrap();
            let s0: f64 = zero.vec.iter().map(|z| z.norm_sqr()).sum();
            let s1: f64 = one.vec.iter().map(|z| z.norm_sqr()).sum();
            assert_relative_eq!(s0, 1.0, epsilon = 1e-12);
            assert_relative_eq!(s1, 1.0, epsilon = 1e-12);
        }
        assert!(binomial_codewords(3, 8, fd(20)).is_err());
    }

    #[test]
    fn cat_support_lattice_and_orthogonality() {
        let d = fd(40);
        for n in [1u32, 2, 3] {
            let (zero, one) = cat_codewords(n, cr(2.0), d).unwrap();
            let period = 2 * n as usize;
            for (idx, z) in zero.vec.iter().enumerate() {
                if idx % period != 0 {
                    assert!(z.norm() < 1e-10, "zero word leaks at {idx}");
                }
            }
            for (idx, z) in one.vec.iter().enumerate() {
                if idx % period != n as usize {
                    assert!(z.norm() < 1e-10, "one word leaks at {idx}");
                }
            }
            let overlap: C64 = zero
                .vec
                .iter()
                .zip(one.vec.iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!(overlap.norm() < 1e-10);
        }
    }

    #[test]
    fn cat_n1_is_even_odd_superposition() {
        let d = fd(40);
        let alpha = cr(2.0);
        let (zero, _) = cat_codewords(1, alpha, d).unwrap();
        let plus = coherent_vector(alpha, d).unwrap();
        let minus = coherent_vector(-alpha, d).unwrap();
        let mut even = &plus + &minus;
        let norm2: f64 = even.iter().map(|z| z.norm_sqr()).sum();
        even = even.scale(1.0 / norm2.sqrt());
        assert!((&zero.vec - even).norm() < 1e-9);
    }

    #[test]
    fn primitive_coherent_reproduces_cat() {
        let d = fd(40);
        let alpha = cr(2.0);
        let prim = coherent_vector(alpha, d).unwrap();
        let coeffs: Vec<C64> = prim.iter().copied().collect();
        let (zero_p, one_p) = primitive_to_codewords(&coeffs, 2, d).unwrap();
        let (zero_c, one_c) = cat_codewords(2, alpha, d).unwrap();
        assert!((&zero_p.vec - &zero_c.vec).norm() < 1e-10);
        assert!((&one_p.vec - &one_c.vec).norm() < 1e-10);
    }

    #[test]
    fn primitive_errors_and_simple_case() {
        let mut prim = vec![cr(0.0); 8];
        prim[0] = cr(1.0);
        assert!(matches!(
            primitive_to_codewords(&prim, 2, fd(8)),
            Err(Error::DegeneratePrimitive)
        ));

        let n = 3;
        let mut prim = vec![cr(0.0); 8];
        prim[0] = cr(std::f64::consts::FRAC_1_SQRT_2);
        prim[n] = cr(std::f64::consts::FRAC_1_SQRT_2);
        let (zero, one) = primitive_to_codewords(&prim, n as u32, fd(8)).unwrap();
        assert_relative_eq!(zero.vec[0].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(one.vec[n].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn codeword_rotation_symmetry() {
        let d = fd(40);
        let codes: Vec<RSBCode> = vec![
            RSBCode::binomial(2, 3, d),
            RSBCode::binomial(3, 2, d),
            RSBCode::cat(2, cr(2.0), d),
            RSBCode::cat(1, cr(1.5), d),
        ];
        for code in codes {
            let (zero, one) = code.codewords().unwrap();
            let overlap: C64 = zero
                .vec
                .iter()
                .zip(one.vec.iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!(overlap.norm() < 1e-10);

            let rn = rotation_operator(2.0 * std::f64::consts::PI / code.n as f64, d);
            let zn = rotation_operator(std::f64::consts::PI / code.n as f64, d);
            for (w, parity) in [(&zero, 1.0), (&one, -1.0)] {
                let rotated = &rn * &w.vec;
                assert!((&rotated - &w.vec).norm() < 1e-9, "R_N eigenvalue");
                let flipped = &zn * &w.vec;
                assert!(
                    (&flipped - w.vec.scale(parity)).norm() < 1e-9,
                    "Z_N parity action"
                );
            }
        }
    }
}
