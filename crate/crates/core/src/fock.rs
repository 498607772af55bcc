//! Truncated-Fock-space linear algebra.
//!
//! Dense complex matrices throughout. The working truncation is small
//! (single mode d <= ~40, two-mode products <= ~900 basis states), so dense
//! storage and O(d^3) factorizations are cheap; nothing here is built for
//! sparse or GPU backends. Two-mode superoperators (d^2 x d^2 on the product
//! space) are never materialized; the circuit code exploits structure instead.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Truncation dimension of the Fock space: levels `0..d-1`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct FockDim(usize);

impl FockDim {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::BadDimension(d));
        }
        Ok(FockDim(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for FockDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Annihilation operator: `a[m, m+1] = sqrt(m+1)`.
pub fn annihilation(d: FockDim) -> CMat {
    let n = d.get();
    let mut a = CMat::zeros(n, n);
    for m in 0..n - 1 {
        a[(m, m + 1)] = cr(((m + 1) as f64).sqrt());
    }
    a
}

/// Creation operator, the adjoint of [`annihilation`].
pub fn creation(d: FockDim) -> CMat {
    annihilation(d).adjoint()
}

/// Number operator `diag(0, 1, .., d-1)`.
pub fn number_op(d: FockDim) -> CMat {
    let n = d.get();
    CMat::from_fn(n, n, |i, j| if i == j { cr(i as f64) } else { cr(0.0) })
}

pub fn identity(d: FockDim) -> CMat {
    CMat::identity(d.get(), d.get())
}

/// The (annihilation, creation, number) triple at a common truncation.
///
/// The commutator `[a, a-dagger]` equals the identity except in the
/// bottom-right corner, where truncation makes it `-(d-1)` instead of `1`.
pub fn mode_operators(d: FockDim) -> (CMat, CMat, CMat) {
    (annihilation(d), creation(d), number_op(d))
}

/// Number-basis rotation `exp(i theta n)`: diagonal, unitary.
pub fn rotation_operator(theta: f64, d: FockDim) -> CMat {
    assert!(theta.is_finite(), "rotation angle must be finite");
    let n = d.get();
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, theta * i as f64)
        } else {
            cr(0.0)
        }
    })
}

/// `(m + m-dagger) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> C64 {
    let mut t = cr(0.0);
    for i in 0..m.nrows().min(m.ncols()) {
        t += m[(i, i)];
    }
    t
}

/// Trace norm (sum of singular values). Rejects non-square input.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let sv = m.clone().singular_values();
    Ok(sv.iter().sum())
}

/// Hermitian eigendecomposition; returns ascending eigenvalues and the
/// matching eigenvector columns. Only the Hermitian part of the input is
/// referenced.
///
/// Householder reduction to a real symmetric tridiagonal followed by
/// implicit-shift QL with accumulated rotations; residuals stay below
/// ~1e-11 times the matrix norm.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a = hermitize(m);
    let mut q = CMat::identity(n, n);
    let mut diag = vec![0.0_f64; n];
    let mut sub = vec![cr(0.0); n.saturating_sub(1)];

    // Householder reduction of columns 0..n-2.
    let mut u = vec![cr(0.0); n];
    let mut p = vec![cr(0.0); n];
    for k in 0..n.saturating_sub(1) {
        let mut xnorm2 = 0.0;
        for i in k + 1..n {
            xnorm2 += a[(i, k)].norm_sqr();
        }
        let x1 = a[(k + 1, k)];
        if xnorm2 == 0.0 {
            sub[k] = cr(0.0);
            continue;
        }
        let xnorm = xnorm2.sqrt();
        let phase = if x1.norm() == 0.0 { cr(1.0) } else { x1 / cr(x1.norm()) };
        let alpha = -phase * cr(xnorm);
        sub[k] = alpha;
        // u = (x - alpha e1) / ||..||
        u[k + 1] = x1 - alpha;
        for i in k + 2..n {
            u[i] = a[(i, k)];
        }
        let unorm2: f64 = (k + 1..n).map(|i| u[i].norm_sqr()).sum();
        if unorm2 == 0.0 {
            continue;
        }
        let inv = cr(1.0 / unorm2.sqrt());
        for i in k + 1..n {
            u[i] *= inv;
        }
        // p = 2 A u on the trailing block; w = p - (u'p) u; A -= u w' + w u'.
        for i in k + 1..n {
            let mut acc = cr(0.0);
            for j in k + 1..n {
                acc += a[(i, j)] * u[j];
            }
            p[i] = acc * cr(2.0);
        }
        let udp: C64 = (k + 1..n).map(|i| u[i].conj() * p[i]).sum();
        for i in k + 1..n {
            p[i] -= udp * u[i]; // now p = w
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let upd = u[i] * p[j].conj() + p[i] * u[j].conj();
                a[(i, j)] -= upd;
            }
        }
        // Q := Q (I - 2 u u')
        for row in 0..n {
            let mut z = cr(0.0);
            for j in k + 1..n {
                z += q[(row, j)] * u[j];
            }
            let z2 = z * cr(2.0);
            for j in k + 1..n {
                q[(row, j)] -= z2 * u[j].conj();
            }
        }
    }
    for i in 0..n {
        diag[i] = a[(i, i)].re;
    }
    // Rotate complex subdiagonals onto the real axis with a diagonal unitary.
    let mut e = vec![0.0_f64; n];
    let mut dphase = cr(1.0);
    for k in 0..n.saturating_sub(1) {
        let t = sub[k];
        e[k] = t.norm();
        let step = if t.norm() == 0.0 { cr(1.0) } else { t / cr(t.norm()) };
        dphase *= step;
        let col_phase = dphase;
        for row in 0..n {
            q[(row, k + 1)] *= col_phase;
        }
    }

    // Implicit-shift QL on (diag, e), rotations folded into q. Deflation uses
    // both the local relative criterion and an absolute floor scaled to the
    // matrix norm, which rank-deficient inputs (zero diagonal blocks) need.
    let eps = f64::EPSILON;
    let anorm = (0..n)
        .map(|i| diag[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for x in e.iter_mut() {
        if x.abs() <= eps * anorm {
            *x = 0.0;
        }
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = diag[mm].abs() + diag[mm + 1].abs();
                if e[mm].abs() <= eps * dd || e[mm].abs() <= eps * anorm {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            assert!(iter <= 64, "QL iteration failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = diag[mm] - diag[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut pshift = 0.0_f64;
            let mut i = mm;
            while i > l {
                let i1 = i - 1;
                let mut f = s * e[i1];
                let b = c * e[i1];
                r = f.hypot(g);
                e[i] = r;
                if r == 0.0 {
                    diag[i] -= pshift;
                    e[mm] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i] - pshift;
                r = (diag[i1] - g) * s + 2.0 * c * b;
                pshift = s * r;
                diag[i] = g + pshift;
                g = c * r - b;
                for row in 0..n {
                    f = q[(row, i)].re;
                    let fi = q[(row, i)].im;
                    let pr = q[(row, i1)];
                    q[(row, i)] = C64::new(s * pr.re + c * f, s * pr.im + c * fi);
                    q[(row, i1)] = C64::new(c * pr.re - s * f, c * pr.im - s * fi);
                }
                i -= 1;
            }
            if r == 0.0 && i > l {
                continue;
            }
            diag[l] -= pshift;
            e[l] = g;
            e[mm] = 0.0;
        }
    }

    // Ascending order.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let vals: Vec<f64> = idx.iter().map(|&i| diag[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (kk, &i) in idx.iter().enumerate() {
        vecs.set_column(kk, &q.column(i));
    }
    (vals, vecs)
}

/// Matrix exponential by Pade-13 with scaling and squaring.
pub fn expm(m: &CMat) -> CMat {
    assert_eq!(m.nrows(), m.ncols());
    let n = m.nrows();
    const THETA13: f64 = 5.371_920_351_148_152;
    let norm1 = (0..n)
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = m.scale(0.5_f64.powi(s as i32));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (a6.scale(B[13]) + a4.scale(B[11]) + a2.scale(B[9]))
        + a6.scale(B[7])
        + a4.scale(B[5])
        + a2.scale(B[3])
        + id.scale(B[1]);
    let u = &a * u_inner;
    let v = &a6 * (a6.scale(B[12]) + a4.scale(B[10]) + a2.scale(B[8]))
        + a6.scale(B[6])
        + a4.scale(B[4])
        + a2.scale(B[2])
        + id.scale(B[0]);
    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is singular");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/* Density matrices ***********************************************************/

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-9;

/// Hermitian, unit-trace, positive-semidefinite matrix on a truncated Fock
/// space. Immutable after construction.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dim: FockDim,
    mat: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-9) and spectrum
    /// (eigenvalues >= -1e-9).
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NonSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let dim = FockDim::new(mat.nrows())?;
        let herm_dev = (&mat - mat.adjoint()).norm() / 2.0;
        if herm_dev > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian: deviation {herm_dev:.3e}"
            )));
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace = {tr} instead of 1")));
        }
        let (vals, _) = eigh(&mat);
        if vals[0] < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                vals[0]
            )));
        }
        Ok(DensityMatrix { dim, mat })
    }

    /// Wraps a matrix that is known Hermitian by construction (e.g. channel
    /// output); skips the spectral check but still hermitizes roundoff.
    pub fn from_hermitian_unchecked(mat: CMat) -> Self {
        let dim = FockDim::new(mat.nrows()).expect("dimension >= 2");
        DensityMatrix {
            dim,
            mat: hermitize(&mat),
        }
    }

    pub fn pure(vec: &CVec) -> Result<Self> {
        let n2: f64 = vec.iter().map(|z| z.norm_sqr()).sum();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "vector norm^2 = {n2}, expected 1"
            )));
        }
        let mat = CMat::from_fn(vec.len(), vec.len(), |i, j| vec[i] * vec[j].conj());
        DensityMatrix::new(mat)
    }

    #[inline]
    pub fn dim(&self) -> FockDim {
        self.dim
    }

    #[inline]
    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.mat * &self.mat)).re
    }

    pub fn mean_photon(&self) -> f64 {
        (0..self.dim.get()).map(|n| n as f64 * self.mat[(n, n)].re).sum()
    }

    pub fn population(&self, n: usize) -> f64 {
        self.mat[(n, n)].re
    }

    /// Total population on the top `levels` Fock levels.
    pub fn tail_population(&self, levels: usize) -> f64 {
        let d = self.dim.get();
        (d.saturating_sub(levels)..d).map(|n| self.mat[(n, n)].re).sum()
    }
}

/// Tail threshold used by the truncation guard: population above level d-3
/// must stay below this.
pub const TRUNCATION_TAIL_LIMIT: f64 = 1e-6;

/// Truncation guard shared by state constructors and channel builders.
pub fn check_truncation(rho: &DensityMatrix) -> Result<()> {
    let tail = rho.tail_population(3);
    if tail > TRUNCATION_TAIL_LIMIT {
        return Err(Error::Truncation {
            tail,
            limit: TRUNCATION_TAIL_LIMIT,
        });
    }
    Ok(())
}

/* Vectorization and channels *************************************************/

/// Row-stacked vectorization: `vec(rho)[i*cols + j] = rho[i, j]`, so that
/// `vec(A X B) = (A kron B^T) vec(X)`.
pub fn vec_row(m: &CMat) -> CVec {
    let (r, cols) = (m.nrows(), m.ncols());
    CVec::from_fn(r * cols, |k, _| m[(k / cols, k % cols)])
}

pub fn unvec_row(v: &CVec, rows: usize, cols: usize) -> CMat {
    assert_eq!(v.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Channel representation: Kraus set, superoperator on row-stacked vectors,
/// or Choi matrix `J[(m,i),(n,j)] = <i|E(|m><n|)|j>`.
#[derive(Clone, Debug)]
pub enum ChannelRepr {
    Kraus(Vec<CMat>),
    SuperOp(CMat),
    Choi(CMat),
}

/// A completely positive map on the truncated space. Representations are
/// mutually convertible and agree on action within 1e-8.
#[derive(Clone, Debug)]
pub struct Channel {
    d_in: FockDim,
    d_out: FockDim,
    repr: ChannelRepr,
}

/// Kraus weights below this are numerical noise and are dropped when
/// extracting Kraus sets from a Choi eigendecomposition.
pub const KRAUS_EIGENVALUE_CUTOFF: f64 = 1e-12;
/// A Choi eigenvalue below this signals a genuinely non-CP map.
pub const CP_TOL: f64 = 1e-8;

impl Channel {
    pub fn from_kraus(kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParam("empty Kraus set".into()));
        }
        let (r, cl) = (kraus[0].nrows(), kraus[0].ncols());
        if kraus.iter().any(|k| k.nrows() != r || k.ncols() != cl) {
            return Err(Error::DimMismatch("inconsistent Kraus shapes".into()));
        }
        let d_out = FockDim::new(r)?;
        let d_in = FockDim::new(cl)?;
        // Trace non-increasing: sum K-dagger K must not exceed the identity.
        let mut s = CMat::zeros(cl, cl);
        for k in &kraus {
            s += k.adjoint() * k;
        }
        let (vals, _) = eigh(&s);
        if vals[vals.len() - 1] > 1.0 + CP_TOL {
            return Err(Error::InvalidParam(format!(
                "Kraus set is trace-increasing: max eigenvalue of sum K'K = {:.12}",
                vals[vals.len() - 1]
            )));
        }
        Ok(Channel {
            d_in,
            d_out,
            repr: ChannelRepr::Kraus(kraus),
        })
    }

    pub fn from_superop(s: CMat, d_in: FockDim, d_out: FockDim) -> Result<Self> {
        let (want_r, want_c) = (d_out.get() * d_out.get(), d_in.get() * d_in.get());
        if s.nrows() != want_r || s.ncols() != want_c {
            return Err(Error::DimMismatch(format!(
                "superoperator is {}x{}, expected {}x{}",
                s.nrows(),
                s.ncols(),
                want_r,
                want_c
            )));
        }
        Ok(Channel {
            d_in,
            d_out,
            repr: ChannelRepr::SuperOp(s),
        })
    }

    pub fn from_choi(j: CMat, d_in: FockDim, d_out: FockDim) -> Result<Self> {
        let want = d_in.get() * d_out.get();
        if j.nrows() != want || j.ncols() != want {
            return Err(Error::DimMismatch(format!(
                "Choi matrix is {}x{}, expected {}x{}",
                j.nrows(),
                j.ncols(),
                want,
                want
            )));
        }
        Ok(Channel {
            d_in,
            d_out,
            repr: ChannelRepr::Choi(j),
        })
    }

    pub fn identity(d: FockDim) -> Self {
        Channel {
            d_in: d,
            d_out: d,
            repr: ChannelRepr::Kraus(vec![identity(d)]),
        }
    }

    #[inline]
    pub fn d_in(&self) -> FockDim {
        self.d_in
    }

    #[inline]
    pub fn d_out(&self) -> FockDim {
        self.d_out
    }

    #[inline]
    pub fn repr(&self) -> &ChannelRepr {
        &self.repr
    }

    /// Superoperator matrix of this channel (computed if needed).
    pub fn superop(&self) -> CMat {
        match &self.repr {
            ChannelRepr::SuperOp(s) => s.clone(),
            ChannelRepr::Kraus(ks) => {
                let (din, dout) = (self.d_in.get(), self.d_out.get());
                let mut s = CMat::zeros(dout * dout, din * din);
                for k in ks {
                    let kc = k.map(|z| z.conj());
                    s += k.kronecker(&kc);
                }
                s
            }
            ChannelRepr::Choi(j) => {
                let (din, dout) = (self.d_in.get(), self.d_out.get());
                let mut s = CMat::zeros(dout * dout, din * din);
                for m in 0..din {
                    for n in 0..din {
                        for i in 0..dout {
                            for jj in 0..dout {
                                s[(i * dout + jj, m * din + n)] =
                                    j[(m * dout + i, n * dout + jj)];
                            }
                        }
                    }
                }
                s
            }
        }
    }

    /// Choi matrix of this channel.
    pub fn choi(&self) -> CMat {
        match &self.repr {
            ChannelRepr::Choi(j) => j.clone(),
            _ => {
                let s = self.superop();
                let (din, dout) = (self.d_in.get(), self.d_out.get());
                let mut j = CMat::zeros(din * dout, din * dout);
                for m in 0..din {
                    for n in 0..din {
                        for i in 0..dout {
                            for jj in 0..dout {
                                j[(m * dout + i, n * dout + jj)] =
                                    s[(i * dout + jj, m * din + n)];
                            }
                        }
                    }
                }
                j
            }
        }
    }

    /// Kraus operators; extracted from the Choi eigendecomposition when not
    /// already stored, dropping weights below [`KRAUS_EIGENVALUE_CUTOFF`].
    /// Fails with `NotCompletelyPositive` if the Choi matrix has an
    /// eigenvalue below -1e-8.
    pub fn kraus(&self) -> Result<Vec<CMat>> {
        if let ChannelRepr::Kraus(ks) = &self.repr {
            return Ok(ks.clone());
        }
        let j = self.choi();
        let herm_dev = (&j - j.adjoint()).norm() / 2.0;
        if herm_dev > 1e-9 {
            return Err(Error::InvalidParam(format!(
                "Choi matrix is not Hermitian (deviation {herm_dev:.3e})"
            )));
        }
        let (vals, vecs) = eigh(&j);
        if vals[0] < -CP_TOL {
            return Err(Error::NotCompletelyPositive(vals[0]));
        }
        let (din, dout) = (self.d_in.get(), self.d_out.get());
        let mut kraus = Vec::new();
        for (idx, &lam) in vals.iter().enumerate() {
            if lam <= KRAUS_EIGENVALUE_CUTOFF {
                continue;
            }
            let w = vecs.column(idx);
            let mut k = CMat::zeros(dout, din);
            for m in 0..din {
                for i in 0..dout {
                    k[(i, m)] = w[m * dout + i] * cr(lam.sqrt());
                }
            }
            kraus.push(k);
        }
        if kraus.is_empty() {
            kraus.push(CMat::zeros(dout, din));
        }
        Ok(kraus)
    }

    pub fn to_kraus(&self) -> Result<Channel> {
        Ok(Channel {
            d_in: self.d_in,
            d_out: self.d_out,
            repr: ChannelRepr::Kraus(self.kraus()?),
        })
    }

    pub fn to_superop(&self) -> Channel {
        Channel {
            d_in: self.d_in,
            d_out: self.d_out,
            repr: ChannelRepr::SuperOp(self.superop()),
        }
    }

    pub fn to_choi(&self) -> Channel {
        Channel {
            d_in: self.d_in,
            d_out: self.d_out,
            repr: ChannelRepr::Choi(self.choi()),
        }
    }

    /// Smallest Choi eigenvalue; non-negative (within tolerance) iff CP.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        let (vals, _) = eigh(&self.choi());
        vals[0]
    }

    /// Applies the map to an arbitrary operator (no state validation).
    pub fn apply_mat(&self, x: &CMat) -> Result<CMat> {
        let din = self.d_in.get();
        if x.nrows() != din || x.ncols() != din {
            return Err(Error::DimMismatch(format!(
                "operator is {}x{}, channel expects {din}x{din}",
                x.nrows(),
                x.ncols()
            )));
        }
        match &self.repr {
            ChannelRepr::Kraus(ks) => {
                let dout = self.d_out.get();
                let mut out = CMat::zeros(dout, dout);
                for k in ks {
                    out += k * x * k.adjoint();
                }
                Ok(out)
            }
            _ => {
                let v = self.superop() * vec_row(x);
                Ok(unvec_row(&v, self.d_out.get(), self.d_out.get()))
            }
        }
    }

    /// Applies the channel to a state. Hermiticity is preserved; the trace is
    /// preserved iff the channel is trace preserving, so the output skips the
    /// unit-trace validation.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_mat(rho.mat())?;
        Ok(DensityMatrix::from_hermitian_unchecked(out))
    }

    /// Deviation of `sum_k K-dagger K` (equivalently the Choi partial trace)
    /// from the identity, as a max-abs entry.
    pub fn trace_preservation_defect(&self) -> f64 {
        let s = self.superop();
        let din = self.d_in.get();
        let dout = self.d_out.get();
        let mut worst = 0.0_f64;
        for m in 0..din {
            for n in 0..din {
                let mut acc = cr(0.0);
                for i in 0..dout {
                    acc += s[(i * dout + i, m * din + n)];
                }
                let want = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((acc - cr(want)).norm());
            }
        }
        worst
    }
}

/// Spec-named alias: Kraus extraction from a superoperator-form channel.
pub fn kraus_from_superop(s: &Channel) -> Result<Channel> {
    s.to_kraus()
}

/// Spec-named alias for [`Channel::apply`].
pub fn apply_channel(c: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    c.apply(rho)
}

/// Haar-ish random density matrix (Ginibre construction), for tests and the
/// validation scenario.
pub fn random_density_matrix<R: rand::Rng>(d: FockDim, rng: &mut R) -> DensityMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let n = d.get();
    let g = CMat::from_fn(n, n, |_, _| {
        c(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        )
    });
    let m = &g * g.adjoint();
    let t = trace(&m).re;
    DensityMatrix::new(m.scale(1.0 / t)).expect("Ginibre construction is a valid state")
}


/// Debug-only: expose the tridiagonal reduction so QL failures can be traced.
#[doc(hidden)]
pub fn eigh_tridiag_debug(m: &CMat) {
    let n = m.nrows();
    let mut a = hermitize(m);
    let mut q = CMat::identity(n, n);
    let mut diag = vec![0.0_f64; n];
    let mut sub = vec![cr(0.0); n.saturating_sub(1)];
    let mut u = vec![cr(0.0); n];
    let mut p = vec![cr(0.0); n];
    for k in 0..n.saturating_sub(1) {
        let mut xnorm2 = 0.0;
        for i in k + 1..n {
            xnorm2 += a[(i, k)].norm_sqr();
        }
        let x1 = a[(k + 1, k)];
        if xnorm2 == 0.0 {
            sub[k] = cr(0.0);
            continue;
        }
        let xnorm = xnorm2.sqrt();
        let phase = if x1.norm() == 0.0 { cr(1.0) } else { x1 / cr(x1.norm()) };
        let alpha = -phase * cr(xnorm);
        sub[k] = alpha;
        u[k + 1] = x1 - alpha;
        for i in k + 2..n {
            u[i] = a[(i, k)];
        }
        let unorm2: f64 = (k + 1..n).map(|i| u[i].norm_sqr()).sum();
        if unorm2 == 0.0 {
            continue;
        }
        let inv = cr(1.0 / unorm2.sqrt());
        for i in k + 1..n {
            u[i] *= inv;
        }
        for i in k + 1..n {
            let mut acc = cr(0.0);
            for j in k + 1..n {
                acc += a[(i, j)] * u[j];
            }
            p[i] = acc * cr(2.0);
        }
        let udp: C64 = (k + 1..n).map(|i| u[i].conj() * p[i]).sum();
        for i in k + 1..n {
            p[i] -= udp * u[i];
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let upd = u[i] * p[j].conj() + p[i] * u[j].conj();
                a[(i, j)] -= upd;
            }
        }
        for row in 0..n {
            let mut z = cr(0.0);
            for j in k + 1..n {
                z += q[(row, j)] * u[j];
            }
            let z2 = z * cr(2.0);
            for j in k + 1..n {
                q[(row, j)] -= z2 * u[j].conj();
            }
        }
    }
    for i in 0..n {
        diag[i] = a[(i, i)].re;
    }
    let mut e = vec![0.0_f64; n];
    for k in 0..n.saturating_sub(1) {
        e[k] = sub[k].norm();
    }
    let eps = f64::EPSILON;
    let anorm = (0..n)
        .map(|i| diag[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for x in e.iter_mut() {
        if x.abs() <= eps * anorm {
            *x = 0.0;
        }
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = diag[mm].abs() + diag[mm + 1].abs();
                if e[mm].abs() <= eps * dd || e[mm].abs() <= eps * anorm {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 40 {
                println!("STUCK at l={l} mm={mm}");
                println!("diag around: {:?}", &diag[l..=(mm).min(l + 6)]);
                println!("e around: {:?}", &e[l..=(mm - 1).min(l + 6)]);
                return;
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = diag[mm] - diag[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut pshift = 0.0_f64;
            let mut i = mm;
            while i > l {
                let i1 = i - 1;
                let mut f = s * e[i1];
                let b = c * e[i1];
                r = f.hypot(g);
                e[i] = r;
                if r == 0.0 {
                    diag[i] -= pshift;
                    e[mm] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i] - pshift;
                r = (diag[i1] - g) * s + 2.0 * c * b;
                pshift = s * r;
                diag[i] = g + pshift;
                g = c * r - b;
                for row in 0..n {
                    f = q[(row, i)].re;
                    let fi = q[(row, i)].im;
                    let pr = q[(row, i1)];
                    q[(row, i)] = C64::new(s * pr.re + c * f, s * pr.im + c * fi);
                    q[(row, i1)] = C64::new(c * pr.re - s * f, c * pr.im - s * fi);
                }
                i -= 1;
            }
            if r == 0.0 && i > l {
                continue;
            }
            diag[l] -= pshift;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    println!("QL converged fine; eigenvalue range [{:?}, {:?}]",
        diag.iter().cloned().fold(f64::INFINITY, f64::min),
        diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
}
