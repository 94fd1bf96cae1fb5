//! Operators on (NV levels)^centers ⊗ (truncated Fock space).
//!
//! Ordering is NV 1 ⊗ NV 2 ⊗ … ⊗ phonon, with the phonon index fastest.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    pub nv_levels: usize,
    pub n_centers: usize,
    pub fock_dim: usize,
}

impl HilbertSpace {
    pub fn new(nv_levels: usize, n_centers: usize, fock_dim: usize) -> Result<Self> {
        if !(2..=3).contains(&nv_levels) || !(1..=2).contains(&n_centers) {
            return Err(Error::DimensionMismatch(format!(
                "unsupported space: {nv_levels} levels x {n_centers} centres"
            )));
        }
        if fock_dim < 4 {
            return Err(Error::TruncationTooSmall(format!(
                "fock_dim = {fock_dim}, need at least 4"
            )));
        }
        Ok(Self {
            nv_levels,
            n_centers,
            fock_dim,
        })
    }

    pub fn nv_dim(&self) -> usize {
        self.nv_levels.pow(self.n_centers as u32)
    }

    pub fn dim(&self) -> usize {
        self.nv_dim() * self.fock_dim
    }

    /// Flat index of NV levels `levels` (one per centre) and Fock number `n`.
    pub fn index(&self, levels: &[usize], n: usize) -> usize {
        let mut idx = 0;
        for &lv in levels {
            idx = idx * self.nv_levels + lv;
        }
        idx * self.fock_dim + n
    }

    /// Embeds a single-centre operator acting on centre `center`.
    pub fn nv_op(&self, center: usize, op: &Mat) -> Mat {
        let id = Mat::identity(self.nv_levels, self.nv_levels);
        let mut acc = Mat::identity(1, 1);
        for k in 0..self.n_centers {
            acc = kron(&acc, if k == center { op } else { &id });
        }
        kron(&acc, &Mat::identity(self.fock_dim, self.fock_dim))
    }

    /// Embeds an operator on all NV centres (dimension `nv_dim`).
    pub fn nv_joint_op(&self, op: &Mat) -> Mat {
        kron(op, &Mat::identity(self.fock_dim, self.fock_dim))
    }

    /// Embeds a phonon operator.
    pub fn phonon_op(&self, op: &Mat) -> Mat {
        kron(&Mat::identity(self.nv_dim(), self.nv_dim()), op)
    }

    pub fn destroy(&self) -> Mat {
        self.phonon_op(&destroy(self.fock_dim))
    }

    pub fn number(&self) -> Mat {
        self.phonon_op(&number(self.fock_dim))
    }

    pub fn identity(&self) -> Mat {
        Mat::identity(self.dim(), self.dim())
    }
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn destroy(n: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    for k in 1..n {
        m[(k - 1, k)] = c((k as f64).sqrt());
    }
    m
}

pub fn number(n: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    for k in 0..n {
        m[(k, k)] = c(k as f64);
    }
    m
}

/// `|i⟩⟨j|` on a `dim`-level system.
pub fn ket_bra(dim: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(dim, dim);
    m[(i, j)] = c(1.0);
    m
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Mat {
    Mat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
}

pub fn pauli_x() -> Mat {
    from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> Mat {
    Mat::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)])
}

pub fn pauli_z() -> Mat {
    from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn dagger(m: &Mat) -> Mat {
    m.adjoint()
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

/// Frobenius norm.
pub fn fro(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator `Σ_j M_j e^{i ω_j t}`.
#[derive(Debug, Clone, Default)]
pub struct TimeOp {
    pub terms: Vec<(Mat, f64)>,
}

impl TimeOp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(m: Mat) -> Self {
        Self { terms: vec![(m, 0.0)] }
    }

    pub fn dim(&self) -> Option<usize> {
        self.terms.first().map(|(m, _)| m.nrows())
    }

    /// Adds `m e^{iωt}`; terms with equal frequency are merged.
    pub fn add(&mut self, m: Mat, omega: f64) {
        let same = |w: f64| (w - omega).abs() <= 1e-12 * w.abs().max(omega.abs());
        if let Some(slot) = self.terms.iter_mut().find(|(_, w)| same(*w)) {
            slot.0 += m;
        } else {
            self.terms.push((m, omega));
        }
    }

    /// Adds `m e^{iωt} + h.c.`
    pub fn add_hc(&mut self, m: Mat, omega: f64) {
        let md = m.adjoint();
        if omega == 0.0 {
            self.add(m + md, 0.0);
        } else {
            self.add(m, omega);
            self.add(md, -omega);
        }
    }

    pub fn extend(&mut self, other: &TimeOp) {
        for (m, w) in &other.terms {
            self.add(m.clone(), *w);
        }
    }

    pub fn scaled(&self, s: C64) -> TimeOp {
        TimeOp {
            terms: self.terms.iter().map(|(m, w)| (m * s, *w)).collect(),
        }
    }

    pub fn adjoint(&self) -> TimeOp {
        TimeOp {
            terms: self.terms.iter().map(|(m, w)| (m.adjoint(), -*w)).collect(),
        }
    }

    pub fn at(&self, t: f64) -> Mat {
        let n = self.dim().unwrap_or(0);
        let mut out = Mat::zeros(n, n);
        for (m, w) in &self.terms {
            out += m * C64::from_polar(1.0, w * t);
        }
        out
    }

    /// Product of two time-dependent operators.
    pub fn mul(&self, other: &TimeOp) -> TimeOp {
        let mut out = TimeOp::new();
        for (a, wa) in &self.terms {
            for (b, wb) in &other.terms {
                out.add(a * b, wa + wb);
            }
        }
        out
    }

    pub fn commutator(&self, other: &TimeOp) -> TimeOp {
        let mut out = self.mul(other);
        out.extend(&other.mul(self).scaled(c(-1.0)));
        out
    }

    /// Conjugates every term: `P M P'` for rectangular `P` (left) and `Q` (right).
    pub fn sandwich(&self, left: &Mat, right: &Mat) -> TimeOp {
        TimeOp {
            terms: self.terms.iter().map(|(m, w)| (left * m * right, *w)).collect(),
        }
    }

    /// Interaction picture with respect to the static Hermitian `h0`:
    /// `e^{i h0 t} H(t) e^{-i h0 t}`, split into frequency components.
    pub fn interaction_picture(&self, h0: &Mat) -> TimeOp {
        let eig = h0.clone().symmetric_eigen();
        let n = h0.nrows();
        // group degenerate eigenvalues
        let scale = eig.eigenvalues.amax().max(1e-300);
        let mut levels: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, &e) in eig.eigenvalues.iter().enumerate() {
            match levels.iter_mut().find(|(v, _)| (v - e).abs() <= 1e-9 * scale) {
                Some(slot) => slot.1.push(i),
                None => levels.push((e, vec![i])),
            }
        }
        let projectors: Vec<(f64, Mat)> = levels
            .iter()
            .map(|(e, idx)| {
                let mut p = Mat::zeros(n, n);
                for &i in idx {
                    let v = eig.eigenvectors.column(i);
                    p += &v * v.adjoint();
                }
                (*e, p)
            })
            .collect();
        let mut out = TimeOp::new();
        for (m, w) in &self.terms {
            for (ea, pa) in &projectors {
                let left = pa * m;
                for (eb, pb) in &projectors {
                    let part = &left * pb;
                    if fro(&part) > 1e-14 * fro(m) {
                        out.add(part, w + ea - eb);
                    }
                }
            }
        }
        out
    }

    /// Drops terms with Frobenius norm below `tol`.
    pub fn pruned(mut self, tol: f64) -> TimeOp {
        self.terms.retain(|(m, _)| fro(m) > tol);
        self
    }

    /// Relative anti-Hermitian part at time `t`.
    pub fn hermiticity_defect(&self, t: f64) -> f64 {
        let h = self.at(t);
        let n = fro(&h);
        if n == 0.0 {
            0.0
        } else {
            fro(&(&h - h.adjoint())) / n
        }
    }
}

/// Compressed sparse row matrix used for fast matrix-vector products.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl Csr {
    pub fn from_dense(m: &Mat) -> Self {
        let n = m.nrows();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            data,
        }
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.data[self.indptr[i]..self.indptr[i + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// `out += s · A x`
    #[inline]
    pub fn mul_add(&self, x: &[C64], s: C64, out: &mut [C64]) {
        for i in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            out[i] += s * acc;
        }
    }
}

/// Sparse form of a [`TimeOp`] for repeated `H(t) ψ` products.
#[derive(Debug, Clone)]
pub struct SparseTimeOp {
    pub terms: Vec<(Csr, f64)>,
    pub dim: usize,
}

impl SparseTimeOp {
    pub fn new(op: &TimeOp) -> Self {
        Self {
            terms: op.terms.iter().map(|(m, w)| (Csr::from_dense(m), *w)).collect(),
            dim: op.dim().unwrap_or(0),
        }
    }

    /// `out = s · H(t) x`
    pub fn apply(&self, t: f64, x: &[C64], s: C64, out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        self.apply_add(t, x, s, out);
    }

    /// `out += s · H(t) x`
    pub fn apply_add(&self, t: f64, x: &[C64], s: C64, out: &mut [C64]) {
        for (m, w) in &self.terms {
            m.mul_add(x, s * C64::from_polar(1.0, w * t), out);
        }
    }

    /// Sum of the largest absolute row sums of the terms (bound on `‖H(t)‖`).
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(m, _)| m.max_row_sum()).sum()
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|(_, w)| w.abs()).fold(0.0, f64::max)
    }
}

/// Single-centre operators on the NV level space, ordered `g+1, g-1` and
/// then `e` (three-level Λ system) or `g0` (ground triplet).
pub mod nv {
    use super::*;

    pub const GP: usize = 0;
    pub const GM: usize = 1;
    /// Third level: excited state in the Λ model, `g0` in the triplet model.
    pub const THIRD: usize = 2;

    /// `σ_x` within `{g+1, g-1}`, zero on the third level when present.
    pub fn sx(levels: usize) -> Mat {
        let mut m = Mat::zeros(levels, levels);
        m[(GP, GM)] = c(1.0);
        m[(GM, GP)] = c(1.0);
        m
    }

    pub fn sy(levels: usize) -> Mat {
        let mut m = Mat::zeros(levels, levels);
        m[(GP, GM)] = -I;
        m[(GM, GP)] = I;
        m
    }

    pub fn sz(levels: usize) -> Mat {
        let mut m = Mat::zeros(levels, levels);
        m[(GP, GP)] = c(1.0);
        m[(GM, GM)] = c(-1.0);
        m
    }

    /// `σ_+ = |g+1⟩⟨g-1|`
    pub fn sp(levels: usize) -> Mat {
        ket_bra(levels, GP, GM)
    }

    /// Identity on `{g+1, g-1}`.
    pub fn id_pm(levels: usize) -> Mat {
        let mut m = Mat::zeros(levels, levels);
        m[(GP, GP)] = c(1.0);
        m[(GM, GM)] = c(1.0);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_commutator() {
        let a = destroy(6);
        let comm = commutator(&a, &a.adjoint());
        for k in 0..5 {
            assert!((comm[(k, k)] - c(1.0)).norm() < 1e-14);
        }
        assert!((comm[(5, 5)] - c(-5.0)).norm() < 1e-14);
    }

    #[test]
    fn index_layout() {
        let hs = HilbertSpace::new(3, 2, 5).unwrap();
        assert_eq!(hs.dim(), 45);
        assert_eq!(hs.index(&[1, 2], 3), (1 * 3 + 2) * 5 + 3);
        let op = hs.nv_op(1, &ket_bra(3, 2, 0));
        let from = hs.index(&[1, 0], 3);
        let to = hs.index(&[1, 2], 3);
        assert_eq!(op[(to, from)], c(1.0));
        assert!(HilbertSpace::new(2, 2, 3).is_err());
    }

    #[test]
    fn time_op_hermitian_and_sparse() {
        let hs = HilbertSpace::new(2, 1, 4).unwrap();
        let mut h = TimeOp::new();
        h.add_hc(hs.destroy() * c(0.3) * I, 2.0);
        h.add_hc(hs.nv_op(0, &nv::sp(2)), -1.5);
        h.add(hs.number(), 0.0);
        for &t in &[0.0, 0.37, 5.1] {
            assert!(h.hermiticity_defect(t) < 1e-15);
        }
        let sparse = SparseTimeOp::new(&h);
        let x: Vec<C64> = (0..8).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let mut out = vec![C64::new(0.0, 0.0); 8];
        sparse.apply(0.7, &x, c(1.0), &mut out);
        let dense = h.at(0.7) * nalgebra::DVector::from_vec(x);
        for k in 0..8 {
            assert!((out[k] - dense[k]).norm() < 1e-13);
        }
    }
}
