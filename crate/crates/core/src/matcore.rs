//! Complex dense matrix primitives.
//!
//! `CMatrix` wraps a dense `nalgebra` matrix over `Complex<f64>`. Everything
//! here works over the complex field; there are no real fast paths.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{dim_err, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

/// Thin singular value decomposition `a = u * diag(s) * v_t`, singular values
/// sorted in decreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v_t: CMatrix,
}

impl CMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return dim_err(format!("matrix must be non-empty, got {rows}x{cols}"));
        }
        if entries.len() != rows * cols {
            return dim_err(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            ));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix entries must be finite".into()));
        }
        Ok(CMatrix(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        CMatrix(m)
    }

    pub fn diag_real(values: &[f64]) -> Self {
        Self::diag(&values.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    /// Column vector (k x 1).
    pub fn column_vector(v: &[C64]) -> Self {
        CMatrix(DMatrix::from_column_slice(v.len(), 1, v))
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let Some(first) = cols.first() else {
            return dim_err("no columns");
        };
        let k = first.len();
        if cols.iter().any(|c| c.len() != k) {
            return dim_err("columns of unequal height");
        }
        let mut m = DMatrix::zeros(k, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, z) in c.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        Ok(CMatrix(m))
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        CMatrix(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    /// Row-major copy of the entries.
    pub fn entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn transpose(&self) -> Self {
        CMatrix(self.0.transpose())
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn conj(&self) -> Self {
        CMatrix(self.0.map(|z| z.conj()))
    }

    /// Matrix product. Panics on inner dimension mismatch; callers validate.
    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols(), other.rows(), "matmul dimension mismatch");
        CMatrix(&self.0 * &other.0)
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix(self.0.map(|z| z * s))
    }

    pub fn scale_c(&self, s: C64) -> CMatrix {
        CMatrix(self.0.map(|z| z * s))
    }

    pub fn add_scaled(&self, other: &CMatrix, t: f64) -> CMatrix {
        CMatrix(&self.0 + other.0.map(|z| z * t))
    }

    /// Frobenius norm.
    pub fn frob(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Real inner product `Re <self, other>`.
    pub fn real_dot(&self, other: &CMatrix) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Bilinear (unconjugated) sum `Σ self_ij other_ij`.
    pub fn bilinear_dot(&self, other: &CMatrix) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.rows()).map(|i| self.0.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect()
    }

    pub fn col_norms(&self) -> Vec<f64> {
        (0..self.cols()).map(|j| self.0.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect()
    }

    pub fn rows_block(&self, start: usize, len: usize) -> CMatrix {
        CMatrix(self.0.rows(start, len).into_owned())
    }

    pub fn cols_block(&self, start: usize, len: usize) -> CMatrix {
        CMatrix(self.0.columns(start, len).into_owned())
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[CMatrix]) -> Result<CMatrix> {
        let Some(first) = parts.first() else {
            return dim_err("vstack of nothing");
        };
        let c = first.cols();
        if parts.iter().any(|p| p.cols() != c) {
            return dim_err("vstack: column counts differ");
        }
        let r: usize = parts.iter().map(|p| p.rows()).sum();
        let mut m = DMatrix::zeros(r, c);
        let mut off = 0;
        for p in parts {
            m.rows_mut(off, p.rows()).copy_from(&p.0);
            off += p.rows();
        }
        Ok(CMatrix(m))
    }

    /// Pads with zero columns up to `cols` columns.
    pub fn pad_cols(&self, cols: usize) -> CMatrix {
        let mut m = DMatrix::zeros(self.rows(), cols.max(self.cols()));
        m.columns_mut(0, self.cols()).copy_from(&self.0);
        CMatrix(m)
    }

    /// Pads with zero rows up to `rows` rows.
    pub fn pad_rows(&self, rows: usize) -> CMatrix {
        let mut m = DMatrix::zeros(rows.max(self.rows()), self.cols());
        m.rows_mut(0, self.rows()).copy_from(&self.0);
        CMatrix(m)
    }

    pub fn svd(&self) -> Svd {
        let svd = self.0.clone().svd(true, true);
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let r = idx.len();
        let mut us = DMatrix::zeros(u.nrows(), r);
        let mut vs = DMatrix::zeros(r, v_t.ncols());
        let mut s = Vec::with_capacity(r);
        for (new, &old) in idx.iter().enumerate() {
            us.set_column(new, &u.column(old));
            vs.set_row(new, &v_t.row(old));
            s.push(svd.singular_values[old].max(0.0));
        }
        Svd { u: CMatrix(us), s, v_t: CMatrix(vs) }
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.0.singular_values().iter().map(|x| x.max(0.0)).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Moore–Penrose pseudo-inverse with relative cutoff `1e-12`.
    pub fn pinv(&self) -> CMatrix {
        let svd = self.svd();
        let smax = svd.s.first().copied().unwrap_or(0.0);
        let cut = 1e-12 * smax.max(f64::MIN_POSITIVE);
        let mut out = DMatrix::zeros(self.cols(), self.rows());
        for (i, &s) in svd.s.iter().enumerate() {
            if s > cut {
                let v = svd.v_t.0.row(i).adjoint();
                let u = svd.u.0.column(i).adjoint();
                out += (v * u).map(|z| z / s);
            }
        }
        CMatrix(out)
    }

    pub fn inverse(&self) -> Option<CMatrix> {
        if self.rows() != self.cols() {
            return None;
        }
        self.0.clone().try_inverse().map(CMatrix)
    }

    /// Numerical rank with relative tolerance.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let s = self.singular_values();
        let smax = s.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        s.iter().filter(|&&x| x > rel_tol * smax).count()
    }

    /// Orthonormal basis (columns) of the null space `{v : self v = 0}`.
    pub fn null_space(&self, rel_tol: f64) -> Option<CMatrix> {
        let k = self.cols();
        let padded = if self.rows() < k { self.pad_rows(k) } else { self.clone() };
        let svd = padded.svd();
        let smax = svd.s.first().copied().unwrap_or(0.0);
        let cols: Vec<Vec<C64>> = svd
            .s
            .iter()
            .enumerate()
            .filter(|(_, &s)| smax == 0.0 || s <= rel_tol * smax)
            .map(|(i, _)| svd.v_t.row(i).iter().map(|z| z.conj()).collect())
            .collect();
        if cols.is_empty() {
            None
        } else {
            CMatrix::from_columns(&cols).ok()
        }
    }

    /// Orthonormal basis (columns) of the column space, by Gram–Schmidt
    /// with one reorthogonalization pass.
    pub fn range_basis(&self, rel_tol: f64) -> Option<CMatrix> {
        let scale = self.col_norms().into_iter().fold(0.0, f64::max);
        let mut basis: Vec<Vec<C64>> = Vec::new();
        for j in 0..self.cols() {
            let mut v = self.column(j);
            for _ in 0..2 {
                for q in &basis {
                    let c: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= c * qi;
                    }
                }
            }
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if scale > 0.0 && n > rel_tol * scale {
                basis.push(v.into_iter().map(|z| z / n).collect());
            }
        }
        if basis.is_empty() {
            None
        } else {
            CMatrix::from_columns(&basis).ok()
        }
    }
}

/// Largest singular value.
pub fn op_norm(a: &CMatrix) -> f64 {
    a.singular_values().first().copied().unwrap_or(0.0)
}

/// `trace(|a|^2)^{1/2}`, which is the Frobenius norm.
pub fn hs_norm(a: &CMatrix) -> f64 {
    a.frob()
}

/// Sum of singular values (trace-class norm).
pub fn nuclear_norm(a: &CMatrix) -> f64 {
    a.singular_values().iter().sum()
}

/// Polar decomposition `a = pos * rho` with `pos = |a*|` positive semidefinite
/// (n x n) and `rho` a contraction (n x k).
///
/// On rank-deficient inputs `rho` is built from the thin SVD, so it vanishes
/// on the kernel directions that carry zero singular values.
pub fn polar_decompose(a: &CMatrix) -> (CMatrix, CMatrix) {
    let svd = a.svd();
    let n = a.rows();
    let k = a.cols();
    let r = svd.s.len();
    let mut pos = DMatrix::<C64>::zeros(n, n);
    let mut rho = DMatrix::<C64>::zeros(n, k);
    for i in 0..r {
        let u = svd.u.0.column(i);
        let v_t = svd.v_t.0.row(i);
        pos += (u * u.adjoint()).map(|z| z * svd.s[i]);
        if svd.s[i] > 0.0 {
            rho += u * v_t;
        }
    }
    (CMatrix(pos), CMatrix(rho))
}

/// Glues matrices with equal row counts from the right: `[a_1, ..., a_k]`.
pub fn glue_right(parts: &[CMatrix]) -> Result<CMatrix> {
    let Some(first) = parts.first() else {
        return dim_err("glue_right of nothing");
    };
    let r = first.rows();
    if parts.iter().any(|p| p.rows() != r) {
        return dim_err("glue_right: row counts differ");
    }
    let c: usize = parts.iter().map(|p| p.cols()).sum();
    let mut m = DMatrix::zeros(r, c);
    let mut off = 0;
    for p in parts {
        m.columns_mut(off, p.cols()).copy_from(&p.0);
        off += p.cols();
    }
    Ok(CMatrix(m))
}

/// Block-diagonal matrix with the given blocks.
pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.rows()).sum();
    let cols: usize = blocks.iter().map(|b| b.cols()).sum();
    let mut m = DMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        m.view_mut((r0, c0), (b.rows(), b.cols())).copy_from(&b.0);
        r0 += b.rows();
        c0 += b.cols();
    }
    CMatrix(m)
}

/// Matrix action on an element column stored as coordinates (k x m, one column
/// per component): `(alpha x)_i = Σ_j alpha_ij x_j`.
pub fn mat_apply(alpha: &CMatrix, coords: &CMatrix) -> Result<CMatrix> {
    if alpha.cols() != coords.cols() {
        return dim_err(format!(
            "matrix has {} columns but the element column has height {}",
            alpha.cols(),
            coords.cols()
        ));
    }
    Ok(coords.matmul(&alpha.transpose()))
}

#[derive(Serialize, Deserialize)]
struct CMatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CMatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            entries: self.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CMatrixRepr::deserialize(d)?;
        CMatrix::new(r.rows, r.cols, r.entries.iter().map(|e| C64::new(e[0], e[1])).collect()).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
        let e = (0..r * c).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        CMatrix::new(r, c, e).unwrap()
    }

    /// Power iteration on a* a, independent of the SVD path.
    fn power_oracle(a: &CMatrix) -> f64 {
        let g = a.adjoint().matmul(a);
        let mut v = CMatrix::from_real(a.cols(), 1, &vec![1.0; a.cols()]).unwrap();
        for k in 0..a.cols() {
            v.set(k, 0, C64::new(1.0, 0.1 * k as f64));
        }
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w = g.matmul(&v);
            lambda = w.frob();
            v = w.scale(1.0 / lambda);
        }
        lambda.sqrt()
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&CMatrix::identity(2)) - 1.0).abs() < 1e-12);
        assert!((op_norm(&CMatrix::diag_real(&[3.0, 1.0])) - 3.0).abs() < 1e-12);
        assert_eq!(op_norm(&CMatrix::zeros(2, 3)), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(&mut rng, 4, 3);
        assert!((op_norm(&a) - power_oracle(&a)).abs() < 1e-8);
    }

    #[test]
    fn hs_norm_examples() {
        assert!((hs_norm(&CMatrix::identity(2)) - 2f64.sqrt()).abs() < 1e-15);
        assert!((hs_norm(&CMatrix::diag_real(&[3.0, 4.0])) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn polar_examples() {
        let a = CMatrix::diag_real(&[2.0, 3.0]);
        let (pos, rho) = polar_decompose(&a);
        assert!(pos.sub(&a).frob() < 1e-12);
        assert!(rho.sub(&CMatrix::identity(2)).frob() < 1e-12);
        let (pos, rho) = polar_decompose(&CMatrix::zeros(2, 2));
        assert!(pos.frob() < 1e-15);
        assert!(op_norm(&rho) <= 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&mut rng, 3, 2);
        let (pos, rho) = polar_decompose(&a);
        assert!(a.sub(&pos.matmul(&rho)).frob() < 1e-9);
        assert!(op_norm(&rho) <= 1.0 + 1e-12);
    }

    #[test]
    fn glue_examples() {
        let one = CMatrix::from_real(1, 1, &[1.0]).unwrap();
        let two = CMatrix::from_real(1, 1, &[2.0]).unwrap();
        let g = glue_right(&[one, two]).unwrap();
        assert_eq!(g, CMatrix::from_real(1, 2, &[1.0, 2.0]).unwrap());
        let g = glue_right(&[CMatrix::identity(2), CMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(g.cols(), 4);
        assert!((op_norm(&g) - 1.0).abs() < 1e-12);
        assert!(glue_right(&[CMatrix::identity(2), CMatrix::identity(3)]).is_err());
        // orthogonal rows: gluing m copies scales the norm by sqrt(m)
        let a = CMatrix::from_real(2, 2, &[3.0, 0.0, 0.0, 2.0]).unwrap();
        let g = glue_right(&[a.clone(), a.clone(), a.clone()]).unwrap();
        assert!((op_norm(&g) - 3f64.sqrt() * 3.0).abs() < 1e-10);
    }

    #[test]
    fn mat_apply_examples() {
        let x = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(mat_apply(&CMatrix::identity(2), &x).unwrap(), x);
        let perm = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let px = mat_apply(&perm, &x).unwrap();
        assert_eq!(px.column(0), x.column(1));
        assert_eq!(px.column(1), x.column(0));
        let v = CMatrix::from_real(3, 1, &[1.0, -1.0, 0.5]).unwrap();
        let two = CMatrix::diag_real(&[2.0]);
        assert_eq!(mat_apply(&two, &v).unwrap(), v.scale(2.0));
        assert!(mat_apply(&CMatrix::identity(3), &x).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = CMatrix::new(1, 2, vec![C64::new(0.1, -1e-300), C64::new(1.0 / 3.0, 5e300)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        for (a, b) in m.entries().iter().zip(back.entries()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert!(serde_json::from_str::<CMatrix>(r#"{"rows":1,"cols":2,"entries":[[1,0]]}"#).is_err());
    }

    #[test]
    fn null_space_is_annihilated() {
        let b = CMatrix::from_real(1, 3, &[1.0, 2.0, 0.0]).unwrap();
        let n = b.null_space(1e-10).unwrap();
        assert_eq!(n.cols(), 2);
        assert!(b.matmul(&n).frob() < 1e-12);
    }
}
