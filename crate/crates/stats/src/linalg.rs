//! Dense column-major matrix and Householder least squares.

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds a matrix from equal-length columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            data.extend_from_slice(c);
        }
        Self { rows, cols: columns.len(), data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.column(j)) {
                *o += a * vj;
            }
        }
        out
    }
}

/// Solution of a (weighted) least-squares problem.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    /// Weighted residual sum of squares.
    pub rss: f64,
    /// (XᵀWX)⁻¹, row-major p×p.
    pub unscaled_cov: Vec<Vec<f64>>,
}

/// Relative residual norm below which a column counts as linearly dependent.
const RANK_TOL: f64 = 1e-10;

/// Minimizes Σ wᵢ (yᵢ − xᵢβ)² by Householder QR.
///
/// On rank deficiency returns the indices of every column lying in the span
/// of the columns before it.
pub fn least_squares(x: &Matrix, y: &[f64], weights: Option<&[f64]>) -> std::result::Result<LeastSquares, Vec<usize>> {
    let n = x.rows();
    let p = x.cols();
    assert_eq!(y.len(), n);
    let mut a = x.clone();
    let mut b = y.to_vec();
    if let Some(w) = weights {
        assert_eq!(w.len(), n);
        let sw: Vec<f64> = w.iter().map(|v| v.max(0.0).sqrt()).collect();
        for j in 0..p {
            for (v, s) in a.column_mut(j).iter_mut().zip(&sw) {
                *v *= s;
            }
        }
        for (v, s) in b.iter_mut().zip(&sw) {
            *v *= s;
        }
    }
    let orig_norms: Vec<f64> = (0..p).map(|j| norm(a.column(j))).collect();

    let mut dependent = Vec::new();
    let mut k = 0usize;
    for j in 0..p {
        let nrm = if k < n { norm(&a.column(j)[k..]) } else { 0.0 };
        if orig_norms[j] == 0.0 || nrm <= RANK_TOL * orig_norms[j] {
            dependent.push(j);
            continue;
        }
        let alpha = if a.get(k, j) > 0.0 { -nrm } else { nrm };
        let mut v: Vec<f64> = a.column(j)[k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 > 0.0 {
            for jj in j..p {
                let col = &mut a.column_mut(jj)[k..];
                let dot: f64 = col.iter().zip(&v).map(|(c, vi)| c * vi).sum();
                let f = 2.0 * dot / vnorm2;
                for (c, vi) in col.iter_mut().zip(&v) {
                    *c -= f * vi;
                }
            }
            let tail = &mut b[k..];
            let dot: f64 = tail.iter().zip(&v).map(|(c, vi)| c * vi).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in tail.iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        a.set(k, j, alpha);
        for i in k + 1..n {
            a.set(i, j, 0.0);
        }
        k += 1;
    }
    if !dependent.is_empty() {
        return Err(dependent);
    }

    // R is the leading p×p block of `a`.
    let mut coef = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = b[i];
        for jj in i + 1..p {
            s -= a.get(i, jj) * coef[jj];
        }
        coef[i] = s / a.get(i, i);
    }
    let rss = b[p..].iter().map(|v| v * v).sum();

    // R⁻¹ by back substitution, then (RᵀR)⁻¹ = R⁻¹R⁻ᵀ.
    let mut rinv = vec![vec![0.0; p]; p];
    for col in 0..p {
        for i in (0..=col).rev() {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for jj in i + 1..=col {
                s -= a.get(i, jj) * rinv[jj][col];
            }
            rinv[i][col] = s / a.get(i, i);
        }
    }
    let mut cov = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            let start = i.max(j);
            cov[i][j] = (start..p).map(|m| rinv[i][m] * rinv[j][m]).sum();
        }
    }
    Ok(LeastSquares { coef, rss, unscaled_cov: cov })
}

fn norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale) * (x / scale)).sum::<f64>().sqrt()
}
