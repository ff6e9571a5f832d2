//! Dense row-major matrices and the numeric primitives the models are
//! built from: a stable softmax, a normal-equation least-squares solver,
//! the ADAM update rule, and a central-difference gradient oracle.
//!
//! Everything is `f64`; gradient checks at 1e-4 tolerance are not
//! reliable in single precision.

use crate::error::{Error, Result};

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices. All rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Size("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::Size(format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Size(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Size(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let lhs = self.row(r);
            let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &l) in lhs.iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                let rhs = other.row(k);
                for (d, &x) in dst.iter_mut().zip(rhs) {
                    *d += l * x;
                }
            }
        }
        Ok(out)
    }

    /// `self += scale * other`, shapes must match.
    pub fn add_scaled(&mut self, other: &Matrix, scale: f64) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Size(format!(
                "cannot add {}x{} into {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        for (d, s) in self.data.iter_mut().zip(&other.data) {
            *d += scale * s;
        }
        Ok(())
    }

    /// Rank-one update `self += scale * col * row` where `col` indexes
    /// rows of self and `row` its columns.
    pub fn add_scaled_outer(&mut self, col: &[f64], row: &[f64], scale: f64) {
        debug_assert_eq!(col.len(), self.rows);
        debug_assert_eq!(row.len(), self.cols);
        for (r, &cv) in col.iter().enumerate() {
            if cv == 0.0 {
                continue;
            }
            let f = scale * cv;
            let dst = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (d, &rv) in dst.iter_mut().zip(row) {
                *d += f * rv;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for d in &mut self.data {
            *d *= s;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute entry-wise difference; shapes must match.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Row vector times matrix: `v * m` for `v` of length `m.rows()`.
pub fn row_vec_mul(v: &[f64], m: &Matrix) -> Result<Vec<f64>> {
    if v.len() != m.rows {
        return Err(Error::Size(format!(
            "vector of length {} cannot multiply {}x{} matrix",
            v.len(),
            m.rows,
            m.cols
        )));
    }
    let mut out = vec![0.0; m.cols];
    for (k, &x) in v.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let row = m.row(k);
        for (o, &r) in out.iter_mut().zip(row) {
            *o += x * r;
        }
    }
    Ok(out)
}

/// Matrix times column vector: `m * v` for `v` of length `m.cols()`.
pub fn mat_vec_mul(m: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != m.cols {
        return Err(Error::Size(format!(
            "{}x{} matrix cannot multiply vector of length {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    Ok((0..m.rows).map(|r| dot(m.row(r), v)).collect())
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity. Errors on zero-norm inputs where it is undefined.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Size(format!(
            "cosine of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Numeric(
            "cosine undefined for zero-norm vector".into(),
        ));
    }
    Ok(dot(a, b) / (na * nb))
}

/// Numerically stable softmax with max subtraction.
pub fn stable_softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::Size("softmax of empty vector".into()));
    }
    if let Some(bad) = logits.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite logit {bad}")));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the orthogonal matrix of column eigenvectors.
pub(crate) fn sym_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::Size(
            "eigendecomposition needs a square matrix".into(),
        ));
    }
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let tol = 1e-14 * a.frobenius_norm().max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q).abs();
            }
        }
        if off < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() < tol * 1e-2 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| m.get(i, i)).collect();
    Ok((eigenvalues, v))
}

/// Ratio below which the smallest to largest singular value of the design
/// matrix is treated as rank deficiency.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares solve of `A W = B` via the normal equations
/// `(AᵀA) W = AᵀB`, factored with a symmetric eigendecomposition so the
/// conditioning check and the solve share one factorization.
pub fn least_squares_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(Error::Size(format!(
            "A has {} rows but B has {}",
            a.rows, b.rows
        )));
    }
    if a.rows < a.cols {
        return Err(Error::Degenerate(format!(
            "underdetermined system: {} equations for {} unknowns",
            a.rows, a.cols
        )));
    }
    let at = a.transpose();
    let ata = at.matmul(a)?;
    let atb = at.matmul(b)?;
    let (eigenvalues, vectors) = sym_eigen(&ata)?;

    // Singular values of A are the square roots of AᵀA's eigenvalues.
    let sigma: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let s_max = sigma.iter().cloned().fold(0.0, f64::max);
    let s_min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    if s_max == 0.0 || s_min / s_max < RANK_TOLERANCE {
        return Err(Error::Degenerate(format!(
            "rank-deficient design matrix: singular value ratio {:.3e} (smallest {:.3e}, largest {:.3e})",
            if s_max == 0.0 { 0.0 } else { s_min / s_max },
            s_min,
            s_max
        )));
    }

    // W = V diag(1/lambda) Vᵀ (AᵀB)
    let vt_atb = vectors.transpose().matmul(&atb)?;
    let mut scaled = vt_atb;
    for (i, &l) in eigenvalues.iter().enumerate() {
        let inv = 1.0 / l;
        for c in 0..scaled.cols() {
            let v = scaled.get(i, c);
            scaled.set(i, c, v * inv);
        }
    }
    vectors.matmul(&scaled)
}

/// `‖A W − B‖_F²`, the quantity [`least_squares_solve`] minimizes.
pub fn residual_sq(a: &Matrix, w: &Matrix, b: &Matrix) -> Result<f64> {
    let pred = a.matmul(w)?;
    if pred.shape() != b.shape() {
        return Err(Error::Size("residual shapes do not match".into()));
    }
    Ok(pred
        .data()
        .iter()
        .zip(b.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum())
}

/// ADAM optimizer state for one parameter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first_moment: Matrix,
    second_moment: Matrix,
    timestep: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    /// State with the standard defaults beta1=0.9, beta2=0.999, eps=1e-8.
    pub fn new(rows: usize, cols: usize, learning_rate: f64) -> Self {
        AdamState {
            first_moment: Matrix::zeros(rows, cols),
            second_moment: Matrix::zeros(rows, cols),
            timestep: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate,
        }
    }

    pub fn timestep(&self) -> u64 {
        self.timestep
    }
}

/// One bias-corrected ADAM update applied in place.
pub fn adam_step(params: &mut Matrix, grads: &Matrix, state: &mut AdamState) -> Result<()> {
    if params.shape() != grads.shape() {
        return Err(Error::Size(format!(
            "gradient shape {:?} does not match parameter shape {:?}",
            grads.shape(),
            params.shape()
        )));
    }
    if state.first_moment.shape() != params.shape() {
        return Err(Error::Size(format!(
            "optimizer state shape {:?} does not match parameter shape {:?}",
            state.first_moment.shape(),
            params.shape()
        )));
    }
    state.timestep += 1;
    let t = state.timestep as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let m = state.first_moment.data_mut();
    let v = state.second_moment.data_mut();
    let p = params.data_mut();
    let g = grads.data();
    for i in 0..p.len() {
        m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
        v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        p[i] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

/// Central-difference gradient of a scalar function of a matrix:
/// `(f(x + h e) − f(x − h e)) / 2h` per entry. The test oracle for every
/// analytic gradient in the crate.
pub fn finite_difference_gradient<F>(mut f: F, x: &Matrix, h: f64) -> Result<Matrix>
where
    F: FnMut(&Matrix) -> Result<f64>,
{
    if h <= 0.0 {
        return Err(Error::Argument("step size must be positive".into()));
    }
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    let mut probe = x.clone();
    for i in 0..x.data().len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + h;
        let plus = f(&probe)?;
        probe.data_mut()[i] = orig - h;
        let minus = f(&probe)?;
        probe.data_mut()[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite function value while differentiating entry {i}"
            )));
        }
        grad.data_mut()[i] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Relative Frobenius distance between two gradients, used by the
/// finite-difference checks.
pub fn relative_error(a: &Matrix, b: &Matrix) -> f64 {
    let mut diff = a.clone();
    diff.add_scaled(b, -1.0).expect("shapes checked by caller");
    let denom = a.frobenius_norm().max(b.frobenius_norm());
    if denom == 0.0 {
        0.0
    } else {
        diff.frobenius_norm() / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn softmax_symmetry() {
        let p = stable_softmax(&[0.0, 0.0]).unwrap();
        assert_relative_eq!(p[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(p[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn softmax_hand_values() {
        // exp(ln 1), exp(ln 2), exp(ln 3) normalize to 1/6, 2/6, 3/6.
        let p = stable_softmax(&[1.0f64.ln(), 2.0f64.ln(), 3.0f64.ln()]).unwrap();
        assert_relative_eq!(p[0], 1.0 / 6.0, epsilon = 1e-9);
        assert_relative_eq!(p[1], 2.0 / 6.0, epsilon = 1e-9);
        assert_relative_eq!(p[2], 3.0 / 6.0, epsilon = 1e-9);
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn softmax_errors() {
        assert!(matches!(stable_softmax(&[]), Err(Error::Size(_))));
        assert!(matches!(
            stable_softmax(&[1.0, f64::NAN]),
            Err(Error::Numeric(_))
        ));
        // Large logits must not overflow thanks to max subtraction.
        let p = stable_softmax(&[1e4, -1e4]).unwrap();
        assert!(p.iter().all(|v| v.is_finite()));
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one_and_shift_invariant(
            logits in proptest::collection::vec(-50.0f64..50.0, 1..12),
            shift in -20.0f64..20.0,
        ) {
            let p = stable_softmax(&logits).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            // Entries are strictly positive; the top entry can round to
            // exactly 1.0 once the logit gap exceeds f64 precision.
            prop_assert!(p.iter().all(|&v| v > 0.0 && v <= 1.0));
            let shifted: Vec<f64> = logits.iter().map(|v| v + shift).collect();
            let q = stable_softmax(&shifted).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn matmul_associativity(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rand_mat = |rng: &mut ChaCha8Rng| {
                let data: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
                Matrix::from_vec(10, 10, data).unwrap()
            };
            let a = rand_mat(&mut rng);
            let b = rand_mat(&mut rng);
            let c = rand_mat(&mut rng);
            let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
            let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
            let denom = left.frobenius_norm().max(1e-12);
            let mut diff = left.clone();
            diff.add_scaled(&right, -1.0).unwrap();
            prop_assert!(diff.frobenius_norm() / denom < 1e-9);
        }
    }

    #[test]
    fn least_squares_identity_design() {
        let d = 4;
        let a = Matrix::identity(d);
        let b = Matrix::from_vec(d, 2, (0..8).map(|v| v as f64).collect()).unwrap();
        let w = least_squares_solve(&a, &b).unwrap();
        assert!(w.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn least_squares_scaled_design() {
        let d = 3;
        let mut a = Matrix::identity(d);
        a.scale(2.0);
        let b = Matrix::from_vec(d, 1, vec![2.0, 4.0, 6.0]).unwrap();
        let w = least_squares_solve(&a, &b).unwrap();
        let mut expected = b.clone();
        expected.scale(0.5);
        assert!(w.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn least_squares_hand_solved_normal_equations() {
        // A = [[1,0],[0,1],[1,1]], B = [1,1,2]ᵀ. Normal equations give
        // AᵀA = [[2,1],[1,2]], AᵀB = [3,3]ᵀ, so W = [1,1]ᵀ with zero residual.
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let b = Matrix::from_vec(3, 1, vec![1.0, 1.0, 2.0]).unwrap();
        let w = least_squares_solve(&a, &b).unwrap();
        assert_relative_eq!(w.get(0, 0), 1.0, epsilon = 1e-10);
        assert_relative_eq!(w.get(1, 0), 1.0, epsilon = 1e-10);
        assert!(residual_sq(&a, &w, &b).unwrap() < 1e-18);
    }

    #[test]
    fn least_squares_rank_deficient() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        let b = Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        match least_squares_solve(&a, &b) {
            Err(Error::Degenerate(msg)) => assert!(msg.contains("rank-deficient")),
            other => panic!("expected degenerate-system error, got {other:?}"),
        }
    }

    #[test]
    fn least_squares_local_optimality_probe() {
        // Residual of the solution must not exceed the residual of the
        // solution perturbed by ±1e-3 in any single entry.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = Matrix::from_vec(
            20,
            5,
            (0..100).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let b = Matrix::from_vec(
            20,
            2,
            (0..40).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let w = least_squares_solve(&a, &b).unwrap();
        let base = residual_sq(&a, &w, &b).unwrap();
        for i in 0..w.data().len() {
            for delta in [1e-3, -1e-3] {
                let mut probe = w.clone();
                probe.data_mut()[i] += delta;
                assert!(residual_sq(&a, &probe, &b).unwrap() >= base - 1e-12);
            }
        }
        // And against 100 random perturbations of every entry at once.
        for _ in 0..100 {
            let mut probe = w.clone();
            for v in probe.data_mut() {
                *v += rng.random_range(-1e-3..1e-3);
            }
            assert!(residual_sq(&a, &probe, &b).unwrap() >= base - 1e-12);
        }
    }

    #[test]
    fn adam_zero_gradient_is_identity() {
        let mut params = Matrix::from_vec(2, 2, vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        let before = params.clone();
        let grads = Matrix::zeros(2, 2);
        let mut state = AdamState::new(2, 2, 0.1);
        adam_step(&mut params, &grads, &mut state).unwrap();
        assert_eq!(params, before);
        assert_eq!(state.timestep(), 1);
    }

    #[test]
    fn adam_first_step_magnitude() {
        // With bias correction the first step is lr * g / (|g| + eps).
        let g = 0.37;
        let lr = 0.01;
        let mut params = Matrix::zeros(1, 1);
        let grads = Matrix::from_vec(1, 1, vec![g]).unwrap();
        let mut state = AdamState::new(1, 1, lr);
        adam_step(&mut params, &grads, &mut state).unwrap();
        let expected = -lr * g / (g.abs() + state.epsilon);
        assert_relative_eq!(params.get(0, 0), expected, epsilon = 1e-15);
    }

    #[test]
    fn adam_two_identical_steps_hand_recursion() {
        // Evaluate the moment recursions by hand for t = 2 with a constant
        // scalar gradient g: m2/(1-b1²) = g and v2/(1-b2²) = g², so the
        // second step is again lr * g / (|g| + eps).
        let g = -1.25;
        let lr = 0.003;
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let mut params = Matrix::zeros(1, 1);
        let grads = Matrix::from_vec(1, 1, vec![g]).unwrap();
        let mut state = AdamState::new(1, 1, lr);
        adam_step(&mut params, &grads, &mut state).unwrap();
        let after_first = params.get(0, 0);

        let m2 = b1 * (1.0 - b1) * g + (1.0 - b1) * g;
        let v2 = b2 * (1.0 - b2) * g * g + (1.0 - b2) * g * g;
        let m_hat = m2 / (1.0 - b1 * b1);
        let v_hat: f64 = v2 / (1.0 - b2 * b2);
        let expected_second = -lr * m_hat / (v_hat.sqrt() + eps);

        adam_step(&mut params, &grads, &mut state).unwrap();
        assert_relative_eq!(
            params.get(0, 0) - after_first,
            expected_second,
            epsilon = 1e-15
        );
    }

    #[test]
    fn adam_is_deterministic() {
        let run = || {
            let mut params = Matrix::from_vec(2, 3, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
            let grads = Matrix::from_vec(2, 3, vec![0.5, -0.25, 0.125, 1.0, -1.0, 2.0]).unwrap();
            let mut state = AdamState::new(2, 3, 0.01);
            for _ in 0..25 {
                adam_step(&mut params, &grads, &mut state).unwrap();
            }
            params
        };
        let a = run();
        let b = run();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn adam_shape_mismatch() {
        let mut params = Matrix::zeros(2, 2);
        let grads = Matrix::zeros(2, 3);
        let mut state = AdamState::new(2, 2, 0.1);
        assert!(matches!(
            adam_step(&mut params, &grads, &mut state),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn finite_difference_on_sum() {
        let x = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = finite_difference_gradient(|m| Ok(m.data().iter().sum()), &x, 1e-5).unwrap();
        for &v in g.data() {
            assert_relative_eq!(v, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn finite_difference_on_half_norm_squared() {
        // Central differences are exact for quadratics up to roundoff.
        let x = Matrix::from_vec(1, 3, vec![0.5, -1.5, 2.0]).unwrap();
        let g = finite_difference_gradient(
            |m| Ok(0.5 * m.data().iter().map(|v| v * v).sum::<f64>()),
            &x,
            1e-5,
        )
        .unwrap();
        for (got, want) in g.data().iter().zip(x.data()) {
            assert_relative_eq!(got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn cosine_basics() {
        assert_relative_eq!(
            cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            cosine(&[1.0, 0.0], &[0.0, 2.0]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::Numeric(_))
        ));
    }
}
