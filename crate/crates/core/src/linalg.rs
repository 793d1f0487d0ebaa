//! Small dense solves and compensated summation.

use nalgebra::{DMatrix, DVector};

use crate::error::{AoiError, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Solves `a·x = b` by LU with partial pivoting and checks the scaled
/// residual `‖a·x − b‖∞ / (‖a‖∞·‖x‖∞ + ‖b‖∞)` against `rtol`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, what: &str, rtol: f64) -> Result<DVector<f64>> {
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| AoiError::Singular(what.to_string()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(AoiError::Singular(format!("{what}: non-finite solution")));
    }
    let residual = (a * &x - b).amax();
    let scale = row_norm(a) * x.amax() + b.amax();
    if residual > rtol * scale.max(f64::MIN_POSITIVE) {
        return Err(AoiError::Singular(format!(
            "{what}: residual {residual:e} exceeds tolerance (scale {scale:e})"
        )));
    }
    Ok(x)
}

fn row_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// For a Z-matrix (non-positive off-diagonal), returns whether it is a
/// nonsingular M-matrix: Gaussian elimination without pivoting must produce
/// only positive pivots.
pub fn is_nonsingular_m_matrix(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let mut m = a.clone();
    for k in 0..n {
        let pivot = m[(k, k)];
        if !(pivot > 0.0) {
            return false;
        }
        for i in k + 1..n {
            let f = m[(i, k)] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                let v = m[(k, j)];
                m[(i, j)] -= f * v;
            }
        }
    }
    true
}
