#![allow(dead_code)]

use ehaoi::SystemParams;

pub const NS: [usize; 3] = [1, 2, 3];
pub const BS: [usize; 4] = [1, 2, 3, 5];
pub const RHOS: [f64; 3] = [0.5, 1.0, 3.0];
pub const BETAS: [f64; 3] = [0.5, 1.5, 5.0];

/// Source weights before normalization: equal, or the first source three
/// times as heavy as each of the others.
pub fn splits(n: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![1.0]];
    }
    let equal = vec![1.0; n];
    let mut skew = vec![1.0; n];
    skew[0] = 3.0;
    vec![equal, skew]
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub params: SystemParams,
    pub label: String,
}

/// Every grid point with `μ = 1`.
pub fn grid() -> Vec<Cell> {
    let mut out = Vec::new();
    for n in NS {
        for b in BS {
            for rho in RHOS {
                for beta in BETAS {
                    for (k, w) in splits(n).into_iter().enumerate() {
                        let total: f64 = w.iter().sum();
                        let utils: Vec<f64> = w.iter().map(|x| rho * x / total).collect();
                        let params = SystemParams::from_utilizations(&utils, beta, 1.0, b).unwrap();
                        let label = format!("N={n} B={b} rho={rho} beta={beta} split={k}");
                        out.push(Cell { params, label });
                    }
                }
            }
        }
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
