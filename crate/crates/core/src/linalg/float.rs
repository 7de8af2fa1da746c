use nalgebra::DMatrix;

/// Relative singular-value threshold used for numerical rank.
pub const RANK_TOL: f64 = 1e-9;

/// Number of singular values above `tol · max(1, σ_max)`.
pub fn svd_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cut = tol * smax.max(1.0);
    sv.iter().filter(|&&s| s > cut).count()
}

pub fn sigma_max(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn norm_p(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * x
            .iter()
            .map(|v| (v.abs() / m).powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

pub fn mat_vec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}
