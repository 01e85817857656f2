use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_COLUMNS: usize = 20;
const MAX_SPARSITY: usize = 4;

/// Restricted isometry constant `ε_s` by exhaustive search over all size-`s`
/// column subsets.
///
/// Limited to `n ≤ 20`, `s ≤ 4`.
pub fn rip_constant(a: &DMatrix<f64>, s: usize) -> Result<f64> {
    let n = a.ncols();
    if n > MAX_COLUMNS || s > MAX_SPARSITY || s == 0 || s > n {
        return Err(Error::Domain(format!(
            "exhaustive RIP search needs 1 <= s <= min(n, {MAX_SPARSITY}) and n <= {MAX_COLUMNS} (got s = {s}, n = {n})"
        )));
    }
    let mut subset: Vec<usize> = (0..s).collect();
    let mut eps = 0.0f64;
    loop {
        let sub = a.select_columns(&subset);
        let sv = sub.singular_values();
        let smax_sq = sv.max().powi(2);
        // fewer rows than columns leaves a null direction
        let smin_sq = if s > a.nrows() { 0.0 } else { sv.min().powi(2) };
        eps = eps.max(1.0 - smin_sq).max(smax_sq - 1.0);
        if !next_subset(&mut subset, n) {
            return Ok(eps);
        }
    }
}

/// Advance to the next k-subset of `0..n` in lexicographic order.
fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_binomial() {
        let mut idx = vec![0, 1];
        let mut count = 1;
        while next_subset(&mut idx, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
    }

    #[test]
    fn orthonormal_columns_are_isometric() {
        let a = DMatrix::<f64>::identity(6, 6);
        for s in 1..=4 {
            assert!(rip_constant(&a, s).unwrap() < 1e-14);
        }
    }

    #[test]
    fn scaled_identity() {
        let a = DMatrix::<f64>::identity(2, 2) * 2.0;
        assert!((rip_constant(&a, 1).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn size_guard() {
        let a = DMatrix::<f64>::zeros(4, 21);
        assert!(rip_constant(&a, 2).is_err());
        let b = DMatrix::<f64>::zeros(4, 10);
        assert!(rip_constant(&b, 5).is_err());
    }
}
