//! Dense LU solve for the small `M x M` projection system.

use crate::error::{Error, Result};

/// Solves `(A + delta I) z = e` by Gaussian elimination with partial
/// pivoting. `a` is row-major `M x M`.
///
/// The memory variants produce a nonsymmetric `A`, so one general
/// factorization serves every variant. A pivot no larger than
/// `M * eps * max|A + delta I|` is reported as [`Error::Singular`].
pub fn solve_regularized(a: &[f64], delta: f64, e: &[f64]) -> Result<Vec<f64>> {
    let m = e.len();
    Error::check_len("projection matrix", m * m, a.len())?;
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!("regularization must be nonnegative, got {delta}")));
    }
    let mut lu = a.to_vec();
    for i in 0..m {
        lu[i * m + i] += delta;
    }
    let mut z = e.to_vec();
    lu_solve_in_place(&mut lu, &mut z)?;
    Ok(z)
}

/// Factorizes `lu` (row-major, square, overwritten) and solves for `rhs` in
/// place.
pub(crate) fn lu_solve_in_place(lu: &mut [f64], rhs: &mut [f64]) -> Result<()> {
    let m = rhs.len();
    let scale = lu.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if !scale.is_finite() {
        return Err(Error::Singular {
            pivot: f64::NAN,
            row: 0,
        });
    }
    let tiny = scale * f64::EPSILON * m as f64;

    for k in 0..m {
        let (piv_row, piv_abs) = (k..m)
            .map(|r| (r, lu[r * m + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= tiny || piv_abs == 0.0 {
            return Err(Error::Singular {
                pivot: piv_abs,
                row: k,
            });
        }
        if piv_row != k {
            for c in 0..m {
                lu.swap(k * m + c, piv_row * m + c);
            }
            rhs.swap(k, piv_row);
        }
        let pivot = lu[k * m + k];
        for r in k + 1..m {
            let f = lu[r * m + k] / pivot;
            if f == 0.0 {
                continue;
            }
            lu[r * m + k] = f;
            for c in k + 1..m {
                lu[r * m + c] -= f * lu[k * m + c];
            }
            rhs[r] -= f * rhs[k];
        }
    }

    for k in (0..m).rev() {
        let mut s = rhs[k];
        for c in k + 1..m {
            s -= lu[k * m + c] * rhs[c];
        }
        rhs[k] = s / lu[k * m + k];
    }
    Ok(())
}
