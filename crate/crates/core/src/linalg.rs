//! Dense Gaussian elimination over a field of scalars.

use crate::coeff::Scalar;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<C: Scalar>(rows: &mut [Vec<C>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(k) = (r..rows.len()).find(|&k| rows[k][c].is_unit()) else {
            continue;
        };
        rows.swap(r, k);
        let inv = rows[r][c].inv_unit().expect("pivot is a unit");
        for x in rows[r].iter_mut() {
            *x = *x * inv;
        }
        let pivot_row = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && !row[c].is_zero() {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = *x - f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Rows of the matrix whose columns are given.
pub fn transpose<C: Copy>(cols: &[Vec<C>]) -> Vec<Vec<C>> {
    let rows = cols.first().map_or(0, |c| c.len());
    (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
}

pub fn rank<C: Scalar>(rows: &[Vec<C>], ncols: usize) -> usize {
    rref(&mut rows.to_vec(), ncols).len()
}

/// Affine solution set `{particular + span(kernel)}` of a linear system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution<C> {
    pub particular: Vec<C>,
    pub kernel: Vec<Vec<C>>,
}

/// Solves `A x = b` with `A` given by rows. `None` if inconsistent.
pub fn solve<C: Scalar>(a: &[Vec<C>], b: &[C], ncols: usize, zero: C) -> Option<AffineSolution<C>> {
    let mut aug: Vec<Vec<C>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let pivots = rref(&mut aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let z = zero.zero_like();
    let mut particular = vec![z; ncols];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug[r][ncols];
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![z; ncols];
            v[f] = z.one_like();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -aug[r][f];
            }
            v
        })
        .collect();
    Some(AffineSolution { particular, kernel })
}

impl<C: Scalar> AffineSolution<C> {
    pub fn dimension(&self) -> usize {
        self.kernel.len()
    }

    /// Membership by a rank test on `x - particular` against the kernel.
    pub fn contains(&self, x: &[C]) -> bool {
        if x.len() != self.particular.len() {
            return false;
        }
        let d: Vec<C> = x.iter().zip(&self.particular).map(|(&a, &b)| a - b).collect();
        if d.iter().all(|c| c.is_zero()) {
            return true;
        }
        let n = d.len();
        let mut rows = self.kernel.clone();
        let r0 = rank(&rows, n);
        rows.push(d);
        rank(&rows, n) == r0
    }
}
