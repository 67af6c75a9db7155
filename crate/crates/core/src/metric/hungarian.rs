//! Minimum-cost perfect matching on a square matrix.
//!
//! Shortest augmenting path formulation with row/column potentials,
//! O(n^3). Columns are scanned in ascending order and a candidate only
//! replaces the current best on a strictly smaller reduced cost, so equal
//! costs resolve toward the lower column index and the result is a pure
//! function of the matrix.

/// Returns `col_of_row[i]` for a minimum-cost assignment of an `n x n`
/// row-major matrix.
pub(crate) fn solve(n: usize, cost: &[f64]) -> Vec<usize> {
    debug_assert_eq!(cost.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    // 1-based with a virtual column 0, as in the textbook presentation
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = inf);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        col_of_row[row_of_col[j] - 1] = j - 1;
    }
    col_of_row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_cases() {
        assert_eq!(solve(0, &[]), Vec::<usize>::new());
        assert_eq!(solve(1, &[0.7]), vec![0]);
        assert_eq!(solve(2, &[0.0, 1.0, 1.0, 0.0]), vec![0, 1]);
        assert_eq!(solve(2, &[0.5, 0.2, 0.3, 0.9]), vec![1, 0]);
    }

    #[test]
    fn three_by_three() {
        // optimum 1 + 2 + 2 = 5 via rows -> cols (1, 0, 2)
        let c = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        assert_eq!(solve(3, &c), vec![1, 0, 2]);
    }
}
