//! Minimum-cost linear assignment (Hungarian method with potentials).

/// Solves the assignment problem for an `n x m` cost matrix. Rectangular
/// inputs are padded with zero-cost dummy rows or columns. Returns, for each
/// original row, its assigned column (`None` when it landed on a dummy
/// column), and the total cost of the real assignments.
pub fn linear_assignment(cost: &[Vec<i64>]) -> (Vec<Option<usize>>, i64) {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    assert!(cost.iter().all(|r| r.len() == cols), "ragged cost matrix");
    let size = rows.max(cols);
    if size == 0 {
        return (Vec::new(), 0);
    }
    let at = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            cost[i][j]
        } else {
            0
        }
    };

    // 1-based arrays; index 0 is the virtual start column.
    const INF: i64 = i64::MAX / 4;
    let mut u = vec![0i64; size + 1];
    let mut v = vec![0i64; size + 1];
    let mut matched_row = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    for i in 1..=size {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=size {
                if !used[j] {
                    let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows];
    let mut total = 0;
    for j in 1..=size {
        let i = matched_row[j];
        if i >= 1 && i <= rows && j <= cols {
            assignment[i - 1] = Some(j - 1);
            total += cost[i - 1][j - 1];
        }
    }
    (assignment, total)
}
