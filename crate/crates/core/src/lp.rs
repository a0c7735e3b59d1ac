//! Exact rational simplex for fractional edge cover programs.
//!
//! The cover program `min Σ w_F λ_F  s.t.  Σ_{F ∋ v} λ_F ≥ 1, λ ≥ 0` is
//! solved through its packing dual `max Σ y_v  s.t.  Σ_{v ∈ F} y_v ≤ w_F,
//! y ≥ 0`, whose slack basis is feasible whenever all weights are
//! nonnegative. At the optimum the reduced costs of the slack columns are
//! the optimal `λ`. Pivoting follows Bland's rule, so the solver terminates
//! and is deterministic.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSolution {
    pub lambda: Vec<BigRational>,
    pub objective: BigRational,
}

/// `edges[j]` lists the vertex indices (in `0..num_vertices`) of edge `j`.
/// Returns `Err(v)` for the first vertex no edge covers.
pub fn solve_cover(
    num_vertices: usize,
    edges: &[Vec<usize>],
    weights: &[BigRational],
) -> Result<CoverSolution, usize> {
    assert_eq!(edges.len(), weights.len());
    assert!(weights.iter().all(|w| !w.is_negative()), "negative edge weight");
    let mut covered = vec![false; num_vertices];
    for e in edges {
        for &v in e {
            covered[v] = true;
        }
    }
    if let Some(v) = covered.iter().position(|c| !c) {
        return Err(v);
    }

    let m = edges.len();
    let cols = num_vertices + m;
    // rows 0..m are constraints; last column is the right-hand side
    let mut table: Vec<Vec<BigRational>> = (0..m)
        .map(|j| {
            let mut row = vec![BigRational::zero(); cols + 1];
            for &v in &edges[j] {
                row[v] = BigRational::one();
            }
            row[num_vertices + j] = BigRational::one();
            row[cols] = weights[j].clone();
            row
        })
        .collect();
    let mut objective = vec![BigRational::zero(); cols + 1];
    for c in objective.iter_mut().take(num_vertices) {
        *c = -BigRational::one();
    }
    let mut basis: Vec<usize> = (num_vertices..cols).collect();

    while let Some(enter) = (0..cols).find(|&c| objective[c].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for (r, row) in table.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[cols] / &row[enter];
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        // every dual variable appears in some finite-capacity row, so the
        // packing program is bounded
        let (pivot_row, _) = leave.expect("cover dual is bounded when every vertex is covered");
        pivot(&mut table, &mut objective, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let lambda = (0..m).map(|j| objective[num_vertices + j].clone()).collect();
    Ok(CoverSolution {
        lambda,
        objective: objective[cols].clone(),
    })
}

fn pivot(table: &mut [Vec<BigRational>], objective: &mut [BigRational], row: usize, col: usize) {
    let p = table[row][col].clone();
    for x in table[row].iter_mut() {
        *x = &*x / &p;
    }
    let pivot_row = table[row].clone();
    for (r, other) in table.iter_mut().enumerate() {
        if r == row || other[col].is_zero() {
            continue;
        }
        let factor = other[col].clone();
        for (x, p) in other.iter_mut().zip(&pivot_row) {
            *x -= &factor * p;
        }
    }
    if !objective[col].is_zero() {
        let factor = objective[col].clone();
        for (x, p) in objective.iter_mut().zip(&pivot_row) {
            *x -= &factor * p;
        }
    }
}
