//! Exact feasibility LP: find `x ≥ 0` with `A x = b`, or a Farkas
//! certificate `y` with `yᵀA ≤ 0` and `yᵀb > 0`.
//!
//! Phase-one simplex on a dense tableau with Bland's rule. Over an exact
//! ordered field the result is exact; no tolerances are involved.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem<S> {
    /// Constraint rows; all rows have the same length.
    pub a: Vec<Vec<S>>,
    pub b: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<S> {
    Feasible(Vec<S>),
    /// Farkas multipliers, one per constraint row.
    Infeasible(Vec<S>),
}

impl<S: Scalar> LpProblem<S> {
    pub fn new(a: Vec<Vec<S>>, b: Vec<S>) -> Self {
        assert_eq!(a.len(), b.len(), "one right-hand side per row");
        if let Some(first) = a.first() {
            assert!(a.iter().all(|r| r.len() == first.len()), "ragged constraint matrix");
        }
        Self { a, b }
    }

    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.a.first().map_or(0, |r| r.len())
    }

    /// `A x` for a candidate solution.
    pub fn apply(&self, x: &[S]) -> Vec<S> {
        self.a
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (a, x)| acc + a.clone() * x.clone())
            })
            .collect()
    }

    /// `yᵀA` for a candidate certificate.
    pub fn apply_transpose(&self, y: &[S]) -> Vec<S> {
        (0..self.cols())
            .map(|j| {
                self.a
                    .iter()
                    .zip(y)
                    .fold(S::zero(), |acc, (row, y)| acc + row[j].clone() * y.clone())
            })
            .collect()
    }

    pub fn is_solution(&self, x: &[S]) -> bool {
        x.len() == self.cols()
            && x.iter().all(|v| !v.is_negative())
            && self.apply(x).iter().zip(&self.b).all(|(l, r)| l.approx_eq(r))
    }

    pub fn is_certificate(&self, y: &[S]) -> bool {
        let yb = y
            .iter()
            .zip(&self.b)
            .fold(S::zero(), |acc, (y, b)| acc + y.clone() * b.clone());
        y.len() == self.rows() && self.apply_transpose(y).iter().all(|v| *v <= S::zero()) && yb > S::zero()
    }

    pub fn solve(&self) -> Feasibility<S> {
        let m = self.rows();
        let n = self.cols();
        let width = n + m + 1;
        let rhs = n + m;

        // Flip rows so that b ≥ 0; the artificial basis is then feasible.
        let signs: Vec<S> = self
            .b
            .iter()
            .map(|b| if b.is_negative() { -S::one() } else { S::one() })
            .collect();
        let mut tab: Vec<Vec<S>> = (0..m)
            .map(|i| {
                let mut row = Vec::with_capacity(width);
                row.extend(self.a[i].iter().map(|a| a.clone() * signs[i].clone()));
                row.extend((0..m).map(|k| if k == i { S::one() } else { S::zero() }));
                row.push(self.b[i].clone() * signs[i].clone());
                row
            })
            .collect();
        let mut basis: Vec<usize> = (n..n + m).collect();

        // Reduced costs of the phase-one objective (sum of artificials);
        // the last entry is minus the objective value.
        let mut obj = vec![S::zero(); width];
        for row in &tab {
            for j in 0..n {
                obj[j] = obj[j].clone() - row[j].clone();
            }
            obj[rhs] = obj[rhs].clone() - row[rhs].clone();
        }

        // Bland: lowest-index entering column, lowest-index leaving basic.
        while let Some(q) = (0..n + m).find(|&j| obj[j].is_negative()) {
            let mut leave: Option<(usize, S)> = None;
            for i in 0..m {
                if tab[i][q] > S::zero() {
                    let ratio = tab[i][rhs].clone() / tab[i][q].clone();
                    let better = match &leave {
                        None => true,
                        Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            // Phase one is bounded below by zero, so a leaving row exists.
            let (p, _) = leave.expect("phase-one objective is bounded");
            pivot(&mut tab, &mut obj, p, q);
            basis[p] = q;
        }

        let objective = -obj[rhs].clone();
        if objective > S::zero() {
            // y_k = 1 - reduced cost of artificial k, then undo the row flips.
            let y = (0..m)
                .map(|k| (S::one() - obj[n + k].clone()) * signs[k].clone())
                .collect();
            Feasibility::Infeasible(y)
        } else {
            let mut x = vec![S::zero(); n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = tab[i][rhs].clone();
                }
            }
            Feasibility::Feasible(x)
        }
    }
}

fn pivot<S: Scalar>(tab: &mut [Vec<S>], obj: &mut [S], p: usize, q: usize) {
    let inv = S::one() / tab[p][q].clone();
    for v in tab[p].iter_mut() {
        *v = v.clone() * inv.clone();
    }
    let pivot_row = tab[p].clone();
    let eliminate = |row: &mut [S]| {
        let f = row[q].clone();
        if f.is_zero() {
            return;
        }
        for (v, pv) in row.iter_mut().zip(&pivot_row) {
            *v = v.clone() - f.clone() * pv.clone();
        }
    };
    for (i, row) in tab.iter_mut().enumerate() {
        if i != p {
            eliminate(row);
        }
    }
    eliminate(obj);
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type R = BigRational;

    fn r(n: i64) -> R {
        R::from_ratio(n, 1)
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<R>> {
        rows.iter().map(|row| row.iter().map(|&v| r(v)).collect()).collect()
    }

    #[test]
    fn feasible_system() {
        // x + y = 2, x - y = 0
        let lp = LpProblem::new(mat(&[&[1, 1], &[1, -1]]), vec![r(2), r(0)]);
        match lp.solve() {
            Feasibility::Feasible(x) => {
                assert_eq!(x, vec![r(1), r(1)]);
                assert!(lp.is_solution(&x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_is_handled() {
        // -x = -3
        let lp = LpProblem::new(mat(&[&[-1]]), vec![r(-3)]);
        assert_eq!(lp.solve(), Feasibility::Feasible(vec![r(3)]));
    }

    #[test]
    fn infeasible_system_has_certificate() {
        // x + y = 1, x + y = 2
        let lp = LpProblem::new(mat(&[&[1, 1], &[1, 1]]), vec![r(1), r(2)]);
        match lp.solve() {
            Feasibility::Infeasible(y) => assert!(lp.is_certificate(&y)),
            other => panic!("{other:?}"),
        }
        // x = -1 with x ≥ 0
        let lp = LpProblem::new(mat(&[&[1]]), vec![r(-1)]);
        match lp.solve() {
            Feasibility::Infeasible(y) => assert!(lp.is_certificate(&y)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_rows_stay_feasible() {
        let lp = LpProblem::new(mat(&[&[1, 0, 1], &[0, 1, 1], &[1, 1, 2]]), vec![r(1), r(1), r(2)]);
        match lp.solve() {
            Feasibility::Feasible(x) => assert!(lp.is_solution(&x)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale-style degenerate rows with zero right-hand sides.
        let lp = LpProblem::new(
            vec![
                vec![
                    R::from_ratio(1, 4),
                    r(-60),
                    R::from_ratio(-1, 25),
                    r(9),
                    r(1),
                    r(0),
                    r(0),
                ],
                vec![
                    R::from_ratio(1, 2),
                    r(-90),
                    R::from_ratio(-1, 50),
                    r(3),
                    r(0),
                    r(1),
                    r(0),
                ],
                vec![r(0), r(0), r(1), r(0), r(0), r(0), r(1)],
            ],
            vec![r(0), r(0), r(1)],
        );
        match lp.solve() {
            Feasibility::Feasible(x) => assert!(lp.is_solution(&x)),
            other => panic!("{other:?}"),
        }
    }
}
