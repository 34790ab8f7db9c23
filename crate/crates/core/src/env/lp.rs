//! Small dense linear programs: two-phase tableau simplex with Bland's rule.

use crate::error::{check_len, Error, Result};

const EPS: f64 = 1e-10;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `maximize c.x  s.t.  rows, x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> Result<&mut Self> {
        check_len("LP row", self.num_vars(), coeffs.len())?;
        if !rhs.is_finite() || coeffs.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("LP row has non-finite entries"));
        }
        self.rows.push((coeffs, rel, rhs));
        Ok(self)
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::invalid("LP without variables"));
        }
        if self.objective.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("LP objective has non-finite entries"));
        }
        Tableau::build(self).solve(&self.objective)
    }
}

/// Columns: original variables, then one slack/surplus per inequality, then artificials.
struct Tableau {
    n: usize,
    num_cols: usize,
    first_artificial: usize,
    /// Row-major `rows x (num_cols + 1)`; last entry of each row is the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let p = lp.rows.len();
        let num_slack = lp.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        // Normalize to nonnegative right-hand sides first.
        let rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|(c, rel, b)| {
                if *b < 0.0 {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.iter().map(|x| -x).collect(), flipped, -b)
                } else {
                    (c.clone(), *rel, *b)
                }
            })
            .collect();
        let num_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n + num_slack;
        let num_cols = first_artificial + num_art;
        let w = num_cols + 1;
        let mut a = vec![0.0; p * w];
        let mut basis = Vec::with_capacity(p);
        let (mut slack, mut art) = (n, first_artificial);
        for (r, (coeffs, rel, b)) in rows.iter().enumerate() {
            let row = &mut a[r * w..(r + 1) * w];
            row[..n].copy_from_slice(coeffs);
            row[num_cols] = *b;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
        }
        Self {
            n,
            num_cols,
            first_artificial,
            a,
            basis,
        }
    }

    fn width(&self) -> usize {
        self.num_cols + 1
    }

    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width() + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let piv = self.at(pr, pc);
        for c in 0..w {
            self.a[pr * w + c] /= piv;
        }
        let prow: Vec<f64> = self.a[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows() {
            if r == pr {
                continue;
            }
            let f = self.a[r * w + pc];
            if f != 0.0 {
                for (c, pv) in prow.iter().enumerate() {
                    self.a[r * w + c] -= f * pv;
                }
                self.a[r * w + pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    /// Maximizes `cost` (indexed by column) over the current basis, never entering columns at or
    /// beyond `col_limit`.
    fn optimize(&mut self, cost: &[f64], col_limit: usize) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            // Reduced cost of column j: c_B . column_j - c_j; negative means improving.
            let entering = (0..col_limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = (0..self.rows())
                    .map(|r| cost[self.basis[r]] * self.at(r, j))
                    .sum();
                z - cost[j] < -EPS
            });
            let Some(pc) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows() {
                let coef = self.at(r, pc);
                if coef > EPS {
                    let ratio = self.at(r, self.num_cols) / coef;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - EPS
                                || ((ratio - lratio).abs() <= EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, _)) = leave else {
                return Err(Error::invalid("LP is unbounded"));
            };
            self.pivot(pr, pc);
        }
        Err(Error::Internal("simplex pivot limit reached".into()))
    }

    fn solve(mut self, objective: &[f64]) -> Result<LpSolution> {
        if self.first_artificial < self.num_cols {
            let mut phase1 = vec![0.0; self.num_cols];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = -1.0;
            }
            self.optimize(&phase1, self.num_cols)?;
            let infeas: f64 = (0..self.rows())
                .filter(|&r| self.basis[r] >= self.first_artificial)
                .map(|r| self.at(r, self.num_cols))
                .sum();
            if infeas > 1e-9 {
                return Err(Error::Infeasible(format!(
                    "phase one ends with infeasibility {infeas:e}"
                )));
            }
            // Drive remaining zero-level artificials out of the basis, dropping redundant rows.
            let mut r = 0;
            while r < self.rows() {
                if self.basis[r] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&c| self.at(r, c).abs() > EPS) {
                        Some(c) => self.pivot(r, c),
                        None => {
                            let w = self.width();
                            self.a.drain(r * w..(r + 1) * w);
                            self.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }
        let mut cost = vec![0.0; self.num_cols];
        cost[..self.n].copy_from_slice(objective);
        self.optimize(&cost, self.first_artificial)?;
        let mut x = vec![0.0; self.n];
        for r in 0..self.rows() {
            let b = self.basis[r];
            if b < self.n {
                x[b] = self.at(r, self.num_cols).max(0.0);
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, value })
    }
}

/// `maximize c.x  s.t.  A x <= b` over the probability simplex.
pub fn solve_lp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    check_len("LP right-hand side", a.len(), b.len())?;
    let mut lp = LinearProgram::new(c.to_vec());
    for (row, rhs) in a.iter().zip(b) {
        lp.add_row(row.clone(), Relation::Le, *rhs)?;
    }
    lp.add_row(vec![1.0; c.len()], Relation::Eq, 1.0)?;
    let mut sol = lp.solve()?;
    // Rounding can leave the mixture a hair off the simplex.
    let total: f64 = sol.x.iter().sum();
    if total > 0.0 {
        for v in &mut sol.x {
            *v /= total;
        }
    }
    sol.value = c.iter().zip(&sol.x).map(|(ci, v)| ci * v).sum();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binding_constraint_splits() {
        let s = solve_lp(&[1.0, 0.0], &[vec![1.0, -1.0]], &[0.0]).unwrap();
        assert!((s.x[0] - 0.5).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
        assert!((s.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_picks_argmax() {
        let s = solve_lp(&[0.2, 0.9, 0.4], &[], &[]).unwrap();
        assert_eq!(s.x, vec![0.0, 1.0, 0.0]);
        assert_eq!(s.value, 0.9);
    }

    #[test]
    fn flat_objective() {
        let s = solve_lp(&[1.0, 1.0], &[], &[]).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_reported() {
        let err = solve_lp(&[1.0, 0.0], &[vec![1.0, 1.0]], &[-0.5]).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn general_form_with_ge_rows() {
        // max x + y s.t. x + 2y <= 4, x >= 1, y >= 1 -> (2, 1), value 3
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 2.0], Relation::Le, 4.0).unwrap();
        lp.add_row(vec![1.0, 0.0], Relation::Ge, 1.0).unwrap();
        lp.add_row(vec![0.0, 1.0], Relation::Ge, 1.0).unwrap();
        let s = lp.solve().unwrap();
        assert!((s.value - 3.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_reported() {
        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.add_row(vec![0.0, 1.0], Relation::Le, 1.0).unwrap();
        assert!(lp.solve().is_err());
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_row(vec![1.0, 1.0], Relation::Eq, 1.0).unwrap();
        lp.add_row(vec![2.0, 2.0], Relation::Eq, 2.0).unwrap();
        let s = lp.solve().unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's cycling example; Bland's rule must terminate, at value 5/4.
        let mut lp = LinearProgram::new(vec![0.75, -20.0, 0.5, -6.0]);
        lp.add_row(vec![0.25, -8.0, -1.0, 9.0], Relation::Le, 0.0)
            .unwrap();
        lp.add_row(vec![0.5, -12.0, -0.5, 3.0], Relation::Le, 0.0)
            .unwrap();
        lp.add_row(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0)
            .unwrap();
        let s = lp.solve().unwrap();
        assert!((s.value - 1.25).abs() < 1e-12);
    }

    fn grid_best(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
        let k = c.len();
        let steps = 100;
        let mut best: Option<f64> = None;
        let mut consider = |x: &[f64]| {
            let feasible = a.iter().zip(b).all(|(row, rhs)| {
                row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>() <= rhs + 1e-12
            });
            if feasible {
                let v: f64 = c.iter().zip(x).map(|(ci, v)| ci * v).sum();
                best = Some(best.map_or(v, |bv: f64| bv.max(v)));
            }
        };
        match k {
            2 => {
                for i in 0..=steps {
                    let x0 = i as f64 / steps as f64;
                    consider(&[x0, 1.0 - x0]);
                }
            }
            3 => {
                for i in 0..=steps {
                    for j in 0..=(steps - i) {
                        let x0 = i as f64 / steps as f64;
                        let x1 = j as f64 / steps as f64;
                        consider(&[x0, x1, (1.0 - x0 - x1).max(0.0)]);
                    }
                }
            }
            _ => unreachable!(),
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_grid_search(
            k in 2usize..=3,
            c in prop::collection::vec(-1.0f64..1.0, 3),
            rows in prop::collection::vec((prop::collection::vec(-1.0f64..1.0, 3), -0.5f64..0.5), 0..4),
        ) {
            let c = &c[..k];
            let a: Vec<Vec<f64>> = rows.iter().map(|(r, _)| r[..k].to_vec()).collect();
            let b: Vec<f64> = rows.iter().map(|(_, rhs)| *rhs).collect();
            match solve_lp(c, &a, &b) {
                Ok(sol) => {
                    let s: f64 = sol.x.iter().sum();
                    prop_assert!((s - 1.0).abs() < 1e-9);
                    prop_assert!(sol.x.iter().all(|v| *v >= 0.0));
                    for (row, rhs) in a.iter().zip(&b) {
                        let lhs: f64 = row.iter().zip(&sol.x).map(|(r, v)| r * v).sum();
                        prop_assert!(lhs <= rhs + 1e-9);
                    }
                    if let Some(g) = grid_best(c, &a, &b) {
                        prop_assert!(g <= sol.value + 1e-2);
                    }
                }
                Err(Error::Infeasible(_)) => {
                    // A feasible grid point would contradict the solver.
                    prop_assert!(grid_best(c, &a, &b).is_none());
                }
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
