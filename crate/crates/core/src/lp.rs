//! Dense two-phase simplex over exact rationals with Bland's anti-cycling rule.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { point: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&[Rational], &Rational)> {
        match self {
            LpOutcome::Optimal { point, value } => Some((point, value)),
            _ => None,
        }
    }
}

/// Builder for `min/max c·x` subject to linear rows. Variables are
/// nonnegative unless marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    nvars: usize,
    free: Vec<bool>,
    rows: Vec<(Vec<Rational>, Cmp, Rational)>,
    objective: Vec<Rational>,
    maximize: bool,
}

impl LinearProgram {
    pub fn new(nvars: usize) -> Self {
        LinearProgram {
            nvars,
            free: vec![false; nvars],
            rows: Vec::new(),
            objective: vec![Rational::zero(); nvars],
            maximize: false,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub fn set_free_range(&mut self, range: std::ops::Range<usize>) {
        for j in range {
            self.free[j] = true;
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, cmp: Cmp, rhs: Rational) {
        assert_eq!(coeffs.len(), self.nvars, "row length mismatch");
        self.rows.push((coeffs, cmp, rhs));
    }

    /// Adds a row given as `(variable, coefficient)` terms; repeated
    /// variables accumulate.
    pub fn add_terms(&mut self, terms: &[(usize, Rational)], cmp: Cmp, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.nvars];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.rows.push((coeffs, cmp, rhs));
    }

    pub fn minimize(&mut self, objective: Vec<Rational>) {
        assert_eq!(objective.len(), self.nvars);
        self.objective = objective;
        self.maximize = false;
    }

    pub fn maximize(&mut self, objective: Vec<Rational>) {
        assert_eq!(objective.len(), self.nvars);
        self.objective = objective;
        self.maximize = true;
    }

    pub fn solve(&self) -> LpOutcome {
        // Column layout: for each variable a positive part, plus a negative
        // part for free variables; then slack columns; then artificials.
        let mut pos_col = Vec::with_capacity(self.nvars);
        let mut neg_col = vec![None; self.nvars];
        let mut ncols = 0;
        for (neg, &free) in neg_col.iter_mut().zip(&self.free) {
            pos_col.push(ncols);
            ncols += 1;
            if free {
                *neg = Some(ncols);
                ncols += 1;
            }
        }
        let structural = ncols;

        let m = self.rows.len();
        let mut cmps = Vec::with_capacity(m);
        let mut dense: Vec<Vec<Rational>> = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (coeffs, cmp, b) in &self.rows {
            let mut row = vec![Rational::zero(); structural];
            for (j, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                row[pos_col[j]] = c.clone();
                if let Some(nc) = neg_col[j] {
                    row[nc] = -c;
                }
            }
            let (row, cmp, b) = if b.is_negative() {
                let flipped = match cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                (row.into_iter().map(|x| -x).collect(), flipped, -b)
            } else {
                (row, *cmp, b.clone())
            };
            dense.push(row);
            cmps.push(cmp);
            rhs.push(b);
        }

        let nslack = cmps.iter().filter(|c| **c != Cmp::Eq).count();
        let nart = cmps.iter().filter(|c| **c != Cmp::Le).count();
        let total = structural + nslack + nart;
        let art_start = structural + nslack;

        let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_slack = structural;
        let mut next_art = art_start;
        for i in 0..m {
            let mut row = std::mem::take(&mut dense[i]);
            row.resize(total + 1, Rational::zero());
            match cmps[i] {
                Cmp::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Cmp::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Cmp::Eq => {
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            row[total] = rhs[i].clone();
            tab.push(row);
        }

        let mut tableau = Tableau { rows: tab, basis, width: total };

        if nart > 0 {
            let mut cost = vec![Rational::zero(); total];
            for c in cost.iter_mut().skip(art_start) {
                *c = Rational::one();
            }
            let allowed = |_: usize| true;
            match tableau.run(&cost, &allowed) {
                Phase::Optimal => {}
                Phase::Unbounded => unreachable!("phase one is bounded below"),
            }
            let infeas = tableau
                .rows
                .iter()
                .zip(&tableau.basis)
                .filter(|(_, b)| **b >= art_start)
                .fold(Rational::zero(), |acc, (r, _)| acc + &r[total]);
            if infeas.is_positive() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis.
            let mut i = 0;
            while i < tableau.rows.len() {
                if tableau.basis[i] >= art_start {
                    let col = (0..art_start).find(|&j| !tableau.rows[i][j].is_zero());
                    match col {
                        Some(j) => tableau.pivot(i, j),
                        None => {
                            tableau.rows.remove(i);
                            tableau.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }

        let mut cost = vec![Rational::zero(); total];
        for j in 0..self.nvars {
            let c = if self.maximize { -&self.objective[j] } else { self.objective[j].clone() };
            if let Some(nc) = neg_col[j] {
                cost[nc] = -&c;
            }
            cost[pos_col[j]] = c;
        }
        let allowed = |j: usize| j < art_start;
        if let Phase::Unbounded = tableau.run(&cost, &allowed) {
            return LpOutcome::Unbounded;
        }

        let mut colval = vec![Rational::zero(); total];
        for (row, &b) in tableau.rows.iter().zip(&tableau.basis) {
            colval[b] = row[total].clone();
        }
        let point: Vec<Rational> = (0..self.nvars)
            .map(|j| {
                let p = colval[pos_col[j]].clone();
                match neg_col[j] {
                    Some(nc) => p - &colval[nc],
                    None => p,
                }
            })
            .collect();
        let value = point.iter().zip(&self.objective).fold(Rational::zero(), |acc, (x, c)| acc + x * c);
        LpOutcome::Optimal { point, value }
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rational::one() / &self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    fn run(&mut self, cost: &[Rational], allowed: &dyn Fn(usize) -> bool) -> Phase {
        let w = self.width;
        loop {
            // reduced costs c_j - c_B^T B^{-1} A_j, entering by smallest index
            let mut entering = None;
            for j in 0..w {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        red -= &cost[b] * &row[j];
                    }
                }
                if red.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return Phase::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[w] / &row[c];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return Phase::Unbounded,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn small_maximization() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6
        let mut lp = LinearProgram::new(2);
        lp.add_row(vec![int(1), int(2)], Cmp::Le, int(4));
        lp.add_row(vec![int(3), int(1)], Cmp::Le, int(6));
        lp.maximize(vec![int(1), int(1)]);
        let out = lp.solve();
        let (x, v) = out.optimal().unwrap();
        assert_eq!(v, &rat(14, 5));
        assert_eq!(x, &[rat(8, 5), rat(6, 5)]);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x s.t. x = y - 3, y >= 1, y free
        let mut lp = LinearProgram::new(2);
        lp.set_free(0);
        lp.set_free(1);
        lp.add_row(vec![int(1), int(-1)], Cmp::Eq, int(-3));
        lp.add_row(vec![int(0), int(1)], Cmp::Ge, int(1));
        lp.minimize(vec![int(1), int(0)]);
        let (x, v) = lp.solve().optimal().map(|(a, b)| (a.to_vec(), b.clone())).unwrap();
        assert_eq!(v, int(-2));
        assert_eq!(x, vec![int(-2), int(1)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![int(1)], Cmp::Ge, int(2));
        lp.add_row(vec![int(1)], Cmp::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(1);
        lp.set_free(0);
        lp.minimize(vec![int(1)]);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(vec![int(1), int(1)], Cmp::Eq, int(1));
        lp.add_row(vec![int(2), int(2)], Cmp::Eq, int(2));
        lp.maximize(vec![int(1), int(0)]);
        assert_eq!(lp.solve().optimal().unwrap().1, &int(1));
    }
}
