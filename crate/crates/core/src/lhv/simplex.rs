//! Phase-1 revised simplex over deterministic-strategy columns.
//!
//! Minimizes the sum of artificial variables subject to
//! `sum_s w_s D_s + art = p`, `w, art >= 0`. Strategy columns are priced
//! without enumerating them: for a fixed `f_A` the best `f_B` decomposes over
//! measurement settings.

use super::StrategySpace;
use crate::error::{Error, Result};
use crate::scalar::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Var {
    Art(usize),
    Strat(u64),
}

pub(crate) struct LpOutcome<P> {
    pub objective: P,
    pub basis: Vec<Var>,
    pub values: Vec<P>,
    pub duals: Vec<P>,
    pub pivots: usize,
}

const MAX_PIVOTS: usize = 200_000;
const DEGENERATE_STREAK: usize = 50;
const REFACTOR_EVERY: usize = 64;

struct Tableau<'a, P> {
    space: &'a StrategySpace,
    rhs: &'a [P],
    tol: f64,
    basis: Vec<Var>,
    binv: Vec<Vec<P>>,
    values: Vec<P>,
}

impl<P: Field> Tableau<'_, P> {
    fn rows(&self) -> usize {
        self.rhs.len()
    }

    fn column(&self, v: Var) -> Vec<usize> {
        match v {
            Var::Art(i) => vec![i],
            Var::Strat(r) => self.space.rows_of(r),
        }
    }

    fn order(&self, v: Var) -> u64 {
        match v {
            Var::Art(i) => i as u64,
            Var::Strat(r) => self.rows() as u64 + r,
        }
    }

    fn duals(&self) -> Vec<P> {
        let m = self.rows();
        let mut y = vec![P::zero(); m];
        for (i, v) in self.basis.iter().enumerate() {
            if matches!(v, Var::Art(_)) {
                for (yj, bij) in y.iter_mut().zip(&self.binv[i]) {
                    *yj = yj.clone() + bij.clone();
                }
            }
        }
        y
    }

    fn objective(&self) -> P {
        self.basis
            .iter()
            .zip(&self.values)
            .filter(|(v, _)| matches!(v, Var::Art(_)))
            .fold(P::zero(), |s, (_, x)| s + x.clone())
    }

    /// Improving column: most negative reduced cost, or the first in index order under Bland.
    fn entering(&self, y: &[P], bland: bool) -> Option<Var> {
        let m = self.rows();
        let in_basis: std::collections::HashSet<Var> = self.basis.iter().copied().collect();
        let mut best: Option<(P, Var)> = None;
        for (i, yi) in y.iter().enumerate().take(m) {
            let v = Var::Art(i);
            if in_basis.contains(&v) {
                continue;
            }
            let rc = P::one() - yi.clone();
            if (-rc.clone()).above(self.tol) {
                if bland {
                    return Some(v);
                }
                if best.as_ref().is_none_or(|(b, _)| rc < *b) {
                    best = Some((rc, v));
                }
            }
        }
        let strat = if bland {
            self.space.first_above(y, self.tol)
        } else {
            let (val, r) = self.space.maximize(y);
            val.above(self.tol).then_some((val, r))
        };
        if let Some((val, r)) = strat {
            let v = Var::Strat(r);
            if bland {
                return Some(v);
            }
            let rc = -val;
            if best.as_ref().is_none_or(|(b, _)| rc < *b) {
                best = Some((rc, v));
            }
        }
        best.map(|(_, v)| v)
    }

    fn direction(&self, v: Var) -> Vec<P> {
        let rows = self.column(v);
        self.binv
            .iter()
            .map(|row| rows.iter().fold(P::zero(), |s, &j| s + row[j].clone()))
            .collect()
    }

    /// Pivot `v` into the basis; returns whether the step was degenerate.
    fn pivot(&mut self, v: Var) -> Result<bool> {
        let d = self.direction(v);
        let mut leave: Option<(usize, P)> = None;
        for (i, di) in d.iter().enumerate() {
            if !di.above(self.tol) {
                continue;
            }
            let ratio = self.values[i].clone() / di.clone();
            let better = match &leave {
                None => true,
                Some((k, best)) => {
                    let diff = ratio.clone() - best.clone();
                    if diff.within(self.tol * 1e-2) {
                        self.order(self.basis[i]) < self.order(self.basis[*k])
                    } else {
                        diff < P::zero()
                    }
                }
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // Phase-1 objective is bounded below, so a leaving row always exists.
        let (r, step) = leave.ok_or_else(|| Error::CertificateRejected("unbounded phase-1 direction".into()))?;
        let pr = d[r].clone();
        for j in 0..self.rows() {
            self.binv[r][j] = self.binv[r][j].clone() / pr.clone();
        }
        self.values[r] = self.values[r].clone() / pr;
        let pivot_row = self.binv[r].clone();
        let pivot_val = self.values[r].clone();
        for (i, di) in d.iter().enumerate() {
            if i == r || di.is_zero() {
                continue;
            }
            for (bij, prj) in self.binv[i].iter_mut().zip(&pivot_row) {
                *bij = bij.clone() - di.clone() * prj.clone();
            }
            self.values[i] = self.values[i].clone() - di.clone() * pivot_val.clone();
        }
        self.basis[r] = v;
        Ok(step.within(self.tol))
    }

    /// Recompute `B^{-1}` and basic values from scratch (floating point only).
    fn refactor(&mut self) -> Result<()> {
        let m = self.rows();
        let mut a: Vec<Vec<P>> = vec![vec![P::zero(); 2 * m]; m];
        for (k, v) in self.basis.iter().enumerate() {
            for i in self.column(*v) {
                a[i][k] = P::one();
            }
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[m + i] = P::one();
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&i, &j| a[i][c].abs_val().partial_cmp(&a[j][c].abs_val()).expect("finite"))
                .expect("non-empty");
            if a[p][c].is_zero() {
                return Err(Error::CertificateRejected("singular simplex basis".into()));
            }
            a.swap(c, p);
            let piv = a[c][c].clone();
            for v in a[c].iter_mut() {
                *v = v.clone() / piv.clone();
            }
            let prow = a[c].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == c || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        }
        self.binv = a.into_iter().map(|row| row[m..].to_vec()).collect();
        self.values = self
            .binv
            .iter()
            .map(|row| {
                row.iter()
                    .zip(self.rhs)
                    .fold(P::zero(), |s, (b, p)| s + b.clone() * p.clone())
            })
            .collect();
        Ok(())
    }
}

/// Solve the phase-1 problem; `tol` is the pricing and pivot tolerance (0 for exact fields).
pub(crate) fn solve<P: Field>(space: &StrategySpace, rhs: &[P], tol: f64) -> Result<LpOutcome<P>> {
    let m = rhs.len();
    let mut t = Tableau {
        space,
        rhs,
        tol,
        basis: (0..m).map(Var::Art).collect(),
        binv: (0..m)
            .map(|i| (0..m).map(|j| if i == j { P::one() } else { P::zero() }).collect())
            .collect(),
        values: rhs.to_vec(),
    };
    let mut pivots = 0;
    let mut streak = 0;
    loop {
        if t.objective().within(tol) && !P::EXACT || (P::EXACT && t.objective().is_zero()) {
            break;
        }
        let y = t.duals();
        let Some(v) = t.entering(&y, streak >= DEGENERATE_STREAK) else {
            break;
        };
        let degenerate = t.pivot(v)?;
        streak = if degenerate { streak + 1 } else { 0 };
        pivots += 1;
        if !P::EXACT && pivots % REFACTOR_EVERY == 0 {
            t.refactor()?;
        }
        if pivots >= MAX_PIVOTS {
            return Err(Error::CertificateRejected(format!(
                "simplex did not converge in {MAX_PIVOTS} pivots"
            )));
        }
    }
    if !P::EXACT {
        t.refactor()?;
    }
    let duals = t.duals();
    Ok(LpOutcome {
        objective: t.objective(),
        basis: t.basis,
        values: t.values,
        duals,
        pivots,
    })
}
