//! Exact linear feasibility: find `x ≥ 0` with `Ax = b`.
//!
//! Phase-1 simplex over rationals with Bland's rule. Infeasible systems come
//! with a Farkas vector `y` such that `yᵀA ≥ 0` and `yᵀb < 0`.

use num_traits::{One, Signed, Zero};

use crate::signature::Rational;

/// Equality system `Ax = b` over non-negative variables, stored by rows.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinearSystem {
    num_vars: usize,
    rows: Vec<Vec<(usize, Rational)>>,
    rhs: Vec<Rational>,
}

/// Dual certificate of infeasibility, one multiplier per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible(FarkasCertificate),
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem { num_vars, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(usize, Rational)>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    /// Append `Σ coeff·x_var = rhs`. Repeated variables are summed.
    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, rhs: Rational) {
        let mut row: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
        for (j, c) in coeffs {
            assert!(j < self.num_vars, "variable {j} out of range");
            match row.iter_mut().find(|(k, _)| *k == j) {
                Some((_, v)) => *v += c,
                None => row.push((j, c)),
            }
        }
        row.retain(|(_, c)| !c.is_zero());
        row.sort_by_key(|(j, _)| *j);
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// `x ≥ 0` and `Ax = b` exactly.
    pub fn is_solution(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().zip(&self.rhs).all(|(row, b)| {
                row.iter().fold(Rational::zero(), |s, (j, c)| s + c * &x[*j]) == *b
            })
    }

    pub fn solve(&self) -> Feasibility {
        Tableau::new(self).run(self)
    }
}

impl FarkasCertificate {
    /// `yᵀA ≥ 0` componentwise and `yᵀb < 0`.
    pub fn verify(&self, system: &LinearSystem) -> bool {
        if self.multipliers.len() != system.num_rows() {
            return false;
        }
        let mut combo = vec![Rational::zero(); system.num_vars()];
        let mut yb = Rational::zero();
        for ((row, b), y) in system.rows.iter().zip(&system.rhs).zip(&self.multipliers) {
            if y.is_zero() {
                continue;
            }
            for (j, c) in row {
                combo[*j] += c * y;
            }
            yb += b * y;
        }
        yb.is_negative() && combo.iter().all(|v| !v.is_negative())
    }
}

struct Tableau {
    m: usize,
    n: usize,
    /// `m` rows of `n + m` coefficients followed by the right-hand side.
    t: Vec<Vec<Rational>>,
    /// Reduced costs for all `n + m` columns, then minus the objective.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    sign: Vec<bool>,
}

impl Tableau {
    fn new(sys: &LinearSystem) -> Self {
        let m = sys.rows.len();
        let n = sys.num_vars;
        let width = n + m + 1;
        let mut t = Vec::with_capacity(m);
        let mut sign = Vec::with_capacity(m);
        let mut obj = vec![Rational::zero(); width];
        for (i, (row, b)) in sys.rows.iter().zip(&sys.rhs).enumerate() {
            let neg = b.is_negative();
            let mut r = vec![Rational::zero(); width];
            for (j, c) in row {
                r[*j] = if neg { -c.clone() } else { c.clone() };
            }
            r[n + i] = Rational::one();
            r[width - 1] = if neg { -b.clone() } else { b.clone() };
            for j in 0..n {
                obj[j] -= &r[j];
            }
            obj[width - 1] -= &r[width - 1];
            t.push(r);
            sign.push(neg);
        }
        Tableau { m, n, t, obj, basis: (n..n + m).collect(), sign }
    }

    fn run(mut self, sys: &LinearSystem) -> Feasibility {
        let last = self.n + self.m;
        // Bland: lowest-index improving column, lowest-index leaving basic.
        while let Some(col) = (0..last).find(|&j| self.obj[j].is_negative()) {
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.m {
                let a = &self.t[i][col];
                if !a.is_positive() {
                    continue;
                }
                let r = &self.t[i][last] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => r < *br || (r == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, r));
                }
            }
            let (row, _) = best.expect("phase-1 objective is bounded below");
            self.pivot(row, col);
        }
        let value = -self.obj[last].clone();
        if value.is_zero() {
            let mut x = vec![Rational::zero(); self.n];
            for (i, &b) in self.basis.iter().enumerate() {
                if b < self.n {
                    x[b] = self.t[i][last].clone();
                }
            }
            debug_assert!(sys.is_solution(&x));
            Feasibility::Feasible(x)
        } else {
            // Reduced cost of artificial i is 1 - π_i; the Farkas vector is -π
            // mapped back through the row sign flips.
            let multipliers = (0..self.m)
                .map(|i| {
                    let pi = Rational::one() - &self.obj[self.n + i];
                    if self.sign[i] {
                        pi
                    } else {
                        -pi
                    }
                })
                .collect();
            let cert = FarkasCertificate { multipliers };
            debug_assert!(cert.verify(sys));
            Feasibility::Infeasible(cert)
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col].clone();
        for v in self.t[row].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let pivot_row = self.t[row].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..self.m {
            if i == row || self.t[i][col].is_zero() {
                continue;
            }
            let f = self.t[i][col].clone();
            for &j in &nz {
                let d = &f * &pivot_row[j];
                self.t[i][j] -= d;
            }
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for &j in &nz {
                let d = &f * &pivot_row[j];
                self.obj[j] -= d;
            }
        }
        self.basis[row] = col;
    }
}
