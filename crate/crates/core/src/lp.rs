//! Dense two-phase simplex with Bland's rule.
//!
//! Problems here have a handful of variables and a few dozen rows, so a
//! plain tableau is enough. Variables are free; the solver splits them
//! into positive and negative parts internally.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// Feasibility / optimality tolerance.
pub const LP_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 50_000;

/// `minimize objectiveᵀx  s.t.  a_ub·x ≤ b_ub,  a_eq·x = b_eq`, `x` free.
#[derive(Debug, Clone)]
pub struct LinearProgram<T: Scalar> {
    pub objective: DVector<T>,
    pub a_ub: DMatrix<T>,
    pub b_ub: DVector<T>,
    pub a_eq: DMatrix<T>,
    pub b_eq: DVector<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T: Scalar> {
    Optimal { x: DVector<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T: Scalar> LpOutcome<T> {
    pub fn optimal(self) -> Option<(DVector<T>, T)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(objective: DVector<T>, a_ub: DMatrix<T>, b_ub: DVector<T>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            a_ub,
            b_ub,
            a_eq: DMatrix::zeros(0, n),
            b_eq: DVector::zeros(0),
        }
    }

    pub fn with_equalities(mut self, a_eq: DMatrix<T>, b_eq: DVector<T>) -> Self {
        self.a_eq = a_eq;
        self.b_eq = b_eq;
        self
    }

    pub fn solve(&self) -> LpOutcome<T> {
        Tableau::build(self).run()
    }
}

fn tol<T: Scalar>() -> T {
    T::of(LP_TOL).max(T::default_epsilon() * T::of(100.0))
}

struct Tableau<T: Scalar> {
    rows: usize,
    cols: usize, // structural + slack + artificial columns (rhs stored separately)
    data: Vec<T>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    n_free: usize,
    first_artificial: usize,
    objective: Vec<T>,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let n = lp.objective.len();
        let m_ub = lp.a_ub.nrows();
        let m_eq = lp.a_eq.nrows();
        let rows = m_ub + m_eq;
        // Columns: x⁺ (n), x⁻ (n), slacks (m_ub), artificials (one per row needing it).
        let mut needs_art: Vec<bool> = (0..m_ub).map(|i| lp.b_ub[i] < T::zero()).collect();
        needs_art.resize(rows, true);
        let n_art = needs_art.iter().filter(|&&b| b).count();
        let first_artificial = 2 * n + m_ub;
        let cols = first_artificial + n_art;
        let mut data = vec![T::zero(); rows * cols];
        let mut rhs = vec![T::zero(); rows];
        let mut basis = vec![0; rows];
        let mut art = first_artificial;
        for i in 0..rows {
            let (coeffs, b, slack) = if i < m_ub {
                (lp.a_ub.row(i).clone_owned(), lp.b_ub[i], Some(2 * n + i))
            } else {
                (lp.a_eq.row(i - m_ub).clone_owned(), lp.b_eq[i - m_ub], None)
            };
            let sign = if b < T::zero() { -T::one() } else { T::one() };
            for j in 0..n {
                data[i * cols + j] = coeffs[j] * sign;
                data[i * cols + n + j] = -coeffs[j] * sign;
            }
            if let Some(s) = slack {
                data[i * cols + s] = sign;
            }
            rhs[i] = b * sign;
            if needs_art[i] {
                data[i * cols + art] = T::one();
                basis[i] = art;
                art += 1;
            } else {
                basis[i] = slack.unwrap();
            }
        }
        let mut objective = vec![T::zero(); cols];
        for j in 0..n {
            objective[j] = lp.objective[j];
            objective[n + j] = -lp.objective[j];
        }
        Tableau {
            rows,
            cols,
            data,
            rhs,
            basis,
            n_free: n,
            first_artificial,
            objective,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.cols;
        let p = self.at(r, c);
        for j in 0..cols {
            self.data[r * cols + j] /= p;
        }
        self.rhs[r] /= p;
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == T::zero() {
                continue;
            }
            for j in 0..cols {
                let v = self.data[r * cols + j];
                self.data[i * cols + j] -= f * v;
            }
            let rv = self.rhs[r];
            self.rhs[i] -= f * rv;
        }
        self.basis[r] = c;
    }

    /// Runs simplex on cost vector `cost` restricted to columns `< allowed`.
    /// Returns false on unboundedness.
    fn optimize(&mut self, cost: &[T], allowed: usize) -> bool {
        let eps = tol::<T>();
        for _ in 0..MAX_PIVOTS {
            // Reduced costs: c_j - c_Bᵀ B⁻¹ A_j (tableau already holds B⁻¹A).
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for i in 0..self.rows {
                    rc -= cost[self.basis[i]] * self.at(i, j);
                }
                if rc < -eps {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, T)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > eps {
                    let ratio = self.rhs[i] / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - eps || ((ratio - lr).abs() <= eps && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
        true
    }

    fn run(mut self) -> LpOutcome<T> {
        let eps = tol::<T>();
        if self.first_artificial < self.cols {
            let mut phase1 = vec![T::zero(); self.cols];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = T::one();
            }
            self.optimize(&phase1, self.cols);
            let infeas: T = (0..self.rows)
                .filter(|&i| self.basis[i] >= self.first_artificial)
                .fold(T::zero(), |acc, i| acc + self.rhs[i]);
            let scale = T::one().max(self.rhs.iter().fold(T::zero(), |a, &b| a.max(b.abs())));
            if infeas > eps * scale {
                return LpOutcome::Infeasible;
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut i = 0;
            while i < self.rows {
                if self.basis[i] >= self.first_artificial {
                    let col = (0..self.first_artificial).find(|&j| self.at(i, j).abs() > eps);
                    match col {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.remove_row(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let cost = self.objective.clone();
        if !self.optimize(&cost, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let n = self.n_free;
        let mut x = DVector::<T>::zeros(n);
        for i in 0..self.rows {
            let b = self.basis[i];
            if b < n {
                x[b] += self.rhs[i];
            } else if b < 2 * n {
                x[b - n] -= self.rhs[i];
            }
        }
        let value = (0..n).fold(T::zero(), |acc, j| acc + self.objective[j] * x[j]);
        LpOutcome::Optimal { x, value }
    }

    fn remove_row(&mut self, r: usize) {
        let cols = self.cols;
        self.data.drain(r * cols..(r + 1) * cols);
        self.rhs.remove(r);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

/// Smallest uniform violation `t ≥ 0` with `a·x ≤ b + t` for unit-normalized rows.
pub fn min_violation<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>) -> T {
    let (m, n) = a.shape();
    if m == 0 {
        return T::zero();
    }
    // Variables (x, t); rows a_i·x - ‖a_i‖ t ≤ b_i, and -t ≤ 0.
    let mut a_ub = DMatrix::<T>::zeros(m + 1, n + 1);
    let mut b_ub = DVector::<T>::zeros(m + 1);
    for i in 0..m {
        let norm = a.row(i).norm();
        let norm = if norm > T::zero() { norm } else { T::one() };
        for j in 0..n {
            a_ub[(i, j)] = a[(i, j)] / norm;
        }
        a_ub[(i, n)] = -T::one();
        b_ub[i] = b[i] / norm;
    }
    a_ub[(m, n)] = -T::one();
    let mut obj = DVector::<T>::zeros(n + 1);
    obj[n] = T::one();
    match LinearProgram::new(obj, a_ub, b_ub).solve() {
        LpOutcome::Optimal { value, .. } => value.max(T::zero()),
        _ => T::max_value().unwrap(),
    }
}

/// `{x : a·x ≤ b}` is non-empty up to [`LP_TOL`] violation.
pub fn is_feasible<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>) -> bool {
    min_violation(a, b) <= T::of(LP_TOL)
}
