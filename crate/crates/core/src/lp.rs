//! Dense two-phase simplex for small linear programs in equality form
//! `min cᵀx  s.t.  Ax = b, x ≥ 0`. Bland's rule is used throughout, so the
//! method cannot cycle.

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
    /// Pivot cap reached; should not happen under Bland's rule.
    Stalled,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(&prow) {
                    *a -= f * b;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (a, b) in self.obj.iter_mut().zip(&prow) {
                *a -= f * b;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over columns `< allowed`. Returns false if unbounded.
    fn optimise(&mut self, allowed: usize) -> Option<bool> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&j| self.obj[j] < -PIVOT_EPS);
            let c = match entering {
                Some(c) => c,
                None => return Some(true),
            };
            let rhs = self.width;
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > PIVOT_EPS {
                    let ratio = row[rhs] / row[c];
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => ratio < br - 1e-14 || (ratio <= br + 1e-14 && self.basis[i] < bb),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return Some(false),
            }
        }
        None
    }
}

/// Solves `min cᵀx` subject to `Ax = b`, `x ≥ 0`.
pub fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, ai) in a.iter().enumerate() {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width + 1];
        for j in 0..n {
            row[j] = sign * ai[j];
        }
        row[n + i] = 1.0;
        row[width] = sign * b[i];
        rows.push(row);
    }
    // Phase one: minimise the sum of artificials.
    let mut obj = vec![0.0; width + 1];
    for row in &rows {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[width] -= row[width];
    }
    let mut t = Tableau { rows, obj, basis: (n..n + m).collect(), width };
    match t.optimise(width) {
        Some(true) => {}
        Some(false) => return LpOutcome::Stalled,
        None => return LpOutcome::Stalled,
    }
    if -t.obj[width] > FEAS_EPS {
        return LpOutcome::Infeasible;
    }
    // Drive artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| t.rows[r][j].abs() > PIVOT_EPS) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    // Phase two.
    let mut obj = vec![0.0; width + 1];
    obj[..n].copy_from_slice(c);
    for (i, &bv) in t.basis.iter().enumerate() {
        let f = obj[bv];
        if f != 0.0 {
            for (o, v) in obj.iter_mut().zip(&t.rows[i]) {
                *o -= f * v;
            }
        }
    }
    t.obj = obj;
    match t.optimise(n) {
        Some(true) => {}
        Some(false) => return LpOutcome::Unbounded,
        None => return LpOutcome::Stalled,
    }
    let mut x = vec![0.0; n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[i][width].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, objective }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let c = [-1.0, -1.0, 0.0, 0.0];
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        match minimize(&c, &a, &[4.0, 6.0]) {
            LpOutcome::Optimal { x, objective } => {
                assert!((objective + 2.8).abs() < 1e-12);
                assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![vec![1.0, 1.0]];
        assert_eq!(minimize(&[0.0, 0.0], &a, &[-1.0]), LpOutcome::Infeasible);
        let a = vec![vec![1.0, -1.0]];
        assert_eq!(minimize(&[0.0, -1.0], &a, &[1.0]), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        match minimize(&[1.0, 2.0], &a, &[1.0, 2.0]) {
            LpOutcome::Optimal { objective, .. } => assert!((objective - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
