//! Entropies and mutual informations in bits, plus state-averaged measures.

use crate::channel::{ChannelFamily, StochasticMatrix, SUM_TOL};
use crate::error::{domain, Result};

/// Probabilities below this contribute nothing to entropy sums.
pub const PROB_FLOOR: f64 = 1e-15;

fn check_dist(p: &[f64], n: usize, what: &str) -> Result<()> {
    if p.len() != n {
        return domain(format!("{what} has {} entries, expected {n}", p.len()));
    }
    if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (p.iter().sum::<f64>() - 1.0).abs() > SUM_TOL {
        return domain(format!("{what} is not a probability vector"));
    }
    Ok(())
}

pub fn entropy(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &v in p {
        if v >= PROB_FLOOR {
            h -= v * v.log2();
        }
    }
    h.max(0.0)
}

/// Output law P_Y = P_X · W.
pub fn output_distribution(px: &[f64], w: &StochasticMatrix) -> Result<Vec<f64>> {
    check_dist(px, w.rows(), "input distribution")?;
    Ok(output_unchecked(px, w.as_slice(), w.cols()))
}

pub(crate) fn output_unchecked(px: &[f64], w: &[f64], ny: usize) -> Vec<f64> {
    let mut py = vec![0.0; ny];
    for (x, &p) in px.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (y, v) in py.iter_mut().enumerate() {
            *v += p * w[x * ny + y];
        }
    }
    py
}

/// H(Y|X) for input `px` through `w`.
pub fn conditional_entropy(px: &[f64], w: &StochasticMatrix) -> Result<f64> {
    check_dist(px, w.rows(), "input distribution")?;
    Ok((0..w.rows()).map(|x| px[x] * entropy(w.row(x))).sum())
}

/// H(B|A) from a joint table `joint[a][b]`.
pub fn conditional_entropy_joint(joint: &[Vec<f64>]) -> Result<f64> {
    let total: f64 = joint.iter().flatten().sum();
    if joint.iter().flatten().any(|&v| !(0.0..=1.0).contains(&v)) || (total - 1.0).abs() > SUM_TOL {
        return domain("joint table is not a probability distribution");
    }
    let mut h = 0.0;
    for row in joint {
        let pa: f64 = row.iter().sum();
        if pa < PROB_FLOOR {
            continue;
        }
        for &v in row {
            if v >= PROB_FLOOR {
                h -= v * (v / pa).log2();
            }
        }
    }
    Ok(h.max(0.0))
}

/// I(X;Y) in bits.
pub fn mutual_information(px: &[f64], w: &StochasticMatrix) -> Result<f64> {
    check_dist(px, w.rows(), "input distribution")?;
    Ok(mi_unchecked(px, w.as_slice(), w.cols()))
}

/// I(X;Y) for a row-major channel `w` with `ny` columns. Written as
/// Σ p(x)W(y|x) log(W(y|x)/P_Y(y)) so that independent inputs give exactly 0.
pub(crate) fn mi_unchecked(px: &[f64], w: &[f64], ny: usize) -> f64 {
    let py = output_unchecked(px, w, ny);
    let mut acc = 0.0;
    for (x, &p) in px.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let row = &w[x * ny..(x + 1) * ny];
        for y in 0..ny {
            let j = p * row[y];
            if j >= PROB_FLOOR {
                acc += j * (row[y] / py[y]).log2();
            }
        }
    }
    acc.max(0.0)
}

/// H̄_P(Y_S), H̄_P(Y_S|X) and Ī_P(X;Y_S): per-state measures averaged under P.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AveragedMeasures {
    pub output_entropy: f64,
    pub conditional_entropy: f64,
    pub mutual_information: f64,
}

pub fn avg_state_measures(p: &[f64], family: &ChannelFamily, px: &[f64]) -> Result<AveragedMeasures> {
    check_dist(p, family.num_states(), "state weights")?;
    check_dist(px, family.num_inputs(), "input distribution")?;
    let mut m = AveragedMeasures { output_entropy: 0.0, conditional_entropy: 0.0, mutual_information: 0.0 };
    for (s, &w) in p.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let ws = family.matrix(s);
        let hy = entropy(&output_unchecked(px, ws.as_slice(), ws.cols()));
        let hyx: f64 = (0..ws.rows()).map(|x| px[x] * entropy(ws.row(x))).sum();
        m.output_entropy += w * hy;
        m.conditional_entropy += w * hyx;
        m.mutual_information += w * mi_unchecked(px, ws.as_slice(), ws.cols());
    }
    Ok(m)
}

/// Joint law of an auxiliary U and the input X, stored as P_U and rows P_{X|U=u}.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixInput {
    weights: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl PrefixInput {
    pub fn new(weights: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_dist(&weights, weights.len(), "prefix weights")?;
        if rows.len() != weights.len() || rows.is_empty() {
            return domain("prefix needs one conditional row per auxiliary symbol");
        }
        let nx = rows[0].len();
        for r in &rows {
            check_dist(r, nx, "conditional row")?;
        }
        Ok(Self { weights, rows })
    }

    pub(crate) fn from_parts_unchecked(weights: Vec<f64>, rows: Vec<Vec<f64>>) -> Self {
        Self { weights, rows }
    }

    /// U = X.
    pub fn identity(px: &[f64]) -> Self {
        let n = px.len();
        let rows = (0..n).map(|u| (0..n).map(|x| if x == u { 1.0 } else { 0.0 }).collect()).collect();
        Self { weights: px.to_vec(), rows }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn aux_size(&self) -> usize {
        self.weights.len()
    }

    pub fn input_size(&self) -> usize {
        self.rows[0].len()
    }

    /// P_X = Σ_u P_U(u) P_{X|U=u}.
    pub fn marginal(&self) -> Vec<f64> {
        let mut px = vec![0.0; self.input_size()];
        for (w, r) in self.weights.iter().zip(&self.rows) {
            for (a, b) in px.iter_mut().zip(r) {
                *a += w * b;
            }
        }
        px
    }

    /// Row-major U→Y channel P_{Y|U} = P_{X|U} · W.
    pub(crate) fn compose(&self, w: &StochasticMatrix) -> Vec<f64> {
        let (nx, ny) = (w.rows(), w.cols());
        let mut t = vec![0.0; self.aux_size() * ny];
        for (u, r) in self.rows.iter().enumerate() {
            for x in 0..nx {
                let a = r[x];
                if a == 0.0 {
                    continue;
                }
                for y in 0..ny {
                    t[u * ny + y] += a * w.get(x, y);
                }
            }
        }
        t
    }

    /// Flattened (weights, rows) for lexicographic tie-breaking.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        for r in &self.rows {
            v.extend_from_slice(r);
        }
        v
    }
}

/// I(U;Y) under U → X → Y.
pub fn prefix_mutual_information(pux: &PrefixInput, w: &StochasticMatrix) -> Result<f64> {
    if pux.input_size() != w.rows() {
        return domain("prefix input alphabet does not match the channel");
    }
    Ok(mi_unchecked(pux.weights(), &pux.compose(w), w.cols()))
}

/// Binary entropy function.
pub fn h2(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bsc;

    #[test]
    fn noiseless_binary() {
        let i = mutual_information(&[0.5, 0.5], &StochasticMatrix::identity(2)).unwrap();
        assert_eq!(i, 1.0);
    }

    #[test]
    fn bsc_closed_form() {
        for q in [0.0, 0.05, 0.11, 0.3, 0.5] {
            let i = mutual_information(&[0.5, 0.5], &bsc(q)).unwrap();
            assert!((i - (1.0 - h2(q))).abs() < 1e-12);
        }
        assert_eq!(mutual_information(&[0.5, 0.5], &bsc(0.5)).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(mutual_information(&[1.0], &bsc(0.1)).is_err());
        assert!(mutual_information(&[0.7, 0.7], &bsc(0.1)).is_err());
    }

    #[test]
    fn prefix_edge_cases() {
        let w = bsc(0.1);
        let px = [0.3, 0.7];
        let copy = PrefixInput::identity(&px);
        let a = prefix_mutual_information(&copy, &w).unwrap();
        assert!((a - mutual_information(&px, &w).unwrap()).abs() < 1e-15);
        let useless = PrefixInput::new(vec![0.4, 0.6], vec![px.to_vec(), px.to_vec()]).unwrap();
        assert_eq!(prefix_mutual_information(&useless, &w).unwrap(), 0.0);
    }

    #[test]
    fn joint_conditional_entropy() {
        let h = conditional_entropy_joint(&[vec![0.25, 0.25], vec![0.5, 0.0]]).unwrap();
        assert!((h - 0.5).abs() < 1e-15);
    }
}
