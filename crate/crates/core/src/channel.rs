//! Channel families, wiretap pairs, distributions and state sequences.
//!
//! Symbols are plain indices `0..n`; labels only matter for file I/O.

use crate::error::{domain, Result};

/// Tolerance for row sums and distribution totals at construction.
pub const SUM_TOL: f64 = 1e-12;

fn check_probs(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return domain(format!("{what}: empty probability vector"));
    }
    for &p in v {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return domain(format!("{what}: entry {p} outside [0,1]"));
        }
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return domain(format!("{what}: sums to {total}, not 1"));
    }
    Ok(())
}

/// A probability vector over `0..len`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs, "distribution")?;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over an empty alphabet");
        Self { probs: vec![1.0 / n as f64; n] }
    }

    pub fn point(n: usize, at: usize) -> Self {
        assert!(at < n);
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Smallest strictly positive probability.
    pub fn min_positive(&self) -> f64 {
        self.probs.iter().copied().filter(|&p| p > 0.0).fold(1.0, f64::min)
    }
}

/// Row-stochastic matrix, row-major. Rows are inputs, columns outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return domain("matrix has no rows");
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return domain(format!("matrix row {i} has {} entries, expected {cols}", r.len()));
            }
            check_probs(r, &format!("matrix row {i}"))?;
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 || cols == 0 {
            return domain("flat matrix data does not match its dimensions");
        }
        for i in 0..rows {
            check_probs(&data[i * cols..(i + 1) * cols], &format!("matrix row {i}"))?;
        }
        Ok(Self { rows, cols, data })
    }

    /// Used internally for matrices that are stochastic by construction.
    pub(crate) fn from_flat_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.cols + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.cols..(x + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|x| self.row(x).to_vec()).collect()
    }

    /// `self · other`, i.e. the cascade of `self` followed by `other`.
    pub fn compose(&self, other: &StochasticMatrix) -> Result<StochasticMatrix> {
        if self.cols != other.rows {
            return domain("cascade dimensions do not match");
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for x in 0..self.rows {
            for y in 0..self.cols {
                let a = self.get(x, y);
                if a == 0.0 {
                    continue;
                }
                for z in 0..other.cols {
                    data[x * other.cols + z] += a * other.get(y, z);
                }
            }
        }
        Ok(Self::from_flat_unchecked(self.rows, other.cols, data))
    }

    pub fn max_abs_diff(&self, other: &StochasticMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Binary symmetric channel with crossover `p`.
pub fn bsc(p: f64) -> StochasticMatrix {
    StochasticMatrix::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).expect("crossover must lie in [0,1]")
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_labels(labels: &[String], what: &str) -> Result<()> {
    if labels.is_empty() {
        return domain(format!("{what}: empty alphabet"));
    }
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() || l.chars().any(|c| c.is_whitespace() || ",[]:#".contains(c)) {
            return domain(format!("{what}: label {l:?} is empty or contains a reserved character"));
        }
        if labels[..i].contains(l) {
            return domain(format!("{what}: duplicate label {l:?}"));
        }
    }
    Ok(())
}

/// One transition matrix per state, all of the same shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelFamily {
    states: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    matrices: Vec<StochasticMatrix>,
}

impl ChannelFamily {
    pub fn new(
        states: Vec<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
        matrices: Vec<StochasticMatrix>,
    ) -> Result<Self> {
        check_labels(&states, "states")?;
        check_labels(&inputs, "inputs")?;
        check_labels(&outputs, "outputs")?;
        if matrices.len() != states.len() {
            return domain(format!("{} matrices for {} states", matrices.len(), states.len()));
        }
        for (s, m) in matrices.iter().enumerate() {
            if m.rows() != inputs.len() || m.cols() != outputs.len() {
                return domain(format!(
                    "matrix for state {} is {}x{}, expected {}x{}",
                    states[s],
                    m.rows(),
                    m.cols(),
                    inputs.len(),
                    outputs.len()
                ));
            }
        }
        Ok(Self { states, inputs, outputs, matrices })
    }

    /// Family with numeric labels taken from the matrix shapes.
    pub fn from_matrices(matrices: Vec<StochasticMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return domain("a family needs at least one state");
        }
        let (r, c) = (matrices[0].rows(), matrices[0].cols());
        Self::new(default_labels(matrices.len()), default_labels(r), default_labels(c), matrices)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn matrix(&self, s: usize) -> &StochasticMatrix {
        &self.matrices[s]
    }

    pub fn matrices(&self) -> &[StochasticMatrix] {
        &self.matrices
    }

    pub fn state_labels(&self) -> &[String] {
        &self.states
    }

    pub fn input_labels(&self) -> &[String] {
        &self.inputs
    }

    pub fn output_labels(&self) -> &[String] {
        &self.outputs
    }

    pub fn with_output_labels(mut self, outputs: Vec<String>) -> Result<Self> {
        check_labels(&outputs, "outputs")?;
        if outputs.len() != self.outputs.len() {
            return domain("output label count changed");
        }
        self.outputs = outputs;
        Ok(self)
    }

    pub fn with_state_labels(mut self, states: Vec<String>) -> Result<Self> {
        check_labels(&states, "states")?;
        if states.len() != self.states.len() {
            return domain("state label count changed");
        }
        self.states = states;
        Ok(self)
    }

    pub fn with_input_labels(mut self, inputs: Vec<String>) -> Result<Self> {
        check_labels(&inputs, "inputs")?;
        if inputs.len() != self.inputs.len() {
            return domain("input label count changed");
        }
        self.inputs = inputs;
        Ok(self)
    }

    /// W(y|x,s).
    pub fn prob(&self, s: usize, x: usize, y: usize) -> f64 {
        self.matrices[s].get(x, y)
    }
}

/// Main channel W and wiretap channel V over a shared state set and input alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct WiretapPair {
    main: ChannelFamily,
    wiretap: ChannelFamily,
}

impl WiretapPair {
    pub fn new(main: ChannelFamily, wiretap: ChannelFamily) -> Result<Self> {
        if main.state_labels() != wiretap.state_labels() {
            return domain("main and wiretap families have different state sets");
        }
        if main.input_labels() != wiretap.input_labels() {
            return domain("main and wiretap families have different input alphabets");
        }
        Ok(Self { main, wiretap })
    }

    pub fn main(&self) -> &ChannelFamily {
        &self.main
    }

    pub fn wiretap(&self) -> &ChannelFamily {
        &self.wiretap
    }

    pub fn num_states(&self) -> usize {
        self.main.num_states()
    }

    pub fn num_inputs(&self) -> usize {
        self.main.num_inputs()
    }
}

/// A length-N word over the state alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateSequence {
    symbols: Vec<usize>,
    num_states: usize,
}

impl StateSequence {
    pub fn new(symbols: Vec<usize>, num_states: usize) -> Result<Self> {
        if symbols.is_empty() {
            return domain("state sequence must have positive length");
        }
        if num_states == 0 || symbols.iter().any(|&s| s >= num_states) {
            return domain("state symbol outside the state alphabet");
        }
        Ok(Self { symbols, num_states })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.num_states];
        for &s in &self.symbols {
            c[s] += 1;
        }
        c
    }

    /// Positions (0-based) where the state equals `a`.
    pub fn index_set(&self, a: usize) -> Vec<usize> {
        self.symbols.iter().enumerate().filter(|(_, &s)| s == a).map(|(i, _)| i).collect()
    }

    /// Index sets for every state; together they partition `0..N`.
    pub fn index_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.num_states];
        for (i, &s) in self.symbols.iter().enumerate() {
            sets[s].push(i);
        }
        sets
    }
}

/// Per-state costs and a budget.
#[derive(Clone, Debug, PartialEq)]
pub struct CostModel {
    costs: Vec<f64>,
    budget: f64,
}

impl CostModel {
    pub fn new(costs: Vec<f64>, budget: f64) -> Result<Self> {
        if costs.is_empty() || costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return domain("state costs must be finite and nonnegative");
        }
        if !budget.is_finite() || budget < 0.0 {
            return domain("cost budget must be finite and nonnegative");
        }
        Ok(Self { costs, budget })
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// c(q) = Σ_s q(s) c(s).
    pub fn expected_cost(&self, q: &[f64]) -> f64 {
        q.iter().zip(&self.costs).map(|(a, b)| a * b).sum()
    }
}

/// W_q(y|x) = Σ_s q(s) W_s(y|x).
pub fn mix(family: &ChannelFamily, q: &[f64]) -> Result<StochasticMatrix> {
    if q.len() != family.num_states() {
        return domain(format!("mixture weights over {} states, family has {}", q.len(), family.num_states()));
    }
    check_probs(q, "mixture weights")?;
    Ok(mix_unchecked(family.matrices(), q))
}

pub(crate) fn mix_unchecked(matrices: &[StochasticMatrix], q: &[f64]) -> StochasticMatrix {
    let (r, c) = (matrices[0].rows(), matrices[0].cols());
    let mut data = vec![0.0; r * c];
    for (m, &w) in matrices.iter().zip(q) {
        if w == 0.0 {
            continue;
        }
        for (d, &v) in data.iter_mut().zip(m.as_slice()) {
            *d += w * v;
        }
    }
    StochasticMatrix::from_flat_unchecked(r, c, data)
}

fn check_word(word: &[usize], n: usize, size: usize, what: &str) -> Result<()> {
    if word.len() != n {
        return domain(format!("{what} has length {}, expected {n}", word.len()));
    }
    if word.iter().any(|&a| a >= size) {
        return domain(format!("{what} contains a symbol outside its alphabet"));
    }
    Ok(())
}

/// log₂ ∏ᵢ W_{sᵢ}(yᵢ|xᵢ); `-inf` when some factor is zero.
pub fn sequence_transition_log_prob(
    family: &ChannelFamily,
    x: &[usize],
    s: &StateSequence,
    y: &[usize],
) -> Result<f64> {
    let n = s.len();
    if s.num_states() != family.num_states() {
        return domain("state sequence alphabet does not match the family");
    }
    check_word(x, n, family.num_inputs(), "input word")?;
    check_word(y, n, family.num_outputs(), "output word")?;
    let mut acc = 0.0;
    for i in 0..n {
        let p = family.prob(s.symbols()[i], x[i], y[i]);
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += p.log2();
    }
    Ok(acc)
}

/// ∏ᵢ W_{sᵢ}(yᵢ|xᵢ).
pub fn sequence_transition_prob(
    family: &ChannelFamily,
    x: &[usize],
    s: &StateSequence,
    y: &[usize],
) -> Result<f64> {
    Ok(sequence_transition_log_prob(family, x, s, y)?.exp2())
}

/// Direct product used internally where inputs are already validated.
pub(crate) fn word_prob(family: &ChannelFamily, x: &[usize], s: &[usize], y: &[usize]) -> f64 {
    let mut p = 1.0;
    for i in 0..x.len() {
        p *= family.prob(s[i], x[i], y[i]);
        if p == 0.0 {
            break;
        }
    }
    p
}

/// Aligns a main family over S and a wiretap family over T into one pair over S×T,
/// with W̃_{(s,t)} = W_s and Ṽ_{(s,t)} = V_t. Pair states are ordered s-major.
pub fn product_alignment(main: &ChannelFamily, wiretap: &ChannelFamily) -> Result<WiretapPair> {
    if main.input_labels() != wiretap.input_labels() {
        return domain("main and wiretap families have different input alphabets");
    }
    let mut labels = Vec::new();
    let mut wm = Vec::new();
    let mut vm = Vec::new();
    for (s, sl) in main.state_labels().iter().enumerate() {
        for (t, tl) in wiretap.state_labels().iter().enumerate() {
            labels.push(format!("{sl}.{tl}"));
            wm.push(main.matrix(s).clone());
            vm.push(wiretap.matrix(t).clone());
        }
    }
    let w = ChannelFamily::new(labels.clone(), main.input_labels().to_vec(), main.output_labels().to_vec(), wm)?;
    let v = ChannelFamily::new(labels, wiretap.input_labels().to_vec(), wiretap.output_labels().to_vec(), vm)?;
    WiretapPair::new(w, v)
}

/// Empirical type P_{s^N}(a) = |I(a:s^N)| / N.
pub fn sequence_type(s: &StateSequence) -> Distribution {
    let n = s.len() as f64;
    let probs = s.counts().into_iter().map(|c| c as f64 / n).collect();
    Distribution { probs }
}

/// (1/N) Σᵢ c(sᵢ).
pub fn cost(s: &StateSequence, c: &CostModel) -> Result<f64> {
    if c.costs().len() != s.num_states() {
        return domain("cost model and state sequence use different state sets");
    }
    let counts = s.counts();
    let n = s.len() as f64;
    Ok(counts.iter().zip(c.costs()).map(|(&k, &v)| k as f64 * v).sum::<f64>() / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalised_rows() {
        assert!(StochasticMatrix::new(vec![vec![0.5, 0.6], vec![1.0, 0.0]]).is_err());
        assert!(StochasticMatrix::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(Distribution::new(vec![0.5, 0.5 + 1e-11]).is_err());
        assert!(Distribution::new(vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn point_mixture_is_exact() {
        let f = ChannelFamily::from_matrices(vec![bsc(0.1), bsc(0.3)]).unwrap();
        assert_eq!(mix(&f, &[0.0, 1.0]).unwrap(), bsc(0.3));
        assert!(mix(&f, &[1.0]).is_err());
    }

    #[test]
    fn bsc_mixture() {
        let f = ChannelFamily::from_matrices(vec![bsc(0.1), bsc(0.3)]).unwrap();
        let m = mix(&f, &[0.25, 0.75]).unwrap();
        assert!(m.max_abs_diff(&bsc(0.25 * 0.1 + 0.75 * 0.3)) < 1e-15);
    }

    #[test]
    fn identity_sequence_prob() {
        let f = ChannelFamily::from_matrices(vec![StochasticMatrix::identity(2)]).unwrap();
        let s = StateSequence::new(vec![0; 4], 1).unwrap();
        assert_eq!(sequence_transition_prob(&f, &[0, 1, 1, 0], &s, &[0, 1, 1, 0]).unwrap(), 1.0);
        assert_eq!(sequence_transition_log_prob(&f, &[0, 1, 1, 0], &s, &[1, 1, 1, 0]).unwrap(), f64::NEG_INFINITY);
        assert!(sequence_transition_prob(&f, &[0, 1], &s, &[0, 1, 1, 0]).is_err());
    }

    #[test]
    fn types_and_costs() {
        let s = StateSequence::new([vec![0; 18], vec![1; 2]].concat(), 2).unwrap();
        assert_eq!(sequence_type(&s).probs(), &[0.9, 0.1]);
        let c = CostModel::new(vec![1.0, 1.0], 1.0).unwrap();
        assert_eq!(cost(&s, &c).unwrap(), 1.0);
        let sets = s.index_sets();
        assert_eq!(sets[1], vec![18, 19]);
    }

    #[test]
    fn alignment_duplicates_matrices() {
        let w = ChannelFamily::from_matrices(vec![bsc(0.1), bsc(0.2)]).unwrap();
        let v = ChannelFamily::from_matrices(vec![bsc(0.3), bsc(0.4), bsc(0.5)]).unwrap();
        let p = product_alignment(&w, &v).unwrap();
        assert_eq!(p.num_states(), 6);
        for s in 0..2 {
            for t in 0..3 {
                assert_eq!(p.main().matrix(s * 3 + t), w.matrix(s));
                assert_eq!(p.wiretap().matrix(s * 3 + t), v.matrix(t));
            }
        }
    }
}
