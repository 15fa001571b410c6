//! Letter typicality and its state-conditioned variants.
//!
//! A word is typical under a state sequence when, for every state that occurs
//! often enough, the sub-word on that state's positions is letter typical.
//! Rare states only impose coordinatewise positivity.

use crate::channel::{ChannelFamily, StateSequence, StochasticMatrix, SUM_TOL};
use crate::error::{domain, Error, Result};
use crate::rng;
use crate::words;

/// Absorbs rounding in frequency comparisons such as 0.6 - 0.5 vs 0.1.
const COUNT_SLACK: f64 = 1e-12;

/// Largest block handled by the exact multinomial sums.
pub const MAX_EXACT_BLOCK: usize = 64;
const MAX_COMPOSITIONS: usize = 5_000_000;

/// How the per-letter deviation is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Deviation {
    /// |f(a) - P(a)| <= δ P(a).
    #[default]
    Relative,
    /// |f(a) - P(a)| <= δ.
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypicalityParams {
    pub delta: f64,
    pub eta: f64,
    pub deviation: Deviation,
}

impl TypicalityParams {
    pub fn new(delta: f64, eta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return domain(format!("delta must be positive, got {delta}"));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return domain(format!("eta must lie in (0, 1], got {eta}"));
        }
        Ok(Self { delta, eta, deviation: Deviation::Relative })
    }

    pub fn with_deviation(mut self, deviation: Deviation) -> Self {
        self.deviation = deviation;
        self
    }

    /// Same η and deviation rule with δ replaced by 2δ.
    pub fn doubled(mut self) -> Self {
        self.delta *= 2.0;
        self
    }
}

fn within(count: usize, total: usize, p: f64, delta: f64, dev: Deviation) -> bool {
    let f = count as f64 / total as f64;
    let tol = match dev {
        Deviation::Relative => delta * p,
        Deviation::Absolute => delta,
    };
    (f - p).abs() <= tol + COUNT_SLACK
}

/// Letter typicality of a count vector against `p`.
pub fn counts_typical(counts: &[usize], p: &[f64], delta: f64, dev: Deviation) -> bool {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return true;
    }
    counts.iter().zip(p).all(|(&c, &q)| within(c, total, q, delta, dev))
}

fn letter_counts(word: &[usize], size: usize) -> Vec<usize> {
    let mut c = vec![0; size];
    for &a in word {
        c[a] += 1;
    }
    c
}

/// Membership in T^N_δ(P) with relative deviation.
pub fn letter_typical(word: &[usize], p: &[f64], delta: f64) -> bool {
    letter_typical_with(word, p, delta, Deviation::Relative)
}

pub fn letter_typical_with(word: &[usize], p: &[f64], delta: f64, dev: Deviation) -> bool {
    if word.iter().any(|&a| a >= p.len()) {
        return false;
    }
    counts_typical(&letter_counts(word, p.len()), p, delta, dev)
}

fn frequent_from_counts(counts: &[usize], n: usize, eta: f64) -> Vec<usize> {
    let k = counts.len() as f64;
    (0..counts.len()).filter(|&a| (counts[a] as f64) * k > n as f64 * eta).collect()
}

/// S(s^N, η): states occurring strictly more than Nη/|S| times.
pub fn frequent_states(s: &StateSequence, eta: f64) -> Vec<usize> {
    frequent_from_counts(&s.counts(), s.len(), eta)
}

/// P_X, the per-state output laws P_{Y_a} = P_X W_a and joints P_X(x) W_a(y|x),
/// precomputed for repeated membership tests.
#[derive(Clone, Debug)]
pub(crate) struct Laws {
    pub px: Vec<f64>,
    pub py: Vec<Vec<f64>>,
    pub joint: Vec<Vec<f64>>,
    pub nx: usize,
    pub ny: usize,
}

impl Laws {
    pub fn new(px: &[f64], family: &ChannelFamily) -> Self {
        let (nx, ny) = (family.num_inputs(), family.num_outputs());
        let mut py = Vec::new();
        let mut joint = Vec::new();
        for w in family.matrices() {
            py.push(crate::info::output_unchecked(px, w.as_slice(), ny));
            let mut j = vec![0.0; nx * ny];
            for x in 0..nx {
                for y in 0..ny {
                    j[x * ny + y] = px[x] * w.get(x, y);
                }
            }
            joint.push(j);
        }
        Self { px: px.to_vec(), py, joint, nx, ny }
    }
}

/// Index sets and frequent states of one state sequence.
#[derive(Clone, Debug)]
pub(crate) struct Blocks {
    pub idx: Vec<Vec<usize>>,
    pub frequent: Vec<usize>,
}

impl Blocks {
    pub fn new(s: &[usize], num_states: usize, eta: f64) -> Self {
        let mut idx = vec![Vec::new(); num_states];
        for (i, &a) in s.iter().enumerate() {
            idx[a].push(i);
        }
        let counts: Vec<usize> = idx.iter().map(Vec::len).collect();
        let frequent = frequent_from_counts(&counts, s.len(), eta);
        Self { idx, frequent }
    }
}

pub(crate) fn x_typical_raw(x: &[usize], blocks: &Blocks, px: &[f64], p: &TypicalityParams) -> bool {
    if x.iter().any(|&a| px[a] <= 0.0) {
        return false;
    }
    let mut c = vec![0; px.len()];
    blocks.frequent.iter().all(|&a| {
        c.iter_mut().for_each(|v| *v = 0);
        for &i in &blocks.idx[a] {
            c[x[i]] += 1;
        }
        counts_typical(&c, px, p.delta, p.deviation)
    })
}

pub(crate) fn y_typical_raw(y: &[usize], s: &[usize], blocks: &Blocks, laws: &Laws, p: &TypicalityParams) -> bool {
    if (0..y.len()).any(|i| laws.py[s[i]][y[i]] <= 0.0) {
        return false;
    }
    let mut c = vec![0; laws.ny];
    blocks.frequent.iter().all(|&a| {
        c.iter_mut().for_each(|v| *v = 0);
        for &i in &blocks.idx[a] {
            c[y[i]] += 1;
        }
        counts_typical(&c, &laws.py[a], p.delta, p.deviation)
    })
}

pub(crate) fn xy_typical_raw(
    x: &[usize],
    y: &[usize],
    s: &[usize],
    blocks: &Blocks,
    laws: &Laws,
    p: &TypicalityParams,
) -> bool {
    let ny = laws.ny;
    if (0..x.len()).any(|i| laws.joint[s[i]][x[i] * ny + y[i]] <= 0.0) {
        return false;
    }
    let mut c = vec![0; laws.nx * ny];
    blocks.frequent.iter().all(|&a| {
        c.iter_mut().for_each(|v| *v = 0);
        for &i in &blocks.idx[a] {
            c[x[i] * ny + y[i]] += 1;
        }
        counts_typical(&c, &laws.joint[a], p.delta, p.deviation)
    })
}

fn check_dist(p: &[f64], n: usize, what: &str) -> Result<()> {
    if p.len() != n || p.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (p.iter().sum::<f64>() - 1.0).abs() > SUM_TOL {
        return domain(format!("{what} is not a distribution over {n} symbols"));
    }
    Ok(())
}

fn check_word(w: &[usize], n: usize, size: usize, what: &str) -> Result<()> {
    if w.len() != n {
        return domain(format!("{what} has length {}, state sequence has {n}", w.len()));
    }
    if w.iter().any(|&a| a >= size) {
        return domain(format!("{what} has a symbol outside its alphabet"));
    }
    Ok(())
}

fn check_family(s: &StateSequence, family: &ChannelFamily) -> Result<()> {
    if s.num_states() != family.num_states() {
        return domain("state sequence and family use different state sets");
    }
    Ok(())
}

/// x^N ∈ T̃^N[X, s^N]_{δ,η}.
pub fn state_typical_x(x: &[usize], s: &StateSequence, px: &[f64], params: &TypicalityParams) -> Result<bool> {
    check_word(x, s.len(), px.len(), "input word")?;
    check_dist(px, px.len(), "input distribution")?;
    let blocks = Blocks::new(s.symbols(), s.num_states(), params.eta);
    Ok(x_typical_raw(x, &blocks, px, params))
}

/// y^N ∈ T̃^N[Y_S, s^N]_{δ,η} with P_{Y_a} = P_X W_a.
pub fn state_typical_y(
    y: &[usize],
    s: &StateSequence,
    family: &ChannelFamily,
    px: &[f64],
    params: &TypicalityParams,
) -> Result<bool> {
    check_family(s, family)?;
    check_word(y, s.len(), family.num_outputs(), "output word")?;
    check_dist(px, family.num_inputs(), "input distribution")?;
    let blocks = Blocks::new(s.symbols(), s.num_states(), params.eta);
    Ok(y_typical_raw(y, s.symbols(), &blocks, &Laws::new(px, family), params))
}

/// (x^N, y^N) ∈ T̃^N[XY_S, s^N]_{δ,η}.
pub fn jointly_typical(
    x: &[usize],
    y: &[usize],
    s: &StateSequence,
    px: &[f64],
    family: &ChannelFamily,
    params: &TypicalityParams,
) -> Result<bool> {
    check_family(s, family)?;
    check_word(x, s.len(), family.num_inputs(), "input word")?;
    check_word(y, s.len(), family.num_outputs(), "output word")?;
    check_dist(px, family.num_inputs(), "input distribution")?;
    let blocks = Blocks::new(s.symbols(), s.num_states(), params.eta);
    Ok(xy_typical_raw(x, y, s.symbols(), &blocks, &Laws::new(px, family), params))
}

/// y^N ∈ T̃^N[XY_S, s^N | x^N]_{δ,η}.
pub fn conditionally_typical(
    y: &[usize],
    x: &[usize],
    s: &StateSequence,
    px: &[f64],
    family: &ChannelFamily,
    params: &TypicalityParams,
) -> Result<bool> {
    jointly_typical(x, y, s, px, family, params)
}

/// Smallest positive probabilities m_X, m_{Y_S}, m_{XY_S}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinProbConstants {
    pub m_x: f64,
    pub m_y: f64,
    pub m_xy: f64,
}

fn min_positive<'a>(it: impl Iterator<Item = &'a f64>) -> f64 {
    it.copied().filter(|&v| v > 0.0).fold(1.0, f64::min)
}

impl MinProbConstants {
    pub fn new(px: &[f64], family: &ChannelFamily) -> Result<Self> {
        check_dist(px, family.num_inputs(), "input distribution")?;
        Ok(Self::from_laws(&Laws::new(px, family)))
    }

    pub(crate) fn from_laws(l: &Laws) -> Self {
        Self {
            m_x: min_positive(l.px.iter()),
            m_y: min_positive(l.py.iter().flatten()),
            m_xy: min_positive(l.joint.iter().flatten()),
        }
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for i in 1..=n {
        t[i] = t[i - 1] + (i as f64).ln();
    }
    t
}

fn multinomial(counts: &[usize], p: &[f64], lf: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    let mut l = lf[n];
    for (&c, &q) in counts.iter().zip(p) {
        if c == 0 {
            continue;
        }
        if q <= 0.0 {
            return 0.0;
        }
        l += c as f64 * q.ln() - lf[c];
    }
    l.exp()
}

fn check_block(mu: usize, parts: usize) -> Result<()> {
    if mu > MAX_EXACT_BLOCK || words::composition_count(mu, parts) > MAX_COMPOSITIONS {
        return Err(Error::Capacity(format!(
            "block of length {mu} over {parts} letters is too large for exact enumeration; use the Monte Carlo estimate"
        )));
    }
    Ok(())
}

/// Pr{μ i.i.d. letters from `p` form a typical block}.
fn block_typical_prob(mu: usize, p: &[f64], delta: f64, dev: Deviation) -> Result<f64> {
    check_block(mu, p.len())?;
    let lf = ln_factorials(mu);
    Ok(words::compositions(mu, p.len())
        .iter()
        .filter(|c| counts_typical(c, p, delta, dev))
        .map(|c| multinomial(c, p, &lf))
        .sum::<f64>()
        .min(1.0))
}

/// Exact Pr{X^N ∈ T̃^N[X, s^N]_{δ,η}} for X^N i.i.d. P_X.
pub fn typical_prob_exact(px: &[f64], s: &StateSequence, params: &TypicalityParams) -> Result<f64> {
    check_dist(px, px.len(), "input distribution")?;
    typical_prob_from_counts(px, &s.counts(), params)
}

fn typical_prob_from_counts(px: &[f64], counts: &[usize], params: &TypicalityParams) -> Result<f64> {
    let n = counts.iter().sum();
    let mut prob = 1.0;
    for a in frequent_from_counts(counts, n, params.eta) {
        prob *= block_typical_prob(counts[a], px, params.delta, params.deviation)?;
    }
    Ok(prob)
}

/// Probability that the outputs of one block are conditionally typical given
/// its input composition `xcounts`, the block length being Σ xcounts.
fn block_conditional_prob(xcounts: &[usize], px: &[f64], w: &StochasticMatrix, params: &TypicalityParams) -> Result<f64> {
    let mu: usize = xcounts.iter().sum();
    let ny = w.cols();
    let mut prob = 1.0;
    for (x, &n) in xcounts.iter().enumerate() {
        if n > 0 && px[x] <= 0.0 {
            return Ok(0.0);
        }
        let target: Vec<f64> = (0..ny).map(|y| px[x] * w.get(x, y)).collect();
        let ok = |c: &[usize]| {
            c.iter().zip(&target).all(|(&k, &t)| (t > 0.0 || k == 0) && within(k, mu, t, params.delta, params.deviation))
        };
        if n == 0 {
            if !ok(&vec![0; ny]) {
                return Ok(0.0);
            }
            continue;
        }
        check_block(n, ny)?;
        let lf = ln_factorials(n);
        let group: f64 = words::compositions(n, ny).iter().filter(|c| ok(c)).map(|c| multinomial(c, w.row(x), &lf)).sum();
        prob *= group.min(1.0);
        if prob == 0.0 {
            break;
        }
    }
    Ok(prob)
}

/// Exact Pr{Y^N(s^N) ∈ T̃^N[XY_S, s^N | x^N]_{δ,η} | X^N = x^N}.
pub fn conditional_typical_prob_exact(
    x: &[usize],
    s: &StateSequence,
    px: &[f64],
    family: &ChannelFamily,
    params: &TypicalityParams,
) -> Result<f64> {
    check_family(s, family)?;
    check_word(x, s.len(), family.num_inputs(), "input word")?;
    check_dist(px, family.num_inputs(), "input distribution")?;
    if x.iter().any(|&a| px[a] <= 0.0) {
        return Ok(0.0);
    }
    let blocks = Blocks::new(s.symbols(), s.num_states(), params.eta);
    let mut prob = 1.0;
    for &a in &blocks.frequent {
        let mut xc = vec![0; px.len()];
        for &i in &blocks.idx[a] {
            xc[x[i]] += 1;
        }
        prob *= block_conditional_prob(&xc, px, family.matrix(a), params)?;
    }
    Ok(prob)
}

/// Monte Carlo estimate of the conditional typicality probability, with a
/// 3σ radius.
pub fn conditional_typical_prob_monte_carlo(
    x: &[usize],
    s: &StateSequence,
    px: &[f64],
    family: &ChannelFamily,
    params: &TypicalityParams,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_family(s, family)?;
    check_word(x, s.len(), family.num_inputs(), "input word")?;
    check_dist(px, family.num_inputs(), "input distribution")?;
    if samples == 0 {
        return domain("Monte Carlo estimate needs at least one sample");
    }
    let laws = Laws::new(px, family);
    let sym = s.symbols();
    let blocks = Blocks::new(sym, s.num_states(), params.eta);
    let mut r = rng::stream(seed, 0);
    let mut y = vec![0; x.len()];
    let mut hits = 0usize;
    for _ in 0..samples {
        for i in 0..x.len() {
            y[i] = rng::sample_index(&mut r, family.matrix(sym[i]).row(x[i]));
        }
        if xy_typical_raw(x, &y, sym, &blocks, &laws, params) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok((p, 3.0 * (p * (1.0 - p) / samples as f64).sqrt()))
}

/// Largest ν with P > 1 - 2^{-Nν} at every evaluated point, scaled by 0.999
/// so the inequality stays strict.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub nu: f64,
    /// inf over points of -log2(1 - P)/N; `INFINITY` when every P is 1.
    pub sup: f64,
    pub worst_n: usize,
    pub worst_counts: Vec<usize>,
    pub points: usize,
}

impl Calibration {
    pub fn is_positive(&self) -> bool {
        self.nu > 0.0
    }
}

struct Calibrator {
    sup: f64,
    worst_n: usize,
    worst_counts: Vec<usize>,
    points: usize,
}

impl Calibrator {
    fn new() -> Self {
        Self { sup: f64::INFINITY, worst_n: 0, worst_counts: Vec::new(), points: 0 }
    }

    fn push(&mut self, n: usize, counts: &[usize], p: f64) {
        self.points += 1;
        let v = if p >= 1.0 { f64::INFINITY } else { -(1.0 - p).log2() / n as f64 };
        if v < self.sup {
            self.sup = v;
            self.worst_n = n;
            self.worst_counts = counts.to_vec();
        }
    }

    fn finish(self) -> Calibration {
        let nu = if self.sup > 0.0 { 0.999 * self.sup } else { 0.0 };
        Calibration { nu, sup: self.sup, worst_n: self.worst_n, worst_counts: self.worst_counts, points: self.points }
    }
}

/// Calibrates ν₁ over every state type at each block length in `ns`.
/// The probability depends on s^N only through its type.
pub fn calibrate_nu1(px: &[f64], num_states: usize, params: &TypicalityParams, ns: &[usize]) -> Result<Calibration> {
    check_dist(px, px.len(), "input distribution")?;
    let mut cal = Calibrator::new();
    for &n in ns {
        for counts in words::compositions(n, num_states) {
            cal.push(n, &counts, typical_prob_from_counts(px, &counts, params)?);
        }
    }
    Ok(cal.finish())
}

/// Calibrates ν₂ for the 2δ conditional typicality statement: for each state
/// type, the worst typical input composition is taken in every frequent block.
/// Types admitting no typical input are skipped.
pub fn calibrate_nu2(px: &[f64], family: &ChannelFamily, params: &TypicalityParams, ns: &[usize]) -> Result<Calibration> {
    check_dist(px, family.num_inputs(), "input distribution")?;
    let wide = params.doubled();
    let mut cal = Calibrator::new();
    for &n in ns {
        'types: for counts in words::compositions(n, family.num_states()) {
            let mut p = 1.0;
            for a in frequent_from_counts(&counts, n, params.eta) {
                let mut worst: Option<f64> = None;
                check_block(counts[a], px.len())?;
                for xc in words::compositions(counts[a], px.len()) {
                    let supported = xc.iter().zip(px).all(|(&c, &q)| c == 0 || q > 0.0);
                    if !supported || !counts_typical(&xc, px, params.delta, params.deviation) {
                        continue;
                    }
                    let v = block_conditional_prob(&xc, px, family.matrix(a), &wide)?;
                    worst = Some(worst.map_or(v, |w: f64| w.min(v)));
                }
                match worst {
                    Some(v) => p *= v,
                    None => continue 'types,
                }
            }
            cal.push(n, &counts, p);
        }
    }
    Ok(cal.finish())
}

/// Exhaustive checks of the typicality bounds at one block length.
pub mod audit {
    use super::*;
    use crate::info::{entropy, mi_unchecked};

    const AUDIT_CAP: usize = 50_000_000;

    #[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
    pub struct Tally {
        pub checked: usize,
        pub violations: usize,
    }

    impl Tally {
        fn record(&mut self, ok: bool) {
            self.checked += 1;
            if !ok {
                self.violations += 1;
            }
        }
    }

    #[derive(Clone, Debug, PartialEq)]
    pub struct TypicalityAudit {
        pub n: usize,
        /// Joint typicality implies both marginal typicalities.
        pub consistency: Tally,
        /// Lower and upper bounds on Pr{Y^N(s^N) = y^N} for typical y.
        pub output_lower: Tally,
        pub output_upper: Tally,
        /// Size of the output typical set, one check per s^N.
        pub output_cardinality: Tally,
        /// Bounds on the conditional probability of jointly typical pairs.
        pub conditional_lower: Tally,
        pub conditional_upper: Tally,
        /// Probability that an independent output lands in the conditional set.
        pub hit_probability: Tally,
        /// 2δ conditional typicality exceeds 1 - 2^{-Nν₂}.
        pub conditional_typicality: Tally,
        pub nu2: f64,
    }

    impl TypicalityAudit {
        pub fn tallies(&self) -> [(&'static str, Tally); 8] {
            [
                ("consistency", self.consistency),
                ("output-lower", self.output_lower),
                ("output-upper", self.output_upper),
                ("output-cardinality", self.output_cardinality),
                ("conditional-lower", self.conditional_lower),
                ("conditional-upper", self.conditional_upper),
                ("hit-probability", self.hit_probability),
                ("conditional-typicality", self.conditional_typicality),
            ]
        }

        pub fn total_violations(&self) -> usize {
            self.tallies().iter().map(|(_, t)| t.violations).sum()
        }
    }

    /// Enumerates every (s^N, x^N, y^N) at block length `n`. Non-strict
    /// bounds get a 1e-9 slack in the exponent; strict ones get none.
    pub fn exhaustive(
        px: &[f64],
        family: &ChannelFamily,
        params: &TypicalityParams,
        n: usize,
        nu2: f64,
    ) -> Result<TypicalityAudit> {
        check_dist(px, family.num_inputs(), "input distribution")?;
        let (ns, nx, ny) = (family.num_states(), family.num_inputs(), family.num_outputs());
        let total = [ns, nx, ny].iter().try_fold(1usize, |acc, &r| words::word_count(r, n).and_then(|c| acc.checked_mul(c)));
        match total {
            Some(t) if t <= AUDIT_CAP => {}
            _ => return Err(Error::Capacity(format!("exhaustive audit at N={n} exceeds {AUDIT_CAP} triples"))),
        }
        let laws = Laws::new(px, family);
        let m = MinProbConstants::from_laws(&laws);
        let hy: Vec<f64> = laws.py.iter().map(|p| entropy(p)).collect();
        let hyx: Vec<f64> = family.matrices().iter().map(|w| (0..nx).map(|x| px[x] * entropy(w.row(x))).sum()).collect();
        let iy: Vec<f64> = family.matrices().iter().map(|w| mi_unchecked(px, w.as_slice(), ny)).collect();
        let (d, eta, nf) = (params.delta, params.eta, n as f64);
        let wide = params.doubled();
        let mut a = TypicalityAudit {
            n,
            consistency: Tally::default(),
            output_lower: Tally::default(),
            output_upper: Tally::default(),
            output_cardinality: Tally::default(),
            conditional_lower: Tally::default(),
            conditional_upper: Tally::default(),
            hit_probability: Tally::default(),
            conditional_typicality: Tally::default(),
            nu2,
        };
        let xs: Vec<Vec<usize>> = (0..words::word_count(nx, n).unwrap()).map(|i| words::word_at(i, nx, n)).collect();
        let ys: Vec<Vec<usize>> = (0..words::word_count(ny, n).unwrap()).map(|i| words::word_at(i, ny, n)).collect();
        words::for_each_word(ns, n, |_, s| {
            let blocks = Blocks::new(s, ns, eta);
            let mut t = vec![0.0; ns];
            for &v in s {
                t[v] += 1.0 / nf;
            }
            let hbar: f64 = (0..ns).map(|v| t[v] * hy[v]).sum();
            let hcond: f64 = (0..ns).map(|v| t[v] * hyx[v]).sum();
            let ibar: f64 = (0..ns).map(|v| t[v] * iy[v]).sum();
            let out_lo = -nf * ((1.0 + d) * hbar - eta * m.m_y.log2());
            let out_hi = -nf * (1.0 - d - eta) * hbar;
            let cond_lo = -nf * ((1.0 + d) * hcond - eta * m.m_xy.log2());
            let cond_hi = -nf * (1.0 - d - eta) * hcond;
            let hit_bound = (-nf * (ibar - (2.0 * d + eta) * hbar + eta * m.m_xy.log2())).exp2();
            let target = 1.0 - (-nf * nu2).exp2();

            let mut y_typ = Vec::with_capacity(ys.len());
            let mut y_prob = Vec::with_capacity(ys.len());
            let mut card = 0usize;
            for y in &ys {
                let typ = y_typical_raw(y, s, &blocks, &laws, params);
                let p: f64 = (0..n).map(|i| laws.py[s[i]][y[i]]).product();
                if typ {
                    card += 1;
                    let lp = p.log2();
                    a.output_lower.record(out_lo < lp);
                    a.output_upper.record(lp < out_hi);
                }
                y_typ.push(typ);
                y_prob.push(p);
            }
            a.output_cardinality.record((card as f64).log2() < -out_lo);

            for x in &xs {
                let xt = x_typical_raw(x, &blocks, px, params);
                let mut hit = 0.0;
                let mut wide_mass = 0.0;
                for (yi, y) in ys.iter().enumerate() {
                    let pc: f64 = (0..n).map(|i| family.prob(s[i], x[i], y[i])).product();
                    if xy_typical_raw(x, y, s, &blocks, &laws, params) {
                        a.consistency.record(xt && y_typ[yi]);
                        let lc = pc.log2();
                        a.conditional_lower.record(cond_lo <= lc + 1e-9);
                        a.conditional_upper.record(lc <= cond_hi + 1e-9);
                        hit += y_prob[yi];
                    }
                    if xt && xy_typical_raw(x, y, s, &blocks, &laws, &wide) {
                        wide_mass += pc;
                    }
                }
                if xt {
                    a.hit_probability.record(hit < hit_bound);
                    a.conditional_typicality.record(wide_mass > target);
                }
            }
        });
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bsc;

    fn seq(bits: &str) -> StateSequence {
        StateSequence::new(bits.bytes().map(|b| (b - b'0') as usize).collect(), 2).unwrap()
    }

    fn word(bits: &str) -> Vec<usize> {
        bits.bytes().map(|b| (b - b'0') as usize).collect()
    }

    #[test]
    fn frequent_states_are_strict() {
        assert_eq!(frequent_states(&seq("00000000000000000011"), 0.5), vec![0]);
        assert_eq!(frequent_states(&seq("0011"), 1.0), Vec::<usize>::new());
    }

    #[test]
    fn letter_typicality_examples() {
        let u = [0.5, 0.5];
        assert!(letter_typical(&word("0000011111"), &u, 0.12));
        assert!(!letter_typical(&word("0000000111"), &u, 0.12));
        assert!(letter_typical(&word("01"), &u, 0.0));
    }

    #[test]
    fn vacuous_delta_gives_probability_one() {
        let p = TypicalityParams::new(1.0, 0.5).unwrap();
        assert!((typical_prob_exact(&[0.5, 0.5], &seq("000111"), &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_probability_matches_binomial_sum() {
        // Both blocks of length 10 must have exactly five zeros under relative δ=0.12.
        let p = TypicalityParams::new(0.12, 0.5).unwrap();
        let got = typical_prob_exact(&[0.5, 0.5], &seq("00000000001111111111"), &p).unwrap();
        let b = 252.0 / 1024.0;
        assert!((got - b * b).abs() < 1e-14);
    }

    #[test]
    fn conditional_probability_matches_enumeration() {
        let fam = ChannelFamily::from_matrices(vec![bsc(0.2), bsc(0.35)]).unwrap();
        let px = [0.4, 0.6];
        let s = seq("0010110");
        let x = word("0110100");
        let p = TypicalityParams::new(0.4, 0.5).unwrap();
        let exact = conditional_typical_prob_exact(&x, &s, &px, &fam, &p).unwrap();
        let mut direct = 0.0;
        words::for_each_word(2, 7, |_, y| {
            if conditionally_typical(y, &x, &s, &px, &fam, &p).unwrap() {
                direct += crate::channel::sequence_transition_prob(&fam, &x, &s, y).unwrap();
            }
        });
        assert!((exact - direct).abs() < 1e-12, "{exact} vs {direct}");
    }

    #[test]
    fn oversized_block_is_a_capacity_error() {
        let s = StateSequence::new(vec![0; 80], 1).unwrap();
        let p = TypicalityParams::new(0.1, 0.5).unwrap();
        assert!(matches!(typical_prob_exact(&[0.5, 0.5], &s, &p), Err(Error::Capacity(_))));
    }
}
