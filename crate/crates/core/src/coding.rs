//! Desk-scale codes for AVCs: random codebooks, the iterative CSR decoder,
//! exact and simulated error measures, adversarial state search, and the
//! code-randomisation steps (elimination and message permutation).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::channel::{word_prob, ChannelFamily};
use crate::error::{domain, Error, Result};
use crate::order::csr_max_error_positive;
use crate::rng::{sample_index, sample_word, stream};
use crate::typicality::{counts_typical, x_typical_raw, xy_typical_raw, Blocks, Deviation, Laws, TypicalityParams};
use crate::words::{checked_count, compositions, for_each_word, word_count, word_index};

/// Largest output space materialised as an explicit decoding table.
pub const MAX_TABLE_WORDS: usize = 10_000_000;
/// Largest state space searched exhaustively.
pub const MAX_STATE_SEQUENCES: usize = 1_000_000;

const NONE: u32 = u32::MAX;
const CACHE_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    words: Vec<Vec<usize>>,
    alphabet: usize,
    px: Option<Vec<f64>>,
    seed: Option<u64>,
}

impl Codebook {
    pub fn new(words: Vec<Vec<usize>>, alphabet: usize) -> Result<Self> {
        if words.is_empty() {
            return domain("a codebook needs at least one word");
        }
        let n = words[0].len();
        if n == 0 || words.iter().any(|w| w.len() != n) {
            return domain("codewords must share one positive length");
        }
        if words.iter().flatten().any(|&a| a >= alphabet) {
            return domain("codeword symbol outside the input alphabet");
        }
        Ok(Self { words, alphabet, px: None, seed: None })
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn word(&self, m: usize) -> &[usize] {
        &self.words[m]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn block_length(&self) -> usize {
        self.words[0].len()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Generating law and seed, for generated codebooks.
    pub fn generator(&self) -> Option<(&[f64], u64)> {
        Some((self.px.as_deref()?, self.seed?))
    }

    /// Codebook whose message m is sent with word `perm[m]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        Ok(Self { words: perm.iter().map(|&i| self.words[i].clone()).collect(), alphabet: self.alphabet, px: None, seed: None })
    }
}

/// L′ words of length N with i.i.d. letters drawn from `px`.
pub fn generate_codebook(px: &[f64], n: usize, size: usize, seed: u64) -> Result<Codebook> {
    if size == 0 || n == 0 {
        return domain("codebook size and block length must be positive");
    }
    if px.is_empty() || px.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (px.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return domain("input law is not a distribution");
    }
    let mut rng = stream(seed, 0);
    let words = (0..size).map(|_| sample_word(&mut rng, px, n)).collect();
    Ok(Codebook { words, alphabet: px.len(), px: Some(px.to_vec()), seed: Some(seed) })
}

/// Like [`generate_codebook`] but redraws any word already present, so the
/// words are distinct.
pub fn generate_distinct_codebook(px: &[f64], n: usize, size: usize, seed: u64) -> Result<Codebook> {
    let mut c = generate_codebook(px, n, 1, seed)?;
    let support = px.iter().filter(|&&v| v > 0.0).count();
    if word_count(support, n).is_some_and(|w| w < size) {
        return domain(format!("only {support}^{n} words have positive probability, {size} requested"));
    }
    let mut rng = stream(seed, 0);
    let mut seen = std::collections::HashSet::new();
    c.words.clear();
    let mut attempts = 0usize;
    while c.words.len() < size {
        attempts += 1;
        if attempts > 1000 * size {
            return Err(Error::Capacity("distinct codebook draw exceeded its attempt budget".into()));
        }
        let w = sample_word(&mut rng, px, n);
        if seen.insert(w.clone()) {
            c.words.push(w);
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSearch {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Goodness {
    pub good: bool,
    /// Smallest fraction of state-typical codewords seen.
    pub min_fraction: f64,
    pub argmin: Vec<usize>,
    /// Required fraction 1 − 2·2^{−Nν₁}; every fraction must exceed it.
    pub threshold: f64,
    pub checked: usize,
}

fn state_sequences(ns: usize, n: usize, search: StateSearch) -> Result<Vec<Vec<usize>>> {
    match search {
        StateSearch::Exhaustive => {
            let c = checked_count(ns, n, MAX_STATE_SEQUENCES, "state sequences")?;
            let mut out = Vec::with_capacity(c);
            for_each_word(ns, n, |_, s| out.push(s.to_vec()));
            Ok(out)
        }
        StateSearch::Sampled { count, seed } => {
            let mut rng = stream(seed, 1);
            Ok((0..count).map(|_| (0..n).map(|_| rng.random_range(0..ns)).collect()).collect())
        }
    }
}

/// Checks that, for every searched s^N, more than (1 − 2·2^{−Nν₁})L′ codewords
/// are state-typical.
pub fn is_good_codebook(
    c: &Codebook,
    px: &[f64],
    num_states: usize,
    params: &TypicalityParams,
    nu1: f64,
    search: StateSearch,
) -> Result<Goodness> {
    if px.len() != c.alphabet() {
        return domain("input law does not match the codebook alphabet");
    }
    let n = c.block_length();
    let threshold = 1.0 - 2.0 * (-(n as f64) * nu1).exp2();
    let mut min = (f64::INFINITY, Vec::new());
    let seqs = state_sequences(num_states, n, search)?;
    for s in &seqs {
        let blocks = Blocks::new(s, num_states, params.eta);
        let typical = c.words().iter().filter(|x| x_typical_raw(x, &blocks, px, params)).count();
        let f = typical as f64 / c.len() as f64;
        if f < min.0 {
            min = (f, s.clone());
        }
    }
    Ok(Goodness { good: min.0 > threshold, min_fraction: min.0, argmin: min.1, threshold, checked: seqs.len() })
}

/// Decoding sets D_1(s^N), …, D_{L′}(s^N) for one state sequence.
#[derive(Clone, Debug)]
pub struct DecodingSets {
    n: usize,
    ny: usize,
    admitted: Vec<bool>,
    repr: SetRepr,
}

#[derive(Clone, Debug)]
enum SetRepr {
    /// Owner message of every output word, by lexicographic index.
    Table { owner: Vec<u32>, sizes: Vec<usize> },
    /// Membership decided on demand: y belongs to the first admitted message
    /// whose conditionally typical set contains it.
    Replay { words: Vec<Vec<usize>>, s: Vec<usize>, blocks: Blocks, laws: Laws, params: TypicalityParams },
}

impl DecodingSets {
    pub fn decode(&self, y: &[usize]) -> Option<usize> {
        match &self.repr {
            SetRepr::Table { owner, .. } => match owner[word_index(y, self.ny)] {
                NONE => None,
                m => Some(m as usize),
            },
            SetRepr::Replay { words, s, blocks, laws, params } => (0..words.len())
                .find(|&m| self.admitted[m] && xy_typical_raw(&words[m], y, s, blocks, laws, params)),
        }
    }

    /// Whether message m passed both admission tests.
    pub fn admitted(&self) -> &[bool] {
        &self.admitted
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.repr, SetRepr::Table { .. })
    }

    /// |D_m(s^N)| per message, when materialised.
    pub fn sizes(&self) -> Option<&[usize]> {
        match &self.repr {
            SetRepr::Table { sizes, .. } => Some(sizes),
            SetRepr::Replay { .. } => None,
        }
    }

    /// Lexicographic indices of the output words in D_m, when materialised.
    pub fn members(&self, m: usize) -> Option<Vec<usize>> {
        match &self.repr {
            SetRepr::Table { owner, .. } => {
                Some((0..owner.len()).filter(|&i| owner[i] == m as u32).collect())
            }
            SetRepr::Replay { .. } => None,
        }
    }

    pub fn block_length(&self) -> usize {
        self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoderParams {
    pub typicality: TypicalityParams,
    pub nu2: f64,
    /// Samples per message for the residual-mass test when the output space is
    /// too large to materialise.
    pub replay_samples: usize,
    pub replay_seed: u64,
}

impl DecoderParams {
    pub fn new(typicality: TypicalityParams, nu2: f64) -> Self {
        Self { typicality, nu2, replay_samples: 4000, replay_seed: 0xdec0de }
    }

    /// 1 − 2·2^{−Nν₂}.
    pub fn admission_threshold(&self, n: usize) -> f64 {
        1.0 - 2.0 * (-(n as f64) * self.nu2).exp2()
    }
}

fn sample_output<R: Rng + ?Sized>(rng: &mut R, family: &ChannelFamily, x: &[usize], s: &[usize]) -> Vec<usize> {
    x.iter().zip(s).map(|(&a, &t)| sample_index(rng, family.matrix(t).row(a))).collect()
}

/// Iterative construction: message m is admitted when its codeword is
/// state-typical and the part of its 2δ conditionally typical set not yet
/// claimed carries mass above the admission threshold; D_m is that part.
pub fn build_decoding_sets(
    codebook: &Codebook,
    family: &ChannelFamily,
    s: &[usize],
    px: &[f64],
    params: &DecoderParams,
) -> Result<DecodingSets> {
    let n = codebook.block_length();
    if s.len() != n || s.iter().any(|&t| t >= family.num_states()) {
        return domain("state sequence does not match the block length or state set");
    }
    if codebook.alphabet() != family.num_inputs() || px.len() != family.num_inputs() {
        return domain("codebook, input law and family disagree on the input alphabet");
    }
    let ny = family.num_outputs();
    let blocks = Blocks::new(s, family.num_states(), params.typicality.eta);
    let laws = Laws::new(px, family);
    let cond = params.typicality.doubled();
    let threshold = params.admission_threshold(n);
    let l = codebook.len();
    let mut admitted = vec![false; l];
    match word_count(ny, n).filter(|&c| c <= MAX_TABLE_WORDS) {
        Some(total) => {
            let mut owner = vec![NONE; total];
            let mut sizes = vec![0; l];
            let mut claim = Vec::new();
            for m in 0..l {
                let x = codebook.word(m);
                if !x_typical_raw(x, &blocks, px, &params.typicality) {
                    continue;
                }
                claim.clear();
                let mut resid = 0.0;
                for_each_word(ny, n, |i, y| {
                    if owner[i] == NONE && xy_typical_raw(x, y, s, &blocks, &laws, &cond) {
                        resid += word_prob(family, x, s, y);
                        claim.push(i);
                    }
                });
                if resid > threshold {
                    admitted[m] = true;
                    sizes[m] = claim.len();
                    for &i in &claim {
                        owner[i] = m as u32;
                    }
                }
            }
            Ok(DecodingSets { n, ny, admitted, repr: SetRepr::Table { owner, sizes } })
        }
        None => {
            let words = codebook.words().to_vec();
            for m in 0..l {
                let x = &words[m];
                if !x_typical_raw(x, &blocks, px, &params.typicality) {
                    continue;
                }
                let mut rng = stream(params.replay_seed, m as u64);
                let mut hits = 0usize;
                for _ in 0..params.replay_samples {
                    let y = sample_output(&mut rng, family, x, s);
                    if xy_typical_raw(x, &y, s, &blocks, &laws, &cond)
                        && !(0..m).any(|j| admitted[j] && xy_typical_raw(&words[j], &y, s, &blocks, &laws, &cond))
                    {
                        hits += 1;
                    }
                }
                admitted[m] = hits as f64 / params.replay_samples.max(1) as f64 > threshold;
            }
            Ok(DecodingSets { n, ny, admitted, repr: SetRepr::Replay { words, s: s.to_vec(), blocks, laws, params: cond } })
        }
    }
}

/// A decoder that may consult the state sequence.
pub trait Decoder: Sync {
    fn sets(&self, s: &[usize]) -> Result<Arc<DecodingSets>>;

    /// Message index, or `None` for an erasure.
    fn decode(&self, y: &[usize], s: &[usize]) -> Result<Option<usize>> {
        Ok(self.sets(s)?.decode(y))
    }
}

/// Decoder with state knowledge at the receiver.
pub struct CsrDecoder {
    codebook: Codebook,
    family: ChannelFamily,
    px: Vec<f64>,
    params: DecoderParams,
    cache: Mutex<HashMap<Vec<usize>, Arc<DecodingSets>>>,
}

pub fn build_csr_decoder(codebook: &Codebook, family: &ChannelFamily, px: &[f64], params: DecoderParams) -> Result<CsrDecoder> {
    if codebook.alphabet() != family.num_inputs() || px.len() != family.num_inputs() {
        return domain("codebook, input law and family disagree on the input alphabet");
    }
    Ok(CsrDecoder { codebook: codebook.clone(), family: family.clone(), px: px.to_vec(), params, cache: Mutex::new(HashMap::new()) })
}

impl Decoder for CsrDecoder {
    fn sets(&self, s: &[usize]) -> Result<Arc<DecodingSets>> {
        if let Some(d) = self.cache.lock().unwrap().get(s) {
            return Ok(d.clone());
        }
        let d = Arc::new(build_decoding_sets(&self.codebook, &self.family, s, &self.px, &self.params)?);
        let mut c = self.cache.lock().unwrap();
        if c.len() >= CACHE_LIMIT {
            c.clear();
        }
        c.insert(s.to_vec(), d.clone());
        Ok(d)
    }
}

/// State-blind decoder: the CSR construction run on the single channel W_q,
/// so its sets ignore the actual state sequence.
pub struct MixtureDecoder {
    sets: Arc<DecodingSets>,
    q: Vec<f64>,
}

pub fn build_mixture_decoder(
    codebook: &Codebook,
    family: &ChannelFamily,
    px: &[f64],
    q: &[f64],
    params: DecoderParams,
) -> Result<MixtureDecoder> {
    let w = crate::channel::mix(family, q)?;
    let single = ChannelFamily::from_matrices(vec![w])?;
    let s = vec![0; codebook.block_length()];
    let sets = build_decoding_sets(codebook, &single, &s, px, &params)?;
    Ok(MixtureDecoder { sets: Arc::new(sets), q: q.to_vec() })
}

impl MixtureDecoder {
    pub fn mixture(&self) -> &[f64] {
        &self.q
    }
}

impl Decoder for MixtureDecoder {
    fn sets(&self, _s: &[usize]) -> Result<Arc<DecodingSets>> {
        Ok(self.sets.clone())
    }
}

fn check_state(family: &ChannelFamily, codebook: &Codebook, s: &[usize]) -> Result<()> {
    if s.len() != codebook.block_length() || s.iter().any(|&t| t >= family.num_states()) {
        return domain("state sequence does not match the block length or state set");
    }
    if codebook.alphabet() != family.num_inputs() {
        return domain("codebook and family disagree on the input alphabet");
    }
    Ok(())
}

/// Exact e_m = 1 − W(D_m(s^N) | x^N(m), s^N) for every message; erasures count
/// as errors.
pub fn message_errors(codebook: &Codebook, family: &ChannelFamily, dec: &dyn Decoder, s: &[usize]) -> Result<Vec<f64>> {
    check_state(family, codebook, s)?;
    let sets = dec.sets(s)?;
    let owner = match &sets.repr {
        SetRepr::Table { owner, .. } => owner,
        SetRepr::Replay { .. } => {
            return Err(Error::Capacity("exact errors need a materialised decoding table; use Monte Carlo".into()))
        }
    };
    let ny = family.num_outputs();
    let mut mass = vec![0.0; codebook.len()];
    for_each_word(ny, s.len(), |i, y| {
        let m = owner[i];
        if m != NONE {
            mass[m as usize] += word_prob(family, codebook.word(m as usize), s, y);
        }
    });
    Ok(mass.iter().map(|&v| (1.0 - v).max(0.0)).collect())
}

/// ē(C, s^N).
pub fn average_error_exact(codebook: &Codebook, family: &ChannelFamily, dec: &dyn Decoder, s: &[usize]) -> Result<f64> {
    let e = message_errors(codebook, family, dec, s)?;
    Ok(e.iter().sum::<f64>() / e.len() as f64)
}

/// Number of nonempty decoding sets whose exact error is not below 2·2^{−Nν₂}.
pub fn decoding_bound_violations(sets: &DecodingSets, errors: &[f64], nu2: f64) -> Result<usize> {
    let sizes = sets.sizes().ok_or_else(|| Error::Capacity("decoding table not materialised".into()))?;
    let bound = 2.0 * (-(sets.n as f64) * nu2).exp2();
    Ok(sizes.iter().zip(errors).filter(|(&k, &e)| k > 0 && e >= bound).count())
}

/// Monte Carlo ē(C, s^N) with a 3σ radius.
pub fn average_error_monte_carlo(
    codebook: &Codebook,
    family: &ChannelFamily,
    dec: &dyn Decoder,
    s: &[usize],
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_state(family, codebook, s)?;
    if trials == 0 {
        return domain("need at least one trial");
    }
    let sets = dec.sets(s)?;
    let mut rng = stream(seed, 2);
    let mut errors = 0usize;
    for _ in 0..trials {
        let m = rng.random_range(0..codebook.len());
        let y = sample_output(&mut rng, family, codebook.word(m), s);
        if sets.decode(&y) != Some(m) {
            errors += 1;
        }
    }
    let p = errors as f64 / trials as f64;
    let v = p.max(1.0 / trials as f64) * (1.0 - p).max(1.0 / trials as f64);
    Ok((p, 3.0 * (v / trials as f64).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Average,
    Maximal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Jammer {
    Exhaustive,
    /// Coordinate ascent from random starts, capped at `budget` evaluations.
    Greedy { restarts: usize, budget: usize, seed: u64 },
}

impl Jammer {
    pub fn greedy(seed: u64) -> Self {
        Jammer::Greedy { restarts: 16, budget: 20_000, seed }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Jammer::Exhaustive => "exhaustive",
            Jammer::Greedy { .. } => "greedy",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorstCase {
    pub value: f64,
    pub state: Vec<usize>,
    pub evaluations: usize,
    pub exhaustive: bool,
}

fn score(errors: &[f64], kind: ErrorKind) -> f64 {
    match kind {
        ErrorKind::Average => errors.iter().sum::<f64>() / errors.len() as f64,
        ErrorKind::Maximal => errors.iter().copied().fold(0.0, f64::max),
    }
}

/// max over s^N of the average or maximal error.
pub fn worst_state_error(
    codebook: &Codebook,
    family: &ChannelFamily,
    dec: &dyn Decoder,
    kind: ErrorKind,
    jammer: Jammer,
) -> Result<WorstCase> {
    let (n, ns) = (codebook.block_length(), family.num_states());
    let eval = |s: &[usize]| -> Result<f64> { Ok(score(&message_errors(codebook, family, dec, s)?, kind)) };
    match jammer {
        Jammer::Exhaustive => {
            let mut best = WorstCase { value: f64::NEG_INFINITY, state: vec![], evaluations: 0, exhaustive: true };
            for s in state_sequences(ns, n, StateSearch::Exhaustive)? {
                let v = eval(&s)?;
                best.evaluations += 1;
                if v > best.value {
                    best.value = v;
                    best.state = s;
                }
            }
            Ok(best)
        }
        Jammer::Greedy { restarts, budget, seed } => {
            let mut rng = stream(seed, 3);
            let mut best = WorstCase { value: f64::NEG_INFINITY, state: vec![], evaluations: 0, exhaustive: false };
            'outer: for _ in 0..restarts.max(1) {
                let mut s: Vec<usize> = (0..n).map(|_| rng.random_range(0..ns)).collect();
                let mut cur = eval(&s)?;
                best.evaluations += 1;
                loop {
                    let mut improved = false;
                    for i in 0..n {
                        let keep = s[i];
                        for t in 0..ns {
                            if t == keep || best.evaluations >= budget {
                                continue;
                            }
                            s[i] = t;
                            let v = eval(&s)?;
                            best.evaluations += 1;
                            if v > cur {
                                cur = v;
                                improved = true;
                            } else {
                                s[i] = keep;
                            }
                            if s[i] != keep {
                                break;
                            }
                        }
                    }
                    if cur > best.value {
                        best.value = cur;
                        best.state = s.clone();
                    }
                    if best.evaluations >= budget {
                        break 'outer;
                    }
                    if !improved {
                        break;
                    }
                }
            }
            Ok(best)
        }
    }
}

/// Per-state, per-message error table of one code: `table[s][m]` for every s^N
/// in lexicographic order.
pub fn error_table(codebook: &Codebook, family: &ChannelFamily, dec: &dyn Decoder) -> Result<Vec<Vec<f64>>> {
    state_sequences(family.num_states(), codebook.block_length(), StateSearch::Exhaustive)?
        .iter()
        .map(|s| message_errors(codebook, family, dec, s))
        .collect()
}

fn check_permutation(perm: &[usize], l: usize) -> Result<()> {
    let mut seen = vec![false; l];
    if perm.len() != l || perm.iter().any(|&i| i >= l || std::mem::replace(&mut seen[i], true)) {
        return domain("not a permutation of the message set");
    }
    Ok(())
}

/// Errors of the code (f∘π, π⁻¹∘φ) measured by direct enumeration of outputs.
pub fn permuted_code_errors(
    codebook: &Codebook,
    family: &ChannelFamily,
    dec: &dyn Decoder,
    s: &[usize],
    perm: &[usize],
) -> Result<Vec<f64>> {
    check_state(family, codebook, s)?;
    let l = codebook.len();
    check_permutation(perm, l)?;
    let sets = dec.sets(s)?;
    if !sets.is_materialized() {
        return Err(Error::Capacity("permuted errors need a materialised decoding table".into()));
    }
    let mut inv = vec![0; l];
    for (m, &p) in perm.iter().enumerate() {
        inv[p] = m;
    }
    let mut correct = vec![0.0; l];
    for_each_word(family.num_outputs(), s.len(), |_, y| {
        if let Some(d) = sets.decode(y) {
            let m = inv[d];
            correct[m] += word_prob(family, codebook.word(perm[m]), s, y);
        }
    });
    Ok(correct.iter().map(|&c| (1.0 - c).max(0.0)).collect())
}

/// Advances `p` to the next permutation in lexicographic order.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermutationMode {
    /// All L′! permutations; L′ ≤ 8.
    Exact,
    Sampled { trials: usize, seed: u64 },
}

fn random_permutation<R: Rng + ?Sized>(rng: &mut R, l: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..l).collect();
    for i in (1..l).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// E_π[e_π(m)] per message for the uniformly permuted code.
pub fn permutation_expected_errors(
    codebook: &Codebook,
    family: &ChannelFamily,
    dec: &dyn Decoder,
    s: &[usize],
    mode: PermutationMode,
) -> Result<Vec<f64>> {
    let l = codebook.len();
    let mut acc = vec![0.0; l];
    let mut count = 0usize;
    let mut add = |e: Vec<f64>| {
        for (a, v) in acc.iter_mut().zip(e) {
            *a += v;
        }
        count += 1;
    };
    match mode {
        PermutationMode::Exact => {
            if l > 8 {
                return Err(Error::Capacity(format!("{l}! permutations exceed the exact cap (L′ ≤ 8)")));
            }
            let mut p: Vec<usize> = (0..l).collect();
            loop {
                add(permuted_code_errors(codebook, family, dec, s, &p)?);
                if !next_permutation(&mut p) {
                    break;
                }
            }
        }
        PermutationMode::Sampled { trials, seed } => {
            let mut rng = stream(seed, 4);
            for _ in 0..trials.max(1) {
                let p = random_permutation(&mut rng, l);
                add(permuted_code_errors(codebook, family, dec, s, &p)?);
            }
        }
    }
    Ok(acc.iter().map(|v| v / count as f64).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EliminationResult {
    /// max over (m, s^N) of the error averaged over the drawn codes.
    pub averaged_max_error: f64,
    pub message: usize,
    pub state_index: usize,
}

/// Averages per-message errors over a list of codes given as error tables
/// `tables[k][s][m]` and takes the worst (m, s).
pub fn elimination_average(tables: &[&[Vec<f64>]]) -> Result<EliminationResult> {
    if tables.is_empty() {
        return domain("need at least one code");
    }
    let (ns, l) = (tables[0].len(), tables[0].first().map_or(0, Vec::len));
    if tables.iter().any(|t| t.len() != ns || t.iter().any(|r| r.len() != l)) {
        return domain("error tables have different shapes");
    }
    let mut best = EliminationResult { averaged_max_error: f64::NEG_INFINITY, message: 0, state_index: 0 };
    for s in 0..ns {
        for m in 0..l {
            let v = tables.iter().map(|t| t[s][m]).sum::<f64>() / tables.len() as f64;
            if v > best.averaged_max_error {
                best = EliminationResult { averaged_max_error: v, message: m, state_index: s };
            }
        }
    }
    Ok(best)
}

/// max over s^N of ē(C, s^N); equals max over (m, s^N) of the expected error of
/// the uniformly permuted code built on `base`.
pub fn permutation_code_max_error(base: &[Vec<f64>]) -> f64 {
    base.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).fold(0.0, f64::max)
}

/// Draws `count` i.i.d. codes from the uniformly permuted family of `base`
/// (error table `base[s][m]`) and averages them.
pub fn elimination_sample(base: &[Vec<f64>], count: usize, seed: u64) -> Result<EliminationResult> {
    if count == 0 || base.is_empty() {
        return domain("need at least one code and one state sequence");
    }
    let l = base[0].len();
    let mut rng = stream(seed, 5);
    let drawn: Vec<Vec<Vec<f64>>> = (0..count)
        .map(|_| {
            let p = random_permutation(&mut rng, l);
            base.iter().map(|r| p.iter().map(|&i| r[i]).collect()).collect()
        })
        .collect();
    let refs: Vec<&[Vec<f64>]> = drawn.iter().map(Vec::as_slice).collect();
    elimination_average(&refs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositivityScheme {
    pub x0: usize,
    pub x1: usize,
    pub k: usize,
    /// k·|S|; pigeonhole guarantees some state occurs at least k times.
    pub block_length: usize,
    /// Absolute typicality slack per state: half the largest row difference.
    pub deltas: Vec<f64>,
    /// Exact (error of message 0, error of message 1) when state s drives the test.
    pub per_state: Vec<(f64, f64)>,
    /// Max error over all state sequences.
    pub max_error: f64,
    pub worst_state: usize,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for i in 1..=n {
        v[i] = v[i - 1] + (i as f64).ln();
    }
    v
}

/// Probability that k i.i.d. draws from `q` have typical counts against `p`.
fn block_typical_prob(k: usize, q: &[f64], p: &[f64], delta: f64, lf: &[f64]) -> f64 {
    compositions(k, q.len())
        .iter()
        .filter(|c| counts_typical(c, p, delta, Deviation::Absolute))
        .map(|c| {
            if c.iter().zip(q).any(|(&ci, &qi)| ci > 0 && qi <= 0.0) {
                return 0.0;
            }
            let mut l = lf[k];
            for (&ci, &qi) in c.iter().zip(q) {
                l -= lf[ci];
                if ci > 0 {
                    l += ci as f64 * qi.ln();
                }
            }
            l.exp()
        })
        .sum()
}

/// Two-codeword repetition code with a per-state typicality test.
pub fn positivity_two_codeword_scheme(family: &ChannelFamily, k: usize) -> Result<PositivityScheme> {
    let (x0, x1) = csr_max_error_positive(family)
        .ok_or_else(|| Error::Domain("no input pair is distinguishable under every state".into()))?;
    if k == 0 {
        return domain("k must be positive");
    }
    let lf = ln_factorials(k);
    let mut deltas = Vec::new();
    let mut per_state = Vec::new();
    for w in family.matrices() {
        let (r0, r1) = (w.row(x0), w.row(x1));
        let d = r0.iter().zip(r1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / 2.0;
        deltas.push(d);
        let e0 = 1.0 - block_typical_prob(k, r0, r0, d, &lf);
        let e1 = block_typical_prob(k, r1, r0, d, &lf);
        per_state.push((e0.clamp(0.0, 1.0), e1.clamp(0.0, 1.0)));
    }
    let (mut max_error, mut worst_state) = (0.0, 0);
    for (s, &(a, b)) in per_state.iter().enumerate() {
        if a.max(b) > max_error {
            max_error = a.max(b);
            worst_state = s;
        }
    }
    Ok(PositivityScheme { x0, x1, k, block_length: k * family.num_states(), deltas, per_state, max_error, worst_state })
}

impl PositivityScheme {
    pub fn codeword(&self, b: usize) -> Vec<usize> {
        vec![if b == 0 { self.x0 } else { self.x1 }; self.block_length]
    }

    /// Decodes with the smallest state occurring at least k times.
    pub fn decode(&self, family: &ChannelFamily, y: &[usize], s: &[usize]) -> usize {
        let ns = family.num_states();
        let mut counts = vec![0; ns];
        for &t in s {
            counts[t] += 1;
        }
        let s0 = (0..ns).find(|&t| counts[t] >= self.k).expect("pigeonhole");
        let mut c = vec![0; family.num_outputs()];
        for (i, _) in s.iter().enumerate().filter(|&(_, &t)| t == s0).take(self.k) {
            c[y[i]] += 1;
        }
        if counts_typical(&c, family.matrix(s0).row(self.x0), self.deltas[s0], Deviation::Absolute) {
            0
        } else {
            1
        }
    }

    /// Empirical max-over-messages error with uniformly random state sequences.
    pub fn monte_carlo(&self, family: &ChannelFamily, trials: usize, seed: u64) -> (f64, f64) {
        let mut rng = stream(seed, 6);
        let mut err = [0usize; 2];
        let n = self.block_length;
        for _ in 0..trials {
            let s: Vec<usize> = (0..n).map(|_| rng.random_range(0..family.num_states())).collect();
            for b in 0..2 {
                let y = sample_output(&mut rng, family, &self.codeword(b), &s);
                if self.decode(family, &y, &s) != b {
                    err[b] += 1;
                }
            }
        }
        let t = trials.max(1) as f64;
        (err[0] as f64 / t, err[1] as f64 / t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductCheck {
    pub expectation: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Builds binary A_1..A_L with past-dependent conditionals and nonnegative
/// f_m satisfying E[f_m(A_m) | A^{m−1}] < b, then computes E[∏ f_m(A_m)]
/// exactly and compares it with b^L.
pub fn product_expectation_check(l: usize, b: f64, seed: u64) -> Result<ProductCheck> {
    if l == 0 || l > 20 || b <= 0.0 {
        return domain("need 1 ≤ L ≤ 20 and b > 0");
    }
    let mut rng = stream(seed, 7);
    let mut f = Vec::with_capacity(l);
    // P(A_m = 1 | past) for every past prefix, by prefix index
    let mut cond: Vec<Vec<f64>> = Vec::with_capacity(l);
    for m in 0..l {
        let lo = rng.random::<f64>() * b;
        let hi = lo + rng.random::<f64>() * 3.0 * b;
        let pair = if rng.random::<bool>() { [lo, hi] } else { [hi, lo] };
        let sup = if hi > lo { ((b - lo) / (hi - lo)).min(1.0) } else { 1.0 };
        let p_hi: Vec<f64> = (0..1usize << m).map(|_| sup * rng.random::<f64>()).collect();
        let p1: Vec<f64> = p_hi.iter().map(|&p| if pair[1] == hi { p } else { 1.0 - p }).collect();
        f.push(pair);
        cond.push(p1);
    }
    let mut expectation = 0.0;
    for_each_word(2, l, |_, a| {
        let (mut prob, mut prod, mut prefix) = (1.0, 1.0, 0usize);
        for m in 0..l {
            let p1 = cond[m][prefix];
            prob *= if a[m] == 1 { p1 } else { 1.0 - p1 };
            prod *= f[m][a[m]];
            prefix = prefix * 2 + a[m];
        }
        expectation += prob * prod;
    });
    let bound = b.powi(l as i32);
    Ok(ProductCheck { expectation, bound, holds: expectation < bound })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateResult {
    pub state: Vec<usize>,
    pub average_error: f64,
    pub max_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub seed: u64,
    pub block_length: usize,
    pub codebook_size: usize,
    pub jammer: Jammer,
    /// Every s^N for the exhaustive jammer; the two worst found otherwise.
    pub per_state: Vec<StateResult>,
    pub worst_average: WorstCase,
    pub worst_maximal: WorstCase,
    /// Monte Carlo ē at the worst-average state: (estimate, 3σ radius, trials).
    pub monte_carlo: Option<(f64, f64, usize)>,
}

pub fn simulate(
    codebook: &Codebook,
    family: &ChannelFamily,
    dec: &dyn Decoder,
    jammer: Jammer,
    trials: usize,
    seed: u64,
) -> Result<SimulationReport> {
    let worst_average = worst_state_error(codebook, family, dec, ErrorKind::Average, jammer)?;
    let worst_maximal = worst_state_error(codebook, family, dec, ErrorKind::Maximal, jammer)?;
    let states = match jammer {
        Jammer::Exhaustive => state_sequences(family.num_states(), codebook.block_length(), StateSearch::Exhaustive)?,
        Jammer::Greedy { .. } => vec![worst_average.state.clone(), worst_maximal.state.clone()],
    };
    let per_state = states
        .into_iter()
        .map(|s| {
            let e = message_errors(codebook, family, dec, &s)?;
            Ok(StateResult { average_error: score(&e, ErrorKind::Average), max_error: score(&e, ErrorKind::Maximal), state: s })
        })
        .collect::<Result<Vec<_>>>()?;
    let monte_carlo = if trials > 0 {
        let (p, r) = average_error_monte_carlo(codebook, family, dec, &worst_average.state, trials, seed)?;
        Some((p, r, trials))
    } else {
        None
    };
    Ok(SimulationReport {
        seed,
        block_length: codebook.block_length(),
        codebook_size: codebook.len(),
        jammer,
        per_state,
        worst_average,
        worst_maximal,
        monte_carlo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{bsc, StochasticMatrix};

    fn noiseless() -> ChannelFamily {
        ChannelFamily::from_matrices(vec![StochasticMatrix::identity(2), bsc(1.0)]).unwrap()
    }

    #[test]
    fn generated_codebooks_are_reproducible() {
        let a = generate_codebook(&[0.5, 0.5], 8, 4, 9).unwrap();
        assert_eq!(a, generate_codebook(&[0.5, 0.5], 8, 4, 9).unwrap());
        let c = generate_codebook(&[0.0, 1.0], 5, 3, 1).unwrap();
        assert!(c.words().iter().flatten().all(|&v| v == 1));
    }

    #[test]
    fn noiseless_decoding_is_exact() {
        let f = noiseless();
        let c = Codebook::new(vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![1, 1, 0, 0]], 2).unwrap();
        let p = DecoderParams::new(TypicalityParams::new(1.0, 0.5).unwrap(), 0.5);
        let d = build_csr_decoder(&c, &f, &[0.5, 0.5], p).unwrap();
        for_each_word(2, 4, |_, s| {
            assert!(message_errors(&c, &f, &d, s).unwrap().iter().all(|&e| e == 0.0));
        });
    }

    #[test]
    fn atypical_codeword_has_error_one() {
        let f = ChannelFamily::from_matrices(vec![bsc(0.1)]).unwrap();
        let c = Codebook::new(vec![vec![0, 0, 0, 0, 0, 0], vec![0, 1, 0, 1, 1, 0]], 2).unwrap();
        let p = DecoderParams::new(TypicalityParams::new(0.5, 0.5).unwrap(), 0.05);
        let d = build_csr_decoder(&c, &f, &[0.5, 0.5], p).unwrap();
        let e = message_errors(&c, &f, &d, &[0; 6]).unwrap();
        assert_eq!(e[0], 1.0);
        assert!(e[1] < 1.0);
    }

    #[test]
    fn permutations_enumerate_in_order() {
        let mut p = vec![0, 1, 2, 3];
        let mut n = 1;
        while next_permutation(&mut p) {
            n += 1;
        }
        assert_eq!(n, 24);
        assert_eq!(p, vec![3, 2, 1, 0]);
    }

    #[test]
    fn replay_matches_table() {
        let f = ChannelFamily::from_matrices(vec![bsc(0.1), bsc(0.2)]).unwrap();
        let c = generate_codebook(&[0.5, 0.5], 6, 4, 3).unwrap();
        let mut p = DecoderParams::new(TypicalityParams::new(0.9, 0.5).unwrap(), 0.01);
        let s = [0, 1, 0, 1, 1, 0];
        let table = build_decoding_sets(&c, &f, &s, &[0.5, 0.5], &p).unwrap();
        p.replay_samples = 20_000;
        let mut replay = table.clone();
        if let SetRepr::Table { .. } = replay.repr {
            replay.repr = SetRepr::Replay {
                words: c.words().to_vec(),
                s: s.to_vec(),
                blocks: Blocks::new(&s, 2, 0.5),
                laws: Laws::new(&[0.5, 0.5], &f),
                params: p.typicality.doubled(),
            };
        }
        for_each_word(2, 6, |_, y| assert_eq!(table.decode(y), replay.decode(y)));
    }

    #[test]
    fn product_bound_holds() {
        for seed in 0..5 {
            let r = product_expectation_check(8, 0.7, seed).unwrap();
            assert!(r.holds, "{r:?}");
        }
    }
}
