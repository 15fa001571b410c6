//! Secure partitions of a codebook against an AVC eavesdropper: B-sets,
//! almost-independent colorings, equipartition, exact leakage, and the
//! end-to-end wiretap pipeline.

use rand::Rng;

use crate::channel::{word_prob, ChannelFamily, WiretapPair};
use crate::coding::{build_csr_decoder, generate_codebook, generate_distinct_codebook, is_good_codebook, Codebook, Decoder, DecoderParams, StateSearch, MAX_STATE_SEQUENCES};
use crate::error::{domain, Error, Result};
use crate::info::{entropy, mi_unchecked};
use crate::rng::stream;
use crate::typicality::{xy_typical_raw, y_typical_raw, Blocks, Laws, TypicalityParams};
use crate::words::{checked_count, for_each_word};

/// Largest wiretap output space enumerated exactly.
pub const MAX_Z_WORDS: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    bins: Vec<Vec<usize>>,
}

impl Partition {
    /// Bins must be disjoint, nonempty and cover 0..size.
    pub fn new(bins: Vec<Vec<usize>>, size: usize) -> Result<Self> {
        let mut seen = vec![false; size];
        for b in &bins {
            if b.is_empty() {
                return domain("empty bin");
            }
            for &i in b {
                if i >= size || std::mem::replace(&mut seen[i], true) {
                    return domain("bins overlap or index outside the codebook");
                }
            }
        }
        if seen.iter().any(|&v| !v) {
            return domain("bins do not cover the codebook");
        }
        Ok(Self { bins })
    }

    /// One codeword per bin.
    pub fn singletons(size: usize) -> Self {
        Self { bins: (0..size).map(|i| vec![i]).collect() }
    }

    pub fn bins(&self) -> &[Vec<usize>] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bins.iter().map(Vec::len).collect()
    }

    pub fn is_equipartition(&self) -> bool {
        self.bins.windows(2).all(|w| w[0].len() == w[1].len())
    }

    /// Bin index of every codeword.
    pub fn labels(&self, size: usize) -> Vec<usize> {
        let mut out = vec![0; size];
        for (m, b) in self.bins.iter().enumerate() {
            for &i in b {
                out[i] = m;
            }
        }
        out
    }
}

/// Uniform-codeword joint law restricted to one state sequence: V(z^N|x^N(l), s^N)
/// for every codeword l and output word z^N.
struct WiretapLaw {
    /// `cond[z][l]`
    cond: Vec<Vec<f64>>,
}

impl WiretapLaw {
    fn new(c: &Codebook, wiretap: &ChannelFamily, s: &[usize]) -> Result<Self> {
        let nz = wiretap.num_outputs();
        let total = checked_count(nz, s.len(), MAX_Z_WORDS, "wiretap outputs")?;
        let mut cond = Vec::with_capacity(total);
        for_each_word(nz, s.len(), |_, z| cond.push(c.words().iter().map(|x| word_prob(wiretap, x, s, z)).collect()));
        Ok(Self { cond })
    }

    fn marginal(&self, z: usize) -> f64 {
        self.cond[z].iter().sum::<f64>() / self.cond[z].len() as f64
    }
}

/// B(C, s^N) = B₀ \ B₁ for one state sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct BSets {
    pub state: Vec<usize>,
    pub nu3: f64,
    /// 2^{−Nν₃/2}.
    pub threshold: f64,
    /// Ψ(C, s^N, z^N) per output word.
    pub psi: Vec<f64>,
    pub b0: Vec<bool>,
    pub b1: Vec<bool>,
    pub b: Vec<bool>,
    /// Pr{Z^N ∈ B}.
    pub prob_b: f64,
}

impl BSets {
    /// Pr{Z ∈ B} > 1 − 2·2^{−Nν₃/2}.
    pub fn meets_mass_bound(&self) -> bool {
        self.prob_b > 1.0 - 2.0 * self.threshold
    }
}

fn check_setup(c: &Codebook, wiretap: &ChannelFamily, px: &[f64], s: &[usize]) -> Result<()> {
    if c.alphabet() != wiretap.num_inputs() || px.len() != wiretap.num_inputs() {
        return domain("codebook, input law and wiretap family disagree on the input alphabet");
    }
    if s.len() != c.block_length() || s.iter().any(|&t| t >= wiretap.num_states()) {
        return domain("state sequence does not match the block length or state set");
    }
    Ok(())
}

fn b_sets_from_law(
    c: &Codebook,
    wiretap: &ChannelFamily,
    px: &[f64],
    s: &[usize],
    params: &TypicalityParams,
    nu3: f64,
    law: &WiretapLaw,
) -> BSets {
    let n = s.len();
    let nz = wiretap.num_outputs();
    let blocks = Blocks::new(s, wiretap.num_states(), params.eta);
    let laws = Laws::new(px, wiretap);
    let p2 = params.doubled();
    let threshold = (-(n as f64) * nu3 / 2.0).exp2();
    let total = law.cond.len();
    let (mut psi, mut b0, mut b1, mut b) = (vec![0.0; total], vec![false; total], vec![false; total], vec![false; total]);
    let mut prob_b = 0.0;
    for_each_word(nz, n, |zi, z| {
        let pz = law.marginal(zi);
        let row = &law.cond[zi];
        let denom: f64 = row.iter().sum();
        psi[zi] = if denom > 0.0 {
            c.words()
                .iter()
                .zip(row)
                .filter(|(x, _)| !xy_typical_raw(x, z, s, &blocks, &laws, &p2))
                .map(|(_, &v)| v)
                .sum::<f64>()
                / denom
        } else {
            1.0
        };
        b0[zi] = y_typical_raw(z, s, &blocks, &laws, &p2) && psi[zi] < threshold;
        let product: f64 = (0..n).map(|i| laws.py[s[i]][z[i]]).product();
        b1[zi] = pz < threshold * product;
        b[zi] = b0[zi] && !b1[zi];
        if b[zi] {
            prob_b += pz;
        }
    });
    BSets { state: s.to_vec(), nu3, threshold, psi, b0, b1, b, prob_b }
}

/// Builds B(C, s^N) by exact enumeration of the wiretap output space.
pub fn build_b_sets(
    c: &Codebook,
    wiretap: &ChannelFamily,
    px: &[f64],
    s: &[usize],
    params: &TypicalityParams,
    nu3: f64,
) -> Result<BSets> {
    check_setup(c, wiretap, px, s)?;
    let law = WiretapLaw::new(c, wiretap, s)?;
    Ok(b_sets_from_law(c, wiretap, px, s, params, nu3, &law))
}

/// Largest ν₃ (by bisection on [0, 4]) for which every listed state sequence
/// meets Pr{Z ∈ B} > 1 − 2·2^{−Nν₃/2}. Returns 0 if no positive value does.
pub fn calibrate_nu3(
    c: &Codebook,
    wiretap: &ChannelFamily,
    px: &[f64],
    states: &[Vec<usize>],
    params: &TypicalityParams,
) -> Result<f64> {
    let laws: Vec<WiretapLaw> = states
        .iter()
        .map(|s| {
            check_setup(c, wiretap, px, s)?;
            WiretapLaw::new(c, wiretap, s)
        })
        .collect::<Result<_>>()?;
    let holds = |nu: f64| {
        states.iter().zip(&laws).all(|(s, l)| b_sets_from_law(c, wiretap, px, s, params, nu, l).meets_mass_bound())
    };
    let (mut lo, mut hi) = (0.0, 4.0);
    if holds(hi) {
        return Ok(hi);
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Which hypotheses of the almost-independent coloring bound hold.
#[derive(Clone, Debug, PartialEq)]
pub struct ColoringHypotheses {
    /// ε < 1/9.
    pub epsilon_small: bool,
    /// Σ_{a: P(a) > 1/l} P(a) ≤ ε for every P; the worst such sum.
    pub heavy_mass: f64,
    pub heavy_mass_ok: bool,
    /// k log k ≤ ε² l / (3 log(2|P|)).
    pub k_log_k_ok: bool,
    /// P₀(x) = 1/L′ < 1/l.
    pub p0_below_cap: bool,
    /// Posterior entries of jointly typical codewords exceeding 1/l.
    pub posterior_cap_violations: usize,
}

impl ColoringHypotheses {
    pub fn all_hold(&self) -> bool {
        self.epsilon_small && self.heavy_mass_ok && self.k_log_k_ok && self.p0_below_cap
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColoringInstance {
    pub ground_size: usize,
    pub colors: usize,
    /// P₀ first, then the posteriors P_{s,z} for z ∈ B(C, s^N).
    pub family: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub l: f64,
    pub hypotheses: ColoringHypotheses,
}

impl ColoringInstance {
    /// Instance over an explicit family of distributions on the ground set.
    pub fn new(family: Vec<Vec<f64>>, colors: usize, epsilon: f64, l: f64) -> Result<Self> {
        let ground_size = family.first().map_or(0, Vec::len);
        if ground_size == 0 || family.iter().any(|p| p.len() != ground_size) {
            return domain("coloring family must be nonempty distributions over one ground set");
        }
        if colors == 0 || colors > ground_size {
            return domain(format!("need 1 ≤ k ≤ {ground_size}, got {colors}"));
        }
        let cap = 1.0 / l;
        let heavy_mass = family
            .iter()
            .map(|p| p.iter().filter(|&&v| v > cap).sum::<f64>())
            .fold(0.0, f64::max);
        let k = colors as f64;
        let hypotheses = ColoringHypotheses {
            epsilon_small: epsilon < 1.0 / 9.0,
            heavy_mass,
            heavy_mass_ok: heavy_mass <= epsilon,
            k_log_k_ok: k * k.log2() <= epsilon * epsilon * l / (3.0 * (2.0 * family.len() as f64).log2()),
            p0_below_cap: 1.0 / (ground_size as f64) < cap,
            posterior_cap_violations: 0,
        };
        Ok(Self { ground_size, colors, family, epsilon, l, hypotheses })
    }
}

/// Coloring instance from the B-sets of a codebook: ε = 2^{−Nν₃/2} and
/// l = 2^{N[R′ − max_s I(X;Z_s) − τ/2]}, or with `rate_cap` replacing the max.
pub fn build_coloring_instance(
    c: &Codebook,
    wiretap: &ChannelFamily,
    px: &[f64],
    states: &[Vec<usize>],
    params: &TypicalityParams,
    nu3: f64,
    colors: usize,
    tau: f64,
    rate_cap: Option<f64>,
) -> Result<(ColoringInstance, Vec<BSets>)> {
    let n = c.block_length() as f64;
    let lp = c.len();
    let rate = (lp as f64).log2() / n;
    let leak = rate_cap.unwrap_or_else(|| max_wiretap_information(px, wiretap));
    let l = (n * (rate - leak - tau / 2.0)).exp2();
    let mut family = vec![vec![1.0 / lp as f64; lp]];
    let mut bsets = Vec::with_capacity(states.len());
    let mut violations = 0;
    let laws = Laws::new(px, wiretap);
    let p2 = params.doubled();
    for s in states {
        check_setup(c, wiretap, px, s)?;
        let law = WiretapLaw::new(c, wiretap, s)?;
        let b = b_sets_from_law(c, wiretap, px, s, params, nu3, &law);
        let blocks = Blocks::new(s, wiretap.num_states(), params.eta);
        for_each_word(wiretap.num_outputs(), s.len(), |zi, z| {
            if !b.b[zi] {
                return;
            }
            let row = &law.cond[zi];
            let d: f64 = row.iter().sum();
            let post: Vec<f64> = row.iter().map(|v| v / d).collect();
            for (x, &p) in c.words().iter().zip(&post) {
                if p > 1.0 / l && xy_typical_raw(x, z, s, &blocks, &laws, &p2) {
                    violations += 1;
                }
            }
            family.push(post);
        });
        bsets.push(b);
    }
    let mut inst = ColoringInstance::new(family, colors, (-n * nu3 / 2.0).exp2(), l)?;
    inst.hypotheses.posterior_cap_violations = violations;
    Ok((inst, bsets))
}

pub(crate) fn max_wiretap_information(px: &[f64], wiretap: &ChannelFamily) -> f64 {
    wiretap
        .matrices()
        .iter()
        .map(|v| mi_unchecked(px, v.as_slice(), v.cols()))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coloring {
    pub colors: Vec<usize>,
    pub num_colors: usize,
    /// max over the family of Σ_i |P(f⁻¹(i)) − 1/k|.
    pub max_defect: f64,
    /// Defect below 3ε for every member.
    pub accepted: bool,
    pub draws: usize,
}

/// Σ_i |P(f⁻¹(i)) − 1/k|.
pub fn balance_defect(p: &[f64], colors: &[usize], k: usize) -> f64 {
    let mut mass = vec![0.0; k];
    for (&c, &v) in colors.iter().zip(p) {
        mass[c] += v;
    }
    mass.iter().map(|m| (m - 1.0 / k as f64).abs()).sum()
}

fn max_defect(inst: &ColoringInstance, colors: &[usize]) -> f64 {
    inst.family.iter().map(|p| balance_defect(p, colors, inst.colors)).fold(0.0, f64::max)
}

/// Uniform random colorings until one is balanced within 3ε for every member
/// of the family; otherwise the best seen, not accepted.
pub fn coloring_search(inst: &ColoringInstance, budget: usize, seed: u64) -> Coloring {
    let mut rng = stream(seed, 8);
    let mut best: Option<Coloring> = None;
    for draw in 1..=budget.max(1) {
        let colors: Vec<usize> = (0..inst.ground_size).map(|_| rng.random_range(0..inst.colors)).collect();
        let d = max_defect(inst, &colors);
        if d < 3.0 * inst.epsilon {
            return Coloring { colors, num_colors: inst.colors, max_defect: d, accepted: true, draws: draw };
        }
        if best.as_ref().is_none_or(|b| d < b.max_defect) {
            best = Some(Coloring { colors, num_colors: inst.colors, max_defect: d, accepted: false, draws: draw });
        }
    }
    let mut b = best.unwrap();
    b.draws = budget.max(1);
    b
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equipartition {
    pub partition: Partition,
    /// H(M̃ | M_f) under a uniform codeword.
    pub conditional_entropy: f64,
    pub moves: usize,
}

/// Rebalances color classes to size L′/L: repeatedly moves the highest-index
/// element of the largest class into the smallest class.
pub fn equipartition(colors: &[usize], num_bins: usize) -> Result<Equipartition> {
    let lp = colors.len();
    if num_bins == 0 || lp % num_bins != 0 {
        return domain(format!("{num_bins} bins do not divide {lp} codewords"));
    }
    if colors.iter().any(|&c| c >= num_bins) {
        return domain("color outside the bin range");
    }
    let target = lp / num_bins;
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); num_bins];
    for (i, &c) in colors.iter().enumerate() {
        bins[c].push(i);
    }
    let mut moves = 0;
    loop {
        let big = (0..num_bins).fold(0, |b, i| if bins[i].len() > bins[b].len() { i } else { b });
        let small = (0..num_bins).fold(0, |b, i| if bins[i].len() < bins[b].len() { i } else { b });
        if bins[big].len() <= target {
            break;
        }
        let x = bins[big].pop().unwrap();
        bins[small].push(x);
        bins[small].sort_unstable();
        moves += 1;
    }
    let labels: Vec<usize> = {
        let mut l = vec![0; lp];
        for (m, b) in bins.iter().enumerate() {
            for &i in b {
                l[i] = m;
            }
        }
        l
    };
    // H(M̃|M_f) = Σ_i P(M_f = i) H(M̃ | M_f = i)
    let mut h = 0.0;
    for c in 0..num_bins {
        let members: Vec<usize> = (0..lp).filter(|&i| colors[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let mut counts = vec![0.0; num_bins];
        for &i in &members {
            counts[labels[i]] += 1.0;
        }
        let k = members.len() as f64;
        let cond: Vec<f64> = counts.iter().map(|v| v / k).collect();
        h += k / lp as f64 * entropy(&cond);
    }
    Ok(Equipartition { partition: Partition { bins }, conditional_entropy: h, moves })
}

fn check_partition(c: &Codebook, p: &Partition) -> Result<()> {
    if p.labels(c.len()).len() != c.len() || p.bins().iter().flatten().count() != c.len() || p.bins().iter().flatten().any(|&i| i >= c.len()) {
        return domain("partition does not match the codebook");
    }
    Ok(())
}

fn leakage_from_law(p: &Partition, law: &WiretapLaw) -> f64 {
    let lp = law.cond.first().map_or(0, Vec::len) as f64;
    let mut i = 0.0;
    for row in &law.cond {
        let pz: f64 = row.iter().sum::<f64>() / lp;
        if pz <= 0.0 {
            continue;
        }
        for b in p.bins() {
            let pm = b.len() as f64 / lp;
            let pzm: f64 = b.iter().map(|&l| row[l]).sum::<f64>() / b.len() as f64;
            if pzm > 0.0 {
                i += pm * pzm * (pzm / pz).log2();
            }
        }
    }
    i.max(0.0)
}

/// I(M̃; Z^N) with a uniform codeword and M̃ its bin index.
pub fn leakage_exact(c: &Codebook, p: &Partition, wiretap: &ChannelFamily, s: &[usize]) -> Result<f64> {
    check_partition(c, p)?;
    if s.len() != c.block_length() || s.iter().any(|&t| t >= wiretap.num_states()) {
        return domain("state sequence does not match the block length or state set");
    }
    if c.alphabet() != wiretap.num_inputs() {
        return domain("codebook and wiretap family disagree on the input alphabet");
    }
    Ok(leakage_from_law(p, &WiretapLaw::new(c, wiretap, s)?))
}

/// State sequences of the exhaustive search, optionally restricted to the
/// given types (as per-state counts).
pub fn state_set(num_states: usize, n: usize, types: Option<&[Vec<usize>]>) -> Result<Vec<Vec<usize>>> {
    checked_count(num_states, n, MAX_STATE_SEQUENCES, "state sequences")?;
    let mut out = Vec::new();
    for_each_word(num_states, n, |_, s| {
        let keep = types.is_none_or(|ts| {
            let mut c = vec![0; num_states];
            for &t in s {
                c[t] += 1;
            }
            ts.contains(&c)
        });
        if keep {
            out.push(s.to_vec());
        }
    });
    if out.is_empty() {
        return domain("state constraint admits no sequence");
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub block_length: usize,
    pub codebook_size: usize,
    pub bins: usize,
    pub px: Vec<f64>,
    pub typicality: TypicalityParams,
    pub nu1: f64,
    pub nu2: f64,
    /// Calibrated per code when `None`.
    pub nu3: Option<f64>,
    pub tau: f64,
    /// Number of code indices.
    pub codes: usize,
    pub coloring_budget: usize,
    pub max_codebook_draws: usize,
    /// Draw codewords without repeats.
    pub distinct: bool,
    /// Restrict states to these types (per-state counts).
    pub constraint: Option<Vec<Vec<usize>>>,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(block_length: usize, codebook_size: usize, bins: usize, px: Vec<f64>, typicality: TypicalityParams) -> Self {
        Self {
            block_length,
            codebook_size,
            bins,
            px,
            typicality,
            nu1: 0.01,
            nu2: 0.01,
            nu3: None,
            tau: 0.0,
            codes: 1,
            coloring_budget: 10_000,
            max_codebook_draws: 1000,
            distinct: false,
            constraint: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeReport {
    pub codebook: Codebook,
    pub nu3: f64,
    pub coloring: Coloring,
    pub hypotheses: ColoringHypotheses,
    pub equipartition: Equipartition,
    /// Leakage of the equipartitioned code per state sequence, in `states` order.
    pub leakage: Vec<f64>,
    pub worst_leakage: f64,
    pub worst_leakage_state: Vec<usize>,
    /// Same codebook with singleton bins.
    pub unpartitioned_worst_leakage: f64,
    /// I(X^N; Z^N) at the worst leakage state.
    pub codeword_information: f64,
    pub worst_max_error: f64,
    pub worst_error_state: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub states: Vec<Vec<usize>>,
    pub codes: Vec<CodeReport>,
    /// max over s^N of the leakage averaged over code indices, I(M; Z^N | K).
    pub conditional_leakage: f64,
    pub rate_leakage_bound: f64,
}

/// Rate check L < L′·2^{−N[R_d + τ]} with R_d the largest per-letter wiretap
/// information over the admitted state types.
fn rate_check(pair: &WiretapPair, cfg: &PipelineConfig, states: &[Vec<usize>]) -> Result<f64> {
    let ns = pair.num_states();
    let info: Vec<f64> = pair.wiretap().matrices().iter().map(|v| mi_unchecked(&cfg.px, v.as_slice(), v.cols())).collect();
    let rd = match &cfg.constraint {
        None => info.iter().copied().fold(0.0, f64::max),
        Some(_) => states
            .iter()
            .map(|s| {
                let mut c = vec![0.0; ns];
                for &t in s {
                    c[t] += 1.0 / s.len() as f64;
                }
                c.iter().zip(&info).map(|(a, b)| a * b).sum::<f64>()
            })
            .fold(0.0, f64::max),
    };
    let cap = cfg.codebook_size as f64 * (-(cfg.block_length as f64) * (rd + cfg.tau)).exp2();
    if (cfg.bins as f64) >= cap {
        return domain(format!(
            "rate inequality L < L′·2^(−N[R_d+τ]) violated: L = {}, L′ = {}, N = {}, R_d = {rd:.6}, τ = {}, cap = {cap:.6}",
            cfg.bins, cfg.codebook_size, cfg.block_length, cfg.tau
        ));
    }
    Ok(rd)
}

/// Generates good codebooks, partitions each, and measures exact leakage and
/// decoding error over the admitted state sequences.
pub fn secure_pipeline(pair: &WiretapPair, cfg: &PipelineConfig) -> Result<PipelineReport> {
    let n = cfg.block_length;
    if cfg.bins == 0 || cfg.codebook_size % cfg.bins != 0 {
        return domain(format!("{} bins do not divide {} codewords", cfg.bins, cfg.codebook_size));
    }
    if cfg.codes == 0 {
        return domain("need at least one code index");
    }
    let ns = pair.num_states();
    let states = state_set(ns, n, cfg.constraint.as_deref())?;
    let rd = rate_check(pair, cfg, &states)?;
    let dparams = DecoderParams::new(cfg.typicality, cfg.nu2);
    let mut codes = Vec::with_capacity(cfg.codes);
    let mut draw = 0u64;
    for k in 0..cfg.codes {
        let codebook = loop {
            if draw as usize >= cfg.max_codebook_draws * cfg.codes {
                return Err(Error::Domain("no good codebook found within the draw budget".into()));
            }
            let seed = cfg.seed.wrapping_add(draw);
            let c = if cfg.distinct {
                generate_distinct_codebook(&cfg.px, n, cfg.codebook_size, seed)?
            } else {
                generate_codebook(&cfg.px, n, cfg.codebook_size, seed)?
            };
            draw += 1;
            if is_good_codebook(&c, &cfg.px, ns, &cfg.typicality, cfg.nu1, StateSearch::Exhaustive)?.good {
                break c;
            }
        };
        let nu3 = match cfg.nu3 {
            Some(v) => v,
            None => calibrate_nu3(&codebook, pair.wiretap(), &cfg.px, &states, &cfg.typicality)?,
        };
        let cap = cfg.constraint.as_ref().map(|_| rd);
        let (inst, _) = build_coloring_instance(&codebook, pair.wiretap(), &cfg.px, &states, &cfg.typicality, nu3, cfg.bins, cfg.tau, cap)?;
        let coloring = coloring_search(&inst, cfg.coloring_budget, cfg.seed ^ (k as u64).wrapping_mul(0x9e37_79b9));
        let eq = equipartition(&coloring.colors, cfg.bins)?;
        let singles = Partition::singletons(codebook.len());
        let dec = build_csr_decoder(&codebook, pair.main(), &cfg.px, dparams)?;
        let labels = eq.partition.labels(codebook.len());
        let mut leakage = Vec::with_capacity(states.len());
        let (mut wl, mut wls, mut ul, mut cw) = (f64::NEG_INFINITY, Vec::new(), 0.0f64, 0.0);
        let (mut we, mut wes) = (f64::NEG_INFINITY, Vec::new());
        for s in &states {
            let law = WiretapLaw::new(&codebook, pair.wiretap(), s)?;
            let v = leakage_from_law(&eq.partition, &law);
            let u = leakage_from_law(&singles, &law);
            leakage.push(v);
            ul = ul.max(u);
            if v > wl {
                wl = v;
                wls = s.clone();
                cw = u;
            }
            let e = bin_errors(&codebook, pair.main(), &dec, s, &eq.partition, &labels)?
                .into_iter()
                .fold(0.0, f64::max);
            if e > we {
                we = e;
                wes = s.clone();
            }
        }
        codes.push(CodeReport {
            codebook,
            nu3,
            coloring,
            hypotheses: inst.hypotheses,
            equipartition: eq,
            leakage,
            worst_leakage: wl,
            worst_leakage_state: wls,
            unpartitioned_worst_leakage: ul,
            codeword_information: cw,
            worst_max_error: we,
            worst_error_state: wes,
        });
    }
    let conditional_leakage = (0..states.len())
        .map(|i| codes.iter().map(|c| c.leakage[i]).sum::<f64>() / codes.len() as f64)
        .fold(0.0, f64::max);
    Ok(PipelineReport { states, codes, conditional_leakage, rate_leakage_bound: rd })
}

/// Error of each bin message: the sender picks a uniform codeword in the bin,
/// and decoding succeeds when the decoded codeword lies in the same bin.
pub fn bin_errors(
    c: &Codebook,
    main: &ChannelFamily,
    dec: &dyn Decoder,
    s: &[usize],
    p: &Partition,
    labels: &[usize],
) -> Result<Vec<f64>> {
    let sets = dec.sets(s)?;
    if !sets.is_materialized() {
        return Err(Error::Capacity("bin errors need a materialised decoding table".into()));
    }
    let mut correct = vec![0.0; c.len()];
    for_each_word(main.num_outputs(), s.len(), |_, y| {
        if let Some(d) = sets.decode(y) {
            for l in p.bins()[labels[d]].iter().copied() {
                correct[l] += word_prob(main, c.word(l), s, y);
            }
        }
    });
    Ok(p.bins()
        .iter()
        .map(|b| (1.0 - b.iter().map(|&l| correct[l]).sum::<f64>() / b.len() as f64).max(0.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bsc;

    #[test]
    fn balanced_coloring_needs_no_moves() {
        let colors = vec![0, 1, 0, 1, 1, 0];
        let e = equipartition(&colors, 2).unwrap();
        assert_eq!(e.moves, 0);
        assert_eq!(e.conditional_entropy, 0.0);
        assert!(equipartition(&colors, 4).is_err());
    }

    #[test]
    fn one_move_entropy() {
        // 17 in color 0, 15 in color 1: one element of color 0 moves
        let colors: Vec<usize> = (0..32).map(|i| usize::from(i >= 17)).collect();
        let e = equipartition(&colors, 2).unwrap();
        assert_eq!(e.moves, 1);
        assert_eq!(e.partition.sizes(), vec![16, 16]);
        let expected = 17.0 / 32.0 * crate::info::h2(1.0 / 17.0);
        assert!((e.conditional_entropy - expected).abs() < 1e-12);
    }

    #[test]
    fn useless_wiretap_leaks_nothing() {
        let f = ChannelFamily::from_matrices(vec![bsc(0.5)]).unwrap();
        let c = generate_codebook(&[0.5, 0.5], 6, 8, 4).unwrap();
        let p = Partition::new(vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]], 8).unwrap();
        assert_eq!(leakage_exact(&c, &p, &f, &[0; 6]).unwrap(), 0.0);
    }

    #[test]
    fn singleton_coloring_defect() {
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let inst = ColoringInstance::new(vec![p.clone()], 4, 0.5, 8.0).unwrap();
        let d = balance_defect(&p, &[0, 1, 2, 3], 4);
        assert!((d - 0.4).abs() < 1e-12);
        assert_eq!(inst.ground_size, 4);
    }
}
