//! Capacity formulas and secrecy-capacity bounds for AVCs and AVWCs.
//!
//! Every solver returns a [`BoundResult`] whose reported arguments reproduce
//! the value when passed to the matching `eval_*` function.

use crate::channel::{mix_unchecked, ChannelFamily, CostModel, StochasticMatrix, WiretapPair, SUM_TOL};
use crate::error::{domain, Result};
use crate::info::{mi_unchecked, PrefixInput};
use crate::optim::{default_tol, maximize_concave, maximize_prefix, minimize_convex, PrefixSearch};
use crate::words::simplex_grid;

/// Duality gap above which a saddle solve is flagged as not converged.
pub const GAP_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Flag {
    NonConverged,
    InnerMaxHeuristic,
    CardinalityAssumed,
    Clamped,
    NonConcave,
}

impl Flag {
    pub fn name(self) -> &'static str {
        match self {
            Flag::NonConverged => "non-converged",
            Flag::InnerMaxHeuristic => "inner-max-heuristic",
            Flag::CardinalityAssumed => "cardinality-assumed",
            Flag::Clamped => "clamped",
            Flag::NonConcave => "non-concave",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Argmax {
    Input(Vec<f64>),
    Prefix(PrefixInput),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub evaluations: usize,
    /// Upper certificate minus achieved value, when a certificate exists.
    pub gap: Option<f64>,
    pub grid_resolution: Option<usize>,
    pub flags: Vec<Flag>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    /// max(raw_value, 0).
    pub value: f64,
    pub raw_value: f64,
    pub argmax: Argmax,
    /// Minimising mixture of the main family, when the adversary mixes.
    pub worst_q: Option<Vec<f64>>,
    /// Minimising states: the wiretap state, or (main, wiretap) for CSR forms.
    pub worst_s: Vec<usize>,
    pub diagnostics: Diagnostics,
}

impl BoundResult {
    fn new(raw: f64, argmax: Argmax, worst_q: Option<Vec<f64>>, worst_s: Vec<usize>, mut diagnostics: Diagnostics) -> Self {
        if raw < 0.0 {
            diagnostics.flags.push(Flag::Clamped);
        }
        diagnostics.flags.sort();
        diagnostics.flags.dedup();
        Self { value: raw.max(0.0), raw_value: raw, argmax, worst_q, worst_s, diagnostics }
    }

    pub fn has_flag(&self, f: Flag) -> bool {
        self.diagnostics.flags.contains(&f)
    }

    pub fn converged(&self) -> bool {
        !self.has_flag(Flag::NonConverged)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaResult {
    /// I(P;W) at the final input law.
    pub lower: f64,
    /// max_x D(W_x ‖ P_Y) ≥ capacity.
    pub upper: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
}

/// Blahut–Arimoto iteration until the upper certificate is within `tol`.
pub fn blahut_arimoto(w: &StochasticMatrix, tol: f64, max_iter: usize) -> BaResult {
    let (nx, ny) = (w.rows(), w.cols());
    let mut p = vec![1.0 / nx as f64; nx];
    let mut d = vec![0.0; nx];
    let mut iterations = 0;
    loop {
        let py = crate::info::output_unchecked(&p, w.as_slice(), ny);
        for x in 0..nx {
            let mut acc = 0.0;
            for y in 0..ny {
                let v = w.get(x, y);
                if v > 0.0 {
                    acc += v * (v / py[y]).log2();
                }
            }
            d[x] = acc;
        }
        let lower = mi_unchecked(&p, w.as_slice(), ny);
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(lower);
        if upper - lower <= tol || iterations >= max_iter {
            return BaResult { lower, upper, input: p, iterations };
        }
        let mut z = 0.0;
        for x in 0..nx {
            p[x] *= d[x].exp2();
            z += p[x];
        }
        for v in p.iter_mut() {
            *v /= z;
        }
        iterations += 1;
    }
}

/// Capacity of a single DMC.
pub fn dmc_capacity(w: &StochasticMatrix) -> BaResult {
    blahut_arimoto(w, 1e-10, 200_000)
}

fn ba_upper(w: &StochasticMatrix) -> f64 {
    blahut_arimoto(w, 1e-9, 50_000).upper
}

fn check_input(p: &[f64], n: usize) -> Result<()> {
    if p.len() != n || p.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return domain("argument is not a distribution of the right size");
    }
    Ok(())
}

/// min over q of I(P; Y_q), with the minimising q.
fn min_over_mixtures(px: &[f64], family: &ChannelFamily, evals: &mut usize) -> (f64, Vec<f64>) {
    let ns = family.num_states();
    let ny = family.num_outputs();
    if ns == 1 {
        *evals += 1;
        return (mi_unchecked(px, family.matrix(0).as_slice(), ny), vec![1.0]);
    }
    let r = minimize_convex(ns, |q| mi_unchecked(px, mix_unchecked(family.matrices(), q).as_slice(), ny), default_tol(ns));
    *evals += r.evaluations;
    (r.value, r.point)
}

/// min_{q ∈ P(S)} I(P; Y_q).
pub fn eval_avc_random(family: &ChannelFamily, px: &[f64]) -> Result<f64> {
    check_input(px, family.num_inputs())?;
    Ok(min_over_mixtures(px, family, &mut 0).0)
}

/// max_X min_q I(X; Y_q): random-code capacity of the AVC.
pub fn avc_capacity_random(family: &ChannelFamily) -> BoundResult {
    let (nx, ns) = (family.num_inputs(), family.num_states());
    let mut evals = 0;
    let outer = maximize_concave(nx, |p| min_over_mixtures(p, family, &mut evals).0, default_tol(nx));
    let (lower, worst_q) = min_over_mixtures(&outer.point, family, &mut evals);
    let cert = minimize_convex(ns, |q| ba_upper(&mix_unchecked(family.matrices(), q)), default_tol(ns));
    let gap = (cert.value - lower).max(0.0);
    let mut flags = Vec::new();
    if gap > GAP_TOL {
        flags.push(Flag::NonConverged);
    }
    let d = Diagnostics { evaluations: evals + cert.evaluations, gap: Some(gap), grid_resolution: None, flags };
    BoundResult::new(lower, Argmax::Input(outer.point), Some(worst_q), vec![], d)
}

fn min_over_states(px: &[f64], family: &ChannelFamily) -> (f64, usize) {
    let ny = family.num_outputs();
    let mut best = (f64::INFINITY, 0);
    for (s, w) in family.matrices().iter().enumerate() {
        let v = mi_unchecked(px, w.as_slice(), ny);
        if v < best.0 {
            best = (v, s);
        }
    }
    best
}

/// min_s I(P; Y_s).
pub fn eval_avc_csr(family: &ChannelFamily, px: &[f64]) -> Result<f64> {
    check_input(px, family.num_inputs())?;
    Ok(min_over_states(px, family).0)
}

/// Channel x ↦ (s, y) with probability λ_s W_s(y|x).
fn joint_state_channel(family: &ChannelFamily, lambda: &[f64]) -> StochasticMatrix {
    let (nx, ny, ns) = (family.num_inputs(), family.num_outputs(), family.num_states());
    let mut data = vec![0.0; nx * ns * ny];
    for x in 0..nx {
        for s in 0..ns {
            for y in 0..ny {
                data[x * ns * ny + s * ny + y] = lambda[s] * family.prob(s, x, y);
            }
        }
    }
    StochasticMatrix::from_flat_unchecked(nx, ns * ny, data)
}

/// max_X min_s I(X; Y_s): capacity of the AVC with receiver state knowledge.
/// The certificate is min over λ of the capacity of x ↦ (s, y) with weights λ.
pub fn avc_csr_capacity(family: &ChannelFamily) -> BoundResult {
    let (nx, ns) = (family.num_inputs(), family.num_states());
    let outer = maximize_concave(nx, |p| min_over_states(p, family).0, default_tol(nx));
    let (lower, s) = min_over_states(&outer.point, family);
    let cert = minimize_convex(ns, |l| ba_upper(&joint_state_channel(family, l)), default_tol(ns));
    let gap = (cert.value - lower).max(0.0);
    let mut flags = Vec::new();
    if gap > GAP_TOL {
        flags.push(Flag::NonConverged);
    }
    let d = Diagnostics { evaluations: outer.evaluations + cert.evaluations, gap: Some(gap), grid_resolution: None, flags };
    BoundResult::new(lower, Argmax::Input(outer.point), None, vec![s], d)
}

/// Which mixtures the main-channel adversary may use.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintSet {
    AllStates,
    /// P(S, Λ) = {q : Σ q(s)c(s) ≤ Λ}.
    CostBudget(CostModel),
    /// Convex hull of the given state types.
    TypeSet(Vec<Vec<f64>>),
    SingleType(Vec<f64>),
}

impl ConstraintSet {
    /// Vertices of the constraint polytope inside P(S).
    pub fn vertices(&self, ns: usize) -> Result<Vec<Vec<f64>>> {
        let pure = |s: usize| -> Vec<f64> { (0..ns).map(|i| if i == s { 1.0 } else { 0.0 }).collect() };
        let check = |q: &Vec<f64>| -> Result<()> {
            if q.len() != ns || q.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (q.iter().sum::<f64>() - 1.0).abs() > SUM_TOL {
                return domain("constraint type is not a distribution over the state set");
            }
            Ok(())
        };
        match self {
            ConstraintSet::AllStates => Ok((0..ns).map(pure).collect()),
            ConstraintSet::CostBudget(c) => {
                if c.costs().len() != ns {
                    return domain("cost model does not match the state set");
                }
                let (k, lam) = (c.costs(), c.budget());
                let mut v: Vec<Vec<f64>> = (0..ns).filter(|&s| k[s] <= lam).map(pure).collect();
                for s in 0..ns {
                    for t in 0..ns {
                        if k[s] < lam && k[t] > lam {
                            let th = (k[t] - lam) / (k[t] - k[s]);
                            let mut q = vec![0.0; ns];
                            q[s] = th;
                            q[t] = 1.0 - th;
                            v.push(q);
                        }
                    }
                }
                if v.is_empty() {
                    return domain(format!("cost budget {lam} admits no state distribution"));
                }
                Ok(v)
            }
            ConstraintSet::TypeSet(ts) => {
                if ts.is_empty() {
                    return domain("empty type set");
                }
                ts.iter().try_for_each(check)?;
                Ok(ts.clone())
            }
            ConstraintSet::SingleType(q) => {
                check(q)?;
                Ok(vec![q.clone()])
            }
        }
    }
}

/// Per-state U→Y channels for a prefix, flattened row-major.
fn composed(p: &PrefixInput, family: &ChannelFamily) -> Vec<StochasticMatrix> {
    family
        .matrices()
        .iter()
        .map(|w| StochasticMatrix::from_flat_unchecked(p.aux_size(), w.cols(), p.compose(w)))
        .collect()
}

fn state_infos(p: &PrefixInput, family: &ChannelFamily) -> Vec<f64> {
    composed(p, family).iter().map(|c| mi_unchecked(p.weights(), c.as_slice(), c.cols())).collect()
}

/// min over the hull of `vertices` of I(U; Y_q), with the minimiser.
fn min_main_over_hull(p: &PrefixInput, family: &ChannelFamily, vertices: &[Vec<f64>], evals: &mut usize) -> (f64, Vec<f64>) {
    let per_state = composed(p, family);
    let w = p.weights();
    let at = |q: &[f64]| mi_unchecked(w, mix_unchecked(&per_state, q).as_slice(), family.num_outputs());
    let to_q = |alpha: &[f64]| -> Vec<f64> {
        let mut q = vec![0.0; family.num_states()];
        for (a, v) in alpha.iter().zip(vertices) {
            for (qi, vi) in q.iter_mut().zip(v) {
                *qi += a * vi;
            }
        }
        q
    };
    if vertices.len() == 1 {
        *evals += 1;
        return (at(&vertices[0]), vertices[0].clone());
    }
    let r = minimize_convex(vertices.len(), |alpha| at(&to_q(alpha)), default_tol(vertices.len()));
    *evals += r.evaluations;
    (r.value, to_q(&r.point))
}

/// max over vertices v of Σ_s v(s) I(U; Z_s), with the maximising vertex index.
fn max_wiretap_over_vertices(p: &PrefixInput, wiretap: &ChannelFamily, vertices: &[Vec<f64>]) -> (f64, usize) {
    let z = state_infos(p, wiretap);
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, v) in vertices.iter().enumerate() {
        let val: f64 = v.iter().zip(&z).map(|(a, b)| a * b).sum();
        if val > best.0 {
            best = (val, i);
        }
    }
    best
}

fn check_cardinality(pair: &WiretapPair, card: usize) -> Result<()> {
    if card == 0 || card > pair.num_inputs() {
        return domain(format!("prefix cardinality must lie in 1..={}, got {card}", pair.num_inputs()));
    }
    Ok(())
}

fn check_prefix(pair: &WiretapPair, p: &PrefixInput) -> Result<()> {
    if p.input_size() != pair.num_inputs() {
        return domain("prefix input alphabet does not match the pair");
    }
    Ok(())
}

/// min_{q ∈ C} I(U;Y_q) − max_{q′ ∈ C} Ī_{q′}(U;Z_S) at a given prefix.
pub fn eval_avwc_lower(pair: &WiretapPair, constraint: &ConstraintSet, p: &PrefixInput) -> Result<f64> {
    check_prefix(pair, p)?;
    let v = constraint.vertices(pair.num_states())?;
    Ok(min_main_over_hull(p, pair.main(), &v, &mut 0).0 - max_wiretap_over_vertices(p, pair.wiretap(), &v).0)
}

/// Lower bound on the random-code secrecy capacity of the AVWC, optionally
/// with a constrained adversary.
pub fn avwc_lower_bound(
    pair: &WiretapPair,
    constraint: &ConstraintSet,
    prefix_cardinality: usize,
    search: &PrefixSearch,
) -> Result<BoundResult> {
    check_cardinality(pair, prefix_cardinality)?;
    let vertices = constraint.vertices(pair.num_states())?;
    let evals = std::cell::Cell::new(0usize);
    let objective = |p: &PrefixInput| {
        let mut e = 0;
        let (m, _) = min_main_over_hull(p, pair.main(), &vertices, &mut e);
        evals.set(evals.get() + e);
        m - max_wiretap_over_vertices(p, pair.wiretap(), &vertices).0
    };
    let opt = maximize_prefix(pair.num_inputs(), prefix_cardinality, &objective, search);
    let (_, q) = min_main_over_hull(&opt.prefix, pair.main(), &vertices, &mut 0);
    let (_, iv) = max_wiretap_over_vertices(&opt.prefix, pair.wiretap(), &vertices);
    let worst_s = match constraint {
        ConstraintSet::AllStates => vec![iv],
        _ => vec![],
    };
    let d = Diagnostics {
        evaluations: opt.evaluations + evals.get(),
        gap: None,
        grid_resolution: Some(opt.grid_resolution),
        flags: vec![],
    };
    Ok(BoundResult::new(opt.value, Argmax::Prefix(opt.prefix), Some(q), worst_s, d))
}

fn csr_lower_objective(pair: &WiretapPair, p: &PrefixInput) -> (f64, usize, usize) {
    let y = state_infos(p, pair.main());
    let z = state_infos(p, pair.wiretap());
    let (mut s, mut sp) = (0, 0);
    for i in 0..y.len() {
        if y[i] < y[s] {
            s = i;
        }
        if z[i] > z[sp] {
            sp = i;
        }
    }
    (y[s] - z[sp], s, sp)
}

/// min_s I(U;Y_s) − max_{s′} I(U;Z_{s′}) at a given prefix.
pub fn eval_avwc_csr_lower(pair: &WiretapPair, p: &PrefixInput) -> Result<f64> {
    check_prefix(pair, p)?;
    Ok(csr_lower_objective(pair, p).0)
}

/// Lower bound on the secrecy capacity of the AVWC with receiver state knowledge.
pub fn avwc_csr_lower_bound(pair: &WiretapPair, prefix_cardinality: usize, search: &PrefixSearch) -> Result<BoundResult> {
    check_cardinality(pair, prefix_cardinality)?;
    let objective = |p: &PrefixInput| csr_lower_objective(pair, p).0;
    let opt = maximize_prefix(pair.num_inputs(), prefix_cardinality, &objective, search);
    let (_, s, sp) = csr_lower_objective(pair, &opt.prefix);
    let d = Diagnostics { evaluations: opt.evaluations, gap: None, grid_resolution: Some(opt.grid_resolution), flags: vec![] };
    Ok(BoundResult::new(opt.value, Argmax::Prefix(opt.prefix), None, vec![s, sp], d))
}

/// max over U with |U| ≤ `card` of I(U;Y) − I(U;Z) for one pair of DMCs.
/// Binary inputs use the lower convex envelope of F(P) = I(P,W) − I(P,V) on a
/// fine grid, which is exact up to grid resolution; larger inputs fall back to
/// the generic prefix search.
pub fn max_secrecy_prefix(w: &StochasticMatrix, v: &StochasticMatrix, card: usize, search: &PrefixSearch) -> (PrefixInput, f64, usize) {
    let nx = w.rows();
    let f = |p: &[f64]| mi_unchecked(p, w.as_slice(), w.cols()) - mi_unchecked(p, v.as_slice(), v.cols());
    if card <= 1 {
        return (PrefixInput::from_parts_unchecked(vec![1.0], vec![vec![1.0 / nx as f64; nx]]), 0.0, 0);
    }
    if nx == 2 {
        return secrecy_envelope_binary(&f, 4000);
    }
    let objective = |p: &PrefixInput| {
        let m = p.marginal();
        f(&m) - p.weights().iter().zip(p.rows()).map(|(a, r)| a * f(r)).sum::<f64>()
    };
    let opt = maximize_prefix(nx, card, &objective, search);
    (opt.prefix, opt.value, opt.evaluations)
}

fn secrecy_envelope_binary(f: &dyn Fn(&[f64]) -> f64, m: usize) -> (PrefixInput, f64, usize) {
    let xs: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&t| f(&[t, 1.0 - t])).collect();
    // lower convex hull, monotone chain
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..=m {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[b] - xs[a]) * (fs[i] - fs[a]) - (fs[b] - fs[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut best = (0.0, 0usize, 0usize, 0usize);
    let mut seg = 0;
    for i in 0..=m {
        while seg + 1 < hull.len() - 1 && hull[seg + 1] <= i {
            seg += 1;
        }
        let (a, b) = (hull[seg], hull[(seg + 1).min(hull.len() - 1)]);
        if a == b || i <= a || i >= b {
            continue;
        }
        let lam = (xs[b] - xs[i]) / (xs[b] - xs[a]);
        let env = lam * fs[a] + (1.0 - lam) * fs[b];
        let gap = fs[i] - env;
        if gap > best.0 {
            best = (gap, i, a, b);
        }
    }
    let (gap, i, a, b) = best;
    if gap <= 0.0 {
        return (PrefixInput::from_parts_unchecked(vec![1.0], vec![vec![0.5, 0.5]]), 0.0, m + 1);
    }
    let lam = (xs[b] - xs[i]) / (xs[b] - xs[a]);
    let p = PrefixInput::from_parts_unchecked(
        vec![lam, 1.0 - lam],
        vec![vec![xs[a], 1.0 - xs[a]], vec![xs[b], 1.0 - xs[b]]],
    );
    let exact = f(&p.marginal()) - p.weights().iter().zip(p.rows()).map(|(w, r)| w * f(r)).sum::<f64>();
    (p, exact.max(0.0), m + 1)
}

fn q_grid_resolution(ns: usize) -> usize {
    match ns {
        0..=2 => 32,
        3 => 8,
        _ => 4,
    }
}

/// Upper bound: min over (q, s) of max over U of I(U;Y_q) − I(U;Z_s), or its
/// CSR form min over (s, s′). The inner maximum is a search, so the value may
/// undershoot the true bound and carries `inner-max-heuristic`.
pub fn avwc_upper_bound(pair: &WiretapPair, csr: bool, prefix_cardinality: usize, search: &PrefixSearch) -> Result<BoundResult> {
    check_cardinality(pair, prefix_cardinality)?;
    let ns = pair.num_states();
    let (wm, vm) = (pair.main().matrices(), pair.wiretap().matrices());
    let mut evals = 0usize;
    let mut best: Option<(f64, PrefixInput, Option<Vec<f64>>, Vec<usize>)> = None;
    let offer = |val: f64, p: PrefixInput, q: Option<Vec<f64>>, s: Vec<usize>, best: &mut Option<(f64, PrefixInput, Option<Vec<f64>>, Vec<usize>)>| {
        if best.as_ref().is_none_or(|b| val < b.0 - 1e-12) {
            *best = Some((val, p, q, s));
        }
    };
    let mut res = None;
    if csr {
        for s in 0..ns {
            for sp in 0..ns {
                let (p, v, e) = max_secrecy_prefix(&wm[s], &vm[sp], prefix_cardinality, search);
                evals += e;
                offer(v, p, None, vec![s, sp], &mut best);
            }
        }
    } else {
        let r = q_grid_resolution(ns);
        res = Some(r);
        for s in 0..ns {
            let mut g = |q: &[f64]| {
                let (p, v, e) = max_secrecy_prefix(&mix_unchecked(wm, q), &vm[s], prefix_cardinality, search);
                evals += e;
                (p, v)
            };
            let mut local: Option<(f64, PrefixInput, Vec<f64>)> = None;
            for q in simplex_grid(ns, r) {
                let (p, v) = g(&q);
                if local.as_ref().is_none_or(|b| v < b.0 - 1e-12) {
                    local = Some((v, p, q));
                }
            }
            let refined = minimize_convex(ns, |q| g(q).1, default_tol(ns).max(1e-8));
            let (p, v) = g(&refined.point);
            if v < local.as_ref().unwrap().0 - 1e-12 {
                local = Some((v, p, refined.point));
            }
            let (v, p, q) = local.unwrap();
            offer(v, p, Some(q), vec![s], &mut best);
        }
    }
    let (val, p, q, s) = best.unwrap();
    let flags = vec![Flag::InnerMaxHeuristic, Flag::CardinalityAssumed];
    let d = Diagnostics { evaluations: evals, gap: None, grid_resolution: res, flags };
    Ok(BoundResult::new(val, Argmax::Prefix(p), q, s, d))
}

fn less_noisy_objective(pair: &WiretapPair, csr: bool, px: &[f64], evals: &mut usize) -> (f64, Option<Vec<f64>>, Vec<usize>) {
    let (main, wiretap) = (pair.main(), pair.wiretap());
    let nz = wiretap.num_outputs();
    let z: Vec<f64> = wiretap.matrices().iter().map(|v| mi_unchecked(px, v.as_slice(), nz)).collect();
    let sp = (0..z.len()).fold(0, |b, i| if z[i] > z[b] { i } else { b });
    if csr {
        let (y, s) = min_over_states(px, main);
        *evals += 1;
        (y - z[sp], None, vec![s, sp])
    } else {
        let (y, q) = min_over_mixtures(px, main, evals);
        (y - z[sp], Some(q), vec![sp])
    }
}

/// max_X of min over (q, s) [or (s, s′) with `csr`] of I(X;Y) − I(X;Z) at a given input.
pub fn eval_less_noisy(pair: &WiretapPair, csr: bool, px: &[f64]) -> Result<f64> {
    check_input(px, pair.num_inputs())?;
    Ok(less_noisy_objective(pair, csr, px, &mut 0).0)
}

/// Secrecy capacity formula for less-noisy pairs. The less-noisy hypothesis is
/// the caller's to establish (see `order::classify_less_noisy`). The nested
/// search is cross-checked on a lattice; disagreement is flagged `non-concave`.
pub fn less_noisy_secrecy_capacity(pair: &WiretapPair, csr: bool) -> BoundResult {
    let nx = pair.num_inputs();
    let mut evals = 0usize;
    let nested = maximize_concave(nx, |p| less_noisy_objective(pair, csr, p, &mut evals).0, default_tol(nx));
    let r = match nx {
        0..=2 => 64,
        3 => 16,
        4 => 6,
        _ => 3,
    };
    let mut best = (nested.value, nested.point.clone());
    let mut flags = Vec::new();
    for p in simplex_grid(nx, r) {
        let v = less_noisy_objective(pair, csr, &p, &mut evals).0;
        if v > best.0 + 1e-9 {
            best = (v, p);
        }
    }
    if best.0 > nested.value + 1e-9 {
        flags.push(Flag::NonConcave);
    }
    let (raw, q, s) = less_noisy_objective(pair, csr, &best.1, &mut evals);
    let d = Diagnostics { evaluations: evals, gap: None, grid_resolution: Some(r), flags };
    BoundResult::new(raw, Argmax::Input(best.1), q, s, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bsc;
    use crate::info::h2;

    #[test]
    fn ba_bsc() {
        let r = dmc_capacity(&bsc(0.1));
        assert!((r.lower - (1.0 - h2(0.1))).abs() < 1e-9);
        assert!(r.upper - r.lower <= 1e-10);
    }

    #[test]
    fn single_state_random_capacity() {
        let f = ChannelFamily::from_matrices(vec![bsc(0.1)]).unwrap();
        let r = avc_capacity_random(&f);
        assert!((r.value - (1.0 - h2(0.1))).abs() < 1e-6);
        assert!(r.converged());
    }

    #[test]
    fn cost_vertices() {
        let c = CostModel::new(vec![0.0, 1.0, 2.0], 0.5).unwrap();
        let v = ConstraintSet::CostBudget(c).vertices(3).unwrap();
        assert_eq!(v.len(), 3);
        let c = CostModel::new(vec![1.0, 2.0], 0.5).unwrap();
        assert!(ConstraintSet::CostBudget(c).vertices(2).is_err());
    }

    #[test]
    fn envelope_matches_generic_search() {
        let (w, v) = (bsc(0.1), bsc(0.3));
        let (_, a, _) = max_secrecy_prefix(&w, &v, 2, &PrefixSearch::default());
        // degraded pair: U = X is optimal
        assert!((a - (h2(0.3) - h2(0.1))).abs() < 1e-6, "{a}");
    }
}
