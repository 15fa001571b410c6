//! Degradedness and less-noisy orders between channels and channel families.

use crate::channel::{mix_unchecked, ChannelFamily, StochasticMatrix, WiretapPair};
use crate::error::{domain, Result};
use crate::info::mi_unchecked;
use crate::lp::{minimize, LpOutcome};
use crate::optim::{nelder_mead, to_simplex};
use crate::rng;
use crate::words::simplex_grid;
use rand::Rng;

/// Default L∞ tolerance for degradation.
pub const DEGRADATION_TOL: f64 = 1e-9;
/// A concavity defect below this is a violation.
pub const DEFECT_TOL: f64 = -1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DegradationCheck {
    pub degraded: bool,
    /// min over stochastic V′ of ‖V − W·V′‖∞ as found by the LP.
    pub residual: f64,
    /// The best V′ (|Y|×|Z|), row-normalised.
    pub witness: StochasticMatrix,
}

/// Whether `v` is a degraded version of `w`, i.e. V = W·V′ for some stochastic V′.
/// Solved as min t subject to -t ≤ (W·V′ − V)(x,z) ≤ t.
pub fn is_degraded(v: &StochasticMatrix, w: &StochasticMatrix, tol: f64) -> Result<DegradationCheck> {
    if v.rows() != w.rows() {
        return domain("degradation test needs channels with the same input alphabet");
    }
    let (nx, ny, nz) = (w.rows(), w.cols(), v.cols());
    let nv = ny * nz;
    let t = nv;
    let sp = nv + 1;
    let sm = sp + nx * nz;
    let nvar = sm + nx * nz;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for y in 0..ny {
        let mut row = vec![0.0; nvar];
        for z in 0..nz {
            row[y * nz + z] = 1.0;
        }
        a.push(row);
        b.push(1.0);
    }
    for (sign, slack) in [(-1.0, sp), (1.0, sm)] {
        for x in 0..nx {
            for z in 0..nz {
                let mut row = vec![0.0; nvar];
                for y in 0..ny {
                    row[y * nz + z] = w.get(x, y);
                }
                row[t] = sign;
                row[slack + x * nz + z] = -sign;
                a.push(row);
                b.push(v.get(x, z));
            }
        }
    }
    let mut c = vec![0.0; nvar];
    c[t] = 1.0;
    let raw = match minimize(&c, &a, &b) {
        LpOutcome::Optimal { x, .. } => x,
        other => return domain(format!("degradation LP did not solve: {other:?}")),
    };
    let mut data = vec![0.0; nv];
    for y in 0..ny {
        let row = &raw[y * nz..(y + 1) * nz];
        let s: f64 = row.iter().map(|r| r.max(0.0)).sum();
        for z in 0..nz {
            data[y * nz + z] = if s > 0.0 { row[z].max(0.0) / s } else { 1.0 / nz as f64 };
        }
    }
    let witness = StochasticMatrix::from_flat_unchecked(ny, nz, data);
    let residual = w.compose(&witness)?.max_abs_diff(v);
    Ok(DegradationCheck { degraded: residual <= tol, residual, witness })
}

/// A binary auxiliary U with P_U = (λ, 1−λ) and P_{X|U} = (P₁, P₂) for which
/// I(U;Y) − I(U;Z) = `defect` < 0.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryWitness {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub lambda: f64,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LessNoisyCheck {
    pub less_noisy: bool,
    /// Set when no violation was found; the search is not a proof.
    pub numerically_supported: bool,
    pub witness: Option<BinaryWitness>,
    pub min_defect: f64,
    pub evaluations: usize,
}

fn secrecy_gap(p: &[f64], w: &StochasticMatrix, v: &StochasticMatrix) -> f64 {
    mi_unchecked(p, w.as_slice(), w.cols()) - mi_unchecked(p, v.as_slice(), v.cols())
}

/// I(U;Y) − I(U;Z) for the binary auxiliary (λ, P₁, P₂).
fn concavity_defect(p1: &[f64], p2: &[f64], lambda: f64, w: &StochasticMatrix, v: &StochasticMatrix) -> f64 {
    let mid: Vec<f64> = p1.iter().zip(p2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
    secrecy_gap(&mid, w, v) - lambda * secrecy_gap(p1, w, v) - (1.0 - lambda) * secrecy_gap(p2, w, v)
}

fn grid_resolution_for(nx: usize) -> usize {
    match nx {
        0..=2 => 32,
        3 => 12,
        4 => 6,
        _ => 3,
    }
}

/// Tests whether `w` is less noisy than `v` through concavity of
/// P ↦ I(P,W) − I(P,V): a deterministic lattice of pairs at λ ∈ {¼, ½, ¾},
/// then `budget` seeded Nelder–Mead runs minimising the defect.
pub fn is_less_noisy(w: &StochasticMatrix, v: &StochasticMatrix, budget: usize) -> Result<LessNoisyCheck> {
    if v.rows() != w.rows() {
        return domain("less-noisy test needs channels with the same input alphabet");
    }
    let nx = w.rows();
    let grid = simplex_grid(nx, grid_resolution_for(nx));
    let mut evals = 0;
    let mut best: Option<BinaryWitness> = None;
    let consider = |p1: &[f64], p2: &[f64], lambda: f64, best: &mut Option<BinaryWitness>| {
        let d = concavity_defect(p1, p2, lambda, w, v);
        if best.as_ref().is_none_or(|b| d < b.defect) {
            *best = Some(BinaryWitness { p1: p1.to_vec(), p2: p2.to_vec(), lambda, defect: d });
        }
    };
    for (i, p1) in grid.iter().enumerate() {
        for p2 in &grid[i + 1..] {
            for lambda in [0.25, 0.5, 0.75] {
                evals += 1;
                consider(p1, p2, lambda, &mut best);
            }
        }
    }
    if best.as_ref().is_some_and(|b| b.defect < DEFECT_TOL) {
        let b = best.unwrap();
        return Ok(LessNoisyCheck { less_noisy: false, numerically_supported: false, min_defect: b.defect, witness: Some(b), evaluations: evals });
    }
    let mut r = rng::stream(0x1e55_1015e, nx as u64);
    let split = |t: &[f64]| -> (Vec<f64>, Vec<f64>, f64) {
        let lam = to_simplex(&t[2 * nx..]);
        (to_simplex(&t[..nx]), to_simplex(&t[nx..2 * nx]), lam[0])
    };
    for _ in 0..budget {
        let x0: Vec<f64> = (0..2 * nx + 2).map(|_| r.random::<f64>() + 0.05).collect();
        let (t, _, e) = nelder_mead(
            |t| {
                let (a, b, l) = split(t);
                concavity_defect(&a, &b, l, w, v)
            },
            &x0,
            0.2,
            300,
            1e-14,
        );
        evals += e;
        let (a, b, l) = split(&t);
        consider(&a, &b, l, &mut best);
    }
    let b = best.unwrap_or(BinaryWitness { p1: vec![], p2: vec![], lambda: 0.5, defect: 0.0 });
    let min_defect = b.defect;
    if min_defect < DEFECT_TOL {
        Ok(LessNoisyCheck { less_noisy: false, numerically_supported: false, witness: Some(b), min_defect, evaluations: evals })
    } else {
        Ok(LessNoisyCheck { less_noisy: true, numerically_supported: true, witness: None, min_defect, evaluations: evals })
    }
}

/// Grades are ordered: severe implies strong implies weak.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Grade {
    None,
    Weak,
    Strong,
    Severe,
}

impl Grade {
    pub fn name(self) -> &'static str {
        match self {
            Grade::None => "none",
            Grade::Weak => "weak",
            Grade::Strong => "strong",
            Grade::Severe => "severe",
        }
    }
}

/// The first failing comparison: main mixture, wiretap mixture and what failed.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderWitness {
    pub main: Vec<f64>,
    pub wiretap: Vec<f64>,
    pub residual: f64,
    pub binary: Option<BinaryWitness>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderVerdict {
    pub grade: Grade,
    /// Why the next grade up failed; `None` at `Severe`.
    pub witness: Option<OrderWitness>,
    /// Lattice denominator used for the severe check.
    pub resolution: usize,
    /// True when passing less-noisy checks rest on a numerical search.
    pub numerically_supported: bool,
}

fn point(n: usize, at: usize) -> Vec<f64> {
    (0..n).map(|i| if i == at { 1.0 } else { 0.0 }).collect()
}

/// Runs `test(main_q, wiretap_q)` over the weak, strong and severe pair sets.
fn classify(
    pair: &WiretapPair,
    resolution: usize,
    mut test: impl FnMut(&StochasticMatrix, &StochasticMatrix) -> Result<Option<(f64, Option<BinaryWitness>)>>,
) -> Result<OrderVerdict> {
    if resolution == 0 {
        return domain("grid resolution must be positive");
    }
    let ns = pair.num_states();
    let wm = pair.main().matrices();
    let vm = pair.wiretap().matrices();
    let fail = |grade, q: Vec<f64>, qp: Vec<f64>, (residual, binary): (f64, Option<BinaryWitness>)| OrderVerdict {
        grade,
        witness: Some(OrderWitness { main: q, wiretap: qp, residual, binary }),
        resolution,
        numerically_supported: false,
    };
    for s in 0..ns {
        if let Some(f) = test(&wm[s], &vm[s])? {
            return Ok(fail(Grade::None, point(ns, s), point(ns, s), f));
        }
    }
    for s in 0..ns {
        for sp in 0..ns {
            if let Some(f) = test(&wm[s], &vm[sp])? {
                return Ok(fail(Grade::Weak, point(ns, s), point(ns, sp), f));
            }
        }
    }
    let grid = simplex_grid(ns, resolution);
    let wq: Vec<StochasticMatrix> = grid.iter().map(|q| mix_unchecked(wm, q)).collect();
    let vq: Vec<StochasticMatrix> = grid.iter().map(|q| mix_unchecked(vm, q)).collect();
    for (i, w) in wq.iter().enumerate() {
        for (j, v) in vq.iter().enumerate() {
            if let Some(f) = test(w, v)? {
                return Ok(fail(Grade::Strong, grid[i].clone(), grid[j].clone(), f));
            }
        }
    }
    Ok(OrderVerdict { grade: Grade::Severe, witness: None, resolution, numerically_supported: false })
}

/// Grade of "wiretap family is a degraded version of the main family".
pub fn classify_degradation(pair: &WiretapPair, resolution: usize) -> Result<OrderVerdict> {
    classify(pair, resolution, |w, v| {
        let c = is_degraded(v, w, DEGRADATION_TOL)?;
        Ok((!c.degraded).then_some((c.residual, None)))
    })
}

/// Grade of "main family is less noisy than the wiretap family".
pub fn classify_less_noisy(pair: &WiretapPair, resolution: usize, budget: usize) -> Result<OrderVerdict> {
    let mut v = classify(pair, resolution, |w, v| {
        let c = is_less_noisy(w, v, budget)?;
        Ok((!c.less_noisy).then(|| (c.min_defect, c.witness)))
    })?;
    v.numerically_supported = v.grade > Grade::None;
    Ok(v)
}

/// Threshold for two rows to count as different.
pub const ROW_DIFF_TOL: f64 = 1e-12;

/// First input pair (x, x′), x < x′, whose rows differ under every state.
pub fn csr_max_error_positive(family: &ChannelFamily) -> Option<(usize, usize)> {
    let (nx, ny) = (family.num_inputs(), family.num_outputs());
    for x in 0..nx {
        for xp in x + 1..nx {
            let all = (0..family.num_states())
                .all(|s| (0..ny).any(|y| (family.prob(s, x, y) - family.prob(s, xp, y)).abs() > ROW_DIFF_TOL));
            if all {
                return Some((x, xp));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bsc;

    #[test]
    fn self_degradation_uses_identity() {
        let w = bsc(0.2);
        let c = is_degraded(&w, &w, DEGRADATION_TOL).unwrap();
        assert!(c.degraded);
        assert!(c.residual <= 1e-12);
    }

    #[test]
    fn bsc_order() {
        assert!(is_degraded(&bsc(0.3), &bsc(0.1), DEGRADATION_TOL).unwrap().degraded);
        let c = is_degraded(&bsc(0.1), &bsc(0.3), DEGRADATION_TOL).unwrap();
        assert!(!c.degraded && c.residual > 1e-3);
    }

    #[test]
    fn useless_wiretap_is_less_noisy() {
        let c = is_less_noisy(&bsc(0.2), &bsc(0.5), 4).unwrap();
        assert!(c.less_noisy && c.numerically_supported);
    }

    #[test]
    fn reversed_order_has_witness() {
        let c = is_less_noisy(&bsc(0.3), &bsc(0.05), 4).unwrap();
        assert!(!c.less_noisy);
        let b = c.witness.unwrap();
        assert!(concavity_defect(&b.p1, &b.p2, b.lambda, &bsc(0.3), &bsc(0.05)) < DEFECT_TOL);
    }

    #[test]
    fn identical_rows_are_not_positive() {
        let m = StochasticMatrix::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let f = ChannelFamily::from_matrices(vec![m.clone(), m]).unwrap();
        assert_eq!(csr_max_error_positive(&f), None);
    }
}
