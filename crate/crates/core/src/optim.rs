//! Optimisation over probability simplices.
//!
//! Concave maximisation and convex minimisation use nested golden-section
//! search on a stick-breaking parametrisation: fixing the first coordinate
//! leaves a scaled simplex, and partial optimisation of a concave (convex)
//! function over such slices stays concave (convex), so every level is a
//! unimodal line search. Non-concave problems over prefix distributions use a
//! lattice scan followed by Nelder–Mead refinement.

use crate::info::PrefixInput;
use crate::rng;
use crate::words;
use rand::Rng;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// The endpoints are also evaluated so boundary optima are found exactly.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for t in [a, b] {
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Line-search tolerance used at each nesting level.
pub fn default_tol(dim: usize) -> f64 {
    match dim {
        0..=3 => 1e-10,
        4 => 1e-7,
        _ => 1e-5,
    }
}

/// Result of a simplex search.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOpt {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

fn nested(
    dim: usize,
    level: usize,
    mass: f64,
    prefix: &mut Vec<f64>,
    f: &mut dyn FnMut(&[f64]) -> f64,
    tol: f64,
    evals: &mut usize,
) -> (Vec<f64>, f64) {
    if level + 1 == dim {
        prefix.push(mass);
        *evals += 1;
        let v = f(prefix);
        let p = prefix.clone();
        prefix.pop();
        return (p, v);
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let (_, _) = golden_max(
        |t| {
            prefix.push(mass * t);
            let (p, v) = nested(dim, level + 1, mass * (1.0 - t), prefix, f, tol, evals);
            prefix.pop();
            if best.as_ref().is_none_or(|b| v > b.1) {
                best = Some((p, v));
            }
            v
        },
        0.0,
        1.0,
        tol,
    );
    best.unwrap()
}

/// Maximises a concave `f` over the simplex of dimension `dim`.
pub fn maximize_concave(dim: usize, mut f: impl FnMut(&[f64]) -> f64, tol: f64) -> SimplexOpt {
    let mut evals = 0;
    let mut prefix = Vec::with_capacity(dim);
    let (point, value) = nested(dim, 0, 1.0, &mut prefix, &mut f, tol, &mut evals);
    SimplexOpt { point, value, evaluations: evals }
}

/// Minimises a convex `f` over the simplex of dimension `dim`.
pub fn minimize_convex(dim: usize, mut f: impl FnMut(&[f64]) -> f64, tol: f64) -> SimplexOpt {
    let r = maximize_concave(dim, |p| -f(p), tol);
    SimplexOpt { value: -r.value, ..r }
}

/// Maps an unconstrained vector onto the simplex by |θ| / Σ|θ|.
pub fn to_simplex(theta: &[f64]) -> Vec<f64> {
    let s: f64 = theta.iter().map(|v| v.abs()).sum();
    if s <= 0.0 || !s.is_finite() {
        return vec![1.0 / theta.len() as f64; theta.len()];
    }
    theta.iter().map(|v| v.abs() / s).collect()
}

/// Nelder–Mead minimisation from `x0` with initial step `step`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += if x[i].abs() > 1e-3 { step * x[i].abs().max(0.1) } else { step };
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= ftol {
            break;
        }
        let mut c = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { c.iter().zip(&worst.0).map(|(ci, wi)| ci + t * (ci - wi)).collect() };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = along(0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&item.0).map(|(b, xi)| b + 0.5 * (xi - b)).collect();
                    let v = eval(&x, &mut evals);
                    *item = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v, evals)
}

/// Settings for the prefix-distribution search.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixSearch {
    /// Finest lattice denominator tried.
    pub resolution_cap: usize,
    /// The lattice is coarsened until it has at most this many points.
    pub max_grid_points: usize,
    pub starts: usize,
    pub nm_iterations: usize,
    pub seed: u64,
}

impl Default for PrefixSearch {
    fn default() -> Self {
        Self { resolution_cap: 32, max_grid_points: 200_000, starts: 128, nm_iterations: 400, seed: 0x5eed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrefixOpt {
    pub prefix: PrefixInput,
    pub value: f64,
    pub evaluations: usize,
    pub grid_resolution: usize,
}

fn lattice_size(nu: usize, nx: usize, r: usize) -> usize {
    // weights × multisets of conditional rows
    let g = words::composition_count(r, nx);
    let w = words::composition_count(r, nu);
    let mut rows: u128 = 1;
    for i in 0..nu as u128 {
        rows = rows * (g as u128 + i) / (i + 1);
    }
    (rows.saturating_mul(w as u128)).min(usize::MAX as u128) as usize
}

fn better(a: &(PrefixInput, f64), b: &(PrefixInput, f64)) -> bool {
    if a.1 > b.1 + 1e-12 {
        return true;
    }
    if a.1 < b.1 - 1e-12 {
        return false;
    }
    a.0.flat().iter().zip(b.0.flat().iter()).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

fn decode(theta: &[f64], nu: usize, nx: usize) -> PrefixInput {
    let w = to_simplex(&theta[..nu]);
    let rows = (0..nu).map(|u| to_simplex(&theta[nu + u * nx..nu + (u + 1) * nx])).collect();
    PrefixInput::from_parts_unchecked(w, rows)
}

fn encode(p: &PrefixInput) -> Vec<f64> {
    p.flat()
}

/// Maximises `objective` over joint laws of (U, X) with |U| = `nu`. Smaller
/// auxiliary alphabets are solved first and embedded as starting points, so
/// the value is nondecreasing in `nu`.
pub fn maximize_prefix(nx: usize, nu: usize, objective: &dyn Fn(&PrefixInput) -> f64, cfg: &PrefixSearch) -> PrefixOpt {
    let mut evals = 0usize;
    let mut carried: Option<(PrefixInput, f64)> = None;
    let mut resolution = 0;
    for k in 1..=nu {
        let r = maximize_prefix_fixed(nx, k, objective, cfg, carried.as_ref(), &mut evals);
        resolution = r.2;
        carried = Some((r.0, r.1));
    }
    let (prefix, value) = carried.unwrap();
    PrefixOpt { prefix, value, evaluations: evals, grid_resolution: resolution }
}

fn embed(p: &PrefixInput, nu: usize) -> PrefixInput {
    let mut w = p.weights().to_vec();
    let mut rows = p.rows().to_vec();
    while w.len() < nu {
        w.push(0.0);
        rows.push(rows[0].clone());
    }
    PrefixInput::from_parts_unchecked(w, rows)
}

fn maximize_prefix_fixed(
    nx: usize,
    nu: usize,
    objective: &dyn Fn(&PrefixInput) -> f64,
    cfg: &PrefixSearch,
    carried: Option<&(PrefixInput, f64)>,
    evals: &mut usize,
) -> (PrefixInput, f64, usize) {
    let mut r = cfg.resolution_cap.max(1);
    while r > 1 && lattice_size(nu, nx, r) > cfg.max_grid_points {
        r -= 1;
    }
    let row_grid = words::simplex_grid(nx, r);
    let weight_grid = words::simplex_grid(nu, r);
    let keep = (cfg.starts / 2).max(1);
    let mut top: Vec<(PrefixInput, f64)> = Vec::new();
    let push_top = |cand: (PrefixInput, f64), top: &mut Vec<(PrefixInput, f64)>| {
        let pos = top.iter().position(|t| better(&cand, t)).unwrap_or(top.len());
        if pos < keep {
            top.insert(pos, cand);
            top.truncate(keep);
        }
    };
    // Rows as nondecreasing index tuples: relabelling U leaves the objective unchanged.
    let mut idx = vec![0usize; nu];
    loop {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| row_grid[i].clone()).collect();
        for w in &weight_grid {
            let p = PrefixInput::from_parts_unchecked(w.clone(), rows.clone());
            *evals += 1;
            let v = objective(&p);
            push_top((p, v), &mut top);
        }
        let mut advanced = false;
        let mut k = nu;
        while k > 0 {
            k -= 1;
            if idx[k] + 1 < row_grid.len() {
                idx[k] += 1;
                for j in k + 1..nu {
                    idx[j] = idx[k];
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    let mut starts: Vec<PrefixInput> = top.iter().map(|t| t.0.clone()).collect();
    let mut best = top[0].clone();
    if let Some((p, _)) = carried {
        let e = embed(p, nu);
        *evals += 1;
        let v = objective(&e);
        let cand = (e.clone(), v);
        if better(&cand, &best) {
            best = cand;
        }
        starts.insert(0, e);
    }
    let mut rs = rng::stream(cfg.seed, nu as u64);
    while starts.len() < cfg.starts {
        let w = to_simplex(&(0..nu).map(|_| rs.random::<f64>()).collect::<Vec<_>>());
        let rows = (0..nu).map(|_| to_simplex(&(0..nx).map(|_| rs.random::<f64>()).collect::<Vec<_>>())).collect();
        starts.push(PrefixInput::from_parts_unchecked(w, rows));
    }
    for s in starts {
        let (theta, _, e) = nelder_mead(|t| -objective(&decode(t, nu, nx)), &encode(&s), 0.1, cfg.nm_iterations, 1e-13);
        *evals += e;
        let p = decode(&theta, nu, nx);
        let v = objective(&p);
        let cand = (p, v);
        if better(&cand, &best) {
            best = cand;
        }
    }
    (best.0, best.1, r)
}
