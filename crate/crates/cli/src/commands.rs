use avwc_core::capacity::*;
use avwc_core::coding::*;
use avwc_core::info::PrefixInput;
use avwc_core::optim::PrefixSearch;
use avwc_core::order::{classify_degradation, classify_less_noisy, OrderVerdict};
use avwc_core::partition::{secure_pipeline, PipelineConfig};
use avwc_core::typicality::{Deviation, TypicalityParams};
use avwc_core::{CostModel, WiretapPair};
use rayon::prelude::*;

use crate::args::*;
use crate::output::{csv, num, vector, word};
use crate::source::{self, is_parametric, load, parse_list};
use crate::CliError;

/// CSV body plus whether any solver reported non-convergence.
pub struct Report {
    pub body: String,
    pub nonconverged: bool,
}

pub const BOUNDS_COLUMNS: [&str; 9] =
    ["param", "value_lower", "value_upper", "argmax_distribution", "worst_q", "worst_s", "csr_lower", "csr_upper", "flags"];

fn param(p: Option<f64>) -> String {
    p.map(|v| format!("{v}")).unwrap_or_default()
}

fn search(seed: u64, a: &SearchArgs) -> PrefixSearch {
    PrefixSearch { resolution_cap: a.resolution_cap, starts: a.starts, seed: seed ^ 0x5eed, ..PrefixSearch::default() }
}

fn prefix_text(p: &PrefixInput) -> String {
    p.weights().iter().zip(p.rows()).map(|(w, r)| format!("{w:.6}:{}", vector(r))).collect::<Vec<_>>().join(";")
}

fn argmax_text(a: &Argmax) -> String {
    match a {
        Argmax::Input(v) => vector(v),
        Argmax::Prefix(p) => prefix_text(p),
    }
}

fn flag_text(parts: &[(&str, &BoundResult)]) -> (String, bool) {
    let mut out = Vec::new();
    let mut nc = false;
    for (tag, r) in parts {
        for f in &r.diagnostics.flags {
            nc |= *f == Flag::NonConverged;
            out.push(format!("{tag}:{}", f.name()));
        }
    }
    (out.join(";"), nc)
}

fn state_text(s: &[usize]) -> String {
    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn bounds_row(pair: &WiretapPair, p: Option<f64>, constraint: &ConstraintSet, card: Option<usize>, s: &PrefixSearch) -> Result<(Vec<String>, bool), CliError> {
    let card = card.unwrap_or(pair.num_inputs());
    let lo = avwc_lower_bound(pair, constraint, card, s)?;
    let hi = avwc_upper_bound(pair, false, card, s)?;
    let clo = avwc_csr_lower_bound(pair, card, s)?;
    let chi = avwc_upper_bound(pair, true, card, s)?;
    let (flags, nc) = flag_text(&[("lower", &lo), ("upper", &hi), ("csr-lower", &clo), ("csr-upper", &chi)]);
    let row = vec![
        param(p),
        num(lo.value),
        num(hi.value),
        argmax_text(&lo.argmax),
        lo.worst_q.as_deref().map(vector).unwrap_or_default(),
        state_text(&lo.worst_s),
        num(clo.value),
        num(chi.value),
        flags,
    ];
    Ok((row, nc))
}

fn collect(rows: Vec<Result<(Vec<String>, bool), CliError>>) -> Result<(Vec<Vec<String>>, bool), CliError> {
    let mut out = Vec::with_capacity(rows.len());
    let mut nc = false;
    for r in rows {
        let (row, n) = r?;
        nc |= n;
        out.push(row);
    }
    Ok((out, nc))
}

pub fn bounds(seed: u64, a: &BoundsArgs) -> Result<Report, CliError> {
    let pts = source::points(&a.source, &a.grid, None)?;
    let constraint = match (&a.cost, a.budget) {
        (Some(c), Some(b)) => ConstraintSet::CostBudget(CostModel::new(parse_list(c)?, b)?),
        _ => ConstraintSet::AllStates,
    };
    let s = search(seed, &a.search);
    let rows: Vec<_> = pts
        .par_iter()
        .map(|&p| bounds_row(&load(&a.source, p)?.pair("bounds")?, p, &constraint, a.search.cardinality, &s))
        .collect();
    let (rows, nonconverged) = collect(rows)?;
    Ok(Report { body: csv(&BOUNDS_COLUMNS, &rows)?, nonconverged })
}

fn verdict_row(p: Option<f64>, order: &str, v: &OrderVerdict) -> Vec<String> {
    let w = v.witness.as_ref();
    vec![
        param(p),
        order.to_string(),
        v.grade.name().to_string(),
        v.numerically_supported.to_string(),
        v.resolution.to_string(),
        w.map(|w| vector(&w.main)).unwrap_or_default(),
        w.map(|w| vector(&w.wiretap)).unwrap_or_default(),
        w.map(|w| num(w.residual)).unwrap_or_default(),
    ]
}

pub fn classify(a: &ClassifyArgs) -> Result<Report, CliError> {
    let pts = source::points(&a.source, &a.grid, None)?;
    let rows: Vec<Result<Vec<Vec<String>>, CliError>> = pts
        .par_iter()
        .map(|&p| {
            let pair = load(&a.source, p)?.pair("classify")?;
            let d = classify_degradation(&pair, a.resolution)?;
            let l = classify_less_noisy(&pair, a.resolution, a.budget)?;
            Ok(vec![verdict_row(p, "degraded", &d), verdict_row(p, "less-noisy", &l)])
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    let cols = ["param", "order", "grade", "numerically_supported", "resolution", "witness_main", "witness_wiretap", "residual"];
    Ok(Report { body: csv(&cols, &out)?, nonconverged: false })
}

fn distribution(text: Option<&str>, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    match text {
        None => Ok(vec![1.0 / n as f64; n]),
        Some(t) => {
            let v = parse_list(t)?;
            if v.len() != n {
                return Err(CliError::Usage(format!("{what} needs {n} entries, got {}", v.len())));
            }
            Ok(v)
        }
    }
}

fn typicality(t: &TypicalityArgs) -> Result<TypicalityParams, CliError> {
    let dev = match t.deviation {
        DeviationArg::Relative => Deviation::Relative,
        DeviationArg::Absolute => Deviation::Absolute,
    };
    Ok(TypicalityParams::new(t.delta, t.eta)?.with_deviation(dev))
}

fn single_param(src: &SourceArgs, p: Option<f64>) -> Result<Option<f64>, CliError> {
    if p.is_some() && !is_parametric(src) {
        return Err(CliError::Usage("--param applies only to example-6.1 and example-6.2".into()));
    }
    Ok(p)
}

pub fn simulate(seed: u64, a: &SimulateArgs) -> Result<Report, CliError> {
    let fam = load(&a.source, single_param(&a.source, a.param)?)?.family();
    let px = distribution(a.typicality.px.as_deref(), fam.num_inputs(), "--px")?;
    let params = DecoderParams::new(typicality(&a.typicality)?, a.nu2);
    let c = if a.distinct {
        generate_distinct_codebook(&px, a.n, a.size, seed)?
    } else {
        generate_codebook(&px, a.n, a.size, seed)?
    };
    let dec: Box<dyn Decoder> = match a.decoder {
        DecoderArg::Csr => Box::new(build_csr_decoder(&c, &fam, &px, params)?),
        DecoderArg::Mixture => {
            let q = distribution(a.mixture.as_deref(), fam.num_states(), "--mixture")?;
            Box::new(build_mixture_decoder(&c, &fam, &px, &q, params)?)
        }
    };
    let jammer = match a.jammer {
        JammerArg::Exhaustive => Jammer::Exhaustive,
        JammerArg::Greedy => Jammer::greedy(seed),
    };
    let r = avwc_core::coding::simulate(&c, &fam, dec.as_ref(), jammer, a.trials, seed)?;
    let mut rows = Vec::new();
    for (m, w) in c.words().iter().enumerate() {
        rows.push(vec!["codeword".into(), word(w), m.to_string(), String::new(), String::new()]);
    }
    for s in &r.per_state {
        rows.push(vec!["state".into(), word(&s.state), num(s.average_error), num(s.max_error), String::new()]);
    }
    rows.push(vec!["worst-average".into(), word(&r.worst_average.state), num(r.worst_average.value), String::new(), String::new()]);
    rows.push(vec!["worst-maximal".into(), word(&r.worst_maximal.state), String::new(), num(r.worst_maximal.value), String::new()]);
    if let Some((p, rad, _)) = r.monte_carlo {
        rows.push(vec!["monte-carlo".into(), word(&r.worst_average.state), num(p), String::new(), num(rad)]);
    }
    Ok(Report { body: csv(&["kind", "state", "average_error", "max_error", "radius"], &rows)?, nonconverged: false })
}

pub fn partition(seed: u64, a: &PartitionArgs) -> Result<Report, CliError> {
    let pair = load(&a.source, single_param(&a.source, a.param)?)?.pair("partition")?;
    let px = distribution(a.typicality.px.as_deref(), pair.num_inputs(), "--px")?;
    let mut cfg = PipelineConfig::new(a.n, a.size, a.bins, px, typicality(&a.typicality)?);
    cfg.nu1 = a.nu1;
    cfg.nu2 = a.nu2;
    cfg.nu3 = a.nu3;
    cfg.tau = a.tau;
    cfg.codes = a.codes;
    cfg.coloring_budget = a.coloring_budget;
    cfg.distinct = a.distinct;
    cfg.seed = seed;
    let r = secure_pipeline(&pair, &cfg)?;
    let mut rows = Vec::new();
    let mut put = |code: String, kind: &str, key: String, value: String| rows.push(vec![code, kind.to_string(), key, value]);
    for (k, c) in r.codes.iter().enumerate() {
        let id = k.to_string();
        for (m, w) in c.codebook.words().iter().enumerate() {
            put(id.clone(), "codeword", m.to_string(), word(w));
        }
        for (b, bin) in c.equipartition.partition.bins().iter().enumerate() {
            put(id.clone(), "bin", b.to_string(), bin.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
        }
        for (s, v) in r.states.iter().zip(&c.leakage) {
            put(id.clone(), "leakage", word(s), num(*v));
        }
        let eps = (-(a.n as f64) * c.nu3 / 2.0).exp2();
        let h = &c.hypotheses;
        let summary = [
            ("nu3", num(c.nu3)),
            ("epsilon", num(eps)),
            ("coloring_accepted", c.coloring.accepted.to_string()),
            ("coloring_max_defect", num(c.coloring.max_defect)),
            ("coloring_draws", c.coloring.draws.to_string()),
            ("equipartition_moves", c.equipartition.moves.to_string()),
            ("conditional_entropy", num(c.equipartition.conditional_entropy)),
            ("worst_leakage", num(c.worst_leakage)),
            ("worst_leakage_state", word(&c.worst_leakage_state)),
            ("unpartitioned_worst_leakage", num(c.unpartitioned_worst_leakage)),
            ("worst_max_error", num(c.worst_max_error)),
            ("worst_error_state", word(&c.worst_error_state)),
            ("hypothesis_epsilon_small", h.epsilon_small.to_string()),
            ("hypothesis_heavy_mass", num(h.heavy_mass)),
            ("hypothesis_heavy_mass_ok", h.heavy_mass_ok.to_string()),
            ("hypothesis_k_log_k_ok", h.k_log_k_ok.to_string()),
            ("hypothesis_p0_below_cap", h.p0_below_cap.to_string()),
            ("posterior_cap_violations", h.posterior_cap_violations.to_string()),
        ];
        for (key, v) in summary {
            put(id.clone(), "summary", key.to_string(), v);
        }
    }
    put("all".into(), "summary", "conditional_leakage".into(), num(r.conditional_leakage));
    put("all".into(), "summary", "rate_leakage_bound".into(), num(r.rate_leakage_bound));
    Ok(Report { body: csv(&["code", "kind", "key", "value"], &rows)?, nonconverged: false })
}

pub fn sweep(seed: u64, a: &SweepArgs) -> Result<Report, CliError> {
    let src = SourceArgs { pair: None, family: None, preset: Some(a.preset.clone()), q: a.q };
    if !is_parametric(&src) {
        return Err(CliError::Usage(format!("sweep supports example-6.1 and example-6.2, got `{}`", a.preset)));
    }
    let pts = source::points(&src, &a.grid, Some("0.05:0.45:0.05"))?;
    if a.preset == "example-6.1" {
        let s = search(seed, &a.search);
        let rows: Vec<_> = pts
            .par_iter()
            .map(|&p| bounds_row(&load(&src, p)?.pair("sweep")?, p, &ConstraintSet::AllStates, a.search.cardinality, &s))
            .collect();
        let (rows, nonconverged) = collect(rows)?;
        return Ok(Report { body: csv(&BOUNDS_COLUMNS, &rows)?, nonconverged });
    }
    let rows: Vec<_> = pts
        .par_iter()
        .map(|&p| {
            let pair = load(&src, p)?.pair("sweep")?;
            let plain = less_noisy_secrecy_capacity(&pair, false);
            let csr = less_noisy_secrecy_capacity(&pair, true);
            let grade = classify_degradation(&pair, a.resolution)?.grade;
            let (flags, nc) = flag_text(&[("avwc", &plain), ("csr", &csr)]);
            let q = a.q.unwrap_or_else(|| avwc_core::presets::example_6_2_q(p.unwrap()));
            Ok((vec![param(p), num(q), num(plain.value), num(csr.value), grade.name().to_string(), flags], nc))
        })
        .collect();
    let (rows, nonconverged) = collect(rows)?;
    let cols = ["param", "q", "avwc_capacity", "avwc_csr_capacity", "degradation", "flags"];
    Ok(Report { body: csv(&cols, &rows)?, nonconverged })
}

pub fn export(a: &ExportArgs) -> Result<Report, CliError> {
    let body = match load(&a.source, single_param(&a.source, a.param)?)? {
        source::Instance::Pair(p) => avwc_core::format::write_pair(&p),
        source::Instance::Family(f) => avwc_core::format::write_family(&f),
    };
    Ok(Report { body, nonconverged: false })
}
