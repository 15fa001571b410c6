use avwc_core::channel::*;
use avwc_core::coding::*;
use avwc_core::partition::*;
use avwc_core::presets;
use avwc_core::typicality::*;
use avwc_core::words::for_each_word;

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn two_block_typical_probability() {
    let p = TypicalityParams::new(0.12, 0.5).unwrap().with_deviation(Deviation::Absolute);
    let s = StateSequence::new([vec![0; 10], vec![1; 10]].concat(), 2).unwrap();
    let got = typical_prob_exact(&[0.5, 0.5], &s, &p).unwrap();
    let block = (4..=6).map(|k| binom(10, k)).sum::<f64>() / 1024.0;
    assert!((got - block * block).abs() < 1e-12, "{got}");
}

#[test]
fn sandwich_bounds_on_a_bsc_panel() {
    let fam = ChannelFamily::from_matrices(vec![bsc(0.1), bsc(0.3)]).unwrap();
    let p = TypicalityParams::new(0.2, 0.5).unwrap();
    let a = audit::exhaustive(&[0.5, 0.5], &fam, &p, 6, 0.0).unwrap();
    for (name, t) in a.tallies() {
        // hit-probability and conditional-typicality need a calibrated ν₂
        if name == "hit-probability" || name == "conditional-typicality" {
            continue;
        }
        assert!(t.checked > 0, "{name}");
        assert_eq!(t.violations, 0, "{name}");
    }
}

#[test]
fn exact_error_matches_brute_force() {
    let fam = ChannelFamily::from_matrices(vec![bsc(0.05), bsc(0.2)]).unwrap();
    let c = generate_codebook(&[0.5, 0.5], 5, 4, 8).unwrap();
    let dec = build_csr_decoder(&c, &fam, &[0.5, 0.5], DecoderParams::new(TypicalityParams::new(3.0, 0.5).unwrap(), 0.05)).unwrap();
    let s = [0, 1, 1, 0, 1];
    let sets = dec.sets(&s).unwrap();
    let e = message_errors(&c, &fam, &dec, &s).unwrap();
    for m in 0..c.len() {
        let mut correct = 0.0;
        for_each_word(2, 5, |_, y| {
            if sets.decode(y) == Some(m) {
                correct += (0..5).map(|i| fam.prob(s[i], c.word(m)[i], y[i])).product::<f64>();
            }
        });
        assert!((e[m] - (1.0 - correct)).abs() < 1e-12);
    }
    let (mc, radius) = average_error_monte_carlo(&c, &fam, &dec, &s, 20_000, 3).unwrap();
    let exact = e.iter().sum::<f64>() / e.len() as f64;
    assert!((mc - exact).abs() <= radius + 1e-3, "{mc} vs {exact} ± {radius}");
}

#[test]
fn positivity_scheme_improves_with_repetition() {
    let f = presets::remark_3_1();
    let short = positivity_two_codeword_scheme(&f, 1).unwrap();
    let long = positivity_two_codeword_scheme(&f, 9).unwrap();
    assert!(long.max_error <= short.max_error);
    assert!(long.max_error < 1.0);
}

#[test]
fn random_products_respect_the_bound() {
    for seed in 0..10 {
        assert!(product_expectation_check(10, 0.5, seed).unwrap().holds);
    }
}

#[test]
fn partition_leakage_is_zero_for_one_bin() {
    let wt = ChannelFamily::from_matrices(vec![bsc(0.1), bsc(0.2)]).unwrap();
    let c = generate_codebook(&[0.5, 0.5], 5, 8, 1).unwrap();
    let p = Partition::new(vec![(0..8).collect()], 8).unwrap();
    assert!(leakage_exact(&c, &p, &wt, &[0, 1, 0, 1, 1]).unwrap().abs() < 1e-12);
    let singles = Partition::singletons(8);
    assert!(leakage_exact(&c, &singles, &wt, &[0, 1, 0, 1, 1]).unwrap() > 0.0);
}

#[test]
fn rate_inequality_violation_is_named() {
    let main = ChannelFamily::from_matrices(vec![StochasticMatrix::identity(2)]).unwrap();
    let wt = ChannelFamily::from_matrices(vec![bsc(0.15)]).unwrap();
    let pair = WiretapPair::new(main, wt).unwrap();
    let cfg = PipelineConfig::new(6, 32, 8, vec![0.5, 0.5], TypicalityParams::new(0.5, 0.5).unwrap());
    let err = secure_pipeline(&pair, &cfg).unwrap_err().to_string();
    assert!(err.contains("rate inequality"), "{err}");
}
