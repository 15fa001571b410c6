//! Named channel instances used throughout the tests and the CLI.

use crate::channel::{bsc, ChannelFamily, StochasticMatrix, WiretapPair};
use crate::error::{domain, Result};
use crate::format::{parse_family, parse_pair};

pub const REMARK_3_1: &str = include_str!("../presets/remark-3.1.txt");
pub const PROP_3_1_EXAMPLE: &str = include_str!("../presets/prop-3.1-example.txt");
pub const DEGRADATION_WEAK: &str = include_str!("../presets/degradation-weak.txt");
pub const DEGRADATION_STRONG: &str = include_str!("../presets/degradation-strong.txt");

pub const NAMES: [&str; 4] = ["example-6.1", "example-6.2", "remark-3.1", "prop-3.1-example"];

fn labels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Identity/flip family.
pub fn remark_3_1() -> ChannelFamily {
    parse_family(REMARK_3_1).expect("bundled preset parses")
}

/// Three-state family where no input pair is separable under every state.
pub fn prop_3_1_example() -> ChannelFamily {
    parse_family(PROP_3_1_EXAMPLE).expect("bundled preset parses")
}

/// Pair whose wiretap is weakly but not strongly degraded.
pub fn degradation_weak() -> WiretapPair {
    parse_pair(DEGRADATION_WEAK).expect("bundled preset parses")
}

/// Pair whose wiretap is strongly but not severely degraded.
pub fn degradation_strong() -> WiretapPair {
    parse_pair(DEGRADATION_STRONG).expect("bundled preset parses")
}

/// Z-channels over BSC(p) for p ∈ [0, 2/3].
pub fn example_6_1(p: f64) -> Result<WiretapPair> {
    if !(0.0..=2.0 / 3.0).contains(&p) {
        return domain(format!("example-6.1 needs p in [0, 2/3], got {p}"));
    }
    let t = 1.5 * p;
    let w1 = StochasticMatrix::new(vec![vec![1.0, 0.0], vec![t, 1.0 - t]])?;
    let w2 = StochasticMatrix::new(vec![vec![1.0 - t, t], vec![0.0, 1.0]])?;
    let st = labels(&["1", "2"]);
    let bin = labels(&["0", "1"]);
    let main = ChannelFamily::new(st.clone(), bin.clone(), bin.clone(), vec![w1, w2])?;
    let wiretap = ChannelFamily::new(st, bin.clone(), bin, vec![bsc(p), bsc(p)])?;
    WiretapPair::new(main, wiretap)
}

/// Erasure-style main family with a BSC wiretap on outputs {0, e, 1}.
pub fn example_6_2(p: f64, q: f64) -> Result<WiretapPair> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return domain(format!("example-6.2 needs p, q in [0, 1], got ({p}, {q})"));
    }
    let w1 = StochasticMatrix::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, q, 1.0 - q]])?;
    let w2 = StochasticMatrix::new(vec![vec![1.0 - q, q, 0.0], vec![0.0, 0.0, 1.0]])?;
    let v = StochasticMatrix::new(vec![vec![1.0 - p, 0.0, p], vec![p, 0.0, 1.0 - p]])?;
    let st = labels(&["1", "2"]);
    let xs = labels(&["0", "1"]);
    let ys = labels(&["0", "e", "1"]);
    let main = ChannelFamily::new(st.clone(), xs.clone(), ys.clone(), vec![w1, w2])?;
    let wiretap = ChannelFamily::new(st, xs, ys, vec![v.clone(), v])?;
    WiretapPair::new(main, wiretap)
}

/// The sweep relation used for example-6.2.
pub fn example_6_2_q(p: f64) -> f64 {
    2.0 * p * (1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_build() {
        assert_eq!(remark_3_1().num_states(), 2);
        let f = prop_3_1_example();
        assert_eq!((f.num_states(), f.num_inputs(), f.num_outputs()), (3, 3, 2));
        assert!((f.prob(1, 1, 0) - 0.5).abs() < 1e-15);
        assert_eq!(degradation_weak().num_states(), 2);
        assert_eq!(degradation_strong().num_states(), 2);
        assert!(example_6_1(0.25).is_ok());
        assert!(example_6_1(0.7).is_err());
        assert_eq!(example_6_2(0.2, example_6_2_q(0.2)).unwrap().main().num_outputs(), 3);
    }
}
