use std::fs;

use avwc_core::format::{parse_family, parse_pair};
use avwc_core::{presets, ChannelFamily, WiretapPair};

use crate::args::{GridArgs, SourceArgs};
use crate::CliError;

pub enum Instance {
    Pair(WiretapPair),
    Family(ChannelFamily),
}

impl Instance {
    pub fn pair(self, what: &str) -> Result<WiretapPair, CliError> {
        match self {
            Instance::Pair(p) => Ok(p),
            Instance::Family(_) => Err(CliError::Usage(format!("{what} needs a wiretap pair, got a single family"))),
        }
    }

    /// The family itself, or the main family of a pair.
    pub fn family(self) -> ChannelFamily {
        match self {
            Instance::Pair(p) => p.main().clone(),
            Instance::Family(f) => f,
        }
    }
}

fn read(path: &std::path::Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn is_parametric(src: &SourceArgs) -> bool {
    matches!(src.preset.as_deref(), Some("example-6.1" | "example-6.2"))
}

/// Builds the instance at parameter `p` (ignored for non-parametric sources).
pub fn load(src: &SourceArgs, p: Option<f64>) -> Result<Instance, CliError> {
    if let Some(path) = &src.pair {
        return Ok(Instance::Pair(parse_pair(&read(path)?)?));
    }
    if let Some(path) = &src.family {
        return Ok(Instance::Family(parse_family(&read(path)?)?));
    }
    let name = src.preset.as_deref().ok_or_else(|| CliError::Usage("one of --pair, --family or --preset is required".into()))?;
    let need = || p.ok_or_else(|| CliError::Usage(format!("preset {name} needs a parameter value")));
    Ok(match name {
        "example-6.1" => Instance::Pair(presets::example_6_1(need()?)?),
        "example-6.2" => {
            let p = need()?;
            Instance::Pair(presets::example_6_2(p, src.q.unwrap_or_else(|| presets::example_6_2_q(p)))?)
        }
        "remark-3.1" => Instance::Family(presets::remark_3_1()),
        "prop-3.1-example" => Instance::Family(presets::prop_3_1_example()),
        "degradation-weak" => Instance::Pair(presets::degradation_weak()),
        "degradation-strong" => Instance::Pair(presets::degradation_strong()),
        other => return Err(CliError::Usage(format!("unknown preset `{other}`"))),
    })
}

fn round(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

/// Grid points; `None` entries for non-parametric sources.
pub fn points(src: &SourceArgs, grid: &GridArgs, default: Option<&str>) -> Result<Vec<Option<f64>>, CliError> {
    let given = grid.grid.is_some() || grid.values.is_some() || grid.param.is_some();
    if !is_parametric(src) {
        if given {
            return Err(CliError::Usage("a parameter grid applies only to example-6.1 and example-6.2".into()));
        }
        return Ok(vec![None]);
    }
    let pts = if let Some(p) = grid.param {
        vec![p]
    } else if let Some(v) = &grid.values {
        parse_list(v)?
    } else {
        match grid.grid.as_deref().or(default) {
            Some(g) => parse_range(g)?,
            None => return Err(CliError::Usage("parametric preset needs --grid, --values or --param".into())),
        }
    };
    if pts.is_empty() {
        return Err(CliError::Usage("parameter grid is empty".into()));
    }
    Ok(pts.into_iter().map(Some).collect())
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::Usage(format!("`{t}` is not a number"))))
        .collect()
}

/// START:STOP:STEP, inclusive of STOP up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts = parse_list(&s.replace(':', ","))?;
    let [a, b, step] = parts[..] else {
        return Err(CliError::Usage(format!("grid `{s}` is not START:STOP:STEP")));
    };
    if !(step > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(CliError::Usage(format!("grid `{s}` needs a positive step")));
    }
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let v = round(a + k as f64 * step);
        if v > b + 1e-9 {
            break;
        }
        out.push(v);
        k += 1;
        if k > 1_000_000 {
            return Err(CliError::Usage(format!("grid `{s}` has too many points")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.05:0.45:0.05").unwrap().len(), 9);
        assert_eq!(parse_range("0.3:0.3:0.1").unwrap(), vec![0.3]);
        assert!(parse_range("0.5:0.1:0.1").unwrap().is_empty());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:1").is_err());
    }
}
