mod fit;
mod run;
mod trace;

pub use fit::cmd_fit;
pub use run::{cmd_audit, cmd_run};
pub use trace::cmd_trace;

use tsallis_core::env::EnvError;
use tsallis_core::{ArmKind, InstanceSpec};

use crate::error::{CliError, CliResult};

pub(crate) fn parse_means(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad mean `{}` in --means", s.trim())))
        })
        .collect()
}

/// `LO:HI` with `0 < LO < HI`.
pub(crate) fn parse_window(text: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Config(format!("bad window `{text}`, expected LO:HI"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Instance from the means/arm-kind flags; every failure is a config error.
pub(crate) fn build_instance(means: &str, arm_kind: Option<&str>) -> CliResult<InstanceSpec> {
    let kind: ArmKind = match arm_kind {
        Some(k) => k.parse().map_err(|e: EnvError| CliError::Config(e.to_string()))?,
        None => ArmKind::default(),
    };
    InstanceSpec::new(parse_means(means)?, kind).map_err(|e| CliError::Config(e.to_string()))
}
