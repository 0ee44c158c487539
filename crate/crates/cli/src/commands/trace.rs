use tsallis_core::env::{LossSource, StochasticSource};
use tsallis_core::metrics::decomposition_residual;
use tsallis_core::policy::empirical_argmin;
use tsallis_core::{bregman_to_vertex, PolicyState, ReplayMatrix, RngStream, StreamPurpose};

use super::build_instance;
use crate::args::TraceArgs;
use crate::error::{CliError, CliResult};

const DEFAULT_STOCHASTIC_STEPS: usize = 10;

fn vector(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.12}")).collect();
    format!("({})", parts.join(","))
}

pub fn cmd_trace(args: &TraceArgs) -> CliResult {
    let replay = match &args.replay {
        Some(path) => Some(ReplayMatrix::load(path).map_err(|e| {
            CliError::Runtime(format!("{}: {e}", path.display()))
        })?),
        None => None,
    };
    let instance = match (&replay, &args.means) {
        (Some(_), _) => None,
        (None, Some(means)) => Some(build_instance(means, args.arm_kind.as_deref())?),
        (None, None) => {
            return Err(CliError::Config("trace needs --replay or --means".into()));
        }
    };

    let (d, default_star, steps) = match (&replay, &instance) {
        (Some(m), _) => {
            let steps = args.steps.unwrap_or(m.rows());
            if steps > m.rows() {
                return Err(CliError::Config(format!(
                    "--steps {steps} exceeds the {} rows of the replay table",
                    m.rows()
                )));
            }
            (m.dim(), empirical_argmin(&m.column_sums()), steps)
        }
        (None, Some(spec)) => (
            spec.dim(),
            spec.star(),
            args.steps.unwrap_or(DEFAULT_STOCHASTIC_STEPS),
        ),
        (None, None) => unreachable!(),
    };
    let star = match args.star {
        Some(s) if (1..=d).contains(&s) => s - 1,
        Some(s) => return Err(CliError::Config(format!("--star {s} is not an arm in 1..={d}"))),
        None => default_star,
    };

    let mut source: Box<dyn LossSource + '_> = match (&replay, &instance) {
        (Some(m), _) => Box::new(m),
        (None, Some(spec)) => Box::new(StochasticSource::new(
            spec,
            RngStream::new(args.seed, 0, StreamPurpose::Environment),
        )),
        (None, None) => unreachable!(),
    };
    let mut arms = RngStream::new(args.seed, 0, StreamPurpose::ArmSampling);
    let mut state = if args.allow_unstable_alpha {
        PolicyState::with_unstable_alpha(d, args.alpha)
    } else {
        PolicyState::new(d, args.alpha)
    }
    .map_err(|e| CliError::Config(e.to_string()))?;

    println!("# star={} alpha={} seed={}", star + 1, args.alpha, args.seed);
    println!("t\teta\tp\tI_t\tell_hat\tnu\tD_psi\tresidual");
    let mut losses = vec![0.0; d];
    for t in 1..=steps {
        source
            .fill(t, &mut losses)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let cumulative_t = state.cumulative().to_vec();
        let eta_t = state.eta();
        let record = state
            .step(&losses, &mut arms)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let residual =
            decomposition_residual(&record, state.point(), eta_t, state.eta(), &cumulative_t, star);
        println!(
            "{}\t{:.12}\t{}\t{}\t{}\t{:.12}\t{:.12}\t{:.3e}",
            t,
            record.eta,
            vector(record.p.probs()),
            record.chosen + 1,
            vector(&record.est_loss),
            record.dual_nu,
            bregman_to_vertex(&record.p, star),
            residual
        );
    }
    Ok(())
}
