use tsallis_core::harness::fit::{fit_power_law, PowerLawFit};
use tsallis_core::harness::output::CsvTable;

use super::parse_window;
use crate::args::FitArgs;
use crate::error::{CliError, CliResult};

fn assertions(args: &FitArgs, fit: &PowerLawFit) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    if let Some(max) = args.expect_slope_max {
        out.push((format!("slope <= {max}"), fit.slope <= max));
    }
    if let Some(min) = args.expect_slope_min {
        out.push((format!("slope >= {min}"), fit.slope >= min));
    }
    if let Some(r2) = args.expect_r2_min {
        out.push((format!("r2 >= {r2}"), fit.r_squared >= r2));
    }
    out
}

pub fn cmd_fit(args: &FitArgs) -> CliResult {
    let window = match &args.window {
        Some(w) => parse_window(w)?,
        None => (f64::MIN_POSITIVE, f64::INFINITY),
    };
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", args.input.display())))?;
    let table = CsvTable::parse(&text)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.input.display())))?;
    let points = table
        .points(&args.column)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.input.display())))?;
    let fit = fit_power_law(&points, window).map_err(|e| CliError::Runtime(e.to_string()))?;

    println!("column     {}", args.column);
    println!("slope      {:.6}", fit.slope);
    println!("intercept  {:.6}", fit.intercept);
    println!("r2         {:.6}", fit.r_squared);
    println!("points     {} used, {} nonpositive excluded", fit.used, fit.excluded);

    let mut failed = Vec::new();
    for (label, ok) in assertions(args, &fit) {
        println!("{} {label}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(label);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(format!("expectation failed: {}", failed.join(", "))))
    }
}
