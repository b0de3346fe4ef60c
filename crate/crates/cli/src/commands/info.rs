use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use eventforge::format::{decode_metadata, scan_events, StreamSummary, DEFAULT_STEP_MICROS};
use eventforge::Micros;

use crate::error::{CliError, CliResult};
use crate::io::read_all;

#[derive(Debug, Args)]
pub struct InfoArgs {
    /// Binary event stream; `-` for stdin.
    pub events: PathBuf,
    /// Metadata stream to check against the event stream.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STEP_MICROS)]
    pub step_us: Micros,
}

/// Bucket label for power-of-two histogram bins: 0, 1, 2-3, 4-7, ...
fn bucket(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        usize::BITS as usize - n.leading_zeros() as usize
    }
}

fn bucket_label(b: usize) -> String {
    match b {
        0 => "0".to_owned(),
        1 => "1".to_owned(),
        _ => format!("{}-{}", 1usize << (b - 1), (1usize << b) - 1),
    }
}

pub fn report(summary: &StreamSummary, step_micros: Micros, metadata: Option<(usize, usize)>) -> String {
    let mut out = String::new();
    let steps = summary.steps;
    let events = summary.events();
    let _ = writeln!(out, "events      {events}");
    let _ = writeln!(out, "positive    {}", summary.positive);
    let _ = writeln!(out, "negative    {}", summary.negative);
    if summary.trailing > 0 {
        let _ = writeln!(out, "trailing    {} (after the last tick)", summary.trailing);
    }
    let _ = writeln!(out, "steps       {steps}");
    let _ = writeln!(out, "step_us     {step_micros}");
    let _ = writeln!(out, "duration_s  {:.6}", steps as f64 * step_micros as f64 * 1e-6);
    if let Some((frames, fields)) = metadata {
        let verdict = if frames == steps { "matches" } else { "MISMATCH" };
        let _ = writeln!(out, "metadata    {frames} frames x {fields} fields ({verdict})");
    }
    let per_step: Vec<usize> = summary.events_per_step().collect();
    if let (Some(min), Some(max)) = (per_step.iter().min(), per_step.iter().max()) {
        let mean = per_step.iter().sum::<usize>() as f64 / per_step.len() as f64;
        let _ = writeln!(out, "per_step    min {min} mean {mean:.2} max {max}");
        let mut hist = vec![0usize; bucket(*max) + 1];
        for &n in &per_step {
            hist[bucket(n)] += 1;
        }
        let _ = writeln!(out, "histogram (events per step: steps)");
        for (b, count) in hist.iter().enumerate().filter(|(_, c)| **c > 0) {
            let _ = writeln!(out, "  {:>13}  {count}", bucket_label(b));
        }
    }
    out
}

pub fn run(args: &InfoArgs) -> CliResult<()> {
    let bytes = read_all(&args.events)?;
    let summary = scan_events(&bytes).map_err(|e| CliError::data(format!("{}: {e}", args.events.display())))?;
    let metadata = match &args.metadata {
        Some(path) => {
            let m = decode_metadata(&read_all(path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            Some((m.frames(), m.fields))
        }
        None => None,
    };
    print!("{}", report(&summary, args.step_us, metadata));
    match metadata {
        Some((frames, _)) if frames != summary.steps => Err(CliError::data(format!(
            "metadata has {frames} frames but the event stream has {} ticks",
            summary.steps
        ))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buckets_are_powers_of_two() {
        assert_eq!([0, 1, 2, 3, 4, 7, 8].map(bucket), [0, 1, 2, 2, 3, 3, 4]);
        assert_eq!(bucket_label(3), "4-7");
    }
}
