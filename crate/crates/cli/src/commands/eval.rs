use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use eventforge::metrics::{parse_keypoints_csv, pck2d_palm, pck3d, KeypointSet, KeypointTable, PckCurve, Pooling};
use image::{Rgb, RgbImage};

use crate::error::{CliError, CliResult};
use crate::io::{manifest_beside, read_text, write_all};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolingArg {
    /// Pool every (frame, keypoint) pair.
    All,
    /// Average per-frame fractions.
    PerFrame,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted keypoints: `frame,joint,x,y[,z]` rows.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth keypoints, same layout.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_enum, default_value_t = PoolingArg::All)]
    pub pooling: PoolingArg,
    /// Largest threshold: millimetres for 3-D input (default 100), palm
    /// lengths for 2-D input (default 1).
    #[arg(long)]
    pub max_threshold: Option<f64>,
    /// Curve CSV (`threshold,pck`); `-` for stdout.
    #[arg(short = 'o', long, default_value = "-")]
    pub output: PathBuf,
    /// Optional PNG plot of the curve.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

fn load(path: &Path) -> CliResult<KeypointTable> {
    parse_keypoints_csv(&read_text(path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn paired<const D: usize>(
    pred: Vec<(u64, KeypointSet<D>)>,
    gt: Vec<(u64, KeypointSet<D>)>,
) -> CliResult<(Vec<KeypointSet<D>>, Vec<KeypointSet<D>>)> {
    let pf: BTreeSet<u64> = pred.iter().map(|(f, _)| *f).collect();
    let gf: BTreeSet<u64> = gt.iter().map(|(f, _)| *f).collect();
    if let Some(f) = pf.symmetric_difference(&gf).next() {
        let side = if pf.contains(f) { "ground truth" } else { "predictions" };
        return Err(CliError::data(format!("frame {f} is missing from the {side}")));
    }
    // both tables are sorted by frame
    Ok((pred.into_iter().map(|(_, k)| k).collect(), gt.into_iter().map(|(_, k)| k).collect()))
}

/// 101 evenly spaced thresholds from 0 to `max`.
pub fn thresholds(max: f64) -> Vec<f64> {
    (0..=100).map(|i| max * i as f64 / 100.0).collect()
}

pub fn evaluate(pred: KeypointTable, gt: KeypointTable, pooling: Pooling, max: Option<f64>) -> CliResult<PckCurve> {
    let curve = match (pred, gt) {
        (KeypointTable::Spatial(p), KeypointTable::Spatial(g)) => {
            let (p, g) = paired(p, g)?;
            pck3d(&p, &g, &thresholds(max.unwrap_or(100.0)), pooling)?
        }
        (KeypointTable::Planar(p), KeypointTable::Planar(g)) => {
            let (p, g) = paired(p, g)?;
            pck2d_palm(&p, &g, &thresholds(max.unwrap_or(1.0)), pooling)?
        }
        (p, g) => {
            return Err(CliError::data(format!(
                "predictions are {}-D but ground truth is {}-D",
                p.dims(),
                g.dims()
            )))
        }
    };
    Ok(curve)
}

fn draw_line(img: &mut RgbImage, (x0, y0): (f64, f64), (x1, y1): (f64, f64), colour: Rgb<u8>) {
    let steps = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let s = i as f64 / steps as f64;
        let (x, y) = (x0 + s * (x1 - x0), y0 + s * (y1 - y0));
        for (dx, dy) in [(0, 0), (1, 0), (0, 1)] {
            let (px, py) = (x.round() as i64 + dx, y.round() as i64 + dy);
            if px >= 0 && py >= 0 && (px as u32) < img.width() && (py as u32) < img.height() {
                img.put_pixel(px as u32, py as u32, colour);
            }
        }
    }
}

/// Curve on a unit grid: x spans the thresholds, y spans 0..1.
pub fn plot(curve: &PckCurve) -> RgbImage {
    const W: u32 = 640;
    const H: u32 = 480;
    const M: f64 = 40.0;
    let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
    let (pw, ph) = (W as f64 - 2.0 * M, H as f64 - 2.0 * M);
    let t0 = curve.thresholds[0];
    let span = (curve.thresholds[curve.thresholds.len() - 1] - t0).max(f64::MIN_POSITIVE);
    let to_px = |t: f64, v: f64| (M + (t - t0) / span * pw, H as f64 - M - v * ph);
    let grid = Rgb([220, 220, 220]);
    for i in 1..10 {
        let f = i as f64 / 10.0;
        draw_line(&mut img, (M + f * pw, M), (M + f * pw, M + ph), grid);
        draw_line(&mut img, (M, M + f * ph), (M + pw, M + f * ph), grid);
    }
    let axis = Rgb([0, 0, 0]);
    draw_line(&mut img, (M, M), (M, M + ph), axis);
    draw_line(&mut img, (M, M + ph), (M + pw, M + ph), axis);
    let ink = Rgb([31, 119, 180]);
    for (t, v) in curve.thresholds.windows(2).zip(curve.values.windows(2)) {
        draw_line(&mut img, to_px(t[0], v[0]), to_px(t[1], v[1]), ink);
    }
    img
}

pub fn run(args: &EvalArgs) -> CliResult<()> {
    if let Some(m) = args.max_threshold {
        if !(m > 0.0 && m.is_finite()) {
            return Err(CliError::usage(format!("--max-threshold must be > 0, got {m}")));
        }
    }
    let pooling = match args.pooling {
        PoolingArg::All => Pooling::AllKeypoints,
        PoolingArg::PerFrame => Pooling::PerFrame,
    };
    let curve = evaluate(load(&args.pred)?, load(&args.gt)?, pooling, args.max_threshold)?;
    let area = curve.auc()?;

    let mut csv = String::from("threshold,pck\n");
    for (t, v) in curve.thresholds.iter().zip(&curve.values) {
        csv.push_str(&format!("{t},{v}\n"));
    }
    write_all(&args.output, csv.as_bytes())?;
    if let Some(path) = &args.plot {
        plot(&curve)
            .save(path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    }
    eprintln!("auc = {area:.6}");
    if let Some(path) = manifest_beside(&args.output) {
        let mut m = RunManifest::new("eval")
            .input(&args.pred)
            .input(&args.gt)
            .output(&args.output)
            .param("pooling", format!("{:?}", args.pooling).to_lowercase())
            .param("max_threshold", curve.thresholds[curve.thresholds.len() - 1])
            .param("auc", area);
        if let Some(p) = &args.plot {
            m = m.output(p);
        }
        m.write(&path)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_include_zero_and_max() {
        let t = thresholds(100.0);
        assert_eq!(t.len(), 101);
        assert_eq!((t[0], t[100]), (0.0, 100.0));
    }

    #[test]
    fn plot_has_requested_size() {
        let curve = PckCurve {
            thresholds: vec![0.0, 1.0],
            values: vec![0.0, 1.0],
        };
        assert_eq!(plot(&curve).dimensions(), (640, 480));
    }
}
