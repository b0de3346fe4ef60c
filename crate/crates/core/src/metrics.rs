//! Keypoint accuracy: root-aligned 3-D PCK, palm-normalised 2-D PCK and the
//! area under a PCK curve.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KEYPOINTS: usize = 21;
pub const WRIST: usize = 0;
pub const MIDDLE_MCP: usize = 9;

/// The 21 hand keypoints of one frame, in pixels (`D = 2`) or millimetres
/// (`D = 3`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeypointSet<const D: usize> {
    pub points: [[f64; D]; KEYPOINTS],
}

pub type Keypoints2 = KeypointSet<2>;
pub type Keypoints3 = KeypointSet<3>;

impl<const D: usize> KeypointSet<D> {
    pub fn new(points: [[f64; D]; KEYPOINTS]) -> Self {
        KeypointSet { points }
    }

    pub fn from_slice(points: &[[f64; D]]) -> Result<Self> {
        let points: [[f64; D]; KEYPOINTS] = points.try_into().map_err(|_| Error::DimensionMismatch {
            expected: format!("{KEYPOINTS} keypoints"),
            actual: format!("{}", points.len()),
        })?;
        Ok(KeypointSet { points })
    }

    /// Every point shifted so the wrist sits at the origin.
    pub fn root_aligned(&self) -> Self {
        let root = self.points[WRIST];
        KeypointSet {
            points: self.points.map(|p| std::array::from_fn(|d| p[d] - root[d])),
        }
    }

    pub fn translated(&self, offset: [f64; D]) -> Self {
        KeypointSet {
            points: self.points.map(|p| std::array::from_fn(|d| p[d] + offset[d])),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        KeypointSet {
            points: self.points.map(|p| p.map(|v| v * factor)),
        }
    }

    /// Wrist to middle-finger MCP distance.
    pub fn palm_length(&self) -> f64 {
        distance(&self.points[WRIST], &self.points[MIDDLE_MCP])
    }
}

fn distance<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// How correct keypoints are aggregated into one value per threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pooling {
    /// Fraction over all (frame, keypoint) pairs.
    #[default]
    AllKeypoints,
    /// Fraction per frame, then averaged over frames.
    PerFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PckCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

impl PckCurve {
    pub fn auc(&self) -> Result<f64> {
        auc(&self.thresholds, &self.values)
    }

    pub fn at(&self, threshold: f64) -> Option<f64> {
        self.thresholds.iter().position(|&t| t == threshold).map(|i| self.values[i])
    }
}

/// `0, 1, …, 100` millimetres.
pub fn default_thresholds_mm() -> Vec<f64> {
    (0..=100).map(f64::from).collect()
}

/// `0, 0.01, …, 1.0` palm lengths.
pub fn default_palm_fractions() -> Vec<f64> {
    (0..=100).map(|i| f64::from(i) / 100.0).collect()
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("thresholds", "must be finite"));
    }
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("thresholds", "must be sorted ascending"));
    }
    Ok(())
}

/// Fraction of errors `<=` each threshold. `errors` holds one row of
/// `KEYPOINTS` values per frame.
fn curve_from_errors(errors: &[f64], thresholds: &[f64], pooling: Pooling) -> Result<PckCurve> {
    check_thresholds(thresholds)?;
    if errors.is_empty() {
        return Err(Error::invalid("keypoints", "no frames to evaluate"));
    }
    let values = match pooling {
        Pooling::AllKeypoints => {
            let mut sorted = errors.to_vec();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len() as f64;
            thresholds
                .iter()
                .map(|&t| sorted.partition_point(|&e| e <= t) as f64 / n)
                .collect()
        }
        Pooling::PerFrame => {
            let frames = errors.len() / KEYPOINTS;
            thresholds
                .iter()
                .map(|&t| {
                    let sum: f64 = errors
                        .chunks_exact(KEYPOINTS)
                        .map(|row| row.iter().filter(|&&e| e <= t).count() as f64 / KEYPOINTS as f64)
                        .sum();
                    sum / frames as f64
                })
                .collect()
        }
    };
    Ok(PckCurve {
        thresholds: thresholds.to_vec(),
        values,
    })
}

fn check_lengths(pred: usize, gt: usize) -> Result<()> {
    if pred != gt {
        return Err(Error::DimensionMismatch {
            expected: format!("{gt} predicted frames"),
            actual: format!("{pred}"),
        });
    }
    Ok(())
}

/// Per-keypoint Euclidean errors after aligning each frame's wrist to the
/// origin.
pub fn root_aligned_errors(pred: &[Keypoints3], gt: &[Keypoints3]) -> Result<Vec<f64>> {
    check_lengths(pred.len(), gt.len())?;
    let mut errors = Vec::with_capacity(pred.len() * KEYPOINTS);
    for (p, g) in pred.iter().zip(gt) {
        let (p, g) = (p.root_aligned(), g.root_aligned());
        errors.extend(p.points.iter().zip(&g.points).map(|(a, b)| distance(a, b)));
    }
    Ok(errors)
}

/// Root-aligned 3-D PCK with thresholds in the keypoints' unit.
pub fn pck3d(pred: &[Keypoints3], gt: &[Keypoints3], thresholds: &[f64], pooling: Pooling) -> Result<PckCurve> {
    curve_from_errors(&root_aligned_errors(pred, gt)?, thresholds, pooling)
}

/// Mean wrist to middle-MCP distance over the ground-truth sequence.
pub fn mean_palm_length(gt: &[Keypoints2]) -> f64 {
    gt.iter().map(|k| k.palm_length()).sum::<f64>() / gt.len() as f64
}

/// Per-keypoint 2-D errors in units of the sequence's mean palm length.
pub fn palm_normalized_errors(pred: &[Keypoints2], gt: &[Keypoints2]) -> Result<Vec<f64>> {
    check_lengths(pred.len(), gt.len())?;
    if gt.is_empty() {
        return Err(Error::invalid("keypoints", "no frames to evaluate"));
    }
    let palm = mean_palm_length(gt);
    if !(palm > 0.0 && palm.is_finite()) {
        return Err(Error::invalid("palm length", format!("{palm} is not a positive length")));
    }
    let mut errors = Vec::with_capacity(pred.len() * KEYPOINTS);
    for (p, g) in pred.iter().zip(gt) {
        errors.extend(p.points.iter().zip(&g.points).map(|(a, b)| distance(a, b) / palm));
    }
    Ok(errors)
}

/// 2-D PCK with thresholds given as fractions of the mean palm length.
pub fn pck2d_palm(pred: &[Keypoints2], gt: &[Keypoints2], fractions: &[f64], pooling: Pooling) -> Result<PckCurve> {
    curve_from_errors(&palm_normalized_errors(pred, gt)?, fractions, pooling)
}

/// Trapezoidal area under the curve divided by the threshold range.
pub fn auc(thresholds: &[f64], values: &[f64]) -> Result<f64> {
    if thresholds.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} curve values", thresholds.len()),
            actual: format!("{}", values.len()),
        });
    }
    if thresholds.len() < 2 {
        return Err(Error::invalid("thresholds", "need at least two"));
    }
    check_thresholds(thresholds)?;
    let range = thresholds[thresholds.len() - 1] - thresholds[0];
    if !(range > 0.0) {
        return Err(Error::invalid("thresholds", "span an empty range"));
    }
    let area: f64 = thresholds
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (t[1] - t[0]) * (v[0] + v[1]) * 0.5)
        .sum();
    Ok(area / range)
}

/// Keypoints read from CSV, keyed by frame number.
#[derive(Debug, Clone, PartialEq)]
pub enum KeypointTable {
    Planar(Vec<(u64, Keypoints2)>),
    Spatial(Vec<(u64, Keypoints3)>),
}

impl KeypointTable {
    pub fn dims(&self) -> usize {
        match self {
            KeypointTable::Planar(_) => 2,
            KeypointTable::Spatial(_) => 3,
        }
    }

    pub fn frames(&self) -> Vec<u64> {
        match self {
            KeypointTable::Planar(v) => v.iter().map(|(f, _)| *f).collect(),
            KeypointTable::Spatial(v) => v.iter().map(|(f, _)| *f).collect(),
        }
    }
}

fn collect_frames<const D: usize>(rows: Vec<(usize, u64, usize, Vec<f64>)>) -> Result<Vec<(u64, KeypointSet<D>)>> {
    let mut frames: BTreeMap<u64, ([[f64; D]; KEYPOINTS], [bool; KEYPOINTS])> = BTreeMap::new();
    for (line, frame, joint, coords) in rows {
        let entry = frames.entry(frame).or_insert(([[0.0; D]; KEYPOINTS], [false; KEYPOINTS]));
        if entry.1[joint] {
            return Err(Error::Parse {
                line,
                reason: format!("joint {joint} of frame {frame} appears twice"),
            });
        }
        entry.1[joint] = true;
        entry.0[joint] = std::array::from_fn(|d| coords[d]);
    }
    frames
        .into_iter()
        .map(|(frame, (points, seen))| match seen.iter().position(|s| !s) {
            Some(j) => Err(Error::Parse {
                line: 0,
                reason: format!("frame {frame} lacks joint {j}"),
            }),
            None => Ok((frame, KeypointSet { points })),
        })
        .collect()
}

/// Parses `frame,joint,x,y` or `frame,joint,x,y,z` rows. A leading header
/// row and `#` comments are skipped; every frame needs all 21 joints.
pub fn parse_keypoints_csv(text: &str) -> Result<KeypointTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(i + 1, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        let err = |reason: String| Error::Parse { line, reason };
        if rows.is_empty() && width.is_none() && record.get(0).is_some_and(|f| f.parse::<u64>().is_err()) {
            // header row
            continue;
        }
        let w = record.len();
        if w != 4 && w != 5 {
            return Err(err(format!("expected 4 or 5 fields, found {w}")));
        }
        match width {
            None => width = Some(w),
            Some(prev) if prev != w => return Err(err(format!("row has {w} fields, earlier rows have {prev}"))),
            Some(_) => {}
        }
        let frame: u64 = record[0]
            .parse()
            .map_err(|e| err(format!("bad frame `{}`: {e}", &record[0])))?;
        let joint: usize = record[1]
            .parse()
            .map_err(|e| err(format!("bad joint `{}`: {e}", &record[1])))?;
        if joint >= KEYPOINTS {
            return Err(err(format!("joint {joint} is not below {KEYPOINTS}")));
        }
        let coords = (2..w)
            .map(|c| {
                let v: f64 = record[c].parse().map_err(|e| err(format!("bad coordinate `{}`: {e}", &record[c])))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(err(format!("non-finite coordinate `{}`", &record[c])))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, frame, joint, coords));
    }
    match width {
        None => Err(Error::Parse {
            line: 0,
            reason: "no keypoint rows".into(),
        }),
        Some(4) => Ok(KeypointTable::Planar(collect_frames(rows)?)),
        Some(_) => Ok(KeypointTable::Spatial(collect_frames(rows)?)),
    }
}
