//! Deterministic synthetic faces laid out like
//! [`LandmarkConnectivity::default_face`](crate::landmarks::LandmarkConnectivity::default_face).
//!
//! Rings (eyes, eyebrows, mouth) are sampled at equal arc length so edge
//! lengths within a ring are uniform. The mouth ring degenerates to a
//! doubled segment when fully closed; blinking collapses the eye rings the
//! same way.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::landmarks::{Emotion, FacialPose, LandmarkSequence, Point3};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Motion {
    Static,
    MouthOpenClose,
    EyeBlink,
}

impl FromStr for Motion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "static" => Ok(Motion::Static),
            "mouth_open_close" | "mouth" => Ok(Motion::MouthOpenClose),
            "eye_blink" | "blink" => Ok(Motion::EyeBlink),
            other => Err(Error::Parameter(format!("unknown motion '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_frames: usize,
    pub motion: Motion,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n_frames: usize, motion: Motion, noise_sd: f64) -> Self {
        Self {
            n_frames,
            motion,
            noise_sd,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

pub const LANDMARK_COUNT: usize = 83;
/// Mouth opening (vertical semi-axis, mm) at full openness.
pub const MOUTH_MAX_HALF_HEIGHT: f64 = 12.0;
pub const MOUTH_HALF_WIDTH: f64 = 25.0;
const MOUTH_CENTER: [f64; 2] = [0.0, -32.0];
const STATIC_OPENNESS: f64 = 0.5;

/// Landmark index ranges of the bundled layout.
pub mod layout {
    use std::ops::Range;
    pub const LEFT_EYE: Range<usize> = 0..8;
    pub const RIGHT_EYE: Range<usize> = 8..16;
    pub const LEFT_EYEBROW: Range<usize> = 16..26;
    pub const RIGHT_EYEBROW: Range<usize> = 26..36;
    pub const NOSE: Range<usize> = 36..48;
    pub const MOUTH: Range<usize> = 48..68;
    pub const JAWLINE: Range<usize> = 68..83;
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LandmarkSequence> {
    if spec.n_frames == 0 {
        return Err(Error::Parameter("n_frames must be at least 1".into()));
    }
    if !(spec.noise_sd >= 0.0 && spec.noise_sd.is_finite()) {
        return Err(Error::Parameter(format!("noise_sd {} must be >= 0", spec.noise_sd)));
    }
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut frames = Vec::with_capacity(spec.n_frames);
    for t in 0..spec.n_frames {
        let phase = if spec.n_frames > 1 {
            (PI * t as f64 / (spec.n_frames - 1) as f64).sin()
        } else {
            0.0
        };
        let (openness, blink) = match spec.motion {
            Motion::Static => (STATIC_OPENNESS, 0.0),
            Motion::MouthOpenClose => (phase, 0.0),
            Motion::EyeBlink => (STATIC_OPENNESS, phase),
        };
        let mut points = face_points(openness, blink);
        if spec.noise_sd > 0.0 {
            for p in &mut points {
                for c in p.iter_mut() {
                    *c += noise.sample(&mut rng);
                }
            }
        }
        frames.push(FacialPose::new(t as u32, points)?);
    }
    let emotion = match spec.motion {
        Motion::MouthOpenClose => Emotion::Surprise,
        _ => Emotion::Other,
    };
    LandmarkSequence::new(format!("synthetic-{}", spec.seed), emotion, frames)
}

/// Noise-free face with mouth `openness` in `[0, 1]` and eye closure
/// `blink` in `[0, 1]`.
pub fn face_points(openness: f64, blink: f64) -> Vec<Point3> {
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(LANDMARK_COUNT);
    let eye_half_height = 5.0 * (1.0 - blink.clamp(0.0, 1.0));
    pts.extend(ellipse_ring([-33.0, 35.0], 11.0, eye_half_height, 8));
    pts.extend(ellipse_ring([33.0, 35.0], 11.0, eye_half_height, 8));
    for cx in [-33.0, 33.0] {
        pts.extend(ellipse_ring([cx, 53.0], 19.0, 3.0, 10).into_iter().map(|[x, y]| {
            let u = (x - cx) / 19.0;
            [x, y + 3.0 * (1.0 - u * u)]
        }));
    }
    pts.extend_from_slice(&[
        [-6.0, 40.0],
        [-8.0, 28.0],
        [-11.0, 16.0],
        [-15.0, 5.0],
        [-10.0, -1.0],
        [-3.0, -3.0],
        [3.0, -3.0],
        [10.0, -1.0],
        [15.0, 5.0],
        [11.0, 16.0],
        [8.0, 28.0],
        [6.0, 40.0],
    ]);
    pts.extend(ellipse_ring(
        MOUTH_CENTER,
        MOUTH_HALF_WIDTH,
        MOUTH_MAX_HALF_HEIGHT * openness.clamp(0.0, 1.0),
        20,
    ));
    for k in 0..15 {
        let angle = (195.0 + 150.0 * k as f64 / 14.0).to_radians();
        pts.push([70.0 * angle.cos(), 15.0 + 85.0 * angle.sin()]);
    }
    debug_assert_eq!(pts.len(), LANDMARK_COUNT);

    pts.iter()
        .enumerate()
        .map(|(i, &[x, y])| {
            let mut z = 30.0 - 0.004 * x * x - 0.002 * y * y;
            if layout::NOSE.contains(&i) {
                z += 12.0 * (1.0 - x.abs() / 16.0);
            }
            [x, y, z]
        })
        .collect()
}

/// `k` points on an axis-aligned ellipse at equal arc-length spacing,
/// starting at the rightmost point and running counter-clockwise.
fn ellipse_ring(center: [f64; 2], a: f64, b: f64, k: usize) -> Vec<[f64; 2]> {
    const DENSE: usize = 4096;
    let at = |theta: f64| [center[0] + a * theta.cos(), center[1] + b * theta.sin()];
    let mut cumulative = Vec::with_capacity(DENSE + 1);
    cumulative.push(0.0);
    let mut prev = at(0.0);
    for s in 1..=DENSE {
        let p = at(2.0 * PI * s as f64 / DENSE as f64);
        let step = ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
        cumulative.push(cumulative[s - 1] + step);
        prev = p;
    }
    let total = cumulative[DENSE];
    (0..k)
        .map(|m| {
            let target = total * m as f64 / k as f64;
            let s = cumulative.partition_point(|&c| c < target).clamp(1, DENSE);
            let span = cumulative[s] - cumulative[s - 1];
            let frac = if span > 0.0 { (target - cumulative[s - 1]) / span } else { 0.0 };
            at(2.0 * PI * (s as f64 - 1.0 + frac) / DENSE as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::LandmarkConnectivity;

    fn shoelace(points: &[Point3]) -> f64 {
        let n = points.len();
        (0..n)
            .map(|i| {
                let (p, q) = (points[i], points[(i + 1) % n]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum::<f64>()
            .abs()
            / 2.0
    }

    #[test]
    fn static_single_frame_is_deterministic() {
        let spec = SyntheticSpec::new(1, Motion::Static, 0.0);
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.frames().len(), 1);
        assert_eq!(a.landmark_count(), LANDMARK_COUNT);
    }

    #[test]
    fn mouth_area_peaks_mid_sequence() {
        let seq = generate_synthetic(&SyntheticSpec::new(10, Motion::MouthOpenClose, 0.0)).unwrap();
        let area = |t: usize| shoelace(&seq.frames()[t].points()[layout::MOUTH]);
        assert!(area(0) < area(5));
        assert!(area(9) < area(5));
        assert!(area(0) < 1e-9);
    }

    #[test]
    fn blink_collapses_eyes() {
        let seq = generate_synthetic(&SyntheticSpec::new(5, Motion::EyeBlink, 0.0)).unwrap();
        let area = |t: usize| shoelace(&seq.frames()[t].points()[layout::LEFT_EYE]);
        assert!(area(2) < 1e-9);
        assert!(area(0) > 100.0);
    }

    #[test]
    fn noisy_output_is_reproducible() {
        let spec = SyntheticSpec::new(4, Motion::MouthOpenClose, 0.1).with_seed(7);
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        let c = generate_synthetic(&spec.clone().with_seed(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn matches_default_connectivity() {
        let conn = LandmarkConnectivity::default_face();
        assert_eq!(conn.landmark_count(), LANDMARK_COUNT);
        let pts = face_points(0.5, 0.0);
        for &(a, b) in conn.edges() {
            let d = ((pts[a][0] - pts[b][0]).powi(2) + (pts[a][1] - pts[b][1]).powi(2)).sqrt();
            assert!(d > 1.0 && d < 25.0, "edge ({a},{b}) has length {d}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_synthetic(&SyntheticSpec::new(0, Motion::Static, 0.0)).is_err());
        assert!(generate_synthetic(&SyntheticSpec::new(1, Motion::Static, -1.0)).is_err());
    }
}
