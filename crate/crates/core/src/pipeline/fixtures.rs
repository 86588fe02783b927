//! Synthetic demonstrations for tests, demos and acceptance runs.
//!
//! The generated skeleton stands with x up, y to the subject's left and z
//! pointing away from the camera. Each move drives shoulder elevation, elbow
//! bend and head tilt with sinusoids that start and end at the move's rest
//! parameters, so moves can be chained without position jumps.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::{Unit, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::annotations::{AnnotationSet, Provenance, Segment};
use super::recording::save_recording;
use super::PipelineError;
use crate::skeleton::{JointId, SkeletonFrame, SkeletonSequence};

pub const FIXTURE_RATE: f64 = 30.0;
pub const FIXTURE_FRAMES: usize = 120;
pub const FIXTURE_JITTER: f64 = 0.003;

const COLLAR: [f64; 3] = [1.45, 0.0, 0.0];
const SHOULDER_HALF_WIDTH: f64 = 0.18;
const UPPER_ARM: f64 = 0.30;
const FOREARM: f64 = 0.25;
const NECK: f64 = 0.08;
const HEAD: f64 = 0.14;
/// Forward lean of the upper arm, keeps the pitch projection well defined.
const ARM_DEPTH: f64 = 0.15;

/// Pose parameters in degrees: shoulder elevation and elbow bend per arm,
/// head tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseParams {
    pub right_elevation: f64,
    pub right_bend: f64,
    pub left_elevation: f64,
    pub left_bend: f64,
    pub head_tilt: f64,
}

impl PoseParams {
    fn to_array(self) -> [f64; 5] {
        [
            self.right_elevation,
            self.right_bend,
            self.left_elevation,
            self.left_bend,
            self.head_tilt,
        ]
    }

    fn from_array(a: [f64; 5]) -> Self {
        Self {
            right_elevation: a[0],
            right_bend: a[1],
            left_elevation: a[2],
            left_bend: a[3],
            head_tilt: a[4],
        }
    }

    fn lerp(self, other: Self, s: f64) -> Self {
        let (a, b) = (self.to_array(), other.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] + (b[i] - a[i]) * s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Teacup,
    Ladle,
    Fork,
    Spoon,
    Knife,
    SaltShaker,
    Teapot,
}

struct MoveShape {
    rest: [f64; 5],
    amplitude: [f64; 5],
    phase: [f64; 5],
    hz: f64,
}

impl Move {
    pub const ALL: [Move; 7] = [
        Move::Teacup,
        Move::Ladle,
        Move::Fork,
        Move::Spoon,
        Move::Knife,
        Move::SaltShaker,
        Move::Teapot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Move::Teacup => "teacup",
            Move::Ladle => "ladle",
            Move::Fork => "fork",
            Move::Spoon => "spoon",
            Move::Knife => "knife",
            Move::SaltShaker => "salt_shaker",
            Move::Teapot => "teapot",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    // Frequencies are multiples of 0.25 Hz so a 4 s move ends at rest.
    fn shape(self) -> MoveShape {
        let (rest, amplitude, phase, hz) = match self {
            Move::Teacup => ([30.0, 80.0, 15.0, 20.0, 15.0], [25.0, 30.0, 0.0, 0.0, 5.0], [0.0; 5], 0.5),
            Move::Ladle => ([45.0, 70.0, 40.0, 60.0, 20.0], [15.0, 20.0, 0.0, 0.0, 4.0], [0.0, PI / 2.0, 0.0, 0.0, 0.0], 1.0),
            Move::Fork => ([35.0, 100.0, 35.0, 100.0, 25.0], [10.0, 20.0, 10.0, 20.0, 5.0], [0.0; 5], 0.75),
            Move::Spoon => ([40.0, 110.0, 20.0, 30.0, 20.0], [20.0, 25.0, 0.0, 0.0, 8.0], [0.0; 5], 0.5),
            Move::Knife => ([30.0, 90.0, 30.0, 90.0, 25.0], [8.0, 15.0, 8.0, 15.0, 3.0], [0.0, 0.0, PI, PI, 0.0], 1.5),
            Move::SaltShaker => ([70.0, 40.0, 20.0, 25.0, 15.0], [20.0, 15.0, 0.0, 0.0, 5.0], [0.0; 5], 1.0),
            Move::Teapot => ([55.0, 60.0, 50.0, 50.0, 25.0], [25.0, 20.0, 20.0, 15.0, 10.0], [0.0, 0.0, PI, 0.0, 0.0], 0.5),
        };
        MoveShape { rest, amplitude, phase, hz }
    }

    pub fn rest(self) -> PoseParams {
        PoseParams::from_array(self.shape().rest)
    }

    /// Pose parameters at time `t` seconds.
    pub fn params(self, t: f64) -> PoseParams {
        let s = self.shape();
        PoseParams::from_array(std::array::from_fn(|i| {
            let w = 2.0 * PI * s.hz * t;
            s.rest[i] + s.amplitude[i] * ((w + s.phase[i]).sin() - s.phase[i].sin())
        }))
    }
}

fn arm(shoulder: Vector3<f64>, side: f64, elevation: f64, bend: f64) -> (Vector3<f64>, Vector3<f64>) {
    let phi = elevation.to_radians();
    let upper = Unit::new_normalize(Vector3::new(phi.cos(), side * phi.sin(), ARM_DEPTH));
    let depth = Vector3::z();
    let across = Unit::new_normalize(depth - upper.into_inner() * upper.dot(&depth));
    let beta = bend.to_radians();
    let fore = upper.into_inner() * beta.cos() + across.into_inner() * beta.sin();
    let elbow = shoulder + upper.into_inner() * UPPER_ARM;
    (elbow, elbow + fore * FOREARM)
}

/// Noise-free joint positions for a set of pose parameters.
pub fn pose_positions(p: &PoseParams) -> [Vector3<f64>; 9] {
    let collar = Vector3::from(COLLAR);
    let right_shoulder = collar - Vector3::y() * SHOULDER_HALF_WIDTH;
    let left_shoulder = collar + Vector3::y() * SHOULDER_HALF_WIDTH;
    let (right_elbow, right_wrist) = arm(right_shoulder, -1.0, p.right_elevation, p.right_bend);
    let (left_elbow, left_wrist) = arm(left_shoulder, 1.0, p.left_elevation, p.left_bend);
    let neck = collar + Vector3::x() * NECK;
    let h = p.head_tilt.to_radians();
    let head = neck + Vector3::new(h.cos(), 0.0, h.sin()) * HEAD;
    [
        right_wrist,
        right_elbow,
        right_shoulder,
        collar,
        neck,
        head,
        left_shoulder,
        left_elbow,
        left_wrist,
    ]
}

fn build(label: &str, params: &[PoseParams], seed: u64) -> SkeletonSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, FIXTURE_JITTER).expect("valid std");
    let frames = params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut pos = pose_positions(p);
            for v in pos.iter_mut() {
                *v += Vector3::new(jitter.sample(&mut rng), jitter.sample(&mut rng), jitter.sample(&mut rng));
            }
            SkeletonFrame::new(i as f64 / FIXTURE_RATE, pos).expect("finite fixture")
        })
        .collect();
    SkeletonSequence::new(label, frames, Some(FIXTURE_RATE)).expect("valid fixture")
}

/// One 4 s demonstration of `mv` at 30 Hz with seeded sensor jitter.
pub fn synthetic_move(mv: Move, seed: u64) -> SkeletonSequence {
    let params: Vec<_> = (0..FIXTURE_FRAMES)
        .map(|i| mv.params(i as f64 / FIXTURE_RATE))
        .collect();
    build(mv.name(), &params, seed)
}

/// Several moves chained with `gap` blending frames between them, plus the
/// matching annotation set (one segment per move).
pub fn synthetic_session(
    id: &str,
    moves: &[Move],
    gap: usize,
    seed: u64,
) -> (SkeletonSequence, AnnotationSet) {
    let mut params = Vec::new();
    let mut segments = Vec::new();
    for (k, mv) in moves.iter().enumerate() {
        if k > 0 {
            let (from, to) = (moves[k - 1].rest(), mv.rest());
            params.extend((1..=gap).map(|i| from.lerp(to, i as f64 / (gap + 1) as f64)));
        }
        let start = params.len();
        params.extend((0..FIXTURE_FRAMES).map(|i| mv.params(i as f64 / FIXTURE_RATE)));
        segments.push(Segment::new(mv.name(), start, params.len() - 1));
    }
    let seq = build(id, &params, seed);
    let ann = AnnotationSet {
        recording_id: id.to_string(),
        segments,
        noisy_frames: Default::default(),
        provenance: Provenance::Manual,
    };
    (seq, ann)
}

/// Copy of `seq` with `joint` displaced by `offset` in each listed frame.
pub fn inject_jumps(
    seq: &SkeletonSequence,
    frames: &[usize],
    joint: JointId,
    offset: Vector3<f64>,
) -> SkeletonSequence {
    let out = seq
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if !frames.contains(&i) {
                return f.clone();
            }
            f.map_positions(|j, p| if j == joint { p + offset } else { p })
                .expect("finite offset")
        })
        .collect();
    SkeletonSequence::new(seq.action_label(), out, seq.sample_rate_hint()).expect("same timestamps")
}

pub const SESSION_ID: &str = "session";
pub const NOISY_ID: &str = "teapot_noisy";
pub const NOISY_FRAMES: [usize; 3] = [30, 61, 95];

/// The noisy teapot fixture: single-frame 1 m right-wrist jumps.
pub fn noisy_teapot(seed: u64) -> SkeletonSequence {
    let clean = synthetic_move(Move::Teapot, seed);
    let seq = inject_jumps(&clean, &NOISY_FRAMES, JointId::RightWrist, -Vector3::x());
    SkeletonSequence::new(NOISY_ID, seq.frames().to_vec(), seq.sample_rate_hint()).expect("valid")
}

/// Writes the fixture set under `dir`:
///
/// * `recordings/<move>.jsonl` for every move,
/// * `recordings/session.jsonl` with `annotations/session.json`
///   (teacup, fork and knife chained),
/// * `recordings/teapot_noisy.jsonl` with injected jumps.
///
/// Returns the written paths in a stable order.
pub fn gen_fixtures(dir: &Path, seed: u64) -> Result<Vec<PathBuf>, PipelineError> {
    let rec_dir = dir.join("recordings");
    let ann_dir = dir.join("annotations");
    for d in [&rec_dir, &ann_dir] {
        std::fs::create_dir_all(d).map_err(|e| PipelineError::io(d, e))?;
    }
    let mut written = Vec::new();
    for (k, mv) in Move::ALL.iter().enumerate() {
        let path = rec_dir.join(format!("{}.jsonl", mv.name()));
        save_recording(&synthetic_move(*mv, seed.wrapping_add(k as u64)), &path)?;
        written.push(path);
    }

    let (session, ann) = synthetic_session(
        SESSION_ID,
        &[Move::Teacup, Move::Fork, Move::Knife],
        15,
        seed.wrapping_add(100),
    );
    let path = rec_dir.join(format!("{SESSION_ID}.jsonl"));
    save_recording(&session, &path)?;
    written.push(path);
    let path = ann_dir.join(format!("{SESSION_ID}.json"));
    let text = serde_json::to_string_pretty(&ann).expect("annotations serialize");
    std::fs::write(&path, text + "\n").map_err(|e| PipelineError::io(&path, e))?;
    written.push(path);

    let path = rec_dir.join(format!("{NOISY_ID}.jsonl"));
    save_recording(&noisy_teapot(seed.wrapping_add(200)), &path)?;
    written.push(path);
    Ok(written)
}
