//! Jump-based noisy-frame detection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::skeleton::SkeletonSequence;

pub const DEFAULT_JUMP_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseDetectorConfig {
    /// Meters.
    pub jump_threshold: f64,
    /// Flag a frame when any single joint jumps. When false, the mean
    /// displacement over all joints is compared instead.
    pub per_joint: bool,
    /// Frame lag used for differencing.
    pub window: usize,
}

impl Default for NoiseDetectorConfig {
    fn default() -> Self {
        Self {
            jump_threshold: DEFAULT_JUMP_THRESHOLD,
            per_joint: true,
            window: 1,
        }
    }
}

impl NoiseDetectorConfig {
    pub fn with_threshold(jump_threshold: f64) -> Self {
        Self {
            jump_threshold,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.jump_threshold.is_finite() && self.jump_threshold > 0.0) {
            return Err("jump_threshold must be positive".into());
        }
        if self.window == 0 {
            return Err("window must be at least 1".into());
        }
        Ok(())
    }
}

/// Indices of frames whose joints jump more than the threshold relative to
/// the frame `window` steps earlier. Frame 0 is never flagged.
pub fn detect_noisy_frames(seq: &SkeletonSequence, cfg: &NoiseDetectorConfig) -> BTreeSet<usize> {
    let frames = seq.frames();
    let window = cfg.window.max(1);
    (1..frames.len())
        .filter(|&t| {
            let (cur, prev) = (frames[t].positions(), frames[t.saturating_sub(window)].positions());
            let mut jumps = cur.iter().zip(prev.iter()).map(|(a, b)| (a - b).norm());
            if cfg.per_joint {
                jumps.any(|d| d > cfg.jump_threshold)
            } else {
                jumps.sum::<f64>() / cur.len() as f64 > cfg.jump_threshold
            }
        })
        .collect()
}
