//! Segment boundaries and noisy-frame marks for a recording.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skeleton::{SkeletonError, SkeletonSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    Manual,
    Detector,
    Merged,
}

/// Inclusive frame range `[start_frame, end_frame]` holding one action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub action_label: String,
    pub start_frame: usize,
    pub end_frame: usize,
}

impl Segment {
    pub fn new(action_label: impl Into<String>, start_frame: usize, end_frame: usize) -> Self {
        Self {
            action_label: action_label.into(),
            start_frame,
            end_frame,
        }
    }

    pub fn contains(&self, frame: usize) -> bool {
        (self.start_frame..=self.end_frame).contains(&frame)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub recording_id: String,
    #[serde(default)]
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub noisy_frames: BTreeSet<usize>,
    #[serde(default)]
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnotationError {
    #[error("segment {segment} starts after it ends ({start} > {end})")]
    StartAfterEnd {
        segment: usize,
        start: usize,
        end: usize,
    },
    #[error("segment {segment} ends at frame {end}, outside a recording of {frames} frames")]
    SegmentOutOfBounds {
        segment: usize,
        end: usize,
        frames: usize,
    },
    #[error("segments overlap: {first} and {second}")]
    Overlap { first: usize, second: usize },
    #[error("noisy frame {frame} outside a recording of {frames} frames")]
    NoisyOutOfBounds { frame: usize, frames: usize },
    #[error("segment {segment} ({label}) has no frames left after noise removal")]
    EmptySegment { segment: usize, label: String },
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
}

impl AnnotationSet {
    /// One segment spanning the whole recording, nothing marked noisy.
    pub fn whole(recording_id: impl Into<String>, label: impl Into<String>, frames: usize) -> Self {
        Self {
            recording_id: recording_id.into(),
            segments: vec![Segment::new(label, 0, frames.saturating_sub(1))],
            noisy_frames: BTreeSet::new(),
            provenance: Provenance::Manual,
        }
    }

    pub fn validate(&self, frames: usize) -> Result<(), AnnotationError> {
        for (i, s) in self.segments.iter().enumerate() {
            if s.start_frame > s.end_frame {
                return Err(AnnotationError::StartAfterEnd {
                    segment: i,
                    start: s.start_frame,
                    end: s.end_frame,
                });
            }
            if s.end_frame >= frames {
                return Err(AnnotationError::SegmentOutOfBounds {
                    segment: i,
                    end: s.end_frame,
                    frames,
                });
            }
        }
        let mut order: Vec<usize> = (0..self.segments.len()).collect();
        order.sort_by_key(|&i| (self.segments[i].start_frame, i));
        for w in order.windows(2) {
            let (a, b) = (&self.segments[w[0]], &self.segments[w[1]]);
            if b.start_frame <= a.end_frame {
                let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(AnnotationError::Overlap { first, second });
            }
        }
        if let Some(&frame) = self.noisy_frames.iter().find(|&&f| f >= frames) {
            return Err(AnnotationError::NoisyOutOfBounds { frame, frames });
        }
        Ok(())
    }

    /// Adds detector suggestions to the noisy set.
    pub fn merge_noisy(&mut self, detected: &BTreeSet<usize>) {
        if detected.is_subset(&self.noisy_frames) {
            return;
        }
        self.noisy_frames.extend(detected.iter().copied());
        self.provenance = match self.provenance {
            Provenance::Detector => Provenance::Detector,
            _ => Provenance::Merged,
        };
    }
}

/// Frames of one segment with noisy frames removed. Frame content and
/// timestamps are copied unchanged.
pub fn segment_sequence(
    seq: &SkeletonSequence,
    ann: &AnnotationSet,
    segment: usize,
) -> Result<SkeletonSequence, AnnotationError> {
    let s = &ann.segments[segment];
    let frames: Vec<_> = (s.start_frame..=s.end_frame)
        .filter(|f| !ann.noisy_frames.contains(f))
        .map(|f| seq.frames()[f].clone())
        .collect();
    if frames.is_empty() {
        return Err(AnnotationError::EmptySegment {
            segment,
            label: s.action_label.clone(),
        });
    }
    Ok(SkeletonSequence::new(
        s.action_label.clone(),
        frames,
        seq.sample_rate_hint(),
    )?)
}

/// Splits a recording into one sequence per annotated segment.
pub fn apply_annotations(
    seq: &SkeletonSequence,
    ann: &AnnotationSet,
) -> Result<Vec<SkeletonSequence>, AnnotationError> {
    ann.validate(seq.len())?;
    (0..ann.segments.len())
        .map(|i| segment_sequence(seq, ann, i))
        .collect()
}
