//! Joint-angle extraction from skeleton frames.
//!
//! Every angle is the dot-product angle between two links, except the two
//! shoulder pitches which compare the xy-plane projection of the upper arm
//! (shoulder to elbow) against the unit x-axis and take their sign from the
//! z-component of the unprojected link.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::limits::{JointLimitTable, Side};
use crate::skeleton::{
    AngleJointId, AngleTrajectory, JointAngles, JointId, SkeletonError, SkeletonFrame,
    SkeletonSequence,
};

pub const DEFAULT_LINK_EPSILON: f64 = 1e-9;

/// Vector from joint `from` to joint `to`.
pub fn link(frame: &SkeletonFrame, from: JointId, to: JointId) -> Vector3<f64> {
    frame.position(to) - frame.position(from)
}

/// Unsigned angle between two links, degrees in `[0, 180]`.
pub fn angle_between(
    l1: &Vector3<f64>,
    l2: &Vector3<f64>,
    epsilon: f64,
) -> Result<f64, SkeletonError> {
    let (n1, n2) = (l1.norm(), l2.norm());
    for norm in [n1, n2] {
        if !(norm >= epsilon) {
            return Err(SkeletonError::DegenerateLink { angle: None, norm });
        }
    }
    let cos = (l1.dot(l2) / (n1 * n2)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

/// What to do with a frame whose links are degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    #[default]
    Drop,
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionConfig {
    pub epsilon: f64,
    pub policy: DegeneratePolicy,
    pub human_limits: JointLimitTable,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_LINK_EPSILON,
            policy: DegeneratePolicy::Drop,
            human_limits: JointLimitTable::human_default(),
        }
    }
}

fn tagged(angle: AngleJointId) -> impl Fn(SkeletonError) -> SkeletonError {
    move |err| match err {
        SkeletonError::DegenerateLink { norm, .. } => SkeletonError::DegenerateLink {
            angle: Some(angle),
            norm,
        },
        other => other,
    }
}

fn pair_angle(
    frame: &SkeletonFrame,
    angle: AngleJointId,
    first: (JointId, JointId),
    second: (JointId, JointId),
    epsilon: f64,
) -> Result<f64, SkeletonError> {
    angle_between(
        &link(frame, first.0, first.1),
        &link(frame, second.0, second.1),
        epsilon,
    )
    .map_err(tagged(angle))
}

fn signed_pitch(
    upper_arm: Vector3<f64>,
    angle: AngleJointId,
    epsilon: f64,
) -> Result<f64, SkeletonError> {
    let projected = Vector3::new(upper_arm.x, upper_arm.y, 0.0);
    let unsigned = angle_between(&projected, &Vector3::x(), epsilon).map_err(tagged(angle))?;
    Ok(if upper_arm.z < 0.0 { -unsigned } else { unsigned })
}

/// The seven angles of a frame before clamping into human limits.
pub fn raw_angles(frame: &SkeletonFrame, epsilon: f64) -> Result<JointAngles, SkeletonError> {
    use AngleJointId as A;
    use JointId::*;

    let mut out = JointAngles::default();
    out[A::RightElbow] = pair_angle(
        frame,
        A::RightElbow,
        (RightWrist, RightElbow),
        (RightElbow, RightShoulder),
        epsilon,
    )?;
    out[A::RightShoulderRoll] = pair_angle(
        frame,
        A::RightShoulderRoll,
        (RightElbow, RightShoulder),
        (RightShoulder, Collar),
        epsilon,
    )?;
    out[A::RightShoulderPitch] = signed_pitch(
        link(frame, RightShoulder, RightElbow),
        A::RightShoulderPitch,
        epsilon,
    )?;
    out[A::HeadPitch] = pair_angle(frame, A::HeadPitch, (Collar, Neck), (Neck, Head), epsilon)?;
    out[A::LeftShoulderRoll] = pair_angle(
        frame,
        A::LeftShoulderRoll,
        (Collar, LeftShoulder),
        (LeftShoulder, LeftElbow),
        epsilon,
    )?;
    out[A::LeftShoulderPitch] = signed_pitch(
        link(frame, LeftShoulder, LeftElbow),
        A::LeftShoulderPitch,
        epsilon,
    )?;
    out[A::LeftElbow] = pair_angle(
        frame,
        A::LeftElbow,
        (LeftShoulder, LeftElbow),
        (LeftElbow, LeftWrist),
        epsilon,
    )?;
    Ok(out)
}

/// Extracts the seven angles of a frame, clamped into the human limit table.
pub fn extract_angles(
    frame: &SkeletonFrame,
    config: &ExtractionConfig,
) -> Result<JointAngles, SkeletonError> {
    let raw = raw_angles(frame, config.epsilon)?;
    Ok(raw.map(|j, v| config.human_limits.get(j).clamp(v)))
}

/// A frame left out of an extracted trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedFrame {
    pub frame: usize,
    pub timestamp: f64,
    pub angle: Option<AngleJointId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub trajectory: AngleTrajectory,
    pub dropped: Vec<DroppedFrame>,
}

/// Extracts the human-side angle matrix of a whole sequence.
pub fn extract_trajectory(
    seq: &SkeletonSequence,
    config: &ExtractionConfig,
) -> Result<Extraction, SkeletonError> {
    assert_eq!(
        config.human_limits.side(),
        Side::Human,
        "extraction clamps into a human limit table"
    );
    let mut times = Vec::with_capacity(seq.len());
    let mut columns = Vec::with_capacity(seq.len());
    let mut dropped = Vec::new();
    for (index, frame) in seq.frames().iter().enumerate() {
        match extract_angles(frame, config) {
            Ok(angles) => {
                times.push(frame.timestamp());
                columns.push(angles);
            }
            Err(err) => match config.policy {
                DegeneratePolicy::Reject => {
                    return Err(SkeletonError::RejectedFrame {
                        frame: index,
                        source: Box::new(err),
                    })
                }
                DegeneratePolicy::Drop => {
                    let angle = match err {
                        SkeletonError::DegenerateLink { angle, .. } => angle,
                        _ => None,
                    };
                    dropped.push(DroppedFrame {
                        frame: index,
                        timestamp: frame.timestamp(),
                        angle,
                    });
                }
            },
        }
    }
    if columns.is_empty() {
        return Err(SkeletonError::EmptyAfterFiltering {
            dropped: dropped.len(),
        });
    }
    let trajectory = AngleTrajectory::new(Side::Human, seq.action_label(), times, columns)?;
    Ok(Extraction {
        trajectory,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    /// Arms hanging straight down the -x axis, head upright.
    fn rest_positions() -> [Vector3<f64>; 9] {
        [
            v(-0.55, -0.2, 0.0),
            v(-0.3, -0.2, 0.0),
            v(0.0, -0.2, 0.0),
            v(0.0, 0.0, 0.0),
            v(0.1, 0.0, 0.0),
            v(0.25, 0.0, 0.0),
            v(0.0, 0.2, 0.0),
            v(-0.3, 0.2, 0.0),
            v(-0.55, 0.2, 0.0),
        ]
    }

    #[test]
    fn link_examples() {
        let mut p = [Vector3::zeros(); 9];
        p[1] = v(0.0, 1.0, 0.0);
        let f = SkeletonFrame::new(0.0, p).unwrap();
        assert_eq!(link(&f, JointId::RightWrist, JointId::RightElbow), v(0.0, 1.0, 0.0));
        let p = [v(0.1, 0.2, 0.3); 9];
        let f = SkeletonFrame::new(0.0, p).unwrap();
        assert_eq!(link(&f, JointId::Neck, JointId::Head), Vector3::zeros());
    }

    #[test]
    fn angle_between_examples() {
        let eps = DEFAULT_LINK_EPSILON;
        assert_eq!(angle_between(&v(1., 0., 0.), &v(0., 1., 0.), eps).unwrap(), 90.0);
        assert_eq!(angle_between(&v(1., 0., 0.), &v(2., 0., 0.), eps).unwrap(), 0.0);
        assert_eq!(angle_between(&v(1., 0., 0.), &v(-1., 1e-16, 0.), eps).unwrap(), 180.0);
        let a = angle_between(&v(1., 1., 0.), &v(1., 0., 0.), eps).unwrap();
        assert!((a - 45.0).abs() < 1e-12, "{a}");
    }

    #[test]
    fn degenerate_link_detected() {
        let err = angle_between(&v(1e-12, 0., 0.), &v(1., 0., 0.), DEFAULT_LINK_EPSILON);
        assert!(matches!(err, Err(SkeletonError::DegenerateLink { angle: None, .. })));
        // a NaN norm must not slip through the comparison
        assert!(angle_between(&v(f64::NAN, 0., 0.), &v(1., 0., 0.), 1e-9).is_err());
    }

    #[test]
    fn straight_arm_clamps_to_human_lower_limit() {
        let mut p = rest_positions();
        // right arm laid out along +x: wrist, elbow, shoulder collinear
        p[0] = v(0.55, -0.2, 0.0);
        p[1] = v(0.3, -0.2, 0.0);
        let frame = SkeletonFrame::new(0.0, p).unwrap();
        let raw = raw_angles(&frame, DEFAULT_LINK_EPSILON).unwrap();
        assert_eq!(raw[AngleJointId::RightElbow], 0.0);
        let clamped = extract_angles(&frame, &ExtractionConfig::default()).unwrap();
        assert_eq!(clamped[AngleJointId::RightElbow], 4.3);
    }

    #[test]
    fn right_angle_elbow() {
        let mut p = rest_positions();
        p[0] = v(-0.3, -0.2, 0.25);
        let frame = SkeletonFrame::new(0.0, p).unwrap();
        let angles = extract_angles(&frame, &ExtractionConfig::default()).unwrap();
        assert!((angles[AngleJointId::RightElbow] - 90.0).abs() < 1e-12);
    }

    #[test]
    fn pitch_along_z_is_degenerate() {
        let mut p = rest_positions();
        p[7] = v(0.0, 0.2, 0.3);
        let frame = SkeletonFrame::new(0.0, p).unwrap();
        let err = extract_angles(&frame, &ExtractionConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            SkeletonError::DegenerateLink {
                angle: Some(AngleJointId::LeftShoulderPitch),
                ..
            }
        ));
    }

    #[test]
    fn pitch_sign_follows_z() {
        let mut p = rest_positions();
        p[7] = v(0.0, 0.5, -0.1);
        let frame = SkeletonFrame::new(0.0, p).unwrap();
        let raw = raw_angles(&frame, DEFAULT_LINK_EPSILON).unwrap();
        assert!((raw[AngleJointId::LeftShoulderPitch] + 90.0).abs() < 1e-12);
        p[7].z = 0.1;
        let frame = SkeletonFrame::new(0.0, p).unwrap();
        let raw = raw_angles(&frame, DEFAULT_LINK_EPSILON).unwrap();
        assert!((raw[AngleJointId::LeftShoulderPitch] - 90.0).abs() < 1e-12);
    }

    fn sequence(frames: Vec<SkeletonFrame>) -> SkeletonSequence {
        SkeletonSequence::new("test", frames, None).unwrap()
    }

    #[test]
    fn single_and_constant_sequences() {
        let f = SkeletonFrame::new(0.0, rest_positions()).unwrap();
        let one = extract_trajectory(&sequence(vec![f.clone()]), &ExtractionConfig::default()).unwrap();
        assert_eq!(one.trajectory.len(), 1);
        let frames: Vec<_> = (0..5).map(|i| f.with_timestamp(i as f64 * 0.1).unwrap()).collect();
        let many = extract_trajectory(&sequence(frames), &ExtractionConfig::default()).unwrap();
        assert_eq!(many.trajectory.len(), 5);
        assert!(many.trajectory.columns().windows(2).all(|w| w[0] == w[1]));
        assert!(many.dropped.is_empty());
    }

    #[test]
    fn degenerate_frame_dropped_or_rejected() {
        let good = SkeletonFrame::new(0.0, rest_positions()).unwrap();
        let mut p = rest_positions();
        p[4] = p[3];
        let bad = SkeletonFrame::new(0.1, p).unwrap();
        let frames = vec![good.clone(), bad, good.with_timestamp(0.2).unwrap()];
        let seq = sequence(frames);
        let out = extract_trajectory(&seq, &ExtractionConfig::default()).unwrap();
        assert_eq!(out.trajectory.len(), 2);
        assert_eq!(out.trajectory.frame_times(), &[0.0, 0.2]);
        assert_eq!(
            out.dropped,
            vec![DroppedFrame {
                frame: 1,
                timestamp: 0.1,
                angle: Some(AngleJointId::HeadPitch)
            }]
        );

        let reject = ExtractionConfig {
            policy: DegeneratePolicy::Reject,
            ..ExtractionConfig::default()
        };
        let err = extract_trajectory(&seq, &reject).unwrap_err();
        assert!(matches!(err, SkeletonError::RejectedFrame { frame: 1, .. }));
    }

    #[test]
    fn all_degenerate_is_an_error() {
        let p = [v(0.0, 0.0, 0.0); 9];
        let seq = sequence(vec![SkeletonFrame::new(0.0, p).unwrap()]);
        assert_eq!(
            extract_trajectory(&seq, &ExtractionConfig::default()).unwrap_err(),
            SkeletonError::EmptyAfterFiltering { dropped: 1 }
        );
    }
}
