//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Run with `cargo test -p skelmotion-cli --test acceptance`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skelmotion_core::angles::raw_angles;
use skelmotion_core::control::{
    open_loop_track, plant_bank, reproduce_motion, ControllerConfig, DEFAULT_RATE_LIMIT,
    DEFAULT_RESPONSE_ALPHA,
};
use skelmotion_core::pipeline::fixtures::{inject_jumps, synthetic_move, Move};
use skelmotion_core::pipeline::{detect_noisy_frames, NoiseDetectorConfig};
use skelmotion_core::{
    angle_between, extract_angles, link, map_angle, AngleJointId, AngleTrajectory,
    ExtractionConfig, JointAngles, JointId, JointLimit, JointLimitTable, Side, SkeletonFrame,
};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
    Vector3::new(x, y, z)
}

fn endpoint_exactness() -> Outcome {
    let (h, r) = (JointLimitTable::human_default(), JointLimitTable::qtrobot_default());
    let mut worst = 0.0f64;
    for j in AngleJointId::ALL {
        let (hl, rl) = (h.get(j), r.get(j));
        for (from, to) in [(hl.lower, rl.lower), (hl.upper, rl.upper)] {
            let got = map_angle(from, j, &h, &r).map_err(|e| e.to_string())?;
            worst = worst.max((got - to).abs());
            ensure((got - to).abs() <= 1e-9, || format!("{j}: {from} -> {got}, want {to}"))?;
        }
    }
    let le = AngleJointId::LeftElbow;
    ensure(
        (map_angle(4.3, le, &h, &r).unwrap() + 8.0).abs() <= 1e-9
            && (map_angle(142.6, le, &h, &r).unwrap() + 80.0).abs() <= 1e-9,
        || "left elbow inverted range".into(),
    )?;
    Ok(format!("14 endpoints, max deviation {worst:.1e} deg"))
}

fn random_limit(rng: &mut ChaCha8Rng, inverted_ok: bool) -> JointLimit {
    let lower = rng.random_range(-180.0..100.0);
    let upper = lower + rng.random_range(1.0..200.0);
    if inverted_ok && rng.random_bool(0.5) {
        JointLimit::new(upper, lower)
    } else {
        JointLimit::new(lower, upper)
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shipped = (JointLimitTable::human_default(), JointLimitTable::qtrobot_default());
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (h, r) = if rng.random_bool(0.5) {
            shipped.clone()
        } else {
            (
                JointLimitTable::new(Side::Human, std::array::from_fn(|_| random_limit(&mut rng, false))).unwrap(),
                JointLimitTable::new(Side::Robot, std::array::from_fn(|_| random_limit(&mut rng, true))).unwrap(),
            )
        };
        let j = AngleJointId::ALL[rng.random_range(0..7)];
        let (hl, rl) = (h.get(j), r.get(j));
        let theta = rng.random_range(hl.lower..=hl.upper);
        let t = (theta - hl.lower) / (hl.upper - hl.lower);
        let want = (1.0 - t) * rl.lower + t * rl.upper;
        let got = map_angle(theta, j, &h, &r).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 1e-9, || format!("{j} at {theta}: {got} vs {want}"))?;
    }
    Ok(format!("10^4 samples, max deviation {worst:.1e} deg"))
}

/// Hand-built pose with collar at the origin; angles worked out by hand.
fn golden_frame() -> SkeletonFrame {
    let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
    let r_shoulder = v(0.0, -1.0, 0.0);
    let r_elbow = r_shoulder + v(-1.0, -1.0, s2);
    let r_wrist = r_elbow - v(1.0, -1.0, 0.0);
    let neck = v(1.0, 0.0, 0.0);
    let l_shoulder = v(0.0, 1.0, 0.0);
    let w = v(1.0, s3, -2.0);
    let l_elbow = l_shoulder + w;
    let l_wrist = l_elbow + w / (2.0 * s2) + v(s3, -1.0, 0.0) / 2.0;
    SkeletonFrame::new(
        0.0,
        [r_wrist, r_elbow, r_shoulder, Vector3::zeros(), neck, neck + v(1.0, 0.0, 1.0), l_shoulder, l_elbow, l_wrist],
    )
    .unwrap()
}

fn random_frame(rng: &mut ChaCha8Rng) -> SkeletonFrame {
    let base = [
        v(1.0, -0.45, 0.2),
        v(1.2, -0.3, 0.1),
        v(1.45, -0.18, 0.0),
        v(1.45, 0.0, 0.0),
        v(1.55, 0.0, 0.0),
        v(1.7, 0.0, 0.05),
        v(1.45, 0.18, 0.0),
        v(1.2, 0.35, 0.1),
        v(1.1, 0.4, 0.3),
    ];
    let mut jitter = || rng.random_range(-0.08..0.08);
    SkeletonFrame::new(0.0, base.map(|p| p + v(jitter(), jitter(), jitter()))).unwrap()
}

fn extraction_oracle() -> Outcome {
    let expected = [90.0, 60.0, 135.0, 45.0, 52.238_756_092_964_96, -60.0, 45.0];
    let golden = extract_angles(&golden_frame(), &ExtractionConfig::default()).map_err(|e| e.to_string())?;
    for j in AngleJointId::ALL {
        ensure((golden[j] - expected[j.index()]).abs() <= 1e-6, || {
            format!("golden {j}: {} vs {}", golden[j], expected[j.index()])
        })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let frames = 1000;
    for k in 0..frames {
        let f = random_frame(&mut rng);
        let base = raw_angles(&f, 1e-9).map_err(|e| e.to_string())?;
        let s = rng.random_range(0.1..10.0);
        let shift = v(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let moved = raw_angles(&f.map_positions(|_, p| p * s + shift).unwrap(), 1e-9).map_err(|e| e.to_string())?;
        for j in AngleJointId::ALL {
            ensure((base[j] - moved[j]).abs() <= 1e-7, || {
                format!("frame {k} {j}: {} vs {} after scale {s}", base[j], moved[j])
            })?;
        }

        let a = link(&f, JointId::RightShoulder, JointId::RightElbow);
        for (i, jj) in [(JointId::Collar, JointId::Head), (JointId::LeftElbow, JointId::RightWrist)] {
            ensure(link(&f, i, jj) == -link(&f, jj, i), || format!("frame {k}: link antisymmetry"))?;
        }
        let tiny = v(rng.random_range(-1e-12..1e-12), rng.random_range(-1e-12..1e-12), 0.0);
        for b in [a, -a * s + tiny, a * s + tiny] {
            let angle = angle_between(&a, &b, 1e-9).map_err(|e| e.to_string())?;
            ensure(angle.is_finite() && (0.0..=180.0).contains(&angle), || {
                format!("frame {k}: acos clamp gave {angle}")
            })?;
        }
    }
    Ok(format!("golden pose within 1e-6 deg, {frames} random frames"))
}

fn robot_trajectory(columns: Vec<JointAngles>, dt: f64) -> AngleTrajectory {
    let times = (0..columns.len()).map(|i| i as f64 * dt).collect();
    AngleTrajectory::new(Side::Robot, "acceptance", times, columns).unwrap()
}

fn dead_beat() -> Outcome {
    let limits = JointLimitTable::qtrobot_default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = ControllerConfig::proportional(1.0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..60);
        let columns = (0..n)
            .map(|_| JointAngles(limits.limits().map(|l| rng.random_range(l.min()..=l.max()))))
            .collect();
        let start = JointAngles(std::array::from_fn(|_| rng.random_range(-150.0..150.0)));
        let trace = open_loop_track(&robot_trajectory(columns, cfg.dt), &start, &cfg).map_err(|e| e.to_string())?;
        for step in trace.steps() {
            for js in &step.joints {
                worst = worst.max(js.error().abs());
            }
            ensure(step.stats.signed.abs() <= 1e-9, || format!("E_t = {} at {}", step.stats.signed, step.index))?;
        }
    }
    ensure(worst <= 1e-9, || format!("joint error {worst}"))?;
    Ok(format!("200 trajectories, max |error| {worst:.1e} deg"))
}

/// 0.5 Hz sinusoid on every joint, inside the robot limits.
fn sinusoid(frames: usize, dt: f64) -> AngleTrajectory {
    let limits = JointLimitTable::qtrobot_default();
    let columns = (0..frames)
        .map(|i| {
            let t = i as f64 * dt;
            JointAngles(std::array::from_fn(|j| {
                let l = limits.limits()[j];
                l.midpoint() + 0.3 * l.span().abs() * (std::f64::consts::TAU * 0.5 * t + j as f64).sin()
            }))
        })
        .collect();
    robot_trajectory(columns, dt)
}

fn open_loop_tracking() -> Outcome {
    let cfg = ControllerConfig::default();
    let traj = sinusoid(240, 0.033);
    let trace = open_loop_track(&traj, &traj.columns()[0], &cfg).map_err(|e| e.to_string())?;
    let tail = &trace.steps()[10..];
    let mean = tail.iter().map(|s| s.stats.abs).sum::<f64>() / tail.len() as f64;
    ensure(mean < 2.0, || format!("steady-state mean |E_t| {mean:.4} deg"))?;
    Ok(format!("steady-state mean |E_t| {mean:.4} deg < 2"))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn convergence_shape() -> Outcome {
    let limits = JointLimitTable::qtrobot_default();
    let cfg = ControllerConfig {
        max_iters_per_setpoint: 3,
        ..ControllerConfig::default()
    };
    let traj = sinusoid(120, cfg.dt);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut starts = vec![
        ("lower limits", JointAngles(limits.limits().map(|l| l.lower))),
        ("upper limits", JointAngles(limits.limits().map(|l| l.upper))),
    ];
    for _ in 0..8 {
        let far = JointAngles(limits.limits().map(|l| if rng.random_bool(0.5) { l.lower } else { l.upper }));
        starts.push(("random corner", far));
    }
    let mut worst_ratio = 0.0f64;
    for (label, start) in starts {
        let mut plants = plant_bank(&start, &limits, DEFAULT_RATE_LIMIT, DEFAULT_RESPONSE_ALPHA, 0.0, 0)
            .map_err(|e| e.to_string())?;
        let trace = reproduce_motion(&traj, &mut plants, &cfg).map_err(|e| e.to_string())?;
        let abs: Vec<f64> = trace.steps().iter().map(|s| s.stats.abs).collect();
        let std: Vec<f64> = trace.steps().iter().map(|s| s.stats.std).collect();
        let n = abs.len();
        let ratio = mean(&abs[n / 2..]) / mean(&abs[..10]);
        worst_ratio = worst_ratio.max(ratio);
        ensure(ratio < 0.25, || format!("{label}: last-half / first-10 mean |E_t| = {ratio:.3}"))?;
        let (first, last) = (mean(&std[..10]), mean(&std[n - 10..]));
        ensure(last < first, || format!("{label}: E_t std first 10 {first:.3}, last 10 {last:.3}"))?;
    }
    Ok(format!("10 initial poses, worst mean |E_t| ratio {worst_ratio:.3} < 0.25"))
}

fn noise_detector() -> Outcome {
    let cfg = NoiseDetectorConfig::with_threshold(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut hits, mut injected, mut false_pos, mut smooth) = (0usize, 0usize, 0usize, 0usize);
    for k in 0..100u64 {
        let clean = synthetic_move(Move::ALL[k as usize % 7], k);
        let n = clean.len();
        let count = rng.random_range(1..=3);
        let mut jumps = BTreeSet::new();
        while jumps.len() < count {
            let f = rng.random_range(1..n - 1);
            if jumps.iter().all(|&g: &usize| g.abs_diff(f) > 2) {
                jumps.insert(f);
            }
        }
        let mut seq = clean;
        for &f in &jumps {
            let joint = JointId::ALL[rng.random_range(0..9)];
            let dir = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let dir = if dir.norm() < 1e-3 { Vector3::x() } else { dir.normalize() };
            seq = inject_jumps(&seq, &[f], joint, dir);
        }
        let flagged = detect_noisy_frames(&seq, &cfg);
        injected += jumps.len();
        hits += jumps.intersection(&flagged).count();
        smooth += n - jumps.len();
        false_pos += flagged.difference(&jumps).count();
    }
    let recall = hits as f64 / injected as f64;
    let fpr = false_pos as f64 / smooth as f64;
    let detail = format!("recall {:.1}% ({hits}/{injected}), false positives {:.2}% ({false_pos}/{smooth})", recall * 100.0, fpr * 100.0);
    ensure(recall >= 0.95 && fpr <= 0.05, || detail.clone())?;
    Ok(detail)
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_skelmotion"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("skelmotion {args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn end_to_end_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    let data = data.to_str().unwrap();
    cli(&["gen-fixtures", data])?;
    let runs = [tmp.path().join("a"), tmp.path().join("b")];
    for out in &runs {
        cli(&["run", "--data-dir", data, "-o", out.to_str().unwrap()])?;
    }
    let (a, b) = (tree(&runs[0]), tree(&runs[1]));
    ensure(!a.is_empty(), || "no exports written".into())?;
    ensure(a == b, || "exports differ between runs".into())?;
    let bytes: usize = a.iter().map(|(_, b)| b.len()).sum();
    Ok(format!("{} files, {bytes} bytes identical", a.len()))
}

fn liveness() -> Outcome {
    let limits = JointLimitTable::qtrobot_default();
    let start = JointAngles(limits.limits().map(|l| l.lower));
    let target = robot_trajectory(vec![JointAngles(limits.limits().map(|l| l.upper))], 0.033);
    let cases = [
        ("budget 5, default rate", 5, DEFAULT_RATE_LIMIT),
        ("budget 200, 1 deg/s", 200, 1.0),
    ];
    for (label, iters, rate) in cases {
        let cfg = ControllerConfig {
            max_iters_per_setpoint: iters,
            ..ControllerConfig::default()
        };
        let mut plants = plant_bank(&start, &limits, rate, DEFAULT_RESPONSE_ALPHA, 0.0, 0).map_err(|e| e.to_string())?;
        let trace = reproduce_motion(&target, &mut plants, &cfg).map_err(|e| e.to_string())?;
        for js in &trace.steps()[0].joints {
            ensure(js.timed_out && js.iterations == iters, || {
                format!("{label}: timed_out {} after {} iterations", js.timed_out, js.iterations)
            })?;
        }
    }
    Ok("unreachable setpoints time out at the iteration budget".into())
}

fn main() {
    let criteria = [
        Criterion { name: "retarget endpoint exactness", budget: Duration::from_secs(1), check: endpoint_exactness },
        Criterion { name: "retarget oracle equivalence", budget: Duration::from_secs(1), check: oracle_equivalence },
        Criterion { name: "angle extraction oracle", budget: Duration::from_secs(5), check: extraction_oracle },
        Criterion { name: "open-loop dead-beat", budget: Duration::from_secs(1), check: dead_beat },
        Criterion { name: "open-loop tracking quality", budget: Duration::from_secs(5), check: open_loop_tracking },
        Criterion { name: "closed-loop convergence shape", budget: Duration::from_secs(10), check: convergence_shape },
        Criterion { name: "noise detector", budget: Duration::from_secs(10), check: noise_detector },
        Criterion { name: "end-to-end determinism", budget: Duration::from_secs(30), check: end_to_end_determinism },
        Criterion { name: "controller liveness", budget: Duration::from_secs(5), check: liveness },
    ];
    let mut failed = 0;
    for c in &criteria {
        let started = Instant::now();
        let outcome = (c.check)();
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; over the {:?} budget", c.budget)),
            other => other,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag}  {:<32} {:>8.3} s  {detail}", c.name, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
