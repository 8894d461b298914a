mod common;

use common::{front_camera, scene};
use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;
use splatcache_core::s2::{step, S2Config, S2State, SortKind};
use splatcache_core::trace::{linear_trace, PoseTrace};
use splatcache_core::RenderConfig;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_sort_per_window(window in 1usize..8, frames in 1usize..20, seed in any::<u64>()) {
        let cloud = scene(300, 1, seed);
        let poses = linear_trace(&front_camera(32, 32), Vector3::new(0.003, 0.0, 0.0), frames);
        let cfg = S2Config { window, ..Default::default() };
        let render_cfg = RenderConfig::default();
        let mut state = S2State::new();
        let mut events = Vec::new();
        for p in &poses {
            let (_, stats, event) = step(&mut state, p, &cloud, &cfg, &render_cfg).unwrap();
            prop_assert!(stats.sh_evals > 0 || stats.visible == 0);
            events.push(event);
        }
        let sorts = events.iter().filter(|e| e.sorted()).count();
        prop_assert_eq!(sorts, frames.div_ceil(window));
        prop_assert_eq!(events[0].kind, SortKind::Cold);
        for (i, e) in events.iter().enumerate() {
            prop_assert_eq!(e.frame, i);
            prop_assert_eq!(e.sorted(), i % window == 0);
            if i > 0 && e.sorted() {
                // The previous frame speculated only if it had a pose before it.
                let expected = if i >= 2 { SortKind::Speculative } else { SortKind::Fallback };
                prop_assert_eq!(e.kind, expected);
            }
            prop_assert_eq!(e.speculated, i > 0 && (i + 1) % window == 0);
        }
    }

    #[test]
    fn trace_round_trips(
        steps in prop::collection::vec([-0.5..0.5f64, -0.5..0.5, -0.5..0.5], 1..20),
        yaw in -3.0..3.0f64,
    ) {
        let mut start = front_camera(64, 48);
        start.orientation = UnitQuaternion::from_euler_angles(0.1, yaw, -0.2);
        let poses: Vec<_> = steps
            .iter()
            .scan(start.position, |at, d| {
                *at += Vector3::from(*d);
                Some(splatcache_core::CameraPose { position: *at, ..start.clone() })
            })
            .collect();
        let trace = PoseTrace::from_poses(&poses, 1.0 / 90.0).unwrap();
        let mut bytes = Vec::new();
        trace.write(&mut bytes).unwrap();
        let back = PoseTrace::read(bytes.as_slice()).unwrap();
        prop_assert_eq!(&back, &trace);
        let restored = back.poses();
        prop_assert_eq!(restored.len(), poses.len());
        for (a, b) in restored.iter().zip(&poses) {
            prop_assert!((a.position - b.position).norm() < 1e-12);
            prop_assert!(a.orientation.angle_to(&b.orientation) < 1e-9);
            prop_assert_eq!((a.width, a.height), (b.width, b.height));
        }
    }
}

#[test]
fn malformed_traces_report_the_line() {
    let header = r#"{"intrinsics":{"fx":10.0,"fy":10.0,"cx":5.0,"cy":5.0},"width":10,"height":10}"#;
    let good = r#"{"t":0.0,"position":[0,0,0],"quaternion":[1,0,0,0]}"#;
    let zero_quat = r#"{"t":0.1,"position":[0,0,0],"quaternion":[0,0,0,0]}"#;
    let text = format!("{header}\n{good}\n{zero_quat}\n");
    let err = PoseTrace::read(text.as_bytes()).unwrap_err().to_string();
    assert!(err.contains('3'), "{err}");
    assert!(PoseTrace::read("".as_bytes()).is_err());
    let text = format!("{header}\n{{not json\n");
    assert!(PoseTrace::read(text.as_bytes()).is_err());
}
