use ra_sim_core::control::{Mode, SupervisorState};
use ra_sim_core::tracking::{TrackEvent, Tracker, TrackerParams};
use ra_sim_core::vision::{CameraModel, Detection};

const DT: f64 = 1.0 / 30.0;

struct Run {
    modes: Vec<Mode>,
    deleted_on: Option<u64>,
    confirmed_on: Vec<u64>,
}

/// Feeds a centred detection on every frame where `visible(frame)` holds.
fn script(frames: u64, visible: impl Fn(u64) -> bool) -> Run {
    let params = TrackerParams::<f64>::default();
    let mut tracker = Tracker::new(params).unwrap();
    let mut sup = SupervisorState::new(0.5).unwrap();
    let cam = CameraModel::<f64>::standard();
    let mut run = Run {
        modes: vec![],
        deleted_on: None,
        confirmed_on: vec![],
    };
    for f in 0..frames {
        let dets = if visible(f) {
            vec![Detection::at(320.0, 240.0, f)]
        } else {
            vec![]
        };
        let out = tracker.step(&dets, DT).unwrap();
        for e in &out.events {
            match *e {
                TrackEvent::Deleted { frame, .. } => run.deleted_on = run.deleted_on.or(Some(frame)),
                TrackEvent::Confirmed { frame, .. } => run.confirmed_on.push(frame),
            }
        }
        run.modes.push(sup.supervisor_step(&out, &cam, f as f64 * DT).unwrap().mode);
    }
    run
}

#[test]
fn dropout_unlocks_on_deletion_and_relocks() {
    let p = TrackerParams::<f64>::default();
    let (n_init, max_age) = (p.n_init as u64, p.max_age as u64);
    let lit = 10;
    let resume = lit + max_age + 1;
    let run = script(resume + 10, |f| f < lit || f >= resume);

    assert_eq!(run.modes[(n_init - 1) as usize], Mode::Tracking);
    let deleted = run.deleted_on.expect("track deleted during dropout");
    assert!(deleted < resume);
    assert_eq!(run.modes[(deleted - 1) as usize], Mode::Tracking);
    assert_eq!(run.modes[deleted as usize], Mode::Scanning);

    let relock = (resume..)
        .find(|&f| run.modes[f as usize] == Mode::Tracking)
        .unwrap();
    assert!(relock - resume < n_init, "relocked {} frames after resuming", relock - resume);
    assert_eq!(run.confirmed_on, vec![n_init - 1, relock]);
}

#[test]
fn no_detections_never_lock() {
    let run = script(60, |_| false);
    assert!(run.modes.iter().all(|m| *m == Mode::Scanning));
}
