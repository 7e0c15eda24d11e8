use dsscn::drift::{DriftConfig, DriftStatus};
use dsscn_web::{demo_source, membership, stream_run, timeline, trained_membership};

#[test]
fn scaled_sources_keep_the_drift_layout() {
    let (sea, chunk) = demo_source("sea", 20_000).unwrap();
    assert_eq!(chunk, 500);
    assert_eq!(sea.chunks(chunk, 1).unwrap().count(), 40);
    let (hp, chunk) = demo_source("hyperplane", 12_000).unwrap();
    match hp {
        dsscn::stream::StreamSource::Hyperplane(p) => {
            assert_eq!((p.samples, p.drift_start, p.drift_span), (12_000, 4800, 1200));
            assert_eq!(p.drift_start / chunk, 4);
        }
        _ => panic!("expected a hyperplane source"),
    }
    assert!(demo_source("weather", 100).is_err());
}

#[test]
fn stream_run_reports_drifts_and_serializes() {
    let run = stream_run("sea", 20_000, 3, 0.5).unwrap();
    assert_eq!(run.trace.len(), 40);
    assert!(run.accuracy > 0.85, "accuracy {}", run.accuracy);
    assert!(!run.drift_stamps.is_empty());
    assert_eq!(run.final_depth, run.trace.last().unwrap().depth);
    let json = serde_json::to_value(&run).unwrap();
    assert_eq!(json["trace"].as_array().unwrap().len(), 40);
}

#[test]
fn membership_curves_are_ordered_intervals() {
    let curves = trained_membership("sea", 10_000, 2, 1, 0).unwrap();
    assert_eq!(curves.xs.len(), 121);
    assert_eq!((curves.xs[0], curves.xs[120]), (0.0, 10.0));
    assert!(!curves.lower.is_empty());
    for (lo, up) in curves.lower.iter().zip(&curves.upper) {
        assert!(lo.iter().zip(up).all(|(l, u)| 0.0 <= *l && l <= u && *u <= 1.0));
        assert!(up.iter().any(|u| *u > 1e-3), "node never fires on the sweep");
    }
    assert!(trained_membership("sea", 10_000, 2, 9, 0).is_err());
    assert!(trained_membership("sea", 10_000, 2, 1, 3).is_err());
}

#[test]
fn membership_peak_sits_at_the_node_centre() {
    let source = demo_source("sea", 5000).unwrap().0;
    let mut net = dsscn::stack::StackedNetwork::new(
        3,
        2,
        Default::default(),
        Default::default(),
        Default::default(),
        Default::default(),
        4,
    )
    .unwrap();
    for c in source.chunks(500, 4).unwrap() {
        net.process_chunk(&c.unwrap()).unwrap();
    }
    let node = &net.links[0].layer.nodes[0];
    let centre = node.antecedent.midpoint()[1] / net.lambda.0[1];
    let curves = membership(&net, 1, 1, centre - 1.0, centre + 1.0, 201).unwrap();
    let peak = curves.upper[0].iter().cloned().fold(f64::MIN, f64::max);
    assert_eq!(curves.upper[0][100], peak);
}

#[test]
fn timeline_flags_an_abrupt_jump() {
    let points = timeline(0.1, 0.5, 30, 1, 60, 500, 9, DriftConfig::default()).unwrap();
    assert_eq!(points.len(), 60);
    let first = points.iter().find(|p| p.status == DriftStatus::Drift).map(|p| p.chunk);
    assert!(matches!(first, Some(31..=32)), "first drift {first:?}");
    assert!(points.iter().all(|p| p.eps_warning <= p.eps_drift));
    assert!(timeline(1.5, 0.5, 3, 1, 6, 10, 1, DriftConfig::default()).is_err());
}
