use afseg::*;

fn rhombus(nodes: usize) -> (IntensityImage, GridSpec) {
    let grid = GridSpec::centered_square(2.0, nodes).unwrap();
    (render_synthetic(&ShapeSpec::benchmark_rhombus(), &grid).unwrap(), grid)
}

#[test]
fn binary_front_error_tails_are_non_increasing() {
    let shapes = [ShapeSpec::benchmark_rhombus(), ShapeSpec::circle(0.0, 0.0, 1.0)];
    for shape in shapes {
        for nodes in [62, 82, 102] {
            let grid = GridSpec::centered_square(2.0, nodes).unwrap();
            let image = render_synthetic(&shape, &grid).unwrap();
            let config = RunConfig {
                scheme: SchemeParams::monotone(),
                front: FrontEncoding::Binary,
                norm: StopNorm::Inf,
                ..RunConfig::default()
            };
            let report = run_segmentation(&config, &image, &grid).unwrap();
            assert!(report.converged);
            let tail = &report.errors[report.errors.len().saturating_sub(10)..];
            assert!(tail.windows(2).all(|w| w[1] <= w[0]), "{nodes}: {tail:?}");
        }
    }
}

#[test]
fn identical_configs_give_identical_reports() {
    let (image, grid) = rhombus(62);
    for scheme in [SchemeParams::monotone(), SchemeParams::default()] {
        let config = RunConfig { scheme, ..RunConfig::default() };
        let a = run_segmentation(&config, &image, &grid).unwrap();
        let b = run_segmentation(&config, &image, &grid).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.final_field, b.final_field);
        assert_eq!(a.final_front, b.final_front);
        assert_eq!(a.errors, b.errors);
        assert_eq!(a.pixel_errors, b.pixel_errors);
    }
}

#[test]
fn report_invariants_hold_when_iterations_run_out() {
    let (image, grid) = rhombus(62);
    let config = RunConfig { n_max: 5, ..RunConfig::default() };
    let report = run_segmentation(&config, &image, &grid).unwrap();
    assert_eq!(report.iterations, 5);
    assert!(!report.converged);
    assert_eq!(report.errors.len(), 5);
    assert!(*report.errors.last().unwrap() >= config.tol);
}

#[test]
fn modified_velocity_segments_the_circle_with_both_data() {
    let grid = GridSpec::centered_square(2.0, 102).unwrap();
    let image = render_synthetic(&ShapeSpec::circle(0.0, 0.0, 1.0), &grid).unwrap();
    for datum in [
        InitialDatumKind::paraboloid(0.0, 0.0, 0.5),
        InitialDatumKind::SignedDistanceCircle { cx: 0.0, cy: 0.0, radius: 0.5 },
    ] {
        for scheme in [SchemeParams::monotone(), SchemeParams::default()] {
            let config = RunConfig { datum, scheme, ..RunConfig::default() };
            let report = run_segmentation(&config, &image, &grid).unwrap();
            assert!(report.converged, "{datum:?}");
            let err = report.pixel_errors.unwrap().relative;
            assert!(err < 0.1, "{datum:?} {:?}: {err}", scheme.scheme);
        }
    }
}

#[test]
fn shrinking_front_stops_on_the_object() {
    let grid = GridSpec::centered_square(2.0, 102).unwrap();
    let image = render_synthetic(&ShapeSpec::benchmark_rhombus(), &grid).unwrap();
    for datum in [InitialDatumKind::pyramid(), InitialDatumKind::frame()] {
        for scheme in [SchemeParams::monotone(), SchemeParams::default()] {
            let config = RunConfig {
                datum,
                scheme,
                case: Case::Shrink,
                ..RunConfig::default()
            };
            let report = run_segmentation(&config, &image, &grid).unwrap();
            assert!(report.converged, "{datum:?}");
            let err = report.pixel_errors.unwrap().relative;
            assert!(err < 0.15, "{datum:?} {:?}: {err}", scheme.scheme);
        }
    }
}

#[test]
fn binary_front_encoding_is_available() {
    let (image, grid) = rhombus(102);
    let config = RunConfig {
        front: FrontEncoding::Binary,
        scheme: SchemeParams::monotone(),
        ..RunConfig::default()
    };
    let report = run_segmentation(&config, &image, &grid).unwrap();
    assert!(report.errors.iter().all(|&e| e == 0.0 || e == 1.0));
    assert!(report.converged);
}
