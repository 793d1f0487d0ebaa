mod common;

use ehaoi::chains::{build, build_ps, build_wp};
use ehaoi::closed_form::avg_aoi_closed;
use ehaoi::shs::{average_aoi, first_moment_vectors, mgf, mgf_vectors, moment_from_mgf, steady_state, MgfEvaluator};
use ehaoi::{AoiError, Discipline, SystemParams};

use common::rel_err;

#[test]
fn first_moment_examples() {
    let single = SystemParams::new(vec![1.0], 1.0, 1.0, 1).unwrap();
    let model = build_wp(&single, 1).unwrap();
    let ss = steady_state(&model).unwrap();
    let mv = first_moment_vectors(&model, &ss).unwrap();
    let sum: f64 = mv.v.iter().map(|v| v[0]).sum();
    assert!((sum - 3.0).abs() < 1e-12);
    assert!(
        (average_aoi(&build_wp(&SystemParams::new(vec![1.0], 1.0, 1.0, 2).unwrap(), 1).unwrap()).unwrap() - 2.8).abs()
            < 1e-12
    );

    let two = SystemParams::new(vec![0.5, 0.5], 1.5, 1.0, 2).unwrap();
    let ps = average_aoi(&build_ps(&two, 1).unwrap()).unwrap();
    assert!(rel_err(ps, avg_aoi_closed(Discipline::Ps, &two, 1).unwrap()) < 1e-9);

    let unlimited = SystemParams::new(vec![0.5, 0.5], 1e6, 1.0, 2).unwrap();
    assert!((average_aoi(&build_ps(&unlimited, 1).unwrap()).unwrap() - 4.0).abs() < 1e-4);
}

#[test]
fn mgf_examples() {
    let single = SystemParams::new(vec![1.0], 1.0, 1.0, 1).unwrap();
    let model = build_wp(&single, 1).unwrap();
    assert!((mgf(&model, 0.5).unwrap() - 28.0 / 3.0).abs() < 1e-10);
    assert!(mgf(&model, 0.999_9).unwrap() > 1e12);
    assert!(matches!(mgf(&model, 1.0), Err(AoiError::OutsideConvergence { .. })));
    assert!(matches!(mgf(&model, 1.5), Err(AoiError::OutsideConvergence { .. })));
    let ss = steady_state(&model).unwrap();
    let mv = mgf_vectors(&model, &ss, 0.0).unwrap();
    let sum: f64 = mv.vs.iter().map(|v| v[0]).sum();
    assert!((sum - 1.0).abs() < 1e-12);
}

#[test]
fn mgf_shape_on_grid() {
    for cell in common::grid() {
        for disc in Discipline::ALL {
            let model = build(disc, &cell.params, 1).unwrap();
            let eval = MgfEvaluator::new(&model).unwrap();
            assert!((eval.eval(0.0).unwrap() - 1.0).abs() < 1e-12, "{}", cell.label);
            let mut last = 1.0;
            for frac in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let m = eval.eval(frac * eval.bound()).unwrap();
                assert!(m >= last, "{} {disc}", cell.label);
                last = m;
            }
        }
    }
}

#[test]
fn derivatives_match_moments_on_grid() {
    for cell in common::grid() {
        let mu = cell.params.service_rate;
        for disc in Discipline::ALL {
            let model = build(disc, &cell.params, 1).unwrap();
            let eval = MgfEvaluator::new(&model).unwrap();
            let h0 = 0.02f64.min(eval.bound() / mu / 4.0);
            let f = |s: f64| eval.eval(s * mu);
            let m1 = moment_from_mgf(f, 1, mu, h0).unwrap();
            let m2 = moment_from_mgf(f, 2, mu, h0).unwrap();
            let mean = average_aoi(&model).unwrap();
            assert!(rel_err(m1, mean) < 1e-6, "{} {disc}: {m1} vs {mean}", cell.label);
            assert!(m2 - m1 * m1 >= -1e-8, "{} {disc}", cell.label);
        }
    }
}

#[test]
fn moment_from_constant_mgf() {
    assert!(moment_from_mgf(|_| Ok(1.0), 1, 1.0, 0.02).unwrap().abs() < 1e-12);
    let single = SystemParams::new(vec![1.0], 1.0, 1.0, 2).unwrap();
    let model = build_wp(&single, 1).unwrap();
    let eval = MgfEvaluator::new(&model).unwrap();
    let m2 = moment_from_mgf(|s| eval.eval(s), 2, 1.0, 0.02).unwrap();
    assert!(rel_err(m2, 11.2) < 1e-6);
}

#[test]
fn time_rescaling() {
    for cell in common::grid().into_iter().step_by(5) {
        for a in [0.25, 3.0] {
            let scaled = cell.params.time_scaled(a);
            for disc in Discipline::ALL {
                let base = build(disc, &cell.params, 1).unwrap();
                let fast = build(disc, &scaled, 1).unwrap();
                let m0 = average_aoi(&base).unwrap();
                let m1 = average_aoi(&fast).unwrap();
                assert!(rel_err(m1, m0 / a) < 1e-10, "{} {disc}", cell.label);
                let s = 0.2 * MgfEvaluator::new(&base).unwrap().bound();
                assert!(rel_err(mgf(&fast, s * a).unwrap(), mgf(&base, s).unwrap()) < 1e-10);
                let ss = steady_state(&fast).unwrap();
                let v0 = first_moment_vectors(&base, &steady_state(&base).unwrap()).unwrap();
                let v1 = first_moment_vectors(&fast, &ss).unwrap();
                for (x, y) in v0.v.iter().zip(&v1.v) {
                    assert!((x[0] / a - y[0]).abs() < 1e-10 * (1.0 + x[0]));
                }
            }
        }
    }
}
