mod common;

use ehaoi::chains::build;
use ehaoi::closed_form::{
    avg_aoi_closed, avg_aoi_limit, avg_gap, c_constants, mgf_closed, mgf_domain_bound_closed, moments_b2, theta,
    CVariant, ClosedMgf, CoefficientSet, GapPair,
};
use ehaoi::shs::{exact_moments, moment_from_mgf};
use ehaoi::{AoiError, Discipline, SystemParams};

use common::rel_err;

fn p(rates: &[f64], eta: f64, b: usize) -> SystemParams {
    SystemParams::new(rates.to_vec(), eta, 1.0, b).unwrap()
}

#[test]
fn c_constant_examples() {
    let params = p(&[0.6, 0.4], 1.5, 1);
    let c = c_constants(CVariant::C, &params, 1, None).unwrap();
    assert!((c.values[0] - 2.25).abs() < 1e-14 && (c.values[1] - 1.0).abs() < 1e-15);
    for cell in common::grid().into_iter().filter(|c| c.params.n_sources() > 1) {
        let a = c_constants(CVariant::C, &cell.params, 1, None).unwrap();
        let b = c_constants(CVariant::Cs, &cell.params, 1, Some(0.0)).unwrap();
        assert_eq!(a.values, b.values);
        assert!(a.values.iter().all(|&v| v > 0.0), "{}", cell.label);
        let bar = c_constants(CVariant::CBar, &cell.params, 1, None).unwrap();
        assert!(bar.values.iter().all(|&v| v > 0.0), "{}", cell.label);
    }
    let lone = p(&[1.0], 1.0, 2);
    assert!(matches!(
        c_constants(CVariant::C, &lone, 1, None),
        Err(AoiError::SingleSource(_))
    ));
    let tiny = p(&[1.0, 1e-300], 1.0, 2);
    assert!(c_constants(CVariant::C, &tiny, 1, None).is_err());
}

#[test]
fn theta_examples() {
    assert_eq!(theta(&p(&[1.0], 1.0, 3)).unwrap(), 3.0);
    assert!((theta(&p(&[1.0], 2.0, 2)).unwrap() - 6.0).abs() < 1e-14);
    let near = theta(&p(&[1.0], 1.0 + 1e-7, 4)).unwrap();
    assert!((near - 4.0).abs() < 1e-5);
}

#[test]
fn mgf_examples() {
    let single = p(&[1.0], 1.0, 1);
    assert!((mgf_closed(Discipline::Wp, &single, 1, 0.5).unwrap() - 28.0 / 3.0).abs() < 1e-12);
    assert!(matches!(
        mgf_closed(Discipline::Wp, &single, 1, 1.0),
        Err(AoiError::OutsideConvergence { .. })
    ));
    for cell in common::grid() {
        for disc in Discipline::ALL {
            for i in 1..=cell.params.n_sources() {
                let m = mgf_closed(disc, &cell.params, i, 0.0).unwrap();
                assert!((m - 1.0).abs() < 1e-12, "{} {disc} {i}", cell.label);
            }
        }
    }
}

#[test]
fn mgf_derivative_gives_mean() {
    for cell in common::grid() {
        for disc in Discipline::ALL {
            let m = ClosedMgf::new(disc, &cell.params, 1).unwrap();
            let h0 = 0.02f64.min(m.bound() / 4.0);
            let d1 = moment_from_mgf(|s| m.eval(s), 1, 1.0, h0).unwrap();
            let mean = avg_aoi_closed(disc, &cell.params, 1).unwrap();
            assert!(rel_err(d1, mean) < 1e-6, "{} {disc}", cell.label);
        }
    }
}

#[test]
fn averages_against_engine_on_grid() {
    let two = p(&[0.5, 0.5], 1.5, 2);
    let (m1, _) = exact_moments(&build(Discipline::Wp, &two, 1).unwrap()).unwrap();
    assert!(rel_err(avg_aoi_closed(Discipline::Wp, &two, 1).unwrap(), m1) < 1e-9);
    let engine = ehaoi::shs::mgf(&build(Discipline::Ps, &two, 1).unwrap(), 0.2).unwrap();
    assert!(rel_err(mgf_closed(Discipline::Ps, &two, 1, 0.2).unwrap(), engine) < 1e-9);
}

#[test]
fn single_source_reductions() {
    let near = p(&[1.0, 1e-8], 1.0, 2);
    let lone = p(&[1.0], 1.0, 2);
    for (disc, want) in [(Discipline::Wp, 2.8), (Discipline::Ps, 2.3), (Discipline::Sa, 2.3)] {
        assert!((avg_aoi_closed(disc, &lone, 1).unwrap() - want).abs() < 1e-13);
        assert!(rel_err(avg_aoi_closed(disc, &near, 1).unwrap(), want) < 1e-5, "{disc}");
    }
    let near1 = p(&[1.0, 1e-8], 1.0, 1);
    assert!(rel_err(mgf_closed(Discipline::Wp, &near1, 1, 0.5).unwrap(), 28.0 / 3.0) < 1e-5);
    for (rho, beta, b) in [(1.0, 1.0, 2), (0.5, 1.5, 3), (3.0, 0.5, 1)] {
        let lone = p(&[rho], beta, b);
        let near = p(&[rho, 1e-8], beta, b);
        for disc in Discipline::ALL {
            let s = 0.3 * mgf_domain_bound_closed(disc, &lone, 1).unwrap();
            let a = mgf_closed(disc, &lone, 1, s).unwrap();
            let c = mgf_closed(disc, &near, 1, s).unwrap();
            assert!(rel_err(c, a) < 1e-5, "{disc} {rho} {beta} {b}");
        }
    }
}

#[test]
fn unlimited_energy_limits() {
    let params = p(&[0.5, 0.5], 1e6, 2);
    let want = [
        (Discipline::Wp, 4.5),
        (Discipline::Ps, 4.0),
        (Discipline::Sa, 4.0 + 0.5 / 3.0),
    ];
    for (disc, v) in want {
        assert!((avg_aoi_limit(disc, &params, 1).unwrap() - v).abs() < 1e-14);
        assert!(rel_err(avg_aoi_closed(disc, &params, 1).unwrap(), v) < 1e-4, "{disc}");
    }
    for cell in common::grid() {
        let rates = &cell.params.arrival_rates;
        let rich = SystemParams::new(rates.clone(), 1e6, 1.0, cell.params.battery_capacity).unwrap();
        for disc in Discipline::ALL {
            let a = avg_aoi_closed(disc, &rich, 1).unwrap();
            let l = avg_aoi_limit(disc, &rich, 1).unwrap();
            assert!(rel_err(a, l) < 1e-4, "{} {disc}", cell.label);
        }
    }
}

#[test]
fn ordering_and_gaps_on_grid() {
    for cell in common::grid() {
        for i in 1..=cell.params.n_sources() {
            let m = |d| avg_aoi_closed(d, &cell.params, i).unwrap();
            let (wp, ps, sa) = (m(Discipline::Wp), m(Discipline::Ps), m(Discipline::Sa));
            assert!(ps <= sa && sa <= wp, "{} source {i}", cell.label);
            for (pair, diff) in [
                (GapPair::WpPs, wp - ps),
                (GapPair::WpSa, wp - sa),
                (GapPair::SaPs, sa - ps),
            ] {
                let g = avg_gap(pair, &cell.params, i).unwrap();
                assert!(g >= 0.0);
                assert!((g - diff).abs() <= 1e-9 * wp, "{} {pair:?}", cell.label);
            }
        }
    }
}

#[test]
fn monotone_in_battery_and_energy() {
    for cell in common::grid() {
        let rates = &cell.params.arrival_rates;
        for disc in Discipline::ALL {
            let at = |eta: f64, b: usize| {
                avg_aoi_closed(disc, &SystemParams::new(rates.clone(), eta, 1.0, b).unwrap(), 1).unwrap()
            };
            let eta = cell.params.energy_rate;
            let b = cell.params.battery_capacity;
            assert!(at(eta, b + 1) <= at(eta, b) * (1.0 + 1e-12), "{} {disc}", cell.label);
            assert!(at(eta * 1.5, b) <= at(eta, b) * (1.0 + 1e-12), "{} {disc}", cell.label);
        }
    }
}

#[test]
fn explicit_b2_moments() {
    let lone = p(&[1.0], 1.0, 2);
    let (m1, m2) = moments_b2(Discipline::Wp, &lone, 1, CoefficientSet::Verbatim).unwrap();
    assert!((m1 - 2.8).abs() < 1e-13 && (m2 - 11.2).abs() < 1e-12);
    let (m1, _) = moments_b2(Discipline::Ps, &lone, 1, CoefficientSet::Verbatim).unwrap();
    assert!((m1 - 2.3).abs() < 1e-13);
    assert!(matches!(
        moments_b2(Discipline::Ps, &p(&[1.0], 1.0, 3), 1, CoefficientSet::Amended),
        Err(AoiError::Precondition(_))
    ));
    for cell in common::grid().into_iter().filter(|c| c.params.battery_capacity == 2) {
        for disc in Discipline::ALL {
            for i in 1..=cell.params.n_sources() {
                let (m1, m2) = moments_b2(disc, &cell.params, i, CoefficientSet::Amended).unwrap();
                let model = build(disc, &cell.params, i).unwrap();
                let (e1, e2) = exact_moments(&model).unwrap();
                assert!(rel_err(m1, e1) < 1e-9, "{} {disc} {i}: {m1} vs {e1}", cell.label);
                assert!(rel_err(m2, e2) < 1e-9, "{} {disc} {i}: {m2} vs {e2}", cell.label);
            }
        }
    }
}

#[test]
fn second_moment_ordering_b2() {
    for cell in common::grid().into_iter().filter(|c| c.params.battery_capacity == 2) {
        let m = |d| moments_b2(d, &cell.params, 1, CoefficientSet::Amended).unwrap().1;
        let (wp, ps, sa) = (m(Discipline::Wp), m(Discipline::Ps), m(Discipline::Sa));
        assert!(ps <= sa * (1.0 + 1e-12) && sa <= wp * (1.0 + 1e-12), "{}", cell.label);
    }
}
