mod common;

use ehaoi::chains::{build, build_ps, build_sa, build_wp, steady_state_closed};
use ehaoi::shs::{average_aoi, mgf, steady_state, RateKind, ResetMap, Transition};
use ehaoi::{Discipline, SystemParams};

fn p(rates: &[f64], eta: f64, b: usize) -> SystemParams {
    SystemParams::new(rates.to_vec(), eta, 1.0, b).unwrap()
}

#[test]
fn golden_dumps() {
    let cases = [
        ("wp", 2, 1, include_str!("golden/wp_n2_b1.txt")),
        ("wp", 2, 2, include_str!("golden/wp_n2_b2.txt")),
        ("ps", 2, 2, include_str!("golden/ps_n2_b2.txt")),
        ("sa", 2, 1, include_str!("golden/sa_n2_b1.txt")),
        ("sa", 3, 2, include_str!("golden/sa_n3_b2.txt")),
    ];
    for (disc, n, b, want) in cases {
        let disc: Discipline = disc.parse().unwrap();
        let model = build(disc, &p(&vec![0.5; n], 1.5, b), 1).unwrap();
        assert_eq!(model.dump(), want, "{disc} N={n} B={b}");
    }
}

#[test]
fn state_and_transition_counts() {
    let two = |b| p(&[0.5, 0.5], 1.5, b);
    let wp1 = build_wp(&two(1), 1).unwrap();
    assert_eq!((wp1.n_states(), wp1.transitions().len()), (3, 4));
    let wp2 = build_wp(&two(2), 1).unwrap();
    assert_eq!((wp2.n_states(), wp2.transitions().len()), (5, 8));
    assert_eq!(build_wp(&p(&[0.2, 0.3, 0.4], 1.0, 3), 2).unwrap().n_states(), 7);
    let ps1 = build_ps(&two(1), 1).unwrap();
    assert_eq!((ps1.n_states(), ps1.transitions().len()), (3, 6));
    let ps2 = build_ps(&two(2), 1).unwrap();
    assert_eq!((ps2.n_states(), ps2.transitions().len()), (5, 12));
    assert_eq!(build_sa(&two(1), 1).unwrap().n_states(), 4);
    assert_eq!(build_sa(&p(&[0.2, 0.3, 0.4], 1.0, 2), 1).unwrap().n_states(), 9);
    // a lone source has no competing arrivals, so the zero-rate family is absent
    assert_eq!(build_wp(&p(&[1.0], 1.0, 1), 1).unwrap().transitions().len(), 3);
}

#[test]
fn outgoing_rates_from_wp_idle_states() {
    let params = p(&[0.3, 0.6], 1.1, 3);
    let model = build_wp(&params, 1).unwrap();
    for k in 1..=3 {
        let idle = 2 * k - 1;
        let mut kinds: Vec<String> = model
            .transitions()
            .iter()
            .filter(|t| t.from == idle)
            .map(|t| t.rate_kind.to_string())
            .collect();
        kinds.sort();
        let mut want = vec!["lambda_-1".to_string(), "lambda_1".to_string()];
        if k < 3 {
            want.push("eta".into());
        }
        want.sort();
        assert_eq!(kinds, want, "state {idle}");
    }
}

#[test]
fn steady_state_examples() {
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
    let third = [1.0 / 3.0; 3];
    for pi in [
        steady_state(&build_wp(&p(&[1.0], 1.0, 1), 1).unwrap()).unwrap().pi,
        steady_state_closed(Discipline::Wp, &p(&[1.0], 1.0, 1), 1).unwrap().pi,
    ] {
        assert!(close(&pi, &third), "{pi:?}");
    }
    let want: Vec<f64> = [1.0, 2.0, 2.0, 4.0, 4.0].iter().map(|x| x / 13.0).collect();
    for pi in [
        steady_state(&build_wp(&p(&[1.0], 2.0, 2), 1).unwrap()).unwrap().pi,
        steady_state_closed(Discipline::Wp, &p(&[1.0], 2.0, 2), 1).unwrap().pi,
    ] {
        assert!(close(&pi, &want), "{pi:?}");
    }
    let want = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
    for pi in [
        steady_state(&build_sa(&p(&[0.5, 0.5], 1.0, 1), 1).unwrap()).unwrap().pi,
        steady_state_closed(Discipline::Sa, &p(&[0.5, 0.5], 1.0, 1), 1)
            .unwrap()
            .pi,
    ] {
        assert!(close(&pi, &want), "{pi:?}");
    }
}

#[test]
fn ps_and_wp_share_steady_state() {
    for cell in common::grid() {
        let a = steady_state(&build_wp(&cell.params, 1).unwrap()).unwrap().pi;
        let b = steady_state(&build_ps(&cell.params, 1).unwrap()).unwrap().pi;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{}", cell.label);
        }
    }
}

#[test]
fn battery_marginals_sum_to_one() {
    for cell in common::grid() {
        let pi = steady_state_closed(Discipline::Sa, &cell.params, 1).unwrap().pi;
        let sum: f64 = pi.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12, "{}", cell.label);
        assert!(pi.iter().all(|&x| x >= 0.0));
    }
}

type Key = (usize, usize, u64, [[u8; 2]; 2]);

fn transition_set(model: &ehaoi::shs::ShsModel) -> Vec<Key> {
    let mut v: Vec<Key> = model
        .transitions()
        .iter()
        .map(|t| (t.from, t.to, t.rate.to_bits(), t.reset.entries()))
        .collect();
    v.sort();
    v
}

#[test]
fn single_source_sa_is_ps() {
    for b in [1, 2, 3, 5] {
        for (rho, beta) in [(0.5, 1.5), (1.0, 1.0), (3.0, 0.5)] {
            let params = p(&[rho], beta, b);
            let ps = build_ps(&params, 1).unwrap();
            let sa = build_sa(&params, 1).unwrap();
            assert_eq!(ps.n_states(), sa.n_states());
            let energy = |m: &ehaoi::shs::ShsModel| m.states().iter().map(|s| s.energy).collect::<Vec<_>>();
            assert_eq!(energy(&ps), energy(&sa));
            assert_eq!(transition_set(&ps), transition_set(&sa), "B={b}");
            assert_eq!(average_aoi(&ps).unwrap(), average_aoi(&sa).unwrap());
            assert_eq!(mgf(&ps, 0.05).unwrap(), mgf(&sa, 0.05).unwrap());
        }
    }
}

#[test]
fn self_transitions_leave_steady_state_unchanged() {
    for cell in common::grid().into_iter().step_by(7) {
        for disc in Discipline::ALL {
            let model = build(disc, &cell.params, 1).unwrap();
            let base = steady_state(&model).unwrap().pi;
            for q in [0, model.n_states() - 1] {
                let extra = model
                    .with_transition(Transition {
                        label: 0,
                        from: q,
                        to: q,
                        rate: 2.7,
                        rate_kind: RateKind::Energy,
                        reset: ResetMap::COPY_AGE,
                    })
                    .unwrap();
                let pi = steady_state(&extra).unwrap().pi;
                for (x, y) in base.iter().zip(&pi) {
                    assert!((x - y).abs() < 1e-12, "{} {disc} state {q}", cell.label);
                }
            }
        }
    }
}

#[test]
fn closed_steady_state_branch_seam() {
    for b in [1, 2, 5] {
        let at = steady_state_closed(Discipline::Wp, &p(&[1.0], 1.0, b), 1).unwrap().pi;
        let near = steady_state_closed(Discipline::Wp, &p(&[1.0], 1.0 + 1e-7, b), 1)
            .unwrap()
            .pi;
        for (x, y) in at.iter().zip(&near) {
            assert!((x - y).abs() < 1e-6);
        }
    }
}
