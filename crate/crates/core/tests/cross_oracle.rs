mod common;

use common::{grid, rel_err};
use ehaoi::chains::{build, steady_state_closed, Discipline};
use ehaoi::closed_form::{avg_aoi_closed, avg_gap, mgf_domain_bound_closed, ClosedMgf, GapPair};
use ehaoi::shs::{average_aoi, mgf_domain_bound, steady_state, MgfEvaluator};

#[test]
fn closed_forms_match_engine_on_grid() {
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for cell in grid() {
        let p = &cell.params;
        for disc in Discipline::ALL {
            for src in 1..=p.n_sources() {
                let model = build(disc, p, src).unwrap();
                let a = steady_state_closed(disc, p, src).unwrap();
                let b = steady_state(&model).unwrap();
                for (x, y) in a.pi.iter().zip(&b.pi) {
                    worst.0 = worst.0.max((x - y).abs());
                }
                let c = avg_aoi_closed(disc, p, src).unwrap();
                let e = average_aoi(&model).unwrap();
                worst.1 = worst.1.max(rel_err(c, e));
                assert!(rel_err(c, e) < 1e-9, "{} {disc} src {src}: {c} vs {e}", cell.label);
                let bound = mgf_domain_bound_closed(disc, p, src).unwrap();
                let eb = mgf_domain_bound(&model).unwrap();
                worst.3 = worst.3.max((bound - eb).abs());
                let cm = ClosedMgf::new(disc, p, src).unwrap();
                let em = MgfEvaluator::new(&model).unwrap();
                for s in [0.0, 0.05, 0.1, 0.2] {
                    if s >= bound {
                        continue;
                    }
                    let x = cm.eval(s).unwrap();
                    let y = em.eval(s).unwrap();
                    worst.2 = worst.2.max(rel_err(x, y));
                    assert!(
                        rel_err(x, y) < 1e-9,
                        "{} {disc} src {src} s={s}: {x} vs {y}",
                        cell.label
                    );
                }
            }
        }
    }
    println!(
        "worst pi {:e} mean {:e} mgf {:e} bound {:e}",
        worst.0, worst.1, worst.2, worst.3
    );
    assert!(worst.0 < 1e-10);
    assert!(worst.3 < 1e-8);
}

#[test]
fn gap_identities_on_grid() {
    let mut worst = 0.0f64;
    for cell in grid() {
        let p = &cell.params;
        for src in 1..=p.n_sources() {
            let wp = avg_aoi_closed(Discipline::Wp, p, src).unwrap();
            let ps = avg_aoi_closed(Discipline::Ps, p, src).unwrap();
            let sa = avg_aoi_closed(Discipline::Sa, p, src).unwrap();
            for (pair, diff) in [
                (GapPair::WpPs, wp - ps),
                (GapPair::WpSa, wp - sa),
                (GapPair::SaPs, sa - ps),
            ] {
                let g = avg_gap(pair, p, src).unwrap();
                let err = (g - diff).abs() / wp;
                worst = worst.max(err);
                assert!(err < 1e-9, "{} {pair:?} src {src}: {g} vs {diff}", cell.label);
                assert!(g >= 0.0);
            }
        }
    }
    println!("worst gap error {worst:e}");
}
