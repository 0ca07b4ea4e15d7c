mod common;

use common::abel;

#[test]
fn operators_match_closed_forms() {
    let e = abel::analytic_pair_error();
    assert!(e <= 1e-10, "{e:e}");
}

#[test]
fn equivalence_transform_forms_agree() {
    let e = abel::invert22_discrepancy(10, 21);
    assert!(e <= 1e-8, "{e:e}");
}

#[test]
fn unperturbed_systems_contract() {
    let ke: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&d| abel::even_khat(d)).collect();
    assert!(ke[1] <= 0.5, "{ke:?}");
    assert!(ke[0] >= ke[1] && ke[1] >= ke[2], "{ke:?}");
    let ko = abel::odd_khat(0.05);
    assert!(ko <= 0.5, "{ko}");
    println!("even k̂ {ke:?}, odd k̂ {ko}");
}

#[test]
fn restarts_stay_inside_the_banach_ball() {
    let c = abel::banach_restarts();
    assert_eq!(c.restarts, 5);
    assert!(c.worst_ratio <= 1.0, "{}", c.worst_ratio);
    assert!(c.locality);
    assert!(c.khat <= 0.5);
}
