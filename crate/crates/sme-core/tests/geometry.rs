use approx::assert_relative_eq;
use nalgebra::DVector;
use sme_core::{RowPolytope, Support};

fn unit_box(dim: usize) -> RowPolytope {
    let mut p = RowPolytope::new(dim);
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        p.add(&e, 1.0);
        e[k] = -1.0;
        p.add(&e, 1.0);
    }
    p
}

#[test]
fn box_support_along_diagonal() {
    let p = unit_box(2);
    let d = DVector::from_vec(vec![std::f64::consts::FRAC_1_SQRT_2; 2]);
    match p.support(&d).unwrap() {
        Support::Finite { value, maximizer } => {
            assert_relative_eq!(value, std::f64::consts::SQRT_2, epsilon = 1e-9);
            let m = maximizer.expect("corner should be recoverable");
            assert_relative_eq!(m[0], 1.0, epsilon = 1e-7);
            assert_relative_eq!(m[1], 1.0, epsilon = 1e-7);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn support_reports_unbounded_and_infeasible() {
    let mut half = RowPolytope::new(2);
    half.add(&[1.0, 0.0], 1.0);
    let d = DVector::from_vec(vec![-1.0, 0.0]);
    assert!(matches!(half.support(&d).unwrap(), Support::Unbounded));

    let mut empty = RowPolytope::new(1);
    empty.add(&[1.0], -1.0);
    empty.add(&[-1.0], -1.0); // x <= -1 and x >= 1
    let d = DVector::from_vec(vec![1.0]);
    assert!(matches!(empty.support(&d).unwrap(), Support::Infeasible));
    assert!(!empty.is_feasible().unwrap());
}

#[test]
fn triangle_chebyshev_center() {
    // x >= 0, y >= 0, x + y <= 1: inscribed-ball center at
    // ((2 - sqrt 2)/2) * (1, 1).
    let mut tri = RowPolytope::new(2);
    tri.add(&[-1.0, 0.0], 0.0);
    tri.add(&[0.0, -1.0], 0.0);
    tri.add(&[1.0, 1.0], 1.0);
    let c = tri.chebyshev_center().unwrap();
    let r = (2.0 - std::f64::consts::SQRT_2) / 2.0;
    assert_relative_eq!(c[0], r, epsilon = 1e-8);
    assert_relative_eq!(c[1], r, epsilon = 1e-8);
}

#[test]
fn prune_removes_duplicates_and_dominated() {
    let mut p = unit_box(2);
    p.add(&[1.0, 0.0], 1.0); // duplicate
    p.add(&[1.0, 0.0], 5.0); // dominated
    p.add(&[3.0, 0.0], 9.0); // dominated after normalization
    let removed = p.prune_redundant().unwrap();
    assert_eq!(removed, 3);
    assert_eq!(p.len(), 4);
    // Region unchanged.
    for (x, y, inside) in [
        (0.0, 0.0, true),
        (1.0, -1.0, true),
        (1.2, 0.0, false),
        (0.0, -1.0001, false),
    ] {
        assert_eq!(p.contains(&DVector::from_vec(vec![x, y]), 1e-9), inside);
    }
}

#[test]
fn vertex_enumeration_of_box_and_triangle() {
    let p = unit_box(2);
    let mut verts: Vec<(i64, i64)> = p
        .enumerate_vertices()
        .unwrap()
        .iter()
        .map(|v| (v[0].round() as i64, v[1].round() as i64))
        .collect();
    verts.sort();
    assert_eq!(verts, vec![(-1, -1), (-1, 1), (1, -1), (1, 1)]);

    let mut tri = RowPolytope::new(2);
    tri.add(&[-1.0, 0.0], 0.0);
    tri.add(&[0.0, -1.0], 0.0);
    tri.add(&[1.0, 1.0], 1.0);
    assert_eq!(tri.enumerate_vertices().unwrap().len(), 3);
}

#[test]
fn axis_bounds_match_box() {
    let p = unit_box(3);
    for (lo, hi) in p.axis_bounds().unwrap() {
        assert_relative_eq!(lo.unwrap(), -1.0, epsilon = 1e-9);
        assert_relative_eq!(hi.unwrap(), 1.0, epsilon = 1e-9);
    }
}
