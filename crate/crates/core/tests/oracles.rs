mod common;

use common::*;
use num_bigint::BigInt;

use mdsp::bench::{generate_random_basis, instance_seed};
use mdsp::cvp::{mdsp_to_cvp, recover_mdsp_distance_sq, solve_cvp_bruteforce, CvpGramInstance};
use mdsp::exact::{shift_ranges, solve_exact};
use mdsp::heuristic::{run_heuristic, HeuristicConfig};
use mdsp::io::parse_blocks;
use mdsp::lattice::{certificate_bounds, verify_dmdsp_certificate, DmdspQuery};
use mdsp::lll::{lll_reduce, LllParams};
use mdsp::{LatticeBasis, MdspInstance, QMatrix, ShiftVector};

fn bigs(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

fn plane_instance() -> MdspInstance {
    MdspInstance::new(vec_i(&[0, 0, 3]), vec![vec_i(&[1, 0, 1]), vec_i(&[0, 1, 2])]).unwrap()
}

fn line_instance() -> MdspInstance {
    MdspInstance::new(vec_i(&[0, 2]), vec![vec_i(&[1, 1])]).unwrap()
}

#[test]
fn line_instance_values() {
    let inst = line_instance();
    assert_eq!(inst.dist_sq(), q(2));
    let sol = solve_exact(&inst).unwrap();
    assert_eq!(sol.x, ShiftVector::from_ints(&[-1]));
    assert_eq!(sol.dist_sq, q(2));
    assert_eq!(sol.basis, vec![vec_i(&[1, -1])]);

    let c = mdsp_to_cvp(&inst).unwrap();
    assert_eq!(c.gram, QMatrix::from_int_rows(&[&[1]]));
    assert_eq!(c.offset, mdsp::QVector::new(vec![qr(1, 2)]));
    assert_eq!(c.scale_sq, q(4));
    let cs = solve_cvp_bruteforce(&c).unwrap();
    assert_eq!(cs.j, bigs(&[-1]));
    assert_eq!(cs.objective, qr(1, 4));
    assert_eq!(recover_mdsp_distance_sq(&c, &cs.j), q(2));
}

#[test]
fn plane_instance_values() {
    let inst = plane_instance();
    assert_eq!(inst.dist_sq(), qr(3, 2));
    let sol = solve_exact(&inst).unwrap();
    assert_eq!(sol.dist_sq, q(3));
    assert_eq!(sol.x, ShiftVector::from_ints(&[0, -1]));
    assert_eq!(dist_sq(inst.fixed(), &shifted(&inst, &[0, -1])), q(3));

    let (x, best) = brute_force_mdsp(&inst, &[-10, -10], &[10, 10]);
    assert_eq!(best, q(3));
    assert_eq!(x, vec![0, -1]);

    let r = shift_ranges(&inst).unwrap();
    for (s, t) in r.s.iter().zip(&r.t) {
        assert!(*s <= BigInt::from(0) && *t >= BigInt::from(0));
    }

    let c = mdsp_to_cvp(&inst).unwrap();
    assert_eq!(c.offset, mdsp::QVector::new(vec![qr(1, 3), qr(2, 3)]));
    assert_eq!(c.gram, QMatrix::identity(2));
    assert_eq!(c.scale_sq, q(9));
    let cs = solve_cvp_bruteforce(&c).unwrap();
    assert_eq!(recover_mdsp_distance_sq(&c, &cs.j), q(3));
}

#[test]
fn gram_cvp_values() {
    let g = QMatrix::from_int_rows(&[&[2, 1], &[1, 1]]);
    let c = CvpGramInstance::new(g, mdsp::QVector::new(vec![qr(1, 3), qr(1, 3)]), q(1)).unwrap();
    let s = solve_cvp_bruteforce(&c).unwrap();
    assert_eq!(s.j, bigs(&[0, -1]));
    assert_eq!(s.objective, qr(2, 9));
    let (j, o) = brute_force_cvp(&c.gram, &c.offset, &[-5, -5], &[5, 5]);
    assert_eq!((bigs(&j), o), (s.j, s.objective));
}

#[test]
fn heuristic_on_plane_instance() {
    let out = run_heuristic(&plane_instance(), &HeuristicConfig::new(64).unwrap()).unwrap();
    assert!(out.converged);
    assert!(out.dist_sq >= qr(3, 2) && out.dist_sq <= q(3));
    assert_eq!(dist_sq(&vec_i(&[0, 0, 3]), &shifted(&plane_instance(), &to_i64(&out.x_total.0))), out.dist_sq);
}

#[test]
fn certificate_on_plane_instance() {
    let inst = plane_instance();
    // dist² / ‖v‖² = 3/9, so γ = 1/√3 is irrational; probe on both sides
    let x = ShiftVector::from_ints(&[0, -1]);
    let accept = DmdspQuery::new(inst.clone(), qr(57, 100)).unwrap();
    let reject = DmdspQuery::new(inst.clone(), qr(58, 100)).unwrap();
    assert!(verify_dmdsp_certificate(&accept, &x).unwrap());
    assert!(!verify_dmdsp_certificate(&reject, &x).unwrap());

    let b = certificate_bounds(&inst);
    assert_eq!(b.dk, vec![q(2), q(6)]);
    assert!(b.d_within_bound() && b.e_within_bound());
}

#[test]
fn lll_small_values() {
    let p = LllParams::new(qr(3, 4)).unwrap();
    let b = LatticeBasis::new(vec![vec_i(&[1, 1]), vec_i(&[1, 0])]).unwrap();
    let (out, _) = lll_reduce(&b, &p).unwrap();
    assert_eq!(out.vectors(), &[vec_i(&[1, 0]), vec_i(&[0, 1])]);

    let b = LatticeBasis::new(vec![vec_i(&[1, 1, 1]), vec_i(&[-1, 0, 2]), vec_i(&[3, 5, 6])]).unwrap();
    let (out, trace) = lll_reduce(&b, &p).unwrap();
    assert_eq!(out.vectors(), &[vec_i(&[0, 1, 0]), vec_i(&[1, 0, 1]), vec_i(&[-1, 0, 2])]);
    assert_eq!(trace.final_shortest_norm_sq, q(1));
}

#[test]
fn frozen_generated_bases() {
    let text = include_str!("fixtures/gen_d6_c2_s1.txt");
    let blocks = parse_blocks(text).unwrap();
    assert_eq!(blocks.len(), 2);
    for (i, m) in blocks.iter().enumerate() {
        assert_eq!(m, &generate_random_basis(6, 1000, instance_seed(1, 6, i)).unwrap());
    }
}

#[test]
fn reference_speedups_are_ratios() {
    let rows = [
        (20, 188.288, 72.713, 2.589),
        (22, 366.910, 145.069, 2.529),
        (24, 666.715, 278.012, 2.398),
        (26, 1148.719, 514.469, 2.232),
        (28, 1875.015, 893.201, 2.099),
    ];
    for (dim, high, low, speedup) in rows {
        let r: f64 = high / low;
        assert!((r - speedup).abs() < 1e-3, "dim {dim}: {r}");
    }
}
