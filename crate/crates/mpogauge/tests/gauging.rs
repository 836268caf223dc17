use mpogauge::fixtures::*;
use mpogauge::fusion::FusionData;
use mpogauge::gauging::*;
use mpogauge::group::FiniteGroup;
use mpogauge::linalg::*;
use mpogauge::mpo::realize_all;
use mpogauge::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn strict_chain(rep: &mpogauge::mpo::MpoGroupRep, len: usize) -> GaugeChain {
    GaugeChain::new(&FusionData::solve_strict(rep).unwrap(), len).unwrap()
}

fn pauli_x() -> Mat {
    Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

#[test]
fn local_ops_on_all_non_anomalous_fixtures() {
    for (name, rep) in non_anomalous_fixtures() {
        let ch = strict_chain(&rep, 2);
        let p = verify_projector(&ch, 1e-9);
        assert!(p.all_pass(), "{name}: {:?}", p.records);
        let r = verify_local_ops(&ch, 1e-9).unwrap();
        assert!(r.all_pass(), "{name}: {:?}", r.records);
    }
}

#[test]
fn forced_anomalous_ops_fail_to_commute() {
    let f = FusionData::solve(&z2_anomalous()).unwrap();
    let ch = GaugeChain::forced(&f, 2).unwrap();
    let worst = (0..2)
        .flat_map(|g| (0..2).map(move |h| (g, h)))
        .map(|(g, h)| ch.neighbor_commutator(g, h).unwrap())
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "commutator {worst}");
    let r = ch.check_neighbor_commutation(1, 1, 0, 1e-9).unwrap();
    assert_eq!(r.records.len(), 1);
}

#[test]
fn projector_idempotent_hermitian_order_free() {
    let ch = strict_chain(&z4_onsite(), 3);
    let r = verify_projector(&ch, 1e-9);
    assert!(r.all_pass(), "{:?}", r.records);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_vector(ch.total_dim(), &mut rng);
    let a = ch.apply_projector_ordered(x.as_slice(), &[0, 1, 2]);
    let b = ch.apply_projector_ordered(x.as_slice(), &[2, 0, 1]);
    assert!(diff_norm(&a, &b) < 1e-9);
}

#[test]
fn gauge_map_absorbs_global_symmetry() {
    for rep in [z2_onsite(), z3_onsite()] {
        let ch = strict_chain(&rep, 3);
        let gm = ch.gauge_map_matrix().unwrap();
        for u in realize_all(&rep, 3).unwrap() {
            assert!((mul_sparse(&gm, &u) - &gm).norm() < 1e-9);
        }
    }
}

#[test]
fn label_pair_fixture_matches_direct_sum() {
    let rep = z2_label_pair_trivial();
    let f = FusionData::solve_strict(&rep).unwrap();
    let ch = GaugeChain::new(&f, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let psi = random_vector(16, &mut rng);
    let a = ch.gauge_state(psi.as_slice()).unwrap().vector;
    let b = oracle_gauge_mpo(&f, psi.as_slice(), 2);
    assert!(diff_norm(&a, &b) < 1e-10);
    assert!(norm(&a) > 1e-3);
}

#[test]
fn gauged_identity_acts_trivially_on_gauged_states() {
    let ch = strict_chain(&z2_onsite(), 3);
    let gm = ch.gauge_map_matrix().unwrap();
    for w in 1..=3 {
        let g = ch.gauge_operator(&identity(1 << w), 0, w).unwrap().to_matrix().unwrap();
        assert!((&g * &gm - &gm).norm() < 1e-9, "width {w}");
    }
    let ch = strict_chain(&z2_label_pair_trivial(), 2);
    let gm = ch.gauge_map_matrix().unwrap();
    for w in 1..=2 {
        let g = ch.gauge_operator(&identity(4usize.pow(w as u32)), 1, w).unwrap();
        for j in 0..gm.ncols() {
            let col: Vec<_> = gm.column(j).iter().copied().collect();
            assert!(diff_norm(&g.apply(&col), &col) < 1e-9);
        }
    }
}

#[test]
fn compatibility_with_symmetric_operators() {
    let rep = z2_onsite();
    let ch = strict_chain(&rep, 3);
    let gm = ch.gauge_map_matrix().unwrap();
    let p = ch.global_projector().unwrap();
    let us = realize_all(&rep, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let raw = random_matrix(8, 8, &mut rng);
        let o = (&raw + &us[1] * &raw * &us[1]) * c(0.5);
        let g = ch.gauge_operator(&o, 0, 3).unwrap().to_matrix().unwrap();
        assert!((&g * &gm - &gm * &o).norm() < 1e-9);
        assert!((&g * &p - &p * &g).norm() < 1e-9);
    }
    // Two-site XX on a sub-segment.
    let xx = kron(&pauli_x(), &pauli_x());
    let g = ch.gauge_operator(&xx, 2, 2).unwrap().to_matrix().unwrap();
    let full = kron_all(&[pauli_x(), identity(2), pauli_x()]);
    assert!((&g * &gm - &gm * &full).norm() < 1e-9);
}

#[test]
fn segment_errors() {
    let ch = strict_chain(&z2_onsite(), 2);
    assert!(matches!(ch.gauge_operator(&identity(2), 2, 1), Err(Error::InvalidSegment(_))));
    assert!(matches!(ch.gauge_operator(&identity(8), 0, 3), Err(Error::InvalidSegment(_))));
    assert!(matches!(ch.gauge_operator(&identity(3), 0, 1), Err(Error::DimensionMismatch { .. })));
    assert!(matches!(ch.gauge_state(&[c(1.0)]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn size_guard() {
    let f = FusionData::solve_strict(&s3_onsite()).unwrap();
    assert!(matches!(GaugeChain::new(&f, 4), Err(Error::SizeGuard(_))));
}

fn subgroup_relations(rep: &mpogauge::mpo::MpoGroupRep, sub: &[usize]) {
    let grp = rep.group().clone();
    let f = FusionData::solve_strict(rep).unwrap();
    let ch = GaugeChain::with_subgroup(&f, 2, sub).unwrap();
    let gm = ch.gauge_map_matrix().unwrap();
    let us = realize_all(rep, 2).unwrap();
    let uh: Vec<Mat> = grp.elements().map(|g| ch.quotient_symmetry_op(g).unwrap()).collect();
    for g in grp.elements() {
        assert!((mul_sparse(&uh[g], &gm) - mul_sparse(&gm, &us[g])).norm() < 1e-9);
        for h in grp.elements() {
            assert!((mul_sparse(&uh[g], &uh[h]) - &uh[grp.mul(g, h)]).norm() < 1e-9);
        }
    }
    for &n in sub {
        for i in 0..2 {
            for j in 0..gm.ncols() {
                let col: Vec<_> = gm.column(j).iter().copied().collect();
                assert!(diff_norm(&ch.apply_local_op(n, i, &col).unwrap(), &col) < 1e-9);
            }
        }
    }
    let (q, map) = quotient_from_action(&ch, 1e-9).unwrap();
    let (q_ref, map_ref) = grp.quotient(sub).unwrap();
    assert_eq!(map, map_ref);
    assert_eq!(q.table(), q_ref.table());
}

#[test]
fn subgroup_z4() {
    subgroup_relations(&z4_onsite(), &[0, 2]);
}

#[test]
fn subgroup_s3() {
    let s3 = FiniteGroup::symmetric3();
    let a3 = s3.subgroups().into_iter().find(|s| s.len() == 3).unwrap();
    subgroup_relations(&s3_onsite(), &a3);
}

#[test]
fn subgroup_extremes() {
    let rep = z4_onsite();
    let f = FusionData::solve_strict(&rep).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let psi = random_vector(16, &mut rng);
    let full = GaugeChain::with_subgroup(&f, 2, &[0, 1, 2, 3]).unwrap();
    let plain = GaugeChain::new(&f, 2).unwrap();
    assert!(diff_norm(&full.gauge_state(psi.as_slice()).unwrap().vector, &plain.gauge_state(psi.as_slice()).unwrap().vector) < 1e-12);
    // N = {e}: coupling to the identity block only.
    let triv = GaugeChain::with_subgroup(&f, 2, &[0]).unwrap();
    let out = triv.gauge_state(psi.as_slice()).unwrap().vector;
    assert!(diff_norm(&out, psi.as_slice()) < 1e-12);
    // Û_g with N = {e} reduces to the global on-site symmetry.
    let us = realize_all(&rep, 2).unwrap();
    for g in 0..4 {
        assert!((triv.quotient_symmetry_op(g).unwrap() - &us[g]).norm() < 1e-12);
    }
    assert!(matches!(GaugeChain::with_subgroup(&f, 2, &[0, 1]), Err(Error::NotSubgroup)));
    let s3 = FiniteGroup::symmetric3();
    let f3 = FusionData::solve_strict(&s3_onsite()).unwrap();
    let z2 = s3.subgroups().into_iter().find(|s| s.len() == 2).unwrap();
    assert!(matches!(GaugeChain::with_subgroup(&f3, 2, &z2), Err(Error::NotNormal)));
}

#[test]
fn onsite_oracle_for_every_onsite_fixture() {
    for (name, rep) in onsite_fixtures() {
        let f = FusionData::solve_strict(&rep).unwrap();
        let ch = GaugeChain::new(&f, 2).unwrap();
        let u = onsite_matrices(&rep).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = random_vector(ch.matter_dim(), &mut rng);
        let a = ch.gauge_state(psi.as_slice()).unwrap().vector;
        let b = oracle_gauge_onsite(rep.group(), &u, psi.as_slice(), 2);
        assert!(diff_norm(&a, &b) < 1e-10, "{name}");
    }
}
