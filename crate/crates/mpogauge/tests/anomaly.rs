use mpogauge::anomaly::*;
use mpogauge::fixtures::*;
use mpogauge::fusion::FusionData;
use mpogauge::group::FiniteGroup;
use mpogauge::linalg::*;
use mpogauge::mpo::{build_onsite_mpo, realize_all, MpoGroupRep};
use mpogauge::mps::Mps;
use mpogauge::Error;
use mpogauge::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn split(rep: &MpoGroupRep, len: usize) -> SplitGaugeChain {
    SplitGaugeChain::new(&FusionData::solve(rep).unwrap(), len).unwrap()
}

fn pauli_x() -> Mat {
    Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

fn twirl(us: &[Mat], op: &Mat) -> Mat {
    us.iter().fold(Mat::zeros(op.nrows(), op.ncols()), |a, u| a + u * op * u.adjoint()) / c(us.len() as f64)
}

fn invariant_under_local_ops(ch: &SplitGaugeChain, state: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for g in ch.fusion().group().elements() {
        for i in 0..ch.len() {
            worst = worst.max(diff_norm(&ch.apply_local_op(g, i, state), state));
        }
    }
    worst
}


#[test]
fn closed_form_matches_projector_path() {
    for (name, rep, len) in [
        ("z2", z2_onsite(), 3),
        ("z3", z3_onsite(), 2),
        ("anomalous z2", z2_anomalous(), 2),
        ("label pair", z2_label_pair_trivial(), 2),
    ] {
        let ch = split(&rep, len);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let psi = random_vector(ch.matter_dim(), &mut rng);
        let a = ch.symmetrize_state(psi.as_slice(), &ch.v_state()).unwrap();
        let b = ch.closed_form_v(psi.as_slice()).unwrap();
        assert!(norm(&a) > 1e-3, "{name}");
        assert!(diff_norm(&a, &b) < 1e-9, "{name}");
        assert!(invariant_under_local_ops(&ch, &a) < 1e-9, "{name}");
    }
}

#[test]
fn trivial_group_symmetrization_is_plain_coupling() {
    let rep = build_onsite_mpo(&FiniteGroup::cyclic(1), vec![identity(2)]).unwrap();
    let ch = split(&rep, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let psi = random_vector(4, &mut rng);
    let phi = random_vector(ch.gauge_dim(), &mut rng);
    let out = ch.symmetrize_state(psi.as_slice(), phi.as_slice()).unwrap();
    let plain: Vec<C64> = psi.iter().flat_map(|a| phi.iter().map(move |b| a * b)).collect();
    assert!(diff_norm(&out, &plain) < 1e-12);
    assert!(matches!(ch.symmetrize_state(&[c(1.0)], phi.as_slice()), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn schmidt_rank_is_not_increased() {
    // Z3 on-site: site 0 in a product with the rest.
    let rep = z3_onsite();
    let ch = split(&rep, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let head = random_vector(3, &mut rng);
    let tail = random_vector(9, &mut rng);
    let psi: Vec<C64> = head.iter().flat_map(|a| tail.iter().map(move |b| a * b)).collect();
    let out = ch.closed_form_v(&psi).unwrap();
    for k in 0..2 {
        assert_eq!(split_schmidt_rank(&ch, &out, k, 1e-9), matter_schmidt_rank(&psi, 3, k, 1e-9), "cut {k}");
    }
    // Anomalous Z2: bond-2 MPS on two sites.
    let rep = z2_anomalous();
    let ch = split(&rep, 2);
    let a = Mps::new((0..4).map(|_| random_matrix(2, 2, &mut rng)).collect()).unwrap();
    let psi = a.dense(2);
    let out = ch.symmetrize_state(&psi, &ch.v_state()).unwrap();
    let u_e = &realize_all(&rep, 2).unwrap()[0];
    let projected = u_e * nalgebra::DVector::from_column_slice(&psi);
    let rank = split_schmidt_rank(&ch, &out, 0, 1e-9);
    assert_eq!(rank, matter_schmidt_rank(projected.as_slice(), 4, 0, 1e-9));
    assert!(rank <= matter_schmidt_rank(&psi, 4, 0, 1e-9));
}

#[test]
fn omega_overlap_identities() {
    let rep = build_onsite_mpo(&FiniteGroup::cyclic(1), vec![identity(2)]).unwrap();
    for (name, rep) in [("trivial", rep), ("z2", z2_onsite()), ("anomalous z2", z2_anomalous())] {
        let ch = split(&rep, 2);
        assert!((norm(&ch.omega_state()) - 1.0).abs() < 1e-12);
        let r = check_omega_overlap(&ch, 1e-9).unwrap();
        assert!(r.all_pass(), "{name}: {:?}", r.records);
        assert!(r.meta.contains_key("omega_scalar"));
    }
}

fn compatibility(ch: &SplitGaugeChain, op: &Mat, start: usize, width: usize, full: &Mat, rng: &mut ChaCha8Rng) -> f64 {
    let omega = ch.omega_state();
    let psi = random_vector(ch.matter_dim(), rng);
    let gpsi = ch.symmetrize_state(psi.as_slice(), &omega).unwrap();
    let lhs = ch.project_omega(&ch.symmetrize_operator(op, start, width).unwrap().apply(&gpsi));
    let opsi = full * &psi;
    let rhs = ch.project_omega(&ch.symmetrize_state(opsi.as_slice(), &omega).unwrap());
    diff_norm(&lhs, &rhs)
}

#[test]
fn operator_symmetrization_is_compatible() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for rep in [z2_onsite(), z2_anomalous(), z2_label_pair_trivial()] {
        let ch = split(&rep, 2);
        let us = realize_all(&rep, 2).unwrap();
        let m = ch.matter_dim();
        let id = identity(m);
        assert!(compatibility(&ch, &id, 0, 2, &id, &mut rng) < 1e-9);
        let avg = us.iter().fold(Mat::zeros(m, m), |a, u| a + u) / c(us.len() as f64);
        assert!(compatibility(&ch, &avg, 0, 2, &avg, &mut rng) < 1e-9);
        for _ in 0..3 {
            let o = twirl(&us, &random_matrix(m, m, &mut rng));
            assert!(compatibility(&ch, &o, 0, 2, &o, &mut rng) < 1e-9);
        }
    }
    // Two-site commutant inside a three-site on-site chain.
    let ch = split(&z2_onsite(), 3);
    let z = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)]));
    let zz = kron(&z, &z);
    let o = twirl(&[identity(4), zz], &random_matrix(4, 4, &mut rng));
    let full = kron(&identity(2), &o);
    assert!(compatibility(&ch, &o, 1, 2, &full, &mut rng) < 1e-9);
    // A charged operator is not compatible.
    assert!(compatibility(&ch, &kron(&pauli_x(), &identity(2)), 0, 2, &kron(&kron(&pauli_x(), &identity(2)), &identity(2)), &mut rng) > 1e-6);
    assert!(matches!(ch.symmetrize_operator(&identity(2), 3, 1), Err(Error::InvalidSegment(_))));
}

#[test]
fn onsite_renormalization() {
    let trivial = build_onsite_mpo(&FiniteGroup::cyclic(1), vec![identity(2)]).unwrap();
    for rep in [trivial, z2_onsite(), regular_onsite(&FiniteGroup::cyclic(3))] {
        let f = FusionData::solve(&rep).unwrap();
        let r = renormalize_onsite(&f, 1e-10).unwrap();
        assert!(r.all_pass(), "{:?}", r.records);
    }
    let f = FusionData::solve(&z2_anomalous()).unwrap();
    assert!(renormalize_onsite(&f, 1e-10).is_err());
}

fn product_blocks(d: usize, labels: &[usize]) -> Vec<Mps> {
    labels
        .iter()
        .map(|&b| Mps::new((0..d).map(|p| Mat::from_element(1, 1, c((p == b) as u8 as f64))).collect()).unwrap())
        .collect()
}

fn block_two_path(f: &FusionData, blocks: Vec<Mps>) {
    let bm = BlockMps::new(blocks, f, 3).unwrap();
    let sb = symmetrized_mps(&bm, f).unwrap();
    for len in [2, 3] {
        let ch = SplitGaugeChain::new(f, len).unwrap();
        let direct = ch.symmetrize_state(&bm.dense(len), &ch.v_state()).unwrap();
        assert!(norm(&direct) > 1e-3);
        let mut ab = vec![c(0.0); direct.len()];
        for s in &sb {
            let (x, y) = (s.dense_ab(&ch), s.dense_c(&ch));
            assert!(diff_norm(&x, &y) < 1e-9);
            assert!(invariant_under_local_ops(&ch, &y) < 1e-9);
            for (o, v) in ab.iter_mut().zip(x) {
                *o += v;
            }
        }
        assert!(diff_norm(&ab, &direct) < 1e-9, "L={len}");
    }
}

#[test]
fn swapped_blocks_onsite_z2() {
    let rep = build_onsite_mpo(&FiniteGroup::cyclic(2), vec![identity(2), pauli_x()]).unwrap();
    let f = FusionData::solve(&rep).unwrap();
    let blocks = product_blocks(2, &[0, 1]);
    assert_eq!(BlockMps::new(blocks.clone(), &f, 3).unwrap().perm, vec![vec![0, 1], vec![1, 0]]);
    block_two_path(&f, blocks);
}

#[test]
fn swapped_blocks_anomalous_z2() {
    let f = FusionData::solve(&z2_anomalous()).unwrap();
    // |x,x⟩ on every site, x ∈ {0, 1}.
    block_two_path(&f, product_blocks(4, &[0, 3]));
}

#[test]
fn single_block_trivial_group() {
    let rep = build_onsite_mpo(&FiniteGroup::cyclic(1), vec![identity(2)]).unwrap();
    let f = FusionData::solve(&rep).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let a = Mps::new((0..2).map(|_| random_matrix(1, 1, &mut rng)).collect()).unwrap();
    let sb = symmetrized_mps(&BlockMps::new(vec![a.clone()], &f, 2).unwrap(), &f).unwrap();
    assert_eq!(sb[0].edge.iter().filter(|m| m.norm() > 0.0).count(), 1);
    let ch = SplitGaugeChain::new(&f, 2).unwrap();
    let expected: Vec<C64> = a.dense(2).iter().flat_map(|z| ch.v_state().into_iter().map(move |v| z * v)).collect();
    assert!(diff_norm(&sb[0].dense_ab(&ch), &expected) < 1e-12);
}

#[test]
fn disjoint_local_ops_commute() {
    let ch = split(&z2_anomalous(), 2);
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let x = random_vector(ch.matter_dim() * ch.gauge_dim(), &mut rng);
    let a = ch.apply_local_op(1, 1, &ch.apply_local_op(1, 0, x.as_slice()));
    let b = ch.apply_local_op(1, 0, &ch.apply_local_op(1, 1, x.as_slice()));
    assert!(diff_norm(&a, &b) < 1e-12);
}
