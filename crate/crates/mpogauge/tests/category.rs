use mpogauge::anomaly::{localized_op, SplitGaugeChain};
use mpogauge::category::*;
use mpogauge::fixtures::*;
use mpogauge::fusion::FusionData;
use mpogauge::group::FiniteGroup;
use mpogauge::linalg::*;
use mpogauge::mpo::build_onsite_mpo;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn fibonacci_fusion_tensors() {
    let rep = CategoryMpoRep::fibonacci();
    assert_eq!(rep.chis(), &[2, 3]);
    let f = CategoryFusion::solve(&rep).unwrap();
    assert_eq!(f.channels(1, 1).iter().map(|c| c.out).collect::<Vec<_>>(), vec![0, 1]);
    let r = f.verify(1e-9);
    assert!(r.all_pass(), "{:?}", r.records);
    assert!(f.unit_vector().is_some());
    // Unit fusions are injections: W⁻¹W = 1 and W is an isometry up to scale.
    for a in 0..2 {
        let ch = &f.channels(a, 0)[0];
        assert!((&ch.winv * &ch.w - identity(rep.chi(a))).norm() < 1e-9);
    }
}

#[test]
fn group_category_reduces_to_group_fusion() {
    for rep in [z3_onsite(), z2_label_pair_trivial()] {
        let gf = FusionData::solve(&rep).unwrap();
        let crep = CategoryMpoRep::from_group_rep(&rep);
        let cf = CategoryFusion::solve(&crep).unwrap();
        for g in rep.group().elements() {
            for h in rep.group().elements() {
                let ch = &cf.channels(g, h)[0];
                assert_eq!(ch.out, rep.group().mul(g, h));
                assert!((&ch.w - gf.w(g, h)).norm() < 1e-9);
                assert!((&ch.winv - gf.winv(g, h)).norm() < 1e-9);
            }
        }
        assert!(cf.verify(1e-9).all_pass());
    }
}

#[test]
fn fibonacci_localized_algebra() {
    let f = CategoryFusion::solve(&CategoryMpoRep::fibonacci()).unwrap();
    let r = verify_local_ops(&f, 1e-9);
    assert!(r.all_pass(), "{:?}", r.records);
    let t = local_op_category(&f, 1);
    let one = local_op_category(&f, 0);
    assert!((mul_sparse(&t, &t) - &one - &t).norm() < 1e-9);
}

#[test]
fn group_category_ops_match_anomaly_lab_exactly() {
    for rep in [z2_onsite(), z2_anomalous()] {
        let gf = FusionData::solve(&rep).unwrap();
        let cf = CategoryFusion::from_fusion(&gf);
        for g in rep.group().elements() {
            assert_eq!(local_op_category(&cf, g), localized_op(&gf, g));
        }
        assert!(verify_local_ops(&cf, 1e-9).all_pass());
        // Symmetrized states coincide bit for bit.
        let chain = CategoryChain::new(&cf, 2).unwrap();
        let split = SplitGaugeChain::new(&gf, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let psi = random_vector(chain.matter_dim(), &mut rng);
        let phi = random_vector(chain.gauge_dim(), &mut rng);
        let a = chain.symmetrize(psi.as_slice(), phi.as_slice()).unwrap();
        let b = split.symmetrize_state(psi.as_slice(), phi.as_slice()).unwrap();
        assert_eq!(a, b);
        assert!(chain.eigen_residual(&a) < 1e-9);
    }
}

#[test]
fn fibonacci_symmetrized_state_eigenvalues() {
    let f = CategoryFusion::solve(&CategoryMpoRep::fibonacci()).unwrap();
    let chain = CategoryChain::new(&f, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let psi = random_vector(chain.matter_dim(), &mut rng);
    for phi in [chain.v_state().unwrap(), random_vector(chain.gauge_dim(), &mut rng).as_slice().to_vec()] {
        let out = chain.symmetrize(psi.as_slice(), &phi).unwrap();
        assert!(norm(&out) > 1e-6);
        assert!(chain.eigen_residual(&out) < 1e-8);
    }
}

#[test]
fn trivial_category_symmetrization() {
    let rep = build_onsite_mpo(&FiniteGroup::cyclic(1), vec![identity(2)]).unwrap();
    let cf = CategoryFusion::from_fusion(&FusionData::solve(&rep).unwrap());
    let chain = CategoryChain::new(&cf, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let psi = random_vector(4, &mut rng);
    let phi = random_vector(chain.gauge_dim(), &mut rng);
    let out = chain.symmetrize(psi.as_slice(), phi.as_slice()).unwrap();
    let plain: Vec<_> = psi.iter().flat_map(|a| phi.iter().map(move |b| a * b)).collect();
    assert!(diff_norm(&out, &plain) < 1e-12);
}

#[test]
fn fibonacci_block_action_matches_fusion_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let p: Vec<_> = random_vector(3, &mut rng).iter().copied().collect();
    let (rep, blocks) = fibonacci_block_fixture(&p);
    let (act, r) = category_action_tensors(&blocks, &rep, 1e-9).unwrap();
    assert!(r.all_pass(), "{:?}", r.records);
    let cat = rep.category();
    for a in 0..2 {
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(act.multiplicity[a][x][y], cat.n(a, x, y), "M_{a}{x}^{y}");
            }
        }
    }
}

#[test]
fn group_block_action_is_permutation() {
    let x = Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let rep = build_onsite_mpo(&FiniteGroup::cyclic(2), vec![identity(2), x]).unwrap();
    let crep = CategoryMpoRep::from_group_rep(&rep);
    let blocks: Vec<_> = (0..2)
        .map(|b| mpogauge::mps::Mps::new((0..2).map(|q| Mat::from_element(1, 1, c((q == b) as u8 as f64))).collect()).unwrap())
        .collect();
    let (act, r) = category_action_tensors(&blocks, &crep, 1e-9).unwrap();
    assert!(r.all_pass());
    assert_eq!(act.multiplicity, vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]]);
}

#[test]
fn lambda_invariant_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let p: Vec<_> = random_vector(3, &mut rng).iter().copied().collect();
    let (rep, blocks) = fibonacci_block_fixture(&p);
    for len in [2, 3] {
        let ops: Vec<Mat> = (0..2).map(|a| rep.dense(a, len).unwrap()).collect();
        for b in &blocks {
            let (out, zero) = invariant_state_via_lambda(b, &rep, len).unwrap();
            assert!(!zero);
            let v = nalgebra::DVector::from_column_slice(&out);
            for (a, o) in ops.iter().enumerate() {
                let rel = (o * &v - &v * c(rep.category().dim(a))).norm() / v.norm();
                assert!(rel < 1e-8, "L={len} a={a}: {rel}");
            }
        }
    }
}

#[test]
fn category_json_round_trip() {
    let data = FusionCategory::fibonacci().data().clone();
    let s = serde_json::to_string(&data).unwrap();
    assert!(s.contains("\"N\""));
    let back: CategoryData = serde_json::from_str(&s).unwrap();
    assert_eq!(back, data);
}
