use mpogauge::fusion::FusionData;
use mpogauge::gauging::GaugeChain;
use mpogauge::group::{coboundary_trivialize2, Cochain2, FiniteGroup};
use mpogauge::linalg::*;
use mpogauge::mps::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn two_path(rep: &mpogauge::mpo::MpoGroupRep, a: &Mps, len: usize) -> f64 {
    let f = FusionData::solve_strict(rep).unwrap();
    let act = solve_action_tensors(a, &f, len.max(2)).unwrap();
    assert!(verify_action_tensors(a, &f, &act, 1e-9).unwrap().all_pass());
    let gm = gauge_mps(a, &f, &act).unwrap();
    let chain = GaugeChain::new(&f, len).unwrap();
    let direct = chain.gauge_state(&a.dense(len)).unwrap();
    assert!(direct.norm > 1e-6);
    let closed = gm.dense(len);
    // Invariance of the closed form under every local operator.
    for g in rep.group().elements() {
        for i in 0..len {
            let out = chain.apply_local_op(g, i, &closed).unwrap();
            assert!(diff_norm(&out, &closed) < 1e-9);
        }
    }
    diff_norm(&closed, &direct.vector)
}

#[test]
fn linear_z2_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (rep, a) = z2_linear_fixture(&mut rng);
    for len in [2, 3] {
        let d = two_path(&rep, &a, len);
        assert!(d < 1e-9, "L={len}: {d}");
    }
}

#[test]
fn projective_z2xz2_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (rep, a) = z2xz2_projective_fixture(&mut rng);
    for len in [2, 3] {
        let d = two_path(&rep, &a, len);
        assert!(d < 1e-9, "L={len}: {d}");
    }
}

#[test]
fn z3_closed_form() {
    let (rep, a) = z3_product_fixture();
    for len in [2, 3] {
        let d = two_path(&rep, &a, len);
        assert!(d < 1e-9, "L={len}: {d}");
    }
}

#[test]
fn linear_l_symbols_trivial() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (rep, a) = z2_linear_fixture(&mut rng);
    let f = FusionData::solve_strict(&rep).unwrap();
    let act = solve_action_tensors(&a, &f, 3).unwrap();
    let grp = rep.group();
    assert!(coboundary_trivialize2(grp, act.l_symbols()).unwrap().is_some());
}

#[test]
fn projective_l_symbols_match_pauli_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (rep, a) = z2xz2_projective_fixture(&mut rng);
    let f = FusionData::solve_strict(&rep).unwrap();
    let act = solve_action_tensors(&a, &f, 2).unwrap();
    let grp = rep.group().clone();
    let l = act.l_symbols();
    assert!(coboundary_trivialize2(&grp, l).unwrap().is_none(), "class should be nontrivial");
    // Fixture cocycle from V_g V_h = c(g,h) V_gh.
    let v = pauli_projective_rep();
    let cfix = Cochain2::from_fn(4, |g, h| {
        fit_scalar((&v[g] * &v[h]).as_slice(), v[grp.mul(g, h)].as_slice()).0
    });
    let ratio = Cochain2::from_fn(4, |g, h| l.get(g, h) * cfix.get(h, g).conj());
    assert!(coboundary_trivialize2(&grp, &ratio).unwrap().is_some());
}

#[test]
fn action_tensors_reproduce_global_symmetry() {
    // Single-tensor relation implies the dense global one at L ≤ 4.
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (rep, a) = z2_linear_fixture(&mut rng);
    for len in 2..=4 {
        let psi = a.dense(len);
        for g in 0..2 {
            let u = mpogauge::mpo::realize_dense(&rep, g, len).unwrap();
            let out = &u * nalgebra::DVector::from_column_slice(&psi);
            assert!(diff_norm(out.as_slice(), &psi) < 1e-9);
        }
    }
    let _ = FiniteGroup::cyclic(1);
}
