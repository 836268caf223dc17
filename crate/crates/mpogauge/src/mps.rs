//! Translation-invariant MPS with periodic boundary conditions, symmetry
//! action tensors, L-symbols and the closed-form gauged MPS.

use crate::error::{Error, Result};
use crate::fusion::FusionData;
use crate::gauging::EdgeLayout;
use crate::group::{Cochain2, FiniteGroup};
use crate::linalg::{c, fit_scalar, identity, matrix_rank, norm, permute_factors, Mat};
use crate::mpo::{realize_dense, MpoGroupRep};
use crate::report::Report;
use crate::tensor::Tensor;
use crate::C64;

/// Site tensor A stored as one D_l × D_r matrix per physical index.
#[derive(Clone, Debug, PartialEq)]
pub struct Mps {
    mats: Vec<Mat>,
}

impl Mps {
    pub fn new(mats: Vec<Mat>) -> Result<Self> {
        let first = mats.first().ok_or_else(|| Error::InvalidTensor("empty MPS tensor".into()))?;
        let shape = first.shape();
        if mats.iter().any(|m| m.shape() != shape) {
            return Err(Error::InvalidTensor("inconsistent virtual dimensions".into()));
        }
        if mats.iter().any(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::InvalidTensor("non-finite entry".into()));
        }
        Ok(Mps { mats })
    }

    /// From a tensor with labels (l, r, p).
    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let t = t.permute(&["l", "r", "p"])?;
        let s = t.shape();
        Self::new((0..s[2]).map(|p| Mat::from_fn(s[0], s[1], |a, b| t.get(&[a, b, p]))).collect())
    }

    pub fn to_tensor(&self) -> Tensor {
        let (dl, dr) = self.mats[0].shape();
        Tensor::from_fn(&[dl, dr, self.phys_dim()], &["l", "r", "p"], |ix| self.mats[ix[2]][(ix[0], ix[1])])
            .expect("consistent shape")
    }

    pub fn phys_dim(&self) -> usize {
        self.mats.len()
    }

    pub fn bond_dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn mat(&self, p: usize) -> &Mat {
        &self.mats[p]
    }

    pub fn mats(&self) -> &[Mat] {
        &self.mats
    }

    /// Σ Tr(A^{i_1}…A^{i_L}) |i_1…i_L⟩.
    pub fn dense(&self, len: usize) -> Vec<C64> {
        periodic_dense(&vec![self.mats.clone(); len])
    }
}

/// Dense vector of a periodic chain of site tensors (each a list of matrices
/// per physical index), first site most significant.
pub fn periodic_dense(sites: &[Vec<Mat>]) -> Vec<C64> {
    let d0 = sites[0][0].nrows();
    let mut partial: Vec<Mat> = vec![identity(d0)];
    for site in sites {
        partial = partial.iter().flat_map(|m| site.iter().map(move |a| m * a)).collect();
    }
    partial.iter().map(|m| m.trace()).collect()
}

/// Smallest blocking length k ≤ max_block at which the map from D×D
/// boundary matrices to ℂ^{d^k} is injective.
pub fn check_injectivity(mps: &Mps, max_block: usize) -> (bool, usize) {
    let dd = mps.bond_dim() * mps.bond_dim();
    let mut blocked: Vec<Mat> = mps.mats.clone();
    for k in 1..=max_block.max(1) {
        if blocked.len() >= dd {
            let m = Mat::from_fn(blocked.len(), dd, |p, ab| blocked[p][(ab / mps.bond_dim(), ab % mps.bond_dim())]);
            if matrix_rank(&m, 1e-10) == dd {
                return (true, k);
            }
        }
        if k < max_block {
            blocked = blocked.iter().flat_map(|m| mps.mats.iter().map(move |a| m * a)).collect();
        }
    }
    (false, max_block)
}

/// Action of T on A: (T·A)^o = Σ_i T[s,t,o,i] A^i with bonds (s,a), (t,b).
pub fn apply_mpo_tensor(t: &Tensor, mps: &Mps) -> Result<Vec<Mat>> {
    let s = t.shape();
    let (chi_l, chi_r, d_out, d_in) = (s[0], s[1], s[2], s[3]);
    if d_in != mps.phys_dim() {
        return Err(Error::DimensionMismatch { expected: mps.phys_dim(), got: d_in });
    }
    let dim = mps.bond_dim();
    Ok((0..d_out)
        .map(|o| {
            let mut m = Mat::zeros(chi_l * dim, chi_r * dim);
            for i in 0..d_in {
                for sl in 0..chi_l {
                    for sr in 0..chi_r {
                        let z = t.get(&[sl, sr, o, i]);
                        if z == c(0.0) {
                            continue;
                        }
                        let mut blk = m.view_mut((sl * dim, sr * dim), (dim, dim));
                        blk += mps.mats[i].map(|x| x * z);
                    }
                }
            }
            m
        })
        .collect())
}

/// Solves M^o = X A^o Y for X ((χD)×D) and Y (D×(χD)) with Y X = 1, given
/// an MPS that is injective at blocking length 1.
pub(crate) fn solve_reduction(mps: &Mps, target: &[Mat]) -> Result<(Mat, Mat)> {
    let dim = mps.bond_dim();
    let dd = dim * dim;
    let (rows, cols) = target[0].shape();
    // Map c ↦ Σ_o c_o A^o and its pseudo-inverse.
    let amap = Mat::from_fn(dd, mps.phys_dim(), |ab, p| mps.mats[p][(ab / dim, ab % dim)]);
    if matrix_rank(&amap, 1e-10) < dd {
        return Err(Error::NoSolution("MPS is not injective at blocking length 1".into()));
    }
    let ainv = crate::linalg::pinv(&amap, 1e-12);
    // R[(r,a),(b,c)] = Φ(E_ab)[r,c] = X[r,a] Y[b,c].
    let mut r = Mat::zeros(rows * dim, dim * cols);
    for a in 0..dim {
        for b in 0..dim {
            let coeffs = ainv.column(a * dim + b);
            for (p, m) in target.iter().enumerate() {
                let z = coeffs[p];
                if z == c(0.0) {
                    continue;
                }
                for rr in 0..rows {
                    for cc in 0..cols {
                        r[(rr * dim + a, b * cols + cc)] += z * m[(rr, cc)];
                    }
                }
            }
        }
    }
    let dec = crate::linalg::svd(&r);
    let top = dec.s[0];
    if top < 1e-12 {
        return Err(Error::NoSolution("symmetry maps the MPS to zero".into()));
    }
    if dec.s.len() > 1 && dec.s[1] > 1e-8 * top {
        return Err(Error::NotProportional(dec.s[1] / top));
    }
    let mut x = Mat::from_fn(rows, dim, |rr, a| dec.u[(rr * dim + a, 0)] * top.sqrt());
    let mut y = Mat::from_fn(dim, cols, |b, cc| dec.v[(b * cols + cc, 0)].conj() * top.sqrt());
    let yx = &y * &x;
    let (lam, res) = fit_scalar(yx.as_slice(), identity(dim).as_slice());
    if res > 1e-8 {
        return Err(Error::NotProportional(res));
    }
    if lam.norm() < 1e-12 {
        return Err(Error::NoSolution("Y X vanishes".into()));
    }
    // Split λ evenly, then fix the phase by the largest entry of X.
    let root = lam.sqrt();
    x /= root;
    y /= root;
    let big = x.iter().copied().max_by(|p, q| p.norm().partial_cmp(&q.norm()).unwrap()).unwrap();
    let ph = big / big.norm();
    x /= ph;
    y *= ph;
    Ok((x, y))
}

/// u·A = V A V† for an on-site unitary u; V returned with |det V| = 1 and its
/// largest-modulus entry real positive. Also returns the phase θ with
/// u^{⊗L}|ψ_A⟩ = e^{iθ}|ψ_A⟩ at the test length.
pub fn extract_onsite_symmetry(mps: &Mps, u: &Mat, test_len: usize) -> Result<(Mat, C64)> {
    let d = mps.phys_dim();
    if u.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, got: u.nrows() });
    }
    let psi = mps.dense(test_len);
    let mut upsi = psi.clone();
    let dims = vec![d; test_len];
    for i in 0..test_len {
        upsi = crate::linalg::apply_local(&upsi, &dims, &[i], u);
    }
    let (phase, res) = fit_scalar(&upsi, &psi);
    if res > 1e-9 || norm(&psi) < 1e-12 {
        return Err(Error::NotRepresentation(format!("state not symmetric under u (residual {res:.2e})")));
    }
    if !check_injectivity(mps, 1).0 {
        return Err(Error::NoSolution("MPS is not injective at blocking length 1".into()));
    }
    let target: Vec<Mat> = (0..d)
        .map(|o| (0..d).fold(Mat::zeros(mps.bond_dim(), mps.bond_dim()), |acc, i| acc + mps.mat(i) * u[(o, i)]))
        .collect();
    let (x, _) = solve_reduction(mps, &target)?;
    let dim = x.nrows() as i32;
    let det = x.determinant();
    let mut v = x / c(det.norm().powf(1.0 / dim as f64));
    let big = v.iter().copied().max_by(|p, q| p.norm().partial_cmp(&q.norm()).unwrap()).unwrap();
    v /= big / big.norm();
    Ok((v, phase))
}

/// Action tensors (X_g, Y_g) with T_g·A = X_g A Y_g, Y_g X_g = 1, and the
/// L-symbols defined by Y_{gh}(W⁻¹_{g,h}⊗1) = L_{g,h} Y_g(1⊗Y_h).
#[derive(Clone, Debug)]
pub struct ActionTensorSet {
    x: Vec<Mat>,
    y: Vec<Mat>,
    l: Cochain2,
}

impl ActionTensorSet {
    pub fn x(&self, g: usize) -> &Mat {
        &self.x[g]
    }

    pub fn y(&self, g: usize) -> &Mat {
        &self.y[g]
    }

    pub fn l_symbols(&self) -> &Cochain2 {
        &self.l
    }
}

/// Y_g(1_{χ_g}⊗Y_h) as a D × (χ_g χ_h D) matrix with column index (s, t, c).
fn y_chain(yg: &Mat, yh: &Mat, chi_g: usize, chi_h: usize, dim: usize) -> Mat {
    let mut out = Mat::zeros(dim, chi_g * chi_h * dim);
    for s in 0..chi_g {
        let blk = yg.columns(s * dim, dim) * yh;
        out.columns_mut(s * chi_h * dim, chi_h * dim).copy_from(&blk);
    }
    out
}

/// Y_{gh}(W⁻¹_{g,h}⊗1_D) with column index (s, t, c).
fn y_fused(ygh: &Mat, winv: &Mat, dim: usize) -> Mat {
    let chi_gh = winv.nrows();
    let pairs = winv.ncols();
    let mut out = Mat::zeros(dim, pairs * dim);
    for st in 0..pairs {
        for m in 0..chi_gh {
            let z = winv[(m, st)];
            if z == c(0.0) {
                continue;
            }
            let mut dst = out.columns_mut(st * dim, dim);
            dst += ygh.columns(m * dim, dim) * z;
        }
    }
    out
}

/// Solves the action tensors and L-symbols for an MPS symmetric under every
/// U_g of the representation, checked densely at `test_len` sites.
pub fn solve_action_tensors(mps: &Mps, fusion: &FusionData, test_len: usize) -> Result<ActionTensorSet> {
    let rep = fusion.rep();
    let grp = rep.group();
    let psi = mps.dense(test_len);
    for g in grp.elements() {
        let ug = realize_dense(rep, g, test_len)?;
        let out = &ug * nalgebra::DVector::from_column_slice(&psi);
        let res = crate::linalg::diff_norm(out.as_slice(), &psi);
        if res > 1e-9 * norm(&psi).max(1.0) {
            return Err(Error::NotRepresentation(format!(
                "MPS not symmetric under U_{g} (residual {res:.2e})"
            )));
        }
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for g in grp.elements() {
        let target = apply_mpo_tensor(rep.tensor(g), mps)?;
        let (xg, yg) = solve_reduction(mps, &target)?;
        x.push(xg);
        y.push(yg);
    }
    let dim = mps.bond_dim();
    let mut worst: f64 = 0.0;
    let l = Cochain2::from_fn(grp.order(), |g, h| {
        let lhs = y_fused(&y[grp.mul(g, h)], fusion.winv(g, h), dim);
        let rhs = y_chain(&y[g], &y[h], rep.chi(g), rep.chi(h), dim);
        let (s, res) = fit_scalar(lhs.as_slice(), rhs.as_slice());
        worst = worst.max(res);
        s
    });
    if worst > 1e-8 {
        return Err(Error::NotProportional(worst));
    }
    Ok(ActionTensorSet { x, y, l })
}

/// Residuals of the action-tensor data: reduction, orthogonality, unit
/// modulus of the L-symbols and their associativity.
pub fn verify_action_tensors(mps: &Mps, fusion: &FusionData, act: &ActionTensorSet, tol: f64) -> Result<Report> {
    let rep = fusion.rep();
    let grp = rep.group();
    let dim = mps.bond_dim();
    let (mut red, mut orth, mut modulus) = (0.0f64, 0.0f64, 0.0f64);
    for g in grp.elements() {
        let target = apply_mpo_tensor(rep.tensor(g), mps)?;
        for (o, m) in target.iter().enumerate() {
            red = red.max((m - act.x(g) * mps.mat(o) * act.y(g)).norm());
        }
        orth = orth.max((act.y(g) * act.x(g) - identity(dim)).norm());
        for h in grp.elements() {
            modulus = modulus.max((act.l.get(g, h).norm() - 1.0).abs());
        }
    }
    let mut r = Report::new();
    r.push("action tensors", "T_g·A = X_g A Y_g", red, tol);
    r.push("action orthogonality", "Y_g X_g = 1", orth, tol);
    r.push("L-symbol modulus", "|L_{g,h}| = 1", modulus, 1e-8);
    r.push(
        "L-symbol associativity",
        "L_{g,h} L_{gh,k} = L_{h,k} L_{g,hk}",
        crate::group::cocycle2_violation(grp, &act.l),
        1e-8,
    );
    Ok(r)
}

/// Matter tensor Ã = A ⊗ |g⟩⟨g| and edge tensor B of the gauged MPS.
#[derive(Clone, Debug)]
pub struct GaugedMps {
    pub matter: Vec<Mat>,
    pub edge: Vec<Mat>,
}

/// Ã[(a,g),(b,g)] = A[a,b] and
/// B[(b,g),(a,h), ⌊k⌋+x] = (1/|G|) L_{k,h} Y_k[b; (x, a)] with k = g h⁻¹,
/// where ⌊k⌋ is the offset of block k on the edge.
pub fn gauge_mps(mps: &Mps, fusion: &FusionData, act: &ActionTensorSet) -> Result<GaugedMps> {
    if !fusion.is_strict() {
        return Err(Error::Anomalous);
    }
    let rep = fusion.rep();
    let grp = rep.group();
    let n = grp.order();
    let dim = mps.bond_dim();
    let big = dim * n;
    let matter = mps
        .mats()
        .iter()
        .map(|a| {
            let mut m = Mat::zeros(big, big);
            for g in 0..n {
                m.view_mut((g * dim, g * dim), (dim, dim)).copy_from(a);
            }
            m
        })
        .collect();
    let layout = EdgeLayout::new(rep, &grp.elements().collect::<Vec<_>>());
    let mut edge = vec![Mat::zeros(big, big); layout.dim()];
    for g in 0..n {
        for h in 0..n {
            let k = grp.mul(g, grp.inv(h));
            let off = layout.offset(k).expect("all elements gauged");
            let lk = act.l.get(k, h) / c(n as f64);
            let yk = act.y(k);
            for x in 0..rep.chi(k) {
                for b in 0..dim {
                    for a in 0..dim {
                        edge[off + x][(g * dim + b, h * dim + a)] = lk * yk[(b, x * dim + a)];
                    }
                }
            }
        }
    }
    Ok(GaugedMps { matter, edge })
}

impl GaugedMps {
    /// Dense state in the chain order used by the gauging engine: all matter
    /// factors first, then all edges.
    pub fn dense(&self, len: usize) -> Vec<C64> {
        let mut sites = Vec::with_capacity(2 * len);
        let mut dims = Vec::with_capacity(2 * len);
        for _ in 0..len {
            sites.push(self.matter.clone());
            sites.push(self.edge.clone());
            dims.push(self.matter.len());
            dims.push(self.edge.len());
        }
        let alt = periodic_dense(&sites);
        let order: Vec<usize> = (0..len).map(|k| 2 * k).chain((0..len).map(|k| 2 * k + 1)).collect();
        permute_factors(&alt, &dims, &order)
    }
}

/// Linear Z₂ fixture: d = 4, u(1) = diag(1, 1, −1, −1), V = Z, with A^0, A^1
/// diagonal and A^2, A^3 off-diagonal.
pub fn z2_linear_fixture(rng: &mut impl rand::Rng) -> (MpoGroupRep, Mps) {
    let grp = FiniteGroup::cyclic(2);
    let u1 = Mat::from_diagonal(&nalgebra::dvector![c(1.0), c(1.0), c(-1.0), c(-1.0)]);
    let rep = crate::mpo::build_onsite_mpo(&grp, vec![identity(4), u1]).expect("valid rep");
    let mut r = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let mats = vec![
        Mat::from_diagonal(&nalgebra::dvector![r(), r()]),
        Mat::from_diagonal(&nalgebra::dvector![r(), r()]),
        Mat::from_row_slice(2, 2, &[c(0.0), r(), r(), c(0.0)]),
        Mat::from_row_slice(2, 2, &[c(0.0), r(), r(), c(0.0)]),
    ];
    (rep, Mps::new(mats).expect("finite"))
}

/// Pauli matrices indexed by Z₂×Z₂ labels (a·2 + b ↦ X^a Z^b).
pub fn pauli_projective_rep() -> Vec<Mat> {
    let x = Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let z = Mat::from_diagonal(&nalgebra::dvector![c(1.0), c(-1.0)]);
    vec![identity(2), z.clone(), x.clone(), &x * &z]
}

/// Projective Z₂×Z₂ fixture: regular on-site u, V the Pauli projective
/// representation, A the group average of a random seed tensor.
pub fn z2xz2_projective_fixture(rng: &mut impl rand::Rng) -> (MpoGroupRep, Mps) {
    let z2 = FiniteGroup::cyclic(2);
    let grp = FiniteGroup::direct_product(&z2, &z2);
    let u = crate::mpo::regular_rep(&grp);
    let v = pauli_projective_rep();
    let seed: Vec<Mat> = (0..4).map(|_| crate::linalg::random_matrix(2, 2, rng)).collect();
    let mut mats = vec![Mat::zeros(2, 2); 4];
    for g in grp.elements() {
        let ginv = grp.inv(g);
        for (o, m) in mats.iter_mut().enumerate() {
            for (i, s) in seed.iter().enumerate() {
                let z = u[ginv][(o, i)];
                if z != c(0.0) {
                    *m += &v[g] * s * v[g].adjoint() * z;
                }
            }
        }
    }
    for m in &mut mats {
        *m /= c(4.0);
    }
    let rep = crate::mpo::build_onsite_mpo(&grp, u).expect("valid rep");
    (rep, Mps::new(mats).expect("finite"))
}

/// Z₃ regular on-site fixture with D = 1 and the invariant vector.
pub fn z3_product_fixture() -> (MpoGroupRep, Mps) {
    let grp = FiniteGroup::cyclic(3);
    let rep = crate::mpo::build_onsite_mpo(&grp, crate::mpo::regular_rep(&grp)).expect("valid rep");
    let mats = (0..3).map(|_| Mat::from_element(1, 1, c(1.0))).collect();
    (rep, Mps::new(mats).expect("finite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn injectivity_examples() {
        let ghz = Mps::new(vec![
            Mat::from_diagonal(&nalgebra::dvector![c(1.0), c(0.0)]),
            Mat::from_diagonal(&nalgebra::dvector![c(0.0), c(1.0)]),
        ])
        .unwrap();
        assert!(!check_injectivity(&ghz, 4).0);
        let product = Mps::new(vec![Mat::from_element(1, 1, c(1.0)), Mat::from_element(1, 1, c(0.5))]).unwrap();
        assert_eq!(check_injectivity(&product, 3), (true, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rand3 = Mps::new((0..3).map(|_| crate::linalg::random_matrix(2, 2, &mut rng)).collect()).unwrap();
        let (ok, k) = check_injectivity(&rand3, 3);
        // d = 3 < D² = 4, so one site cannot be injective; two sites can.
        assert!(ok);
        assert_eq!(k, 2);
    }

    #[test]
    fn tensor_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (_, a) = z2_linear_fixture(&mut rng);
        assert_eq!(Mps::from_tensor(&a.to_tensor()).unwrap(), a);
    }

    #[test]
    fn onsite_symmetry_identity_and_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (rep, a) = z2_linear_fixture(&mut rng);
        let (v, ph) = extract_onsite_symmetry(&a, &identity(4), 3).unwrap();
        assert!((v - identity(2)).norm() < 1e-9);
        assert!((ph - c(1.0)).norm() < 1e-9);
        let u1 = crate::fixtures::onsite_matrices(&rep).unwrap()[1].clone();
        let (v, _) = extract_onsite_symmetry(&a, &u1, 3).unwrap();
        let z = Mat::from_diagonal(&nalgebra::dvector![c(1.0), c(-1.0)]);
        let (s, res) = fit_scalar(v.as_slice(), z.as_slice());
        assert!(res < 1e-9);
        assert!((s.norm() - 1.0).abs() < 1e-9);
        for o in 0..4 {
            let lhs = (0..4).fold(Mat::zeros(2, 2), |acc, i| acc + a.mat(i) * u1[(o, i)]);
            assert!((lhs - &v * a.mat(o) * v.adjoint()).norm() < 1e-9);
        }
    }

    #[test]
    fn projective_onsite_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (rep, a) = z2xz2_projective_fixture(&mut rng);
        let u = crate::fixtures::onsite_matrices(&rep).unwrap();
        let vs: Vec<Mat> = u.iter().map(|ug| extract_onsite_symmetry(&a, ug, 2).unwrap().0).collect();
        // X and Z anticommute: V_g V_h V_g⁻¹ V_h⁻¹ is the scalar −1.
        let comm = &vs[1] * &vs[2] * vs[1].clone().try_inverse().unwrap() * vs[2].clone().try_inverse().unwrap();
        let (s, res) = fit_scalar(comm.as_slice(), identity(2).as_slice());
        assert!(res < 1e-9);
        assert!((s + c(1.0)).norm() < 1e-9);
    }

    #[test]
    fn asymmetric_state_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Mps::new((0..2).map(|_| crate::linalg::random_matrix(1, 1, &mut rng)).collect()).unwrap();
        let x = Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert!(matches!(extract_onsite_symmetry(&a, &x, 3), Err(Error::NotRepresentation(_))));
    }

    #[test]
    fn trivial_group_actions() {
        let grp = FiniteGroup::cyclic(1);
        let rep = crate::mpo::build_onsite_mpo(&grp, vec![identity(2)]).unwrap();
        let f = FusionData::solve_strict(&rep).unwrap();
        let a = Mps::new(vec![Mat::from_element(1, 1, c(1.0)), Mat::from_element(1, 1, c(2.0))]).unwrap();
        let act = solve_action_tensors(&a, &f, 2).unwrap();
        assert!((act.l_symbols().get(0, 0) - c(1.0)).norm() < 1e-12);
        assert!((act.x(0) - identity(1)).norm() < 1e-12);
    }
}
