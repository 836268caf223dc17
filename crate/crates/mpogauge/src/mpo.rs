//! MPO representations of finite groups and their dense realization.

use crate::error::{Error, Result};
use crate::group::{check_cocycle3, Cocycle3, FiniteGroup};
use crate::linalg::{c, matrix_rank, Mat};
use crate::report::Report;
use crate::tensor::Tensor;
use crate::C64;

/// Largest d^L for which dense realization is allowed.
pub const DENSE_GUARD: usize = 4096;

/// How a representation was built; on-site data enables closed forms.
#[derive(Clone, Debug)]
pub enum RepKind {
    OnSite { u: Vec<Mat> },
    Anomalous { omega: Cocycle3 },
    Custom,
}

/// Family of MPO tensors T_g with axes (l, r, o, i) = (left bond, right bond,
/// physical out, physical in).
#[derive(Clone, Debug)]
pub struct MpoGroupRep {
    group: FiniteGroup,
    d: usize,
    tensors: Vec<Tensor>,
    chi: Vec<usize>,
    offsets: Vec<usize>,
    kind: RepKind,
}

impl MpoGroupRep {
    pub fn from_tensors(group: FiniteGroup, tensors: Vec<Tensor>, kind: RepKind) -> Result<Self> {
        if tensors.len() != group.order() {
            return Err(Error::InvalidTensor(format!(
                "{} tensors for a group of order {}",
                tensors.len(),
                group.order()
            )));
        }
        let d = tensors[0].shape()[2];
        let mut chi = Vec::new();
        let mut normalized = Vec::new();
        for t in tensors {
            let t = t.permute(&["l", "r", "o", "i"])?;
            let s = t.shape();
            if s[0] != s[1] || s[2] != d || s[3] != d {
                return Err(Error::InvalidTensor(format!("bad MPO tensor shape {s:?}")));
            }
            chi.push(s[0]);
            normalized.push(t);
        }
        let offsets = chi
            .iter()
            .scan(0, |acc, &x| {
                let o = *acc;
                *acc += x;
                Some(o)
            })
            .collect();
        Ok(MpoGroupRep { group, d, tensors: normalized, chi, offsets, kind })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn phys_dim(&self) -> usize {
        self.d
    }

    pub fn tensor(&self, g: usize) -> &Tensor {
        &self.tensors[g]
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn chi(&self, g: usize) -> usize {
        self.chi[g]
    }

    pub fn chis(&self) -> &[usize] {
        &self.chi
    }

    pub fn offset(&self, g: usize) -> usize {
        self.offsets[g]
    }

    /// Dimension of the graded virtual space ⊕_g ℂ^{χ_g}.
    pub fn total_chi(&self) -> usize {
        self.chi.iter().sum()
    }

    pub fn kind(&self) -> &RepKind {
        &self.kind
    }

    pub fn is_onsite(&self) -> bool {
        matches!(self.kind, RepKind::OnSite { .. })
    }

    /// The χ_g × χ_g matrix T_g^{o i}.
    pub fn bond_matrix(&self, g: usize, o: usize, i: usize) -> Mat {
        let t = &self.tensors[g];
        Mat::from_fn(self.chi[g], self.chi[g], |a, b| t.get(&[a, b, o, i]))
    }

    /// Copy with one tensor replaced (used for mutation tests).
    pub fn with_tensor(&self, g: usize, t: Tensor) -> Result<Self> {
        let mut ts = self.tensors.clone();
        ts[g] = t;
        MpoGroupRep::from_tensors(self.group.clone(), ts, RepKind::Custom)
    }
}

/// Regular representation u(g)|h⟩ = |gh⟩.
pub fn regular_rep(g: &FiniteGroup) -> Vec<Mat> {
    let n = g.order();
    g.elements()
        .map(|a| Mat::from_fn(n, n, |r, s| c((r == g.mul(a, s)) as u8 as f64)))
        .collect()
}

/// u(g) = diag(±1) with u(1) = diag(1,−1) on Z₂.
pub fn z2_diag_rep() -> Vec<Mat> {
    vec![Mat::identity(2, 2), Mat::from_diagonal(&nalgebra::dvector![c(1.0), c(-1.0)])]
}

pub fn representation_violation(g: &FiniteGroup, u: &[Mat]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in g.elements() {
        for b in g.elements() {
            worst = worst.max((&u[a] * &u[b] - &u[g.mul(a, b)]).norm());
        }
    }
    worst
}

/// T_g[0,0,o,i] = u(g)[o,i], χ_g = 1.
pub fn build_onsite_mpo(g: &FiniteGroup, u: Vec<Mat>) -> Result<MpoGroupRep> {
    if u.len() != g.order() {
        return Err(Error::NotRepresentation(format!("{} matrices for order {}", u.len(), g.order())));
    }
    let d = u[0].nrows();
    if u.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::NotRepresentation("matrices must be square of equal size".into()));
    }
    let viol = representation_violation(g, &u);
    if viol > 1e-10 {
        return Err(Error::NotRepresentation(format!("u(g)u(h) ≠ u(gh) by {viol:e}")));
    }
    for m in &u {
        if (m * m.adjoint() - Mat::identity(d, d)).norm() > 1e-10 {
            return Err(Error::NotRepresentation("u(g) not unitary".into()));
        }
    }
    let tensors = u
        .iter()
        .map(|m| Tensor::from_fn(&[1, 1, d, d], &["l", "r", "o", "i"], |x| m[(x[2], x[3])]))
        .collect::<Result<Vec<_>>>()?;
    MpoGroupRep::from_tensors(g.clone(), tensors, RepKind::OnSite { u })
}

/// Homogeneous form ν(g₀,g₁,g₂,g₃) of an inhomogeneous 3-cocycle.
fn homogeneous(g: &FiniteGroup, w: &Cocycle3, g0: usize, g1: usize, g2: usize, g3: usize) -> C64 {
    let a = g.inv(g0);
    let x = g.mul(a, g1);
    let xy = g.mul(a, g2);
    let xyz = g.mul(a, g3);
    w.get(x, g.mul(g.inv(x), xy), g.mul(g.inv(xy), xyz))
}

/// Label-pair construction for an arbitrary 3-cocycle. Each site carries
/// (l, r) ∈ G×G (d = |G|², basis index l·|G| + r); the bonds copy the labels,
/// so χ_g = |G|, and
/// T_g[l, r, (gl, gr), (l, r)] = conj ν(e, g⁻¹, l, r),
/// which makes the associator of the fusion tensors cohomologous to ω.
/// U_e projects onto configurations where each r matches the next l.
pub fn build_anomalous_mpo(g: &FiniteGroup, w: &Cocycle3) -> Result<MpoGroupRep> {
    if !check_cocycle3(g, w) {
        return Err(Error::InvalidCocycle("cocycle condition fails".into()));
    }
    let n = g.order();
    let d = n * n;
    let tensors = g
        .elements()
        .map(|a| {
            let mut t = Tensor::zeros(&[n, n, d, d], &["l", "r", "o", "i"])?;
            for l in 0..n {
                for r in 0..n {
                    let phase = homogeneous(g, w, 0, g.inv(a), l, r).conj();
                    t.set(&[l, r, g.mul(a, l) * n + g.mul(a, r), l * n + r], phase);
                }
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    MpoGroupRep::from_tensors(g.clone(), tensors, RepKind::Anomalous { omega: w.clone() })
}

/// Dense matrix of the periodic MPO built from one (l, r, o, i) tensor on L
/// sites: Σ Tr(T^{o₁i₁}⋯T^{o_L i_L}) |o⟩⟨i|.
pub fn mpo_dense(t: &Tensor, len: usize) -> Result<Mat> {
    let t = t.permute(&["l", "r", "o", "i"])?;
    let (chi, chi_r, d, d_in) = (t.shape()[0], t.shape()[1], t.shape()[2], t.shape()[3]);
    if chi != chi_r || d != d_in {
        return Err(Error::InvalidTensor("MPO tensor must have square bond and physical legs".into()));
    }
    if len == 0 {
        return Err(Error::InvalidSegment("length must be positive".into()));
    }
    let dim = d.checked_pow(len as u32).filter(|&x| x <= DENSE_GUARD);
    let Some(dim) = dim else {
        return Err(Error::SizeGuard(format!("d^L = {d}^{len} exceeds {DENSE_GUARD}")));
    };
    let data = t.data();
    // m[(l0, r, O, I)] with O, I the combined physical indices so far.
    let mut m: Vec<C64> = data.to_vec();
    let mut cur = d;
    for _ in 1..len {
        let next = cur * d;
        let mut out = vec![c(0.0); chi * chi * next * next];
        for l0 in 0..chi {
            for r in 0..chi {
                for big_o in 0..cur {
                    for big_i in 0..cur {
                        let z = m[((l0 * chi + r) * cur + big_o) * cur + big_i];
                        if z == c(0.0) {
                            continue;
                        }
                        for r2 in 0..chi {
                            for o in 0..d {
                                for i in 0..d {
                                    let w = data[((r * chi + r2) * d + o) * d + i];
                                    if w == c(0.0) {
                                        continue;
                                    }
                                    let idx = ((l0 * chi + r2) * next + big_o * d + o) * next
                                        + big_i * d
                                        + i;
                                    out[idx] += z * w;
                                }
                            }
                        }
                    }
                }
            }
        }
        m = out;
        cur = next;
    }
    let mut dense = Mat::zeros(dim, dim);
    for a in 0..chi {
        for o in 0..dim {
            for i in 0..dim {
                dense[(o, i)] += m[((a * chi + a) * dim + o) * dim + i];
            }
        }
    }
    Ok(dense)
}

/// Dense U_g on L sites, the oracle for MPO-level identities.
pub fn realize_dense(rep: &MpoGroupRep, g: usize, len: usize) -> Result<Mat> {
    mpo_dense(rep.tensor(g), len)
}

pub fn realize_all(rep: &MpoGroupRep, len: usize) -> Result<Vec<Mat>> {
    rep.group().elements().map(|g| realize_dense(rep, g, len)).collect()
}

/// Checks U_g U_h = U_{gh} for all pairs; one record per pair.
pub fn verify_group_law(rep: &MpoGroupRep, len: usize, tol: f64) -> Result<Report> {
    let us = realize_all(rep, len)?;
    let g = rep.group();
    let mut report = Report::new();
    for a in g.elements() {
        for b in g.elements() {
            let res = (&us[a] * &us[b] - &us[g.mul(a, b)]).norm();
            report.push(format!("group law ({a},{b}) L={len}"), "U_g U_h = U_gh", res, tol);
        }
    }
    Ok(report)
}

/// Rank of T_g blocked over two sites, viewed as a map from the outer bond
/// pair to the physical legs; injective iff it equals χ_g².
pub fn blocked_rank(rep: &MpoGroupRep, g: usize) -> usize {
    let chi = rep.chi(g);
    let d = rep.phys_dim();
    let mut m = Mat::zeros(chi * chi, d.pow(4));
    for o1 in 0..d {
        for i1 in 0..d {
            let a = rep.bond_matrix(g, o1, i1);
            for o2 in 0..d {
                for i2 in 0..d {
                    let p = &a * rep.bond_matrix(g, o2, i2);
                    let col = ((o1 * d + o2) * d + i1) * d + i2;
                    for x in 0..chi {
                        for y in 0..chi {
                            m[(x * chi + y, col)] = p[(x, y)];
                        }
                    }
                }
            }
        }
    }
    matrix_rank(&m, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron_all;

    #[test]
    fn trivial_group_is_identity() {
        let g = FiniteGroup::cyclic(1);
        let rep = build_onsite_mpo(&g, vec![Mat::identity(2, 2)]).unwrap();
        for len in 1..4 {
            let u = realize_dense(&rep, 0, len).unwrap();
            assert!((u - Mat::identity(1 << len, 1 << len)).norm() == 0.0);
        }
    }

    #[test]
    fn z2_diag_tensor_square() {
        let rep = build_onsite_mpo(&FiniteGroup::cyclic(2), z2_diag_rep()).unwrap();
        let u = realize_dense(&rep, 1, 2).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| u[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
        let u3 = realize_dense(&rep, 1, 3).unwrap();
        for k in 0..8usize {
            let sign = if k.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(u3[(k, k)], c(sign));
        }
        assert_eq!(realize_dense(&rep, 1, 1).unwrap(), z2_diag_rep()[1]);
    }

    #[test]
    fn onsite_dense_is_kronecker_power() {
        for grp in [FiniteGroup::cyclic(3), FiniteGroup::cyclic(4), FiniteGroup::symmetric3()] {
            let u = regular_rep(&grp);
            let rep = build_onsite_mpo(&grp, u.clone()).unwrap();
            let len = if grp.order() == 6 { 2 } else { 3 };
            for g in grp.elements() {
                let dense = realize_dense(&rep, g, len).unwrap();
                let oracle = kron_all(&vec![u[g].clone(); len]);
                assert!((dense - oracle).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_representation() {
        let mut u = z2_diag_rep();
        u[1] = Mat::from_diagonal(&nalgebra::dvector![c(1.0), C64::new(0.0, 1.0)]);
        assert!(matches!(
            build_onsite_mpo(&FiniteGroup::cyclic(2), u),
            Err(Error::NotRepresentation(_))
        ));
    }

    #[test]
    fn group_law_on_onsite_and_anomalous_builds() {
        let z4 = FiniteGroup::cyclic(4);
        let rep = build_onsite_mpo(&z4, regular_rep(&z4)).unwrap();
        let r = verify_group_law(&rep, 3, 1e-10).unwrap();
        assert_eq!(r.records.len(), 16);
        assert!(r.all_pass());
        let z2 = FiniteGroup::cyclic(2);
        let anom = build_anomalous_mpo(&z2, &Cocycle3::cyclic(2, 1)).unwrap();
        for len in 2..=4 {
            assert!(verify_group_law(&anom, len, 1e-9).unwrap().all_pass());
        }
        let z3 = FiniteGroup::cyclic(3);
        let anom3 = build_anomalous_mpo(&z3, &Cocycle3::cyclic(3, 1)).unwrap();
        assert!(verify_group_law(&anom3, 2, 1e-9).unwrap().all_pass());
    }

    #[test]
    fn anomalous_unit_is_projector_and_not_identity() {
        let z2 = FiniteGroup::cyclic(2);
        let rep = build_anomalous_mpo(&z2, &Cocycle3::cyclic(2, 1)).unwrap();
        for len in 2..=4 {
            let ue = realize_dense(&rep, 0, len).unwrap();
            assert!((&ue * &ue - &ue).norm() < 1e-12);
            assert!((&ue - Mat::identity(ue.nrows(), ue.nrows())).norm() > 1.0);
            let u1 = realize_dense(&rep, 1, len).unwrap();
            assert!((&u1 * &u1 - &ue).norm() < 1e-12);
            assert!((&u1 * &ue - &u1).norm() < 1e-12);
        }
    }

    #[test]
    fn corrupted_tensor_flagged() {
        let z2 = FiniteGroup::cyclic(2);
        let rep = build_onsite_mpo(&z2, z2_diag_rep()).unwrap();
        let mut t = rep.tensor(1).clone();
        t.set(&[0, 0, 1, 1], c(-0.5));
        let bad = rep.with_tensor(1, t).unwrap();
        let r = verify_group_law(&bad, 2, 1e-9).unwrap();
        assert!(!r.all_pass());
        assert!(r.failures().any(|f| f.identity.starts_with("group law (1,1)")));
    }

    #[test]
    fn blocked_injectivity() {
        let z2 = FiniteGroup::cyclic(2);
        let onsite = build_onsite_mpo(&z2, z2_diag_rep()).unwrap();
        let anom = build_anomalous_mpo(&z2, &Cocycle3::cyclic(2, 1)).unwrap();
        for g in 0..2 {
            assert_eq!(blocked_rank(&onsite, g), 1);
            assert_eq!(blocked_rank(&anom, g), anom.chi(g) * anom.chi(g));
        }
    }

    #[test]
    fn size_guard() {
        let z2 = FiniteGroup::cyclic(2);
        let rep = build_onsite_mpo(&z2, z2_diag_rep()).unwrap();
        assert!(matches!(realize_dense(&rep, 0, 13), Err(Error::SizeGuard(_))));
    }
}
