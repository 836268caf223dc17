//! Gauging of non-anomalous MPO symmetries on a periodic chain.
//!
//! Factor order of the full space: matter sites 0..L, then edges 0..L where
//! edge j sits between matter j and j+1 (edge j = right edge of site j = left
//! edge of site j+1). Each edge carries ⊕_g ℂ^{χ_g} over the gauged elements.

use crate::error::{Error, Result};
use crate::fusion::FusionData;
use crate::group::FiniteGroup;
use crate::linalg::{
    apply_local, c, diff_norm, mul_sparse, norm, permute_factors, sparse_diff_norm, Mat, SparseLocal,
};
use crate::mpo::{mpo_dense, MpoGroupRep};
use crate::report::Report;
use crate::tensor::Tensor;
use crate::C64;

/// Largest total dimension d^L·χ^L handled densely.
pub const CHAIN_GUARD: usize = 1 << 16;

/// Which group blocks an edge carries and where they sit.
#[derive(Clone, Debug)]
pub struct EdgeLayout {
    elems: Vec<usize>,
    offset: Vec<Option<usize>>,
    dim: usize,
}

impl EdgeLayout {
    pub fn new(rep: &MpoGroupRep, elems: &[usize]) -> Self {
        let mut offset = vec![None; rep.group().order()];
        let mut dim = 0;
        for &g in elems {
            offset[g] = Some(dim);
            dim += rep.chi(g);
        }
        EdgeLayout { elems: elems.to_vec(), offset, dim }
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    pub fn offset(&self, g: usize) -> Option<usize> {
        self.offset[g]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Shared-edge local operator û_g on (left edge, matter, right edge):
/// Σ_{h,k} W⁻¹_{hg⁻¹,g}[y; (x,s)] T_g[s,t,o,i] W_{g,k}[(t,w); z] |x,o,z⟩⟨y,i,w|
/// with y ∈ block h, x ∈ block hg⁻¹, w ∈ block k, z ∈ block gk.
pub fn shared_edge_op(f: &FusionData, layout: &EdgeLayout, g: usize) -> Mat {
    let rep = f.rep();
    let grp = rep.group();
    let d = rep.phys_dim();
    let e = layout.dim();
    let dim = e * d * e;
    let cg = rep.chi(g);
    let gi = grp.inv(g);
    let mut out = Mat::zeros(dim, dim);
    let t = rep.tensor(g);
    for &h in layout.elems() {
        let hl = grp.mul(h, gi);
        let (Some(oy), Some(ox)) = (layout.offset(h), layout.offset(hl)) else { continue };
        let left = f.winv(hl, g);
        for &k in layout.elems() {
            let gk = grp.mul(g, k);
            let (Some(ow), Some(oz)) = (layout.offset(k), layout.offset(gk)) else { continue };
            let right = f.w(g, k);
            let (ch, chl, ck, cgk) = (rep.chi(h), rep.chi(hl), rep.chi(k), rep.chi(gk));
            for o in 0..d {
                for i in 0..d {
                    let tm = Mat::from_fn(cg, cg, |s, tt| t.get(&[s, tt, o, i]));
                    if tm.iter().all(|z| *z == c(0.0)) {
                        continue;
                    }
                    for y in 0..ch {
                        for x in 0..chl {
                            // a[t] = Σ_s W⁻¹[y; (x,s)] T[s,t]
                            let a: Vec<C64> = (0..cg)
                                .map(|tt| (0..cg).map(|s| left[(y, x * cg + s)] * tm[(s, tt)]).sum())
                                .collect();
                            if a.iter().all(|z| *z == c(0.0)) {
                                continue;
                            }
                            for w in 0..ck {
                                for z in 0..cgk {
                                    let val: C64 = (0..cg).map(|tt| a[tt] * right[(tt * ck + w, z)]).sum();
                                    if val == c(0.0) {
                                        continue;
                                    }
                                    let row = ((ox + x) * d + o) * e + oz + z;
                                    let col = ((oy + y) * d + i) * e + ow + w;
                                    out[(row, col)] += val;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// R_g ⊗ u_g ⊗ L_g with R_g|h⟩ = |hg⁻¹⟩ and L_g|k⟩ = |gk⟩ on ℂ[G].
pub fn onsite_local_reference(grp: &FiniteGroup, u: &Mat, g: usize) -> Mat {
    let n = grp.order();
    let r = Mat::from_fn(n, n, |a, b| c((a == grp.mul(b, grp.inv(g))) as u8 as f64));
    let l = Mat::from_fn(n, n, |a, b| c((a == grp.mul(g, b)) as u8 as f64));
    r.kronecker(u).kronecker(&l)
}

#[derive(Clone, Debug)]
pub struct GaugedState {
    pub vector: Vec<C64>,
    pub norm: f64,
    pub annihilated: bool,
    pub provenance: String,
}

/// Matter-plus-edge chain over a strict-gauge fusion data set.
#[derive(Clone, Debug)]
pub struct GaugeChain {
    fusion: FusionData,
    len: usize,
    layout: EdgeLayout,
    ops: Vec<Option<Mat>>,
    projector: Mat,
    v_edge: Vec<C64>,
}

impl GaugeChain {
    pub fn new(fusion: &FusionData, len: usize) -> Result<Self> {
        let elems: Vec<usize> = fusion.group().elements().collect();
        Self::build(fusion, len, &elems)
    }

    /// Chain gauging only the normal subgroup `sub`.
    pub fn with_subgroup(fusion: &FusionData, len: usize, sub: &[usize]) -> Result<Self> {
        let grp = fusion.group();
        if !grp.is_subgroup(sub) {
            return Err(Error::NotSubgroup);
        }
        if !grp.is_normal(sub) {
            return Err(Error::NotNormal);
        }
        let mut elems = sub.to_vec();
        elems.sort_unstable();
        Self::build(fusion, len, &elems)
    }

    /// Builds the local operators without requiring strict gauge. For
    /// anomalous data the neighbor commutators then fail to vanish.
    pub fn forced(fusion: &FusionData, len: usize) -> Result<Self> {
        let elems: Vec<usize> = fusion.group().elements().collect();
        Self::build_unchecked(fusion, len, &elems)
    }

    fn build(fusion: &FusionData, len: usize, elems: &[usize]) -> Result<Self> {
        if !fusion.is_strict() {
            return Err(Error::Anomalous);
        }
        Self::build_unchecked(fusion, len, elems)
    }

    fn build_unchecked(fusion: &FusionData, len: usize, elems: &[usize]) -> Result<Self> {
        let v = fusion
            .unit_vector()
            .ok_or_else(|| Error::NoSolution("unit vector missing".into()))?;
        if len < 2 {
            return Err(Error::InvalidSegment("chain needs at least two sites".into()));
        }
        let rep = fusion.rep();
        let layout = EdgeLayout::new(rep, elems);
        let total = (rep.phys_dim() * layout.dim()).checked_pow(len as u32);
        if total.map_or(true, |t| t > CHAIN_GUARD) {
            return Err(Error::SizeGuard(format!(
                "(d·χ)^L = ({}·{})^{len} exceeds {CHAIN_GUARD}",
                rep.phys_dim(),
                layout.dim()
            )));
        }
        let mut ops = vec![None; rep.group().order()];
        let mut projector = Mat::zeros(layout.dim() * rep.phys_dim() * layout.dim(), layout.dim() * rep.phys_dim() * layout.dim());
        for &g in elems {
            let op = shared_edge_op(fusion, &layout, g);
            projector += &op;
            ops[g] = Some(op);
        }
        projector /= c(elems.len() as f64);
        let mut v_edge = vec![c(0.0); layout.dim()];
        v_edge[..v.len()].copy_from_slice(v);
        Ok(GaugeChain { fusion: fusion.clone(), len, layout, ops, projector, v_edge })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn fusion(&self) -> &FusionData {
        &self.fusion
    }

    pub fn layout(&self) -> &EdgeLayout {
        &self.layout
    }

    pub fn gauged_elems(&self) -> &[usize] {
        self.layout.elems()
    }

    pub fn matter_dim(&self) -> usize {
        self.fusion.rep().phys_dim().pow(self.len as u32)
    }

    pub fn dims(&self) -> Vec<usize> {
        let d = self.fusion.rep().phys_dim();
        let mut dims = vec![d; self.len];
        dims.extend(std::iter::repeat(self.layout.dim()).take(self.len));
        dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// Factors (left edge, matter, right edge) of site i.
    pub fn site_factors(&self, i: usize) -> [usize; 3] {
        let l = self.len;
        [l + (i + l - 1) % l, i, l + i]
    }

    /// û_g on its three-factor local space.
    pub fn local_op(&self, g: usize) -> Result<&Mat> {
        self.ops[g]
            .as_ref()
            .ok_or_else(|| Error::InvalidGroup(format!("element {g} is not gauged on this chain")))
    }

    pub fn apply_local_op(&self, g: usize, i: usize, state: &[C64]) -> Result<Vec<C64>> {
        Ok(apply_local(state, &self.dims(), &self.site_factors(i), self.local_op(g)?))
    }

    pub fn apply_site_projector(&self, i: usize, state: &[C64]) -> Vec<C64> {
        apply_local(state, &self.dims(), &self.site_factors(i), &self.projector)
    }

    /// P = Π_i P_i applied in the given site order.
    pub fn apply_projector_ordered(&self, state: &[C64], order: &[usize]) -> Vec<C64> {
        order.iter().fold(state.to_vec(), |s, &i| self.apply_site_projector(i, &s))
    }

    pub fn apply_projector(&self, state: &[C64]) -> Vec<C64> {
        let order: Vec<usize> = (0..self.len).collect();
        self.apply_projector_ordered(state, &order)
    }

    /// ψ ⊗ v^{⊗L} with v placed in the identity block of every edge.
    pub fn couple(&self, psi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != self.matter_dim() {
            return Err(Error::DimensionMismatch { expected: self.matter_dim(), got: psi.len() });
        }
        let mut edges = vec![c(1.0)];
        for _ in 0..self.len {
            edges = edges
                .iter()
                .flat_map(|a| self.v_edge.iter().map(move |b| a * b))
                .collect();
        }
        Ok(psi.iter().flat_map(|a| edges.iter().map(move |b| a * b)).collect())
    }

    /// G|ψ⟩ = P(|ψ⟩ ⊗ |v⟩^{⊗L}).
    pub fn gauge_state(&self, psi: &[C64]) -> Result<GaugedState> {
        let vector = self.apply_projector(&self.couple(psi)?);
        let n = norm(&vector);
        Ok(GaugedState {
            vector,
            norm: n,
            annihilated: n < crate::DEFAULT_TOL,
            provenance: format!(
                "projector gauging, L={}, gauged elements {:?}",
                self.len,
                self.layout.elems()
            ),
        })
    }

    /// Matrix of the gauging map, columns G|j⟩ for matter basis states.
    pub fn gauge_map_matrix(&self) -> Result<Mat> {
        let m = self.matter_dim();
        let total = self.total_dim();
        let mut out = Mat::zeros(total, m);
        for j in 0..m {
            let mut e = vec![c(0.0); m];
            e[j] = c(1.0);
            let col = self.gauge_state(&e)?.vector;
            for (i, z) in col.into_iter().enumerate() {
                out[(i, j)] = z;
            }
        }
        Ok(out)
    }

    /// Dense global projector; limited to total dimension 4096.
    pub fn global_projector(&self) -> Result<Mat> {
        let total = self.total_dim();
        if total > 4096 {
            return Err(Error::SizeGuard(format!("dense projector of dimension {total}")));
        }
        let mut out = Mat::zeros(total, total);
        for j in 0..total {
            let mut e = vec![c(0.0); total];
            e[j] = c(1.0);
            let col = self.apply_projector(&e);
            for (i, z) in col.into_iter().enumerate() {
                out[(i, j)] = z;
            }
        }
        Ok(out)
    }

    /// ‖[û_g^{[i]}, û_{g'}^{[i+1]}]‖_F on the five factors the two touch.
    pub fn neighbor_commutator(&self, g: usize, g2: usize) -> Result<f64> {
        let a = self.local_op(g)?;
        let b = self.local_op(g2)?;
        let d = self.fusion.rep().phys_dim();
        let e = self.layout.dim();
        let dims = [e, d, e, d, e];
        Ok(commutator_norm(&dims, &[0, 1, 2], a, &[2, 3, 4], b))
    }

    /// Commutator check between sites i and i+1. The residual does not
    /// depend on i by translation invariance; i only labels the record.
    pub fn check_neighbor_commutation(&self, g: usize, g2: usize, i: usize, tol: f64) -> Result<Report> {
        let mut r = Report::new();
        r.push(
            format!("neighbor commutation ({g},{g2}) site {i}"),
            "[û_g^[i], û_g'^[i+1]] = 0",
            self.neighbor_commutator(g, g2)?,
            tol,
        );
        Ok(r)
    }

    /// Γ[O] for an operator on the `width` matter sites starting at `start`.
    pub fn gauge_operator(&self, op: &Mat, start: usize, width: usize) -> Result<GaugedOperator<'_>> {
        let d = self.fusion.rep().phys_dim();
        if width == 0 || width > self.len || start >= self.len {
            return Err(Error::InvalidSegment(format!("start {start}, width {width}, L={}", self.len)));
        }
        if op.nrows() != d.pow(width as u32) || op.ncols() != op.nrows() {
            return Err(Error::DimensionMismatch { expected: d.pow(width as u32), got: op.nrows() });
        }
        let sites: Vec<usize> = (0..width).map(|k| (start + k) % self.len).collect();
        Ok(GaugedOperator { chain: self, op: op.clone(), sites })
    }

    /// Û_g of the partially gauged chain, as a dense matrix on the full space.
    pub fn quotient_symmetry_op(&self, g: usize) -> Result<Mat> {
        let f = &self.fusion;
        let rep = f.rep();
        let grp = rep.group();
        let d = rep.phys_dim();
        let e = self.layout.dim();
        let cg = rep.chi(g);
        let gi = grp.inv(g);
        // Edge coupling E[x, w; t, s] summed over n in the gauged subgroup.
        let mut edge = vec![c(0.0); e * e * cg * cg];
        for &n in self.layout.elems() {
            let conj_n = grp.mul(grp.mul(g, n), gi);
            let (Some(ow), Some(ox)) = (self.layout.offset(n), self.layout.offset(conj_n)) else {
                return Err(Error::NotNormal);
            };
            let gn = grp.mul(g, n);
            let w = f.w(g, n);
            let vi = f.winv(conj_n, g);
            let (cn, cc, cgn) = (rep.chi(n), rep.chi(conj_n), rep.chi(gn));
            for x in 0..cc {
                for ww in 0..cn {
                    for t in 0..cg {
                        for s in 0..cg {
                            let val: C64 = (0..cgn).map(|m| w[(t * cn + ww, m)] * vi[(m, x * cg + s)]).sum();
                            edge[(((ox + x) * e + ow + ww) * cg + t) * cg + s] += val;
                        }
                    }
                }
            }
        }
        let tg = rep.tensor(g);
        let pd = d * e;
        let q = Tensor::from_fn(&[cg, cg, pd, pd], &["l", "r", "o", "i"], |ix| {
            let (sl, sr) = (ix[0], ix[1]);
            let (o, x) = (ix[2] / e, ix[2] % e);
            let (i, w) = (ix[3] / e, ix[3] % e);
            (0..cg)
                .map(|t| tg.get(&[sl, t, o, i]) * edge[((x * e + w) * cg + t) * cg + sr])
                .sum()
        })?;
        let dense = mpo_dense(&q, self.len)?;
        // Reorder (m0,e0,m1,e1,...) into (m0..,e0..).
        let mut dims = Vec::new();
        for _ in 0..self.len {
            dims.push(d);
            dims.push(e);
        }
        let order: Vec<usize> = (0..self.len).map(|k| 2 * k).chain((0..self.len).map(|k| 2 * k + 1)).collect();
        let total = self.total_dim();
        let mut out = Mat::zeros(total, total);
        let mut rows = Vec::with_capacity(total);
        for j in 0..total {
            let col: Vec<C64> = dense.column(j).iter().copied().collect();
            rows.push(permute_factors(&col, &dims, &order));
        }
        // Columns are permuted the same way.
        let mut idx_map = vec![0usize; total];
        for j in 0..total {
            let mut e = vec![c(0.0); total];
            e[j] = c(1.0);
            let p = permute_factors(&e, &dims, &order);
            idx_map[j] = p.iter().position(|z| *z != c(0.0)).unwrap();
        }
        for (j, col) in rows.into_iter().enumerate() {
            for (i, z) in col.into_iter().enumerate() {
                out[(i, idx_map[j])] = z;
            }
        }
        Ok(out)
    }
}

/// Group table read off the action of Û_g on the image of G_N: elements
/// acting identically there share a class, classes labelled by smallest
/// element. Returns the table and the class map.
pub fn quotient_from_action(chain: &GaugeChain, tol: f64) -> Result<(FiniteGroup, Vec<usize>)> {
    let grp = chain.fusion.group().clone();
    let gm = chain.gauge_map_matrix()?;
    let acted: Vec<Mat> = grp
        .elements()
        .map(|g| Ok(mul_sparse(&chain.quotient_symmetry_op(g)?, &gm)))
        .collect::<Result<_>>()?;
    let scale = gm.norm().max(1e-300);
    let mut class = vec![usize::MAX; grp.order()];
    let mut reps: Vec<usize> = Vec::new();
    for g in grp.elements() {
        match reps.iter().position(|&r| (&acted[g] - &acted[r]).norm() / scale < tol) {
            Some(k) => class[g] = k,
            None => {
                class[g] = reps.len();
                reps.push(g);
            }
        }
    }
    let table = reps
        .iter()
        .map(|&a| reps.iter().map(|&b| class[grp.mul(a, b)]).collect())
        .collect();
    Ok((FiniteGroup::new(table, None)?, class))
}

/// Γ[O] = κ Σ_{g ∈ G^Λ} Π_i û_{g_i} (O ⊗ ρ_v) Π_i û_{g_i⁻¹}, with
/// ρ_v = ⊗_{i∈Λ} |v⟩⟨v| on the right edge of each site in Λ and
/// κ = 1/|G| when Λ is the whole chain, 1 otherwise. This normalization makes
/// Γ[1] act as the identity on gauge-invariant states.
pub struct GaugedOperator<'a> {
    chain: &'a GaugeChain,
    op: Mat,
    sites: Vec<usize>,
}

impl GaugedOperator<'_> {
    pub fn apply(&self, state: &[C64]) -> Vec<C64> {
        let ch = self.chain;
        let elems = ch.gauged_elems();
        let grp = ch.fusion.group();
        let dims = ch.dims();
        let m = self.sites.len();
        let kappa = if m == ch.len { 1.0 / elems.len() as f64 } else { 1.0 };
        let rho = Mat::from_fn(ch.layout.dim(), ch.layout.dim(), |a, b| ch.v_edge[a] * ch.v_edge[b].conj());
        let edges: Vec<usize> = self.sites.iter().map(|&i| ch.len + i).collect();
        let mut out = vec![c(0.0); state.len()];
        let count = elems.len().pow(m as u32);
        for code in 0..count {
            let gs: Vec<usize> = (0..m).map(|k| elems[code / elems.len().pow(k as u32) % elems.len()]).collect();
            let mut s = state.to_vec();
            for (k, &i) in self.sites.iter().enumerate() {
                s = apply_local(&s, &dims, &ch.site_factors(i), ch.local_op(grp.inv(gs[k])).unwrap());
            }
            s = apply_local(&s, &dims, &self.sites, &self.op);
            for &e in &edges {
                s = apply_local(&s, &dims, &[e], &rho);
            }
            for (k, &i) in self.sites.iter().enumerate().rev() {
                s = apply_local(&s, &dims, &ch.site_factors(i), ch.local_op(gs[k]).unwrap());
            }
            for (o, x) in out.iter_mut().zip(s) {
                *o += x;
            }
        }
        out.iter().map(|z| z * kappa).collect()
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        let total = self.chain.total_dim();
        if total > 1024 {
            return Err(Error::SizeGuard(format!("dense operator of dimension {total}")));
        }
        let mut out = Mat::zeros(total, total);
        for j in 0..total {
            let mut e = vec![c(0.0); total];
            e[j] = c(1.0);
            for (i, z) in self.apply(&e).into_iter().enumerate() {
                out[(i, j)] = z;
            }
        }
        Ok(out)
    }
}

/// ‖AB − BA‖_F for two local operators on a small product space, by sweeping
/// basis vectors.
pub fn commutator_norm(dims: &[usize], sa: &[usize], a: &Mat, sb: &[usize], b: &Mat) -> f64 {
    let total: usize = dims.iter().product();
    let a = SparseLocal::new(dims, sa, a);
    let b = SparseLocal::new(dims, sb, b);
    let mut acc = 0.0;
    for j in 0..total {
        let e = [(j, c(1.0))];
        let ab = a.apply(&b.apply(&e));
        let ba = b.apply(&a.apply(&e));
        acc += sparse_diff_norm(&ab, &ba).powi(2);
    }
    acc.sqrt()
}

/// Idempotency, hermiticity and order independence of P, evaluated column by
/// column without forming P densely.
pub fn verify_projector(chain: &GaugeChain, tol: f64) -> Report {
    let total = chain.total_dim();
    let forward: Vec<usize> = (0..chain.len).collect();
    let backward: Vec<usize> = (0..chain.len).rev().collect();
    let to_sparse = |v: Vec<C64>| -> Vec<(usize, C64)> {
        v.into_iter().enumerate().filter(|(_, z)| z.norm() > 1e-15).collect()
    };
    let mut cols = Vec::with_capacity(total);
    let (mut idem, mut order) = (0.0, 0.0);
    for j in 0..total {
        let mut e = vec![c(0.0); total];
        e[j] = c(1.0);
        let pe = chain.apply_projector_ordered(&e, &forward);
        let rev = chain.apply_projector_ordered(&e, &backward);
        order += diff_norm(&pe, &rev).powi(2);
        idem += diff_norm(&chain.apply_projector(&pe), &pe).powi(2);
        cols.push(to_sparse(pe));
    }
    let mut herm = 0.0;
    for (j, col) in cols.iter().enumerate() {
        for &(i, z) in col {
            let w = cols[i].binary_search_by_key(&j, |p| p.0).map(|k| cols[i][k].1).unwrap_or(c(0.0));
            herm += (z - w.conj()).norm_sqr();
        }
    }
    let mut r = Report::new();
    r.push("projector idempotent", "P² = P", idem.sqrt(), tol);
    r.push("projector hermitian", "P† = P", herm.sqrt(), tol);
    r.push("projector order independent", "Π_i P_i = Π_i P_(L-1-i)", order.sqrt(), tol);
    r
}

/// Direct sum over group assignments of the gauging map for an on-site
/// symmetry: (1/|G|^L) Σ_{g} (⊗u_{g_i})ψ ⊗ ⊗_i |g_i g_{i+1}⁻¹⟩. Uses only the
/// group table and the matrices u(g).
pub fn oracle_gauge_onsite(grp: &FiniteGroup, u: &[Mat], psi: &[C64], len: usize) -> Vec<C64> {
    let n = grp.order();
    let d = u[0].nrows();
    let matter = d.pow(len as u32);
    let edges = n.pow(len as u32);
    let mut out = vec![c(0.0); matter * edges];
    for code in 0..n.pow(len as u32) {
        let gs: Vec<usize> = (0..len).map(|k| code / n.pow((len - 1 - k) as u32) % n).collect();
        let mut phi = psi.to_vec();
        let dims = vec![d; len];
        for (i, &g) in gs.iter().enumerate() {
            phi = apply_local(&phi, &dims, &[i], &u[g]);
        }
        let edge_idx = (0..len).fold(0, |acc, i| acc * n + grp.mul(gs[i], grp.inv(gs[(i + 1) % len])));
        for (m, z) in phi.into_iter().enumerate() {
            out[m * edges + edge_idx] += z;
        }
    }
    let scale = 1.0 / (n as f64).powi(len as i32);
    out.iter().map(|z| z * scale).collect()
}

/// Direct sum over group assignments for a general MPO symmetry: the matter
/// sites carry Π T_{g_i} and edge i couples the bonds of sites i and i+1
/// through W⁻¹_{g_i g_{i+1}⁻¹, g_{i+1}}[t_i; (x_i, s_{i+1})].
pub fn oracle_gauge_mpo(f: &FusionData, psi: &[C64], len: usize) -> Vec<C64> {
    let rep = f.rep();
    let grp = rep.group();
    let n = grp.order();
    let d = rep.phys_dim();
    let layout = EdgeLayout::new(rep, &grp.elements().collect::<Vec<_>>());
    let e = layout.dim();
    let matter = d.pow(len as u32);
    let edges = e.pow(len as u32);
    let mut out = vec![c(0.0); matter * edges];
    for code in 0..n.pow(len as u32) {
        let gs: Vec<usize> = (0..len).map(|k| code / n.pow((len - 1 - k) as u32) % n).collect();
        let chis: Vec<usize> = gs.iter().map(|&g| rep.chi(g)).collect();
        // Enumerate bonds s_i (left) and t_i (right) of every site.
        let bond_count: usize = chis.iter().map(|x| x * x).product();
        for bcode in 0..bond_count {
            let mut rem = bcode;
            let mut s = vec![0; len];
            let mut t = vec![0; len];
            for i in (0..len).rev() {
                t[i] = rem % chis[i];
                rem /= chis[i];
                s[i] = rem % chis[i];
                rem /= chis[i];
            }
            // Matter part: ⊗_i T_{g_i}[s_i, t_i] applied to ψ.
            let mut phi = psi.to_vec();
            let dims = vec![d; len];
            for i in 0..len {
                let m = Mat::from_fn(d, d, |o, ii| rep.tensor(gs[i]).get(&[s[i], t[i], o, ii]));
                phi = apply_local(&phi, &dims, &[i], &m);
            }
            if phi.iter().all(|z| *z == c(0.0)) {
                continue;
            }
            // Edge part: product state over edges.
            let mut edge_vec = vec![c(1.0)];
            for i in 0..len {
                let j = (i + 1) % len;
                let a = grp.mul(gs[i], grp.inv(gs[j]));
                let vi = f.winv(a, gs[j]);
                let oa = layout.offset(a).unwrap();
                let mut local = vec![c(0.0); e];
                for x in 0..rep.chi(a) {
                    local[oa + x] = vi[(t[i], x * chis[j] + s[j])];
                }
                edge_vec = edge_vec.iter().flat_map(|p| local.iter().map(move |q| p * q)).collect();
            }
            for (m, z) in phi.iter().enumerate() {
                if *z == c(0.0) {
                    continue;
                }
                for (k, w) in edge_vec.iter().enumerate() {
                    out[m * edges + k] += z * w;
                }
            }
        }
    }
    let scale = 1.0 / (n as f64).powi(len as i32);
    out.iter().map(|z| z * scale).collect()
}

/// Residual checks of the local operators: group law, unit projector,
/// and neighbor commutation.
pub fn verify_local_ops(chain: &GaugeChain, tol: f64) -> Result<Report> {
    let grp = chain.fusion.group().clone();
    let elems = chain.gauged_elems().to_vec();
    let mut report = Report::new();
    let (mut law, mut comm): (f64, f64) = (0.0, 0.0);
    for &g in &elems {
        for &h in &elems {
            let lhs = mul_sparse(chain.local_op(g)?, chain.local_op(h)?);
            law = law.max((lhs - chain.local_op(grp.mul(g, h))?).norm());
            comm = comm.max(chain.neighbor_commutator(g, h)?);
        }
    }
    report.push("local group law", "û_g û_h = û_gh", law, tol);
    report.push("neighbor commutation", "[û_g^[i], û_h^[i+1]] = 0", comm, tol);
    Ok(report)
}
