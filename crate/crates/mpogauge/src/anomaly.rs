//! Localized operators for possibly anomalous MPO symmetries on a chain whose
//! gauge legs are split: every site carries its own left and right leg.
//!
//! Factor order of the full space: matter 0..L, then legs
//! (l_0, r_0, l_1, r_1, …). Leg r_i faces leg l_{i+1}.

use crate::error::{Error, Result};
use crate::fusion::FusionData;
use crate::linalg::{apply_local, c, diff_norm, fit_scalar, identity, matrix_rank, norm, permute_factors, Mat};
use crate::mpo::{realize_all, RepKind};
use crate::mps::{periodic_dense, solve_reduction, Mps};
use crate::report::Report;
use crate::tensor::Tensor;
use crate::C64;

/// Largest full-space dimension d^L·χ^{2L} for the split chain.
pub const SPLIT_GUARD: usize = 1 << 20;

/// One fusion channel b → c of a correlated operator for object a.
pub struct Channel<'a> {
    pub from: usize,
    pub to: usize,
    /// χ_c × (χ_a χ_b), columns (s, y).
    pub winv: &'a Mat,
    /// (χ_a χ_b) × χ_c, rows (t, w).
    pub w: &'a Mat,
}

/// Σ_channels W⁻¹[x; (s,y)] T[s,t,o,i] W[(t,w); z] |x,o,z⟩⟨y,i,w| on
/// (left leg, matter, right leg), with y, w in block `from` and x, z in
/// block `to`. Blocks sit at `offsets` inside legs of dimension `total`.
pub fn correlated_op(t: &Tensor, offsets: &[usize], chis: &[usize], total: usize, channels: &[Channel]) -> Mat {
    let s = t.shape();
    let (ca, d) = (s[0], s[2]);
    let dim = total * d * total;
    let mut out = Mat::zeros(dim, dim);
    for ch in channels {
        let (b, cc) = (ch.from, ch.to);
        let (cb, ccc) = (chis[b], chis[cc]);
        let (ob, oc) = (offsets[b], offsets[cc]);
        for o in 0..d {
            for i in 0..d {
                let tm = Mat::from_fn(ca, ca, |p, q| t.get(&[p, q, o, i]));
                if tm.iter().all(|z| *z == c(0.0)) {
                    continue;
                }
                for x in 0..ccc {
                    for y in 0..cb {
                        let a: Vec<C64> = (0..ca)
                            .map(|tt| (0..ca).map(|ss| ch.winv[(x, ss * cb + y)] * tm[(ss, tt)]).sum())
                            .collect();
                        if a.iter().all(|z| *z == c(0.0)) {
                            continue;
                        }
                        for w in 0..cb {
                            for z in 0..ccc {
                                let val: C64 = (0..ca).map(|tt| a[tt] * ch.w[(tt * cb + w, z)]).sum();
                                if val == c(0.0) {
                                    continue;
                                }
                                let row = ((oc + x) * d + o) * total + oc + z;
                                let col = ((ob + y) * d + i) * total + ob + w;
                                out[(row, col)] += val;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// ǔ_g = Σ_h W⁻¹_{g,h} ⊗ T_g ⊗ W_{g,h}, mapping block h to block gh on both
/// legs. Works for any fusion data, anomalous or not.
pub fn localized_op(f: &FusionData, g: usize) -> Mat {
    let rep = f.rep();
    let grp = rep.group();
    let offsets: Vec<usize> = grp.elements().map(|h| rep.offset(h)).collect();
    let channels: Vec<Channel> = grp
        .elements()
        .map(|h| Channel { from: h, to: grp.mul(g, h), winv: f.winv(g, h), w: f.w(g, h) })
        .collect();
    correlated_op(rep.tensor(g), &offsets, rep.chis(), rep.total_chi(), &channels)
}

/// Σ_h |gh⟩⟨h| ⊗ u_g ⊗ |gh⟩⟨h| for an on-site rep.
pub fn onsite_localized_reference(grp: &crate::group::FiniteGroup, u: &Mat, g: usize) -> Mat {
    let n = grp.order();
    let d = u.nrows();
    let mut out = Mat::zeros(n * d * n, n * d * n);
    for h in 0..n {
        let gh = grp.mul(g, h);
        for o in 0..d {
            for i in 0..d {
                out[((gh * d + o) * n + gh, (h * d + i) * n + h)] = u[(o, i)];
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SplitGaugeChain {
    fusion: FusionData,
    len: usize,
    ops: Vec<Mat>,
    projector: Mat,
    v_leg: Vec<C64>,
}

impl SplitGaugeChain {
    pub fn new(fusion: &FusionData, len: usize) -> Result<Self> {
        if len < 1 {
            return Err(Error::InvalidSegment("chain needs at least one site".into()));
        }
        let v = fusion
            .unit_vector()
            .ok_or_else(|| Error::NoSolution("unit vector missing".into()))?;
        let rep = fusion.rep();
        let chi = rep.total_chi();
        let total = (rep.phys_dim() * chi * chi).checked_pow(len as u32);
        if total.map_or(true, |t| t > SPLIT_GUARD) {
            return Err(Error::SizeGuard(format!(
                "d^L·χ^2L with d={}, χ={chi}, L={len} exceeds {SPLIT_GUARD}",
                rep.phys_dim()
            )));
        }
        let ops: Vec<Mat> = fusion.group().elements().map(|g| localized_op(fusion, g)).collect();
        let mut projector = ops.iter().fold(Mat::zeros(ops[0].nrows(), ops[0].ncols()), |acc, m| acc + m);
        projector /= c(ops.len() as f64);
        let mut v_leg = vec![c(0.0); chi];
        let off = rep.offset(0);
        v_leg[off..off + v.len()].copy_from_slice(v);
        Ok(SplitGaugeChain { fusion: fusion.clone(), len, ops, projector, v_leg })
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

    pub fn local_op(&self, g: usize) -> &Mat {
        &self.ops[g]
    }

    pub fn chi(&self) -> usize {
        self.fusion.rep().total_chi()
    }

    pub fn matter_dim(&self) -> usize {
        self.fusion.rep().phys_dim().pow(self.len as u32)
    }

    pub fn gauge_dim(&self) -> usize {
        self.chi().pow(2 * self.len as u32)
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.fusion.rep().phys_dim(); self.len];
        dims.extend(std::iter::repeat(self.chi()).take(2 * self.len));
        dims
    }

    /// (l_i, matter i, r_i).
    pub fn site_factors(&self, i: usize) -> [usize; 3] {
        [self.len + 2 * i, i, self.len + 2 * i + 1]
    }

    pub fn apply_local_op(&self, g: usize, i: usize, state: &[C64]) -> Vec<C64> {
        apply_local(state, &self.dims(), &self.site_factors(i), &self.ops[g])
    }

    pub fn apply_projector(&self, state: &[C64]) -> Vec<C64> {
        (0..self.len).fold(state.to_vec(), |s, i| apply_local(&s, &self.dims(), &self.site_factors(i), &self.projector))
    }

    /// |V⟩: v on every leg.
    pub fn v_state(&self) -> Vec<C64> {
        (0..2 * self.len).fold(vec![c(1.0)], |acc, _| {
            acc.iter().flat_map(|a| self.v_leg.iter().map(move |b| a * b)).collect()
        })
    }

    /// |Ω⟩ = ⊗_i |ω⟩ on (r_i, l_{i+1}), |ω⟩ = χ^{-1/2} Σ_a |a, a⟩.
    pub fn omega_state(&self) -> Vec<C64> {
        let chi = self.chi();
        let legs = 2 * self.len;
        let amp = c((chi as f64).powf(-0.5 * self.len as f64));
        let mut out = vec![c(0.0); self.gauge_dim()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut labels = vec![0; legs];
            let mut rem = idx;
            for k in (0..legs).rev() {
                labels[k] = rem % chi;
                rem /= chi;
            }
            if (0..self.len).all(|i| labels[2 * i + 1] == labels[(2 * i + 2) % legs]) {
                *slot = amp;
            }
        }
        out
    }

    fn couple(&self, psi: &[C64], phi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != self.matter_dim() {
            return Err(Error::DimensionMismatch { expected: self.matter_dim(), got: psi.len() });
        }
        if phi.len() != self.gauge_dim() {
            return Err(Error::DimensionMismatch { expected: self.gauge_dim(), got: phi.len() });
        }
        Ok(psi.iter().flat_map(|a| phi.iter().map(move |b| a * b)).collect())
    }

    /// G_φ|ψ⟩ = P(|ψ⟩ ⊗ |φ⟩).
    pub fn symmetrize_state(&self, psi: &[C64], phi: &[C64]) -> Result<Vec<C64>> {
        Ok(self.apply_projector(&self.couple(psi, phi)?))
    }

    /// G_V|ψ⟩ summed directly: (1/|G|^L) Σ_{g} ⊗_i T_{g_i} with the bond
    /// indices of each T_{g_i} written into l_i and r_i.
    pub fn closed_form_v(&self, psi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != self.matter_dim() {
            return Err(Error::DimensionMismatch { expected: self.matter_dim(), got: psi.len() });
        }
        let rep = self.fusion.rep();
        let n = rep.group().order();
        let d = rep.phys_dim();
        let chi = self.chi();
        // Per-site map H_i → H_l ⊗ H_i ⊗ H_r.
        let mut site = Mat::zeros(chi * d * chi, d);
        for g in 0..n {
            let t = rep.tensor(g);
            let (cg, off) = (rep.chi(g), rep.offset(g));
            for s in 0..cg {
                for tt in 0..cg {
                    for o in 0..d {
                        for i in 0..d {
                            site[(((off + s) * d + o) * chi + off + tt, i)] += t.get(&[s, tt, o, i]) / c(n as f64);
                        }
                    }
                }
            }
        }
        // Apply site maps one by one, then reorder (l,m,r) triples.
        let mut state = psi.to_vec();
        let mut dims = vec![d; self.len];
        for i in 0..self.len {
            let mut next_dims = dims.clone();
            next_dims[i] = chi * d * chi;
            let rest_before: usize = dims[..i].iter().product();
            let rest_after: usize = dims[i + 1..].iter().product();
            let mut next = vec![c(0.0); rest_before * chi * d * chi * rest_after];
            for a in 0..rest_before {
                for m in 0..d {
                    for b in 0..rest_after {
                        let x = state[(a * d + m) * rest_after + b];
                        if x == c(0.0) {
                            continue;
                        }
                        for k in 0..chi * d * chi {
                            let z = site[(k, m)];
                            if z != c(0.0) {
                                next[(a * chi * d * chi + k) * rest_after + b] += z * x;
                            }
                        }
                    }
                }
            }
            state = next;
            dims = next_dims;
        }
        Ok(self.from_site_triples(&state))
    }

    /// Reorders a vector with factors (l_0,m_0,r_0, l_1,m_1,r_1, …) into
    /// chain order.
    pub fn from_site_triples(&self, state: &[C64]) -> Vec<C64> {
        let d = self.fusion.rep().phys_dim();
        let chi = self.chi();
        let dims: Vec<usize> = (0..self.len).flat_map(|_| [chi, d, chi]).collect();
        let order: Vec<usize> = (0..self.len)
            .map(|i| 3 * i + 1)
            .chain((0..self.len).flat_map(|i| [3 * i, 3 * i + 2]))
            .collect();
        permute_factors(state, &dims, &order)
    }

    /// M = ⟨Ω|P|Ω⟩ as an operator on the matter space.
    pub fn omega_sandwich(&self) -> Result<Mat> {
        let omega = self.omega_state();
        let m = self.matter_dim();
        let gd = self.gauge_dim();
        let mut out = Mat::zeros(m, m);
        for j in 0..m {
            let mut e = vec![c(0.0); m];
            e[j] = c(1.0);
            let s = self.symmetrize_state(&e, &omega)?;
            for i in 0..m {
                out[(i, j)] = (0..gd).map(|k| omega[k].conj() * s[i * gd + k]).sum();
            }
        }
        Ok(out)
    }

    /// (1⊗⟨Ω|) applied to a full-space vector.
    pub fn project_omega(&self, state: &[C64]) -> Vec<C64> {
        let omega = self.omega_state();
        let gd = self.gauge_dim();
        (0..self.matter_dim())
            .map(|i| (0..gd).map(|k| omega[k].conj() * state[i * gd + k]).sum())
            .collect()
    }

    /// Γ[O] on the matter sites start..start+width (cyclic).
    pub fn symmetrize_operator(&self, op: &Mat, start: usize, width: usize) -> Result<SplitGaugedOperator<'_>> {
        let d = self.fusion.rep().phys_dim();
        if width == 0 || width > self.len || start >= self.len {
            return Err(Error::InvalidSegment(format!("start {start}, width {width}, L={}", self.len)));
        }
        if op.nrows() != d.pow(width as u32) || op.ncols() != op.nrows() {
            return Err(Error::DimensionMismatch { expected: d.pow(width as u32), got: op.nrows() });
        }
        let sites = (0..width).map(|k| (start + k) % self.len).collect();
        Ok(SplitGaugedOperator { chain: self, op: op.clone(), sites })
    }
}

/// Γ[O] = Σ_{g ∈ G^Λ} Π ǔ_{g_i} (O ⊗_{i∈Λ} |v⟩⟨v|_{l_i} ⊗ |v⟩⟨v|_{r_i}) Π ǔ_{g_i⁻¹}.
pub struct SplitGaugedOperator<'a> {
    chain: &'a SplitGaugeChain,
    op: Mat,
    sites: Vec<usize>,
}

impl SplitGaugedOperator<'_> {
    pub fn apply(&self, state: &[C64]) -> Vec<C64> {
        let ch = self.chain;
        let grp = ch.fusion.group();
        let n = grp.order();
        let dims = ch.dims();
        let m = self.sites.len();
        let chi = ch.chi();
        let rho = Mat::from_fn(chi, chi, |a, b| ch.v_leg[a] * ch.v_leg[b].conj());
        let mut out = vec![c(0.0); state.len()];
        for code in 0..n.pow(m as u32) {
            let gs: Vec<usize> = (0..m).map(|k| code / n.pow(k as u32) % n).collect();
            let mut s = state.to_vec();
            for (k, &i) in self.sites.iter().enumerate() {
                s = apply_local(&s, &dims, &ch.site_factors(i), &ch.ops[grp.inv(gs[k])]);
            }
            s = apply_local(&s, &dims, &self.sites, &self.op);
            for &i in &self.sites {
                let [l, _, r] = ch.site_factors(i);
                s = apply_local(&s, &dims, &[l], &rho);
                s = apply_local(&s, &dims, &[r], &rho);
            }
            for (k, &i) in self.sites.iter().enumerate() {
                s = apply_local(&s, &dims, &ch.site_factors(i), &ch.ops[gs[k]]);
            }
            for (o, x) in out.iter_mut().zip(s) {
                *o += x;
            }
        }
        out
    }
}

/// Group law, projector property and disjoint-support commutation of ǔ.
pub fn verify_localized_ops(chain: &SplitGaugeChain, tol: f64) -> Report {
    let grp = chain.fusion.group();
    let mut law: f64 = 0.0;
    for g in grp.elements() {
        for h in grp.elements() {
            let lhs = crate::linalg::mul_sparse(&chain.ops[g], &chain.ops[h]);
            law = law.max((lhs - &chain.ops[grp.mul(g, h)]).norm());
        }
    }
    let e = &chain.ops[0];
    let mut r = Report::new();
    r.push("localized group law", "ǔ_g ǔ_h = ǔ_gh", law, tol);
    r.push("localized unit projector", "ǔ_e² = ǔ_e", (crate::linalg::mul_sparse(e, e) - e).norm(), tol);
    r
}

/// ⟨Ω|P|Ω⟩ ∝ Σ_g U_g and ⟨Ω|G_Ω U_g|ψ⟩ = ⟨Ω|G_Ω|ψ⟩. The proportionality
/// scalar is stored in the report metadata.
pub fn check_omega_overlap(chain: &SplitGaugeChain, tol: f64) -> Result<Report> {
    let m = chain.omega_sandwich()?;
    let us = realize_all(chain.fusion.rep(), chain.len)?;
    let sum = us.iter().fold(Mat::zeros(m.nrows(), m.ncols()), |acc, u| acc + u);
    let (scalar, res) = fit_scalar(m.as_slice(), sum.as_slice());
    let mut over: f64 = 0.0;
    for u in &us {
        over = over.max((&m * u - &m).norm());
    }
    let mut r = Report::new();
    r.push("omega proportionality", "⟨Ω|P|Ω⟩ ∝ Σ_g U_g", res, tol);
    r.push("omega overlap", "⟨Ω|G_Ω U_g|ψ⟩ = ⟨Ω|G_Ω|ψ⟩", over, tol);
    r.meta("omega_scalar", format!("{:.12}{:+.12}i", scalar.re, scalar.im));
    Ok(r)
}

/// Coordinate isometry J|a, m, m', b⟩ = |a⟩_l m |a⟩_r |b⟩_l' m' |b⟩_r' from
/// the renormalized block (ℂ[G], H⊗H, ℂ[G]) into two split-leg sites.
pub fn renormalization_isometry(n: usize, d: usize) -> Mat {
    let site = n * d * n;
    let mut j = Mat::zeros(site * site, n * d * d * n);
    for a in 0..n {
        for m in 0..d {
            for m2 in 0..d {
                for b in 0..n {
                    let row = ((a * d + m) * n + a) * site + (b * d + m2) * n + b;
                    let col = ((a * d + m) * d + m2) * n + b;
                    j[(row, col)] = c(1.0);
                }
            }
        }
    }
    j
}

/// J†(ǔ_g ⊗ ǔ_g)J == L_g ⊗ (u_g ⊗ u_g) ⊗ L_g for an on-site rep.
pub fn renormalize_onsite(f: &FusionData, tol: f64) -> Result<Report> {
    let u = match f.rep().kind() {
        RepKind::OnSite { u } => u.clone(),
        _ => return Err(Error::NotRepresentation("renormalization needs an on-site rep".into())),
    };
    let grp = f.group();
    let n = grp.order();
    let d = u[0].nrows();
    let j = renormalization_isometry(n, d);
    let mut worst: f64 = 0.0;
    for g in grp.elements() {
        let op = localized_op(f, g);
        let pair = op.kronecker(&op);
        let reduced = j.adjoint() * crate::linalg::mul_sparse(&pair, &j);
        let lg = Mat::from_fn(n, n, |a, b| c((a == grp.mul(g, b)) as u8 as f64));
        let target = lg.kronecker(&u[g].kronecker(&u[g])).kronecker(&lg);
        worst = worst.max((reduced - target).norm());
    }
    let mut r = Report::new();
    r.push("renormalized isometry", "J†J = 1", (j.adjoint() * &j - identity(j.ncols())).norm(), tol);
    r.push("on-site renormalization", "J†(ǔ_g⊗ǔ_g)J = L_g⊗u_g⊗u_g⊗L_g", worst, tol);
    Ok(r)
}

/// Direct sum of injective blocks permuted by the symmetry.
#[derive(Clone, Debug)]
pub struct BlockMps {
    pub blocks: Vec<Mps>,
    /// perm[g][x] = g·x.
    pub perm: Vec<Vec<usize>>,
}

impl BlockMps {
    /// Determines g·x from U_g|ψ_{A_x}⟩ = |ψ_{A_y}⟩ at `test_len` sites.
    pub fn new(blocks: Vec<Mps>, f: &FusionData, test_len: usize) -> Result<Self> {
        let us = realize_all(f.rep(), test_len)?;
        let states: Vec<Vec<C64>> = blocks.iter().map(|b| b.dense(test_len)).collect();
        let mut perm = Vec::new();
        for u in &us {
            let mut row = Vec::new();
            for s in &states {
                let out = u * nalgebra::DVector::from_column_slice(s);
                let y = states
                    .iter()
                    .position(|t| diff_norm(out.as_slice(), t) < 1e-9 * norm(t).max(1.0))
                    .ok_or_else(|| Error::NotRepresentation("blocks not permuted by the symmetry".into()))?;
                row.push(y);
            }
            perm.push(row);
        }
        Ok(BlockMps { blocks, perm })
    }

    pub fn dense(&self, len: usize) -> Vec<C64> {
        let mut out = self.blocks[0].dense(len);
        for b in &self.blocks[1..] {
            for (o, x) in out.iter_mut().zip(b.dense(len)) {
                *o += x;
            }
        }
        out
    }
}

/// Gauged tensors for block x: matter Ã_x, edge B_x on the leg pair
/// (r_i, l_{i+1}) with index r·χ + l, and the single-site form C_x with
/// physical index (l, m, r).
#[derive(Clone, Debug)]
pub struct SymmetrizedBlock {
    pub matter: Vec<Mat>,
    pub edge: Vec<Mat>,
    pub single: Vec<Mat>,
}

/// Ã_x[(a,g),(b,g)] = A_{g·x}[a,b];
/// B_x[(b',g),(a',h), (r,l)] = (1/|G|) Σ_b Y_{g,x}[b'; (t,b)] X_{h,x}[(s,b); a']
/// with r = ⌊g⌋+t and l = ⌊h⌋+s, where T_g·A_x = X_{g,x} A_{g·x} Y_{g,x};
/// C_x[b,b',(l,o,r)] = (1/|G|) Σ_g (T_g·A_x)[(s,b),(t,b'),o] with l = ⌊g⌋+s,
/// r = ⌊g⌋+t.
pub fn symmetrized_mps(bm: &BlockMps, f: &FusionData) -> Result<Vec<SymmetrizedBlock>> {
    let rep = f.rep();
    let grp = rep.group();
    let n = grp.order();
    let chi = rep.total_chi();
    let d = rep.phys_dim();
    let mut out = Vec::new();
    for x in 0..bm.blocks.len() {
        let dims: Vec<usize> = (0..n).map(|g| bm.blocks[bm.perm[g][x]].bond_dim()).collect();
        let offs: Vec<usize> = dims.iter().scan(0, |acc, &k| {
            let o = *acc;
            *acc += k;
            Some(o)
        }).collect();
        let big: usize = dims.iter().sum();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for g in 0..n {
            let target = crate::mps::apply_mpo_tensor(rep.tensor(g), &bm.blocks[x])?;
            let (xg, yg) = solve_reduction(&bm.blocks[bm.perm[g][x]], &target)?;
            xs.push(xg);
            ys.push(yg);
        }
        let matter: Vec<Mat> = (0..d)
            .map(|o| {
                let mut m = Mat::zeros(big, big);
                for g in 0..n {
                    let a = bm.blocks[bm.perm[g][x]].mat(o);
                    m.view_mut((offs[g], offs[g]), (dims[g], dims[g])).copy_from(a);
                }
                m
            })
            .collect();
        let dx = bm.blocks[x].bond_dim();
        let mut edge = vec![Mat::zeros(big, big); chi * chi];
        for g in 0..n {
            for h in 0..n {
                let (cg, ch) = (rep.chi(g), rep.chi(h));
                for t in 0..cg {
                    for s in 0..ch {
                        let idx = (rep.offset(g) + t) * chi + rep.offset(h) + s;
                        for bp in 0..dims[g] {
                            for ap in 0..dims[h] {
                                let val: C64 = (0..dx).map(|b| ys[g][(bp, t * dx + b)] * xs[h][(s * dx + b, ap)]).sum();
                                edge[idx][(offs[g] + bp, offs[h] + ap)] += val / c(n as f64);
                            }
                        }
                    }
                }
            }
        }
        let mut single = vec![Mat::zeros(dx, dx); chi * d * chi];
        for g in 0..n {
            let acted = crate::mps::apply_mpo_tensor(rep.tensor(g), &bm.blocks[x])?;
            let cg = rep.chi(g);
            for s in 0..cg {
                for t in 0..cg {
                    for (o, m) in acted.iter().enumerate() {
                        let idx = ((rep.offset(g) + s) * d + o) * chi + rep.offset(g) + t;
                        let blk = m.view((s * dx, t * dx), (dx, dx));
                        single[idx] += blk * c(1.0 / n as f64);
                    }
                }
            }
        }
        out.push(SymmetrizedBlock { matter, edge, single });
    }
    Ok(out)
}

impl SymmetrizedBlock {
    /// Dense state of the alternating (Ã, B) chain in split-chain order.
    pub fn dense_ab(&self, chain: &SplitGaugeChain) -> Vec<C64> {
        let len = chain.len();
        let d = self.matter.len();
        let chi = chain.chi();
        let mut sites = Vec::new();
        let mut dims = Vec::new();
        for _ in 0..len {
            sites.push(self.matter.clone());
            sites.push(self.edge.clone());
            dims.extend([d, chi, chi]);
        }
        let alt = periodic_dense(&sites);
        // Alternating factors: m_i at 3i, r_i at 3i+1, l_{i+1} at 3i+2.
        let l_pos = |j: usize| if j == 0 { 3 * (len - 1) + 2 } else { 3 * (j - 1) + 2 };
        let order: Vec<usize> = (0..len)
            .map(|i| 3 * i)
            .chain((0..len).flat_map(|j| [l_pos(j), 3 * j + 1]))
            .collect();
        permute_factors(&alt, &dims, &order)
    }

    /// Dense state of the single-site C chain in split-chain order.
    pub fn dense_c(&self, chain: &SplitGaugeChain) -> Vec<C64> {
        chain.from_site_triples(&periodic_dense(&vec![self.single.clone(); chain.len()]))
    }
}

/// Schmidt rank across the cut after matter site k, keeping each site's
/// legs with it.
pub fn split_schmidt_rank(chain: &SplitGaugeChain, state: &[C64], k: usize, tol: f64) -> usize {
    let len = chain.len();
    let dims = chain.dims();
    let left: Vec<usize> = (0..=k).flat_map(|i| chain.site_factors(i)).collect();
    let right: Vec<usize> = (k + 1..len).flat_map(|i| chain.site_factors(i)).collect();
    let order: Vec<usize> = left.iter().chain(right.iter()).copied().collect();
    let permuted = permute_factors(state, &dims, &order);
    let ldim: usize = left.iter().map(|&f| dims[f]).product();
    crate::linalg::schmidt_rank(&permuted, ldim, tol)
}

/// Matrix rank of a matter state across the cut after site k.
pub fn matter_schmidt_rank(psi: &[C64], d: usize, k: usize, tol: f64) -> usize {
    let left = d.pow(k as u32 + 1);
    let m = Mat::from_row_slice(left, psi.len() / left, psi);
    matrix_rank(&m, tol)
}
