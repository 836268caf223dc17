//! Fusion data of an MPO group representation: fusion tensors W and W⁻¹,
//! the 3-cocycle, the strict gauge, the unit vector and the Z matrices.
//!
//! `W_{g,h}` is stored as a (χ_g·χ_h) × χ_{gh} matrix with rows (s, t),
//! s ∈ χ_g (upper MPO), t ∈ χ_h (lower MPO). `W⁻¹_{g,h}` is χ_{gh} × (χ_g·χ_h).
//! The zipper reads S_{g,h}^{oi} W = W T_{gh}^{oi} and W⁻¹ S^{oi} = T^{oi} W⁻¹,
//! where S^{oi} = Σ_m T_g^{om} ⊗ T_h^{mi} is the stacked bond matrix.

use crate::error::{Error, Result};
use crate::group::{coboundary_trivialize, Cochain2, Cocycle3, FiniteGroup};
use crate::linalg::{c, fit_scalar, identity, kron, nullspace, Mat};
use crate::mpo::MpoGroupRep;
use crate::report::Report;
use crate::tensor::Tensor;
use crate::C64;

/// Stacked bond matrix S^{oi} of U_g on top of U_h, indices (s·χ_h + t).
pub fn stacked_bond(rep: &MpoGroupRep, g: usize, h: usize, o: usize, i: usize) -> Mat {
    stacked_tensor_bond(rep.tensor(g), rep.tensor(h), o, i)
}

fn vec_row_major(m: &Mat) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Bond matrix T^{oi} of a rank-4 MPO tensor with axes (l, r, o, i).
pub fn tensor_bond(t: &Tensor, o: usize, i: usize) -> Mat {
    let s = t.shape();
    Mat::from_fn(s[0], s[1], |a, b| t.get(&[a, b, o, i]))
}

/// Σ_m A^{om} ⊗ B^{mi} for two MPO tensors.
pub fn stacked_tensor_bond(a: &Tensor, b: &Tensor, o: usize, i: usize) -> Mat {
    let d = a.shape()[3];
    let (ca, cb) = (a.shape()[0], b.shape()[0]);
    let mut s = Mat::zeros(ca * cb, ca * cb);
    for m in 0..d {
        let x = tensor_bond(a, o, m);
        if x.iter().all(|z| *z == c(0.0)) {
            continue;
        }
        s += kron(&x, &tensor_bond(b, m, i));
    }
    s
}

/// Intertwiners between a big bond algebra and a small one: W (cs × cz) with
/// S_k W = W T_k and W⁻¹ (cz × cs) with W⁻¹ S_k = T_k W⁻¹ for every pair
/// (S_k, T_k). `Ok(None)` when the small block does not occur; `NotUnique`
/// when it occurs more than once. Gauge: ‖W‖_F² = cz, largest-modulus entry
/// of W real positive, W⁻¹W = 1.
pub fn solve_intertwiners(pairs: &[(Mat, Mat)], cs: usize, cz: usize) -> Result<Option<(Mat, Mat)>> {
    let n_unknown = cs * cz;
    let mut eq_w = Mat::zeros(pairs.len() * n_unknown, n_unknown);
    let mut eq_v = Mat::zeros(pairs.len() * n_unknown, n_unknown);
    for (k, (s, t)) in pairs.iter().enumerate() {
        let row = k * n_unknown;
        // vec(S W) − vec(W T) for row-major vec(W), W: cs × cz.
        let bw = kron(s, &identity(cz)) - kron(&identity(cs), &t.transpose());
        // vec(W⁻¹ S) − vec(T W⁻¹), W⁻¹: cz × cs.
        let bv = kron(&identity(cz), &s.transpose()) - kron(t, &identity(cs));
        eq_w.view_mut((row, 0), (n_unknown, n_unknown)).copy_from(&bw);
        eq_v.view_mut((row, 0), (n_unknown, n_unknown)).copy_from(&bv);
    }
    let nw = nullspace(&eq_w, 1e-9);
    let nv = nullspace(&eq_v, 1e-9);
    match (nw.ncols(), nv.ncols()) {
        (0, _) | (_, 0) => return Ok(None),
        (1, 1) => {}
        (k, l) => return Err(Error::NotUnique(k.max(l))),
    }
    let w: Vec<C64> = nw.column(0).iter().copied().collect();
    let v: Vec<C64> = nv.column(0).iter().copied().collect();
    let mut w = Mat::from_row_slice(cs, cz, &w);
    let mut v = Mat::from_row_slice(cz, cs, &v);
    w *= c((cz as f64).sqrt() / w.norm());
    let big = w.iter().copied().fold(c(0.0), |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
    w *= big.conj() / c(big.norm());
    let tr = (&v * &w).trace() / c(cz as f64);
    if tr.norm() < 1e-12 {
        return Err(Error::NoSolution("W⁻¹W vanishes".into()));
    }
    v /= tr;
    Ok(Some((w, v)))
}

/// Solves the zipper for one pair and fixes the scale/phase gauge:
/// ‖W‖_F² = χ_{gh}, the largest-modulus entry of W real positive, W⁻¹W = 1.
pub fn solve_fusion_tensors(rep: &MpoGroupRep, g: usize, h: usize) -> Result<(Mat, Mat)> {
    let gh = rep.group().mul(g, h);
    if rep.is_onsite() {
        return Ok((identity(1), identity(1)));
    }
    let d = rep.phys_dim();
    let pairs: Vec<(Mat, Mat)> = (0..d)
        .flat_map(|o| (0..d).map(move |i| (o, i)))
        .map(|(o, i)| (stacked_bond(rep, g, h, o, i), rep.bond_matrix(gh, o, i)))
        .collect();
    solve_intertwiners(&pairs, rep.chi(g) * rep.chi(h), rep.chi(gh))?
        .ok_or_else(|| Error::NoSolution("W: intertwiner equation has no solution".into()))
}

#[derive(Clone, Debug)]
pub struct FusionData {
    rep: MpoGroupRep,
    w: Vec<Mat>,
    winv: Vec<Mat>,
    omega: Cocycle3,
    beta: Cochain2,
    v: Option<Vec<C64>>,
    z: Option<Vec<Mat>>,
    strict: bool,
}

impl FusionData {
    /// Solves all pairs, fixes the unit gauge when a unit vector exists, and
    /// extracts ω. No strictification is applied.
    pub fn solve(rep: &MpoGroupRep) -> Result<Self> {
        let n = rep.group().order();
        let mut w = Vec::with_capacity(n * n);
        let mut winv = Vec::with_capacity(n * n);
        for g in 0..n {
            for h in 0..n {
                let (a, b) = solve_fusion_tensors(rep, g, h)?;
                w.push(a);
                winv.push(b);
            }
        }
        let mut data = FusionData {
            rep: rep.clone(),
            w,
            winv,
            omega: Cocycle3::trivial(n),
            beta: Cochain2::trivial(n),
            v: None,
            z: None,
            strict: false,
        };
        if rep.is_onsite() {
            data.v = Some(vec![c(1.0)]);
        } else if let Ok(v) = data.fix_unit_gauge() {
            data.v = Some(v);
        }
        data.omega = data.extract_3cocycle()?;
        Ok(data)
    }

    /// Reassembles stored fusion data; ω is re-extracted from W, W⁻¹ and the
    /// stored tables are only used when they agree with it.
    pub fn from_parts(
        rep: &MpoGroupRep,
        w: Vec<Mat>,
        winv: Vec<Mat>,
        beta: Cochain2,
        v: Option<Vec<C64>>,
        z: Option<Vec<Mat>>,
        strict: bool,
    ) -> Result<Self> {
        let n = rep.group().order();
        if w.len() != n * n || winv.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: w.len().min(winv.len()) });
        }
        for g in 0..n {
            for h in 0..n {
                let k = g * n + h;
                let (rows, cols) = (rep.chi(g) * rep.chi(h), rep.chi(rep.group().mul(g, h)));
                if w[k].shape() != (rows, cols) || winv[k].shape() != (cols, rows) {
                    return Err(Error::ShapeMismatch(vec![w[k].nrows(), w[k].ncols()], vec![rows, cols]));
                }
            }
        }
        let mut data = FusionData { rep: rep.clone(), w, winv, omega: Cocycle3::trivial(n), beta, v, z, strict };
        data.omega = data.extract_3cocycle()?;
        Ok(data)
    }

    pub fn z_matrices(&self) -> Option<&[Mat]> {
        self.z.as_deref()
    }

    /// Solve, then move to the strict gauge and compute the Z matrices.
    pub fn solve_strict(rep: &MpoGroupRep) -> Result<Self> {
        Self::solve(rep)?.gauge_fix_strict()
    }

    pub fn rep(&self) -> &MpoGroupRep {
        &self.rep
    }

    pub fn group(&self) -> &FiniteGroup {
        self.rep.group()
    }

    fn idx(&self, g: usize, h: usize) -> usize {
        g * self.group().order() + h
    }

    pub fn w(&self, g: usize, h: usize) -> &Mat {
        &self.w[self.idx(g, h)]
    }

    pub fn winv(&self, g: usize, h: usize) -> &Mat {
        &self.winv[self.idx(g, h)]
    }

    pub fn omega(&self) -> &Cocycle3 {
        &self.omega
    }

    pub fn beta(&self) -> &Cochain2 {
        &self.beta
    }

    pub fn unit_vector(&self) -> Option<&[C64]> {
        self.v.as_deref()
    }

    pub fn z(&self, g: usize) -> Option<&Mat> {
        self.z.as_ref().map(|z| &z[g])
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Class of the extracted cocycle: `Some(true)` if trivial.
    pub fn is_trivial_class(&self) -> Result<bool> {
        Ok(coboundary_trivialize(self.group(), &self.omega)?.is_some())
    }

    /// W_{g,h} → β(g,h)·W_{g,h}, W⁻¹_{g,h} → W⁻¹_{g,h}/β(g,h); ω is re-extracted.
    pub fn rescale(&self, beta: &Cochain2) -> Result<Self> {
        let mut out = self.clone();
        let n = self.group().order();
        for g in 0..n {
            for h in 0..n {
                let k = self.idx(g, h);
                out.w[k] *= beta.get(g, h);
                out.winv[k] /= beta.get(g, h);
            }
        }
        out.omega = out.extract_3cocycle()?;
        out.strict = false;
        out.z = None;
        Ok(out)
    }

    /// Contractions of v into the unit leg of W_{g,e}, W⁻¹_{g,e}, W_{e,g}, W⁻¹_{e,g}
    /// as χ_g × χ_g matrices.
    fn unit_contractions(&self, g: usize, v: &[C64]) -> [Mat; 4] {
        let cg = self.rep.chi(g);
        let ce = self.rep.chi(0);
        let (wr, vr) = (self.w(g, 0), self.winv(g, 0));
        let (wl, vl) = (self.w(0, g), self.winv(0, g));
        let mut out = [Mat::zeros(cg, cg), Mat::zeros(cg, cg), Mat::zeros(cg, cg), Mat::zeros(cg, cg)];
        for s in 0..cg {
            for z in 0..cg {
                for (t, &vt) in v.iter().enumerate().take(ce) {
                    out[0][(s, z)] += wr[(s * ce + t, z)] * vt;
                    out[1][(z, s)] += vr[(z, s * ce + t)] * vt;
                    out[2][(s, z)] += wl[(t * cg + s, z)] * vt;
                    out[3][(z, s)] += vl[(z, t * cg + s)] * vt;
                }
            }
        }
        out
    }

    /// Finds v making every unit contraction proportional to 1_g, then
    /// rescales W_{g,e}, W_{e,g} (and inverses) so that all of them equal 1_g.
    fn fix_unit_gauge(&mut self) -> Result<Vec<C64>> {
        let n = self.group().order();
        let ce = self.rep.chi(0);
        let mut blocks: Vec<Mat> = Vec::new();
        for g in 0..n {
            let cg = self.rep.chi(g);
            let cols: Vec<[Mat; 4]> = (0..ce)
                .map(|j| {
                    let mut e = vec![c(0.0); ce];
                    e[j] = c(1.0);
                    self.unit_contractions(g, &e)
                })
                .collect();
            for f in 0..4 {
                let mut b = Mat::zeros(cg * cg, ce);
                for (j, ms) in cols.iter().enumerate() {
                    let m = &ms[f];
                    let tr = m.trace() / c(cg as f64);
                    let traceless = m - identity(cg) * tr;
                    for (k, z) in vec_row_major(&traceless).into_iter().enumerate() {
                        b[(k, j)] = z;
                    }
                }
                blocks.push(b);
            }
        }
        let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut a = Mat::zeros(rows, ce);
        let mut r = 0;
        for b in &blocks {
            a.view_mut((r, 0), (b.nrows(), ce)).copy_from(b);
            r += b.nrows();
        }
        let ns = nullspace(&a, 1e-9);
        let mut v: Vec<C64> = match ns.ncols() {
            0 => return Err(Error::NoSolution("no unit vector".into())),
            1 => ns.column(0).iter().copied().collect(),
            k => return Err(Error::NotUnique(k)),
        };
        let [we, ve, _, _] = self.unit_contractions(0, &v);
        let dw = we.trace() / c(ce as f64);
        let cv = ve.trace() / c(ce as f64);
        if dw.norm() < 1e-12 || cv.norm() < 1e-12 {
            return Err(Error::NoSolution("unit contraction vanishes".into()));
        }
        let kappa = (cv / dw).sqrt();
        let ee = self.idx(0, 0);
        self.w[ee] *= kappa;
        self.winv[ee] /= kappa;
        for x in v.iter_mut() {
            *x /= kappa * dw;
        }
        for g in 1..n {
            let cg = c(self.rep.chi(g) as f64);
            let [wr, _, wl, _] = self.unit_contractions(g, &v);
            let a = wr.trace() / cg;
            let b = wl.trace() / cg;
            let (ge, eg) = (self.idx(g, 0), self.idx(0, g));
            self.w[ge] /= a;
            self.winv[ge] *= a;
            self.w[eg] /= b;
            self.winv[eg] *= b;
        }
        Ok(v)
    }

    /// ω(g,h,k) from W⁻¹_{gh,k}(W⁻¹_{g,h}⊗1) = ω(g,h,k)·W⁻¹_{g,hk}(1⊗W⁻¹_{h,k}).
    pub fn extract_3cocycle(&self) -> Result<Cocycle3> {
        let grp = self.group();
        let n = grp.order();
        let mut values = Vec::with_capacity(n * n * n);
        for g in 0..n {
            for h in 0..n {
                for k in 0..n {
                    let (lhs, rhs) = self.associator_sides(g, h, k);
                    let (s, res) = fit_scalar(lhs.as_slice(), rhs.as_slice());
                    if !res.is_finite() || s.norm() < 1e-12 {
                        return Err(Error::NoSolution(format!("zero overlap at ({g},{h},{k})")));
                    }
                    if res > 1e-8 {
                        return Err(Error::NotProportional(res));
                    }
                    values.push(s);
                }
            }
        }
        let w = Cocycle3::from_fn(n, |a, b, cc| values[(a * n + b) * n + cc]);
        if w.values().iter().any(|z| (z.norm() - 1.0).abs() > 1e-8) {
            return Err(Error::InvalidCocycle("extracted associator is not a phase".into()));
        }
        // Snap to unit modulus; deviations are below 1e-8.
        Ok(Cocycle3::from_fn(n, |a, b, cc| {
            let z = w.get(a, b, cc);
            z / c(z.norm())
        }))
    }

    fn associator_sides(&self, g: usize, h: usize, k: usize) -> (Mat, Mat) {
        let grp = self.group();
        let (cg, ck) = (self.rep.chi(g), self.rep.chi(k));
        let lhs = self.winv(grp.mul(g, h), k) * kron(self.winv(g, h), &identity(ck));
        let rhs = self.winv(g, grp.mul(h, k)) * kron(&identity(cg), self.winv(h, k));
        (lhs, rhs)
    }

    fn w_associator_sides(&self, g: usize, h: usize, k: usize) -> (Mat, Mat) {
        let grp = self.group();
        let (cg, ck) = (self.rep.chi(g), self.rep.chi(k));
        let lhs = kron(self.w(g, h), &identity(ck)) * self.w(grp.mul(g, h), k);
        let rhs = kron(&identity(cg), self.w(h, k)) * self.w(g, grp.mul(h, k));
        (lhs, rhs)
    }

    /// Rescales by a trivializer of ω so that fusion is strictly associative,
    /// then computes the Z matrices. Fails with [`Error::Anomalous`] if ω is not
    /// a coboundary.
    pub fn gauge_fix_strict(&self) -> Result<Self> {
        let Some(beta) = coboundary_trivialize(self.group(), &self.omega)? else {
            return Err(Error::Anomalous);
        };
        let mut out = self.rescale(&beta)?;
        out.beta = beta;
        let dev = out.omega.max_deviation(&Cocycle3::trivial(self.group().order()));
        if dev > 1e-9 {
            return Err(Error::NoSolution(format!("strict gauge residual {dev:e}")));
        }
        out.strict = true;
        if out.v.is_some() {
            out.z = Some(out.solve_z_matrices()?);
        }
        Ok(out)
    }

    /// Z_g[t, w] = Σ_z W_{g,g⁻¹}[(t,w); z] v_z.
    fn solve_z_matrices(&self) -> Result<Vec<Mat>> {
        let v = self.v.as_ref().ok_or_else(|| Error::NoSolution("unit vector missing".into()))?;
        let grp = self.group();
        let ce = self.rep.chi(0);
        grp.elements()
            .map(|g| {
                let gi = grp.inv(g);
                let (cg, cgi) = (self.rep.chi(g), self.rep.chi(gi));
                let w = self.w(g, gi);
                let z = Mat::from_fn(cg, cgi, |t, x| (0..ce).map(|e| w[(t * cgi + x, e)] * v[e]).sum());
                if crate::linalg::matrix_rank(&z, 1e-10) < cg.min(cgi) {
                    return Err(Error::NoSolution(format!("Z_{g} is rank deficient")));
                }
                Ok(z)
            })
            .collect()
    }

    /// Checks every structural identity by direct contraction.
    pub fn verify(&self, tol: f64) -> Result<Report> {
        let mut report = Report::new();
        let grp = self.group().clone();
        let n = grp.order();
        let mut zip: f64 = 0.0;
        let mut zip_inv: f64 = 0.0;
        let mut ortho: f64 = 0.0;
        for g in 0..n {
            for h in 0..n {
                let (a, b) = self.zipper_residuals(g, h)?;
                zip = zip.max(a);
                zip_inv = zip_inv.max(b);
                let cz = self.rep.chi(grp.mul(g, h));
                ortho = ortho.max((self.winv(g, h) * self.w(g, h) - identity(cz)).norm());
            }
        }
        report.push("fusion zipper", "(T_g ⊗ T_h) W_{g,h} = W_{g,h} T_gh", zip, tol);
        report.push("fusion zipper (inverse)", "W⁻¹_{g,h} (T_g ⊗ T_h) = T_gh W⁻¹_{g,h}", zip_inv, tol);
        report.push("fusion orthogonality", "W⁻¹_{g,h} W_{g,h} = 1_gh", ortho, tol);
        report.push("cocycle condition", "ω pentagon", crate::group::cocycle3_violation(&grp, &self.omega), tol);
        if let Some(v) = &self.v {
            let mut dev: f64 = 0.0;
            for g in 0..n {
                for m in self.unit_contractions(g, v) {
                    dev = dev.max((m - identity(self.rep.chi(g))).norm());
                }
            }
            report.push("unit vector", "⟨v| W_{g,e} = 1_g = W⁻¹_{g,e} |v⟩ (both sides)", dev, tol);
        }
        if self.strict {
            let (mut sv, mut sw, mut mixed): (f64, f64, f64) = (0.0, 0.0, 0.0);
            for g in 0..n {
                for h in 0..n {
                    for k in 0..n {
                        let (l, r) = self.associator_sides(g, h, k);
                        sv = sv.max((&l - &r).norm());
                        let (l, r) = self.w_associator_sides(g, h, k);
                        sw = sw.max((l - r).norm());
                        let ck = self.rep.chi(k);
                        let lhs = &r_side(self, g, h, k) * kron(self.w(g, h), &identity(ck));
                        mixed = mixed.max((lhs - self.winv(grp.mul(g, h), k)).norm());
                    }
                }
            }
            report.push("strict associativity", "W⁻¹_{gh,k}(W⁻¹_{g,h}⊗1) = W⁻¹_{g,hk}(1⊗W⁻¹_{h,k})", sv, tol);
            report.push("strict associativity (W)", "(W_{g,h}⊗1)W_{gh,k} = (1⊗W_{h,k})W_{g,hk}", sw, tol);
            report.push("mixed strict identity", "W⁻¹_{g,hk}(1⊗W⁻¹_{h,k})(W_{g,h}⊗1) = W⁻¹_{gh,k}", mixed, tol);
        }
        if let (Some(_), Some(_)) = (&self.v, &self.z) {
            let (a, b, cons) = self.z_residuals();
            report.push("Z relation", "W_{g,g⁻¹h} = Z_g · W⁻¹_{g⁻¹,h}", a, tol);
            report.push("Z definition", "⟨v|W_{g,g⁻¹} = Z_g", b, tol);
            report.push("Z consistency", "Z_g · (v·W⁻¹_{g⁻¹,g}) = 1_g", cons, tol);
        }
        Ok(report)
    }

    /// Zipper residuals computed with labelled tensor contractions.
    pub fn zipper_residuals(&self, g: usize, h: usize) -> Result<(f64, f64)> {
        let grp = self.group();
        let gh = grp.mul(g, h);
        let (cg, ch, cz) = (self.rep.chi(g), self.rep.chi(h), self.rep.chi(gh));
        let tg = self.rep.tensor(g).relabel(&["a", "b", "o", "m"])?;
        let th = self.rep.tensor(h).relabel(&["c", "e", "m", "i"])?;
        let s = tg.contract(&th, &[("m", "m")])?;
        let w = Tensor::new(&[cg, ch, cz], &["b", "e", "z"], vec_row_major(self.w(g, h)))?;
        let sw = s.contract(&w, &[("b", "b"), ("e", "e")])?;
        let w_left = w.relabel(&["a", "c", "y"])?;
        let t = self.rep.tensor(gh).relabel(&["y", "z", "o", "i"])?;
        let wt = w_left.contract(&t, &[("y", "y")])?;
        let zip = sw.distance(&wt)?;
        let v = Tensor::new(&[cz, cg, ch], &["y", "a", "c"], vec_row_major(self.winv(g, h)))?;
        let vs = v.contract(&s, &[("a", "a"), ("c", "c")])?;
        let v_right = v.relabel(&["z", "b", "e"])?;
        let tv = t.contract(&v_right, &[("z", "z")])?;
        Ok((zip, vs.distance(&tv)?))
    }

    fn z_residuals(&self) -> (f64, f64, f64) {
        let grp = self.group();
        let v = self.v.as_ref().unwrap();
        let ce = self.rep.chi(0);
        let (mut rel, mut def, mut cons): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for g in grp.elements() {
            let gi = grp.inv(g);
            let z = self.z(g).unwrap();
            let (cg, cgi) = (self.rep.chi(g), self.rep.chi(gi));
            for h in grp.elements() {
                let x = grp.mul(gi, h);
                let cx = self.rep.chi(x);
                let ch = self.rep.chi(h);
                let w = self.w(g, x);
                let vi = self.winv(gi, h);
                for t in 0..cg {
                    for y in 0..cx {
                        for zz in 0..ch {
                            let rhs: C64 = (0..cgi).map(|s| z[(t, s)] * vi[(y, s * ch + zz)]).sum();
                            rel = rel.max((w[(t * cx + y, zz)] - rhs).norm());
                        }
                    }
                }
            }
            let w = self.w(g, gi);
            let direct = Mat::from_fn(cg, cgi, |t, x| (0..ce).map(|e| w[(t * cgi + x, e)] * v[e]).sum());
            def = def.max((direct - z).norm());
            let vi = self.winv(gi, g);
            let y = Mat::from_fn(cgi, cg, |s, zz| (0..ce).map(|e| v[e] * vi[(e, s * cg + zz)]).sum());
            cons = cons.max((z * y - identity(cg)).norm());
        }
        (rel, def, cons)
    }
}

fn r_side(f: &FusionData, g: usize, h: usize, k: usize) -> Mat {
    let grp = f.group();
    let cg = f.rep.chi(g);
    f.winv(g, grp.mul(h, k)) * kron(&identity(cg), f.winv(h, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{coboundary, FiniteGroup};
    use crate::mpo::{build_anomalous_mpo, build_onsite_mpo, regular_rep, z2_diag_rep};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn onsite(grp: &FiniteGroup) -> MpoGroupRep {
        build_onsite_mpo(grp, regular_rep(grp)).unwrap()
    }

    #[test]
    fn onsite_closed_form() {
        let grp = FiniteGroup::cyclic(4);
        let f = FusionData::solve_strict(&onsite(&grp)).unwrap();
        assert_eq!(f.w(1, 2), &identity(1));
        assert!(f.omega().max_deviation(&Cocycle3::trivial(4)) < 1e-15);
        assert_eq!(f.unit_vector().unwrap(), &[c(1.0)]);
        for g in 0..4 {
            assert!((f.z(g).unwrap()[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
        let r = f.verify(1e-9).unwrap();
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn trivial_group() {
        let grp = FiniteGroup::cyclic(1);
        let rep = build_onsite_mpo(&grp, vec![identity(2)]).unwrap();
        let f = FusionData::solve_strict(&rep).unwrap();
        assert_eq!(f.z(0).unwrap(), &identity(1));
        assert!(f.verify(1e-12).unwrap().all_pass());
    }

    #[test]
    fn solver_reproduces_onsite_closed_form() {
        // Run the generic solver on an on-site rep disguised as custom.
        let grp = FiniteGroup::cyclic(3);
        let rep = onsite(&grp);
        let custom = MpoGroupRep::from_tensors(grp.clone(), rep.tensors().to_vec(), crate::mpo::RepKind::Custom).unwrap();
        for g in 0..3 {
            for h in 0..3 {
                let (w, v) = solve_fusion_tensors(&custom, g, h).unwrap();
                assert!((w[(0, 0)] - c(1.0)).norm() < 1e-12);
                assert!((v[(0, 0)] - c(1.0)).norm() < 1e-12);
            }
        }
        let f = FusionData::solve_strict(&custom).unwrap();
        assert!(f.verify(1e-9).unwrap().all_pass());
    }

    #[test]
    fn anomalous_z2_pipeline() {
        let grp = FiniteGroup::cyclic(2);
        let input = Cocycle3::cyclic(2, 1);
        let rep = build_anomalous_mpo(&grp, &input).unwrap();
        let f = FusionData::solve(&rep).unwrap();
        let r = f.verify(1e-9).unwrap();
        assert!(r.all_pass(), "{r:?}");
        assert!(f.unit_vector().is_some());
        assert!(f.omega().is_normalized(1e-9));
        assert!(!f.is_trivial_class().unwrap());
        let ratio = f.omega().mul(&input.conj());
        assert!(coboundary_trivialize(&grp, &ratio).unwrap().is_some());
        assert!(matches!(f.gauge_fix_strict(), Err(Error::Anomalous)));
    }

    #[test]
    fn anomalous_builder_recovers_input_class() {
        for (n, p) in [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)] {
            let grp = FiniteGroup::cyclic(n);
            let input = Cocycle3::cyclic(n, p);
            let rep = build_anomalous_mpo(&grp, &input).unwrap();
            let f = FusionData::solve(&rep).unwrap();
            assert!(f.verify(1e-9).unwrap().all_pass());
            let ratio = f.omega().mul(&input.conj());
            assert!(coboundary_trivialize(&grp, &ratio).unwrap().is_some(), "n={n} p={p}");
            assert_eq!(f.is_trivial_class().unwrap(), p == 0);
        }
    }

    #[test]
    fn trivial_label_pair_build_goes_strict() {
        for n in [2, 3] {
            let grp = FiniteGroup::cyclic(n);
            let rep = build_anomalous_mpo(&grp, &Cocycle3::trivial(n)).unwrap();
            let f = FusionData::solve_strict(&rep).unwrap();
            let r = f.verify(1e-9).unwrap();
            assert!(r.all_pass(), "{r:?}");
            assert!(r.records.iter().any(|x| x.identity == "Z relation"));
        }
    }

    #[test]
    fn scrambling_changes_omega_by_coboundary() {
        let grp = FiniteGroup::cyclic(3);
        let rep = build_anomalous_mpo(&grp, &Cocycle3::cyclic(3, 1)).unwrap();
        let f = FusionData::solve(&rep).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let beta0 = Cochain2::from_fn(3, |_, _| C64::from_polar(1.0, rng.gen_range(0.0..6.3)));
        let g = f.rescale(&beta0).unwrap();
        let expected = f.omega().mul(&coboundary(&grp, &beta0).conj());
        assert!(g.omega().max_deviation(&expected) < 1e-8);
        assert!(!g.is_trivial_class().unwrap());
    }

    #[test]
    fn scramble_and_repair() {
        let grp = FiniteGroup::cyclic(2);
        let rep = build_anomalous_mpo(&grp, &Cocycle3::trivial(2)).unwrap();
        let f = FusionData::solve(&rep).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let beta0 = Cochain2::from_fn(2, |a, b| {
            if a == 0 || b == 0 { c(1.0) } else { C64::from_polar(1.0, rng.gen_range(0.0..6.3)) }
        });
        let s = f.rescale(&beta0).unwrap();
        let strict = s.gauge_fix_strict().unwrap();
        assert!(strict.verify(1e-9).unwrap().all_pass());
        let again = strict.extract_3cocycle().unwrap();
        assert!(again.max_deviation(&Cocycle3::trivial(2)) < 1e-9);
    }

    #[test]
    fn z2_diag_strict() {
        let rep = build_onsite_mpo(&FiniteGroup::cyclic(2), z2_diag_rep()).unwrap();
        assert!(FusionData::solve_strict(&rep).unwrap().verify(1e-12).unwrap().all_pass());
    }
}
