//! Fusion categories with multiplicity-free fusion, MPO representations of
//! them, localized operators Ǒ_a on split-leg sites, the Λ projector and the
//! block-MPS action. Includes a Fibonacci fixture.

use serde::{Deserialize, Serialize};

use crate::anomaly::{correlated_op, Channel};
use crate::error::{Error, Result};
use crate::fusion::{solve_intertwiners, stacked_tensor_bond, tensor_bond, FusionData};
use crate::group::FiniteGroup;
use crate::linalg::{apply_local, c, diff_norm, identity, kron, mul_sparse, norm, nullspace, pinv, Mat};
use crate::mpo::{mpo_dense, MpoGroupRep, DENSE_GUARD};
use crate::mps::{apply_mpo_tensor, Mps};
use crate::report::Report;
use crate::tensor::Tensor;
use crate::C64;

/// Raw tables as read from JSON: `N[a][b][c]` and the dual of each object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryData {
    pub objects: usize,
    #[serde(rename = "N")]
    pub n: Vec<Vec<Vec<u32>>>,
    pub dual: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FusionCategory {
    data: CategoryData,
    dims: Vec<f64>,
    total: f64,
}

fn perron_dims(data: &CategoryData) -> Vec<f64> {
    let m = data.objects;
    // d is the common eigenvector of all fusion matrices (N_a)_{bc} = N_ab^c.
    let mut x = vec![1.0; m];
    for _ in 0..10_000 {
        let mut y = x.clone();
        for a in 0..m {
            for b in 0..m {
                for cc in 0..m {
                    y[b] += data.n[a][b][cc] as f64 * x[cc];
                }
            }
        }
        let s = y[0];
        let y: Vec<f64> = y.iter().map(|v| v / s).collect();
        let delta: f64 = y.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        x = y;
        if delta < 1e-15 {
            break;
        }
    }
    x
}

impl FusionCategory {
    /// Checks every axiom and computes d_a and D². Each failure names the
    /// violated axiom.
    pub fn validate(data: &CategoryData) -> Result<Self> {
        let m = data.objects;
        let bad = |s: String| Err(Error::InvalidCategory(s));
        if m == 0 {
            return bad("no objects".into());
        }
        if data.n.len() != m || data.n.iter().any(|r| r.len() != m || r.iter().any(|q| q.len() != m)) {
            return bad(format!("N must be {m}×{m}×{m}"));
        }
        if data.dual.len() != m || data.dual.iter().any(|&a| a >= m) {
            return bad("dual table has wrong length or entries".into());
        }
        let n = |a: usize, b: usize, cc: usize| data.n[a][b][cc];
        for a in 0..m {
            for b in 0..m {
                for cc in 0..m {
                    if n(a, b, cc) > 1 {
                        return bad(format!("multiplicity N_{a}{b}^{cc} = {} > 1", n(a, b, cc)));
                    }
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                let delta = (a == b) as u32;
                if n(0, a, b) != delta || n(a, 0, b) != delta {
                    return bad(format!("unit: object 0 does not fuse trivially with {a}"));
                }
            }
        }
        for a in 0..m {
            let ad = data.dual[a];
            if data.dual[ad] != a {
                return bad(format!("dual of dual of {a} is not {a}"));
            }
            if n(a, ad, 0) == 0 {
                return bad(format!("N_{{{a},{ad}}}^0 = 0"));
            }
        }
        for a in 0..m {
            for b in 0..m {
                for cc in 0..m {
                    let (ad, bd) = (data.dual[a], data.dual[b]);
                    if n(a, b, cc) != n(ad, cc, b) || n(a, b, cc) != n(cc, bd, a) {
                        return bad(format!("reciprocity fails at N_{a}{b}^{cc}"));
                    }
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                for cc in 0..m {
                    for d in 0..m {
                        let lhs: u32 = (0..m).map(|e| n(a, b, e) * n(e, cc, d)).sum();
                        let rhs: u32 = (0..m).map(|f| n(b, cc, f) * n(a, f, d)).sum();
                        if lhs != rhs {
                            return bad(format!("fusion not associative at ({a},{b},{cc}) → {d}"));
                        }
                    }
                }
            }
        }
        let dims = perron_dims(data);
        if dims.iter().any(|&x| !(x > 0.0)) {
            return bad("quantum dimensions not positive".into());
        }
        for a in 0..m {
            for b in 0..m {
                let rhs: f64 = (0..m).map(|cc| n(a, b, cc) as f64 * dims[cc]).sum();
                if (dims[a] * dims[b] - rhs).abs() > 1e-10 {
                    return bad(format!("d_{a} d_{b} ≠ Σ_c N d_c"));
                }
            }
        }
        let total: f64 = dims.iter().map(|x| x * x).sum();
        for cc in 0..m {
            let lhs: f64 = (0..m)
                .flat_map(|a| (0..m).map(move |b| (a, b)))
                .map(|(a, b)| n(a, b, cc) as f64 * dims[a] * dims[b])
                .sum();
            if (lhs - total * dims[cc]).abs() > 1e-10 * total {
                return bad(format!("Σ N d_a d_b ≠ D² d_{cc}"));
            }
        }
        Ok(FusionCategory { data: data.clone(), dims, total })
    }

    pub fn trivial() -> Self {
        Self::validate(&CategoryData { objects: 1, n: vec![vec![vec![1]]], dual: vec![0] }).expect("trivial category")
    }

    /// Objects {1, τ} with τ×τ = 1 + τ.
    pub fn fibonacci() -> Self {
        let n = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 1]]];
        Self::validate(&CategoryData { objects: 2, n, dual: vec![0, 1] }).expect("fibonacci category")
    }

    pub fn from_group(grp: &FiniteGroup) -> Self {
        let m = grp.order();
        let n = (0..m)
            .map(|a| (0..m).map(|b| (0..m).map(|k| (grp.mul(a, b) == k) as u32).collect()).collect())
            .collect();
        let dual = (0..m).map(|a| grp.inv(a)).collect();
        Self::validate(&CategoryData { objects: m, n, dual }).expect("group category")
    }

    pub fn data(&self) -> &CategoryData {
        &self.data
    }

    pub fn objects(&self) -> usize {
        self.data.objects
    }

    pub fn n(&self, a: usize, b: usize, cc: usize) -> u32 {
        self.data.n[a][b][cc]
    }

    /// Objects c with N_ab^c = 1.
    pub fn channels(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.objects()).filter(|&cc| self.n(a, b, cc) == 1).collect()
    }

    pub fn dual(&self, a: usize) -> usize {
        self.data.dual[a]
    }

    pub fn dim(&self, a: usize) -> f64 {
        self.dims[a]
    }

    pub fn dims(&self) -> &[f64] {
        &self.dims
    }

    /// D² = Σ_a d_a².
    pub fn total_dim_sq(&self) -> f64 {
        self.total
    }

    /// Weights d_a / D² of Λ.
    pub fn lambda_weights(&self) -> Vec<f64> {
        self.dims.iter().map(|d| d / self.total).collect()
    }
}

/// Per-object MPO tensors with axes (l, r, o, i).
#[derive(Clone, Debug)]
pub struct CategoryMpoRep {
    cat: FusionCategory,
    d: usize,
    tensors: Vec<Tensor>,
    chis: Vec<usize>,
    offsets: Vec<usize>,
}

impl CategoryMpoRep {
    pub fn new(cat: FusionCategory, tensors: Vec<Tensor>) -> Result<Self> {
        if tensors.len() != cat.objects() {
            return Err(Error::InvalidCategory(format!("{} tensors for {} objects", tensors.len(), cat.objects())));
        }
        let d = tensors[0].shape()[2];
        for t in &tensors {
            let s = t.shape();
            if s.len() != 4 || s[0] != s[1] || s[2] != d || s[3] != d {
                return Err(Error::ShapeMismatch(s.to_vec(), vec![0, 0, d, d]));
            }
        }
        let chis: Vec<usize> = tensors.iter().map(|t| t.shape()[0]).collect();
        let offsets = chis.iter().scan(0, |acc, &x| {
            let o = *acc;
            *acc += x;
            Some(o)
        });
        let offsets = offsets.collect();
        Ok(CategoryMpoRep { cat, d, tensors, chis, offsets })
    }

    pub fn from_group_rep(rep: &MpoGroupRep) -> Self {
        Self::new(FusionCategory::from_group(rep.group()), rep.tensors().to_vec()).expect("group rep is a category rep")
    }

    /// Fibonacci MPO on admissible label pairs (x, y), y ∈ x⊗τ (d = 3).
    /// O_a has bonds (x, x') with x' ∈ a⊗x and site weight
    /// [F^{a x τ}_{y'}]_{x' y} mapping (x, y) to (x', y').
    pub fn fibonacci() -> Self {
        let cat = FusionCategory::fibonacci();
        let pairs = |a: usize| -> Vec<(usize, usize)> {
            (0..2).flat_map(|x| (0..2).map(move |y| (x, y))).filter(|&(x, y)| cat.n(a, x, y) == 1).collect()
        };
        let phys = pairs(1);
        let tensors = (0..2)
            .map(|a| {
                let bonds = pairs(a);
                let chi = bonds.len();
                let mut t = Tensor::zeros(&[chi, chi, 3, 3], &["l", "r", "o", "i"]).expect("shape");
                for (lb, &(x, xp)) in bonds.iter().enumerate() {
                    for (rb, &(y, yp)) in bonds.iter().enumerate() {
                        let (Some(i), Some(o)) = (
                            phys.iter().position(|&p| p == (x, y)),
                            phys.iter().position(|&p| p == (xp, yp)),
                        ) else {
                            continue;
                        };
                        t.set(&[lb, rb, o, i], c(fibonacci_f(a, x, 1, yp, xp, y)));
                    }
                }
                t
            })
            .collect();
        Self::new(cat, tensors).expect("fibonacci rep")
    }

    pub fn category(&self) -> &FusionCategory {
        &self.cat
    }

    pub fn phys_dim(&self) -> usize {
        self.d
    }

    pub fn tensor(&self, a: usize) -> &Tensor {
        &self.tensors[a]
    }

    pub fn chi(&self, a: usize) -> usize {
        self.chis[a]
    }

    pub fn chis(&self) -> &[usize] {
        &self.chis
    }

    pub fn offset(&self, a: usize) -> usize {
        self.offsets[a]
    }

    pub fn total_chi(&self) -> usize {
        self.chis.iter().sum()
    }

    pub fn dense(&self, a: usize, len: usize) -> Result<Mat> {
        mpo_dense(&self.tensors[a], len)
    }

    /// O_Λ = Σ_a (d_a/D²) O_a on L sites.
    pub fn dense_lambda(&self, len: usize) -> Result<Mat> {
        let ops = (0..self.cat.objects()).map(|a| self.dense(a, len)).collect::<Result<Vec<_>>>()?;
        Ok(lambda_combination(&self.cat, &ops))
    }

    /// Dense fusion algebra, Λ projector and Λ absorption at L sites.
    pub fn verify_dense(&self, len: usize, tol: f64) -> Result<Report> {
        let m = self.cat.objects();
        let ops = (0..m).map(|a| self.dense(a, len)).collect::<Result<Vec<_>>>()?;
        let lam = lambda_combination(&self.cat, &ops);
        let mut r = Report::new();
        let mut alg: f64 = 0.0;
        let mut absorb: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                let sum = self.cat.channels(a, b).iter().fold(Mat::zeros(lam.nrows(), lam.ncols()), |acc, &k| acc + &ops[k]);
                alg = alg.max((&ops[a] * &ops[b] - sum).norm());
            }
            let da = c(self.cat.dim(a));
            absorb = absorb.max((&ops[a] * &lam - &lam * da).norm()).max((&lam * &ops[a] - &lam * da).norm());
        }
        r.push("dense fusion algebra", "O_a O_b = Σ_c N_ab^c O_c", alg, tol);
        r.push("dense Λ projector", "O_Λ² = O_Λ", (&lam * &lam - &lam).norm(), tol);
        r.push("dense Λ absorption", "O_a O_Λ = O_Λ O_a = d_a O_Λ", absorb, tol);
        Ok(r)
    }
}

fn lambda_combination(cat: &FusionCategory, ops: &[Mat]) -> Mat {
    let mut out = ops.iter().enumerate().fold(Mat::zeros(ops[0].nrows(), ops[0].ncols()), |acc, (a, m)| acc + m * c(cat.dim(a)));
    out /= c(cat.total_dim_sq());
    out
}

/// Fibonacci F-symbols [F^{abc}_d]_{ef} in the unitary gauge; objects 0 = 1,
/// 1 = τ. Zero for inadmissible labels.
pub fn fibonacci_f(a: usize, b: usize, cc: usize, d: usize, e: usize, f: usize) -> f64 {
    let n = |x: usize, y: usize, z: usize| match (x, y) {
        (0, _) => y == z,
        (_, 0) => x == z,
        _ => true,
    };
    if !(n(a, b, e) && n(e, cc, d) && n(b, cc, f) && n(a, f, d)) {
        return 0.0;
    }
    if (a, b, cc, d) != (1, 1, 1, 1) {
        return 1.0;
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    match (e, f) {
        (0, 0) => 1.0 / phi,
        (1, 1) => -1.0 / phi,
        _ => phi.powf(-0.5),
    }
}

/// One fusion channel a×b → c.
#[derive(Clone, Debug)]
pub struct ChannelTensors {
    pub out: usize,
    pub w: Mat,
    pub winv: Mat,
}

/// Solves W^c_{ab}, (W^c_{ab})⁻¹ for every c with N_ab^c = 1 and checks
/// that the channels exhaust the stacked MPO.
pub fn solve_category_fusion_tensors(rep: &CategoryMpoRep, a: usize, b: usize) -> Result<Vec<ChannelTensors>> {
    let d = rep.phys_dim();
    let stacked: Vec<Mat> = (0..d * d).map(|k| stacked_tensor_bond(rep.tensor(a), rep.tensor(b), k / d, k % d)).collect();
    let mut out = Vec::new();
    for cc in rep.category().channels(a, b) {
        let pairs: Vec<(Mat, Mat)> = (0..d * d).map(|k| (stacked[k].clone(), tensor_bond(rep.tensor(cc), k / d, k % d))).collect();
        let (w, winv) = solve_intertwiners(&pairs, rep.chi(a) * rep.chi(b), rep.chi(cc))?
            .ok_or_else(|| Error::InvalidCategory(format!("channel {a}×{b}→{cc} not decomposable")))?;
        out.push(ChannelTensors { out: cc, w, winv });
    }
    let res = zipper_sum_residual(rep, &stacked, &out);
    if res > 1e-8 {
        return Err(Error::InvalidCategory(format!("channels of {a}×{b} do not exhaust the product (residual {res:e})")));
    }
    Ok(out)
}

fn zipper_sum_residual(rep: &CategoryMpoRep, stacked: &[Mat], chans: &[ChannelTensors]) -> f64 {
    let d = rep.phys_dim();
    stacked
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let sum = chans.iter().fold(Mat::zeros(s.nrows(), s.ncols()), |acc, ch| {
                acc + &ch.w * tensor_bond(rep.tensor(ch.out), k / d, k % d) * &ch.winv
            });
            (s - sum).norm()
        })
        .fold(0.0, f64::max)
}

/// Fusion tensors for every pair of objects, and the unit vector.
#[derive(Clone, Debug)]
pub struct CategoryFusion {
    rep: CategoryMpoRep,
    channels: Vec<Vec<Vec<ChannelTensors>>>,
    v: Option<Vec<C64>>,
}

impl CategoryFusion {
    pub fn solve(rep: &CategoryMpoRep) -> Result<Self> {
        let m = rep.category().objects();
        let channels = (0..m)
            .map(|a| (0..m).map(|b| solve_category_fusion_tensors(rep, a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut out = CategoryFusion { rep: rep.clone(), channels, v: None };
        out.v = out.find_unit_vector();
        Ok(out)
    }

    /// Group case: channels copied from solved group fusion data.
    pub fn from_fusion(f: &FusionData) -> Self {
        let rep = CategoryMpoRep::from_group_rep(f.rep());
        let grp = f.group();
        let channels = grp
            .elements()
            .map(|g| {
                grp.elements()
                    .map(|h| vec![ChannelTensors { out: grp.mul(g, h), w: f.w(g, h).clone(), winv: f.winv(g, h).clone() }])
                    .collect()
            })
            .collect();
        CategoryFusion { rep, channels, v: f.unit_vector().map(|v| v.to_vec()) }
    }

    pub fn rep(&self) -> &CategoryMpoRep {
        &self.rep
    }

    pub fn category(&self) -> &FusionCategory {
        self.rep.category()
    }

    pub fn channels(&self, a: usize, b: usize) -> &[ChannelTensors] {
        &self.channels[a][b]
    }

    pub fn unit_vector(&self) -> Option<&[C64]> {
        self.v.as_deref()
    }

    /// v ∈ ℂ^{χ_1} with every unit-leg contraction of W^a_{1a}, W^a_{a1}
    /// (and inverses) proportional to 1_a; scaled so that the W^1_{11}
    /// contraction is 1.
    fn find_unit_vector(&self) -> Option<Vec<C64>> {
        let m = self.category().objects();
        let cu = self.rep.chi(0);
        let mut blocks: Vec<Mat> = Vec::new();
        for a in 0..m {
            let ca = self.rep.chi(a);
            let cols: Vec<[Mat; 4]> = (0..cu)
                .map(|j| {
                    let mut e = vec![c(0.0); cu];
                    e[j] = c(1.0);
                    self.unit_contractions(a, &e)
                })
                .collect();
            for k in 0..4 {
                blocks.push(Mat::from_fn(ca * ca, cu, |idx, j| {
                    let mat = &cols[j][k];
                    let tr = mat.trace() / c(ca as f64);
                    mat[(idx / ca, idx % ca)] - if idx / ca == idx % ca { tr } else { c(0.0) }
                }));
            }
        }
        let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut a = Mat::zeros(rows, cu);
        let mut r = 0;
        for b in &blocks {
            a.view_mut((r, 0), (b.nrows(), cu)).copy_from(b);
            r += b.nrows();
        }
        let ns = nullspace(&a, 1e-9);
        if ns.ncols() != 1 {
            return None;
        }
        let v: Vec<C64> = ns.column(0).iter().copied().collect();
        let scale = self.unit_contractions(0, &v)[0][(0, 0)];
        if scale.norm() < 1e-12 {
            return None;
        }
        Some(v.iter().map(|z| z / scale).collect())
    }

    fn unit_contractions(&self, a: usize, v: &[C64]) -> [Mat; 4] {
        let ca = self.rep.chi(a);
        let cu = self.rep.chi(0);
        let left = &self.channels[0][a][0];
        let right = &self.channels[a][0][0];
        let mut out = [Mat::zeros(ca, ca), Mat::zeros(ca, ca), Mat::zeros(ca, ca), Mat::zeros(ca, ca)];
        for s in 0..ca {
            for z in 0..ca {
                for (t, &vt) in v.iter().enumerate().take(cu) {
                    out[0][(s, z)] += right.w[(s * cu + t, z)] * vt;
                    out[1][(z, s)] += right.winv[(z, s * cu + t)] * vt;
                    out[2][(s, z)] += left.w[(t * ca + s, z)] * vt;
                    out[3][(z, s)] += left.winv[(z, t * ca + s)] * vt;
                }
            }
        }
        out
    }

    /// Zipper with sum over channels, cross-channel orthogonality and the
    /// F-move relating the two bracketings of three fusion tensors.
    pub fn verify(&self, tol: f64) -> Report {
        let m = self.category().objects();
        let d = self.rep.phys_dim();
        let (mut zip, mut orth, mut assoc): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for a in 0..m {
            for b in 0..m {
                let stacked: Vec<Mat> =
                    (0..d * d).map(|k| stacked_tensor_bond(self.rep.tensor(a), self.rep.tensor(b), k / d, k % d)).collect();
                zip = zip.max(zipper_sum_residual(&self.rep, &stacked, &self.channels[a][b]));
                for x in &self.channels[a][b] {
                    for y in &self.channels[a][b] {
                        let target = if x.out == y.out { identity(self.rep.chi(x.out)) } else { Mat::zeros(self.rep.chi(x.out), self.rep.chi(y.out)) };
                        orth = orth.max((&x.winv * &y.w - target).norm());
                    }
                }
                for cc in 0..m {
                    assoc = assoc.max(self.f_move_residual(a, b, cc));
                }
            }
        }
        let mut r = Report::new();
        r.push("category zipper", "Σ_c W^c T_c W^c⁻¹ = T_a T_b", zip, tol);
        r.push("channel orthogonality", "W^c⁻¹ W^d = δ_cd 1", orth, tol);
        r.push("fusion associativity", "(W_ab^e⊗1)W_ec^d = Σ_f F_ef (1⊗W_bc^f)W_af^d", assoc, tol);
        r
    }

    /// Least-squares residual of expressing each (W_ab^e⊗1)W_ec^d through the
    /// (1⊗W_bc^f)W_af^d.
    pub fn f_move_residual(&self, a: usize, b: usize, cc: usize) -> f64 {
        let m = self.category().objects();
        let (ca, cb, ccc) = (self.rep.chi(a), self.rep.chi(b), self.rep.chi(cc));
        let mut worst: f64 = 0.0;
        for d in 0..m {
            let lhs: Vec<Mat> = self.channels[a][b]
                .iter()
                .filter_map(|e| {
                    let second = self.channels[e.out][cc].iter().find(|x| x.out == d)?;
                    Some(kron(&e.w, &identity(ccc)) * &second.w)
                })
                .collect();
            let rhs: Vec<Mat> = self.channels[b][cc]
                .iter()
                .filter_map(|f| {
                    let second = self.channels[a][f.out].iter().find(|x| x.out == d)?;
                    Some(kron(&identity(ca), &f.w) * &second.w)
                })
                .collect();
            if lhs.len() != rhs.len() {
                return f64::INFINITY;
            }
            if lhs.is_empty() {
                continue;
            }
            let rows = ca * cb * ccc * self.rep.chi(d);
            let basis = Mat::from_fn(rows, rhs.len(), |i, j| rhs[j].as_slice()[i]);
            let proj = pinv(&basis, 1e-12);
            for l in &lhs {
                let v = nalgebra::DVector::from_column_slice(l.as_slice());
                let coeffs = &proj * &v;
                worst = worst.max((&basis * coeffs - v).norm());
            }
        }
        worst
    }
}

/// Ǒ_a = Σ_b Σ_{c ∈ a×b} (W^c_{ab})⁻¹ ⊗ T_a ⊗ W^c_{ab} on (left leg, matter,
/// right leg), mapping leg block b to block c on both sides.
pub fn local_op_category(f: &CategoryFusion, a: usize) -> Mat {
    let rep = f.rep();
    let m = f.category().objects();
    let offsets: Vec<usize> = (0..m).map(|b| rep.offset(b)).collect();
    let channels: Vec<Channel> = (0..m)
        .flat_map(|b| f.channels(a, b).iter().map(move |ch| Channel { from: b, to: ch.out, winv: &ch.winv, w: &ch.w }))
        .collect();
    correlated_op(rep.tensor(a), &offsets, rep.chis(), rep.total_chi(), &channels)
}

/// Ǒ_Λ = (1/D²) Σ_a d_a Ǒ_a.
pub fn local_lambda(f: &CategoryFusion) -> Mat {
    let ops: Vec<Mat> = (0..f.category().objects()).map(|a| local_op_category(f, a)).collect();
    lambda_combination(f.category(), &ops)
}

/// Algebra of the localized operators: products, recovered structure
/// constants, Λ projector and Λ absorption.
pub fn verify_local_ops(f: &CategoryFusion, tol: f64) -> Report {
    let cat = f.category();
    let m = cat.objects();
    let ops: Vec<Mat> = (0..m).map(|a| local_op_category(f, a)).collect();
    let lam = lambda_combination(cat, &ops);
    let basis = Mat::from_fn(ops[0].len(), m, |i, j| ops[j].as_slice()[i]);
    let proj = pinv(&basis, 1e-12);
    let (mut alg, mut consts, mut absorb): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for a in 0..m {
        for b in 0..m {
            let prod = mul_sparse(&ops[a], &ops[b]);
            let sum = cat.channels(a, b).iter().fold(Mat::zeros(prod.nrows(), prod.ncols()), |acc, &k| acc + &ops[k]);
            alg = alg.max((&prod - sum).norm());
            let coeffs = &proj * nalgebra::DVector::from_column_slice(prod.as_slice());
            for k in 0..m {
                consts = consts.max((coeffs[k] - c(cat.n(a, b, k) as f64)).norm());
            }
        }
        let da = c(cat.dim(a));
        absorb = absorb
            .max((mul_sparse(&ops[a], &lam) - &lam * da).norm())
            .max((mul_sparse(&lam, &ops[a]) - &lam * da).norm());
    }
    let mut r = Report::new();
    r.push("localized fusion algebra", "Ǒ_a Ǒ_b = Σ_c N_ab^c Ǒ_c", alg, tol);
    r.push("structure constants", "least-squares coefficients = N_ab^c", consts, tol);
    r.push("localized Λ projector", "Ǒ_Λ² = Ǒ_Λ", (mul_sparse(&lam, &lam) - &lam).norm(), tol);
    r.push("localized Λ absorption", "Ǒ_a Ǒ_Λ = Ǒ_Λ Ǒ_a = d_a Ǒ_Λ", absorb, tol);
    r
}

/// Split-leg chain symmetrized by Π_i Ǒ_Λ^{[i]}. Factor order as in
/// [`crate::anomaly::SplitGaugeChain`].
#[derive(Clone, Debug)]
pub struct CategoryChain {
    fusion: CategoryFusion,
    len: usize,
    ops: Vec<Mat>,
    projector: Mat,
}

impl CategoryChain {
    pub fn new(fusion: &CategoryFusion, len: usize) -> Result<Self> {
        let rep = fusion.rep();
        let chi = rep.total_chi();
        let total = (rep.phys_dim() * chi * chi).checked_pow(len as u32);
        if len == 0 {
            return Err(Error::InvalidSegment("chain needs at least one site".into()));
        }
        if total.map_or(true, |t| t > crate::anomaly::SPLIT_GUARD) {
            return Err(Error::SizeGuard(format!("d^L·χ^2L exceeds {}", crate::anomaly::SPLIT_GUARD)));
        }
        let ops: Vec<Mat> = (0..fusion.category().objects()).map(|a| local_op_category(fusion, a)).collect();
        let projector = lambda_combination(fusion.category(), &ops);
        Ok(CategoryChain { fusion: fusion.clone(), len, ops, projector })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn matter_dim(&self) -> usize {
        self.fusion.rep().phys_dim().pow(self.len as u32)
    }

    pub fn gauge_dim(&self) -> usize {
        self.fusion.rep().total_chi().pow(2 * self.len as u32)
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.fusion.rep().phys_dim(); self.len];
        dims.extend(std::iter::repeat(self.fusion.rep().total_chi()).take(2 * self.len));
        dims
    }

    pub fn site_factors(&self, i: usize) -> [usize; 3] {
        [self.len + 2 * i, i, self.len + 2 * i + 1]
    }

    pub fn apply_local_op(&self, a: usize, i: usize, state: &[C64]) -> Vec<C64> {
        apply_local(state, &self.dims(), &self.site_factors(i), &self.ops[a])
    }

    /// |V⟩: the unit vector on every leg.
    pub fn v_state(&self) -> Result<Vec<C64>> {
        let v = self.fusion.unit_vector().ok_or_else(|| Error::NoSolution("unit vector missing".into()))?;
        let mut leg = vec![c(0.0); self.fusion.rep().total_chi()];
        leg[..v.len()].copy_from_slice(v);
        Ok((0..2 * self.len).fold(vec![c(1.0)], |acc, _| acc.iter().flat_map(|a| leg.iter().map(move |b| a * b)).collect()))
    }

    /// G_φ|ψ⟩ = Π_i Ǒ_Λ^{[i]} (|ψ⟩ ⊗ |φ⟩).
    pub fn symmetrize(&self, psi: &[C64], phi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != self.matter_dim() {
            return Err(Error::DimensionMismatch { expected: self.matter_dim(), got: psi.len() });
        }
        if phi.len() != self.gauge_dim() {
            return Err(Error::DimensionMismatch { expected: self.gauge_dim(), got: phi.len() });
        }
        let state: Vec<C64> = psi.iter().flat_map(|a| phi.iter().map(move |b| a * b)).collect();
        let dims = self.dims();
        Ok((0..self.len).fold(state, |s, i| apply_local(&s, &dims, &self.site_factors(i), &self.projector)))
    }

    /// max_{a,i} ‖Ǒ_a^{[i]} x − d_a x‖ / ‖x‖.
    pub fn eigen_residual(&self, state: &[C64]) -> f64 {
        let cat = self.fusion.category();
        let scale = norm(state).max(1e-300);
        let mut worst: f64 = 0.0;
        for a in 0..cat.objects() {
            let target: Vec<C64> = state.iter().map(|z| z * cat.dim(a)).collect();
            for i in 0..self.len {
                worst = worst.max(diff_norm(&self.apply_local_op(a, i, state), &target) / scale);
            }
        }
        worst
    }
}

/// Action of the MPOs on a block MPS: T_a·A_x = Σ_y X^y_{ax} A_y Y^y_{ax}.
#[derive(Clone, Debug)]
pub struct CategoryAction {
    /// M[a][x][y] ∈ {0, 1}.
    pub multiplicity: Vec<Vec<Vec<u32>>>,
    /// (X, Y) for each nonzero M, indexed [a][x][y].
    pub tensors: Vec<Vec<Vec<Option<(Mat, Mat)>>>>,
}

/// Decomposes T_a·A_x into the blocks; multiplicities above one are
/// rejected.
pub fn category_action_tensors(blocks: &[Mps], rep: &CategoryMpoRep, tol: f64) -> Result<(CategoryAction, Report)> {
    let m = rep.category().objects();
    let mut mult = vec![vec![vec![0; blocks.len()]; blocks.len()]; m];
    let mut tensors = vec![vec![vec![None; blocks.len()]; blocks.len()]; m];
    let (mut decomp, mut orth): (f64, f64) = (0.0, 0.0);
    for a in 0..m {
        for (x, ax) in blocks.iter().enumerate() {
            let acted = apply_mpo_tensor(rep.tensor(a), ax)?;
            let big = acted[0].nrows();
            for (y, ay) in blocks.iter().enumerate() {
                let pairs: Vec<(Mat, Mat)> = acted.iter().cloned().zip(ay.mats().iter().cloned()).collect();
                if let Some(xy) = solve_intertwiners(&pairs, big, ay.bond_dim())? {
                    mult[a][x][y] = 1;
                    tensors[a][x][y] = Some(xy);
                }
            }
            for (o, s) in acted.iter().enumerate() {
                let sum = (0..blocks.len()).fold(Mat::zeros(big, big), |acc, y| match &tensors[a][x][y] {
                    Some((xm, ym)) => acc + xm * blocks[y].mat(o) * ym,
                    None => acc,
                });
                decomp = decomp.max((s - sum).norm());
            }
            for y in 0..blocks.len() {
                for z in 0..blocks.len() {
                    if let (Some((xy, _)), Some((_, yz))) = (&tensors[a][x][y], &tensors[a][x][z]) {
                        let target = if y == z { identity(blocks[y].bond_dim()) } else { Mat::zeros(blocks[z].bond_dim(), blocks[y].bond_dim()) };
                        orth = orth.max((yz * xy - target).norm());
                    }
                }
            }
        }
    }
    let mut r = Report::new();
    r.push("block decomposition", "T_a·A_x = Σ_y X A_y Y", decomp, tol);
    r.push("block orthogonality", "Y_z X_y = δ_zy 1", orth, tol);
    Ok((CategoryAction { multiplicity: mult, tensors }, r))
}

/// |ψ⟩ = O_Λ|ψ_A⟩ at L sites; the flag is set when O_Λ annihilates the input.
pub fn invariant_state_via_lambda(a: &Mps, rep: &CategoryMpoRep, len: usize) -> Result<(Vec<C64>, bool)> {
    if rep.phys_dim().checked_pow(len as u32).map_or(true, |x| x > DENSE_GUARD) {
        return Err(Error::SizeGuard(format!("d^L > {DENSE_GUARD}")));
    }
    let lam = rep.dense_lambda(len)?;
    let psi = nalgebra::DVector::from_column_slice(&a.dense(len));
    let out = lam * &psi;
    let zero = out.norm() < 1e-12 * psi.norm().max(1.0);
    Ok((out.as_slice().to_vec(), zero))
}

/// Blocks A_x = T_x·p for a product state p: the action table equals N.
pub fn fibonacci_block_fixture(p: &[C64]) -> (CategoryMpoRep, Vec<Mps>) {
    let rep = CategoryMpoRep::fibonacci();
    let prod = Mps::new(p.iter().map(|z| Mat::from_element(1, 1, *z)).collect()).expect("product MPS");
    let blocks = (0..2)
        .map(|x| Mps::new(apply_mpo_tensor(rep.tensor(x), &prod).expect("dims")).expect("block"))
        .collect();
    (rep, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_dims() {
        let cat = FusionCategory::fibonacci();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((cat.dim(1) - 1.6180339887).abs() < 1e-9);
        assert!((cat.dim(1) - phi).abs() < 1e-12);
        assert!((cat.total_dim_sq() - (2.0 + phi)).abs() < 1e-12);
    }

    #[test]
    fn trivial_and_group_categories() {
        let t = FusionCategory::trivial();
        assert_eq!(t.dims(), &[1.0]);
        assert_eq!(t.lambda_weights(), vec![1.0]);
        let s3 = FusionCategory::from_group(&FiniteGroup::symmetric3());
        assert!((s3.total_dim_sq() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn axioms_named_on_failure() {
        let mut data = FusionCategory::fibonacci().data().clone();
        data.n[1][1][1] = 2;
        assert!(matches!(FusionCategory::validate(&data), Err(Error::InvalidCategory(s)) if s.contains("multiplicity")));
        let mut data = FusionCategory::fibonacci().data().clone();
        data.n[1][1][0] = 0;
        assert!(FusionCategory::validate(&data).is_err());
    }

    #[test]
    fn f_matrix_is_involutive() {
        let f = Mat::from_fn(2, 2, |e, g| c(fibonacci_f(1, 1, 1, 1, e, g)));
        assert!((&f * &f - identity(2)).norm() < 1e-14);
    }

    #[test]
    fn fibonacci_mpo_algebra() {
        let rep = CategoryMpoRep::fibonacci();
        for len in 1..=4 {
            let r = rep.verify_dense(len, 1e-9).unwrap();
            assert!(r.all_pass(), "L={len}: {:?}", r.records);
        }
    }
}
