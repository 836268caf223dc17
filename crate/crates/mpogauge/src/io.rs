//! JSON bundles. Complex numbers are `[re, im]` pairs; matrices and tensors
//! use the tensor schema `{"shape", "labels", "data"}`.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::category::{CategoryData, CategoryMpoRep, FusionCategory};
use crate::error::{Error, Result};
use crate::fusion::FusionData;
use crate::gauging::GaugedState;
use crate::group::{Cochain2, Cocycle3, FiniteGroup, GroupJson};
use crate::linalg::Mat;
use crate::mpo::{MpoGroupRep, RepKind};
use crate::mps::{ActionTensorSet, GaugedMps, Mps};
use crate::tensor::Tensor;
use crate::C64;

pub type Pair = [f64; 2];

pub fn encode(z: &[C64]) -> Vec<Pair> {
    z.iter().map(|z| [z.re, z.im]).collect()
}

pub fn decode(p: &[Pair]) -> Vec<C64> {
    p.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

fn mat_tensor(m: &Mat) -> Tensor {
    Tensor::from_matrix(m, ["row", "col"]).expect("matrix labels")
}

fn tensor_mat(t: &Tensor) -> Result<Mat> {
    t.to_matrix()
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::InvalidTensor(format!("cannot read {}: {e}", path.as_ref().display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path.as_ref(), text)
        .map_err(|e| Error::InvalidTensor(format!("cannot write {}: {e}", path.as_ref().display())))
}

pub fn cocycle_to_json(w: &Cocycle3) -> Vec<Pair> {
    encode(w.values())
}

pub fn cocycle_from_json(n: usize, p: &[Pair]) -> Result<Cocycle3> {
    Cocycle3::from_values(n, decode(p))
}

/// A group MPO representation or a category MPO representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Bundle {
    GroupRep {
        group: GroupJson,
        kind: String,
        chi: Vec<usize>,
        tensors: Vec<Tensor>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        u: Option<Vec<Tensor>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cocycle: Option<Vec<Pair>>,
    },
    CategoryRep {
        category: CategoryData,
        /// Emitted for reference, never read.
        #[serde(default)]
        dims: Vec<f64>,
        chi: Vec<usize>,
        tensors: Vec<Tensor>,
    },
}

impl Bundle {
    pub fn from_group_rep(rep: &MpoGroupRep) -> Self {
        let (kind, u, cocycle) = match rep.kind() {
            RepKind::OnSite { u } => ("onsite", Some(u.iter().map(mat_tensor).collect()), None),
            RepKind::Anomalous { omega } => ("anomalous", None, Some(cocycle_to_json(omega))),
            RepKind::Custom => ("custom", None, None),
        };
        Bundle::GroupRep {
            group: rep.group().into(),
            kind: kind.into(),
            chi: rep.chis().to_vec(),
            tensors: rep.tensors().to_vec(),
            u,
            cocycle,
        }
    }

    pub fn from_category_rep(rep: &CategoryMpoRep) -> Self {
        Bundle::CategoryRep {
            category: rep.category().data().clone(),
            dims: rep.category().dims().to_vec(),
            chi: rep.chis().to_vec(),
            tensors: (0..rep.category().objects()).map(|a| rep.tensor(a).clone()).collect(),
        }
    }

    pub fn is_category(&self) -> bool {
        matches!(self, Bundle::CategoryRep { .. })
    }

    pub fn to_group_rep(&self) -> Result<MpoGroupRep> {
        let Bundle::GroupRep { group, kind, chi, tensors, u, cocycle } = self else {
            return Err(Error::InvalidTensor("bundle holds a category representation".into()));
        };
        let grp = FiniteGroup::try_from(group.clone())?;
        let kind = match kind.as_str() {
            "onsite" => {
                let u = u.as_ref().ok_or_else(|| Error::InvalidTensor("on-site bundle without u".into()))?;
                RepKind::OnSite { u: u.iter().map(tensor_mat).collect::<Result<_>>()? }
            }
            "anomalous" => {
                let p = cocycle.as_ref().ok_or_else(|| Error::InvalidCocycle("anomalous bundle without cocycle".into()))?;
                RepKind::Anomalous { omega: cocycle_from_json(grp.order(), p)? }
            }
            _ => RepKind::Custom,
        };
        let rep = MpoGroupRep::from_tensors(grp, tensors.clone(), kind)?;
        if rep.chis() != chi.as_slice() {
            return Err(Error::InvalidTensor(format!("block dimensions {chi:?} disagree with tensors {:?}", rep.chis())));
        }
        Ok(rep)
    }

    pub fn to_category_rep(&self) -> Result<CategoryMpoRep> {
        let Bundle::CategoryRep { category, chi, tensors, .. } = self else {
            return Err(Error::InvalidCategory("bundle holds a group representation".into()));
        };
        let cat = FusionCategory::validate(category)?;
        let tensors = tensors.iter().map(|t| t.permute(&["l", "r", "o", "i"])).collect::<Result<Vec<_>>>()?;
        let rep = CategoryMpoRep::new(cat, tensors)?;
        if rep.chis() != chi.as_slice() {
            return Err(Error::InvalidTensor(format!("block dimensions {chi:?} disagree with tensors {:?}", rep.chis())));
        }
        Ok(rep)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairTensors {
    pub g: usize,
    pub h: usize,
    pub w: Tensor,
    pub winv: Tensor,
}

/// Fusion data: per-pair W and W⁻¹, ω, β, v and Z.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FusionBundle {
    pub pairs: Vec<PairTensors>,
    pub omega: Vec<Pair>,
    pub beta: Vec<Pair>,
    #[serde(default)]
    pub v: Option<Vec<Pair>>,
    #[serde(default)]
    pub z: Option<Vec<Tensor>>,
    pub strict: bool,
}

impl FusionBundle {
    pub fn from_fusion(f: &FusionData) -> Self {
        let grp = f.group();
        let pairs = grp
            .elements()
            .flat_map(|g| grp.elements().map(move |h| (g, h)))
            .map(|(g, h)| PairTensors { g, h, w: mat_tensor(f.w(g, h)), winv: mat_tensor(f.winv(g, h)) })
            .collect();
        FusionBundle {
            pairs,
            omega: encode(f.omega().values()),
            beta: encode(f.beta().values()),
            v: f.unit_vector().map(encode),
            z: f.z_matrices().map(|z| z.iter().map(mat_tensor).collect()),
            strict: f.is_strict(),
        }
    }

    pub fn to_fusion(&self, rep: &MpoGroupRep) -> Result<FusionData> {
        let n = rep.group().order();
        let mut w = vec![Mat::zeros(0, 0); n * n];
        let mut winv = vec![Mat::zeros(0, 0); n * n];
        if self.pairs.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: self.pairs.len() });
        }
        for p in &self.pairs {
            if p.g >= n || p.h >= n {
                return Err(Error::InvalidGroup(format!("pair ({}, {}) out of range", p.g, p.h)));
            }
            w[p.g * n + p.h] = tensor_mat(&p.w)?;
            winv[p.g * n + p.h] = tensor_mat(&p.winv)?;
        }
        let beta = decode(&self.beta);
        if beta.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: beta.len() });
        }
        let beta = Cochain2::from_fn(n, |g, h| beta[g * n + h]);
        let z = self.z.as_ref().map(|z| z.iter().map(tensor_mat).collect::<Result<Vec<_>>>()).transpose()?;
        FusionData::from_parts(rep, w, winv, beta, self.v.as_deref().map(decode), z, self.strict)
    }
}

/// Reads a state vector stored as a tensor; the data is taken row-major.
pub fn read_state(path: impl AsRef<Path>) -> Result<Vec<C64>> {
    let t: Tensor = read_json(path)?;
    Ok(t.into_data())
}

pub fn state_tensor(v: &[C64]) -> Tensor {
    Tensor::new(&[v.len()], &["psi"], v.to_vec()).expect("vector shape")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaugedStateJson {
    pub vector: Tensor,
    pub norm: f64,
    pub annihilated: bool,
    pub provenance: String,
}

impl From<&GaugedState> for GaugedStateJson {
    fn from(s: &GaugedState) -> Self {
        GaugedStateJson { vector: state_tensor(&s.vector), norm: s.norm, annihilated: s.annihilated, provenance: s.provenance.clone() }
    }
}

/// A translation-invariant MPS: tensor with axes (l, r, p) and a length.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MpsJson {
    pub a: Tensor,
    pub length: usize,
}

impl MpsJson {
    pub fn to_mps(&self) -> Result<Mps> {
        Mps::from_tensor(&self.a)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionTensorsJson {
    pub x: Vec<Tensor>,
    pub y: Vec<Tensor>,
    pub l: Vec<Pair>,
}

impl From<&ActionTensorSet> for ActionTensorsJson {
    fn from(a: &ActionTensorSet) -> Self {
        let n = a.l_symbols().order();
        ActionTensorsJson {
            x: (0..n).map(|g| mat_tensor(a.x(g))).collect(),
            y: (0..n).map(|g| mat_tensor(a.y(g))).collect(),
            l: encode(a.l_symbols().values()),
        }
    }
}

/// Gauged pair (Ã, B) as per-physical-index matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaugedMpsJson {
    pub matter: Vec<Tensor>,
    pub edge: Vec<Tensor>,
}

impl From<&GaugedMps> for GaugedMpsJson {
    fn from(g: &GaugedMps) -> Self {
        GaugedMpsJson { matter: g.matter.iter().map(mat_tensor).collect(), edge: g.edge.iter().map(mat_tensor).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    #[test]
    fn group_bundle_round_trip() {
        for rep in [z2_onsite(), z2_anomalous(), s3_onsite()] {
            let b = Bundle::from_group_rep(&rep);
            let text = serde_json::to_string(&b).unwrap();
            let back: Bundle = serde_json::from_str(&text).unwrap();
            let rep2 = back.to_group_rep().unwrap();
            assert_eq!(rep2.chis(), rep.chis());
            for g in rep.group().elements() {
                assert_eq!(rep2.tensor(g).distance(rep.tensor(g)).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn category_bundle_round_trip() {
        let rep = CategoryMpoRep::fibonacci();
        let text = serde_json::to_string(&Bundle::from_category_rep(&rep)).unwrap();
        let back: Bundle = serde_json::from_str(&text).unwrap();
        assert!(back.is_category());
        assert_eq!(back.to_category_rep().unwrap().chis(), &[2, 3]);
        assert!(back.to_group_rep().is_err());
    }

    #[test]
    fn fusion_bundle_round_trip() {
        let f = FusionData::solve_strict(&z2_label_pair_trivial()).unwrap();
        let text = serde_json::to_string(&FusionBundle::from_fusion(&f)).unwrap();
        let back: FusionBundle = serde_json::from_str(&text).unwrap();
        let g = back.to_fusion(f.rep()).unwrap();
        assert!(g.is_strict());
        assert!(g.verify(1e-9).unwrap().all_pass());
        for (a, b) in g.omega().values().iter().zip(f.omega().values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn chi_mismatch_rejected() {
        let mut b = Bundle::from_group_rep(&z2_anomalous());
        if let Bundle::GroupRep { chi, .. } = &mut b {
            chi[0] = 7;
        }
        assert!(b.to_group_rep().is_err());
    }
}
