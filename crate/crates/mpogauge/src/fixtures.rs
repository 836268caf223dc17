//! Named representations used across tests, the acceptance suite and the CLI.

use crate::error::Result;
use crate::group::{Cocycle3, FiniteGroup};
use crate::linalg::Mat;
use crate::mpo::{build_anomalous_mpo, build_onsite_mpo, regular_rep, z2_diag_rep, MpoGroupRep};

/// Z₂ with u(1) = diag(1, −1), d = 2.
pub fn z2_onsite() -> MpoGroupRep {
    build_onsite_mpo(&FiniteGroup::cyclic(2), z2_diag_rep()).expect("valid rep")
}

/// Regular representation of a group, on-site.
pub fn regular_onsite(grp: &FiniteGroup) -> MpoGroupRep {
    build_onsite_mpo(grp, regular_rep(grp)).expect("valid rep")
}

pub fn z3_onsite() -> MpoGroupRep {
    regular_onsite(&FiniteGroup::cyclic(3))
}

pub fn z4_onsite() -> MpoGroupRep {
    regular_onsite(&FiniteGroup::cyclic(4))
}

pub fn s3_onsite() -> MpoGroupRep {
    regular_onsite(&FiniteGroup::symmetric3())
}

/// Z₂ MPO carrying the nontrivial 3-cocycle class.
pub fn z2_anomalous() -> MpoGroupRep {
    build_anomalous_mpo(&FiniteGroup::cyclic(2), &Cocycle3::cyclic(2, 1)).expect("valid rep")
}

/// Z₂ built with the label-pair MPO construction and trivial cocycle: a
/// non-on-site, non-anomalous representation.
pub fn z2_label_pair_trivial() -> MpoGroupRep {
    build_anomalous_mpo(&FiniteGroup::cyclic(2), &Cocycle3::trivial(2)).expect("valid rep")
}

pub fn onsite_fixtures() -> Vec<(&'static str, MpoGroupRep)> {
    vec![("Z2", z2_onsite()), ("Z3", z3_onsite()), ("Z4", z4_onsite()), ("S3", s3_onsite())]
}

/// Every non-anomalous fixture, on-site or not.
pub fn non_anomalous_fixtures() -> Vec<(&'static str, MpoGroupRep)> {
    let mut v = onsite_fixtures();
    v.push(("Z2 label-pair", z2_label_pair_trivial()));
    v
}

pub fn group_by_name(name: &str) -> Result<FiniteGroup> {
    let lower = name.to_ascii_lowercase();
    if lower == "s3" {
        return Ok(FiniteGroup::symmetric3());
    }
    if let Some(n) = lower.strip_prefix('z').and_then(|s| s.parse::<usize>().ok()) {
        if n >= 1 {
            return Ok(FiniteGroup::cyclic(n));
        }
    }
    Err(crate::Error::InvalidGroup(format!("unknown group {name}")))
}

/// The u(g) matrices of an on-site rep, if it is one.
pub fn onsite_matrices(rep: &MpoGroupRep) -> Option<Vec<Mat>> {
    match rep.kind() {
        crate::mpo::RepKind::OnSite { u } => Some(u.clone()),
        _ => None,
    }
}
