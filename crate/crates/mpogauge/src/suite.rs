//! Verification suites and state pipelines shared by the command-line tool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::anomaly::{check_omega_overlap, renormalize_onsite, verify_localized_ops, SplitGaugeChain};
use crate::category::{verify_local_ops as verify_category_ops, CategoryChain, CategoryFusion, CategoryMpoRep};
use crate::error::{Error, Result};
use crate::fusion::FusionData;
use crate::gauging::{oracle_gauge_mpo, oracle_gauge_onsite, verify_local_ops, verify_projector, GaugeChain, GaugedState};
use crate::linalg::{diff_norm, norm, random_vector};
use crate::mpo::{realize_dense, verify_group_law, MpoGroupRep, RepKind, DENSE_GUARD};
use crate::report::Report;
use crate::C64;

/// Lengths checked at each level.
pub fn level_lengths(level: &str) -> Result<Vec<usize>> {
    match level {
        "quick" => Ok(vec![2]),
        "full" => Ok(vec![2, 3]),
        other => Err(Error::InvalidSegment(format!("unknown level {other}"))),
    }
}

fn failed(r: &mut Report, identity: &str, anchor: &str, err: &Error, tol: f64) {
    r.push(identity, anchor, f64::INFINITY, tol);
    r.meta(format!("error: {identity}"), err);
}

fn skipped(r: &mut Report, what: &str, len: usize) {
    r.meta(format!("skipped: {what} at L={len}"), "size guard");
}

/// Every identity that applies to a group MPO representation.
pub fn verify_group_rep(rep: &MpoGroupRep, lengths: &[usize], tol: f64, seed: u64) -> Report {
    let mut r = Report::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    r.meta("seed", seed);
    r.meta("phys_dim", rep.phys_dim());
    r.meta("chi", format!("{:?}", rep.chis()));
    for &len in lengths {
        if rep.phys_dim().pow(len as u32) > DENSE_GUARD {
            skipped(&mut r, "group law", len);
            continue;
        }
        match verify_group_law(rep, len, tol) {
            Ok(g) => r.extend(g),
            Err(e) => failed(&mut r, "group law", "U_g U_h = U_gh", &e, tol),
        }
    }
    let f = match FusionData::solve(rep) {
        Ok(f) => f,
        Err(e) => {
            failed(&mut r, "fusion solve", "(T_g ⊗ T_h) W_{g,h} = W_{g,h} T_gh", &e, tol);
            r.meta("anomaly_class", "undecided");
            return r;
        }
    };
    match f.verify(tol) {
        Ok(v) => r.extend(v),
        Err(e) => failed(&mut r, "fusion data", "fusion identities", &e, tol),
    }
    let trivial = f.is_trivial_class().ok();
    r.meta(
        "anomaly_class",
        match trivial {
            Some(true) => "trivial",
            Some(false) => "nontrivial",
            None => "undecided",
        },
    );
    if trivial == Some(true) {
        gauge_checks(&mut r, &f, lengths, tol, &mut rng);
    }
    split_checks(&mut r, &f, lengths, tol, &mut rng);
    if rep.is_onsite() {
        match renormalize_onsite(&f, tol.max(1e-10)) {
            Ok(x) => r.extend(x),
            Err(e) => failed(&mut r, "on-site renormalization", "J†(ǔ_g⊗ǔ_g)J = L_g⊗u_g⊗u_g⊗L_g", &e, tol),
        }
    }
    r.sort();
    r
}

fn gauge_checks(r: &mut Report, f: &FusionData, lengths: &[usize], tol: f64, rng: &mut ChaCha8Rng) {
    let strict = match f.gauge_fix_strict() {
        Ok(s) => s,
        Err(e) => return failed(r, "strict gauge", "ω = δβ", &e, tol),
    };
    for &len in lengths {
        let chain = match GaugeChain::new(&strict, len) {
            Ok(c) => c,
            Err(Error::SizeGuard(_)) => {
                skipped(r, "gauging", len);
                continue;
            }
            Err(e) => return failed(r, "gauge chain", "gauging map", &e, tol),
        };
        r.extend(verify_projector(&chain, tol));
        match verify_local_ops(&chain, tol) {
            Ok(x) => r.extend(x),
            Err(e) => failed(r, "local operators", "û_g û_h = û_gh", &e, tol),
        }
        let psi = random_vector(chain.matter_dim(), rng);
        let Ok(gauged) = chain.gauge_state(psi.as_slice()) else { continue };
        let oracle = match f.rep().kind() {
            RepKind::OnSite { u } => oracle_gauge_onsite(f.group(), u, psi.as_slice(), len),
            _ => oracle_gauge_mpo(&strict, psi.as_slice(), len),
        };
        r.push(format!("oracle agreement L={len}"), "G ψ = Σ_{g_i} direct sum", diff_norm(&gauged.vector, &oracle), tol.min(1e-10));
        let mut absorb: f64 = 0.0;
        for g in f.group().elements() {
            let Ok(u) = realize_dense(f.rep(), g, len) else { break };
            let moved = &u * &psi;
            if let Ok(x) = chain.gauge_state(moved.as_slice()) {
                absorb = absorb.max(diff_norm(&x.vector, &gauged.vector));
            }
        }
        r.push(format!("gauge map absorbs symmetry L={len}"), "G U_g = G", absorb, tol);
    }
}

fn split_checks(r: &mut Report, f: &FusionData, lengths: &[usize], tol: f64, rng: &mut ChaCha8Rng) {
    for &len in lengths {
        let chain = match SplitGaugeChain::new(f, len) {
            Ok(c) => c,
            Err(Error::SizeGuard(_)) => {
                skipped(r, "split chain", len);
                continue;
            }
            Err(e) => return failed(r, "split chain", "ǔ_g", &e, tol),
        };
        if len == lengths[0] {
            r.extend(verify_localized_ops(&chain, tol));
        }
        let psi = random_vector(chain.matter_dim(), rng);
        if let (Ok(a), Ok(b)) = (chain.symmetrize_state(psi.as_slice(), &chain.v_state()), chain.closed_form_v(psi.as_slice())) {
            r.push(format!("symmetrization closed form L={len}"), "P(ψ⊗V) = Σ_{g_i} ⊗ T_{g_i} ψ / |G|^L", diff_norm(&a, &b), tol);
        }
        if chain.matter_dim() * chain.gauge_dim() <= 1 << 14 {
            match check_omega_overlap(&chain, tol) {
                Ok(mut x) => {
                    for rec in &mut x.records {
                        rec.identity = format!("{} L={len}", rec.identity);
                    }
                    r.extend(x)
                }
                Err(e) => failed(r, "omega overlap", "⟨Ω|P|Ω⟩ ∝ Σ_g U_g", &e, tol),
            }
        } else {
            skipped(r, "omega overlap", len);
        }
    }
}

/// Identities for a category MPO representation.
pub fn verify_category_rep(rep: &CategoryMpoRep, lengths: &[usize], tol: f64, seed: u64) -> Report {
    let mut r = Report::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    r.meta("seed", seed);
    r.meta("quantum_dims", format!("{:?}", rep.category().dims()));
    for &len in lengths {
        if rep.phys_dim().pow(len as u32) > DENSE_GUARD {
            skipped(&mut r, "dense category algebra", len);
            continue;
        }
        match rep.verify_dense(len, tol) {
            Ok(mut x) => {
                for rec in &mut x.records {
                    rec.identity = format!("{} L={len}", rec.identity);
                }
                r.extend(x)
            }
            Err(e) => failed(&mut r, "dense category algebra", "O_a O_b = Σ_c N_ab^c O_c", &e, tol),
        }
    }
    let f = match CategoryFusion::solve(rep) {
        Ok(f) => f,
        Err(e) => {
            failed(&mut r, "category fusion solve", "Σ_c W^c T_c W^c⁻¹ = T_a T_b", &e, tol);
            return r;
        }
    };
    r.extend(f.verify(tol));
    r.extend(verify_category_ops(&f, tol));
    if let Ok(chain) = CategoryChain::new(&f, lengths[0]) {
        let psi = random_vector(chain.matter_dim(), &mut rng);
        let phi = random_vector(chain.gauge_dim(), &mut rng);
        if let Ok(out) = chain.symmetrize(psi.as_slice(), phi.as_slice()) {
            r.push("symmetrized eigenvalues", "Ǒ_a^{[i]} G_φψ = d_a G_φψ", chain.eigen_residual(&out), tol.max(1e-8));
        }
    } else {
        skipped(&mut r, "category symmetrization", lengths[0]);
    }
    r.sort();
    r
}

/// Output of the gauge command.
pub struct PipelineOutput {
    pub state: GaugedState,
    pub report: Report,
}

fn local_invariance(ops: impl Fn(usize, usize, &[C64]) -> Vec<C64>, n: usize, len: usize, state: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for g in 0..n {
        for i in 0..len {
            worst = worst.max(diff_norm(&ops(g, i, state), state));
        }
    }
    worst
}

fn finish(vector: Vec<C64>, provenance: &str, mut report: Report) -> PipelineOutput {
    let n = norm(&vector);
    let annihilated = n < 1e-9;
    report.meta("norm", format!("{n:e}"));
    report.meta("annihilated", annihilated);
    if annihilated {
        report.meta("note", "the input has no symmetric component; the output is zero");
    }
    report.sort();
    PipelineOutput { state: GaugedState { vector, norm: n, annihilated, provenance: provenance.into() }, report }
}

/// Gauging of a matter state; refuses anomalous fusion data.
pub fn gauge_pipeline(rep: &MpoGroupRep, psi: &[C64], len: usize, subgroup: Option<&[usize]>, tol: f64) -> Result<PipelineOutput> {
    let f = FusionData::solve(rep)?;
    if f.is_trivial_class()? {
        let strict = f.gauge_fix_strict()?;
        let chain = match subgroup {
            Some(s) => GaugeChain::with_subgroup(&strict, len, s)?,
            None => GaugeChain::new(&strict, len)?,
        };
        let out = chain.gauge_state(psi)?;
        let mut report = Report::new();
        report.meta("anomaly_class", "trivial");
        let mut inv: f64 = 0.0;
        for &g in chain.gauged_elems() {
            for i in 0..len {
                inv = inv.max(diff_norm(&chain.apply_local_op(g, i, &out.vector)?, &out.vector));
            }
        }
        report.push("local invariance", "û_g^{[i]} G ψ = G ψ", inv, tol);
        Ok(finish(out.vector, "gauge", report))
    } else {
        Err(Error::Anomalous)
    }
}

/// Symmetrization on the split-leg chain; accepts anomalous data. Without φ
/// the state |V⟩ is used and the closed form is checked as well.
pub fn symmetrize_pipeline(rep: &MpoGroupRep, psi: &[C64], len: usize, phi: Option<&[C64]>, tol: f64) -> Result<PipelineOutput> {
    let f = FusionData::solve(rep)?;
    let chain = SplitGaugeChain::new(&f, len)?;
    let v = chain.v_state();
    let out = chain.symmetrize_state(psi, phi.unwrap_or(&v))?;
    let mut report = Report::new();
    report.meta(
        "anomaly_class",
        match f.is_trivial_class() {
            Ok(true) => "trivial",
            Ok(false) => "nontrivial",
            Err(_) => "undecided",
        },
    );
    let inv = local_invariance(|g, i, s| chain.apply_local_op(g, i, s), rep.group().order(), len, &out);
    report.push("local invariance", "ǔ_g^{[i]} G_φ ψ = G_φ ψ", inv, tol);
    if phi.is_none() {
        report.push("closed form", "P(ψ⊗V) = Σ_{g_i} ⊗ T_{g_i} ψ / |G|^L", diff_norm(&out, &chain.closed_form_v(psi)?), tol);
    }
    Ok(finish(out, "symmetrize", report))
}

/// Category symmetrization: output is an eigenvector of every Ǒ_a^{[i]}.
pub fn symmetrize_category_pipeline(rep: &CategoryMpoRep, psi: &[C64], len: usize, phi: Option<&[C64]>, tol: f64) -> Result<PipelineOutput> {
    let f = CategoryFusion::solve(rep)?;
    let chain = CategoryChain::new(&f, len)?;
    let phi = match phi {
        Some(p) => p.to_vec(),
        None => chain.v_state()?,
    };
    let out = chain.symmetrize(psi, &phi)?;
    let mut report = Report::new();
    report.push("symmetrized eigenvalues", "Ǒ_a^{[i]} G_φψ = d_a G_φψ", chain.eigen_residual(&out), tol.max(1e-8));
    Ok(finish(out, "symmetrize", report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    #[test]
    fn z2_quick_suite_passes() {
        let r = verify_group_rep(&z2_onsite(), &[2], 1e-9, 1);
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.meta["anomaly_class"], "trivial");
    }

    #[test]
    fn anomalous_suite_reports_class() {
        let r = verify_group_rep(&z2_anomalous(), &[2], 1e-9, 1);
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.meta["anomaly_class"], "nontrivial");
        assert!(matches!(gauge_pipeline(&z2_anomalous(), &[C64::new(1.0, 0.0); 16], 2, None, 1e-9), Err(Error::Anomalous)));
    }

    #[test]
    fn fibonacci_suite_passes() {
        let r = verify_category_rep(&CategoryMpoRep::fibonacci(), &[2], 1e-9, 1);
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
    }
}
