//! Finite groups as multiplication tables, and phase-valued cochains on them.

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Finite group with elements `0..n`; `0` is always the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inv: Vec<usize>,
    names: Vec<String>,
}

impl FiniteGroup {
    pub fn new(table: Vec<Vec<usize>>, names: Option<Vec<String>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGroup("table must be square and non-empty".into()));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(Error::InvalidGroup("entry out of range".into()));
        }
        for g in 0..n {
            if table[0][g] != g || table[g][0] != g {
                return Err(Error::InvalidGroup("0 is not a two-sided identity".into()));
            }
        }
        let mut inv = vec![usize::MAX; n];
        for g in 0..n {
            match (0..n).find(|&h| table[g][h] == 0 && table[h][g] == 0) {
                Some(h) => inv[g] = h,
                None => return Err(Error::InvalidGroup(format!("element {g} has no inverse"))),
            }
        }
        for g in 0..n {
            for h in 0..n {
                for k in 0..n {
                    if table[table[g][h]][k] != table[g][table[h][k]] {
                        return Err(Error::InvalidGroup(format!(
                            "not associative at ({g},{h},{k})"
                        )));
                    }
                }
            }
        }
        let names = match names {
            Some(v) if v.len() == n => v,
            Some(_) => return Err(Error::InvalidGroup("names length differs from order".into())),
            None => (0..n).map(|g| g.to_string()).collect(),
        };
        Ok(FiniteGroup { table, inv, names })
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::new(table, None).expect("cyclic group table is valid")
    }

    /// Dihedral group of order 2n; label `k + n·m` stands for rᵏsᵐ.
    pub fn dihedral(n: usize) -> Self {
        let mul = |a: usize, b: usize| {
            let (k1, m1) = (a % n, a / n);
            let (k2, m2) = (b % n, b / n);
            let k = if m1 == 0 { (k1 + k2) % n } else { (k1 + n - k2) % n };
            k + n * ((m1 + m2) % 2)
        };
        let table = (0..2 * n).map(|a| (0..2 * n).map(|b| mul(a, b)).collect()).collect();
        Self::new(table, None).expect("dihedral group table is valid")
    }

    /// Permutations of three points in lexicographic order, identity first.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        // (a·b)(x) = a(b(x))
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| idx([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        let names = perms.iter().map(|p| format!("{}{}{}", p[0], p[1], p[2])).collect();
        Self::new(table, Some(names)).expect("S3 table is valid")
    }

    /// Direct product; label `a·|H| + b` stands for (a, b).
    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (na, nb) = (a.order(), b.order());
        let table = (0..na * nb)
            .map(|x| {
                (0..na * nb)
                    .map(|y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb))
                    .collect()
            })
            .collect();
        Self::new(table, None).expect("product of groups is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn is_subgroup(&self, sub: &[usize]) -> bool {
        !sub.is_empty()
            && sub.contains(&0)
            && sub.iter().all(|&x| x < self.order())
            && sub.iter().all(|&a| sub.iter().all(|&b| sub.contains(&self.mul(a, self.inv(b)))))
    }

    pub fn is_normal(&self, sub: &[usize]) -> bool {
        self.is_subgroup(sub)
            && self
                .elements()
                .all(|g| sub.iter().all(|&n| sub.contains(&self.mul(self.mul(g, n), self.inv(g)))))
    }

    /// All subgroups, each sorted, found by exhaustive subset search.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        assert!(n <= 20, "subset search limited to small groups");
        (0u32..1 << n)
            .filter(|m| m & 1 == 1)
            .map(|m| (0..n).filter(|&g| m >> g & 1 == 1).collect::<Vec<_>>())
            .filter(|s| self.is_subgroup(s))
            .collect()
    }

    /// Quotient by a normal subgroup together with the coset map g ↦ [g].
    /// Cosets are labelled in order of their smallest element.
    pub fn quotient(&self, sub: &[usize]) -> Result<(FiniteGroup, Vec<usize>)> {
        if !self.is_subgroup(sub) {
            return Err(Error::NotSubgroup);
        }
        if !self.is_normal(sub) {
            return Err(Error::NotNormal);
        }
        let mut coset = vec![usize::MAX; self.order()];
        let mut reps = Vec::new();
        for g in self.elements() {
            if coset[g] == usize::MAX {
                for &n in sub {
                    coset[self.mul(g, n)] = reps.len();
                }
                reps.push(g);
            }
        }
        let table = reps
            .iter()
            .map(|&a| reps.iter().map(|&b| coset[self.mul(a, b)]).collect())
            .collect();
        Ok((FiniteGroup::new(table, None)?, coset))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    pub names: Vec<String>,
}

impl From<&FiniteGroup> for GroupJson {
    fn from(g: &FiniteGroup) -> Self {
        GroupJson { order: g.order(), table: g.table.clone(), names: g.names.clone() }
    }
}

impl TryFrom<GroupJson> for FiniteGroup {
    type Error = Error;
    fn try_from(j: GroupJson) -> Result<Self> {
        if j.order != j.table.len() {
            return Err(Error::InvalidGroup("order differs from table size".into()));
        }
        FiniteGroup::new(j.table, Some(j.names))
    }
}

/// Phase table ω(g,h,k), stored densely with index (g·n + h)·n + k.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle3 {
    n: usize,
    values: Vec<C64>,
}

/// Phase table β(g,h), stored densely with index g·n + h.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain2 {
    n: usize,
    values: Vec<C64>,
}

impl Cocycle3 {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let mut values = Vec::with_capacity(n * n * n);
        for g in 0..n {
            for h in 0..n {
                for k in 0..n {
                    values.push(f(g, h, k));
                }
            }
        }
        Cocycle3 { n, values }
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_fn(n, |_, _, _| C64::new(1.0, 0.0))
    }

    pub fn from_values(n: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != n * n * n {
            return Err(Error::InvalidCocycle(format!("expected {} values", n * n * n)));
        }
        if values.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidCocycle("values must have unit modulus".into()));
        }
        Ok(Cocycle3 { n, values })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, g: usize, h: usize, k: usize) -> C64 {
        self.values[(g * self.n + h) * self.n + k]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn mul(&self, other: &Cocycle3) -> Cocycle3 {
        Cocycle3 {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn conj(&self) -> Cocycle3 {
        Cocycle3 { n: self.n, values: self.values.iter().map(|z| z.conj()).collect() }
    }

    pub fn max_deviation(&self, other: &Cocycle3) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// True if ω(e,h,k) = ω(g,e,k) = ω(g,h,e) = 1.
    pub fn is_normalized(&self, tol: f64) -> bool {
        let one = C64::new(1.0, 0.0);
        (0..self.n).all(|a| {
            (0..self.n).all(|b| {
                (self.get(0, a, b) - one).norm() < tol
                    && (self.get(a, 0, b) - one).norm() < tol
                    && (self.get(a, b, 0) - one).norm() < tol
            })
        })
    }

    /// Standard representative of class `p` in H³(Z_n, U(1)) ≅ Z_n:
    /// ω(x,y,z) = exp(2πi·p·x·(y + z − [y+z]_n)/n²).
    pub fn cyclic(n: usize, p: usize) -> Self {
        Self::from_fn(n, |x, y, z| {
            let carry = (y + z) - (y + z) % n;
            C64::from_polar(1.0, 2.0 * PI * (p * x * carry) as f64 / (n * n) as f64)
        })
    }
}

impl Cochain2 {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let values = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Cochain2 { n, values }
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_fn(n, |_, _| C64::new(1.0, 0.0))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, g: usize, h: usize) -> C64 {
        self.values[g * self.n + h]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn max_deviation(&self, other: &Cochain2) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Largest violation of ω(g,h,k)ω(g,hk,l)ω(h,k,l) = ω(gh,k,l)ω(g,h,kl).
pub fn cocycle3_violation(g: &FiniteGroup, w: &Cocycle3) -> f64 {
    let n = g.order();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let lhs = w.get(a, b, c) * w.get(a, g.mul(b, c), d) * w.get(b, c, d);
                    let rhs = w.get(g.mul(a, b), c, d) * w.get(a, b, g.mul(c, d));
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    worst
}

pub fn check_cocycle3(g: &FiniteGroup, w: &Cocycle3) -> bool {
    w.order() == g.order() && cocycle3_violation(g, w) < 1e-10
}

/// ω(g,h,k) = β(g,h)·β(gh,k)·conj(β(h,k))·conj(β(g,hk)).
pub fn coboundary(g: &FiniteGroup, beta: &Cochain2) -> Cocycle3 {
    Cocycle3::from_fn(g.order(), |a, b, c| {
        beta.get(a, b) * beta.get(g.mul(a, b), c) * beta.get(b, c).conj()
            * beta.get(a, g.mul(b, c)).conj()
    })
}

/// Largest violation of c(g,h)c(gh,k) = c(h,k)c(g,hk).
pub fn cocycle2_violation(g: &FiniteGroup, c: &Cochain2) -> f64 {
    let n = g.order();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                let lhs = c.get(a, b) * c.get(g.mul(a, b), k);
                let rhs = c.get(b, k) * c.get(a, g.mul(b, k));
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    worst
}

/// Integer matrix of the map from log-phases of β to log-phases of its
/// coboundary, in the orientation of [`coboundary`].
fn coboundary_matrix3(g: &FiniteGroup) -> Vec<Vec<i128>> {
    let n = g.order();
    let mut rows = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut row = vec![0i128; n * n];
                row[a * n + b] += 1;
                row[g.mul(a, b) * n + c] += 1;
                row[b * n + c] -= 1;
                row[a * n + g.mul(b, c)] -= 1;
                rows.push(row);
            }
        }
    }
    rows
}

/// c(g,h) = α(g)α(h)/α(gh).
fn coboundary_matrix2(g: &FiniteGroup) -> Vec<Vec<i128>> {
    let n = g.order();
    let mut rows = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut row = vec![0i128; n];
            row[a] += 1;
            row[b] += 1;
            row[g.mul(a, b)] -= 1;
            rows.push(row);
        }
    }
    rows
}

/// Smith-type diagonalization U·A·V = D over the integers (divisibility chain
/// not enforced).
struct Diagonalized {
    u: Vec<Vec<i128>>,
    v: Vec<Vec<i128>>,
    diag: Vec<i128>,
}

fn diagonalize(mut a: Vec<Vec<i128>>) -> Diagonalized {
    let r = a.len();
    let c = a.first().map_or(0, |row| row.len());
    let mut u: Vec<Vec<i128>> = (0..r).map(|i| (0..r).map(|j| (i == j) as i128).collect()).collect();
    let mut v: Vec<Vec<i128>> = (0..c).map(|i| (0..c).map(|j| (i == j) as i128).collect()).collect();
    let mut diag = Vec::new();
    for t in 0..r.min(c) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..r {
            for j in t..c {
                if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..r {
                if a[i][t] != 0 {
                    let q = a[i][t].div_euclid(a[t][t]);
                    for j in 0..c {
                        a[i][j] -= q * a[t][j];
                    }
                    for j in 0..r {
                        u[i][j] -= q * u[t][j];
                    }
                    if a[i][t] != 0 {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..c {
                if a[t][j] != 0 {
                    let q = a[t][j].div_euclid(a[t][t]);
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    if a[t][j] != 0 {
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
            // Move the smallest remaining entry of row/column t to the pivot.
            let mut best = (t, t);
            for i in t + 1..r {
                if a[i][t] != 0 && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t + 1..c {
                if a[t][j] != 0 && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                a.swap(t, best.0);
                u.swap(t, best.0);
            }
            if best.1 != t {
                for row in a.iter_mut() {
                    row.swap(t, best.1);
                }
                for row in v.iter_mut() {
                    row.swap(t, best.1);
                }
            }
        }
        diag.push(a[t][t]);
    }
    Diagonalized { u, v, diag }
}

/// Solves A·b ≡ θ (mod 2π) over real b, or returns `None` if θ pairs
/// non-trivially with an integral cycle of A.
fn solve_mod_2pi(a: Vec<Vec<i128>>, theta: &[f64], tol: f64) -> Option<Vec<f64>> {
    let cols = a.first().map_or(0, |r| r.len());
    let d = diagonalize(a);
    let ut: Vec<f64> = d
        .u
        .iter()
        .map(|row| row.iter().zip(theta).map(|(&x, &t)| x as f64 * t).sum())
        .collect();
    let rank = d.diag.len();
    for &x in &ut[rank..] {
        let m = x / (2.0 * PI);
        if (m - m.round()).abs() > tol {
            return None;
        }
    }
    let mut y = vec![0.0; cols];
    for k in 0..rank {
        y[k] = ut[k] / d.diag[k] as f64;
    }
    Some(
        d.v.iter()
            .map(|row| row.iter().zip(&y).map(|(&x, &t)| x as f64 * t).sum())
            .collect(),
    )
}

/// Decides whether ω is a coboundary. Returns β with `coboundary(β) == ω`,
/// normalized so that β(e,e) = 1, or `None` if the class is nontrivial.
pub fn coboundary_trivialize(g: &FiniteGroup, w: &Cocycle3) -> Result<Option<Cochain2>> {
    if w.order() != g.order() {
        return Err(Error::InvalidCocycle("order differs from group".into()));
    }
    let viol = cocycle3_violation(g, w);
    if viol > 1e-8 {
        return Err(Error::InvalidCocycle(format!("cocycle condition violated by {viol:e}")));
    }
    let theta: Vec<f64> = w.values().iter().map(|z| z.arg()).collect();
    let Some(b) = solve_mod_2pi(coboundary_matrix3(g), &theta, 1e-6) else {
        return Ok(None);
    };
    let n = g.order();
    let b0 = b[0];
    let beta = Cochain2::from_fn(n, |a, c| C64::from_polar(1.0, b[a * n + c] - b0));
    let dev = coboundary(g, &beta).max_deviation(w);
    if dev > 1e-8 {
        return Err(Error::NoSolution(format!("trivializer residual {dev:e}")));
    }
    Ok(Some(beta))
}

/// Decides whether a 2-cocycle is of the form α(g)α(h)/α(gh); returns α.
pub fn coboundary_trivialize2(g: &FiniteGroup, c: &Cochain2) -> Result<Option<Vec<C64>>> {
    let viol = cocycle2_violation(g, c);
    if viol > 1e-8 {
        return Err(Error::InvalidCocycle(format!("2-cocycle condition violated by {viol:e}")));
    }
    let theta: Vec<f64> = c.values().iter().map(|z| z.arg()).collect();
    let Some(a) = solve_mod_2pi(coboundary_matrix2(g), &theta, 1e-6) else {
        return Ok(None);
    };
    let alpha: Vec<C64> = a.iter().map(|&x| C64::from_polar(1.0, x)).collect();
    let n = g.order();
    let mut dev: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            let z = alpha[x] * alpha[y] / alpha[g.mul(x, y)];
            dev = dev.max((z - c.get(x, y)).norm());
        }
    }
    if dev > 1e-8 {
        return Err(Error::NoSolution(format!("trivializer residual {dev:e}")));
    }
    Ok(Some(alpha))
}
