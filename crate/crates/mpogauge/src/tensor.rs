//! Dense complex tensors with named axes.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    labels: Vec<String>,
    data: Vec<C64>,
}

/// Pairs of axis labels `(label in a, label in b)` to be summed over.
pub type AxisPairing<'a> = &'a [(&'a str, &'a str)];

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

impl Tensor {
    pub fn new<S: AsRef<str>>(shape: &[usize], labels: &[S], data: Vec<C64>) -> Result<Self> {
        if shape.len() != labels.len() {
            return Err(Error::InvalidTensor(format!(
                "{} extents but {} labels",
                shape.len(),
                labels.len()
            )));
        }
        if shape.iter().any(|&n| n == 0) {
            return Err(Error::InvalidTensor("zero extent".into()));
        }
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidTensor(format!("duplicate label `{l}`")));
            }
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::InvalidTensor(format!(
                "shape needs {n} entries, got {}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidTensor("non-finite entry".into()));
        }
        Ok(Tensor { shape: shape.to_vec(), labels, data })
    }

    pub fn zeros<S: AsRef<str>>(shape: &[usize], labels: &[S]) -> Result<Self> {
        Self::new(shape, labels, vec![C64::new(0.0, 0.0); shape.iter().product()])
    }

    pub fn from_fn<S: AsRef<str>>(
        shape: &[usize],
        labels: &[S],
        mut f: impl FnMut(&[usize]) -> C64,
    ) -> Result<Self> {
        let n: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for k in (0..shape.len()).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self::new(shape, labels, data)
    }

    pub fn from_matrix<S: AsRef<str>>(m: &Mat, labels: [S; 2]) -> Result<Self> {
        let (r, c) = m.shape();
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                data.push(m[(i, j)]);
            }
        }
        Self::new(&[r, c], &labels, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn axis(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::LabelNotFound(label.to_string()))
    }

    pub fn extent(&self, label: &str) -> Result<usize> {
        Ok(self.shape[self.axis(label)?])
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], z: C64) {
        let o = self.offset(idx);
        self.data[o] = z;
    }

    pub fn scale(&self, s: C64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            labels: self.labels.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<Tensor> {
        Tensor::new(&self.shape, labels, self.data.clone())
    }

    /// Reorders axes so that they appear in the order given by `order`.
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Tensor> {
        if order.len() != self.rank() {
            return Err(Error::InvalidPartition(format!(
                "permutation of {} axes given {} labels",
                self.rank(),
                order.len()
            )));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.axis(l.as_ref()))
            .collect::<Result<_>>()?;
        for (i, p) in perm.iter().enumerate() {
            if perm[..i].contains(p) {
                return Err(Error::InvalidPartition("repeated label".into()));
            }
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let old_strides = row_major_strides(&self.shape);
        let strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0; new_shape.len()];
        let mut src = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[src]);
            for k in (0..new_shape.len()).rev() {
                idx[k] += 1;
                src += strides[k];
                if idx[k] < new_shape[k] {
                    break;
                }
                src -= strides[k] * new_shape[k];
                idx[k] = 0;
            }
        }
        let labels: Vec<String> = perm.iter().map(|&p| self.labels[p].clone()).collect();
        Ok(Tensor { shape: new_shape, labels, data })
    }

    /// Groups `rows` and `cols` into a two-axis tensor. The new axis labels are
    /// the group labels joined by `,`.
    pub fn matricize<S: AsRef<str>>(&self, rows: &[S], cols: &[S]) -> Result<Tensor> {
        if rows.len() + cols.len() != self.rank() {
            return Err(Error::InvalidPartition(
                "rows and cols must cover every axis exactly once".into(),
            ));
        }
        let order: Vec<&str> = rows.iter().chain(cols).map(|s| s.as_ref()).collect();
        let p = self.permute(&order)?;
        let r: usize = p.shape[..rows.len()].iter().product();
        let c: usize = p.shape[rows.len()..].iter().product();
        let rl = rows.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(",");
        let cl = cols.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(",");
        Tensor::new(&[r, c], &[rl, cl], p.data)
    }

    /// Inverse of [`Tensor::matricize`]: splits the two grouped axes back into
    /// `(label, extent)` lists and restores the axis order `target`.
    pub fn dematricize<S: AsRef<str>>(
        &self,
        rows: &[(S, usize)],
        cols: &[(S, usize)],
        target: &[S],
    ) -> Result<Tensor> {
        let shape: Vec<usize> = rows.iter().chain(cols).map(|(_, n)| *n).collect();
        let labels: Vec<&str> = rows.iter().chain(cols).map(|(l, _)| l.as_ref()).collect();
        if self.rank() != 2 || shape.iter().product::<usize>() != self.len() {
            return Err(Error::InvalidPartition("extents do not match matrix".into()));
        }
        Tensor::new(&shape, &labels, self.data.clone())?.permute(target)
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        if self.rank() != 2 {
            return Err(Error::InvalidTensor(format!("rank {} is not a matrix", self.rank())));
        }
        Ok(Mat::from_row_slice(self.shape[0], self.shape[1], &self.data))
    }

    /// Sums over the paired axes; result axes are the unpaired axes of `self`
    /// followed by those of `other`.
    pub fn contract(&self, other: &Tensor, pairing: AxisPairing) -> Result<Tensor> {
        for (i, (la, lb)) in pairing.iter().enumerate() {
            if pairing[..i].iter().any(|(a, b)| a == la || b == lb) {
                return Err(Error::InvalidPartition(format!("label paired twice: {la}/{lb}")));
            }
            let (na, nb) = (self.extent(la)?, other.extent(lb)?);
            if na != nb {
                return Err(Error::ExtentMismatch {
                    label: format!("{la}/{lb}"),
                    left: na,
                    right: nb,
                });
            }
        }
        let free_a: Vec<&str> = self
            .labels
            .iter()
            .map(|s| s.as_str())
            .filter(|l| !pairing.iter().any(|(a, _)| a == l))
            .collect();
        let free_b: Vec<&str> = other
            .labels
            .iter()
            .map(|s| s.as_str())
            .filter(|l| !pairing.iter().any(|(_, b)| b == l))
            .collect();
        let pa: Vec<&str> = pairing.iter().map(|(a, _)| *a).collect();
        let pb: Vec<&str> = pairing.iter().map(|(_, b)| *b).collect();
        let ma = self.matricize(&free_a, &pa)?.to_matrix()?;
        let mb = other.matricize(&pb, &free_b)?.to_matrix()?;
        let prod = ma * mb;
        let mut shape: Vec<usize> = free_a.iter().map(|l| self.extent(l).unwrap()).collect();
        shape.extend(free_b.iter().map(|l| other.extent(l).unwrap()));
        let mut labels: Vec<String> = free_a.iter().map(|s| s.to_string()).collect();
        labels.extend(free_b.iter().map(|s| s.to_string()));
        if shape.is_empty() {
            return Tensor::new(&[1], &["scalar"], vec![prod[(0, 0)]]);
        }
        let (r, c) = prod.shape();
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                data.push(prod[(i, j)]);
            }
        }
        Tensor::new(&shape, &labels, data)
    }

    /// Frobenius distance after aligning `other`'s axes to this tensor's labels.
    pub fn distance(&self, other: &Tensor) -> Result<f64> {
        let b = other.permute(&self.labels)?;
        if b.shape != self.shape {
            return Err(Error::ShapeMismatch(self.shape.clone(), b.shape.clone()));
        }
        Ok(self
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    shape: Vec<usize>,
    labels: Vec<String>,
    data: Vec<[f64; 2]>,
}

impl Serialize for Tensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson {
            shape: self.shape.clone(),
            labels: self.labels.clone(),
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TensorJson::deserialize(d)?;
        let data = raw.data.iter().map(|p| C64::new(p[0], p[1])).collect();
        Tensor::new(&raw.shape, &raw.labels, data).map_err(serde::de::Error::custom)
    }
}

/// Moore–Penrose pseudo-inverse; singular values below `tol·σ_max` are dropped.
pub fn pseudo_inverse(m: &Tensor, tol: f64) -> Result<Tensor> {
    let mat = m.to_matrix()?;
    let pinv = crate::linalg::pinv(&mat, tol);
    let l = m.labels();
    Tensor::from_matrix(&pinv, [l[1].clone(), l[0].clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random(shape: &[usize], labels: &[&str], rng: &mut ChaCha8Rng) -> Tensor {
        Tensor::from_fn(shape, labels, |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .unwrap()
    }

    #[test]
    fn identity_contraction_leaves_vector() {
        let id = Tensor::from_fn(&[2, 2], &["l", "r"], |i| c((i[0] == i[1]) as u8 as f64)).unwrap();
        let v = Tensor::new(&[2], &["l"], vec![c(3.0), C64::new(0.0, 2.0)]).unwrap();
        let out = id.contract(&v, &[("r", "l")]).unwrap();
        assert_eq!(out.data(), v.data());
    }

    #[test]
    fn pauli_x_squares_to_identity() {
        let x = Tensor::new(&[2, 2], &["a", "b"], vec![c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap();
        let y = x.relabel(&["b2", "c"]).unwrap();
        let out = x.contract(&y, &[("b", "b2")]).unwrap();
        assert_eq!(out.data(), &[c(1.0), c(0.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn contraction_matches_loop_nest() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(&[3, 4, 2], &["i", "j", "k"], &mut rng);
        let b = random(&[2, 5], &["k", "m"], &mut rng);
        let out = a.contract(&b, &[("k", "k")]).unwrap();
        assert_eq!(out.shape(), &[3, 4, 5]);
        for i in 0..3 {
            for j in 0..4 {
                for m in 0..5 {
                    let mut s = C64::new(0.0, 0.0);
                    for k in 0..2 {
                        s += a.get(&[i, j, k]) * b.get(&[k, m]);
                    }
                    assert!((out.get(&[i, j, m]) - s).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn contraction_errors() {
        let a = Tensor::zeros(&[2, 3], &["a", "b"]).unwrap();
        let b = Tensor::zeros(&[2, 3], &["c", "d"]).unwrap();
        assert!(matches!(a.contract(&b, &[("x", "c")]), Err(Error::LabelNotFound(_))));
        assert!(matches!(a.contract(&b, &[("b", "c")]), Err(Error::ExtentMismatch { .. })));
    }

    #[test]
    fn matricize_shapes_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random(&[2, 3, 4], &["a", "b", "c"], &mut rng);
        let m = t.matricize(&["a"], &["b", "c"]).unwrap();
        assert_eq!(m.shape(), &[2, 12]);
        let back = m
            .dematricize(&[("a", 2)], &[("b", 3), ("c", 4)], &["a", "b", "c"])
            .unwrap();
        assert_eq!(back, t);
        let m2 = t.matricize(&["c", "a"], &["b"]).unwrap();
        let back2 = m2
            .dematricize(&[("c", 4), ("a", 2)], &[("b", 3)], &["a", "b", "c"])
            .unwrap();
        assert_eq!(back2, t);
    }

    #[test]
    fn matricized_delta_has_two_entries() {
        let d = Tensor::from_fn(&[2, 2, 2], &["i", "j", "k"], |x| {
            c((x[0] == x[1] && x[1] == x[2]) as u8 as f64)
        })
        .unwrap();
        let m = d.matricize(&["i"], &["j", "k"]).unwrap();
        let ones: Vec<usize> =
            (0..m.len()).filter(|&n| m.data()[n] == c(1.0)).collect();
        assert_eq!(ones, vec![0, 7]);
        assert!(matches!(d.matricize(&["i"], &["j"]), Err(Error::InvalidPartition(_))));
    }

    #[test]
    fn pseudo_inverse_examples() {
        let id = Tensor::from_fn(&[3, 3], &["r", "c"], |i| c((i[0] == i[1]) as u8 as f64)).unwrap();
        let p = pseudo_inverse(&id, 1e-10).unwrap();
        assert!(p.relabel(&["r", "c"]).unwrap().distance(&id).unwrap() < 1e-14);
        let d = Tensor::new(&[2, 2], &["r", "c"], vec![c(2.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let p = pseudo_inverse(&d, 1e-10).unwrap();
        assert!((p.get(&[0, 0]) - c(0.5)).norm() < 1e-14);
        assert!(p.get(&[1, 1]).norm() < 1e-14);
    }

    #[test]
    fn pseudo_inverse_penrose_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&[4, 3], &["i", "k"], &mut rng).to_matrix().unwrap();
        let b = random(&[3, 6], &["k", "j"], &mut rng).to_matrix().unwrap();
        let m = &a * &b;
        let t = Tensor::from_matrix(&m, ["r", "c"]).unwrap();
        let p = pseudo_inverse(&t, 1e-10).unwrap().to_matrix().unwrap();
        let scale = m.norm();
        assert!((&m * &p * &m - &m).norm() < 1e-10 * scale);
        assert!((&p * &m * &p - &p).norm() < 1e-10 * p.norm());
        let mp = &m * &p;
        let pm = &p * &m;
        assert!((mp.adjoint() - &mp).norm() < 1e-10);
        assert!((pm.adjoint() - &pm).norm() < 1e-10);
    }

    #[test]
    fn distance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(&[2, 3], &["x", "y"], &mut rng);
        assert_eq!(a.distance(&a).unwrap(), 0.0);
        let z = Tensor::zeros(&[2], &["x"]).unwrap();
        let e = Tensor::new(&[2], &["x"], vec![c(0.0), c(1.0)]).unwrap();
        assert_eq!(z.distance(&e).unwrap(), 1.0);
        let b = random(&[2, 3], &["x", "y"], &mut rng);
        let oracle: f64 = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(p, q)| (p.re - q.re).powi(2) + (p.im - q.im).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((a.distance(&b).unwrap() - oracle).abs() < 1e-12);
        let bt = b.permute(&["y", "x"]).unwrap();
        assert!((a.distance(&bt).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(&[2, 3], &["x", "y"], &mut rng);
        let s = serde_json::to_string(&a).unwrap();
        let b: Tensor = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<Tensor>(r#"{"shape":[2],"labels":["a"],"data":[[1,0]]}"#).is_err());
    }
}
