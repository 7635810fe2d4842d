//! Dense state-vector reference for cross-checking the sparse simulator.
//!
//! Everything here works on a plain `Vec<Complex64>` indexed in mixed radix
//! (first register most significant) and is written without reference to the
//! sparse implementation. Only suitable for small total dimensions.

use num_complex::Complex64;

pub type C = Complex64;

pub fn cx(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    pub dims: Vec<usize>,
    pub amps: Vec<C>,
}

impl DenseState {
    pub fn zeros(dims: &[usize]) -> Self {
        let total = dims.iter().product();
        DenseState {
            dims: dims.to_vec(),
            amps: vec![C::new(0.0, 0.0); total],
        }
    }

    pub fn basis(dims: &[usize], labels: &[u32]) -> Self {
        let mut s = Self::zeros(dims);
        let i = s.index(labels);
        s.amps[i] = C::new(1.0, 0.0);
        s
    }

    /// Sums the given terms; no normalization.
    pub fn from_terms<'a>(dims: &[usize], terms: impl IntoIterator<Item = (&'a [u32], C)>) -> Self {
        let mut s = Self::zeros(dims);
        for (labels, a) in terms {
            let i = s.index(labels);
            s.amps[i] += a;
        }
        s
    }

    pub fn total(&self) -> usize {
        self.amps.len()
    }

    pub fn index(&self, labels: &[u32]) -> usize {
        assert_eq!(labels.len(), self.dims.len());
        let mut idx = 0;
        for (l, d) in labels.iter().zip(&self.dims) {
            assert!((*l as usize) < *d);
            idx = idx * d + *l as usize;
        }
        idx
    }

    pub fn labels(&self, mut idx: usize) -> Vec<u32> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = (idx % self.dims[k]) as u32;
            idx /= self.dims[k];
        }
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        for a in &mut self.amps {
            *a /= n;
        }
    }

    /// Applies the operator that acts as `m` (row-major over the mixed-radix
    /// index of `targets`) on every basis vector whose `controls` match, and
    /// as the identity elsewhere.
    pub fn apply(&mut self, controls: &[(usize, u32)], targets: &[usize], m: &[C]) {
        let tdims: Vec<usize> = targets.iter().map(|&t| self.dims[t]).collect();
        let side: usize = tdims.iter().product();
        assert_eq!(m.len(), side * side, "operator size");
        let mut out = vec![C::new(0.0, 0.0); self.total()];
        for j in 0..self.total() {
            let a = self.amps[j];
            if a == C::new(0.0, 0.0) {
                continue;
            }
            let lj = self.labels(j);
            if !controls.iter().all(|&(p, v)| lj[p] == v) {
                out[j] += a;
                continue;
            }
            let mut col = 0;
            for (&t, d) in targets.iter().zip(&tdims) {
                col = col * d + lj[t] as usize;
            }
            for row in 0..side {
                let coeff = m[row * side + col];
                if coeff == C::new(0.0, 0.0) {
                    continue;
                }
                let mut li = lj.clone();
                let mut r = row;
                for k in (0..targets.len()).rev() {
                    li[targets[k]] = (r % tdims[k]) as u32;
                    r /= tdims[k];
                }
                let i = self.index(&li);
                out[i] += coeff * a;
            }
        }
        self.amps = out;
    }

    /// Applies a basis permutation given as a function on target labels.
    pub fn apply_perm(
        &mut self,
        controls: &[(usize, u32)],
        targets: &[usize],
        f: impl Fn(&[u32]) -> Vec<u32>,
    ) {
        let tdims: Vec<usize> = targets.iter().map(|&t| self.dims[t]).collect();
        let m = permutation_matrix(&tdims, f);
        self.apply(controls, targets, &m);
    }

    pub fn inner(&self, other: &DenseState) -> C {
        assert_eq!(self.dims, other.dims);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &DenseState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Probability of every outcome on `sites` (zero outcomes included).
    pub fn marginal(&self, sites: &[usize]) -> Vec<(Vec<u32>, f64)> {
        let sdims: Vec<usize> = sites.iter().map(|&s| self.dims[s]).collect();
        let sub = DenseState::zeros(&sdims);
        let mut probs = vec![0.0; sub.total()];
        for i in 0..self.total() {
            let l = self.labels(i);
            let key: Vec<u32> = sites.iter().map(|&s| l[s]).collect();
            probs[sub.index(&key)] += self.amps[i].norm_sqr();
        }
        probs
            .into_iter()
            .enumerate()
            .map(|(k, p)| (sub.labels(k), p))
            .collect()
    }

    /// Projects `sites` onto `outcome`, drops them, renormalizes.
    pub fn project(&self, sites: &[usize], outcome: &[u32]) -> (DenseState, f64) {
        let rest: Vec<usize> = (0..self.dims.len())
            .filter(|k| !sites.contains(k))
            .collect();
        let rdims: Vec<usize> = rest.iter().map(|&k| self.dims[k]).collect();
        let mut out = DenseState::zeros(&rdims);
        for i in 0..self.total() {
            let l = self.labels(i);
            if sites.iter().zip(outcome).all(|(&s, &v)| l[s] == v) {
                let key: Vec<u32> = rest.iter().map(|&k| l[k]).collect();
                let j = out.index(&key);
                out.amps[j] += self.amps[i];
            }
        }
        let p = out.norm_sqr();
        if p > 0.0 {
            out.normalize();
        }
        (out, p)
    }

    pub fn tensor(&self, other: &DenseState) -> DenseState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = Vec::with_capacity(self.total() * other.total());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        DenseState { dims, amps }
    }
}

/// Full matrix of a basis permutation over registers of dimensions `dims`.
pub fn permutation_matrix(dims: &[usize], f: impl Fn(&[u32]) -> Vec<u32>) -> Vec<C> {
    let helper = DenseState::zeros(dims);
    let side = helper.total();
    let mut m = vec![C::new(0.0, 0.0); side * side];
    for col in 0..side {
        let row = helper.index(&f(&helper.labels(col)));
        m[row * side + col] = C::new(1.0, 0.0);
    }
    m
}

pub fn kron(a: &[C], b: &[C]) -> Vec<C> {
    let na = (a.len() as f64).sqrt() as usize;
    let nb = (b.len() as f64).sqrt() as usize;
    let n = na * nb;
    let mut out = vec![C::new(0.0, 0.0); n * n];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k) * n + j * nb + l] = a[i * na + j] * b[k * nb + l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &[C], b: &[C]) -> Vec<C> {
    let n = (a.len() as f64).sqrt() as usize;
    let mut out = vec![C::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn identity(n: usize) -> Vec<C> {
    let mut m = vec![C::new(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = C::new(1.0, 0.0);
    }
    m
}

pub fn pauli_x() -> Vec<C> {
    vec![cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)]
}

pub fn pauli_z() -> Vec<C> {
    vec![cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0)]
}

pub fn hadamard() -> Vec<C> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![cx(h, 0.0), cx(h, 0.0), cx(h, 0.0), cx(-h, 0.0)]
}

pub fn phase_s() -> Vec<C> {
    vec![cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 1.0)]
}

/// Haar-ish random unitary from Gram-Schmidt on a matrix of the given entries.
pub fn gram_schmidt(side: usize, mut entry: impl FnMut() -> C) -> Vec<C> {
    let mut cols: Vec<Vec<C>> = Vec::with_capacity(side);
    while cols.len() < side {
        let mut v: Vec<C> = (0..side).map(|_| entry()).collect();
        for u in &cols {
            let proj: C = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-6 {
            continue;
        }
        cols.push(v.into_iter().map(|x| x / n).collect());
    }
    let mut m = vec![C::new(0.0, 0.0); side * side];
    for (j, col) in cols.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            m[i * side + j] = *x;
        }
    }
    m
}
