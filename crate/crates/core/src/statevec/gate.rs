use num_complex::Complex;
use num_traits::{One, Zero};

use super::layout::{mixed_index, mixed_labels, SiteId};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// How a gate acts on the joint space of its target sites.
#[derive(Clone, Debug)]
pub enum GateKind<T: Real> {
    /// Dense unitary, row-major over the mixed-radix index of the targets.
    Unitary {
        matrix: Vec<Complex<T>>,
        columns: Vec<Vec<(usize, Complex<T>)>>,
    },
    /// Bijection on the mixed-radix index of the targets.
    Permutation(Vec<usize>),
}

/// A unitary acting on a list of target sites.
#[derive(Clone, Debug)]
pub struct GateSpec<T: Real> {
    targets: Vec<SiteId>,
    dims: Vec<usize>,
    kind: GateKind<T>,
}

fn split_targets(targets: Vec<(SiteId, usize)>) -> Result<(Vec<SiteId>, Vec<usize>)> {
    let mut ids: Vec<SiteId> = Vec::with_capacity(targets.len());
    let mut dims = Vec::with_capacity(targets.len());
    for (id, dim) in targets {
        if ids.contains(&id) {
            return Err(Error::SiteClash(id.to_string()));
        }
        if dim < 2 {
            return Err(Error::BadDimension(id.to_string()));
        }
        ids.push(id);
        dims.push(dim);
    }
    Ok((ids, dims))
}

impl<T: Real> GateSpec<T> {
    /// Dense unitary over `targets`; `matrix` is row-major with side equal
    /// to the product of the target dimensions.
    pub fn unitary(targets: Vec<(SiteId, usize)>, matrix: Vec<Complex<T>>) -> Result<Self> {
        let (targets, dims) = split_targets(targets)?;
        let side: usize = dims.iter().product();
        if matrix.len() != side * side {
            return Err(Error::DimMismatch(format!(
                "matrix has {} entries, targets need {side}x{side}",
                matrix.len()
            )));
        }
        let mut worst = 0.0f64;
        for i in 0..side {
            for j in 0..side {
                let mut acc = Complex::<T>::zero();
                for r in 0..side {
                    acc += matrix[r * side + i].conj() * matrix[r * side + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(
                    (acc - Complex::new(T::lit(expect), T::zero()))
                        .norm()
                        .as_f64(),
                );
            }
        }
        if worst > T::NORM_TOL {
            return Err(Error::NotUnitary(worst));
        }
        let prune = T::lit(T::PRUNE);
        let columns = (0..side)
            .map(|j| {
                (0..side)
                    .filter_map(|i| {
                        let m = matrix[i * side + j];
                        (m.norm() >= prune).then_some((i, m))
                    })
                    .collect()
            })
            .collect();
        Ok(GateSpec {
            targets,
            dims,
            kind: GateKind::Unitary { matrix, columns },
        })
    }

    /// Permutation given as a table from input index to output index.
    pub fn permutation_table(targets: Vec<(SiteId, usize)>, table: Vec<usize>) -> Result<Self> {
        let (targets, dims) = split_targets(targets)?;
        let side: usize = dims.iter().product();
        if table.len() != side {
            return Err(Error::DimMismatch(format!(
                "table has {} entries, targets span {side}",
                table.len()
            )));
        }
        let mut seen = vec![false; side];
        for &out in &table {
            if out >= side || std::mem::replace(&mut seen[out], true) {
                return Err(Error::NotBijective);
            }
        }
        Ok(GateSpec {
            targets,
            dims,
            kind: GateKind::Permutation(table),
        })
    }

    /// Permutation given as a function on label tuples of the targets.
    pub fn permutation(
        targets: Vec<(SiteId, usize)>,
        f: impl Fn(&[u32]) -> Vec<u32>,
    ) -> Result<Self> {
        let dims: Vec<usize> = targets.iter().map(|(_, d)| *d).collect();
        let side: usize = dims.iter().product();
        let mut table = Vec::with_capacity(side);
        for idx in 0..side {
            let out = f(&mixed_labels(idx, &dims));
            if out.len() != dims.len() || out.iter().zip(&dims).any(|(l, d)| *l as usize >= *d) {
                return Err(Error::NotBijective);
            }
            table.push(mixed_index(out, &dims));
        }
        Self::permutation_table(targets, table)
    }

    pub fn targets(&self) -> &[SiteId] {
        &self.targets
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kind(&self) -> &GateKind<T> {
        &self.kind
    }

    /// Calls `f(row, coefficient)` for every nonzero entry of column `col`.
    pub(crate) fn for_each_image(&self, col: usize, mut f: impl FnMut(usize, Complex<T>)) {
        match &self.kind {
            GateKind::Unitary { columns, .. } => {
                for &(row, m) in &columns[col] {
                    f(row, m);
                }
            }
            GateKind::Permutation(table) => f(table[col], Complex::one()),
        }
    }

    // Standard gates.

    pub fn x(site: impl Into<SiteId>) -> Self {
        Self::permutation_table(vec![(site.into(), 2)], vec![1, 0]).expect("X is a bijection")
    }

    pub fn z(site: impl Into<SiteId>) -> Self {
        Self::diagonal(site, vec![Complex::one(), -Complex::<T>::one()])
    }

    pub fn s(site: impl Into<SiteId>) -> Self {
        Self::diagonal(site, vec![Complex::one(), Complex::i()])
    }

    pub fn h(site: impl Into<SiteId>) -> Self {
        Self::walsh_hadamard(site, 2)
    }

    /// Diagonal unitary on one site.
    pub fn diagonal(site: impl Into<SiteId>, phases: Vec<Complex<T>>) -> Self {
        let d = phases.len();
        let mut m = vec![Complex::zero(); d * d];
        for (i, p) in phases.into_iter().enumerate() {
            m[i * d + i] = p;
        }
        Self::unitary(vec![(site.into(), d)], m).expect("unit-modulus diagonal")
    }

    /// Hadamard transform on a register of dimension `2^m`:
    /// `H[x][y] = (-1)^{popcount(x & y)} / sqrt(dim)`.
    pub fn walsh_hadamard(site: impl Into<SiteId>, dim: usize) -> Self {
        assert!(
            dim.is_power_of_two() && dim >= 2,
            "dimension must be a power of two"
        );
        let scale = T::one() / T::lit(dim as f64).sqrt();
        let m = (0..dim * dim)
            .map(|k| {
                let sign = if ((k / dim) & (k % dim)).count_ones().is_multiple_of(2) {
                    scale
                } else {
                    -scale
                };
                Complex::new(sign, T::zero())
            })
            .collect();
        Self::unitary(vec![(site.into(), dim)], m).expect("Walsh-Hadamard is unitary")
    }

    /// `dst <- dst XOR src` on two registers of equal power-of-two dimension.
    pub fn xor_add(src: impl Into<SiteId>, dst: impl Into<SiteId>, dim: usize) -> Result<Self> {
        if !dim.is_power_of_two() {
            return Err(Error::DimMismatch(format!(
                "XOR needs a power-of-two dimension, got {dim}"
            )));
        }
        Self::permutation(vec![(src.into(), dim), (dst.into(), dim)], |l| {
            vec![l[0], l[0] ^ l[1]]
        })
    }

    /// `site <- site XOR value`.
    pub fn xor_const(site: impl Into<SiteId>, dim: usize, value: u32) -> Self {
        assert!(dim.is_power_of_two() && (value as usize) < dim);
        Self::permutation(vec![(site.into(), dim)], |l| vec![l[0] ^ value])
            .expect("XOR by a constant is a bijection")
    }

    /// Phase `(-1)^{popcount(value & label)}`, the multi-qubit `Z^value`.
    pub fn z_pow(site: impl Into<SiteId>, dim: usize, value: u32) -> Self {
        let phases = (0..dim as u32)
            .map(|r| {
                if (r & value).count_ones().is_multiple_of(2) {
                    Complex::one()
                } else {
                    -Complex::<T>::one()
                }
            })
            .collect();
        Self::diagonal(site, phases)
    }

    /// Exchanges the basis values `a` and `b` of one register.
    pub fn swap_values(site: impl Into<SiteId>, dim: usize, a: u32, b: u32) -> Self {
        assert!((a as usize) < dim && (b as usize) < dim);
        Self::permutation(vec![(site.into(), dim)], |l| {
            let v = l[0];
            vec![if v == a {
                b
            } else if v == b {
                a
            } else {
                v
            }]
        })
        .expect("transposition is a bijection")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn rejects_non_unitary() {
        let m = vec![c::<f64>(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            GateSpec::unitary(vec![("q".into(), 2)], m),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn rejects_non_bijection() {
        assert_eq!(
            GateSpec::<f64>::permutation_table(vec![("q".into(), 2)], vec![0, 0]).unwrap_err(),
            Error::NotBijective
        );
    }

    #[test]
    fn xor_add_needs_power_of_two() {
        assert!(matches!(
            GateSpec::<f64>::xor_add("a", "b", 6),
            Err(Error::DimMismatch(_))
        ));
    }
}
