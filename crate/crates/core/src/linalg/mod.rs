//! Dense complex linear algebra over finite-dimensional tensor-product spaces.
//!
//! Every object carries its subsystem dimensions. Basis indices are
//! row-major over subsystems: subsystem 0 is the most significant digit.

mod eigen;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{arg, Error, Result};

pub use eigen::hermitian_eigenvalues;

pub type C64 = Complex64;

/// Largest total Hilbert-space dimension any object may have.
pub const MAX_TOTAL_DIM: usize = 4096;
/// Tolerance for Hermiticity, trace and normalisation checks.
pub const EPS: f64 = 1e-12;
/// Allowed negative slack on density-operator eigenvalues.
pub const PSD_SLACK: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

fn total_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return arg("at least one subsystem is required");
    }
    let mut total: usize = 1;
    for &d in dims {
        if d == 0 {
            return arg("subsystem dimensions must be positive");
        }
        total = total
            .checked_mul(d)
            .filter(|&t| t <= MAX_TOTAL_DIM)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "total dimension of {dims:?} exceeds {MAX_TOTAL_DIM}"
                ))
            })?;
    }
    Ok(total)
}

/// Digits of `index` in the mixed radix given by `dims`.
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn from_digits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// For a subsystem permutation, the map from new basis index to old basis index.
fn permutation_map(dims: &[usize], order: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len() {
        return arg("permutation length must equal the number of subsystems");
    }
    for &o in order {
        if o >= dims.len() || seen[o] {
            return arg(format!("{order:?} is not a permutation of subsystems"));
        }
        seen[o] = true;
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let total: usize = dims.iter().product();
    let map = (0..total)
        .map(|new_index| {
            let new_digits = digits(new_index, &new_dims);
            let mut old_digits = vec![0; dims.len()];
            for (j, &o) in order.iter().enumerate() {
                old_digits[o] = new_digits[j];
            }
            from_digits(&old_digits, dims)
        })
        .collect();
    Ok((new_dims, map))
}

fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(r, c)| {
        a[[r / br, c / bc]] * b[[r % br, c % bc]]
    })
}

fn is_hermitian(m: &Array2<C64>, tol: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (i..n).all(|j| (m[[i, j]] - m[[j, i]].conj()).norm() <= tol))
}

/// A pure state over a tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Array1<C64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let total = total_dim(&dims)?;
        if amps.len() != total {
            return arg(format!(
                "{} amplitudes supplied for total dimension {total}",
                amps.len()
            ));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return arg("amplitudes must be finite");
        }
        Ok(Self { dims, amps: Array1::from(amps) })
    }

    /// Computational basis vector `index`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = total_dim(&dims)?;
        if index >= total {
            return arg(format!("basis index {index} out of range {total}"));
        }
        let mut amps = vec![ZERO; total];
        amps[index] = ONE;
        Self::new(dims, amps)
    }

    /// Product basis state with one digit per subsystem, e.g. `[0, 1, 0, 1]` for |0101⟩.
    pub fn product_basis(dims: Vec<usize>, levels: &[usize]) -> Result<Self> {
        if levels.len() != dims.len() || levels.iter().zip(&dims).any(|(l, d)| l >= d) {
            return arg(format!("levels {levels:?} incompatible with dims {dims:?}"));
        }
        let index = from_digits(levels, &dims);
        Self::basis(dims, index)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// True iff the squared norm is within `EPS` of one.
    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= EPS
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Numerical("cannot normalise a zero vector".into()));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { dims: self.dims.clone(), amps: self.amps.mapv(|a| a * c) }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dims != other.dims {
            return arg(format!("dims {:?} and {:?} differ", self.dims, other.dims));
        }
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Σ cᵢ|ψᵢ⟩ over states sharing the same dims.
    pub fn linear_combination(terms: &[(C64, &StateVector)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Argument("empty linear combination".into()))?;
        let mut amps = Array1::<C64>::zeros(first.dim());
        for (c, s) in terms {
            if s.dims != first.dims {
                return arg("linear combination of states with different dims");
            }
            amps.scaled_add(*c, &s.amps);
        }
        Ok(Self { dims: first.dims.clone(), amps })
    }

    /// Reorders subsystems: new subsystem `j` is old subsystem `order[j]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let (dims, map) = permutation_map(&self.dims, order)?;
        let amps = map.iter().map(|&old| self.amps[old]).collect::<Array1<_>>();
        Ok(Self { dims, amps })
    }

    /// |ψ⟩⟨ψ| / ⟨ψ|ψ⟩.
    pub fn projector(&self) -> Result<DensityOperator> {
        let psi = self.normalize()?;
        let n = psi.dim();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| psi.amps[i] * psi.amps[j].conj());
        Ok(DensityOperator { dims: self.dims.clone(), matrix })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A square operator; not required to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    dims: Vec<usize>,
    matrix: Array2<C64>,
}

impl LinearOperator {
    pub fn new(dims: Vec<usize>, matrix: Array2<C64>) -> Result<Self> {
        let total = total_dim(&dims)?;
        if matrix.dim() != (total, total) {
            return arg(format!(
                "matrix shape {:?} does not match total dimension {total}",
                matrix.dim()
            ));
        }
        Ok(Self { dims, matrix })
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let total = total_dim(&dims)?;
        Ok(Self { dims, matrix: Array2::eye(total) })
    }

    pub fn from_fn(dims: Vec<usize>, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        let total = total_dim(&dims)?;
        Ok(Self { dims, matrix: Array2::from_shape_fn((total, total), |(i, j)| f(i, j)) })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { dims: self.dims.clone(), matrix: self.matrix.t().mapv(|z| z.conj()) }
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.dims != rhs.dims {
            return arg(format!("dims {:?} and {:?} differ", self.dims, rhs.dims));
        }
        Ok(Self { dims: self.dims.clone(), matrix: self.matrix.dot(&rhs.matrix) })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dims != rhs.dims {
            return arg(format!("dims {:?} and {:?} differ", self.dims, rhs.dims));
        }
        Ok(Self { dims: self.dims.clone(), matrix: &self.matrix + &rhs.matrix })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { dims: self.dims.clone(), matrix: self.matrix.mapv(|z| z * c) }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.dims != state.dims {
            return arg(format!("operator dims {:?} vs state dims {:?}", self.dims, state.dims));
        }
        Ok(StateVector { dims: self.dims.clone(), amps: self.matrix.dot(&state.amps) })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().iter().sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        is_hermitian(&self.matrix, tol)
    }

    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let (dims, map) = permutation_map(&self.dims, order)?;
        let n = map.len();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| self.matrix[[map[i], map[j]]]);
        Ok(Self { dims, matrix })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A mixed state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    matrix: Array2<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity before accepting `matrix`.
    pub fn new(dims: Vec<usize>, matrix: Array2<C64>) -> Result<Self> {
        let total = total_dim(&dims)?;
        if matrix.dim() != (total, total) {
            return arg(format!(
                "matrix shape {:?} does not match total dimension {total}",
                matrix.dim()
            ));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return arg("density matrix entries must be finite");
        }
        if !is_hermitian(&matrix, EPS) {
            return arg("density matrix is not Hermitian");
        }
        let tr: C64 = matrix.diag().iter().sum();
        if (tr.re - 1.0).abs() > EPS {
            return arg(format!("density matrix trace {} is not 1", tr.re));
        }
        let min_ev = hermitian_eigenvalues(&matrix).first().copied().unwrap_or(0.0);
        if min_ev < -PSD_SLACK {
            return arg(format!("density matrix has negative eigenvalue {min_ev}"));
        }
        Ok(Self { dims, matrix })
    }

    pub fn pure(state: &StateVector) -> Result<Self> {
        state.projector()
    }

    /// I/d.
    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = total_dim(&dims)?;
        let matrix = Array2::eye(total).mapv(|z: C64| z / total as f64);
        Ok(Self { dims, matrix })
    }

    /// Convex combination Σ pᵢ ρᵢ; weights must be nonnegative and sum to one.
    pub fn mixture(terms: &[(f64, DensityOperator)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Argument("empty mixture".into()))?;
        let mut matrix = Array2::<C64>::zeros(first.matrix.dim());
        let mut total_weight = 0.0;
        for (p, rho) in terms {
            if *p < 0.0 || !p.is_finite() {
                return arg("mixture weights must be nonnegative");
            }
            if rho.dims != first.dims {
                return arg("mixture of operators with different dims");
            }
            matrix.scaled_add(C64::new(*p, 0.0), &rho.matrix);
            total_weight += p;
        }
        if (total_weight - 1.0).abs() > EPS {
            return arg(format!("mixture weights sum to {total_weight}"));
        }
        Ok(Self { dims: first.dims.clone(), matrix })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().iter().sum()
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σᵢⱼ |ρᵢⱼ|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn as_operator(&self) -> LinearOperator {
        LinearOperator { dims: self.dims.clone(), matrix: self.matrix.clone() }
    }

    /// Traces out every subsystem not listed in `keep`. The result lists the
    /// kept subsystems in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return arg("partial trace needs at least one kept subsystem");
        }
        let n_sub = self.dims.len();
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() != keep.len() || kept.iter().any(|&k| k >= n_sub) {
            return arg(format!("invalid keep set {keep:?} for {n_sub} subsystems"));
        }
        let traced: Vec<usize> = (0..n_sub).filter(|i| !kept.contains(i)).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&i| self.dims[i]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| self.dims[i]).collect();
        let kept_total: usize = kept_dims.iter().product();
        let traced_total: usize = traced_dims.iter().product();

        // groups[t][k] = full index whose traced digits encode t and kept digits encode k
        let mut groups = vec![vec![0usize; kept_total]; traced_total];
        for full in 0..self.dim() {
            let d = digits(full, &self.dims);
            let k_digits: Vec<usize> = kept.iter().map(|&i| d[i]).collect();
            let t_digits: Vec<usize> = traced.iter().map(|&i| d[i]).collect();
            let t = if traced.is_empty() { 0 } else { from_digits(&t_digits, &traced_dims) };
            groups[t][from_digits(&k_digits, &kept_dims)] = full;
        }
        let mut matrix = Array2::<C64>::zeros((kept_total, kept_total));
        for group in &groups {
            for (a, &fa) in group.iter().enumerate() {
                for (b, &fb) in group.iter().enumerate() {
                    matrix[[a, b]] += self.matrix[[fa, fb]];
                }
            }
        }
        Ok(Self { dims: kept_dims, matrix })
    }

    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let op = self.as_operator().permute(order)?;
        Ok(Self { dims: op.dims, matrix: op.matrix })
    }

    /// U ρ U†.
    pub fn conjugate(&self, u: &LinearOperator) -> Result<Self> {
        if u.dims != self.dims {
            return arg("unitary dims do not match the state");
        }
        let matrix = u.matrix.dot(&self.matrix).dot(&u.adjoint().matrix);
        Ok(Self { dims: self.dims.clone(), matrix })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Kronecker product with the left operand as the most significant block.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

fn joined_dims(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    let dims: Vec<usize> = a.iter().chain(b).copied().collect();
    total_dim(&dims)?;
    Ok(dims)
}

impl TensorProduct for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let dims = joined_dims(&self.dims, &other.dims)?;
        let nb = other.dim();
        let amps = Array1::from_shape_fn(self.dim() * nb, |i| self.amps[i / nb] * other.amps[i % nb]);
        Ok(Self { dims, amps })
    }
}

impl TensorProduct for LinearOperator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let dims = joined_dims(&self.dims, &other.dims)?;
        Ok(Self { dims, matrix: kron(&self.matrix, &other.matrix) })
    }
}

impl TensorProduct for DensityOperator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let dims = joined_dims(&self.dims, &other.dims)?;
        Ok(Self { dims, matrix: kron(&self.matrix, &other.matrix) })
    }
}

pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// ⟨ψ|O|ψ⟩ for pure states, tr(ρO) for mixed ones.
pub trait Expectation {
    fn expectation(&self, op: &LinearOperator) -> Result<C64>;
}

impl Expectation for StateVector {
    fn expectation(&self, op: &LinearOperator) -> Result<C64> {
        let applied = op.apply(self)?;
        self.inner(&applied)
    }
}

impl Expectation for DensityOperator {
    fn expectation(&self, op: &LinearOperator) -> Result<C64> {
        if op.dims != self.dims {
            return arg(format!("operator dims {:?} vs state dims {:?}", op.dims, self.dims));
        }
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[[i, j]] * op.matrix[[j, i]];
            }
        }
        Ok(acc)
    }
}

pub fn expectation<S: Expectation>(state: &S, op: &LinearOperator) -> Result<C64> {
    state.expectation(op)
}

/// Operator exchanging two subsystems of equal dimension `d` on C^d ⊗ C^d.
pub fn swap_operator(d: usize) -> Result<LinearOperator> {
    LinearOperator::from_fn(vec![d, d], |i, j| {
        let (a, b) = (j / d, j % d);
        if i == b * d + a {
            ONE
        } else {
            ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn psi_plus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![2, 2], vec![c(0.0), c(h), c(h), c(0.0)]).unwrap()
    }

    fn werner(p: f64) -> DensityOperator {
        let pp = psi_plus().projector().unwrap();
        let mixed = DensityOperator::maximally_mixed(vec![2, 2]).unwrap();
        DensityOperator::mixture(&[(p, pp), (1.0 - p, mixed)]).unwrap()
    }

    #[test]
    fn product_of_basis_states() {
        let zero = StateVector::basis(vec![2], 0).unwrap();
        let one = StateVector::basis(vec![2], 1).unwrap();
        let prod = tensor_product(&zero, &one).unwrap();
        assert_eq!(prod.dims(), &[2, 2]);
        let expected = [0.0, 1.0, 0.0, 0.0];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(prod.amplitude(i), c(*e));
        }
    }

    #[test]
    fn identity_product() {
        let i2 = LinearOperator::identity(vec![2]).unwrap();
        let i4 = tensor_product(&i2, &i2).unwrap();
        assert_eq!(i4, LinearOperator::identity(vec![2, 2]).unwrap());
    }

    #[test]
    fn psi_plus_squared_expansion() {
        let pp = tensor_product(&psi_plus(), &psi_plus()).unwrap();
        // |0101⟩, |0110⟩, |1001⟩, |1010⟩ = 5, 6, 9, 10
        for i in 0..16 {
            let expected = if [5, 6, 9, 10].contains(&i) { 0.5 } else { 0.0 };
            assert!((pp.amplitude(i) - c(expected)).norm() < 1e-15, "index {i}");
        }
    }

    #[test]
    fn capacity_error_on_oversized_product() {
        let big = StateVector::basis(vec![64, 64], 0).unwrap();
        let small = StateVector::basis(vec![2], 0).unwrap();
        assert!(matches!(big.tensor(&small), Err(Error::Capacity(_))));
    }

    #[test]
    fn reduced_bell_state_is_maximally_mixed() {
        let rho = psi_plus().projector().unwrap();
        let reduced = rho.partial_trace(&[0]).unwrap();
        let half = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert!(reduced.max_abs_diff(&half) < 1e-15);
        let reduced_b = rho.partial_trace(&[1]).unwrap();
        assert!(reduced_b.max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn reduced_product_state() {
        let rho = StateVector::product_basis(vec![2, 2], &[0, 1]).unwrap().projector().unwrap();
        let zero = StateVector::basis(vec![2], 0).unwrap().projector().unwrap();
        assert!(rho.partial_trace(&[0]).unwrap().max_abs_diff(&zero) < 1e-15);
    }

    #[test]
    fn reduced_werner_state() {
        let reduced = werner(0.5).partial_trace(&[0]).unwrap();
        let half = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert!(reduced.max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn empty_keep_set_rejected() {
        let rho = werner(0.5);
        assert!(matches!(rho.partial_trace(&[]), Err(Error::Argument(_))));
        assert!(matches!(rho.partial_trace(&[2]), Err(Error::Argument(_))));
    }

    #[test]
    fn purity_values() {
        let zero = StateVector::basis(vec![2], 0).unwrap().projector().unwrap();
        assert!((zero.purity() - 1.0).abs() < 1e-15);
        let half = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert!((half.purity() - 0.5).abs() < 1e-15);
        assert!((werner(0.5).purity() - 0.4375).abs() < 1e-15);
    }

    #[test]
    fn werner_purity_matches_explicit_matrix_square() {
        let rho = werner(0.5);
        let sq = rho.matrix().dot(rho.matrix());
        let tr: C64 = sq.diag().iter().sum();
        assert!((tr.re - rho.purity()).abs() < 1e-15);
    }

    #[test]
    fn expectation_values() {
        let z = LinearOperator::new(
            vec![2],
            ndarray::arr2(&[[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]),
        )
        .unwrap();
        let zero = StateVector::basis(vec![2], 0).unwrap();
        assert_eq!(expectation(&zero, &z).unwrap(), c(1.0));

        let sym = LinearOperator::identity(vec![2, 2])
            .unwrap()
            .add(&swap_operator(2).unwrap())
            .unwrap()
            .scale(c(0.5));
        assert!((expectation(&psi_plus(), &sym).unwrap() - c(1.0)).norm() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi_minus = StateVector::new(vec![2, 2], vec![c(0.0), c(h), c(-h), c(0.0)]).unwrap();
        assert!(expectation(&psi_minus, &sym).unwrap().norm() < 1e-15);
        let rho = psi_plus().projector().unwrap();
        assert!((expectation(&rho, &sym).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let zero = StateVector::basis(vec![2], 0).unwrap();
        let id4 = LinearOperator::identity(vec![2, 2]).unwrap();
        assert!(matches!(expectation(&zero, &id4), Err(Error::Argument(_))));
    }

    #[test]
    fn density_validation() {
        let bad_trace = Array2::<C64>::eye(2);
        assert!(DensityOperator::new(vec![2], bad_trace).is_err());
        let mut not_herm = Array2::<C64>::eye(2) * c(0.5);
        not_herm[[0, 1]] = c(0.1);
        assert!(DensityOperator::new(vec![2], not_herm).is_err());
        let mut negative = Array2::<C64>::zeros((2, 2));
        negative[[0, 0]] = c(1.5);
        negative[[1, 1]] = c(-0.5);
        assert!(DensityOperator::new(vec![2], negative).is_err());
    }

    #[test]
    fn permutation_moves_subsystems() {
        let s = StateVector::product_basis(vec![2, 3], &[1, 2]).unwrap();
        let p = s.permute(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[3, 2]);
        assert_eq!(p, StateVector::product_basis(vec![3, 2], &[2, 1]).unwrap());
    }
}
