// Dense numerical kernels index several arrays in lockstep.
#![allow(clippy::needless_range_loop)]

use crate::error::{invalid, Error, Result};
use crate::field::SampledField;
use crate::media::MediumModel;

use super::operator::{Boundary, DiscreteOperator};

/// Iteration cap per eigenvalue for the QL sweeps and per vector for inverse iteration.
pub const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues closer than this fraction of `‖matrix‖` are treated as a
/// cluster and their inverse-iteration vectors are reorthogonalized.
const CLUSTER_FRACTION: f64 = 1e-3;

/// Eigenpair of a [`DiscreteOperator`].
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// Position in the ascending spectrum.
    pub index: usize,
    pub lambda: f64,
    /// Coordinates of the unknowns.
    pub points: Vec<f64>,
    /// Box-normalized: `Σ v_i² Δz = 1`.
    pub vector: Vec<f64>,
    /// `f⁻¹(√λ)`, filled in by [`EigenPair::attach_frequency`].
    pub omega: Option<f64>,
}

impl EigenPair {
    pub fn field(&self) -> SampledField {
        SampledField::from_real(self.points.clone(), &self.vector, format!("eigvec_{}", self.index))
            .expect("points and vector have equal length")
    }

    pub fn attach_frequency(&mut self, model: &MediumModel) -> Result<f64> {
        let omega = omega_from_lambda(model, self.lambda.max(0.0))?;
        self.omega = Some(omega);
        Ok(omega)
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix, eigenvalues only.
/// `e[i]` couples rows `i` and `i + 1`. Returns the spectrum unsorted.
fn tridiagonal_values(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::ConvergenceFailure { iterations });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Row-major square matrix.
struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    fn identity(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Self { n, a }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }
}

/// Householder reduction of the symmetric matrix held in `v` to tridiagonal
/// form; on return `v` holds the accumulated transformation, `d` the
/// diagonal and `e[1..]` the subdiagonal.
fn householder_tridiagonal(v: &mut Dense, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.at(j, j) * f;
                for k in j + 1..i {
                    g += v.at(k, j) * d[k];
                    e[k] += v.at(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let val = v.at(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        let vii = v.at(i, i);
        v.set(n - 1, i, vii);
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.at(k, i + 1) * v.at(k, j);
                }
                for k in 0..=i {
                    let val = v.at(k, j) - g * d[k];
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit QL with eigenvector accumulation into `v` (columns), for the
/// tridiagonal `d`, `e[1..]` (subdiagonal, `e[0]` ignored).
fn ql_with_vectors(v: &mut Dense, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = v.n;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > MAX_QL_ITERATIONS {
                    return Err(Error::ConvergenceFailure { iterations });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v.at(k, i + 1);
                        let vk = v.at(k, i);
                        v.set(k, i + 1, s * vk + c * hk);
                        v.set(k, i, c * vk - s * hk);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// All eigenpairs, ascending, vectors as columns of an orthonormal matrix.
fn full_decomposition(op: &DiscreteOperator) -> Result<(Vec<f64>, Dense)> {
    let n = op.dim();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v;
    match op.boundary {
        Boundary::Dirichlet => {
            v = Dense::identity(n);
            d.copy_from_slice(&op.diag);
            e[1..].copy_from_slice(&op.off);
        }
        Boundary::Periodic => {
            v = Dense {
                n,
                a: op.to_dense().concat(),
            };
            householder_tridiagonal(&mut v, &mut d, &mut e);
        }
    }
    ql_with_vectors(&mut v, &mut d, &mut e)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| d[*a].total_cmp(&d[*b]));
    let values = order.iter().map(|&j| d[j]).collect();
    let mut sorted = Dense { n, a: vec![0.0; n * n] };
    for (col, &j) in order.iter().enumerate() {
        for k in 0..n {
            sorted.set(k, col, v.at(k, j));
        }
    }
    Ok((values, sorted))
}

/// Ascending spectrum of the operator.
pub fn eigenvalues(op: &DiscreteOperator) -> Result<Vec<f64>> {
    let mut values = match op.boundary {
        Boundary::Dirichlet => tridiagonal_values(&op.diag, &op.off)?,
        Boundary::Periodic => {
            let n = op.dim();
            let mut v = Dense {
                n,
                a: op.to_dense().concat(),
            };
            let mut d = vec![0.0; n];
            let mut e = vec![0.0; n];
            householder_tridiagonal(&mut v, &mut d, &mut e);
            tridiagonal_values(&d, &e[1..])?
        }
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Box normalization and the sign convention (first significant component positive).
fn normalize(x: &mut [f64], dz: f64) {
    let norm = (x.iter().map(|v| v * v).sum::<f64>() * dz).sqrt();
    let peak = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let first = x.iter().find(|v| v.abs() > 1e-8 * peak).copied().unwrap_or(1.0);
    let scale = first.signum() / norm;
    for v in x.iter_mut() {
        *v *= scale;
    }
}

/// LU factorization with partial pivoting of `T − σI` for tridiagonal `T`.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(diag: &[f64], off: &[f64], shift: f64, floor: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = floor;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for di in d.iter_mut() {
            if di.abs() < floor {
                *di = if *di < 0.0 { -floor } else { floor };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Inverse iteration for a Dirichlet eigenvalue, orthogonal to `against`.
fn inverse_iteration(op: &DiscreteOperator, lambda: f64, against: &[&[f64]]) -> Result<Vec<f64>> {
    let n = op.dim();
    let norm = op.norm();
    let floor = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
    let lu = ShiftedLu::new(&op.diag, &op.off, lambda, floor);
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).sin())
        .collect();
    let tolerance = 1e3 * f64::EPSILON * norm;
    let mut converged_once = false;
    for _ in 0..MAX_QL_ITERATIONS {
        lu.solve(&mut x);
        for q in against {
            let qq: f64 = q.iter().map(|v| v * v).sum();
            let proj: f64 = q.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / qq;
            for (xi, qi) in x.iter_mut().zip(q.iter()) {
                *xi -= proj * qi;
            }
        }
        let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::ConvergenceFailure { iterations: 0 });
        }
        for v in x.iter_mut() {
            *v /= len;
        }
        let y = op.apply(&x);
        let residual = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tolerance {
            if converged_once {
                return Ok(x);
            }
            converged_once = true;
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: MAX_QL_ITERATIONS,
    })
}

/// Eigenpairs at the given positions of the ascending spectrum.
pub fn eigenpairs_at(op: &DiscreteOperator, indices: &[usize]) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if let Some(i) = indices.iter().find(|&&i| i >= n) {
        return Err(invalid(format!("eigenpair index {i} out of range for dimension {n}")));
    }
    let dz = op.grid.spacing();
    let points = op.points();
    let mut pairs = Vec::with_capacity(indices.len());
    match op.boundary {
        Boundary::Dirichlet => {
            let values = eigenvalues(op)?;
            let cluster = CLUSTER_FRACTION * op.norm();
            let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
            for &index in indices {
                let lambda = values[index];
                let near: Vec<&[f64]> = found
                    .iter()
                    .filter(|(l, _)| (l - lambda).abs() < cluster)
                    .map(|(_, v)| v.as_slice())
                    .collect();
                let x = inverse_iteration(op, lambda, &near)?;
                found.push((lambda, x.clone()));
                let mut vector = x;
                normalize(&mut vector, dz);
                pairs.push(EigenPair {
                    index,
                    lambda,
                    points: points.clone(),
                    vector,
                    omega: None,
                });
            }
        }
        Boundary::Periodic => {
            let (values, v) = full_decomposition(op)?;
            for &index in indices {
                let mut vector: Vec<f64> = (0..n).map(|k| v.at(k, index)).collect();
                normalize(&mut vector, dz);
                pairs.push(EigenPair {
                    index,
                    lambda: values[index],
                    points: points.clone(),
                    vector,
                    omega: None,
                });
            }
        }
    }
    Ok(pairs)
}

/// The `k` lowest eigenpairs.
pub fn eigensolve(op: &DiscreteOperator, k: usize) -> Result<Vec<EigenPair>> {
    if k == 0 || k > op.dim() {
        return Err(invalid(format!("eigensolve needs 1 ≤ k ≤ {}, got {k}", op.dim())));
    }
    let indices: Vec<usize> = (0..k).collect();
    eigenpairs_at(op, &indices)
}

/// Complete eigenbasis: ascending values and box-normalized vectors.
pub(crate) fn full_eigenbasis(op: &DiscreteOperator) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = op.dim();
    let dz = op.grid.spacing();
    let (values, v) = full_decomposition(op)?;
    let vectors = (0..n)
        .map(|j| {
            let mut x: Vec<f64> = (0..n).map(|k| v.at(k, j)).collect();
            normalize(&mut x, dz);
            x
        })
        .collect();
    Ok((values, vectors))
}

/// Solve `f(ω) = √λ` on the model's frequency window.
pub fn omega_from_lambda(model: &MediumModel, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("omega_from_lambda needs a finite λ ≥ 0, got {lambda}")));
    }
    let target = lambda.sqrt();
    let window = model.window();
    let mut lo = window.min;
    let f_lo = model.f(lo)?;
    let mut hi;
    let f_hi;
    if window.max.is_finite() {
        hi = window.max;
        f_hi = model.f(hi)?;
    } else {
        hi = lo.max(1.0);
        let mut fh = model.f(hi)?;
        let mut doublings = 0;
        while fh < target && doublings < 1100 {
            hi *= 2.0;
            fh = model.f(hi)?;
            doublings += 1;
        }
        f_hi = fh;
    }
    if target < f_lo || target > f_hi {
        return Err(Error::OutOfRange {
            target,
            lo: f_lo,
            hi: f_hi,
        });
    }
    let tolerance = 1e-12 * target.max(1.0);
    if (f_lo - target).abs() <= tolerance {
        return Ok(lo);
    }
    if (f_hi - target).abs() <= tolerance {
        return Ok(hi);
    }
    let mut omega = 0.5 * (lo + hi);
    for _ in 0..400 {
        omega = 0.5 * (lo + hi);
        let value = model.f(omega)?;
        if (value - target).abs() <= tolerance || hi - lo <= 4.0 * f64::EPSILON * omega.abs() {
            break;
        }
        if value < target {
            lo = omega;
        } else {
            hi = omega;
        }
    }
    // Newton polish, kept inside the bracket.
    for _ in 0..3 {
        let (value, slope) = model.f_and_derivative(omega)?;
        let step = (value - target) / slope;
        let next = omega - step;
        if !(next >= lo && next <= hi) || step == 0.0 {
            break;
        }
        omega = next;
    }
    Ok(omega)
}
