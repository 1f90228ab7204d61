//! Random Gaussian states built from symplectic circuits acting on thermal
//! states, shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4};
use oamcv::{CovarianceMatrix, SqueezingSpec};
use rand::Rng;

pub fn source_spec() -> SqueezingSpec {
    SqueezingSpec::new(0.47, 4.11).unwrap()
}

fn block_diag(a: Matrix2<f64>, b: Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&b);
    m
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn squeezer(r: f64) -> Matrix2<f64> {
    Matrix2::new((-r).exp(), 0.0, 0.0, r.exp())
}

fn beam_splitter(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    let i = Matrix2::identity();
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(i * c));
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&(i * s));
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&(i * -s));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&(i * c));
    m
}

fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(Matrix2::identity() * r.cosh()));
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&(z * r.sinh()));
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&(z * r.sinh()));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&(Matrix2::identity() * r.cosh()));
    m
}

fn local<R: Rng>(rng: &mut R, max_r: f64) -> Matrix4<f64> {
    let mut side = || {
        rotation(rng.random_range(0.0..std::f64::consts::TAU))
            * squeezer(rng.random_range(-max_r..max_r))
            * rotation(rng.random_range(0.0..std::f64::consts::TAU))
    };
    let a = side();
    let b = side();
    block_diag(a, b)
}

/// A physical two-mode state `S D Sᵀ` with thermal eigenvalues in
/// `[1, 1 + max_thermal]` and squeezing parameters bounded by `max_r`.
pub fn random_state<R: Rng>(rng: &mut R, max_r: f64, max_thermal: f64) -> CovarianceMatrix {
    let n1 = 1.0 + rng.random_range(0.0..max_thermal);
    let n2 = 1.0 + rng.random_range(0.0..max_thermal);
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(n1, n1, n2, n2));
    let s = local(rng, max_r)
        * beam_splitter(rng.random_range(0.0..std::f64::consts::PI))
        * two_mode_squeezer(rng.random_range(0.0..max_r))
        * local(rng, max_r);
    let m = s * d * s.transpose();
    CovarianceMatrix::new((m + m.transpose()) * 0.5).unwrap()
}

/// A random admissible `(V, V')` pair: `V·V' ≥ 1`, either side of vacuum.
pub fn random_spec<R: Rng>(rng: &mut R) -> SqueezingSpec {
    let v = rng.random_range(0.05..3.0);
    let vp = (1.0 / v) * (1.0 + rng.random_range(0.0..4.0));
    SqueezingSpec::new(v, vp).unwrap()
}
